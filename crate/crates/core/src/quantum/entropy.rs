use super::spectrum::degenerate_groups;
use super::{CMatrix, DensityMatrix, HermitianOperator, C64, SUPPORT_FLOOR};
use crate::error::{Error, Result};

fn xlnx(x: f64) -> f64 {
    if x > SUPPORT_FLOOR {
        x * x.ln()
    } else {
        0.0
    }
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlnx(x)).sum::<f64>()
}

/// `H(rho) = -tr(rho ln rho)`
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(rho.eigenvalues())
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a, got: b })
    }
}

/// `S(rho||sigma) = tr(rho ln rho) - tr(rho ln sigma)`, evaluated in the two
/// eigenbases:
/// `sum_i p_i ln p_i - sum_ij p_i |<p_i|s_j>|^2 ln s_j`.
pub fn quantum_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let p = rho.spectrum();
    let s = sigma.spectrum();
    let support: Vec<(usize, f64)> = s
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_FLOOR)
        .map(|(j, &v)| (j, v.ln()))
        .collect();

    let overlaps: CMatrix = p.vectors().adjoint() * s.vectors();
    let mut self_term = 0.0;
    let mut cross_term = 0.0;
    for (i, &pi) in p.values().iter().enumerate() {
        if pi <= SUPPORT_FLOOR {
            continue;
        }
        self_term += pi * pi.ln();
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for &(j, ln_s) in &support {
            let o = overlaps[(i, j)].norm_sqr();
            mass += o;
            weighted += o * ln_s;
        }
        if (1.0 - mass).abs() > SUPPORT_FLOOR {
            return Err(Error::SupportViolation(format!(
                "eigenvector {i} of rho (p = {pi:e}) has weight {:e} outside supp(sigma)",
                1.0 - mass
            )));
        }
        cross_term += pi * weighted;
    }
    Ok(self_term - cross_term)
}

/// Kullback-Leibler divergence of the descending-sorted eigenvalue lists,
/// `D(rho||sigma) = sum_i p_i ln(p_i / s_i)`.
pub fn spectral_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let mut acc = 0.0;
    for (i, (&p, &s)) in rho.eigenvalues().iter().zip(sigma.eigenvalues()).enumerate() {
        if p <= SUPPORT_FLOOR {
            continue;
        }
        if s <= SUPPORT_FLOOR {
            return Err(Error::SupportViolation(format!(
                "sorted eigenvalue {i}: p = {p:e} but s = {s:e}"
            )));
        }
        acc += p * (p / s).ln();
    }
    Ok(acc)
}

/// Removes coherences between distinct energy levels of `h`. Inside a
/// degenerate energy eigenspace the block is kept intact.
pub fn dephase(rho: &DensityMatrix, h: &HermitianOperator) -> Result<DensityMatrix> {
    check_dims(h.dim(), rho.dim())?;
    let spectrum = h.spectrum();
    let v = spectrum.vectors();
    let mut in_basis = v.adjoint() * rho.matrix() * v;
    let groups = degenerate_groups(spectrum.values());
    let mut cluster = vec![0usize; h.dim()];
    for (g, range) in groups.iter().enumerate() {
        for i in range.clone() {
            cluster[i] = g;
        }
    }
    let zero = C64::new(0.0, 0.0);
    for r in 0..h.dim() {
        for c in 0..h.dim() {
            if cluster[r] != cluster[c] {
                in_basis[(r, c)] = zero;
            }
        }
    }
    if groups.iter().all(|g| g.len() == 1) {
        // Already diagonal in a known basis: skip the eigensolver.
        let populations: Vec<f64> = (0..h.dim()).map(|i| in_basis[(i, i)].re).collect();
        let total: f64 = populations.iter().sum();
        let populations: Vec<f64> = populations.iter().map(|p| p.max(0.0) / total).collect();
        return DensityMatrix::from_spectrum(&populations, v);
    }
    DensityMatrix::new(v * in_basis * v.adjoint())
}

/// Relative entropy of coherence `C(rho) = H(L(rho)) - H(rho)`.
pub fn coherence_relative_entropy(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    let dephased = dephase(rho, h)?;
    Ok(von_neumann_entropy(&dephased) - von_neumann_entropy(rho))
}

//! Passive states and the ergotropy.
//!
//! The minimum of `tr(U rho U^dagger H)` over unitaries is attained by pairing
//! the descending eigenvalues of `rho` with the ascending energies of `H`, so
//! the direct route needs no optimizer. The entropic route evaluates
//! `beta E = S(rho||rho_eq) - D(rho||rho_eq)` and never looks at a unitary.

use serde::Serialize;

use crate::error::{check_beta, Error, Result};
use crate::quantum::{
    coherence_relative_entropy, dephase, gibbs_state, quantum_relative_entropy, spectral_relative_entropy,
    unitarity_defect, CMatrix, DensityMatrix, HermitianOperator,
};
use crate::random::{haar_unitary, stream_rng};

/// The unitary `sum_i |s_i><p_i|` that lines up the ordered eigenbasis of one
/// state with that of another.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentUnitary {
    matrix: CMatrix,
}

impl AlignmentUnitary {
    fn between(from: &CMatrix, to: &CMatrix) -> Self {
        Self { matrix: to * from.adjoint() }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.conjugated(&self.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgotropyReport {
    /// `tr(rho H) - tr(rho_passive H)`
    pub total: f64,
    pub via_entropies: f64,
    pub coherent: f64,
    /// `total - coherent`
    pub incoherent: f64,
    pub dephased_ergotropy: f64,
    pub beta_used: f64,
    pub passive_energy: f64,
}

fn check_dims(rho: &DensityMatrix, h: &HermitianOperator) -> Result<()> {
    if rho.dim() == h.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() })
    }
}

/// `sum_i p_i E_i` with `p` descending and `E` ascending.
pub fn passive_energy(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    check_dims(rho, h)?;
    Ok(rho.eigenvalues().iter().zip(h.energies()).map(|(p, e)| p * e).sum())
}

/// Passive state `sum_i p_i |E_i><E_i|` and the unitary that produces it.
pub fn passive_state(rho: &DensityMatrix, h: &HermitianOperator) -> Result<(DensityMatrix, AlignmentUnitary)> {
    check_dims(rho, h)?;
    let energy_basis = h.spectrum().vectors();
    let passive = DensityMatrix::from_spectrum(rho.eigenvalues(), energy_basis)?;
    let u = AlignmentUnitary::between(rho.spectrum().vectors(), energy_basis);
    Ok((passive, u))
}

pub fn ergotropy_direct(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    let passive = passive_energy(rho, h)?;
    Ok(rho.expectation(h) - passive)
}

/// `U = sum_i |s_i><p_i|` over the descending eigenbases, which minimizes
/// `S(U rho U^dagger || sigma)` to `D(rho||sigma)`.
pub fn optimal_alignment_unitary(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<AlignmentUnitary> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    Ok(AlignmentUnitary::between(rho.spectrum().vectors(), sigma.spectrum().vectors()))
}

/// `beta^-1 [S(rho||rho_eq) - D(rho||rho_eq)]`; independent of `beta`.
pub fn ergotropy_via_entropies(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_dims(rho, h)?;
    let eq = gibbs_state(h, beta)?;
    let s = quantum_relative_entropy(rho, eq.rho())?;
    let d = spectral_relative_entropy(rho, eq.rho())?;
    Ok((s - d) / beta)
}

/// `beta^-1 [C(rho) + S(L(rho)||rho_eq) - D(rho||rho_eq)]`, taken literally.
///
/// Since `S(rho||rho_eq) = C(rho) + S(L(rho)||rho_eq)` for every state, this
/// always equals [`ergotropy_via_entropies`]; the resulting incoherent part
/// is zero. [`dephased_ergotropy`] gives the alternative split.
pub fn coherent_ergotropy(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_dims(rho, h)?;
    let eq = gibbs_state(h, beta)?;
    let coherence = coherence_relative_entropy(rho, h)?;
    let dephased = dephase(rho, h)?;
    let population = quantum_relative_entropy(&dephased, eq.rho())?;
    let d = spectral_relative_entropy(rho, eq.rho())?;
    Ok((coherence + population - d) / beta)
}

/// Ergotropy of the dephased state, `E(L(rho))`.
pub fn dephased_ergotropy(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    ergotropy_direct(&dephase(rho, h)?, h)
}

pub fn ergotropy_report(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<ErgotropyReport> {
    let total = ergotropy_direct(rho, h)?;
    let coherent = coherent_ergotropy(rho, h, beta)?;
    Ok(ErgotropyReport {
        total,
        via_entropies: ergotropy_via_entropies(rho, h, beta)?,
        coherent,
        incoherent: total - coherent,
        dephased_ergotropy: dephased_ergotropy(rho, h)?,
        beta_used: beta,
        passive_energy: passive_energy(rho, h)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitaryProbe {
    pub n_samples: usize,
    /// Smallest `S(U rho U^dagger || sigma)` over the Haar samples.
    pub min: f64,
    pub mean: f64,
    /// `D(rho||sigma)`
    pub spectral: f64,
    /// `min - spectral`; never below `-1e-9`.
    pub gap: f64,
    /// `S(U rho U^dagger || sigma)` at the alignment unitary.
    pub aligned: f64,
    pub aligned_gap: f64,
}

/// Samples Haar unitaries and checks that none of them pushes the relative
/// entropy below the sorted-spectrum value. Sample `k` draws from stream `k`
/// of `seed`.
pub fn unitary_min_probe(rho: &DensityMatrix, sigma: &DensityMatrix, n_samples: usize, seed: u64) -> Result<UnitaryProbe> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let spectral = spectral_relative_entropy(rho, sigma)?;
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for k in 0..n_samples {
        let mut rng = stream_rng(seed, k as u64);
        let u = haar_unitary(rho.dim(), &mut rng);
        let s = quantum_relative_entropy(&rho.conjugated(&u)?, sigma)?;
        min = min.min(s);
        sum += s;
    }
    let aligned_rho = optimal_alignment_unitary(rho, sigma)?.apply(rho)?;
    let aligned = quantum_relative_entropy(&aligned_rho, sigma)?;
    Ok(UnitaryProbe {
        n_samples,
        min,
        mean: sum / n_samples as f64,
        spectral,
        gap: min - spectral,
        aligned,
        aligned_gap: aligned - spectral,
    })
}

use serde::Serialize;

use super::DrivingProtocol;
use crate::ergotropy::{coherent_ergotropy, dephased_ergotropy, ergotropy_direct};
use crate::error::{check_beta, Error, Result};
use crate::quantum::{
    coherence_relative_entropy, dephase, gibbs_state, log_sum_exp, polar_unitary, quantum_relative_entropy,
    real_trace_product, spectral_relative_entropy, unitarity_defect, CMatrix, DensityMatrix, HermitianOperator,
};
use crate::workbench::UNITARITY_GATE;

/// `sum_j w_j U|j_A><j_A|U^dagger` with `w_j ~ exp(-beta h_B(j_A))`,
/// `h_B(j_A) = <j_A|U^dagger H_B U|j_A>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalThermalState {
    pub rho: DensityMatrix,
    /// In ascending order of the `H_A` energies.
    pub weights: Vec<f64>,
    pub h_values: Vec<f64>,
    pub log_conditional_z: f64,
    pub unitary: CMatrix,
    /// `H_A` has a degenerate level, so `h_B` depends on the basis chosen
    /// inside it.
    pub degenerate_initial: bool,
}

fn check_drive(h_a: &HermitianOperator, h_b: &HermitianOperator, u: &CMatrix) -> Result<CMatrix> {
    if h_a.dim() != h_b.dim() {
        return Err(Error::DimensionMismatch { expected: h_a.dim(), got: h_b.dim() });
    }
    if u.nrows() != h_a.dim() || u.ncols() != h_a.dim() {
        return Err(Error::DimensionMismatch { expected: h_a.dim(), got: u.nrows() });
    }
    let defect = unitarity_defect(u);
    if !(defect <= UNITARITY_GATE) {
        return Err(Error::NotUnitary { defect });
    }
    Ok(polar_unitary(u))
}

pub fn conditional_thermal_state(
    h_a: &HermitianOperator,
    h_b: &HermitianOperator,
    u: &CMatrix,
    beta: f64,
) -> Result<ConditionalThermalState> {
    check_beta(beta)?;
    let unitary = check_drive(h_a, h_b, u)?;
    let moved = &unitary * h_a.spectrum().vectors();
    let h_values: Vec<f64> = moved.column_iter().map(|c| h_b.expectation(&c.into_owned())).collect();
    let exponents: Vec<f64> = h_values.iter().map(|h| -beta * h).collect();
    let log_conditional_z = log_sum_exp(&exponents);
    let mut weights: Vec<f64> = exponents.iter().map(|x| (x - log_conditional_z).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let rho = DensityMatrix::from_spectrum(&weights, &moved)?;
    Ok(ConditionalThermalState {
        rho,
        weights,
        h_values,
        log_conditional_z,
        unitary,
        degenerate_initial: h_a.spectrum().has_degeneracy(),
    })
}

/// Work bookkeeping for a Gibbs initial state, all in energy units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkAccounting {
    pub avg_work: f64,
    #[serde(rename = "delta_F")]
    pub delta_f: f64,
    pub w_irr: f64,
    pub beta: f64,
}

pub fn work_accounting(protocol: &DrivingProtocol, u: &CMatrix, beta: f64) -> Result<WorkAccounting> {
    check_beta(beta)?;
    let (h_a, h_b) = (protocol.h_a(), protocol.h_b());
    let unitary = check_drive(h_a, h_b, u)?;
    let eq_a = gibbs_state(h_a, beta)?;
    let eq_b = gibbs_state(h_b, beta)?;
    let evolved = eq_a.rho().conjugated(&unitary)?;
    let avg_work = real_trace_product(evolved.matrix(), h_b.matrix()) - real_trace_product(eq_a.rho().matrix(), h_a.matrix());
    let delta_f = -(eq_b.log_z() - eq_a.log_z()) / beta;
    Ok(WorkAccounting { avg_work, delta_f, w_irr: avg_work - delta_f, beta })
}

/// `beta E_i + C + S(L(rho)||rho_eq)` with the literal incoherent part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerms {
    pub incoherent: f64,
    pub coherence: f64,
    pub population: f64,
}

impl BoundTerms {
    pub fn sum(&self) -> f64 {
        self.incoherent + self.coherence + self.population
    }
}

/// `beta E(L(rho)) + beta [E(rho) - E(L(rho))] + D(rho||rho_eq)`: the split
/// that attributes to coherences only the ergotropy lost by dephasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AltBoundTerms {
    pub dephased: f64,
    pub coherent_gain: f64,
    pub divergence: f64,
}

impl AltBoundTerms {
    pub fn sum(&self) -> f64 {
        self.dephased + self.coherent_gain + self.divergence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkReport {
    #[serde(flatten)]
    pub work: WorkAccounting,
    /// `S(rho_B_cond || rho_B_eq)`, dimensionless.
    pub bound: f64,
    /// `ln Z_B - ln Z(B|A)`, the same quantity from partition functions.
    pub bound_from_partition: f64,
    pub bound_terms: BoundTerms,
    pub alt_bound_terms: AltBoundTerms,
    /// `beta <W> + ln <exp(-beta W)>` over the Gibbs weights of `H_A`.
    pub jensen_slack: f64,
    pub degenerate_initial: bool,
}

impl WorkReport {
    /// Inequalities and identities that fail by more than `tol`.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let w = &self.work;
        let beta_w_irr = w.beta * w.w_irr;
        let mut out = Vec::new();
        let mut check = |ok: bool, what: String| {
            if !ok {
                out.push(what);
            }
        };
        check(w.w_irr >= -tol, format!("w_irr = {} < 0", w.w_irr));
        check(beta_w_irr >= self.bound - tol, format!("beta w_irr = {beta_w_irr} below bound {}", self.bound));
        check(self.jensen_slack >= -tol, format!("jensen slack {} < 0", self.jensen_slack));
        check(
            (beta_w_irr - self.bound - self.jensen_slack).abs() <= tol,
            format!("beta w_irr - bound = {} but slack = {}", beta_w_irr - self.bound, self.jensen_slack),
        );
        check(
            (self.bound - self.bound_from_partition).abs() <= tol,
            format!("bound {} but ln Z_B - ln Z(B|A) = {}", self.bound, self.bound_from_partition),
        );
        check(
            (self.bound_terms.sum() - self.bound).abs() <= tol,
            format!("bound terms sum to {}, bound {}", self.bound_terms.sum(), self.bound),
        );
        check(
            (self.alt_bound_terms.sum() - self.bound).abs() <= tol,
            format!("alternative terms sum to {}, bound {}", self.alt_bound_terms.sum(), self.bound),
        );
        out
    }
}

pub fn sharpened_bound_report(protocol: &DrivingProtocol, u: &CMatrix, beta: f64) -> Result<WorkReport> {
    let work = work_accounting(protocol, u, beta)?;
    let (h_a, h_b) = (protocol.h_a(), protocol.h_b());
    let cond = conditional_thermal_state(h_a, h_b, u, beta)?;
    let eq_b = gibbs_state(h_b, beta)?;
    let rho = &cond.rho;

    let bound = quantum_relative_entropy(rho, eq_b.rho())?;
    let total = ergotropy_direct(rho, h_b)?;
    let bound_terms = BoundTerms {
        incoherent: beta * (total - coherent_ergotropy(rho, h_b, beta)?),
        coherence: coherence_relative_entropy(rho, h_b)?,
        population: quantum_relative_entropy(&dephase(rho, h_b)?, eq_b.rho())?,
    };
    let dephased = dephased_ergotropy(rho, h_b)?;
    let alt_bound_terms = AltBoundTerms {
        dephased: beta * dephased,
        coherent_gain: beta * (total - dephased),
        divergence: spectral_relative_entropy(rho, eq_b.rho())?,
    };

    let eq_a = gibbs_state(h_a, beta)?;
    let per_level: Vec<f64> = cond.h_values.iter().zip(h_a.energies()).map(|(h, e)| h - e).collect();
    let mean_work: f64 = eq_a.populations().iter().zip(&per_level).map(|(p, w)| p * w).sum();
    let log_terms: Vec<f64> = eq_a.log_populations().iter().zip(&per_level).map(|(lp, w)| lp - beta * w).collect();
    let jensen_slack = beta * mean_work + log_sum_exp(&log_terms);

    Ok(WorkReport {
        work,
        bound,
        bound_from_partition: eq_b.log_z() - cond.log_conditional_z,
        bound_terms,
        alt_bound_terms,
        jensen_slack,
        degenerate_initial: cond.degenerate_initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_abs_diff;
    use crate::random::{haar_unitary, random_hermitian, stream_rng};

    fn h_a() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[0.0, 1.0]).unwrap()
    }

    fn h_b() -> HermitianOperator {
        HermitianOperator::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 1.0]]).unwrap()
    }

    #[test]
    fn trivial_drive_gives_gibbs() {
        let id = CMatrix::identity(2, 2);
        let c = conditional_thermal_state(&h_a(), &h_a(), &id, 1.3).unwrap();
        let g = gibbs_state(&h_a(), 1.3).unwrap();
        assert!(max_abs_diff(c.rho.matrix(), g.rho().matrix()) <= 1e-12);
        let p = DrivingProtocol::sudden(h_a(), h_a()).unwrap();
        let r = sharpened_bound_report(&p, &id, 1.3).unwrap();
        assert!(r.work.avg_work.abs() < 1e-15 && r.work.delta_f.abs() < 1e-15 && r.work.w_irr.abs() < 1e-15);
        assert!(r.bound.abs() < 1e-14);
        assert!(r.violations(1e-9).is_empty());
    }

    #[test]
    fn sudden_quench_values() {
        let id = CMatrix::identity(2, 2);
        let c = conditional_thermal_state(&h_a(), &h_b(), &id, 1.0).unwrap();
        assert!((c.weights[0] - 0.731059).abs() < 1e-6);
        assert!((c.weights[1] - 0.268941).abs() < 1e-6);
        assert!((c.log_conditional_z - 0.313262).abs() < 1e-6);

        let p = DrivingProtocol::sudden(h_a(), h_b()).unwrap();
        let r = sharpened_bound_report(&p, &id, 1.0).unwrap();
        // Z_B from the eigenvalues (1 +- sqrt 2) / 2 of H_B
        let s2 = 2f64.sqrt();
        let z_b = (-(1.0 - s2) / 2.0).exp() + (-(1.0 + s2) / 2.0).exp();
        let z_a = 1.0 + (-1.0f64).exp();
        let gap = (z_b / z_a).ln();
        assert!((gap - 0.11146681525006838).abs() < 1e-14);
        assert!(r.work.avg_work.abs() < 1e-15);
        assert!((r.work.delta_f + gap).abs() < 1e-12);
        assert!((r.work.w_irr - gap).abs() < 1e-12);
        assert!((r.bound - gap).abs() < 1e-12);
        assert!(r.jensen_slack.abs() < 1e-15);
        assert!(r.violations(1e-9).is_empty());
    }

    #[test]
    fn random_drives_respect_the_bound() {
        for seed in 0..20 {
            let mut rng = stream_rng(seed, 0);
            let d = 2 + (seed as usize % 3);
            let (a, b) = (random_hermitian(d, &mut rng), random_hermitian(d, &mut rng));
            let u = haar_unitary(d, &mut rng);
            let p = DrivingProtocol::sudden(a, b).unwrap();
            let r = sharpened_bound_report(&p, &u, 0.7).unwrap();
            assert!(r.violations(1e-9).is_empty(), "seed {seed}: {:?}", r.violations(1e-9));
            assert!(r.bound_terms.incoherent.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = CMatrix::identity(2, 2) * crate::quantum::C64::from(1.1);
        assert!(matches!(conditional_thermal_state(&h_a(), &h_b(), &bad, 1.0), Err(Error::NotUnitary { .. })));
        let id = CMatrix::identity(2, 2);
        assert!(matches!(conditional_thermal_state(&h_a(), &h_b(), &id, 0.0), Err(Error::InvalidBeta(_))));
        let p = DrivingProtocol::sudden(h_a(), h_b()).unwrap();
        assert!(work_accounting(&p, &CMatrix::identity(3, 3), 1.0).is_err());
    }
}

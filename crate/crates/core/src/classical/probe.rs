use nalgebra::DMatrix;
use serde::Serialize;

use super::entropy::joint_terms;
use super::{grid_gibbs, GridDistribution, JointDistribution, PhaseGrid, Surface, TransitionKernel};
use crate::error::{check_beta, Error, Result};
use crate::random::{random_doubly_stochastic, stream_rng};

/// Permutations mixed into each random doubly stochastic `R`.
const MIXTURE_TERMS: usize = 4;
const UNIFORM_TOL: f64 = 1e-12;

/// Changes of `D(J||p_eq)` under `xi = (1 - eps) I + eps R` applied after
/// the joint, one entry per random `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub epsilon: f64,
    pub n_perturbations: usize,
    pub delta_d: Vec<f64>,
    /// Change of `sum J ln J`.
    pub entropy_part: Vec<f64>,
    /// Change of `-sum J ln p_eq(f)`, i.e. `beta` times the energy change.
    pub work_part: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub mean_abs: f64,
    pub n_negative: usize,
    /// `p_A` is uniform over every cell.
    pub uniform_initial: bool,
}

fn mix(n: usize, epsilon: f64, r: &DMatrix<f64>) -> Result<TransitionKernel> {
    let xi = DMatrix::identity(n, n) * (1.0 - epsilon) + r * epsilon;
    TransitionKernel::new(xi)
}

pub fn stationarity_probe(
    joint: &JointDistribution,
    p_a: &GridDistribution,
    grid: &PhaseGrid,
    beta: f64,
    n_perturbations: usize,
    epsilon: f64,
    seed: u64,
) -> Result<StationarityReport> {
    check_beta(beta)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InfeasibleEpsilon(epsilon));
    }
    if n_perturbations == 0 {
        return Err(Error::InvalidArgument("need at least one perturbation".into()));
    }
    let n = joint.n_cells();
    for got in [p_a.len(), grid.n_cells()] {
        if got != n {
            return Err(Error::DimensionMismatch { expected: n, got });
        }
    }
    let p_eq = grid_gibbs(grid, Surface::B, beta)?;
    let (s0, r0) = joint_terms(joint, &p_eq)?;

    let mut delta_d = Vec::with_capacity(n_perturbations);
    let mut entropy_part = Vec::with_capacity(n_perturbations);
    let mut work_part = Vec::with_capacity(n_perturbations);
    for k in 0..n_perturbations {
        let mut rng = stream_rng(seed, k as u64);
        let r = random_doubly_stochastic(n, MIXTURE_TERMS, &mut rng);
        let perturbed = joint.evolve(&mix(n, epsilon, &r)?)?;
        let (s1, r1) = joint_terms(&perturbed, &p_eq)?;
        let ds = s1 - s0;
        let dw = r0 - r1;
        entropy_part.push(ds);
        work_part.push(dw);
        delta_d.push(ds + dw);
    }

    let m = n_perturbations as f64;
    Ok(StationarityReport {
        epsilon,
        n_perturbations,
        min: delta_d.iter().copied().fold(f64::INFINITY, f64::min),
        max: delta_d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: delta_d.iter().sum::<f64>() / m,
        mean_abs: delta_d.iter().map(|d| d.abs()).sum::<f64>() / m,
        n_negative: delta_d.iter().filter(|&&d| d < 0.0).count(),
        uniform_initial: p_a.is_uniform(UNIFORM_TOL),
        delta_d,
        entropy_part,
        work_part,
    })
}

/// Probe results at several `epsilon` with the same seeds, plus
/// `mean_abs(eps_k) / mean_abs(eps_{k+1})` for consecutive pairs. Halving
/// `eps` gives ratio 4 for a quadratic change and 2 for a linear one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub reports: Vec<StationarityReport>,
    pub ratios: Vec<f64>,
}

pub fn stationarity_scaling(
    joint: &JointDistribution,
    p_a: &GridDistribution,
    grid: &PhaseGrid,
    beta: f64,
    n_perturbations: usize,
    epsilons: &[f64],
    seed: u64,
) -> Result<ScalingReport> {
    let reports = epsilons
        .iter()
        .map(|&e| stationarity_probe(joint, p_a, grid, beta, n_perturbations, e, seed))
        .collect::<Result<Vec<_>>>()?;
    let ratios = reports.windows(2).map(|w| w[0].mean_abs / w[1].mean_abs).collect();
    Ok(ScalingReport { reports, ratios })
}

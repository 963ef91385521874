//! Geometric quantum states: weighted point masses on complex projective
//! space, their relative entropy, and the geometric canonical ensemble.
//!
//! Distances are Fubini-Study angles, `arccos |<a|b>|` in `[0, pi/2]`,
//! evaluated through `atan2` so that nearly equal points keep full relative
//! precision. The unitarily invariant volume of `CP^{d-1}` is
//! `pi^{d-1} / (d-1)!`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_beta, Error, Result};
use crate::quantum::{
    degenerate_groups, fix_phase, gibbs_state, quantum_relative_entropy, CMatrix, CVector, DensityMatrix,
    HermitianOperator, C64, SUPPORT_FLOOR,
};
use crate::random::{complex_normal, stream_rng};

/// Points closer than this are treated as one.
pub const MERGE_DISTANCE: f64 = 1e-10;
/// Largest distance at which two supports still pair up.
pub const MATCH_DISTANCE: f64 = 1e-8;
/// Samples per random stream in the Monte Carlo routines.
pub const SAMPLE_BLOCK: usize = 4096;

/// Normalized, phase-fixed homogeneous coordinates of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricPoint {
    amplitudes: CVector,
}

impl GeometricPoint {
    /// Normalizes `z` and fixes its phase; fails on zero or non-finite input.
    pub fn new(mut z: CVector) -> Result<Self> {
        let norm = z.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(format!("cannot normalize a vector of norm {norm}")));
        }
        z.unscale_mut(norm);
        fix_phase(&mut z);
        Ok(Self { amplitudes: z })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Fubini-Study distance.
    pub fn distance(&self, other: &GeometricPoint) -> f64 {
        fubini_study_distance(&self.amplitudes, &other.amplitudes)
    }

    /// `<psi(z)|H|psi(z)>`.
    pub fn energy(&self, h: &HermitianOperator) -> f64 {
        h.expectation(&self.amplitudes)
    }
}

/// `arccos |<a|b>|` for unit vectors.
pub fn fubini_study_distance(a: &CVector, b: &CVector) -> f64 {
    let overlap = a.dotc(b);
    let orthogonal = (b - a * overlap).norm();
    orthogonal.atan2(overlap.norm())
}

/// Point masses `sum_j w_j delta(z - z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricState {
    points: Vec<GeometricPoint>,
    weights: Vec<f64>,
}

impl GeometricState {
    /// Drops weights at or below the support floor and merges coincident
    /// points.
    pub fn new(points: Vec<GeometricPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        let d = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidState(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        let mut kept_points: Vec<GeometricPoint> = Vec::new();
        let mut kept_weights: Vec<f64> = Vec::new();
        for (p, w) in points.into_iter().zip(weights) {
            if w <= SUPPORT_FLOOR {
                continue;
            }
            match kept_points.iter().position(|q| q.distance(&p) <= MERGE_DISTANCE) {
                Some(k) => kept_weights[k] += w,
                None => {
                    kept_points.push(p);
                    kept_weights.push(w);
                }
            }
        }
        Ok(Self { points: kept_points, weights: kept_weights })
    }

    pub fn points(&self) -> &[GeometricPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum_j w_j |z_j><z_j|`.
    pub fn density_matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let z = p.amplitudes();
            m += z * z.adjoint() * C64::from(w);
        }
        m
    }
}

fn state_on_basis(weights: &[f64], basis: &CMatrix) -> Result<GeometricState> {
    let points = basis
        .column_iter()
        .map(|c| GeometricPoint::new(c.into_owned()))
        .collect::<Result<Vec<_>>>()?;
    GeometricState::new(points, weights.to_vec())
}

/// Eigenvectors of `rho` weighted by their eigenvalues.
pub fn geometric_state_of(rho: &DensityMatrix) -> GeometricState {
    state_on_basis(rho.eigenvalues(), rho.spectrum().vectors()).expect("eigenvectors of a valid state")
}

/// Eigenvalues of `rho` placed on the eigenvectors of `sigma`, both
/// descending: the geometric state of `U rho U^dagger` for the aligning `U`.
pub fn aligned_geometric_state(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<GeometricState> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    state_on_basis(rho.eigenvalues(), sigma.spectrum().vectors())
}

/// `sum_j p_j ln(p_j / s_j)` over paired points.
///
/// Every point of `p` must sit within [`MATCH_DISTANCE`] of a distinct point
/// of `s`. Points of `p` that share a weight span a subspace without a
/// preferred basis; when direct pairing fails, such a group is rewritten in
/// orthonormal points of `s` spanning the same subspace.
pub fn geometric_relative_entropy(p: &GeometricState, s: &GeometricState) -> Result<f64> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: p.dim() });
    }
    let pairs = match direct_pairing(p, s) {
        Some(pairs) => pairs,
        None => subspace_pairing(p, s).ok_or(Error::SupportMismatch)?,
    };
    Ok(pairs.iter().map(|&(w, j)| w * (w / s.weights[j]).ln()).sum())
}

/// `(weight of p, index into s)` for each point of `p`, nearest free match.
fn direct_pairing(p: &GeometricState, s: &GeometricState) -> Option<Vec<(f64, usize)>> {
    let mut used = vec![false; s.len()];
    let mut pairs = Vec::with_capacity(p.len());
    for (point, &w) in p.points.iter().zip(&p.weights) {
        let j = nearest_free(point, s, &used)?;
        used[j] = true;
        pairs.push((w, j));
    }
    Some(pairs)
}

fn nearest_free(point: &GeometricPoint, s: &GeometricState, used: &[bool]) -> Option<usize> {
    s.points
        .iter()
        .enumerate()
        .filter(|(j, _)| !used[*j])
        .map(|(j, q)| (j, point.distance(q)))
        .filter(|&(_, dist)| dist <= MATCH_DISTANCE)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
}

fn subspace_pairing(p: &GeometricState, s: &GeometricState) -> Option<Vec<(f64, usize)>> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p.weights[b].total_cmp(&p.weights[a]));
    let sorted_weights: Vec<f64> = order.iter().map(|&k| p.weights[k]).collect();

    let mut used = vec![false; s.len()];
    let mut pairs = Vec::with_capacity(p.len());
    for group in degenerate_groups(&sorted_weights) {
        let members: Vec<&GeometricPoint> = group.clone().map(|g| &p.points[order[g]]).collect();
        if members.len() == 1 {
            let j = nearest_free(members[0], s, &used)?;
            used[j] = true;
            pairs.push((sorted_weights[group.start], j));
            continue;
        }
        let basis = orthonormal_columns(&members)?;
        let inside: Vec<usize> = (0..s.len())
            .filter(|&j| !used[j])
            .filter(|&j| {
                let z = s.points[j].amplitudes();
                let residual = z - &basis * (basis.adjoint() * z);
                residual.norm().asin() <= MATCH_DISTANCE
            })
            .collect();
        if inside.len() != members.len() {
            return None;
        }
        let chosen: Vec<&GeometricPoint> = inside.iter().map(|&j| &s.points[j]).collect();
        orthonormal_columns(&chosen)?;
        for &j in &inside {
            used[j] = true;
            pairs.push((sorted_weights[group.start], j));
        }
    }
    Some(pairs)
}

/// Stacks the points as columns if they are orthonormal within the matching
/// tolerance.
fn orthonormal_columns(points: &[&GeometricPoint]) -> Option<CMatrix> {
    let cols: Vec<CVector> = points.iter().map(|p| p.amplitudes().clone()).collect();
    let m = CMatrix::from_columns(&cols);
    let gram = m.adjoint() * &m - CMatrix::identity(cols.len(), cols.len());
    (gram.iter().all(|g| g.norm() <= MATCH_DISTANCE)).then_some(m)
}

/// `beta^-1 [S(rho||rho_eq) - D_geo(aligned rho || rho_eq)]`.
pub fn ergotropy_geometric(rho: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    let eq = gibbs_state(h, beta)?;
    let s = quantum_relative_entropy(rho, eq.rho())?;
    let aligned = aligned_geometric_state(rho, eq.rho())?;
    let d = geometric_relative_entropy(&aligned, &geometric_state_of(eq.rho()))?;
    Ok((s - d) / beta)
}

/// Unnormalized canonical weight `exp(-beta h(z))`.
pub fn canonical_density(h: &HermitianOperator, beta: f64, z: &GeometricPoint) -> f64 {
    (-beta * z.energy(h)).exp()
}

/// `pi^{d-1} / (d-1)!`.
pub fn projective_volume(d: usize) -> f64 {
    (1..d).map(|k| std::f64::consts::PI / k as f64).product()
}

fn check_sample_shape(d: usize, n: usize, min_n: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
    }
    if n < min_n {
        return Err(Error::InvalidArgument(format!("need at least {min_n} samples, got {n}")));
    }
    Ok(())
}

/// Unit vector from `2d` standard Gaussians.
fn gaussian_unit_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let z = CVector::from_fn(d, |_, _| complex_normal(rng));
    let norm = z.norm();
    z.unscale(norm)
}

/// Runs `f` on each block of [`SAMPLE_BLOCK`] samples, block `k` drawing
/// from stream `k`; results come back in block order.
fn per_block<T: Send>(n: usize, seed: u64, f: impl Fn(&mut crate::random::StreamRng, usize) -> T + Sync) -> Vec<T> {
    let blocks = n.div_ceil(SAMPLE_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let len = SAMPLE_BLOCK.min(n - k * SAMPLE_BLOCK);
            f(&mut rng, len)
        })
        .collect()
}

/// `n` points distributed by the unitarily invariant measure.
/// Deterministic in `seed` and independent of the thread count.
pub fn fs_uniform_sample(d: usize, n: usize, seed: u64) -> Result<Vec<GeometricPoint>> {
    check_sample_shape(d, n, 1)?;
    let blocks = per_block(n, seed, |rng, len| {
        (0..len)
            .map(|_| GeometricPoint::new(gaussian_unit_vector(d, rng)).expect("nonzero Gaussian draw"))
            .collect::<Vec<_>>()
    });
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Monte Carlo `Z = int dV exp(-beta h(z))`.
///
/// The measure is invariant, so points are drawn directly as coordinates in
/// the energy eigenbasis, where `h(z) = sum_k E_k |z_k|^2`. Weights are
/// accumulated relative to the ground energy.
pub fn geometric_partition_function(
    h: &HermitianOperator,
    beta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<PartitionEstimate> {
    check_beta(beta)?;
    let d = h.dim();
    check_sample_shape(d, n_samples, 100)?;
    let energies = h.energies();
    let ground = energies[0];
    let gaps: Vec<f64> = energies.iter().map(|e| e - ground).collect();

    let sums = per_block(n_samples, seed, |rng, len| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let z = gaussian_unit_vector(d, rng);
            let excess: f64 = z.iter().zip(&gaps).map(|(c, g)| g * c.norm_sqr()).sum();
            let w = (-beta * excess).exp();
            s += w;
            s2 += w * w;
        }
        (s, s2)
    });
    let (s, s2) = sums.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = n_samples as f64;
    let mean = s / n;
    let variance = ((s2 - s * mean) / (n - 1.0)).max(0.0);
    let scale = projective_volume(d) * (-beta * ground).exp();
    Ok(PartitionEstimate {
        estimate: scale * mean,
        std_error: scale * (variance / n).sqrt(),
        n_samples,
    })
}

/// Closed form for a qubit:
/// `pi (exp(-beta E0) - exp(-beta E1)) / (beta (E1 - E0))`.
pub fn qubit_partition_function(h: &HermitianOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: h.dim() });
    }
    let (e0, e1) = (h.energies()[0], h.energies()[1]);
    let x = beta * (e1 - e0);
    let ratio = if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x };
    Ok(std::f64::consts::PI * (-beta * e0).exp() * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_abs_diff;
    use crate::random::{random_density, random_pure};

    const NORM_TOL: f64 = 1e-12;

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&CVector::from_vec(vec![C64::from(s), C64::from(s)])).unwrap()
    }

    fn qubit_h() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn geometric_state_examples() {
        let g = geometric_state_of(&plus());
        assert_eq!(g.len(), 1);
        assert!((g.weights()[0] - 1.0).abs() < 1e-15);

        let g = geometric_state_of(&DensityMatrix::maximally_mixed(2).unwrap());
        assert_eq!(g.weights(), &[0.5, 0.5]);
        let dist = g.points()[0].distance(&g.points()[1]);
        assert!((dist - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        let mut rng = stream_rng(21, 0);
        let rho = random_density(3, &mut rng);
        assert!(max_abs_diff(&geometric_state_of(&rho).density_matrix(), rho.matrix()) <= 1e-10);
    }

    #[test]
    fn aligned_examples() {
        let eq = gibbs_state(&qubit_h(), 1.0).unwrap();
        let a = aligned_geometric_state(&plus(), eq.rho()).unwrap();
        assert_eq!(a.len(), 1);
        let ground = CVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]);
        assert!(fubini_study_distance(a.points()[0].amplitudes(), &ground) < 1e-15);

        let rho = plus();
        assert_eq!(aligned_geometric_state(&rho, &rho).unwrap(), geometric_state_of(&rho));
    }

    #[test]
    fn relative_entropy_examples() {
        let eq = gibbs_state(&qubit_h(), 1.0).unwrap();
        let s = geometric_state_of(eq.rho());
        assert_eq!(geometric_relative_entropy(&s, &s).unwrap(), 0.0);
        let a = aligned_geometric_state(&plus(), eq.rho()).unwrap();
        let d = geometric_relative_entropy(&a, &s).unwrap();
        assert!((d - 0.3132616875182228).abs() < 1e-12);

        let zero = GeometricState::new(vec![GeometricPoint::new(CVector::from_vec(vec![C64::from(1.0), C64::from(0.0)])).unwrap()], vec![1.0]).unwrap();
        let one = GeometricState::new(vec![GeometricPoint::new(CVector::from_vec(vec![C64::from(0.0), C64::from(1.0)])).unwrap()], vec![1.0]).unwrap();
        assert!(matches!(geometric_relative_entropy(&zero, &one), Err(Error::SupportMismatch)));
    }

    #[test]
    fn degenerate_group_is_matched_by_subspace() {
        // same maximally mixed state written in two different bases
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pt = |a: f64, b: f64| GeometricPoint::new(CVector::from_vec(vec![C64::from(a), C64::from(b)])).unwrap();
        let p = GeometricState::new(vec![pt(s, s), pt(s, -s)], vec![0.5, 0.5]).unwrap();
        let q = GeometricState::new(vec![pt(1.0, 0.0), pt(0.0, 1.0)], vec![0.5, 0.5]).unwrap();
        assert_eq!(geometric_relative_entropy(&p, &q).unwrap(), 0.0);
        let skew = GeometricState::new(vec![pt(1.0, 0.0), pt(0.0, 1.0)], vec![0.7, 0.3]).unwrap();
        let d = geometric_relative_entropy(&p, &skew).unwrap();
        let want = 0.5 * (0.5f64 / 0.7).ln() + 0.5 * (0.5f64 / 0.3).ln();
        assert!((d - want).abs() < 1e-15);
    }

    #[test]
    fn merging_and_validation() {
        let z = CVector::from_vec(vec![C64::from(1.0), C64::new(0.0, 0.0)]);
        let phased = &z * C64::new(0.0, 1.0);
        let p = GeometricState::new(
            vec![GeometricPoint::new(z.clone()).unwrap(), GeometricPoint::new(phased).unwrap()],
            vec![0.25, 0.75],
        )
        .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.weights(), &[1.0]);
        assert!(GeometricState::new(vec![GeometricPoint::new(z.clone()).unwrap()], vec![0.9]).is_err());
        assert!(GeometricPoint::new(CVector::zeros(2)).is_err());
    }

    #[test]
    fn geometric_route_examples() {
        let h = qubit_h();
        let eq = gibbs_state(&h, 1.0).unwrap();
        assert!(ergotropy_geometric(eq.rho(), &h, 1.0).unwrap().abs() < 1e-14);
        assert!((ergotropy_geometric(&plus(), &h, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(ergotropy_geometric(&plus(), &h, 0.0), Err(Error::InvalidBeta(_))));
    }

    #[test]
    fn canonical_density_examples() {
        let h = qubit_h();
        let pt = |a: f64, b: f64| GeometricPoint::new(CVector::from_vec(vec![C64::from(a), C64::from(b)])).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(canonical_density(&h, 1.0, &pt(1.0, 0.0)), 1.0);
        assert!((canonical_density(&h, 1.0, &pt(s, s)) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((canonical_density(&h, 1.0, &pt(0.0, 1.0)) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sampler_is_deterministic_and_normalized() {
        let a = fs_uniform_sample(3, 5000, 4).unwrap();
        let b = fs_uniform_sample(3, 5000, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (p.amplitudes().norm() - 1.0).abs() <= NORM_TOL));
        assert!(fs_uniform_sample(1, 10, 0).is_err());
        let mut rng = stream_rng(0, 0);
        let z = random_pure(3, &mut rng);
        assert!((GeometricPoint::new(z).unwrap().amplitudes().norm() - 1.0).abs() <= NORM_TOL);
    }

    #[test]
    fn partition_function_limits() {
        assert!((projective_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((projective_volume(3) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-15);

        let h = qubit_h();
        assert!((qubit_partition_function(&h, 1.0).unwrap() - 1.9858653037988714).abs() < 1e-14);

        let flat = HermitianOperator::from_real_diagonal(&[0.7, 0.7]).unwrap();
        let z = geometric_partition_function(&flat, 2.0, 1000, 1).unwrap();
        assert!((z.estimate - std::f64::consts::PI * (-1.4f64).exp()).abs() < 1e-14);
        assert_eq!(z.std_error, 0.0);

        let hot = geometric_partition_function(&h, 1e-9, 1000, 1).unwrap();
        assert!((hot.estimate - std::f64::consts::PI).abs() < 1e-8);
        assert!(geometric_partition_function(&h, 1.0, 99, 1).is_err());
    }
}

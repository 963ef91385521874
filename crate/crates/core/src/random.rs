//! Seeded random ensembles: Haar unitaries, Hilbert-Schmidt states, random
//! Hamiltonians and random stochastic objects for the classical grid.
//!
//! Every generator takes an explicit RNG. [`stream_rng`] gives independent,
//! reproducible ChaCha streams `(seed, stream)` so that trial `k` of a sweep
//! draws the same numbers no matter how the trials are scheduled.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quantum::{CMatrix, CVector, DensityMatrix, HermitianOperator, C64};

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex normal with `E|z|^2 = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = qr.unpack();
    let mut u = q;
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 { rc / rc.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..d {
            u[(row, c)] *= phase;
        }
    }
    u
}

/// Uniformly distributed pure state.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| complex_normal(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Hilbert-Schmidt random state of the given rank.
pub fn random_density_rank<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, rank.clamp(1, d), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).expect("G G^dagger / tr is a valid state")
}

/// Full-rank Hilbert-Schmidt random state.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    random_density_rank(d, d, rng)
}

/// `(G + G^dagger) / 2` with Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(d, d, rng);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Uniform point on the probability simplex.
pub fn random_probability<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Random doubly stochastic matrix as a convex combination of `terms`
/// permutation matrices.
pub fn random_doubly_stochastic<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> DMatrix<f64> {
    let weights = random_probability(terms.max(1), rng);
    let mut m = DMatrix::zeros(n, n);
    for w in weights {
        let perm = random_permutation(n, rng);
        for (src, &dst) in perm.iter().enumerate() {
            m[(dst, src)] += w;
        }
    }
    m
}

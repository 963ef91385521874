//! Dense Hermitian linear algebra for small quantum systems: operators and
//! states with cached canonical spectra, Gibbs states, entropies and the
//! energy-basis dephasing map.
//!
//! Everything is in nats and in units with `k_B = 1`.

mod entropy;
mod gibbs;
mod operator;
mod spectrum;

use nalgebra::{Complex, DMatrix, DVector};

pub use entropy::{
    coherence_relative_entropy, dephase, quantum_relative_entropy, shannon_entropy,
    spectral_relative_entropy, von_neumann_entropy,
};
pub use gibbs::{gibbs_state, log_sum_exp, GibbsState};
pub use operator::{DensityMatrix, HermitianOperator};
pub use spectrum::{eigendecompose, Order, SortedSpectrum};
pub(crate) use spectrum::{degenerate_groups, fix_phase};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues below this are exact zeros; `0 ln 0 = 0`.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// Relative tolerance for grouping degenerate eigenvalues,
/// `|a - b| <= DEGENERACY_TOL * (1 + |a|)`.
pub const DEGENERACY_TOL: f64 = 1e-10;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// Largest entry of `|a - b|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub(crate) fn real_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    // tr(AB) without forming the product
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Nearest unitary in Frobenius norm (polar factor).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

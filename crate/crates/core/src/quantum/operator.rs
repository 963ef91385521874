use super::spectrum::{eigendecompose_matrix, reconstruct, SortedSpectrum};
use super::{max_abs_diff, real_trace_product, CMatrix, CVector, Order, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-10;
const NEGATIVITY_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-10;

fn validate_hermitian(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let adj = m.adjoint();
    let deviation = max_abs_diff(m, &adj);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok((m + adj).scale(0.5))
}

/// A Hermitian observable, usually a Hamiltonian. The canonical ascending
/// spectrum is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    spectrum: SortedSpectrum,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let matrix = validate_hermitian(&matrix)?;
        let spectrum = eigendecompose_matrix(&matrix, Order::Ascending);
        Ok(Self { matrix, spectrum })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let m = CMatrix::from_fn(d, d, |r, c| if r == c { C64::new(diag[r], 0.0) } else { C64::new(0.0, 0.0) });
        Self::new(m)
    }

    /// Builds an operator from a real symmetric row-major table.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare { rows: d, cols: rows.first().map_or(0, |r| r.len()) });
        }
        Self::new(CMatrix::from_fn(d, d, |r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Ascending canonical spectrum.
    pub fn spectrum(&self) -> &SortedSpectrum {
        &self.spectrum
    }

    pub fn energies(&self) -> &[f64] {
        self.spectrum.values()
    }

    /// `<psi|M|psi>` for a normalized `psi`.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.matrix * psi)).re
    }

    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        Self::new(u * &self.matrix * u.adjoint())
    }
}

/// A valid quantum state: Hermitian, unit trace, positive semidefinite.
///
/// Carries its descending canonical spectrum (`p_0 >= p_1 >= ...`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    spectrum: SortedSpectrum,
}

impl DensityMatrix {
    /// Validates `matrix`. Eigenvalues in `[-1e-10, 0)` are clamped to zero
    /// and the state is renormalized.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let matrix = validate_hermitian(&matrix)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let spectrum = eigendecompose_matrix(&matrix, Order::Descending);
        let min = spectrum.values().last().copied().unwrap_or(0.0);
        if min < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        if min < 0.0 {
            let mut values: Vec<f64> = spectrum.values().iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = values.iter().sum();
            values.iter_mut().for_each(|v| *v /= total);
            let vectors = spectrum.vectors().clone();
            let matrix = reconstruct(&values, &vectors);
            return Ok(Self { matrix, spectrum: SortedSpectrum::from_parts(values, vectors, Order::Descending) });
        }
        Ok(Self { matrix, spectrum })
    }

    /// State `sum_i values[i] |v_i><v_i|` from known eigenpairs (vectors as
    /// columns). The given basis is kept as is; only ordering and phases are
    /// normalized.
    pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> Result<Self> {
        let d = vectors.nrows();
        if vectors.ncols() != values.len() || values.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: values.len() });
        }
        let gram = vectors.adjoint() * vectors;
        let defect = max_abs_diff(&gram, &CMatrix::identity(d, d));
        if defect > ORTHONORMAL_TOL {
            return Err(Error::InvalidState(format!("eigenvectors not orthonormal (defect {defect:e})")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -NEGATIVITY_TOL) {
            return Err(Error::InvalidState(format!("invalid eigenvalue {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("eigenvalues sum to {total}, expected 1")));
        }
        let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let spectrum = SortedSpectrum::sorted_with_phase_fix(clamped, vectors.clone(), Order::Descending);
        let matrix = spectrum.reconstruct();
        Ok(Self { matrix, spectrum })
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let psi = psi.unscale(norm);
        Self::new(&psi * psi.adjoint())
    }

    /// Diagonal state in the computational basis.
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        Self::from_spectrum(populations, &CMatrix::identity(d, d))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        Self::from_populations(&vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Descending canonical spectrum.
    pub fn spectrum(&self) -> &SortedSpectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.values()
    }

    /// `tr(rho H)`
    pub fn expectation(&self, h: &HermitianOperator) -> f64 {
        real_trace_product(&self.matrix, h.matrix())
    }

    /// `U rho U^dagger`, computed on the eigenvectors so the spectrum is
    /// carried over exactly.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.nrows() });
        }
        let vectors = u * self.spectrum.vectors();
        Self::from_spectrum(self.spectrum.values(), &vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)]);
        assert!(matches!(HermitianOperator::new(m.clone()), Err(Error::NotHermitian { .. })));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_bad_trace_and_negative() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.6, 0.0)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.1, 0.0), C64::new(-0.1, 0.0)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
    }

    #[test]
    fn clamps_tiny_negative_eigenvalue() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.0 + 5e-11, 0.0), C64::new(-5e-11, 0.0)]));
        let rho = DensityMatrix::new(m).unwrap();
        assert_eq!(rho.eigenvalues()[1], 0.0);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conjugation_keeps_spectrum() {
        let rho = DensityMatrix::from_populations(&[0.7, 0.2, 0.1]).unwrap();
        let mut rng = crate::random::stream_rng(3, 0);
        let u = crate::random::haar_unitary(3, &mut rng);
        let out = rho.conjugated(&u).unwrap();
        assert_eq!(out.eigenvalues(), rho.eigenvalues());
        let direct = &u * rho.matrix() * u.adjoint();
        assert!(max_abs_diff(out.matrix(), &direct) < 1e-12);
    }
}

//! Wire formats.
//!
//! Complex matrices are `{"dim": d, "entries": [[re, im], ...]}` in row-major
//! order. Geometric states are lists of `{"weight", "amplitudes"}`. Kernels are
//! dense row-major arrays of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classical::TransitionKernel;
use crate::error::{Error, Result};
use crate::geometric::{GeometricPoint, GeometricState};
use crate::quantum::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        assert!(m.is_square(), "only square matrices are serialized");
        let d = m.nrows();
        let entries = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|(r, c)| [m[(r, c)].re, m[(r, c)].im]).collect();
        Self { dim: d, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        if d == 0 || self.entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: self.entries.len() });
        }
        Ok(CMatrix::from_row_iterator(d, d, self.entries.iter().map(|[re, im]| C64::new(*re, *im))))
    }
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub weight: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

pub fn geometric_state_to_json(state: &GeometricState) -> Vec<PointJson> {
    state
        .points()
        .iter()
        .zip(state.weights())
        .map(|(p, &weight)| PointJson { weight, amplitudes: pairs(p.amplitudes()) })
        .collect()
}

pub fn geometric_state_from_json(points: &[PointJson]) -> Result<GeometricState> {
    let (pts, weights): (Vec<_>, Vec<_>) = points
        .iter()
        .map(|p| {
            let z = CVector::from_iterator(p.amplitudes.len(), p.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)));
            GeometricPoint::new(z).map(|g| (g, p.weight))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    GeometricState::new(pts, weights)
}

pub fn kernel_to_json(kernel: &TransitionKernel) -> Vec<Vec<f64>> {
    kernel.matrix().row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn kernel_from_json(rows: &[Vec<f64>]) -> Result<TransitionKernel> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: r.len() });
    }
    TransitionKernel::new(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
}

use nalgebra::DMatrix;

use super::GridDistribution;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

/// Doubly stochastic transition matrix; column `j` is the distribution of the
/// final cell given initial cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    matrix: DMatrix<f64>,
    deterministic: bool,
}

fn is_permutation_matrix(m: &DMatrix<f64>) -> bool {
    m.column_iter().all(|col| {
        let big = col.iter().filter(|&&x| x >= 1.0 - UNIT_TOL).count();
        let small = col.iter().filter(|&&x| x.abs() <= UNIT_TOL).count();
        big == 1 && small == col.len() - 1
    })
}

impl TransitionKernel {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, SUM_TOL)
    }

    fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidKernel(format!("shape {}x{}", matrix.nrows(), matrix.ncols())));
        }
        if let Some(x) = matrix.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidKernel(format!("entry {x} is not a probability")));
        }
        for (j, col) in matrix.column_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::InvalidKernel(format!("column {j} sums to {s}")));
            }
        }
        for (i, row) in matrix.row_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::InvalidKernel(format!("row {i} sums to {s}; not volume preserving")));
            }
        }
        let deterministic = is_permutation_matrix(&matrix);
        Ok(Self { matrix, deterministic })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n), deterministic: true }
    }

    /// `perm[src] = dst`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &dst in perm {
            if dst >= n || std::mem::replace(&mut seen[dst], true) {
                return Err(Error::InvalidKernel(format!("{perm:?} is not a permutation")));
            }
        }
        let mut m = DMatrix::zeros(n, n);
        for (src, &dst) in perm.iter().enumerate() {
            m[(dst, src)] = 1.0;
        }
        Ok(Self { matrix: m, deterministic: true })
    }

    /// Moves every cell `shift` places forward (mod n).
    pub fn cyclic_shift(n: usize, shift: usize) -> Result<Self> {
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        Self::from_permutation(&perm)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_cells(&self) -> usize {
        self.matrix.nrows()
    }

    /// True iff every column is a unit vector.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// `Some(perm)` with `perm[src] = dst` when deterministic.
    pub fn permutation(&self) -> Option<Vec<usize>> {
        if !self.deterministic {
            return None;
        }
        Some(self.matrix.column_iter().map(|c| c.imax()).collect())
    }

    pub fn apply(&self, p: &GridDistribution) -> Result<GridDistribution> {
        check_size(self.n_cells(), p.len())?;
        let v = &self.matrix * nalgebra::DVector::from_column_slice(p.weights());
        GridDistribution::new(v.iter().copied().collect())
    }
}

fn check_size(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `q o p`: first `p`, then `q`.
pub fn compose_kernels(q: &TransitionKernel, p: &TransitionKernel) -> Result<TransitionKernel> {
    check_size(q.n_cells(), p.n_cells())?;
    TransitionKernel::with_tolerance(q.matrix() * p.matrix(), 1e-9)
}

/// Joint distribution of (final cell, initial cell); entry `(f, i)` is
/// `T(f|i) p_A(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    matrix: DMatrix<f64>,
    initial: GridDistribution,
    deterministic: bool,
}

impl JointDistribution {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The generating initial distribution (column marginal).
    pub fn initial(&self) -> &GridDistribution {
        &self.initial
    }

    pub fn n_cells(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether the generating kernel was a permutation.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Distribution of the final cell (row sums).
    pub fn final_marginal(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    /// Applies a further kernel to the final coordinate.
    pub fn evolve(&self, kernel: &TransitionKernel) -> Result<JointDistribution> {
        check_size(self.n_cells(), kernel.n_cells())?;
        Ok(JointDistribution {
            matrix: kernel.matrix() * &self.matrix,
            initial: self.initial.clone(),
            deterministic: self.deterministic && kernel.is_deterministic(),
        })
    }
}

pub fn joint_from_kernel(p_a: &GridDistribution, kernel: &TransitionKernel) -> Result<JointDistribution> {
    check_size(kernel.n_cells(), p_a.len())?;
    let mut matrix = kernel.matrix().clone();
    for (j, &w) in p_a.weights().iter().enumerate() {
        matrix.column_mut(j).scale_mut(w);
    }
    Ok(JointDistribution { matrix, initial: p_a.clone(), deterministic: kernel.is_deterministic() })
}

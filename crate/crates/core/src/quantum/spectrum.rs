use std::cmp::Ordering;
use std::ops::Range;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{CMatrix, CVector, HermitianOperator, C64, DEGENERACY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// Energies: `E_0 <= E_1 <= ...`
    Ascending,
    /// Populations: `p_0 >= p_1 >= ...`
    Descending,
}

/// Eigenvalue/eigenvector pairs in canonical order.
///
/// Eigenvalues within [`DEGENERACY_TOL`] of each other form a degenerate
/// group. Inside a group the basis is rebuilt from the projections of the
/// standard basis vectors, so it depends only on the eigenspace and not on
/// what the eigensolver happened to return. Vectors inside a group are sorted
/// by the lexicographic order of their component magnitudes (largest first),
/// and every vector carries a global phase making its largest-magnitude
/// component real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSpectrum {
    values: Vec<f64>,
    vectors: CMatrix,
    order: Order,
}

impl SortedSpectrum {
    pub(crate) fn from_parts(values: Vec<f64>, vectors: CMatrix, order: Order) -> Self {
        Self { values, vectors, order }
    }

    /// Sorts the given pairs and fixes phases without touching the basis
    /// inside near-degenerate groups. Used when the vectors are already
    /// known exactly (e.g. from a Hamiltonian's canonical spectrum).
    pub(crate) fn sorted_with_phase_fix(values: Vec<f64>, vectors: CMatrix, order: Order) -> Self {
        let idx = sorted_indices(&values, order);
        let vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let mut vecs = CMatrix::zeros(vectors.nrows(), idx.len());
        for (c, &i) in idx.iter().enumerate() {
            let mut v = vectors.column(i).into_owned();
            fix_phase(&mut v);
            vecs.set_column(c, &v);
        }
        Self::from_parts(vals, vecs, order)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, in the same order as [`values`](Self::values).
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same pairs in the opposite order. Degenerate groups move as blocks and
    /// keep their internal canonical order.
    pub fn reversed(&self) -> Self {
        let mut values = Vec::with_capacity(self.len());
        let mut vectors = CMatrix::zeros(self.vectors.nrows(), self.len());
        for group in self.degenerate_groups().into_iter().rev() {
            for i in group {
                vectors.set_column(values.len(), &self.vectors.column(i));
                values.push(self.values[i]);
            }
        }
        let order = match self.order {
            Order::Ascending => Order::Descending,
            Order::Descending => Order::Ascending,
        };
        Self { values, vectors, order }
    }

    /// `sum_i v_i |i><i|`
    pub fn reconstruct(&self) -> CMatrix {
        reconstruct(&self.values, &self.vectors)
    }

    /// Index ranges of degenerate eigenvalue groups.
    pub fn degenerate_groups(&self) -> Vec<Range<usize>> {
        degenerate_groups(&self.values)
    }

    pub fn has_degeneracy(&self) -> bool {
        self.degenerate_groups().iter().any(|g| g.len() > 1)
    }
}

pub(crate) fn reconstruct(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let d = vectors.nrows();
    let mut m = CMatrix::zeros(d, d);
    for (i, &w) in values.iter().enumerate() {
        let v = vectors.column(i);
        for r in 0..d {
            let vr = v[r] * w;
            for c in 0..d {
                m[(r, c)] += vr * v[c].conj();
            }
        }
    }
    m
}

/// Canonical spectrum of a Hermitian operator.
pub fn eigendecompose(m: &HermitianOperator, order: Order) -> SortedSpectrum {
    let asc = m.spectrum();
    match order {
        Order::Ascending => asc.clone(),
        Order::Descending => asc.reversed(),
    }
}

/// Eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eigendecompose_matrix(m: &CMatrix, order: Order) -> SortedSpectrum {
    let eig = SymmetricEigen::new(m.clone());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    canonicalize(values, eig.eigenvectors, order)
}

pub(crate) fn canonicalize(values: Vec<f64>, vectors: CMatrix, order: Order) -> SortedSpectrum {
    let d = vectors.nrows();
    let idx = sorted_indices(&values, order);
    let vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let mut vecs = CMatrix::zeros(d, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &vectors.column(i));
    }

    for group in degenerate_groups(&vals) {
        let mut basis: Vec<CVector> = if group.len() == 1 {
            vec![vecs.column(group.start).into_owned()]
        } else {
            let cols: Vec<CVector> = group.clone().map(|c| vecs.column(c).into_owned()).collect();
            subspace_basis(&cols, d)
        };
        for v in basis.iter_mut() {
            fix_phase(v);
        }
        basis.sort_by(lexicographic_magnitude);
        for (k, c) in group.enumerate() {
            vecs.set_column(c, &basis[k]);
        }
    }
    SortedSpectrum::from_parts(vals, vecs, order)
}

fn sorted_indices(values: &[f64], order: Order) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal);
        match order {
            Order::Ascending => o,
            Order::Descending => o.reverse(),
        }
    });
    idx
}

pub(crate) fn degenerate_groups(values: &[f64]) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            (a - b).abs() > DEGENERACY_TOL * (1.0 + a.abs())
        };
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Basis of `span(cols)` built greedily from projected standard basis vectors.
fn subspace_basis(cols: &[CVector], d: usize) -> Vec<CVector> {
    let project = |x: &CVector| -> CVector {
        let mut out = CVector::zeros(d);
        for c in cols {
            out += c * c.dotc(x);
        }
        out
    };
    let mut candidates: Vec<CVector> = (0..d)
        .map(|k| {
            let mut e = CVector::zeros(d);
            e[k] = C64::new(1.0, 0.0);
            project(&e)
        })
        .collect();
    let mut basis: Vec<CVector> = Vec::with_capacity(cols.len());
    for _ in 0..cols.len() {
        let norms: Vec<f64> = candidates.iter().map(|v| v.norm()).collect();
        let max = norms.iter().copied().fold(0.0, f64::max);
        let pick = norms
            .iter()
            .position(|&n| n >= max * (1.0 - 1e-9))
            .expect("non-empty candidate set");
        let chosen = candidates[pick].unscale(norms[pick]);
        for cand in candidates.iter_mut() {
            let overlap = chosen.dotc(cand);
            *cand -= &chosen * overlap;
        }
        basis.push(chosen);
    }
    basis
}

/// Multiplies by a global phase so the largest-magnitude component (first
/// one on near-ties) is real positive.
pub(crate) fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("max attained");
    let phase = v[k].conj() / v[k].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[k] = C64::new(v[k].re, 0.0);
}

fn lexicographic_magnitude(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let (x, y) = (x.norm(), y.norm());
        if (x - y).abs() > 1e-9 {
            // larger magnitude first
            return y.partial_cmp(&x).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

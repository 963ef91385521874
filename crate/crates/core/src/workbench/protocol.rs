use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::quantum::{max_abs_diff, polar_unitary, unitarity_defect, CMatrix, HermitianOperator, C64};

/// Endpoint agreement for schedules.
const ENDPOINT_TOL: f64 = 1e-12;
/// Largest tolerated unitarity defect of a propagator.
pub const UNITARITY_GATE: f64 = 1e-9;
/// Successive refinements must agree to this for [`evolve_unitary_converged`].
pub const REFINEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Knot {
    pub time: f64,
    pub hamiltonian: HermitianOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrivingPath {
    /// Instantaneous switch; the state does not move.
    Sudden,
    /// `H(t) = H_A + (t / tau)(H_B - H_A)`.
    LinearRamp,
    /// Piecewise linear through the knots, starting at `t = 0`.
    Schedule(Vec<Knot>),
}

/// A change of Hamiltonian from `H_A` to `H_B` over a time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingProtocol {
    h_a: HermitianOperator,
    h_b: HermitianOperator,
    path: DrivingPath,
    tau: f64,
}

fn same_dims(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() })
    }
}

impl DrivingProtocol {
    pub fn sudden(h_a: HermitianOperator, h_b: HermitianOperator) -> Result<Self> {
        same_dims(&h_a, &h_b)?;
        Ok(Self { h_a, h_b, path: DrivingPath::Sudden, tau: 0.0 })
    }

    pub fn linear_ramp(h_a: HermitianOperator, h_b: HermitianOperator, tau: f64) -> Result<Self> {
        same_dims(&h_a, &h_b)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidProtocol(format!("ramp duration must be positive, got {tau}")));
        }
        Ok(Self { h_a, h_b, path: DrivingPath::LinearRamp, tau })
    }

    /// Knots with strictly increasing times from 0; `H_A` and `H_B` are the
    /// first and last Hamiltonians.
    pub fn schedule(knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidProtocol("a schedule needs at least two knots".into()));
        }
        if knots[0].time != 0.0 {
            return Err(Error::InvalidProtocol(format!("first knot at t = {}, not 0", knots[0].time)));
        }
        if knots.windows(2).any(|w| !(w[1].time > w[0].time) || !w[1].time.is_finite()) {
            return Err(Error::InvalidProtocol("knot times must increase strictly".into()));
        }
        for k in &knots[1..] {
            same_dims(&knots[0].hamiltonian, &k.hamiltonian)?;
        }
        let h_a = knots[0].hamiltonian.clone();
        let last = knots.last().expect("two knots");
        let (h_b, tau) = (last.hamiltonian.clone(), last.time);
        Ok(Self { h_a, h_b, path: DrivingPath::Schedule(knots), tau })
    }

    /// Like [`Self::schedule`], but also checks the endpoints against given
    /// Hamiltonians.
    pub fn schedule_between(h_a: &HermitianOperator, h_b: &HermitianOperator, knots: Vec<Knot>) -> Result<Self> {
        let p = Self::schedule(knots)?;
        for (want, got) in [(h_a, &p.h_a), (h_b, &p.h_b)] {
            same_dims(want, got)?;
            let gap = max_abs_diff(want.matrix(), got.matrix());
            if gap > ENDPOINT_TOL {
                return Err(Error::InvalidProtocol(format!("schedule endpoint off by {gap:e}")));
            }
        }
        Ok(p)
    }

    pub fn h_a(&self) -> &HermitianOperator {
        &self.h_a
    }

    pub fn h_b(&self) -> &HermitianOperator {
        &self.h_b
    }

    pub fn path(&self) -> &DrivingPath {
        &self.path
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.h_a.dim()
    }

    /// `H(t)` for `0 <= t <= tau`; clamps outside.
    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        match &self.path {
            DrivingPath::Sudden => {
                if t > 0.0 {
                    self.h_b.matrix().clone()
                } else {
                    self.h_a.matrix().clone()
                }
            }
            DrivingPath::LinearRamp => {
                let s = (t / self.tau).clamp(0.0, 1.0);
                self.h_a.matrix() * C64::from(1.0 - s) + self.h_b.matrix() * C64::from(s)
            }
            DrivingPath::Schedule(knots) => {
                let k = knots.partition_point(|k| k.time <= t).clamp(1, knots.len() - 1);
                let (a, b) = (&knots[k - 1], &knots[k]);
                let s = ((t - a.time) / (b.time - a.time)).clamp(0.0, 1.0);
                a.hamiltonian.matrix() * C64::from(1.0 - s) + b.hamiltonian.matrix() * C64::from(s)
            }
        }
    }
}

/// `exp(-i H t)` for Hermitian `H`, through its eigendecomposition.
pub fn unitary_exponential(h: &CMatrix, t: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    v * phases * v.adjoint()
}

/// Ordered product of midpoint step propagators, later steps on the left,
/// re-projected onto the unitaries after every step.
pub fn evolve_unitary(protocol: &DrivingProtocol, n_steps: usize) -> Result<CMatrix> {
    let d = protocol.dim();
    if protocol.path == DrivingPath::Sudden {
        return Ok(CMatrix::identity(d, d));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let dt = protocol.tau / n_steps as f64;
    let mut u = CMatrix::identity(d, d);
    for k in 0..n_steps {
        let mid = (k as f64 + 0.5) * dt;
        let step = unitary_exponential(&protocol.hamiltonian_at(mid), dt);
        u = polar_unitary(&(step * u));
    }
    let defect = unitarity_defect(&u);
    if defect > UNITARITY_GATE {
        return Err(Error::NotUnitary { defect });
    }
    Ok(u)
}

/// A propagator together with the refinement that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub unitary: CMatrix,
    pub n_steps: usize,
    /// Max-entry change from the previous refinement.
    pub last_change: f64,
}

/// Doubles the step count from `initial_steps` until two successive
/// propagators agree within `tol`, at most `max_doublings` times.
pub fn evolve_unitary_converged(
    protocol: &DrivingProtocol,
    initial_steps: usize,
    tol: f64,
    max_doublings: u32,
) -> Result<Propagator> {
    let mut n = initial_steps.max(1);
    let mut previous = evolve_unitary(protocol, n)?;
    if protocol.path == DrivingPath::Sudden {
        return Ok(Propagator { unitary: previous, n_steps: 0, last_change: 0.0 });
    }
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        n *= 2;
        let next = evolve_unitary(protocol, n)?;
        change = max_abs_diff(&next, &previous);
        previous = next;
        if change <= tol {
            return Ok(Propagator { unitary: previous, n_steps: n, last_change: change });
        }
    }
    Err(Error::NotConverged { change, steps: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(rows: &[[f64; 2]; 2]) -> HermitianOperator {
        HermitianOperator::from_real_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
    }

    #[test]
    fn sudden_is_identity() {
        let p = DrivingProtocol::sudden(qubit(&[[0.0, 0.0], [0.0, 1.0]]), qubit(&[[0.0, 0.5], [0.5, 1.0]])).unwrap();
        assert_eq!(evolve_unitary(&p, 10).unwrap(), CMatrix::identity(2, 2));
        assert_eq!(p.tau(), 0.0);
    }

    #[test]
    fn constant_hamiltonian_is_exact() {
        let h = qubit(&[[0.3, 0.2], [0.2, -0.4]]);
        let p = DrivingProtocol::linear_ramp(h.clone(), h.clone(), 2.5).unwrap();
        let one = evolve_unitary(&p, 1).unwrap();
        let many = evolve_unitary(&p, 64).unwrap();
        assert!(max_abs_diff(&one, &many) <= 1e-10);
        // independent oracle: Pauli form exp(-i t (a I + b.sigma))
        let (a, bx, bz) = (-0.05f64, 0.2f64, 0.35f64);
        let t = 2.5;
        let r = (bx * bx + bz * bz).sqrt();
        let (c, s) = ((r * t).cos(), (r * t).sin());
        let g = C64::from_polar(1.0, -a * t);
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[
                g * C64::new(c, -s * bz / r),
                g * C64::new(0.0, -s * bx / r),
                g * C64::new(0.0, -s * bx / r),
                g * C64::new(c, s * bz / r),
            ],
        );
        assert!(max_abs_diff(&one, &want) <= 1e-14);
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let p = DrivingProtocol::linear_ramp(qubit(&[[0.0, 0.0], [0.0, 1.0]]), qubit(&[[0.0, 0.5], [0.5, 1.0]]), 3.0)
            .unwrap();
        let reference = evolve_unitary(&p, 4096).unwrap();
        let err = |n| max_abs_diff(&evolve_unitary(&p, n).unwrap(), &reference);
        let ratio = err(16) / err(32);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn converged_propagator() {
        let p = DrivingProtocol::linear_ramp(qubit(&[[0.0, 0.0], [0.0, 1.0]]), qubit(&[[0.0, 0.5], [0.5, 1.0]]), 2.0)
            .unwrap();
        let prop = evolve_unitary_converged(&p, 8, REFINEMENT_TOL, 20).unwrap();
        assert!(prop.last_change <= REFINEMENT_TOL);
        assert!(unitarity_defect(&prop.unitary) <= UNITARITY_GATE);
        assert!(matches!(evolve_unitary_converged(&p, 1, 1e-30, 2), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn schedule_interpolates_and_validates() {
        let a = qubit(&[[0.0, 0.0], [0.0, 1.0]]);
        let m = qubit(&[[1.0, 0.0], [0.0, 0.0]]);
        let b = qubit(&[[0.0, 0.5], [0.5, 1.0]]);
        let knots = vec![
            Knot { time: 0.0, hamiltonian: a.clone() },
            Knot { time: 1.0, hamiltonian: m.clone() },
            Knot { time: 3.0, hamiltonian: b.clone() },
        ];
        let p = DrivingProtocol::schedule_between(&a, &b, knots.clone()).unwrap();
        assert_eq!(p.tau(), 3.0);
        assert!(max_abs_diff(&p.hamiltonian_at(1.0), m.matrix()) < 1e-15);
        let halfway = (a.matrix() + m.matrix()) * C64::from(0.5);
        assert!(max_abs_diff(&p.hamiltonian_at(0.5), &halfway) < 1e-15);
        assert!(DrivingProtocol::schedule_between(&a, &m, knots).is_err());
        let bad = vec![Knot { time: 0.0, hamiltonian: a.clone() }, Knot { time: 0.0, hamiltonian: b.clone() }];
        assert!(DrivingProtocol::schedule(bad).is_err());
        assert!(DrivingProtocol::linear_ramp(a.clone(), b, 0.0).is_err());
    }
}

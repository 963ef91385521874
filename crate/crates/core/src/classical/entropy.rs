use itertools::Itertools;

use super::{GridDistribution, JointDistribution, PhaseGrid, Surface};
use crate::error::{check_beta, Error, Result};
use crate::quantum::SUPPORT_FLOOR;

/// Largest grid for [`permutation_min_bruteforce`].
pub const MAX_BRUTEFORCE_CELLS: usize = 8;

fn check_size(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `D(J||p_eq) = sum J ln J - sum J(f, i) ln p_eq(f)`; the reference
/// distribution is evaluated on the final cell `f`.
pub fn joint_relative_entropy(joint: &JointDistribution, p_eq: &GridDistribution) -> Result<f64> {
    check_size(joint.n_cells(), p_eq.len())?;
    let (entropy_term, reference_term) = joint_terms(joint, p_eq)?;
    Ok(entropy_term - reference_term)
}

/// `(sum J ln J, sum J ln p_eq(f))`.
pub(crate) fn joint_terms(joint: &JointDistribution, p_eq: &GridDistribution) -> Result<(f64, f64)> {
    let m = joint.matrix();
    let q = p_eq.weights();
    let mut entropy_term = 0.0;
    let mut reference_term = 0.0;
    for f in 0..m.nrows() {
        let mut row_mass = 0.0;
        for i in 0..m.ncols() {
            let x = m[(f, i)];
            if x > SUPPORT_FLOOR {
                entropy_term += x * x.ln();
                row_mass += x;
            }
        }
        if row_mass > 0.0 {
            if q[f] <= SUPPORT_FLOOR {
                return Err(Error::SupportViolation(format!("joint mass {row_mass:e} on cell {f} where p_eq = 0")));
            }
            reference_term += row_mass * q[f].ln();
        }
    }
    Ok((entropy_term, reference_term))
}

/// Pointwise Kullback-Leibler divergence `sum p ln(p/q)`.
pub fn classical_relative_entropy(p: &GridDistribution, q: &GridDistribution) -> Result<f64> {
    check_size(p.len(), q.len())?;
    kl(p.weights(), q.weights())
}

fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a <= SUPPORT_FLOOR {
            continue;
        }
        if b <= SUPPORT_FLOOR {
            return Err(Error::SupportViolation(format!("p = {a:e} but q = 0 at index {i}")));
        }
        acc += a * (a / b).ln();
    }
    Ok(acc)
}

/// `beta^-1 [D(J||p_eq) - D(p_A||p_eq)]`. Reported as computed; negative
/// when the dynamics has already lowered the energy.
pub fn classical_ergotropy(
    joint: &JointDistribution,
    p_a: &GridDistribution,
    p_eq: &GridDistribution,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    let d_joint = joint_relative_entropy(joint, p_eq)?;
    let d_initial = classical_relative_entropy(p_a, p_eq)?;
    Ok((d_joint - d_initial) / beta)
}

/// `phi(f) = sum_i J(f, i) - p_A(f)`: the evolved marginal minus the
/// initial distribution.
pub fn inhomogeneity_phi(joint: &JointDistribution, p_a: &GridDistribution) -> Result<Vec<f64>> {
    check_size(joint.n_cells(), p_a.len())?;
    Ok(joint.final_marginal().iter().zip(p_a.weights()).map(|(m, p)| m - p).collect())
}

/// `sum_f phi(f) E_B(f)`. Only defined for permutation dynamics, where the
/// joint entropy equals the entropy of `p_A`.
pub fn ergotropy_via_phi(joint: &JointDistribution, p_a: &GridDistribution, grid: &PhaseGrid) -> Result<f64> {
    if !joint.is_deterministic() {
        return Err(Error::NonDeterministicKernel);
    }
    check_size(grid.n_cells(), p_a.len())?;
    let phi = inhomogeneity_phi(joint, p_a)?;
    Ok(phi.iter().zip(grid.energies(Surface::B)).map(|(f, e)| f * e).sum())
}

/// `sum_i p_desc(i) ln(p_desc(i) / q_desc(i))` with both sorted descending.
pub fn sorted_pairing_kl(p: &GridDistribution, q: &GridDistribution) -> Result<f64> {
    check_size(p.len(), q.len())?;
    let desc = |v: &[f64]| -> Vec<f64> {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    kl(&desc(p.weights()), &desc(q.weights()))
}

/// Exhaustive minimum of `sum_i p(perm(i)) ln(p(perm(i)) / q(i))` over all
/// permutations. Returns the minimum and a minimizing `perm`.
pub fn permutation_min_bruteforce(p: &GridDistribution, q: &GridDistribution) -> Result<(f64, Vec<usize>)> {
    check_size(p.len(), q.len())?;
    let n = p.len();
    if n > MAX_BRUTEFORCE_CELLS {
        return Err(Error::TooLarge { n, max: MAX_BRUTEFORCE_CELLS });
    }
    let (pw, qw) = (p.weights(), q.weights());
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let permuted: Vec<f64> = perm.iter().map(|&k| pw[k]).collect();
        let Ok(value) = kl(&permuted, qw) else { continue };
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, perm));
        }
    }
    best.ok_or_else(|| Error::SupportViolation("every pairing puts mass where q = 0".into()))
}

#[cfg(test)]
mod tests {
    use super::super::{grid_gibbs, joint_from_kernel, TransitionKernel};
    use super::*;

    fn grid012() -> PhaseGrid {
        PhaseGrid::uniform_cells(vec![0.0, 1.0, 2.0]).unwrap()
    }

    fn dist(w: &[f64]) -> GridDistribution {
        GridDistribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn joint_entropy_examples() {
        let p_eq = grid_gibbs(&grid012(), Surface::B, 1.0).unwrap();
        // unit mass at (final 0, initial 1): -ln p_eq(0)
        let p_a = GridDistribution::point_mass(3, 1).unwrap();
        let to_first = TransitionKernel::from_permutation(&[1, 0, 2]).unwrap();
        let j = joint_from_kernel(&p_a, &to_first).unwrap();
        let d = joint_relative_entropy(&j, &p_eq).unwrap();
        assert!((d + p_eq.weights()[0].ln()).abs() < 1e-15);
        assert!((d - 0.40760596444438046).abs() < 1e-12);

        let j = joint_from_kernel(&p_eq, &TransitionKernel::identity(3)).unwrap();
        assert!(joint_relative_entropy(&j, &p_eq).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pointwise_kl_examples() {
        let q = grid_gibbs(&grid012(), Surface::B, 1.0).unwrap();
        assert_eq!(classical_relative_entropy(&q, &q).unwrap(), 0.0);
        let d = classical_relative_entropy(&dist(&[0.0, 1.0, 0.0]), &q).unwrap();
        assert!((d - 1.4076059644443804).abs() < 1e-12);
        let d = classical_relative_entropy(&dist(&[0.5, 0.5, 0.0]), &q).unwrap();
        assert!((d - 0.214458783884435).abs() < 1e-12);
        let empty_support = dist(&[1.0, 0.0, 0.0]);
        assert!(matches!(classical_relative_entropy(&q, &empty_support), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn ergotropy_examples() {
        let grid = grid012();
        let p_eq = grid_gibbs(&grid, Surface::B, 1.0).unwrap();
        let p_a = GridDistribution::point_mass(3, 1).unwrap();

        let j = joint_from_kernel(&p_a, &TransitionKernel::identity(3)).unwrap();
        assert!(classical_ergotropy(&j, &p_a, &p_eq, 1.0).unwrap().abs() < 1e-15);
        assert_eq!(ergotropy_via_phi(&j, &p_a, &grid).unwrap(), 0.0);
        assert!(inhomogeneity_phi(&j, &p_a).unwrap().iter().all(|&x| x == 0.0));

        let up = joint_from_kernel(&p_a, &TransitionKernel::from_permutation(&[0, 2, 1]).unwrap()).unwrap();
        assert!((classical_ergotropy(&up, &p_a, &p_eq, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((ergotropy_via_phi(&up, &p_a, &grid).unwrap() - 1.0).abs() < 1e-15);

        let down = joint_from_kernel(&p_a, &TransitionKernel::from_permutation(&[1, 0, 2]).unwrap()).unwrap();
        assert!((classical_ergotropy(&down, &p_a, &p_eq, 1.0).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(inhomogeneity_phi(&down, &p_a).unwrap(), vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn phi_route_rejects_mixing_kernels() {
        let m = nalgebra::DMatrix::from_element(3, 3, 1.0 / 3.0);
        let t = TransitionKernel::new(m).unwrap();
        let p_a = GridDistribution::point_mass(3, 0).unwrap();
        let j = joint_from_kernel(&p_a, &t).unwrap();
        assert!(matches!(ergotropy_via_phi(&j, &p_a, &grid012()), Err(Error::NonDeterministicKernel)));
    }

    #[test]
    fn bruteforce_examples() {
        let (v, perm) = permutation_min_bruteforce(&dist(&[0.2, 0.5, 0.3]), &dist(&[0.6, 0.3, 0.1])).unwrap();
        assert!((v - 0.047468657715011756).abs() < 1e-12);
        assert_eq!(perm, vec![1, 2, 0]);
        let p = dist(&[0.5, 0.3, 0.2]);
        let (v, perm) = permutation_min_bruteforce(&p, &p).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(perm, vec![0, 1, 2]);
        let big = GridDistribution::uniform(9).unwrap();
        assert!(matches!(permutation_min_bruteforce(&big, &big), Err(Error::TooLarge { .. })));
    }
}

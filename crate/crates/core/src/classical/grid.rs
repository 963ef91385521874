use serde::{Deserialize, Serialize};

use crate::error::{check_beta, Error, Result};
use crate::quantum::log_sum_exp;

const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    /// Initial Hamiltonian.
    A,
    /// Final Hamiltonian.
    B,
}

/// Discretized phase space: one energy per cell for each Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    energy_a: Vec<f64>,
    energy_b: Vec<f64>,
    cell_volume: f64,
}

impl PhaseGrid {
    pub fn new(energy_a: Vec<f64>, energy_b: Vec<f64>, cell_volume: f64) -> Result<Self> {
        if energy_a.is_empty() || energy_a.len() != energy_b.len() {
            return Err(Error::DimensionMismatch { expected: energy_a.len(), got: energy_b.len() });
        }
        if energy_a.iter().chain(&energy_b).any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("cell energies must be finite".into()));
        }
        if !(cell_volume > 0.0 && cell_volume.is_finite()) {
            return Err(Error::InvalidArgument(format!("cell volume must be positive, got {cell_volume}")));
        }
        Ok(Self { energy_a, energy_b, cell_volume })
    }

    /// Same energies on both surfaces, unit cells.
    pub fn uniform_cells(energies: Vec<f64>) -> Result<Self> {
        Self::new(energies.clone(), energies, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.energy_a.len()
    }

    pub fn energies(&self, surface: Surface) -> &[f64] {
        match surface {
            Surface::A => &self.energy_a,
            Surface::B => &self.energy_b,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }
}

/// Probability per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridDistribution {
    weights: Vec<f64>,
}

impl GridDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, cell: usize) -> Result<Self> {
        if cell >= n {
            return Err(Error::InvalidArgument(format!("cell {cell} out of range for {n} cells")));
        }
        let mut w = vec![0.0; n];
        w[cell] = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Uniform over every cell (not just over its support).
    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= tol)
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

impl TryFrom<Vec<f64>> for GridDistribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<GridDistribution> for Vec<f64> {
    fn from(d: GridDistribution) -> Self {
        d.weights
    }
}

/// Uniform distribution on the cells with energy in `[energy, energy + delta]`.
pub fn microcanonical(grid: &PhaseGrid, surface: Surface, energy: f64, delta: f64) -> Result<GridDistribution> {
    let upper = energy + delta;
    let slack = 1e-12 * (1.0 + energy.abs().max(upper.abs()));
    let inside: Vec<bool> = grid
        .energies(surface)
        .iter()
        .map(|&e| e >= energy - slack && e <= upper + slack)
        .collect();
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::EmptyShell { lower: energy, upper });
    }
    let w = 1.0 / count as f64;
    GridDistribution::new(inside.iter().map(|&b| if b { w } else { 0.0 }).collect())
}

/// Boltzmann weights `exp(-beta E(cell)) / Z` on one surface.
pub fn grid_gibbs(grid: &PhaseGrid, surface: Surface, beta: f64) -> Result<GridDistribution> {
    check_beta(beta)?;
    let exponents: Vec<f64> = grid.energies(surface).iter().map(|e| -beta * e).collect();
    let log_z = log_sum_exp(&exponents);
    let mut w: Vec<f64> = exponents.iter().map(|x| (x - log_z).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    GridDistribution::new(w)
}

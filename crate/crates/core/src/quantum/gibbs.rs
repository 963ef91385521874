use super::{DensityMatrix, HermitianOperator};
use crate::error::{check_beta, Error, Result};

/// Thermal state `exp(-beta H) / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    rho: DensityMatrix,
    beta: f64,
    log_z: f64,
    /// `ln p_i = -beta E_i - ln Z`, ascending-energy order.
    log_populations: Vec<f64>,
}

impl GibbsState {
    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Populations in ascending-energy order (equivalently descending).
    pub fn populations(&self) -> &[f64] {
        self.rho.eigenvalues()
    }

    pub fn log_populations(&self) -> &[f64] {
        &self.log_populations
    }

    pub fn into_rho(self) -> DensityMatrix {
        self.rho
    }
}

/// `ln sum_i exp(x_i)`, shifted by the maximum.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<GibbsState> {
    check_beta(beta)?;
    let spectrum = h.spectrum();
    let exponents: Vec<f64> = spectrum.values().iter().map(|e| -beta * e).collect();
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = exponents.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    let log_z = max + total.ln();
    let log_populations: Vec<f64> = exponents.iter().map(|x| (x - max) - total.ln()).collect();
    let populations: Vec<f64> = shifted.iter().map(|s| s / total).collect();
    if populations.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Gibbs populations underflow at beta = {beta}; energy spread too large"
        )));
    }
    let rho = DensityMatrix::from_spectrum(&populations, spectrum.vectors())?;
    Ok(GibbsState { rho, beta, log_z, log_populations })
}

//! Flaming as resonance alignment.
//!
//! Under a stimulus at `omega`, the network is assumed to restructure so that
//! the highest eigenfrequency not above `omega` moves onto it. Scaling every
//! link weight by `c^2` (with `c = omega / omega_nu`) scales every eigenvalue
//! by `c^2` and leaves the eigenvectors and node masses untouched.

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::spectral::Spectrum;

/// Relative slack when comparing an eigenfrequency against the drive, so a
/// printed eigenfrequency fed back in still selects its own mode.
const SELECT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RescalePlan {
    /// Mode moved onto the drive.
    pub nu: usize,
    pub omega_nu: f64,
    /// Driving frequency the mode is moved to.
    pub omega: f64,
    /// `omega / omega_nu`, never below 1.
    pub c: f64,
    /// `c^2`, the factor applied to every link weight.
    pub weight_factor: f64,
}

/// Largest mode with `0 < omega_mu <= omega`.
pub fn select_target_mode(spectrum: &Spectrum, omega: f64) -> Result<usize> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "driving frequency must be positive, got {omega}"
        )));
    }
    spectrum
        .omegas
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w > 0.0 && w <= omega * (1.0 + SELECT_SLACK))
        .map(|(mu, _)| mu)
        .ok_or_else(|| Error::NoTargetMode {
            omega,
            smallest: spectrum.smallest_nonzero_omega().unwrap_or(0.0),
        })
}

pub fn plan_rescale(spectrum: &Spectrum, omega: f64) -> Result<RescalePlan> {
    let nu = select_target_mode(spectrum, omega)?;
    let omega_nu = spectrum.omegas[nu];
    let c = (omega / omega_nu).max(1.0);
    Ok(RescalePlan {
        nu,
        omega_nu,
        omega,
        c,
        weight_factor: c * c,
    })
}

/// New graph with every weight multiplied by `plan.weight_factor`.
pub fn rescale_network(g: &WeightedDigraph, plan: &RescalePlan) -> Result<WeightedDigraph> {
    g.scaled(plan.weight_factor)
}

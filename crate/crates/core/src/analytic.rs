//! Closed-form stationary response to a periodic stimulus on one node.
//!
//! Every mode obeys `a'' + gamma a' + lambda a = sqrt(m_j) F cos(omega t) v(j)`;
//! its stationary part is `A cos(omega t + theta)` with
//!
//! ```text
//! A     = sqrt(m_j) F v(j) / sqrt((lambda - omega^2)^2 + (gamma omega)^2)
//! theta = atan2(-gamma omega, lambda - omega^2)           in (-pi, 0]
//! ```
//!
//! `A` keeps the sign of `v(j)`. Node states are `x = M^{-1/2} sum_mu a_mu v_mu`.

use nalgebra::{Complex, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Detuning below which an undamped drive counts as sitting on a mode.
pub const RESONANCE_EPS: f64 = 1e-12;

/// Periodic forcing `F cos(omega t)` applied to `node`, with damping `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Stimulus {
    pub node: usize,
    pub amplitude: f64,
    pub omega: f64,
    pub damping: f64,
}

impl Stimulus {
    pub fn new(node: usize, amplitude: f64, omega: f64, damping: f64) -> Result<Self> {
        let s = Self {
            node,
            amplitude,
            omega,
            damping,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stimulus amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.damping >= 0.0) || !self.damping.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "damping must be non-negative, got {}",
                self.damping
            )));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "driving frequency must be non-negative, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn with_damping(self, damping: f64) -> Self {
        Self { damping, ..self }
    }

    fn check_node(&self, n: usize) -> Result<()> {
        if self.node >= n {
            return Err(Error::NodeOutOfRange { node: self.node, n });
        }
        Ok(())
    }
}

/// Amplitude and phase of one mode in the stationary state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModalStationary {
    pub amplitude: f64,
    pub phase: f64,
}

fn forcing(spectrum: &Spectrum, m: &DVector<f64>, stim: &Stimulus, mu: usize) -> f64 {
    m[stim.node].sqrt() * stim.amplitude * spectrum.component(mu, stim.node)
}

fn diverges(spectrum: &Spectrum, stim: &Stimulus, mu: usize) -> bool {
    let on_mode = (stim.omega - spectrum.omegas[mu]).abs() < RESONANCE_EPS;
    on_mode && (stim.damping == 0.0 || stim.omega == 0.0)
}

/// `A_mu(omega)`.
pub fn modal_amplitude(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    mu: usize,
) -> Result<f64> {
    stim.check_node(spectrum.n())?;
    if diverges(spectrum, stim, mu) {
        return Err(Error::Divergent {
            mode: mu,
            omega: stim.omega,
        });
    }
    let w2 = stim.omega * stim.omega;
    let detune = spectrum.lambdas[mu] - w2;
    let damp = stim.damping * stim.omega;
    Ok(forcing(spectrum, m, stim, mu) / detune.hypot(damp))
}

/// `theta_mu(omega)` from the two-argument arctangent, so the phase runs
/// continuously from 0 through `-pi/2` at resonance towards `-pi`.
pub fn modal_phase(spectrum: &Spectrum, stim: &Stimulus, mu: usize) -> f64 {
    let w2 = stim.omega * stim.omega;
    let theta = (-(stim.damping * stim.omega)).atan2(spectrum.lambdas[mu] - w2);
    // turn -0.0 into 0.0
    theta + 0.0
}

pub fn modal_stationary(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
) -> Result<Vec<ModalStationary>> {
    (0..spectrum.n())
        .map(|mu| {
            Ok(ModalStationary {
                amplitude: modal_amplitude(spectrum, m, stim, mu)?,
                phase: modal_phase(spectrum, stim, mu),
            })
        })
        .collect()
}

/// Stationary node states `x(t)`.
pub fn stationary_solution(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    t: f64,
) -> Result<DVector<f64>> {
    Ok(stationary_state(spectrum, m, stim, t)?.0)
}

/// Stationary node states and velocities `(x(t), x'(t))`.
pub fn stationary_state(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = spectrum.n();
    let modes = modal_stationary(spectrum, m, stim)?;
    let mut y = DVector::zeros(n);
    let mut dy = DVector::zeros(n);
    for (mu, mode) in modes.iter().enumerate() {
        let arg = stim.omega * t + mode.phase;
        let v = spectrum.vectors.column(mu);
        y.axpy(mode.amplitude * arg.cos(), &v, 1.0);
        dy.axpy(-stim.omega * mode.amplitude * arg.sin(), &v, 1.0);
    }
    for i in 0..n {
        let s = m[i].sqrt();
        y[i] /= s;
        dy[i] /= s;
    }
    Ok((y, dy))
}

/// Complex velocity phasor `omega A_mu e^{i theta_mu}` of every mode.
///
/// Written as `F_mu / (lambda/omega - omega + i gamma)` so the zero mode stays
/// finite as `omega -> 0` when `gamma > 0`.
fn velocity_phasors(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
) -> Result<Vec<Complex<f64>>> {
    stim.check_node(spectrum.n())?;
    (0..spectrum.n())
        .map(|mu| {
            // velocities stay finite at omega = 0 when damped
            let on_mode = (stim.omega - spectrum.omegas[mu]).abs() < RESONANCE_EPS;
            if on_mode && stim.damping == 0.0 {
                return Err(Error::Divergent {
                    mode: mu,
                    omega: stim.omega,
                });
            }
            let f = forcing(spectrum, m, stim, mu);
            let lambda = spectrum.lambdas[mu];
            if stim.omega == 0.0 {
                // only the zero mode moves under a constant push
                return Ok(if lambda == 0.0 {
                    Complex::new(f, 0.0) / Complex::new(0.0, stim.damping)
                } else {
                    Complex::new(0.0, 0.0)
                });
            }
            let den = Complex::new(lambda / stim.omega - stim.omega, stim.damping);
            Ok(Complex::new(f, 0.0) / den)
        })
        .collect()
}

/// Oscillation energy `E_i = 1/2 omega^2 sum_mu A_mu^2 v_mu(i)^2`.
///
/// Modes sharing an eigenvalue are summed coherently before squaring, which
/// is the formula above in the eigenbasis aligned with the driven node and
/// keeps `E_i` independent of how a degenerate eigenspace is spanned.
///
/// As `omega -> 0` with `gamma > 0` this tends to
/// `m_j F^2 v_0(j)^2 v_0(i)^2 / (2 gamma^2)`: the zero mode's velocity stays
/// finite because damping alone limits the drift.
pub fn oscillation_energy(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    i: usize,
) -> Result<f64> {
    let n = spectrum.n();
    if i >= n {
        return Err(Error::NodeOutOfRange { node: i, n });
    }
    let z = velocity_phasors(spectrum, m, stim)?;
    Ok(energy_from_phasors(spectrum, &z, i))
}

fn energy_from_phasors(spectrum: &Spectrum, z: &[Complex<f64>], i: usize) -> f64 {
    0.5 * spectrum
        .degenerate_clusters()
        .into_iter()
        .map(|cluster| {
            cluster
                .map(|mu| z[mu] * spectrum.component(mu, i))
                .sum::<Complex<f64>>()
                .norm_sqr()
        })
        .sum::<f64>()
}

/// `E_i` for every node at once.
pub fn oscillation_energies(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
) -> Result<Vec<f64>> {
    let z = velocity_phasors(spectrum, m, stim)?;
    Ok((0..spectrum.n())
        .map(|i| energy_from_phasors(spectrum, &z, i))
        .collect())
}

/// Time-averaged stationary kinetic energy `<1/2 m_i v_i^2>` of node `i`.
///
/// Unlike `E_i` this keeps the interference between modes; it is what the
/// moving average of a simulated kinetic energy converges to.
pub fn mean_kinetic_energy(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    i: usize,
) -> Result<f64> {
    let n = spectrum.n();
    if i >= n {
        return Err(Error::NodeOutOfRange { node: i, n });
    }
    let z = velocity_phasors(spectrum, m, stim)?;
    let sum: Complex<f64> = z
        .iter()
        .enumerate()
        .map(|(mu, z)| z * spectrum.component(mu, i))
        .sum();
    Ok(0.25 * sum.norm_sqr())
}

/// Driving frequency of maximal modal amplitude, `sqrt(omega_mu^2 - gamma^2/2)`.
///
/// `None` when the mode is too heavily damped to show a peak.
pub fn resonance_peak(omega_mu: f64, gamma: f64) -> Option<f64> {
    let arg = omega_mu * omega_mu - 0.5 * gamma * gamma;
    (arg > 0.0).then(|| arg.sqrt())
}

/// `steps` evenly spaced frequencies from `min` to `max` inclusive.
pub fn uniform_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || !(max > min) || !(min >= 0.0) || !max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sweep grid needs 0 <= min < max and at least 2 steps (got {min}..{max}, {steps})"
        )));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|k| min + h * k as f64).collect())
}

pub const DEFAULT_SWEEP_STEPS: usize = 2000;
pub const DEFAULT_SWEEP_SPAN: f64 = 1.2;

/// 2000 points from 0 to `1.2 * omega_max`.
pub fn default_grid(spectrum: &Spectrum) -> Result<Vec<f64>> {
    uniform_grid(
        0.0,
        DEFAULT_SWEEP_SPAN * spectrum.omega_max(),
        DEFAULT_SWEEP_STEPS,
    )
}

/// `E_i(omega)` on a frequency grid; `energies[k][i]` belongs to `omegas[k]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepTable {
    pub omegas: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn node_count(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn curve(&self, node: usize) -> Vec<f64> {
        self.energies.iter().map(|row| row[node]).collect()
    }

    /// `(omega, node, energy)` rows, frequency-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.omegas
            .iter()
            .zip(&self.energies)
            .flat_map(|(&w, row)| row.iter().enumerate().map(move |(i, &e)| (w, i, e)))
    }

    /// Grid point with the largest energy for `node` among `lo <= omega <= hi`.
    pub fn argmax_within(&self, node: usize, lo: f64, hi: f64) -> Option<(usize, f64, f64)> {
        self.omegas
            .iter()
            .enumerate()
            .filter(|(_, &w)| w >= lo && w <= hi)
            .map(|(k, &w)| (k, w, self.energies[k][node]))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }

    /// Largest energy of `node` over the whole grid.
    pub fn peak(&self, node: usize) -> Option<(f64, f64)> {
        self.argmax_within(node, f64::NEG_INFINITY, f64::INFINITY)
            .map(|(_, w, e)| (w, e))
    }
}

/// Oscillation energy of every node at every grid frequency.
///
/// `template` supplies node, amplitude and damping; its frequency is ignored.
/// Rows are evaluated in parallel.
pub fn energy_sweep(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    template: &Stimulus,
    grid: &[f64],
) -> Result<SweepTable> {
    template.check_node(spectrum.n())?;
    let energies = grid
        .par_iter()
        .map(|&w| oscillation_energies(spectrum, m, &template.with_omega(w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        omegas: grid.to_vec(),
        energies,
    })
}

//! Transients, beats and the beat-based omen of flaming.
//!
//! Starting from rest, every mode is the sum of its stationary response and a
//! free oscillation at the damped frequency `omega' = sqrt(omega_mu^2 - gamma^2/4)`
//! that decays as `e^{-gamma t / 2}`. Near resonance the two interfere and the
//! amplitude swells and collapses at `|omega - omega'| / 2`. Kinetic energy is
//! quadratic in the amplitude, so its envelope repeats at `|omega - omega'|`.
//! Every frequency reported here is in that energy domain.

use std::borrow::Cow;
use std::f64::consts::TAU;

use nalgebra::DVector;

use crate::analytic::{modal_amplitude, modal_phase, Stimulus};
use crate::error::{Error, Result};
use crate::simulator::moving_average;
use crate::spectral::Spectrum;

/// `sqrt(omega_mu^2 - gamma^2/4)`, or `None` for a non-oscillating mode.
pub fn damped_frequency(omega_mu: f64, gamma: f64) -> Option<f64> {
    let arg = omega_mu * omega_mu - 0.25 * gamma * gamma;
    (arg > 0.0).then(|| arg.sqrt())
}

fn underdamped(spectrum: &Spectrum, stim: &Stimulus, mu: usize) -> Result<f64> {
    damped_frequency(spectrum.omegas[mu], stim.damping).ok_or(Error::Overdamped {
        mode: mu,
        omega_mu: spectrum.omegas[mu],
        gamma: stim.damping,
    })
}

/// Exact zero-initial-condition response of one mode,
/// `a(t) = c e^{-gamma t/2} cos(omega' t + phi) + A cos(omega t + theta)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TransientModal {
    pub mode: usize,
    pub omega_prime: f64,
    pub c: f64,
    pub phi: f64,
    pub amplitude: f64,
    pub theta: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl TransientModal {
    pub fn new(
        spectrum: &Spectrum,
        m: &DVector<f64>,
        stim: &Stimulus,
        mu: usize,
    ) -> Result<Self> {
        let omega_prime = underdamped(spectrum, stim, mu)?;
        let amplitude = modal_amplitude(spectrum, m, stim, mu)?;
        let theta = modal_phase(spectrum, stim, mu);
        // a(0) = 0 and a'(0) = 0 fix the free part
        let p = -amplitude * theta.cos();
        let q = (-0.5 * stim.damping * p - amplitude * stim.omega * theta.sin()) / omega_prime;
        Ok(Self {
            mode: mu,
            omega_prime,
            c: p.hypot(q),
            phi: q.atan2(p),
            amplitude,
            theta,
            omega: stim.omega,
            gamma: stim.damping,
        })
    }

    pub fn free(&self, t: f64) -> f64 {
        self.c * (-0.5 * self.gamma * t).exp() * (self.omega_prime * t + self.phi).cos()
    }

    pub fn stationary(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.theta).cos()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.free(t) + self.stationary(t)
    }
}

/// Near-resonance transient `A e^{-gamma t/2} sin(omega' t) - A sin(omega t)`.
///
/// This is the exact zero-state response with its overall sign flipped, in
/// the limit `omega -> omega'` and small `gamma`.
pub fn transient_modal_solution(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    mu: usize,
    t: f64,
) -> Result<f64> {
    let omega_prime = underdamped(spectrum, stim, mu)?;
    let a = modal_amplitude(spectrum, m, stim, mu)?;
    Ok(a * (-0.5 * stim.damping * t).exp() * (omega_prime * t).sin() - a * (stim.omega * t).sin())
}

/// Product form `2A cos((omega + omega') t/2) sin((omega' - omega) t/2)` of
/// the transient with the decay dropped.
pub fn beat_approximation(
    spectrum: &Spectrum,
    m: &DVector<f64>,
    stim: &Stimulus,
    mu: usize,
    t: f64,
) -> Result<f64> {
    let omega_prime = underdamped(spectrum, stim, mu)?;
    let a = modal_amplitude(spectrum, m, stim, mu)?;
    let w = stim.omega;
    Ok(2.0 * a * (0.5 * (w + omega_prime) * t).cos() * (0.5 * (omega_prime - w) * t).sin())
}

/// Energy-domain beat frequency `|omega - omega'_mu|` for the mode nearest the
/// drive, as `(mode, frequency)`.
pub fn predicted_beat(spectrum: &Spectrum, omega: f64, gamma: f64) -> Option<(usize, f64)> {
    let mu = spectrum.nearest_mode(omega);
    damped_frequency(spectrum.omegas[mu], gamma).map(|wp| (mu, (omega - wp).abs()))
}

/// Detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeatConfig {
    /// Minimum prominence of an envelope minimum, as a fraction of the
    /// series range.
    pub min_prominence: f64,
    /// Largest coefficient of variation of the minimum spacing.
    pub max_spacing_cv: f64,
    /// Interior minima needed for a detection.
    pub min_minima: usize,
    /// Envelope frequencies above this multiple of the drive are fast
    /// interference between separated modes, not beats.
    pub max_frequency_ratio: f64,
    /// Length, in driving periods, of an extra centred moving average applied
    /// before searching for minima. It suppresses the residual ripple at
    /// `omega + omega'` that one averaging pass leaves behind. Needs the drive.
    pub smoothing_periods: f64,
    /// Driving frequency; enables the low-frequency gate and the smoothing.
    pub drive_omega: Option<f64>,
}

impl Default for BeatConfig {
    fn default() -> Self {
        Self {
            min_prominence: 1e-3,
            max_spacing_cv: 0.3,
            min_minima: 2,
            max_frequency_ratio: 0.25,
            smoothing_periods: 1.0,
            drive_omega: None,
        }
    }
}

impl BeatConfig {
    pub fn with_drive(self, omega: f64) -> Self {
        Self {
            drive_omega: Some(omega),
            ..self
        }
    }

    pub fn frequency_cutoff(&self) -> Option<f64> {
        self.drive_omega.map(|w| w * self.max_frequency_ratio)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeatReport {
    pub detected: bool,
    /// Energy-domain envelope frequency `2 pi / mean minimum spacing`;
    /// 0 with fewer than two minima.
    pub envelope_frequency: f64,
    /// Energy-domain `|omega - omega'_mu|` of the nearest mode, when known.
    pub predicted_frequency: Option<f64>,
    pub predicted_mode: Option<usize>,
    pub envelope_minima_times: Vec<f64>,
    pub spacing_cv: f64,
    /// Peak of the last quarter over peak of the first quarter.
    pub amplitude_growth: f64,
    /// Mean of the last quarter of the series.
    pub converged_level: f64,
    pub drive_omega: Option<f64>,
    pub frequency_cutoff: Option<f64>,
}

impl BeatReport {
    pub fn with_prediction(mut self, spectrum: &Spectrum, gamma: f64) -> Self {
        if let Some(w) = self.drive_omega {
            if let Some((mu, f)) = predicted_beat(spectrum, w, gamma) {
                self.predicted_mode = Some(mu);
                self.predicted_frequency = Some(f);
            }
        }
        self
    }
}

/// Interior local minima of `series` with their prominence.
fn minima_with_prominence(series: &[f64]) -> Vec<(usize, f64)> {
    let n = series.len();
    let mut out = Vec::new();
    let mut k = 1;
    while k + 1 < n {
        let val = series[k];
        if !(val < series[k - 1]) {
            k += 1;
            continue;
        }
        // walk across a flat bottom
        let mut end = k;
        while end + 1 < n && series[end + 1] == val {
            end += 1;
        }
        if end + 1 >= n || !(series[end + 1] > val) {
            k = end + 1;
            continue;
        }
        // each side: highest point before the series dips below this minimum
        let left_max = series[..k]
            .iter()
            .rev()
            .take_while(|&&s| s >= val)
            .fold(val, |a, &s| a.max(s));
        let right_max = series[end + 1..]
            .iter()
            .take_while(|&&s| s >= val)
            .fold(val, |a, &s| a.max(s));
        out.push(((k + end) / 2, left_max.min(right_max) - val));
        k = end + 1;
    }
    out
}

fn mean_and_cv(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, if mean > 0.0 { var.sqrt() / mean } else { f64::INFINITY })
}

fn smooth<'a>(
    series: &'a [f64],
    times: &'a [f64],
    config: &BeatConfig,
) -> (Cow<'a, [f64]>, Cow<'a, [f64]>) {
    let spacing = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let window = match config.drive_omega {
        Some(w) if w > 0.0 && config.smoothing_periods > 0.0 && spacing > 0.0 => {
            (config.smoothing_periods * TAU / (w * spacing)).round() as usize | 1
        }
        _ => 1,
    };
    // keep at least half of the series
    if window < 3 || 2 * window > series.len() {
        return (Cow::Borrowed(series), Cow::Borrowed(times));
    }
    match moving_average(series, window) {
        Ok(smoothed) => {
            let half = (window - 1) / 2;
            let t = times[half..half + smoothed.len()].to_vec();
            (Cow::Owned(smoothed), Cow::Owned(t))
        }
        Err(_) => (Cow::Borrowed(series), Cow::Borrowed(times)),
    }
}

/// Find a beat envelope in a smoothed kinetic-energy series.
///
/// Minima count when their prominence is at least `min_prominence` of the
/// series range. A detection needs `min_minima` of them with regular spacing
/// and, when the drive is known, an envelope frequency at or below the cutoff.
pub fn detect_beats(series: &[f64], times: &[f64], config: &BeatConfig) -> Result<BeatReport> {
    const NEEDED: usize = 8;
    if series.len() != times.len() {
        return Err(Error::InvalidParameter(format!(
            "series has {} values but {} times",
            series.len(),
            times.len()
        )));
    }
    if series.len() < NEEDED {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: NEEDED,
        });
    }
    if let Some(t) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { time: times[t] });
    }

    let (series, times) = smooth(series, times, config);
    let (series, times) = (series.as_ref(), times.as_ref());

    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = hi - lo;
    let minima: Vec<usize> = if range > 0.0 {
        minima_with_prominence(series)
            .into_iter()
            .filter(|&(_, p)| p >= config.min_prominence * range)
            .map(|(k, _)| k)
            .collect()
    } else {
        Vec::new()
    };
    let minima_times: Vec<f64> = minima.iter().map(|&k| times[k]).collect();
    let gaps: Vec<f64> = minima_times.windows(2).map(|w| w[1] - w[0]).collect();
    let (envelope_frequency, spacing_cv) = if gaps.is_empty() {
        (0.0, f64::INFINITY)
    } else {
        let (mean, cv) = mean_and_cv(&gaps);
        (TAU / mean, cv)
    };

    let cutoff = config.frequency_cutoff();
    let detected = minima.len() >= config.min_minima.max(2)
        && spacing_cv < config.max_spacing_cv
        && cutoff.is_none_or(|c| envelope_frequency <= c);

    let quarter = (series.len() / 4).max(1);
    let early = series[..quarter].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let late_slice = &series[series.len() - quarter..];
    let late = late_slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amplitude_growth = if early > 0.0 { late / early } else { f64::INFINITY };
    let converged_level = late_slice.iter().sum::<f64>() / late_slice.len() as f64;

    Ok(BeatReport {
        detected,
        envelope_frequency,
        predicted_frequency: None,
        predicted_mode: None,
        envelope_minima_times: minima_times,
        spacing_cv,
        amplitude_growth,
        converged_level,
        drive_omega: config.drive_omega,
        frequency_cutoff: cutoff,
    })
}

/// Omen score in `[0, 1]`:
///
/// ```text
/// score = f_ref / (f_ref + f_env) * (1 - exp(-E_conv / E_ref))
/// ```
///
/// with `f_env` the envelope frequency, `f_ref` the detector's frequency
/// cutoff (or `f_env` itself when the drive was unknown), `E_conv` the
/// converged smoothed energy and `E_ref` a reference energy such as the
/// analytic peak. Slower beats and higher converged energy both raise it.
pub fn omen_score(report: &BeatReport, reference_energy: f64) -> f64 {
    if !report.detected || !(reference_energy > 0.0) {
        return 0.0;
    }
    let f_env = report.envelope_frequency.max(0.0);
    let f_ref = report.frequency_cutoff.unwrap_or(f_env);
    let slow = if f_ref + f_env > 0.0 { f_ref / (f_ref + f_env) } else { 1.0 };
    let strong = 1.0 - (-report.converged_level.max(0.0) / reference_energy).exp();
    (slow * strong).clamp(0.0, 1.0)
}

/// Driving frequency recovered from upward zero crossings of an oscillating
/// series over its second half.
pub fn estimate_drive_frequency(series: &[f64], times: &[f64]) -> Option<f64> {
    let start = series.len() / 2;
    let tail = &series[start..];
    let tail_t = &times[start..];
    let mean = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    let crossings: Vec<f64> = (1..tail.len())
        .filter(|&k| tail[k - 1] - mean < 0.0 && tail[k] - mean >= 0.0)
        .map(|k| {
            let (a, b) = (tail[k - 1] - mean, tail[k] - mean);
            let frac = -a / (b - a);
            tail_t[k - 1] + frac * (tail_t[k] - tail_t[k - 1])
        })
        .collect();
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(TAU * (crossings.len() - 1) as f64 / span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{symmetrize, Edge, Tolerances, WeightedDigraph};
    use crate::simulator::{SimConfig, Simulator};
    use crate::spectral::eigendecompose;

    fn chain() -> (WeightedDigraph, Spectrum, DVector<f64>) {
        let g = WeightedDigraph::new(
            2,
            vec![
                Edge { from: 0, to: 1, weight: 1.0 },
                Edge { from: 1, to: 0, weight: 1.0 },
            ],
        )
        .unwrap();
        let sym = symmetrize(&g, &Tolerances::default()).unwrap();
        let spec = eigendecompose(&sym).unwrap();
        let m = sym.m.clone();
        (g, spec, m)
    }

    #[test]
    fn transient_vanishes_at_zero() {
        let (_, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, spec.omegas[1] - 0.05, 0.02).unwrap();
        assert_eq!(transient_modal_solution(&spec, &m, &stim, 1, 0.0).unwrap(), 0.0);
        assert_eq!(beat_approximation(&spec, &m, &stim, 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn transient_initial_slope() {
        let (_, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, spec.omegas[1] - 0.05, 0.02).unwrap();
        let a = modal_amplitude(&spec, &m, &stim, 1).unwrap();
        let wp = damped_frequency(spec.omegas[1], 0.02).unwrap();
        let h = 1e-6;
        let slope = (transient_modal_solution(&spec, &m, &stim, 1, h).unwrap()
            - transient_modal_solution(&spec, &m, &stim, 1, -h).unwrap())
            / (2.0 * h);
        assert!((slope - a * (wp - stim.omega)).abs() < 1e-6 * a.abs());
    }

    #[test]
    fn overdamped_mode_is_rejected() {
        let (_, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, 1.0, 3.0).unwrap();
        assert!(matches!(
            transient_modal_solution(&spec, &m, &stim, 1, 1.0),
            Err(Error::Overdamped { mode: 1, .. })
        ));
        // the zero mode never oscillates
        let stim = Stimulus::new(0, 1.0, 1.0, 0.02).unwrap();
        assert!(TransientModal::new(&spec, &m, &stim, 0).is_err());
    }

    #[test]
    fn product_form_tracks_the_transient_early_on() {
        let (_, spec, m) = chain();
        let gamma = 0.02;
        let stim = Stimulus::new(0, 1.0, spec.omegas[1] - 0.05, gamma).unwrap();
        let a = modal_amplitude(&spec, &m, &stim, 1).unwrap().abs();
        for k in 0..=500 {
            let t = k as f64 * (0.1 / gamma) / 500.0;
            let exact = transient_modal_solution(&spec, &m, &stim, 1, t).unwrap();
            let approx = beat_approximation(&spec, &m, &stim, 1, t).unwrap();
            let bound = 1.0 - (-0.5 * gamma * t).exp();
            assert!((exact - approx).abs() <= a * bound + 1e-12);
            assert!((exact - approx).abs() <= 0.05 * a);
        }
    }

    #[test]
    fn exact_zero_state_response() {
        let (_, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, 1.3, 0.05).unwrap();
        let tm = TransientModal::new(&spec, &m, &stim, 1).unwrap();
        assert!(tm.value(0.0).abs() < 1e-14);
        let h = 1e-5;
        let slope = (tm.value(h) - tm.value(-h)) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
        // residual of a'' + gamma a' + lambda a = F_mu cos(omega t)
        let f_mu = m[0].sqrt() * spec.component(1, 0);
        for t in [0.7, 3.1, 12.0] {
            let d1 = (tm.value(t + h) - tm.value(t - h)) / (2.0 * h);
            let d2 = (tm.value(t + h) - 2.0 * tm.value(t) + tm.value(t - h)) / (h * h);
            let res = d2 + 0.05 * d1 + spec.lambdas[1] * tm.value(t) - f_mu * (1.3 * t).cos();
            assert!(res.abs() < 1e-4, "residual {res} at {t}");
        }
    }

    #[test]
    fn near_resonance_constants_match_the_quarter_turn() {
        let (_, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, spec.omegas[1] - 1e-6, 1e-3).unwrap();
        let tm = TransientModal::new(&spec, &m, &stim, 1).unwrap();
        // free part starts a quarter turn out of phase with magnitude |A|
        assert!((tm.c.abs() - tm.amplitude.abs()).abs() < 0.05 * tm.amplitude.abs());
        assert!((tm.phi.abs() - std::f64::consts::FRAC_PI_2).abs() < 0.05);
    }

    #[test]
    fn envelope_period_example() {
        let (_, spec, _) = chain();
        let omega = spec.omegas[1] - 0.05;
        let (mu, f) = predicted_beat(&spec, omega, 0.02).unwrap();
        assert_eq!(mu, 1);
        assert!((TAU / f - 125.7).abs() < 0.5);
        assert!((2.0 * TAU / f - 251.3).abs() < 1.0);
        let (_, f_half) = predicted_beat(&spec, spec.omegas[1] - 0.025, 0.02).unwrap();
        assert!((f / f_half - 2.0).abs() < 0.01);
    }

    #[test]
    fn constant_series_has_no_beats() {
        let t: Vec<f64> = (0..200).map(f64::from).collect();
        let r = detect_beats(&[1.5; 200], &t, &BeatConfig::default()).unwrap();
        assert!(!r.detected);
        assert_eq!(omen_score(&r, 1.0), 0.0);
    }

    #[test]
    fn short_series_is_an_error() {
        assert!(matches!(
            detect_beats(&[1.0, 2.0], &[0.0, 1.0], &BeatConfig::default()),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn synthetic_envelope_frequency() {
        let f = 0.05;
        let t: Vec<f64> = (0..20_000).map(|k| k as f64 * 0.05).collect();
        let s: Vec<f64> = t
            .iter()
            .map(|&t| {
                let e = (-0.01 * t).exp();
                1.0 + e * e - 2.0 * e * (f * t).cos()
            })
            .collect();
        let r = detect_beats(&s, &t, &BeatConfig::default().with_drive(1.0)).unwrap();
        assert!(r.detected, "{r:?}");
        assert!((r.envelope_frequency - f).abs() < 0.02 * f);
    }

    #[test]
    fn prominence_of_a_simple_valley() {
        let p = minima_with_prominence(&[3.0, 1.0, 2.0, 0.5, 4.0]);
        assert_eq!(p, vec![(1, 1.0), (3, 2.5)]);
    }

    fn simulate_chain(omega: f64, t_end: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (g, spec, m) = chain();
        let stim = Stimulus::new(0, 1.0, omega, 0.02).unwrap();
        let mut cfg = SimConfig::new(stim, 1e-3, t_end);
        cfg.omega_max = Some(spec.omega_max());
        let run = Simulator::new(&g, &m).unwrap().run(&cfg).unwrap();
        (run.kinetic_ma[1].clone(), run.ma_times().to_vec(), run.x[1].clone())
    }

    #[test]
    fn simulated_chain_beats_at_the_predicted_rate() {
        let (_, spec, _) = chain();
        let omega = spec.omegas[1] - 0.05;
        let (k_ma, t, _) = simulate_chain(omega, 700.0);
        let r = detect_beats(&k_ma, &t, &BeatConfig::default().with_drive(omega))
            .unwrap()
            .with_prediction(&spec, 0.02);
        assert!(r.detected, "{r:?}");
        let predicted = r.predicted_frequency.unwrap();
        assert!((r.envelope_frequency - predicted).abs() < 0.1 * predicted, "{r:?}");
    }

    #[test]
    fn far_from_every_mode_there_are_no_beats() {
        let (_, spec, _) = chain();
        let omega = spec.omegas[1] + 0.8;
        let (k_ma, t, _) = simulate_chain(omega, 300.0);
        let r = detect_beats(&k_ma, &t, &BeatConfig::default().with_drive(omega)).unwrap();
        assert!(!r.detected, "{r:?}");
    }

    #[test]
    fn drive_frequency_from_position() {
        let t: Vec<f64> = (0..50_000).map(|k| k as f64 * 0.01).collect();
        let x: Vec<f64> = t.iter().map(|&t| 0.3 + (1.37 * t + 0.4).cos()).collect();
        let w = estimate_drive_frequency(&x, &t).unwrap();
        assert!((w - 1.37).abs() < 1e-3);
    }

    #[test]
    fn omen_score_orders_by_detuning() {
        let base = BeatReport {
            detected: true,
            envelope_frequency: 0.1,
            predicted_frequency: None,
            predicted_mode: None,
            envelope_minima_times: vec![],
            spacing_cv: 0.0,
            amplitude_growth: 1.0,
            converged_level: 1.0,
            drive_omega: Some(1.0),
            frequency_cutoff: Some(0.25),
        };
        let closer = BeatReport {
            envelope_frequency: 0.05,
            converged_level: 3.0,
            ..base.clone()
        };
        let s1 = omen_score(&base, 2.0);
        let s2 = omen_score(&closer, 2.0);
        assert!(s2 > s1 && s1 > 0.0 && s2 <= 1.0);
    }
}

//! Explicit time stepping of the forced, damped network oscillation.
//!
//! One step of size `dt` from time `t`:
//!
//! ```text
//! v_i <- v_i - (gamma v_i + sum_{j in out(i)} w_ij (x_i - x_j)) dt  [+ F cos(omega t) dt on the driven node]
//! x_i <- x_i + v_i(t) dt
//! ```
//!
//! Positions advance with the velocity from *before* the update (plain forward
//! Euler). The scheme is first-order accurate. For a mode of frequency
//! `omega_mu` one step multiplies the squared amplitude by about
//! `1 - gamma dt + omega_mu^2 dt^2`, so oscillations decay only while
//! `omega_max^2 dt < gamma` and the step is rejected outright once
//! `dt * omega_max >= 2`.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use nalgebra::DVector;

use crate::analytic::Stimulus;
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

/// Node positions and velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|z| z.is_finite())
    }
}

/// Advance `state` from `t` to `t + dt` in place.
///
/// `scratch` receives the new velocities; it is resized as needed so a caller
/// stepping in a loop can keep reusing one buffer.
pub fn step_into(
    state: &mut State,
    scratch: &mut Vec<f64>,
    graph: &WeightedDigraph,
    stim: &Stimulus,
    t: f64,
    dt: f64,
) {
    let n = graph.n();
    scratch.resize(n, 0.0);
    for (i, next) in scratch.iter_mut().enumerate() {
        let xi = state.x[i];
        let coupling: f64 = graph
            .out_edges(i)
            .iter()
            .map(|&(j, w)| w * (xi - state.x[j]))
            .sum();
        *next = state.v[i] - (stim.damping * state.v[i] + coupling) * dt;
        if i == stim.node {
            *next += stim.amplitude * (stim.omega * t).cos() * dt;
        }
    }
    for (x, v) in state.x.iter_mut().zip(&state.v) {
        *x += v * dt;
    }
    std::mem::swap(&mut state.v, scratch);
}

/// One step returning the next state. Fails on a non-finite result.
pub fn step(
    state: &State,
    graph: &WeightedDigraph,
    stim: &Stimulus,
    t: f64,
    dt: f64,
) -> Result<State> {
    let mut next = state.clone();
    let mut scratch = Vec::with_capacity(graph.n());
    step_into(&mut next, &mut scratch, graph, stim, t, dt);
    if !next.is_finite() {
        return Err(Error::NonFinite { time: t + dt });
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub stimulus: Stimulus,
    /// Defaults to all zeros.
    pub initial_x: Option<Vec<f64>>,
    pub initial_v: Option<Vec<f64>>,
    /// Keep every `sample_stride`-th step.
    pub sample_stride: usize,
    /// Moving-average window in integrator steps; one driving period when unset.
    pub ma_window_steps: Option<usize>,
    /// Largest eigenfrequency for the stability guard. A Gershgorin bound
    /// is used when unset.
    pub omega_max: Option<f64>,
}

impl SimConfig {
    pub const DEFAULT_STRIDE: usize = 10;

    pub fn new(stimulus: Stimulus, dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            stimulus,
            initial_x: None,
            initial_v: None,
            sample_stride: Self::DEFAULT_STRIDE,
            ma_window_steps: None,
            omega_max: None,
        }
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Moving-average window in steps, forced odd so it centres on a step.
    pub fn resolved_ma_window(&self) -> usize {
        let w = match self.ma_window_steps {
            Some(w) => w.max(1),
            None if self.stimulus.omega > 0.0 => {
                (TAU / (self.stimulus.omega * self.dt)).ceil() as usize
            }
            None => 1,
        };
        w | 1
    }

    fn validate(&self, n: usize) -> Result<()> {
        self.stimulus.validate()?;
        if self.stimulus.node >= n {
            return Err(Error::NodeOutOfRange {
                node: self.stimulus.node,
                n,
            });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample stride must be at least 1".into()));
        }
        for (name, init) in [("initial_x", &self.initial_x), ("initial_v", &self.initial_v)] {
            if let Some(v) = init {
                if v.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "{name} has length {}, graph has {n} nodes",
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How the time step compares against the fastest mode.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub omega_max: f64,
    /// `dt * omega_max`; must stay below 2.
    pub dt_omega_max: f64,
    /// `omega_max^2 dt < gamma`: no mode gains energy per step.
    pub decaying: bool,
}

pub fn stability(omega_max: f64, dt: f64, gamma: f64) -> StabilityReport {
    StabilityReport {
        omega_max,
        dt_omega_max: dt * omega_max,
        decaying: omega_max * omega_max * dt < gamma,
    }
}

/// Upper bound on `omega_max` from Gershgorin discs of the Laplacian.
pub fn gershgorin_omega_max(graph: &WeightedDigraph) -> f64 {
    (0..graph.n())
        .map(|i| 2.0 * graph.out_edges(i).iter().map(|&(_, w)| w).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt()
}

/// Sampled trajectories of one run; per-node series are indexed `[node][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub dt: f64,
    pub stride: usize,
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Kinetic energy `1/2 m_i v_i^2`.
    pub kinetic: Vec<Vec<f64>>,
    /// Centred moving average of the kinetic energy, computed at full step
    /// resolution; `kinetic_ma[i][k]` belongs to sample `ma_offset + k`.
    pub kinetic_ma: Vec<Vec<f64>>,
    pub ma_offset: usize,
    pub ma_window_steps: usize,
    pub stability: StabilityReport,
}

impl SimulationRun {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn samples(&self) -> usize {
        self.times.len()
    }

    pub fn kinetic_ma_at(&self, node: usize, sample: usize) -> Option<f64> {
        sample
            .checked_sub(self.ma_offset)
            .and_then(|k| self.kinetic_ma[node].get(k).copied())
    }

    /// Times matching `kinetic_ma[node]`.
    pub fn ma_times(&self) -> &[f64] {
        let len = self.kinetic_ma.first().map_or(0, Vec::len);
        &self.times[self.ma_offset..self.ma_offset + len]
    }

    /// Mean kinetic energy over all nodes at one sample.
    pub fn total_kinetic(&self, sample: usize) -> f64 {
        self.kinetic.iter().map(|k| k[sample]).sum()
    }
}

/// Trailing window sum per node, emitted at the window centre.
struct StreamingMean {
    window: usize,
    buffers: Vec<VecDeque<f64>>,
    sums: Vec<f64>,
    pushed: usize,
}

impl StreamingMean {
    fn new(n: usize, window: usize) -> Self {
        Self {
            window,
            buffers: vec![VecDeque::with_capacity(window + 1); n],
            sums: vec![0.0; n],
            pushed: 0,
        }
    }

    fn push(&mut self, values: impl Iterator<Item = f64>) {
        for ((buf, sum), val) in self.buffers.iter_mut().zip(&mut self.sums).zip(values) {
            buf.push_back(val);
            *sum += val;
            if buf.len() > self.window {
                *sum -= buf.pop_front().unwrap_or(0.0);
            }
        }
        self.pushed += 1;
        // bound round-off from the running add/subtract
        if self.pushed.is_multiple_of(self.window * 64) {
            for (buf, sum) in self.buffers.iter().zip(&mut self.sums) {
                *sum = buf.iter().sum();
            }
        }
    }

    /// Step index of the current window centre, once the window is full.
    fn centre(&self) -> Option<usize> {
        (self.pushed >= self.window).then(|| self.pushed - 1 - (self.window - 1) / 2)
    }

    fn means(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.window as f64;
        self.sums.iter().map(move |s| s / w)
    }
}

/// Drives one graph with fixed node masses.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    graph: &'a WeightedDigraph,
    m: &'a DVector<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(graph: &'a WeightedDigraph, m: &'a DVector<f64>) -> Result<Self> {
        if m.len() != graph.n() {
            return Err(Error::InvalidParameter(format!(
                "mass vector has length {}, graph has {} nodes",
                m.len(),
                graph.n()
            )));
        }
        Ok(Self { graph, m })
    }

    pub fn run(&self, config: &SimConfig) -> Result<SimulationRun> {
        let n = self.graph.n();
        config.validate(n)?;
        let stim = config.stimulus;
        let dt = config.dt;

        let omega_max = config
            .omega_max
            .unwrap_or_else(|| gershgorin_omega_max(self.graph));
        let report = stability(omega_max, dt, stim.damping);
        if report.dt_omega_max >= 2.0 {
            return Err(Error::UnstableStep {
                dt,
                product: report.dt_omega_max,
            });
        }
        if !report.decaying {
            log::warn!(
                "omega_max^2 * dt = {:.3e} >= gamma = {}: the explicit scheme will pump energy into the fastest modes",
                omega_max * omega_max * dt,
                stim.damping
            );
        }

        let mut state = State {
            x: config.initial_x.clone().unwrap_or_else(|| vec![0.0; n]),
            v: config.initial_v.clone().unwrap_or_else(|| vec![0.0; n]),
        };
        let total = config.total_steps();
        let stride = config.sample_stride;
        let window = config.resolved_ma_window();
        let capacity = total / stride + 1;

        let mut times = Vec::with_capacity(capacity);
        let mut xs = vec![Vec::with_capacity(capacity); n];
        let mut vs = vec![Vec::with_capacity(capacity); n];
        let mut ks = vec![Vec::with_capacity(capacity); n];
        let mut kma = vec![Vec::with_capacity(capacity); n];
        let mut ma_offset = None;

        let mut mean = StreamingMean::new(n, window);
        let mut scratch = Vec::with_capacity(n);
        let kinetic = |i: usize, v: f64| 0.5 * self.m[i] * v * v;

        for s in 0..=total {
            let t = s as f64 * dt;
            if s % stride == 0 {
                if !state.is_finite() {
                    return Err(Error::NonFinite { time: t });
                }
                times.push(t);
                for i in 0..n {
                    xs[i].push(state.x[i]);
                    vs[i].push(state.v[i]);
                    ks[i].push(kinetic(i, state.v[i]));
                }
            }
            mean.push(state.v.iter().enumerate().map(|(i, &v)| kinetic(i, v)));
            if let Some(c) = mean.centre() {
                if c % stride == 0 {
                    ma_offset.get_or_insert(c / stride);
                    for (series, val) in kma.iter_mut().zip(mean.means()) {
                        series.push(val);
                    }
                }
            }
            if s < total {
                step_into(&mut state, &mut scratch, self.graph, &stim, t, dt);
            }
        }

        Ok(SimulationRun {
            dt,
            stride,
            times,
            x: xs,
            v: vs,
            kinetic: ks,
            kinetic_ma: kma,
            ma_offset: ma_offset.unwrap_or(0),
            ma_window_steps: window,
            stability: report,
        })
    }
}

/// Centred simple moving average: `out[k] = mean(series[k..k + window])`.
///
/// The result has `len - window + 1` entries; `out[k]` is centred on sample
/// `k + (window - 1) / 2`.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if window > series.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: series.len(),
        });
    }
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in series {
        acc += x;
        prefix.push(acc);
    }
    let w = window as f64;
    Ok((0..=series.len() - window)
        .map(|k| (prefix[k + window] - prefix[k]) / w)
        .collect())
}

/// Default moving-average window in samples: one driving period.
pub fn default_ma_window(omega: f64, dt: f64, stride: usize) -> usize {
    if omega > 0.0 {
        (TAU / (omega * dt * stride as f64)).ceil().max(1.0) as usize
    } else {
        1
    }
}

//! Drive a network just below a mode, detect the slow beats in the kinetic
//! energy and score them as a resonance warning.
//!
//! `cargo run --release --example beats`

use netres::analytic::{mean_kinetic_energy, resonance_peak};
use netres::beats::{detect_beats, omen_score, BeatConfig};
use netres::simulator::{SimConfig, Simulator};
use netres::{NetworkModel, Stimulus};

fn main() -> netres::Result<()> {
    let model = NetworkModel::parse(include_str!("../data/graph5.txt"))?;
    let s = &model.spectrum;
    let gamma = 0.02;
    let mode_omega = s.omegas[1];
    // The node most involved in the first mode shows the clearest beats.
    let node = (0..s.n())
        .max_by(|&a, &b| s.component(1, a).abs().total_cmp(&s.component(1, b).abs()))
        .unwrap_or(0);
    let sim = Simulator::new(&model.graph, model.masses())?;

    // Peak stationary energy at the driven node, used to normalise the score.
    let peak = resonance_peak(mode_omega, gamma).unwrap_or(mode_omega);
    let reference = mean_kinetic_energy(s, model.masses(), &Stimulus::new(node, 1.0, peak, gamma)?, node)?;

    for detuning in [0.3, 0.15, 0.05] {
        let omega = mode_omega - detuning;
        let stim = Stimulus::new(node, 1.0, omega, gamma)?;
        let mut config = SimConfig::new(stim, 1e-3, 600.0);
        config.omega_max = Some(s.omega_max());
        let run = sim.run(&config)?;

        let report = detect_beats(
            &run.kinetic_ma[node],
            run.ma_times(),
            &BeatConfig::default().with_drive(omega),
        )?
        .with_prediction(s, gamma);
        println!(
            "omega {omega:.3}: beats {} at {:.4} (predicted {:.4}), omen {:.3}",
            report.detected,
            report.envelope_frequency,
            report.predicted_frequency.unwrap_or(f64::NAN),
            omen_score(&report, reference),
        );
    }
    Ok(())
}

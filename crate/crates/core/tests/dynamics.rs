//! Time-domain behaviour checked against the analytic model.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netres::analytic::{mean_kinetic_energy, resonance_peak};
use netres::beats::{detect_beats, omen_score, BeatConfig};
use netres::simulator::{SimConfig, Simulator};
use netres::{NetworkModel, Stimulus};

#[test]
fn smoothed_kinetic_energy_converges_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for g in common::random_graphs(0x5eed_0003, 5, 6) {
        let model = NetworkModel::new(g).unwrap();
        let s = &model.spectrum;
        let gamma = rng.gen_range(0.2..0.5);
        let omega = rng.gen_range(0.3..1.0) * s.omega_max();
        let stim = Stimulus::new(0, 1.0, omega, gamma).unwrap();

        // Euler's energy bias is about omega^2 dt / gamma; keep it near 0.5%.
        // 12 decay times leave a transient below e^-12 of its start.
        let dt = (5e-3 * gamma / (omega * omega)).min(1e-3);
        let mut config = SimConfig::new(stim, dt, 24.0 / gamma);
        config.omega_max = Some(s.omega_max());
        let run = Simulator::new(&model.graph, model.masses()).unwrap().run(&config).unwrap();

        for i in 0..model.n() {
            let expected = mean_kinetic_energy(s, model.masses(), &stim, i).unwrap();
            let simulated = *run.kinetic_ma[i].last().unwrap();
            let scale = (0..model.n())
                .map(|k| mean_kinetic_energy(s, model.masses(), &stim, k).unwrap())
                .fold(0.0, f64::max);
            assert!(
                (simulated - expected).abs() <= 0.02 * expected.max(1e-3 * scale),
                "node {i}: {simulated} vs {expected} (omega {omega}, gamma {gamma})"
            );
        }
    }
}

#[test]
fn omen_rises_as_the_drive_approaches_a_mode() {
    let model = common::model(common::GRAPH5);
    let s = &model.spectrum;
    let gamma = 0.02;
    let node = 1;
    let mode = s.omegas[1];
    let sim = Simulator::new(&model.graph, model.masses()).unwrap();
    let peak = resonance_peak(mode, gamma).unwrap();
    let reference = mean_kinetic_energy(s, model.masses(), &Stimulus::new(node, 1.0, peak, gamma).unwrap(), node).unwrap();

    let scores: Vec<f64> = [0.15, 0.08, 0.04]
        .iter()
        .map(|detuning| {
            let omega = mode - detuning;
            let stim = Stimulus::new(node, 1.0, omega, gamma).unwrap();
            let mut config = SimConfig::new(stim, 2e-3, 400.0);
            config.omega_max = Some(s.omega_max());
            let run = sim.run(&config).unwrap();
            let report = detect_beats(
                &run.kinetic_ma[node],
                run.ma_times(),
                &BeatConfig::default().with_drive(omega),
            )
            .unwrap();
            assert!(report.detected, "no beats at detuning {detuning}");
            omen_score(&report, reference)
        })
        .collect();
    assert!(scores.windows(2).all(|w| w[0] < w[1]), "{scores:?}");
}

//! Integrate the driven network from rest and watch the smoothed kinetic
//! energy settle onto the analytic stationary value.
//!
//! `cargo run --release --example simulate`

use netres::analytic::mean_kinetic_energy;
use netres::simulator::{SimConfig, Simulator};
use netres::{NetworkModel, Stimulus};

fn main() -> netres::Result<()> {
    let model = NetworkModel::parse(include_str!("../data/graph5.txt"))?;
    let stim = Stimulus::new(1, 1.0, 1.5, 0.05)?;
    let mut config = SimConfig::new(stim, 1e-3, 400.0);
    config.omega_max = Some(model.spectrum.omega_max());

    let run = Simulator::new(&model.graph, model.masses())?.run(&config)?;

    println!("stability: {:?}", run.stability);
    for i in 0..run.n() {
        let settled = run.kinetic_ma[i].last().copied().unwrap_or(f64::NAN);
        let expected = mean_kinetic_energy(&model.spectrum, model.masses(), &stim, i)?;
        println!("node {i}: simulated {settled:.4e}  analytic {expected:.4e}");
    }
    Ok(())
}

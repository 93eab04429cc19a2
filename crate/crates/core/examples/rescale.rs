//! Scale every link weight so a mode lands on the driving frequency, then
//! compare the driven node's energy before and after.
//!
//! `cargo run --example rescale`

use netres::analytic::oscillation_energies;
use netres::flaming::{plan_rescale, rescale_network};
use netres::{NetworkModel, Stimulus};

fn main() -> netres::Result<()> {
    let model = NetworkModel::parse(include_str!("../data/graph4.txt"))?;
    let omega = 2.0;
    let plan = plan_rescale(&model.spectrum, omega)?;
    println!(
        "mode {} at {:.4} moves to {omega}: weights x{:.4}",
        plan.nu, plan.omega_nu, plan.weight_factor
    );

    let tuned = NetworkModel::new(rescale_network(&model.graph, &plan)?)?;
    println!("omegas before: {:.4?}", model.spectrum.omegas);
    println!("omegas after:  {:.4?}", tuned.spectrum.omegas);

    let stim = Stimulus::new(0, 1.0, omega, 0.02)?;
    let before = oscillation_energies(&model.spectrum, model.masses(), &stim)?;
    let after = oscillation_energies(&tuned.spectrum, tuned.masses(), &stim)?;
    for (i, (b, a)) in before.iter().zip(&after).enumerate() {
        println!("node {i}: {b:.3e} -> {a:.3e}");
    }
    Ok(())
}

//! Masses and oscillation modes of a directed network.
//!
//! `cargo run --example spectrum [graph.txt]`

use netres::NetworkModel;

fn main() -> netres::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => include_str!("../data/graph4.txt").to_owned(),
    };
    let model = NetworkModel::parse(&text)?;
    let s = &model.spectrum;

    println!("node masses: {:.4?}", model.masses().as_slice());
    println!("symmetry residual: {:.2e}", model.symmetrization.asymmetry);
    for mu in 0..s.n() {
        let v: Vec<f64> = s.vector(mu).iter().copied().collect();
        println!("mode {mu}: omega = {:.4}  v = {v:+.3?}", s.omegas[mu]);
    }
    Ok(())
}

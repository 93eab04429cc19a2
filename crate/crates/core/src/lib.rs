//! Resonance analysis of forced, damped oscillations on weighted directed
//! networks.
//!
//! A symmetrizable digraph is turned into a symmetric scaled Laplacian whose
//! eigenpairs give the network's oscillation modes. From there the crate
//! computes stationary responses and node energies under a periodic stimulus,
//! rescales link weights to put a mode on resonance, integrates the dynamics
//! in time and looks for low-frequency beats in the kinetic energy.
//!
//! ```
//! use netres::{NetworkModel, Stimulus, analytic};
//!
//! let model = NetworkModel::parse("2\n0 1 1.0\n1 0 1.0\n").unwrap();
//! assert!((model.spectrum.omegas[1] - 2f64.sqrt()).abs() < 1e-12);
//!
//! let stim = Stimulus::new(0, 1.0, 1.2, 0.02).unwrap();
//! let e = analytic::oscillation_energies(&model.spectrum, model.masses(), &stim).unwrap();
//! assert!(e.iter().all(|&x| x > 0.0));
//! ```

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod beats;
pub mod cli;
pub mod error;
pub mod flaming;
pub mod graph;
pub mod model;
pub mod simulator;
pub mod spectral;

pub use analytic::Stimulus;
pub use error::{Error, ErrorClass, Result};
pub use graph::{WeightedDigraph, Tolerances};
pub use model::NetworkModel;
pub use spectral::Spectrum;

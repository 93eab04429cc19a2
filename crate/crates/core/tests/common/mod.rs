//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use nalgebra::DVector;
use netres::graph::{laplacian, Edge};
use netres::{NetworkModel, WeightedDigraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRAPH4: &str = include_str!("../../data/graph4.txt");
pub const GRAPH5: &str = include_str!("../../data/graph5.txt");
pub const CHAIN2: &str = include_str!("../../data/chain2.txt");

pub fn model(text: &str) -> NetworkModel {
    NetworkModel::parse(text).expect("bundled graph")
}

/// A connected symmetrizable digraph on `n` nodes.
///
/// Masses are drawn from [1, 2] and symmetric conductances from [1, 3];
/// `w_ij = s_ij / m_i` then lands in [0.5, 3] and balances by construction.
pub fn random_symmetrizable(rng: &mut impl Rng, n: usize) -> WeightedDigraph {
    let mass: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=2.0)).collect();
    let mut pairs = Vec::new();
    // random spanning tree keeps the graph connected
    for i in 1..n {
        pairs.push((rng.gen_range(0..i), i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !pairs.contains(&(i, j)) && rng.gen_bool(0.35) {
                pairs.push((i, j));
            }
        }
    }
    let mut edges = Vec::with_capacity(2 * pairs.len());
    for (i, j) in pairs {
        let s = rng.gen_range(1.0..=3.0);
        edges.push(Edge { from: i, to: j, weight: s / mass[i] });
        edges.push(Edge { from: j, to: i, weight: s / mass[j] });
    }
    WeightedDigraph::new(n, edges).expect("valid random graph")
}

pub fn random_graphs(seed: u64, count: usize, max_n: usize) -> Vec<WeightedDigraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=max_n);
            random_symmetrizable(&mut rng, n)
        })
        .collect()
}

/// Eigenvalues of the raw (asymmetric) Laplacian via a general Schur
/// decomposition, sorted by real part.
pub fn nonsymmetric_eigenvalues(g: &WeightedDigraph) -> Vec<(f64, f64)> {
    let l = laplacian(g).matrix;
    let mut eig: Vec<(f64, f64)> = l
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    eig.sort_by(|a, b| a.0.total_cmp(&b.0));
    eig
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

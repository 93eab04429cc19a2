//! Invariants checked over random symmetrizable graphs.

mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netres::analytic::{
    modal_amplitude, mean_kinetic_energy, oscillation_energies, stationary_state, Stimulus,
};
use netres::beats::{beat_approximation, omen_score, transient_modal_solution, BeatReport};
use netres::flaming::{plan_rescale, rescale_network};
use netres::graph::{
    laplacian, left_null_vector, parse_graph, scaled_laplacian, Edge, Tolerances,
};
use netres::simulator::moving_average;
use netres::{NetworkModel, Spectrum, WeightedDigraph};

fn graph(seed: u64, max_n: usize) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rand::Rng::gen_range(&mut rng, 2..=max_n);
    common::random_symmetrizable(&mut rng, n)
}

fn model(seed: u64, max_n: usize) -> NetworkModel {
    NetworkModel::new(graph(seed, max_n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_rows_sum_to_zero(seed in any::<u64>()) {
        let l = laplacian(&graph(seed, 8));
        for i in 0..l.n() {
            prop_assert!(l.matrix.row(i).sum().abs() <= 1e-12);
        }
    }

    #[test]
    fn masses_are_a_positive_left_null_vector(seed in any::<u64>()) {
        let g = graph(seed, 8);
        let l = laplacian(&g);
        let m = left_null_vector(&l).unwrap();
        prop_assert!(m.iter().all(|&x| x > 0.0));
        prop_assert!((m.sum() - g.n() as f64).abs() < 1e-9);
        let residual = l.matrix.transpose() * &m;
        prop_assert!(residual.amax() <= 1e-9 * l.inf_norm() * m.amax().max(1.0));
    }

    #[test]
    fn scaled_laplacian_is_symmetric_and_scale_free(seed in any::<u64>(), k in 0.01f64..100.0) {
        let g = graph(seed, 8);
        let l = laplacian(&g);
        let m = left_null_vector(&l).unwrap();
        let a = scaled_laplacian(&l, &m).unwrap();
        let b = scaled_laplacian(&l, &(&m * k)).unwrap();
        prop_assert!(a.asymmetry <= 1e-9 * l.inf_norm());
        prop_assert!((&a.s0 - &b.s0).amax() <= 1e-12 * l.inf_norm());
        prop_assert!((&a.m - &b.m).amax() <= 1e-12);
    }

    #[test]
    fn undirected_graphs_have_unit_masses(seed in any::<u64>()) {
        let g = graph(seed, 8);
        let undirected = WeightedDigraph::new(
            g.n(),
            g.edges()
                .iter()
                .map(|e| Edge { weight: g.weight(e.from.min(e.to), e.from.max(e.to)).unwrap(), ..*e })
                .collect(),
        )
        .unwrap();
        let model = NetworkModel::new(undirected).unwrap();
        prop_assert!(model.masses().iter().all(|&x| x == 1.0));
        prop_assert_eq!(&model.symmetrization.s0, &model.laplacian.matrix);
    }

    #[test]
    fn edge_list_round_trips(seed in any::<u64>()) {
        let g = graph(seed, 8);
        prop_assert_eq!(parse_graph(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn spectrum_is_an_orthonormal_decomposition(seed in any::<u64>()) {
        let model = model(seed, 8);
        let s = &model.spectrum;
        prop_assert_eq!(s.lambdas[0], 0.0);
        prop_assert!(s.lambdas.windows(2).all(|w| w[0] <= w[1]));
        let gram = s.vectors.transpose() * &s.vectors;
        prop_assert!((gram - DMatrix::identity(s.n(), s.n())).amax() < 1e-10);
        prop_assert!((s.reconstruct() - &model.symmetrization.s0).amax() < 1e-8);
        for mu in 0..s.n() {
            let first = s.vector(mu).iter().copied().find(|x| x.abs() > 1e-12).unwrap();
            prop_assert!(first > 0.0);
        }
    }

    #[test]
    fn spectrum_matches_the_asymmetric_laplacian(seed in any::<u64>()) {
        let model = model(seed, 8);
        let oracle = common::nonsymmetric_eigenvalues(&model.graph);
        for (lambda, (re, im)) in model.spectrum.lambdas.iter().zip(&oracle) {
            prop_assert!((lambda - re).abs() < 1e-7);
            prop_assert!(im.abs() < 1e-7);
        }
    }

    #[test]
    fn energies_are_nonnegative_and_quadratic_in_amplitude(
        seed in any::<u64>(),
        omega in 0.05f64..4.0,
        gamma in 0.005f64..0.5,
        amplitude in 0.1f64..10.0,
    ) {
        let model = model(seed, 8);
        let stim = Stimulus::new(0, 1.0, omega, gamma).unwrap();
        let unit = oscillation_energies(&model.spectrum, model.masses(), &stim).unwrap();
        let scaled = oscillation_energies(
            &model.spectrum,
            model.masses(),
            &Stimulus { amplitude, ..stim },
        )
        .unwrap();
        for (u, s) in unit.iter().zip(&scaled) {
            prop_assert!(*u >= 0.0);
            prop_assert!((s - amplitude * amplitude * u).abs() <= 1e-9 * s.abs().max(1e-300));
        }
    }

    #[test]
    fn energy_equals_the_modal_sum(seed in any::<u64>(), omega in 0.05f64..4.0, gamma in 0.005f64..0.5) {
        let model = model(seed, 6);
        let s = &model.spectrum;
        let stim = Stimulus::new(0, 1.0, omega, gamma).unwrap();
        let energies = oscillation_energies(s, model.masses(), &stim).unwrap();
        for (i, e) in energies.iter().enumerate() {
            let modal: f64 = (0..s.n())
                .map(|mu| {
                    let a = modal_amplitude(s, model.masses(), &stim, mu).unwrap();
                    0.5 * omega * omega * a * a * s.component(mu, i).powi(2)
                })
                .sum();
            prop_assert!((e - modal).abs() <= 1e-9 * modal.max(1e-300));
        }
    }

    #[test]
    fn stationary_state_solves_the_equations_of_motion(
        seed in any::<u64>(),
        omega in 0.05f64..4.0,
        gamma in 0.005f64..0.5,
        t in 0.0f64..50.0,
    ) {
        let model = model(seed, 6);
        let m = model.masses();
        let stim = Stimulus::new(0, 1.0, omega, gamma).unwrap();
        let h = 1e-4;
        let (x, v) = stationary_state(&model.spectrum, m, &stim, t).unwrap();
        let (_, v_next) = stationary_state(&model.spectrum, m, &stim, t + h).unwrap();
        let (_, v_prev) = stationary_state(&model.spectrum, m, &stim, t - h).unwrap();
        let accel = (v_next - v_prev) / (2.0 * h);
        let mut force = -(&model.laplacian.matrix * &x) - &v * gamma;
        force[0] += (omega * t).cos();
        let scale = accel.amax().max(force.amax()).max(1.0);
        prop_assert!((accel - force).amax() <= 1e-5 * scale);
    }

    #[test]
    fn energy_ratios_ignore_mass_scale(seed in any::<u64>(), k in 0.01f64..100.0, omega in 0.1f64..3.0) {
        let g = graph(seed, 6);
        let l = laplacian(&g);
        let m = left_null_vector(&l).unwrap();
        let stim = Stimulus::new(0, 1.0, omega, 0.05).unwrap();
        let energies = |masses: &DVector<f64>| {
            let sym = scaled_laplacian(&l, masses).unwrap();
            let spec = netres::spectral::eigendecompose(&sym).unwrap();
            oscillation_energies(&spec, &sym.m, &stim).unwrap()
        };
        let a = energies(&m);
        let b = energies(&(&m * k));
        for i in 1..a.len() {
            prop_assert!((a[i] / a[0] - b[i] / b[0]).abs() <= 1e-8 * (a[i] / a[0]).max(1.0));
        }
    }

    #[test]
    fn rescale_preserves_masses_and_scales_eigenvalues(seed in any::<u64>(), stretch in 1.0f64..3.0) {
        let model = model(seed, 8);
        let s = &model.spectrum;
        let omega = stretch * s.omegas[1];
        let plan = plan_rescale(s, omega).unwrap();
        let moved = NetworkModel::new(rescale_network(&model.graph, &plan).unwrap()).unwrap();
        prop_assert!((moved.masses() - model.masses()).amax() <= 1e-10);
        prop_assert!((moved.spectrum.omegas[plan.nu] - omega).abs() <= 1e-9 * omega);
        for (a, b) in s.lambdas.iter().zip(&moved.spectrum.lambdas) {
            prop_assert!((b - plan.weight_factor * a).abs() <= 1e-9 * b.max(1.0));
        }
    }

    /// Holds when the drive starts outside every resonance band and the
    /// driven node is the one most active in the target mode; a drive already
    /// sitting near another mode can lose energy when that mode moves away.
    #[test]
    fn rescale_raises_the_driven_node_energy(seed in any::<u64>(), stretch in 1.0f64..3.0, gamma in 0.005f64..0.05) {
        let model = model(seed, 8);
        let s = &model.spectrum;
        let omega = stretch * s.omegas[1];
        prop_assume!(s.omegas[1..].iter().all(|w| (w - omega).abs() > 5.0 * gamma));
        let plan = plan_rescale(s, omega).unwrap();
        let j = (0..s.n())
            .max_by(|&a, &b| s.component(plan.nu, a).abs().total_cmp(&s.component(plan.nu, b).abs()))
            .unwrap();
        let moved = NetworkModel::new(rescale_network(&model.graph, &plan).unwrap()).unwrap();
        let stim = Stimulus::new(j, 1.0, omega, gamma).unwrap();
        let before = oscillation_energies(s, model.masses(), &stim).unwrap()[j];
        let after = oscillation_energies(&moved.spectrum, moved.masses(), &stim).unwrap()[j];
        prop_assert!(after >= before * (1.0 - 1e-12), "before {before}, after {after}");
    }

    #[test]
    fn moving_average_of_a_constant_is_constant(value in -1e3f64..1e3, len in 1usize..200, window in 1usize..200) {
        let series = vec![value; len];
        match moving_average(&series, window) {
            Ok(out) => {
                prop_assert_eq!(out.len(), len - window + 1);
                prop_assert!(out.iter().all(|x| (x - value).abs() <= 1e-9 * value.abs().max(1.0)));
            }
            Err(_) => prop_assert!(window > len),
        }
    }

    #[test]
    fn product_form_error_is_bounded_by_the_decay(
        seed in any::<u64>(),
        detuning in -0.2f64..0.2,
        gamma in 0.001f64..0.1,
        t in 0.0f64..200.0,
    ) {
        let model = model(seed, 6);
        let s = &model.spectrum;
        let omega = (s.omegas[1] + detuning).max(0.01);
        let stim = Stimulus::new(0, 1.0, omega, gamma).unwrap();
        let a = modal_amplitude(s, model.masses(), &stim, 1).unwrap().abs();
        let exact = transient_modal_solution(s, model.masses(), &stim, 1, t).unwrap();
        let approx = beat_approximation(s, model.masses(), &stim, 1, t).unwrap();
        let bound = 0.5 * gamma * t + (1.0 - (-0.5 * gamma * t).exp());
        prop_assert!((exact - approx).abs() <= a * bound + 1e-12 * a.max(1.0));
        prop_assert_eq!(transient_modal_solution(s, model.masses(), &stim, 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn omen_score_is_bounded(
        detected in any::<bool>(),
        envelope in 0.0f64..10.0,
        level in -1.0f64..1e6,
        cutoff in proptest::option::of(0.0f64..10.0),
        reference in -1.0f64..1e6,
    ) {
        let report = BeatReport {
            detected,
            envelope_frequency: envelope,
            predicted_frequency: None,
            predicted_mode: None,
            envelope_minima_times: vec![],
            spacing_cv: 0.0,
            amplitude_growth: 1.0,
            converged_level: level,
            drive_omega: None,
            frequency_cutoff: cutoff,
        };
        let score = omen_score(&report, reference);
        prop_assert!((0.0..=1.0).contains(&score));
        if !detected {
            prop_assert_eq!(score, 0.0);
        }
    }
}

/// Energies do not depend on which orthonormal basis spans a degenerate
/// eigenspace.
#[test]
fn energies_are_basis_invariant_within_degenerate_modes() {
    let k4 = parse_graph(
        "4\n0 1 1\n1 0 1\n0 2 1\n2 0 1\n0 3 1\n3 0 1\n1 2 1\n2 1 1\n1 3 1\n3 1 1\n2 3 1\n3 2 1\n",
    )
    .unwrap();
    let model = NetworkModel::new(k4).unwrap();
    let s = &model.spectrum;
    // modes 1..4 share lambda = 4
    assert!((s.lambdas[1] - 4.0).abs() < 1e-12 && (s.lambdas[3] - 4.0).abs() < 1e-12);
    let stim = Stimulus::new(0, 1.0, 1.7, 0.05).unwrap();
    let base = oscillation_energies(s, model.masses(), &stim).unwrap();
    let base_kinetic: Vec<f64> = (0..4)
        .map(|i| mean_kinetic_energy(s, model.masses(), &stim, i).unwrap())
        .collect();
    for angle in [0.3, 1.1, 2.9] {
        let (c, sn) = (f64::cos(angle), f64::sin(angle));
        let mut vectors = s.vectors.clone();
        let (v1, v2) = (s.vector(1), s.vector(2));
        vectors.set_column(1, &(&v1 * c + &v2 * sn));
        vectors.set_column(2, &(&v2 * c - &v1 * sn));
        let rotated = Spectrum { vectors, ..s.clone() };
        let e = oscillation_energies(&rotated, model.masses(), &stim).unwrap();
        for i in 0..4 {
            assert!((e[i] - base[i]).abs() < 1e-12 * base[i].max(1.0));
            let k = mean_kinetic_energy(&rotated, model.masses(), &stim, i).unwrap();
            assert!((k - base_kinetic[i]).abs() < 1e-12 * base_kinetic[i].max(1.0));
        }
    }
}

#[test]
fn default_tolerances_are_tight() {
    let tol = Tolerances::default();
    assert!(tol.symmetry <= 1e-9 && tol.null_vector <= 1e-9 && tol.row_sum <= 1e-12);
}

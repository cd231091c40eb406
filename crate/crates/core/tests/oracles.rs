//! Cross-checks against independent reference computations.

use esn_logic::readout::{RegressionProblem, SignMode};
use esn_logic::reservoir::{build_network, spectral_radius, Network, NetworkConfig, Transfer, WeightPattern};
use esn_logic::tasks::{generate_streams, TaskKind, TaskSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{brute_force_ridge, schur_radius};

#[test]
fn ridge_matches_explicit_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let cols = rng.random_range(1..8);
        let rows = rng.random_range(cols + 2..40);
        let outs = rng.random_range(1..4);
        let x = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(rows, outs, |_, _| f64::from(rng.random_bool(0.5) as u8));
        let gamma = rng.random_range(0.0..0.5);
        for (mode, sign) in [(SignMode::StandardRidge, 1.0), (SignMode::PaperExact, -1.0)] {
            let problem = RegressionProblem {
                design: x.clone(),
                targets: y.clone(),
                gamma,
                sign_mode: mode,
            };
            let Ok(w) = problem.solve() else {
                assert_eq!(mode, SignMode::PaperExact, "standard ridge failed on case {case}");
                continue;
            };
            let oracle = brute_force_ridge(&x, &y, gamma, sign);
            let scale = oracle.iter().flatten().fold(1e-300_f64, |a, v| a.max(v.abs()));
            for i in 0..cols {
                for o in 0..outs {
                    let err = (w[(i, o)] - oracle[i][o]).abs() / scale;
                    assert!(err < 1e-8, "case {case} {mode:?}: {} vs {}", w[(i, o)], oracle[i][o]);
                }
            }
        }
    }
}

#[test]
fn spectral_radius_matches_schur() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let n = rng.random_range(10..60);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let est = spectral_radius(&m);
        assert!(est.converged);
        let exact = schur_radius(&m);
        assert!((est.radius - exact).abs() <= 1e-8 * exact, "{} vs {exact}", est.radius);
    }
}

#[test]
fn built_reservoirs_hit_target_radius() {
    for pattern in [WeightPattern::Identical, WeightPattern::Uniform, WeightPattern::Normal] {
        for (seed, lambda) in [(1, 0.1), (2, 0.5), (3, 0.9)] {
            let net = build_network(&NetworkConfig {
                weight_pattern: pattern,
                spectral_radius: lambda,
                reservoir_density: 0.3,
                seed,
                ..NetworkConfig::default()
            })
            .unwrap();
            let radius = schur_radius(net.w_res());
            assert!((radius - lambda).abs() < 1e-6, "{pattern:?}: {radius} vs {lambda}");
        }
    }
}

/// Two nodes, one input, identity gains, stepped by hand.
#[test]
fn hand_computed_trajectory() {
    let config = NetworkConfig {
        nodes: 2,
        n_inputs: 1,
        ..NetworkConfig::default()
    };
    let w_in = DMatrix::from_column_slice(2, 1, &[0.8, -0.3]);
    let w_res = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 2.0, 0.0]);
    let mut net = Network::from_parts(config, w_in, w_res, DVector::from_element(2, 1.0), vec![true; 2]).unwrap();
    let traj = net.run(&[[1.0], [1.0], [0.0]], 0).unwrap();
    // x1 = clamp(0.8, -0.3)
    // x2 = clamp(0.5 * -0.3 + 0.8, 2 * 0.8 - 0.3) = (0.65, 1.3 -> 1)
    // x3 = clamp(0.5 * 1, 2 * 0.65) = (0.5, 1.3 -> 1)
    let expected = [[0.8, -0.3], [0.65, 1.0], [0.5, 1.0]];
    for (r, row) in expected.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            assert!((traj.rows[(r, i)] - v).abs() < 1e-15);
        }
        assert_eq!(traj.rows[(r, 2)], 1.0);
    }

    let mut tanh = net.clone();
    let cfg = NetworkConfig {
        transfer: Transfer::Tanh,
        ..tanh.config().clone()
    };
    tanh = Network::from_parts(cfg, tanh.w_in().clone(), tanh.w_res().clone(), tanh.gains().clone(), vec![true; 2])
        .unwrap();
    let traj = tanh.run(&[[1.0], [1.0]], 0).unwrap();
    let x1 = [0.8_f64.tanh(), (-0.3_f64).tanh()];
    let x2 = [(0.5 * x1[1] + 0.8).tanh(), (2.0 * x1[0] - 0.3).tanh()];
    for i in 0..2 {
        assert!((traj.rows[(0, i)] - x1[i]).abs() < 1e-15);
        assert!((traj.rows[(1, i)] - x2[i]).abs() < 1e-15);
    }
}

#[test]
fn echo_state_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..5 {
        let mut a = build_network(&NetworkConfig { seed, ..NetworkConfig::default() }).unwrap();
        let mut b = a.clone();
        let x0: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y0: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        a.set_state(&x0).unwrap();
        b.set_state(&y0).unwrap();
        for _ in 0..30 {
            let u = [f64::from(rng.random_bool(0.5) as u8), f64::from(rng.random_bool(0.5) as u8)];
            a.step(&u, None);
            b.step(&u, None);
        }
        assert!((a.state() - b.state()).norm() < 1e-9);
    }
}

#[test]
fn truth_tables_by_arithmetic() {
    for code in 0u8..16 {
        let row: Vec<u8> = (0..4).map(|i| (code >> i) & 1).collect();
        let (a, b) = (row[0] + 2 * row[1], row[2] + 2 * row[3]);
        let decode = |bits: &[u8]| bits.iter().enumerate().map(|(i, &v)| v << i).sum::<u8>();
        assert_eq!(decode(&TaskKind::Adder2.evaluate(&row)), a + b);
        assert_eq!(decode(&TaskKind::Multiplier2.evaluate(&row)), a * b);
        let ones = row.iter().filter(|&&v| v == 1).count();
        assert_eq!(TaskKind::Xor.evaluate(&row), vec![(ones % 2) as u8]);
        assert_eq!(TaskKind::Nand.evaluate(&row), vec![u8::from(ones != 4)]);
        assert_eq!(TaskKind::Nor.evaluate(&row), vec![u8::from(ones == 0)]);
    }
}

#[test]
fn stream_bit_frequency() {
    let s = generate_streams(&TaskSpec::new(TaskKind::And, 4, 20_000, 5).unwrap()).unwrap();
    // 80000 fair bits: standard error 0.0018
    assert!((s.inputs.mean() - 0.5).abs() < 0.01);
    // P[AND of 4] = 1/16, standard error 0.0017
    assert!((s.targets.mean() - 1.0 / 16.0).abs() < 0.01);
}

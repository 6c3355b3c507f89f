use fasep_core::she::{
    moment_estimate, sample_noise_stream, solve_ensemble, solve_mild_with, IcKind, NoiseGrid, SheGrid, SolveOptions,
};
use fasep_core::stats::{covariance, ks_test, Accumulator};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn small_grid(horizon: f64) -> SheGrid {
    SheGrid::for_target(1e-3, 0.05, horizon, 1.0).unwrap()
}

#[test]
fn noise_is_white_with_cell_variance() {
    let g = SheGrid::new(1e-3, 0.05, 0.2, 3.0).unwrap();
    let xi = sample_noise_stream(g, 21, 3).unwrap();
    let norm: Vec<f64> = xi.values.iter().map(|v| v * (g.dt * g.dx).sqrt()).collect();
    let a = Accumulator::from_slice(&norm);
    let n = norm.len() as f64;
    assert!(a.mean().abs() < 4.0 / n.sqrt());
    assert!((a.variance() - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    let std = Normal::standard();
    assert!(ks_test(&norm, |x| std.cdf(x)).unwrap().p_value > 1e-3);
    let w = g.interior();
    let space_lag = covariance(&norm[..norm.len() - 1], &norm[1..]);
    let time_lag = covariance(&norm[..norm.len() - w], &norm[w..]);
    assert!(space_lag.abs() < 4.0 / n.sqrt(), "{space_lag}");
    assert!(time_lag.abs() < 4.0 / n.sqrt(), "{time_lag}");
}

#[test]
fn boundary_node_is_pinned() {
    let g = small_grid(0.2);
    let opts = SolveOptions { snapshots: vec![0.05, 0.1, 0.15], ..Default::default() };
    for ic in [IcKind::DeltaPrime, IcKind::near_eq(|u| (-u).exp())] {
        let s = solve_mild_with(&ic, &sample_noise_stream(g, 5, 0).unwrap(), &opts).unwrap();
        assert!(s.values.iter().all(|row| row[0] == 0.0));
    }
}

#[test]
fn variance_scales_with_gamma_squared() {
    let g = small_grid(0.2);
    let var_at = |gamma: f64| {
        let opts = SolveOptions { gamma, ..Default::default() };
        let ens = solve_ensemble(&IcKind::DeltaPrime, g, &opts, 13, 200).unwrap();
        let v: Vec<f64> = ens.iter().map(|s| s.value(0.2, 0.5).unwrap()).collect();
        Accumulator::from_slice(&v).variance()
    };
    let (a, b) = (var_at(0.1), var_at(0.05));
    assert!((a / b / 4.0 - 1.0).abs() < 0.02, "{a} / {b}");
    let c = var_at(0.0);
    assert_eq!(c, 0.0);
}

#[test]
fn restart_matches_single_solve_in_first_two_moments() {
    let (dt, dx) = (4e-4, 0.02);
    let u_max = SheGrid::for_target(dt, dx, 0.2, 1.0).unwrap().u_max;
    let whole = SheGrid::new(dt, dx, 0.2, u_max).unwrap();
    let half = SheGrid::new(dt, dx, 0.1, u_max).unwrap();
    let n = 400;
    let opts = SolveOptions::default();
    let direct = solve_ensemble(&IcKind::DeltaPrime, whole, &opts, 31, n).unwrap();
    let first = solve_ensemble(&IcKind::DeltaPrime, half, &opts, 32, n).unwrap();
    let restarted: Vec<_> = first
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ic = IcKind::Sampled(s.snapshot(0.1).unwrap().to_vec());
            solve_mild_with(&ic, &sample_noise_stream(half, 33, i as u64).unwrap(), &opts).unwrap()
        })
        .collect();
    for u in [0.3, 0.6] {
        for order in [1, 2] {
            let a = moment_estimate(&direct, 0.2, u, order).unwrap();
            let b = moment_estimate(&restarted, 0.1, u, order).unwrap();
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            assert!((a.estimate - b.estimate).abs() <= 3.0 * se, "u={u} order={order}: {a:?} vs {b:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_in_initial_data(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..3.0, seed in any::<u64>()) {
        let g = small_grid(0.1);
        let xi = sample_noise_stream(g, seed, 0).unwrap();
        let opts = SolveOptions::default();
        let g1 = move |u: f64| (-k * u).exp();
        let g2 = |u: f64| u * (-u * u).exp();
        let s1 = solve_mild_with(&IcKind::near_eq(g1), &xi, &opts).unwrap();
        let s2 = solve_mild_with(&IcKind::near_eq(g2), &xi, &opts).unwrap();
        let s = solve_mild_with(&IcKind::near_eq(move |u| a * g1(u) + b * g2(u)), &xi, &opts).unwrap();
        let last = s.values.len() - 1;
        for j in 0..s.space.len() {
            let lin = a * s1.values[last][j] + b * s2.values[last][j];
            let scale = 1.0 + a.abs() * s1.values[last][j].abs() + b.abs() * s2.values[last][j].abs();
            prop_assert!((s.values[last][j] - lin).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn zero_noise_grid_gives_deterministic_flow(seed in any::<u64>()) {
        let g = small_grid(0.1);
        let opts = SolveOptions::default();
        let z = solve_mild_with(&IcKind::DeltaPrime, &NoiseGrid::zeros(g).unwrap(), &opts).unwrap();
        let q = solve_mild_with(&IcKind::DeltaPrime, &sample_noise_stream(g, seed, 0).unwrap().scaled(0.0), &opts).unwrap();
        prop_assert_eq!(z.values, q.values);
    }
}

mod common;

use glidesim::montecarlo::{cep, run_batch, run_batch_results, sample_run, DispersionSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn sampled_dispersions_have_requested_moments() {
    let base = common::nominal();
    let spec = DispersionSpec {
        target_offset_sigma: 50.0,
        ..DispersionSpec::default()
    };
    let n = 10_000;
    let draws: Vec<_> = (0..n).map(|i| sample_run(11, i, &base, &spec)).collect();
    let check = |name: &str, xs: Vec<f64>, mean: f64, sigma: f64| {
        let (m, s) = mean_std(&xs);
        let se = sigma / (n as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * se, "{name} mean {m}, expected {mean}");
        assert!((s / sigma - 1.0).abs() < 0.05, "{name} std {s}, expected {sigma}");
    };
    check("speed", draws.iter().map(|s| s.perturbation.speed_factor).collect(), 1.0, 0.01);
    check(
        "fpa",
        draws.iter().map(|s| s.perturbation.flight_path_offset).collect(),
        0.0,
        spec.entry_fpa_sigma,
    );
    check("downrange", draws.iter().map(|s| s.perturbation.downrange_offset).collect(), 0.0, 1000.0);
    check("crossrange", draws.iter().map(|s| s.perturbation.crossrange_offset).collect(), 0.0, 1000.0);
    check(
        "log density",
        draws.iter().map(|s| s.environment.density_multiplier.ln()).collect(),
        0.0,
        0.05,
    );
    check(
        "target",
        draws.iter().map(|s| s.target.downrange - base.target.downrange).collect(),
        0.0,
        50.0,
    );
}

#[test]
fn cep_of_circular_gaussian() {
    let sigma = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let misses: Vec<f64> = (0..10_000)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            sigma * x.hypot(y)
        })
        .collect();
    let cep50 = cep(&misses, 0.5).unwrap();
    let expected = sigma * (2.0 * 2f64.ln()).sqrt();
    assert!((cep50 - expected).abs() <= 0.5, "{cep50} vs {expected}");
    let cep90 = cep(&misses, 0.9).unwrap();
    let expected90 = sigma * (2.0 * 10f64.ln()).sqrt();
    assert!((cep90 - expected90).abs() <= 0.5, "{cep90} vs {expected90}");
}

proptest! {
    #[test]
    fn cep_is_monotone_and_bounded(
        misses in prop::collection::vec(0.0f64..1e6, 1..200),
        q1 in 0.01f64..0.99,
        q2 in 0.01f64..0.99,
    ) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let a = cep(&misses, lo).unwrap();
        let b = cep(&misses, hi).unwrap();
        prop_assert!(a <= b);
        let min = misses.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = misses.iter().cloned().fold(0.0, f64::max);
        prop_assert!(a >= min && b <= max);
    }
}

#[test]
fn campaign_is_independent_of_worker_count() {
    let s = common::nominal();
    let reference = run_batch_results(40, 99, &s, &s.dispersion, 1).unwrap();
    for workers in [4, 8] {
        let other = run_batch_results(40, 99, &s, &s.dispersion, workers).unwrap();
        assert_eq!(reference, other, "workers {workers}");
    }
    let a = run_batch(40, 99, &s, &s.dispersion, 1).unwrap();
    let b = run_batch(40, 99, &s, &s.dispersion, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn repeated_trajectories_are_identical() {
    let s = sample_run(5, 3, &common::nominal(), &common::nominal().dispersion);
    let a = s.fly().unwrap();
    let b = s.fly().unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.state.position, y.state.position);
        assert_eq!(x.state.velocity, y.state.velocity);
        assert_eq!(x.command, y.command);
    }
    assert_eq!(a.termination.miss_distance, b.termination.miss_distance);
}

#[test]
fn different_master_seeds_give_different_campaigns() {
    let s = common::nominal();
    let a = run_batch_results(5, 1, &s, &s.dispersion, 1).unwrap();
    let b = run_batch_results(5, 2, &s, &s.dispersion, 1).unwrap();
    assert_ne!(a, b);
}

//! Dispersion campaigns: per-run perturbed scenarios drawn from independent
//! seeded streams, parallel execution, and miss-distance statistics.
//!
//! Each run's random stream is a pure function of `(master_seed, run_index)`,
//! and aggregation happens in index order after all runs finish, so a report
//! does not depend on the number of workers or on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dynamics::{TerminationReason, Trajectory};
use crate::error::{Error, Result};
use crate::guidance::PhaseId;
use crate::scenario::{EntryGeometry, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSpec {
    /// Relative 1-sigma of the entry speed.
    pub entry_speed_sigma: f64,
    /// rad
    pub entry_fpa_sigma: f64,
    /// m, applied independently down- and cross-range.
    pub entry_position_sigma: f64,
    /// Log-normal sigma of the density multiplier.
    pub density_multiplier_sigma: f64,
    /// m, applied independently down- and cross-range.
    pub target_offset_sigma: f64,
}

impl Default for DispersionSpec {
    fn default() -> Self {
        DispersionSpec {
            entry_speed_sigma: 0.01,
            entry_fpa_sigma: 0.2f64.to_radians(),
            entry_position_sigma: 1000.0,
            density_multiplier_sigma: 0.05,
            target_offset_sigma: 0.0,
        }
    }
}

impl DispersionSpec {
    pub fn none() -> Self {
        DispersionSpec {
            entry_speed_sigma: 0.0,
            entry_fpa_sigma: 0.0,
            entry_position_sigma: 0.0,
            density_multiplier_sigma: 0.0,
            target_offset_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dispersion.entry_speed_sigma", self.entry_speed_sigma),
            ("dispersion.entry_fpa_sigma_deg", self.entry_fpa_sigma),
            ("dispersion.entry_position_sigma", self.entry_position_sigma),
            ("dispersion.density_multiplier_sigma", self.density_multiplier_sigma),
            ("dispersion.target_offset_sigma", self.target_offset_sigma),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, format!("must be a non-negative number, got {value}")));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-run seed derived from the campaign seed and the run index.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    mix(mix(master_seed) ^ run_index)
}

fn seeker_seed(run_seed: u64) -> u64 {
    mix(run_seed ^ 0x5EE4_E125_EED0_0001)
}

/// Perturbed copy of `base` for one run. Every draw is taken, in a fixed
/// order, even when its sigma is zero, so the stream layout never shifts.
pub fn sample_run(master_seed: u64, run_index: u64, base: &Scenario, spec: &DispersionSpec) -> Scenario {
    let seed = run_seed(master_seed, run_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };

    let speed = normal();
    let fpa = normal();
    let downrange = normal();
    let crossrange = normal();
    let density = normal();
    let target_downrange = normal();
    let target_crossrange = normal();

    let mut s = base.clone();
    s.perturbation.speed_factor *= 1.0 + spec.entry_speed_sigma * speed;
    s.perturbation.flight_path_offset += spec.entry_fpa_sigma * fpa;
    s.perturbation.downrange_offset += spec.entry_position_sigma * downrange;
    s.perturbation.crossrange_offset += spec.entry_position_sigma * crossrange;
    s.environment.density_multiplier *= (spec.density_multiplier_sigma * density).exp();
    s.target.downrange += spec.target_offset_sigma * target_downrange;
    s.target.crossrange += spec.target_offset_sigma * target_crossrange;
    s.seeker_seed = seeker_seed(seed);
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_index: u64,
    pub seed: u64,
    /// m
    pub miss_distance: f64,
    /// m/s
    pub impact_speed: f64,
    /// s
    pub flight_time: f64,
    /// m
    pub downrange: f64,
    pub reason: TerminationReason,
    /// Time into flight of each phase entry, in order.
    pub phase_times: Vec<(PhaseId, f64)>,
}

impl RunResult {
    pub fn from_trajectory(run_index: u64, seed: u64, trajectory: &Trajectory) -> Self {
        let t0 = trajectory.initial().t;
        let end = trajectory.final_state();
        RunResult {
            run_index,
            seed,
            miss_distance: trajectory.termination.miss_distance.unwrap_or(f64::NAN),
            impact_speed: end.speed(),
            flight_time: trajectory.flight_time(),
            downrange: trajectory.downrange(),
            reason: trajectory.termination.reason,
            phase_times: trajectory.transitions.iter().map(|t| (t.to, t.t - t0)).collect(),
        }
    }

    pub fn failed(&self) -> bool {
        self.reason.is_failure()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    /// Mean, sample standard deviation, and range, accumulated in input order.
    pub fn of(values: &[f64]) -> Option<SummaryStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(SummaryStats {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissStats {
    pub mean: f64,
    pub std: f64,
    pub cep50: f64,
    pub cep90: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub n_runs: usize,
    pub n_failures: usize,
    pub master_seed: u64,
    /// `None` when every run failed.
    pub miss: Option<MissStats>,
    pub impact_speed: Option<SummaryStats>,
    pub flight_time: Option<SummaryStats>,
    pub downrange: Option<SummaryStats>,
    /// Failure counts per reason, in a fixed reason order.
    pub failures_by_reason: Vec<(TerminationReason, usize)>,
}

impl CampaignReport {
    /// Aggregates results that are already in run-index order.
    pub fn from_results(master_seed: u64, results: &[RunResult]) -> CampaignReport {
        let ok: Vec<&RunResult> = results.iter().filter(|r| !r.failed()).collect();
        let misses: Vec<f64> = ok.iter().map(|r| r.miss_distance).collect();
        let pick = |f: fn(&RunResult) -> f64| SummaryStats::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        let miss = SummaryStats::of(&misses).map(|s| MissStats {
            mean: s.mean,
            std: s.std,
            cep50: cep(&misses, 0.5).expect("non-empty"),
            cep90: cep(&misses, 0.9).expect("non-empty"),
            max: s.max,
        });
        let failures_by_reason = [
            TerminationReason::Timeout,
            TerminationReason::SpeedFloor,
            TerminationReason::NumericalFailure,
        ]
        .into_iter()
        .map(|reason| (reason, results.iter().filter(|r| r.reason == reason).count()))
        .collect();
        CampaignReport {
            n_runs: results.len(),
            n_failures: results.len() - ok.len(),
            master_seed,
            miss,
            impact_speed: pick(|r| r.impact_speed),
            flight_time: pick(|r| r.flight_time),
            downrange: pick(|r| r.downrange),
            failures_by_reason,
        }
    }

    pub fn all_failed(&self) -> bool {
        self.n_failures == self.n_runs
    }
}

/// Empirical quantile of radial misses with linear interpolation between
/// order statistics (position `(n - 1) * quantile`).
pub fn cep(radial_misses: &[f64], quantile: f64) -> Result<f64> {
    if radial_misses.is_empty() {
        return Err(Error::domain("radial_misses.len", 0.0, "at least one miss"));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::domain("quantile", quantile, "0 < quantile < 1"));
    }
    let mut sorted = radial_misses.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * quantile;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Runs `run(i)` for `i in 0..n` on `workers` threads and returns the results
/// in index order.
pub fn run_indexed<F>(n: usize, workers: usize, run: F) -> Result<Vec<RunResult>>
where
    F: Fn(u64) -> RunResult + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parse {
            field: Some("workers".into()),
            line: None,
            message: e.to_string(),
        })?;
    Ok(pool.install(|| (0..n as u64).into_par_iter().map(&run).collect()))
}

/// Flies one dispersed run against a precomputed base entry geometry.
pub fn fly_run(
    master_seed: u64,
    run_index: u64,
    base: &Scenario,
    geometry: EntryGeometry,
    spec: &DispersionSpec,
) -> Result<RunResult> {
    let scenario = sample_run(master_seed, run_index, base, spec);
    let resolved = scenario.resolve_with(geometry)?;
    let trajectory = scenario.fly_resolved(&resolved, scenario.seeker_seed);
    Ok(RunResult::from_trajectory(
        run_index,
        run_seed(master_seed, run_index),
        &trajectory,
    ))
}

pub fn run_batch_results(
    n: usize,
    master_seed: u64,
    base: &Scenario,
    spec: &DispersionSpec,
    workers: usize,
) -> Result<Vec<RunResult>> {
    if n == 0 {
        return Err(Error::domain("runs", 0.0, "at least one run"));
    }
    let geometry = base.entry_geometry()?;
    run_indexed(n, workers, |i| {
        // resolve_with cannot fail once the base geometry exists
        fly_run(master_seed, i, base, geometry, spec).expect("resolved geometry")
    })
}

pub fn run_batch(
    n: usize,
    master_seed: u64,
    base: &Scenario,
    spec: &DispersionSpec,
    workers: usize,
) -> Result<CampaignReport> {
    let results = run_batch_results(n, master_seed, base, spec, workers)?;
    Ok(CampaignReport::from_results(master_seed, &results))
}

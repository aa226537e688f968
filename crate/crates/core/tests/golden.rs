mod common;

use std::fs;
use std::path::PathBuf;

use glidesim::dynamics::TerminationReason;
use glidesim::montecarlo::{run_batch_results, CampaignReport};
use glidesim::scenario::{
    read_trajectory_csv, write_report, write_summary, write_trajectory, RunSummary, TRAJECTORY_HEADER,
};

/// Set to regenerate the files under tests/fixtures/golden.
const BLESS_ENV: &str = "GLIDESIM_BLESS";

fn golden_path(name: &str) -> PathBuf {
    common::fixture_path("golden").join(name)
}

/// Compares two `key = value` or CSV texts cell by cell: text cells must match
/// exactly, numeric cells to a relative 1e-6 with a 1e-3 absolute floor so the
/// comparison survives last-bit differences in the platform math library.
fn assert_matches_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os(BLESS_ENV).is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with {BLESS_ENV}=1", path.display()));
    let exp_lines: Vec<&str> = expected.lines().collect();
    let act_lines: Vec<&str> = actual.lines().collect();
    assert_eq!(exp_lines.len(), act_lines.len(), "{name}: line count");
    for (n, (e, a)) in exp_lines.iter().zip(&act_lines).enumerate() {
        let cells = |s: &str| -> Vec<String> {
            s.split([',', '=']).map(|c| c.trim().to_string()).collect()
        };
        let (ec, ac) = (cells(e), cells(a));
        assert_eq!(ec.len(), ac.len(), "{name}:{}: `{e}` vs `{a}`", n + 1);
        for (x, y) in ec.iter().zip(&ac) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    let tol = (1e-6 * x.abs()).max(1e-3);
                    assert!((x - y).abs() <= tol, "{name}:{}: `{e}` vs `{a}`", n + 1);
                }
                _ => assert_eq!(x, y, "{name}:{}", n + 1),
            }
        }
    }
}

fn text(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn nominal_summary_matches_golden() {
    let traj = common::nominal().fly().unwrap();
    let summary = text(|b| write_summary(&RunSummary::of(&traj), b));
    assert_matches_golden("nominal_summary.txt", &summary);
}

#[test]
fn small_campaign_report_matches_golden() {
    let s = common::nominal();
    let results = run_batch_results(20, 7, &s, &s.dispersion, 2).unwrap();
    let report = text(|b| write_report(&CampaignReport::from_results(7, &results), b));
    assert_matches_golden("campaign_20_seed7_report.txt", &report);
}

#[test]
fn opening_seconds_of_trajectory_match_golden() {
    let mut s = common::nominal();
    s.integration.t_max = 2.0;
    let traj = s.fly().unwrap();
    assert_eq!(traj.termination.reason, TerminationReason::Timeout);
    let csv = text(|b| write_trajectory(&traj, b));
    assert_matches_golden("nominal_first_2s.csv", &csv);
}

#[test]
fn single_step_trajectory_has_two_rows() {
    let mut s = common::nominal();
    s.integration.t_max = s.integration.dt;
    let traj = s.fly().unwrap();
    let csv = text(|b| write_trajectory(&traj, b));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "{csv}");
    assert_eq!(lines[0], TRAJECTORY_HEADER);
    let rows = read_trajectory_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows[0].values[0], 0.0);
    assert!((rows[1].values[0] - s.integration.dt).abs() < 1e-12);
    assert_eq!(rows[0].phase, 1);
}

#[test]
fn trajectory_csv_round_trips() {
    let traj = common::nominal_quiet().fly().unwrap();
    let csv = text(|b| write_trajectory(&traj, b));
    let rows = read_trajectory_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), traj.samples.len());
    for (row, sample) in rows.iter().zip(&traj.samples) {
        let s = &sample.state;
        let exact = [
            s.t,
            s.position.x,
            s.position.y,
            s.position.z,
            sample.altitude,
            sample.speed,
            sample.mach,
            sample.dynamic_pressure,
            sample.command.cy_vertical,
            sample.command.cy_lateral,
            s.alpha,
        ];
        for (parsed, value) in row.values.iter().zip(exact) {
            assert!((parsed - value).abs() <= 5e-9 * value.abs(), "{parsed} vs {value}");
        }
        assert_eq!(row.phase, s.phase.number());
    }
}

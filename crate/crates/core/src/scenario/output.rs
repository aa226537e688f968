//! Output files: trajectory CSV, run summary, per-run table and campaign report.
//!
//! Every writer is deterministic: the same inputs give byte-identical files.

use std::io::{self, BufRead, Write};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::guidance::PhaseId;
use crate::montecarlo::{CampaignReport, RunResult, SummaryStats};

pub const TRAJECTORY_HEADER: &str =
    "t,x,y,z,altitude,speed,mach,dynamic_pressure,phase,cy_vertical,cy_lateral,alpha";

/// Scientific notation with 9 significant digits. Negative zero prints as zero.
pub fn format_sig(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.8e}")
}

pub fn write_trajectory<W: Write>(trajectory: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for row in &trajectory.samples {
        let s = &row.state;
        let c = &row.command;
        let fields = [
            s.t,
            s.position.x,
            s.position.y,
            s.position.z,
            row.altitude,
            row.speed,
            row.mach,
            row.dynamic_pressure,
        ]
        .map(format_sig)
        .join(",");
        writeln!(
            out,
            "{fields},{},{},{},{}",
            s.phase.number(),
            format_sig(c.cy_vertical),
            format_sig(c.cy_lateral),
            format_sig(s.alpha)
        )?;
    }
    out.flush()
}

/// One parsed trajectory row; `values` holds the eleven numeric columns in
/// header order with `phase` stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub values: [f64; 11],
    pub phase: u8,
}

/// Reads a trajectory CSV written by [`write_trajectory`].
pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, message: String| Error::Parse {
        field: None,
        line: Some(line),
        message,
    };
    match lines.next() {
        Some((_, Ok(h))) if h == TRAJECTORY_HEADER => {}
        _ => return Err(bad(1, "missing or unexpected trajectory header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let line = line.map_err(|e| bad(n, e.to_string()))?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 12 {
            return Err(bad(n, format!("expected 12 columns, found {}", cells.len())));
        }
        let num = |c: &str| c.parse::<f64>().map_err(|e| bad(n, format!("`{c}`: {e}")));
        let mut values = [0.0; 11];
        for (k, cell) in cells.iter().enumerate() {
            match k {
                8 => {}
                k if k < 8 => values[k] = num(cell)?,
                k => values[k - 1] = num(cell)?,
            }
        }
        let phase = cells[8]
            .parse::<u8>()
            .map_err(|e| bad(n, format!("phase `{}`: {e}", cells[8])))?;
        rows.push(TrajectoryRow { values, phase });
    }
    Ok(rows)
}

/// Headline numbers of a single run, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub reason: &'static str,
    /// m; `None` without a target.
    pub miss_distance: Option<f64>,
    pub flight_time: f64,
    pub downrange: f64,
    pub impact_speed: f64,
    pub final_altitude: f64,
    /// Phase entered, time since entry (s), speed (m/s) and altitude (m) at entry.
    pub phases: Vec<(PhaseId, f64, f64, f64)>,
}

impl RunSummary {
    pub fn of(trajectory: &Trajectory) -> Self {
        let t0 = trajectory.initial().t;
        let end = trajectory.final_state();
        RunSummary {
            reason: trajectory.termination.reason.name(),
            miss_distance: trajectory.termination.miss_distance,
            flight_time: trajectory.flight_time(),
            downrange: trajectory.downrange(),
            impact_speed: end.speed(),
            final_altitude: end.altitude(),
            phases: trajectory
                .transitions
                .iter()
                .map(|t| (t.to, t.t - t0, t.speed, t.altitude))
                .collect(),
        }
    }
}

/// `key = value` lines; see the README for the key list.
pub fn write_summary<W: Write>(summary: &RunSummary, mut out: W) -> io::Result<()> {
    writeln!(out, "termination = {}", summary.reason)?;
    match summary.miss_distance {
        Some(m) => writeln!(out, "miss_distance_m = {}", format_sig(m))?,
        None => writeln!(out, "miss_distance_m = none")?,
    }
    writeln!(out, "flight_time_s = {}", format_sig(summary.flight_time))?;
    writeln!(out, "downrange_m = {}", format_sig(summary.downrange))?;
    writeln!(out, "final_speed_m_s = {}", format_sig(summary.impact_speed))?;
    writeln!(out, "final_altitude_m = {}", format_sig(summary.final_altitude))?;
    for (phase, t, v, h) in &summary.phases {
        let name = phase.name();
        writeln!(out, "phase.{name}.time_s = {}", format_sig(*t))?;
        writeln!(out, "phase.{name}.speed_m_s = {}", format_sig(*v))?;
        writeln!(out, "phase.{name}.altitude_m = {}", format_sig(*h))?;
    }
    out.flush()
}

pub const RUN_TABLE_HEADER: &str =
    "run,seed,termination,miss_distance,impact_speed,flight_time,downrange";

pub fn write_run_table<W: Write>(results: &[RunResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{RUN_TABLE_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.run_index,
            r.seed,
            r.reason.name(),
            format_sig(r.miss_distance),
            format_sig(r.impact_speed),
            format_sig(r.flight_time),
            format_sig(r.downrange)
        )?;
    }
    out.flush()
}

fn write_stats<W: Write>(out: &mut W, key: &str, stats: &Option<SummaryStats>) -> io::Result<()> {
    if let Some(s) = stats {
        writeln!(out, "{key}.mean = {}", format_sig(s.mean))?;
        writeln!(out, "{key}.std = {}", format_sig(s.std))?;
        writeln!(out, "{key}.min = {}", format_sig(s.min))?;
        writeln!(out, "{key}.max = {}", format_sig(s.max))?;
    }
    Ok(())
}

/// Campaign report as `key = value` lines. `status` is `ok` or `all-failed`;
/// in the latter case no statistics follow the failure counts.
pub fn write_report<W: Write>(report: &CampaignReport, mut out: W) -> io::Result<()> {
    let status = if report.all_failed() { "all-failed" } else { "ok" };
    writeln!(out, "status = {status}")?;
    writeln!(out, "runs = {}", report.n_runs)?;
    writeln!(out, "master_seed = {}", report.master_seed)?;
    writeln!(out, "failures = {}", report.n_failures)?;
    for (reason, count) in &report.failures_by_reason {
        writeln!(out, "failures.{} = {count}", reason.name())?;
    }
    if let Some(m) = &report.miss {
        writeln!(out, "miss.mean = {}", format_sig(m.mean))?;
        writeln!(out, "miss.std = {}", format_sig(m.std))?;
        writeln!(out, "miss.cep50 = {}", format_sig(m.cep50))?;
        writeln!(out, "miss.cep90 = {}", format_sig(m.cep90))?;
        writeln!(out, "miss.max = {}", format_sig(m.max))?;
    }
    write_stats(&mut out, "impact_speed", &report.impact_speed)?;
    write_stats(&mut out, "flight_time", &report.flight_time)?;
    write_stats(&mut out, "downrange", &report.downrange)?;
    out.flush()
}

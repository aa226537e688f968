//! `glidesim` command-line driver.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::montecarlo::{run_batch_results, CampaignReport};

use super::output::{write_report, write_run_table, write_summary, write_trajectory, RunSummary};
use super::{parse_scenario, Scenario};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GLIDESIM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCENARIO: i32 = 1;
pub const EXIT_RUN_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(name = "glidesim", version, about = "Lifting reentry vehicle simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly one trajectory; writes trajectory.csv and summary.txt.
    Run {
        scenario: PathBuf,
        /// Output directory [default: $GLIDESIM_OUT_DIR or ./out]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the integration step, s.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run a Monte Carlo campaign; writes runs.csv and report.txt.
    Mc {
        scenario: PathBuf,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        seed: u64,
        /// Worker threads [default: available cores]
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Scenario(Error),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Scenario(e)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Diagnostics go to stderr as a single line.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprint!("{e}");
                    EXIT_USAGE
                }
                _ => {
                    let text = e.to_string();
                    eprintln!("{}", text.lines().next().unwrap_or("invalid usage"));
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Scenario(e)) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            EXIT_SCENARIO
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUN_FAILED
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse {
            field,
            line,
            message,
        } => Error::Parse {
            field,
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut file = create(dir, name)?;
    body(&mut file).map_err(|e| Error::io(dir.join(name), e))
}

fn execute(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Run { scenario, out, dt } => {
            let mut s = load(&scenario)?;
            if let Some(dt) = dt {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Failure::Usage(format!("--dt must be positive, got {dt}")));
                }
                s.integration.dt = dt;
            }
            let trajectory = s.fly()?;
            let dir = out_dir(out);
            write_file(&dir, "trajectory.csv", |f| write_trajectory(&trajectory, f))?;
            write_file(&dir, "summary.txt", |f| write_summary(&RunSummary::of(&trajectory), f))?;
            let reason = trajectory.termination.reason;
            if reason.is_failure() {
                return Err(Failure::Run(format!(
                    "run ended by {} at t = {:.3} s",
                    reason.name(),
                    trajectory.final_state().t
                )));
            }
            Ok(())
        }
        Command::Mc {
            scenario,
            runs,
            seed,
            workers,
            out,
        } => {
            if runs == 0 {
                return Err(Failure::Usage("--runs must be at least 1".into()));
            }
            if workers == Some(0) {
                return Err(Failure::Usage("--workers must be at least 1".into()));
            }
            let s = load(&scenario)?;
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let results = run_batch_results(runs, seed, &s, &s.dispersion, workers)?;
            let report = CampaignReport::from_results(seed, &results);
            let dir = out_dir(out);
            write_file(&dir, "runs.csv", |f| write_run_table(&results, f))?;
            write_file(&dir, "report.txt", |f| write_report(&report, f))?;
            if report.all_failed() {
                return Err(Failure::Run(format!("all {runs} runs failed")));
            }
            Ok(())
        }
    }
}

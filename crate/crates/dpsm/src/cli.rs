//! Command-line front end. Exit codes: 0 success, 1 invalid input,
//! 2 diverged run, 3 failed checks.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dpsm_core::network::{consensus_decay_trace, second_singular_value};
use dpsm_core::theory_checks::{fit_phi_decay, run_suite, CheckReport};
use dpsm_core::MixingSchedule;

use crate::config::ConfigLayers;
use crate::error::{io_err, Error, Result};
use crate::experiment::{execute, MNIST_PRESET};
use crate::export::decay_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_CHECKS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dpsm", version, about = "Decentralized projected subgradient experiments")]
pub struct Cli {
    /// Worker threads for per-agent work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeMode {
    Fixed,
    Resample,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configured experiment.
    Run {
        config: PathBuf,
        /// `key=value` pairs applied after the file.
        overrides: Vec<String>,
    },
    /// Digit recovery with the N = 28, m = 84 preset; the config file is
    /// optional and overrides the preset.
    Mnist {
        #[arg(long)]
        config: Option<PathBuf>,
        overrides: Vec<String>,
    },
    /// Trace ‖Φ(k, 0) − J‖ for an ER schedule and fit c·λ^k.
    ConsensusProbe {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "fixed")]
        mode: ProbeMode,
        #[arg(long, default_value_t = 60)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the theory-check suite (optionally only names containing FILTER).
    Check { filter: Option<String> },
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot set up {t} threads: {e}");
            return EXIT_INVALID;
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_DIVERGED
            }
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn run_layers(layers: &ConfigLayers) -> Result<i32> {
    let config = layers.build()?;
    let outcome = execute(&config)?;
    println!("{}", outcome.summary());
    if let Some(p) = &outcome.pgm {
        eprintln!("image written to {}", p.display());
    }
    if outcome.diverged() {
        eprintln!("run diverged at k = {}", outcome.record.last_row().k);
        return Ok(EXIT_DIVERGED);
    }
    Ok(EXIT_OK)
}

fn report_line(r: &CheckReport) -> String {
    format!(
        "{:<24} trials={:<8} worst_slack={:+.3e} tol={:.1e} {}{}",
        r.name,
        r.trials,
        r.worst_slack,
        r.tolerance,
        if r.pass { "pass" } else { "FAIL" },
        r.note.as_deref().map(|n| format!("  {n}")).unwrap_or_default()
    )
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { config, overrides } => {
            let mut layers = ConfigLayers::new();
            layers.apply_text(&read(&config)?)?;
            for o in &overrides {
                layers.apply_override(o)?;
            }
            run_layers(&layers)
        }
        Command::Mnist { config, overrides } => {
            let mut layers = ConfigLayers::new();
            layers.preset(MNIST_PRESET)?;
            if let Some(path) = &config {
                layers.apply_text(&read(path)?)?;
            }
            for o in &overrides {
                layers.apply_override(o)?;
            }
            run_layers(&layers)
        }
        Command::ConsensusProbe {
            nodes,
            p,
            mode,
            horizon,
            seed,
            out,
        } => {
            let schedule = match mode {
                ProbeMode::Fixed => MixingSchedule::fixed_er(nodes, p, seed)?,
                ProbeMode::Resample => MixingSchedule::resample(nodes, p, seed)?,
            };
            let trace = consensus_decay_trace(&schedule, horizon)?;
            let fit = fit_phi_decay(&trace)?;
            let sigma2 = match mode {
                ProbeMode::Fixed => Some(second_singular_value(&schedule.matrix(0))?),
                ProbeMode::Resample => None,
            };
            let mode_name = match mode {
                ProbeMode::Fixed => "fixed",
                ProbeMode::Resample => "resample",
            };
            let mut meta = vec![
                ("nodes", nodes.to_string()),
                ("p", format!("{p:?}")),
                ("mode", mode_name.to_string()),
                ("seed", seed.to_string()),
                ("horizon", horizon.to_string()),
            ];
            if let Some(s) = sigma2 {
                meta.push(("sigma2", format!("{s:e}")));
            }
            if let Some(path) = &out {
                std::fs::write(path, decay_csv(&meta, &trace, &fit)?).map_err(io_err(path))?;
            }
            println!(
                "lambda_hat={:e} c_hat={:e} r_squared={:e} points_used={} sigma2={}",
                fit.lambda_hat,
                fit.c_hat,
                fit.r_squared,
                fit.points_used,
                sigma2.map(|s| format!("{s:e}")).unwrap_or_else(|| "NA".into())
            );
            Ok(EXIT_OK)
        }
        Command::Check { filter } => {
            let reports = run_suite(filter.as_deref());
            if reports.is_empty() {
                return Err(Error::Config {
                    key: "check filter".into(),
                    reason: format!("`{}` matches no check", filter.unwrap_or_default()),
                });
            }
            for r in &reports {
                println!("{}", report_line(r));
            }
            Ok(if reports.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_CHECKS
            })
        }
    }
}

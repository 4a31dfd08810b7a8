//! Config → instance → run → files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dpsm_core::config::{ProblemSource, RunConfig};
use dpsm_core::solver::{fit_linear_rate, RateFit, RunRecord, RunStatus};
use dpsm_core::PhaseRetrievalInstance;

use crate::error::{io_err, Result};
use crate::export::run_csv;
use crate::mnist::load_mnist_image;
use crate::pgm::write_image_pgm;

/// Defaults behind the `mnist` subcommand: the full-size digit experiment.
pub const MNIST_PRESET: &[(&str, &str)] = &[
    ("problem.N", "28"),
    ("problem.m", "84"),
    ("problem.image_index", "0"),
    ("problem.downsample", "1"),
    ("network.p", "0.5"),
    ("method.name", "dpsm"),
    ("stepsize.variant", "geometric"),
    ("stepsize.mu0", "0.1"),
    ("stepsize.gamma", "0.98"),
    ("control.max_iterations", "1500"),
    ("control.metric_stride", "10"),
    ("control.envelope_stride", "0"),
];

/// A loaded problem; `shape` is set for image sources.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: PhaseRetrievalInstance,
    pub shape: Option<(usize, usize)>,
}

pub fn load_problem(config: &RunConfig) -> Result<Problem> {
    let p = &config.problem;
    match &p.source {
        ProblemSource::Synthetic { n } => Ok(Problem {
            instance: PhaseRetrievalInstance::generate(*n, p.agents, p.m, p.seed)?,
            shape: None,
        }),
        ProblemSource::Mnist {
            path,
            image_index,
            downsample,
        } => {
            let img = load_mnist_image(path, *image_index, *downsample)?;
            Ok(Problem {
                instance: PhaseRetrievalInstance::from_signal(img.pixels, p.agents, p.m, p.seed)?,
                shape: Some((img.rows, img.cols)),
            })
        }
    }
}

/// Result of [`execute`]; `csv` is the exact text written (if any).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub record: RunRecord,
    pub rate: Option<RateFit>,
    pub csv: String,
    pub pgm: Option<PathBuf>,
    pub seconds: f64,
}

impl Outcome {
    /// One line: final row, relative distance, fitted rate and wall time.
    /// The numbers use the same formatting as the CSV.
    pub fn summary(&self) -> String {
        let last = self.record.last_row();
        let rate = self
            .rate
            .map(|r| format!("{:e}", r.rate_hat))
            .unwrap_or_else(|| "NA".into());
        format!(
            "status={} k={} mean_sq_dist={:e} rel_dist={:e} consensus={:e} objective={:e} rate_hat={} wall_time={:.3}s",
            self.record.status.name(),
            last.k,
            last.mean_sq_dist,
            self.record.final_relative_distance(),
            last.consensus,
            last.objective,
            rate,
            self.seconds,
        )
    }

    pub fn diverged(&self) -> bool {
        self.record.status == RunStatus::Diverged
    }
}

/// Rate fitted over the second half of the sampled rounds.
pub fn summary_rate(record: &RunRecord) -> Option<RateFit> {
    let last = record.last_row().k;
    fit_linear_rate(&record.rows, last / 2).ok()
}

fn image_path(config: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &config.output.image {
        return Some(PathBuf::from(p));
    }
    config.output.csv.as_ref().map(|c| Path::new(c).with_extension("pgm"))
}

/// Run `config` and write the configured outputs. Image sources also get a
/// sign-corrected PGM of the final mean (at `output.image`, else next to the
/// CSV).
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let problem = load_problem(config)?;
    let record = dpsm_core::run(config, &problem.instance, None)?;
    let rate = summary_rate(&record);
    let csv = run_csv(config, &record)?;
    if let Some(path) = &config.output.csv {
        std::fs::write(path, &csv).map_err(io_err(path))?;
    }
    let mut pgm = None;
    if let (Some((rows, cols)), Some(path)) = (problem.shape, image_path(config)) {
        write_image_pgm(&record.final_mean, record.header.sign.factor(), rows, cols, &path)?;
        pgm = Some(path);
    }
    Ok(Outcome {
        record,
        rate,
        csv,
        pgm,
        seconds: start.elapsed().as_secs_f64(),
    })
}

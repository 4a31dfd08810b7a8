//! Run configuration as plain data. Parsing and rendering of the flat
//! `key = value` text form live in the std crate.

use alloc::format;
use alloc::string::String;

use crate::error::{invalid, Result};
use crate::objective::Batch;
use crate::stepsize::StepsizePolicy;

/// Where the target signal comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// Gaussian ground truth of dimension `n`.
    Synthetic { n: usize },
    /// One image of an IDX file, optionally block-averaged by `downsample`.
    Mnist {
        path: String,
        image_index: usize,
        downsample: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub source: ProblemSource,
    /// Agent count `N`.
    pub agents: usize,
    /// Measurements per agent.
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkMode {
    /// One connected `ER(N, p)` draw, reused every round.
    Fixed,
    /// A fresh `ER(N, p)` draw every round.
    Resample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub mode: NetworkMode,
    pub p: f64,
    pub seed: u64,
    pub interval_bound: Option<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            mode: NetworkMode::Fixed,
            p: 0.5,
            seed: 0,
            interval_bound: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dpsm,
    StoDpsm,
    CSub,
    StoCSub,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dpsm => "dpsm",
            Method::StoDpsm => "stodpsm",
            Method::CSub => "csub",
            Method::StoCSub => "stocsub",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "dpsm" => Some(Method::Dpsm),
            "stodpsm" => Some(Method::StoDpsm),
            "csub" => Some(Method::CSub),
            "stocsub" => Some(Method::StoCSub),
            _ => None,
        }
    }

    pub fn is_centralized(self) -> bool {
        matches!(self, Method::CSub | Method::StoCSub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// Ignored by the deterministic methods.
    pub batch: Batch,
}

/// Stepsize as configured; an epoch-polynomial schedule without an explicit
/// epoch length uses one pass over the local data (`m` rounds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeSpec {
    Polynomial { a: f64, q: f64 },
    Geometric { mu0: f64, gamma: f64 },
    EpochPolynomial { a: f64, q: f64, epoch_length: Option<usize> },
    Constant { alpha: f64 },
}

impl StepsizeSpec {
    pub fn resolve(&self, m: usize) -> StepsizePolicy {
        match *self {
            StepsizeSpec::Polynomial { a, q } => StepsizePolicy::Polynomial { a, q },
            StepsizeSpec::Geometric { mu0, gamma } => StepsizePolicy::Geometric { mu0, gamma },
            StepsizeSpec::EpochPolynomial { a, q, epoch_length } => StepsizePolicy::EpochPolynomial {
                a,
                q,
                epoch_length: epoch_length.unwrap_or(m),
            },
            StepsizeSpec::Constant { alpha } => StepsizePolicy::Constant { alpha },
        }
    }
}

/// Feasible set; balls are centred at the origin, boxes are `[lower, upper]`
/// in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSpec {
    WholeSpace,
    Ball { radius: f64 },
    Box { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub max_iterations: usize,
    /// Stop once the mean squared distance drops below this; 0 disables.
    pub stop_tol: f64,
    pub metric_stride: usize,
    /// Rounds between envelope-gradient samples; 0 disables them.
    pub envelope_stride: usize,
    /// Moreau parameter `t = t_factor / ρ̂`.
    pub t_factor: f64,
    pub inner_budget: usize,
    pub sharpness_probes: usize,
    /// Probe radius as a fraction of `‖x̃‖`.
    pub sharpness_radius: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            max_iterations: 1000,
            stop_tol: 0.0,
            metric_stride: 1,
            envelope_stride: 50,
            t_factor: 0.25,
            inner_budget: crate::geometry::DEFAULT_INNER_BUDGET,
            sharpness_probes: 200,
            sharpness_radius: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub image: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub network: NetworkConfig,
    pub method: MethodConfig,
    pub stepsize: StepsizeSpec,
    pub constraint: ConstraintSpec,
    pub control: ControlConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// A synthetic DPSM run with every optional block at its default.
    pub fn synthetic(n: usize, agents: usize, m: usize, seed: u64, stepsize: StepsizeSpec) -> Self {
        RunConfig {
            problem: ProblemConfig {
                source: ProblemSource::Synthetic { n },
                agents,
                m,
                seed,
            },
            network: NetworkConfig::default(),
            method: MethodConfig {
                method: Method::Dpsm,
                batch: Batch::Full,
            },
            stepsize,
            constraint: ConstraintSpec::WholeSpace,
            control: ControlConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn policy(&self) -> StepsizePolicy {
        self.stepsize.resolve(self.problem.m)
    }

    /// Range checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        match &p.source {
            ProblemSource::Synthetic { n } => {
                if *n == 0 {
                    return Err(invalid("problem.n", "must be positive"));
                }
            }
            ProblemSource::Mnist {
                path, downsample, ..
            } => {
                if path.is_empty() {
                    return Err(invalid("problem.mnist_path", "must not be empty"));
                }
                if *downsample == 0 {
                    return Err(invalid("problem.downsample", "must be positive"));
                }
            }
        }
        if p.agents == 0 {
            return Err(invalid("problem.N", "must be positive"));
        }
        if p.m == 0 {
            return Err(invalid("problem.m", "must be positive"));
        }

        let net = &self.network;
        if !(net.p > 0.0 && net.p <= 1.0) {
            return Err(invalid("network.p", format!("{} is outside (0, 1]", net.p)));
        }
        if net.interval_bound == Some(0) {
            return Err(invalid("network.interval_bound", "must be positive"));
        }

        if let Batch::Sample(b) = self.method.batch {
            let pool = if self.method.method == Method::StoCSub {
                p.agents * p.m
            } else {
                p.m
            };
            if b == 0 || b > pool {
                return Err(invalid(
                    "method.batch_size",
                    format!("{b} is outside [1, {pool}]"),
                ));
            }
        }

        self.policy().validate()?;

        match self.constraint {
            ConstraintSpec::WholeSpace => {}
            ConstraintSpec::Ball { radius } => {
                if !(radius > 0.0) {
                    return Err(invalid("constraint.radius", format!("{radius} must be positive")));
                }
            }
            ConstraintSpec::Box { lower, upper } => {
                if !(lower <= upper) {
                    return Err(invalid(
                        "constraint.lower",
                        format!("{lower} exceeds constraint.upper = {upper}"),
                    ));
                }
            }
        }

        let c = &self.control;
        if c.metric_stride == 0 {
            return Err(invalid("control.metric_stride", "must be positive"));
        }
        if !(c.stop_tol >= 0.0) {
            return Err(invalid("control.stop_tol", "must be nonnegative"));
        }
        if !(c.t_factor > 0.0 && c.t_factor < 1.0) {
            return Err(invalid("control.t_factor", format!("{} is outside (0, 1)", c.t_factor)));
        }
        if c.inner_budget == 0 {
            return Err(invalid("control.inner_budget", "must be positive"));
        }
        if c.sharpness_probes == 0 {
            return Err(invalid("control.sharpness_probes", "must be positive"));
        }
        if !(c.sharpness_radius > 0.0) {
            return Err(invalid("control.sharpness_radius", "must be positive"));
        }
        Ok(())
    }
}

//! Flat `key = value` run configuration.
//!
//! Lines are `section.key = value`; blank lines and lines whose first
//! non-blank character is `#` are ignored. There are no inline comments, so
//! paths may contain `#`. Values are trimmed.
//!
//! Configs are layered: a preset, then the file, then command-line
//! overrides, each later layer replacing earlier values key by key.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use dpsm_core::config::{
    ConstraintSpec, ControlConfig, Method, MethodConfig, NetworkConfig, NetworkMode, OutputConfig, ProblemConfig,
    ProblemSource, RunConfig, StepsizeSpec,
};
use dpsm_core::Batch;

use crate::error::{config_err, Error, Result};

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "problem.n",
    "problem.N",
    "problem.m",
    "problem.seed",
    "problem.mnist_path",
    "problem.image_index",
    "problem.downsample",
    "network.mode",
    "network.p",
    "network.seed",
    "network.interval_bound",
    "method.name",
    "method.batch_size",
    "stepsize.variant",
    "stepsize.a",
    "stepsize.q",
    "stepsize.mu0",
    "stepsize.gamma",
    "stepsize.epoch_length",
    "stepsize.alpha",
    "constraint.kind",
    "constraint.radius",
    "constraint.lower",
    "constraint.upper",
    "control.max_iterations",
    "control.stop_tol",
    "control.metric_stride",
    "control.envelope_stride",
    "control.t_factor",
    "control.inner_budget",
    "control.sharpness_probes",
    "control.sharpness_radius",
    "output.csv",
    "output.image",
];

const STEPSIZE_PARAMS: &[&str] = &[
    "stepsize.a",
    "stepsize.q",
    "stepsize.mu0",
    "stepsize.gamma",
    "stepsize.epoch_length",
    "stepsize.alpha",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Preset,
    Line(usize),
    Override,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Raw key/value layers before typing and validation.
#[derive(Debug, Clone, Default)]
pub struct ConfigLayers {
    entries: BTreeMap<&'static str, Entry>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl ConfigLayers {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seed values that the file and overrides may replace.
    pub fn preset(&mut self, pairs: &[(&str, &str)]) -> Result<&mut Self> {
        for (k, v) in pairs {
            let key = known_key(k).ok_or_else(|| config_err(k, "unknown key"))?;
            self.entries.insert(
                key,
                Entry {
                    value: v.to_string(),
                    origin: Origin::Preset,
                },
            );
        }
        Ok(self)
    }

    /// Parse config text on top of the current layers. A key may appear
    /// only once per text.
    pub fn apply_text(&mut self, text: &str) -> Result<&mut Self> {
        let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = split_pair(trimmed).ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{trimmed}`"),
            })?;
            let key = known_key(k).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown key `{k}`"),
            })?;
            if let Some(prev) = seen.insert(key, line) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {prev})"),
                });
            }
            if v.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("empty value for `{key}`"),
                });
            }
            self.entries.insert(
                key,
                Entry {
                    value: v.to_string(),
                    origin: Origin::Line(line),
                },
            );
        }
        Ok(self)
    }

    /// Apply one `key=value` command-line override.
    pub fn apply_override(&mut self, arg: &str) -> Result<&mut Self> {
        let (k, v) = split_pair(arg).ok_or_else(|| config_err(arg, "override must look like `key=value`"))?;
        let key = known_key(k).ok_or_else(|| config_err(k, "unknown key"))?;
        if v.is_empty() {
            return Err(config_err(key, "empty value"));
        }
        self.entries.insert(
            key,
            Entry {
                value: v.to_string(),
                origin: Origin::Override,
            },
        );
        Ok(self)
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn bad(&self, key: &str, message: String) -> Error {
        match self.raw(key).map(|e| e.origin) {
            Some(Origin::Line(line)) => Error::Parse {
                line,
                message: format!("{key}: {message}"),
            },
            _ => config_err(key, message),
        }
    }

    fn get<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, format!("expected {what}, found `{}`", e.value))),
        }
    }

    fn int(&self, key: &str) -> Result<Option<usize>> {
        self.get(key, "a nonnegative integer")
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key, "a number")
    }

    fn need<T>(v: Option<T>) -> T {
        v.expect("presence checked before typing")
    }

    // Preset values that do not apply are dropped silently.
    fn reject(&self, keys: &[&str], why: &str) -> Result<()> {
        let set_by_user = |k: &&&str| self.raw(k).is_some_and(|e| e.origin != Origin::Preset);
        match keys.iter().find(set_by_user) {
            Some(k) => Err(self.bad(k, format!("not used {why}"))),
            None => Ok(()),
        }
    }

    /// Type and validate the layered values.
    pub fn build(&self) -> Result<RunConfig> {
        let mut missing = Vec::new();
        for key in ["problem.N", "problem.m", "method.name", "stepsize.variant"] {
            if !self.has(key) {
                missing.push(key.to_string());
            }
        }
        let synthetic = self.has("problem.n");
        let mnist = self.has("problem.mnist_path");
        if !synthetic && !mnist {
            missing.insert(0, "problem.n (or problem.mnist_path)".to_string());
        }
        let variant = self.raw("stepsize.variant").map(|e| e.value.clone());
        let stepsize_required: &[&str] = match variant.as_deref() {
            Some("polynomial") | Some("epoch-polynomial") => &["stepsize.a", "stepsize.q"],
            Some("geometric") => &["stepsize.mu0", "stepsize.gamma"],
            Some("constant") => &["stepsize.alpha"],
            Some(other) => {
                return Err(self.bad(
                    "stepsize.variant",
                    format!("unknown variant `{other}` (polynomial | geometric | epoch-polynomial | constant)"),
                ))
            }
            None => &[],
        };
        missing.extend(stepsize_required.iter().filter(|k| !self.has(k)).map(|k| k.to_string()));
        let kind = self.raw("constraint.kind").map(|e| e.value.clone());
        let constraint_required: &[&str] = match kind.as_deref() {
            Some("ball") => &["constraint.radius"],
            Some("box") => &["constraint.lower", "constraint.upper"],
            _ => &[],
        };
        missing.extend(constraint_required.iter().filter(|k| !self.has(k)).map(|k| k.to_string()));
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }

        let source = if synthetic {
            if mnist {
                return Err(self.bad(
                    "problem.mnist_path",
                    "conflicts with problem.n; give exactly one problem source".into(),
                ));
            }
            self.reject(&["problem.image_index", "problem.downsample"], "without problem.mnist_path")?;
            ProblemSource::Synthetic {
                n: Self::need(self.int("problem.n")?),
            }
        } else {
            ProblemSource::Mnist {
                path: self.raw("problem.mnist_path").map(|e| e.value.clone()).unwrap_or_default(),
                image_index: self.int("problem.image_index")?.unwrap_or(0),
                downsample: self.int("problem.downsample")?.unwrap_or(1),
            }
        };
        let problem = ProblemConfig {
            source,
            agents: Self::need(self.int("problem.N")?),
            m: Self::need(self.int("problem.m")?),
            seed: self.get("problem.seed", "a 64-bit unsigned integer")?.unwrap_or(0),
        };

        let defaults = NetworkConfig::default();
        let mode = match self.raw("network.mode").map(|e| e.value.as_str()) {
            None => defaults.mode,
            Some("fixed") => NetworkMode::Fixed,
            Some("resample") => NetworkMode::Resample,
            Some(other) => return Err(self.bad("network.mode", format!("expected fixed | resample, found `{other}`"))),
        };
        let network = NetworkConfig {
            mode,
            p: self.real("network.p")?.unwrap_or(defaults.p),
            seed: self.get("network.seed", "a 64-bit unsigned integer")?.unwrap_or(defaults.seed),
            interval_bound: self.int("network.interval_bound")?,
        };

        let name = &self.raw("method.name").expect("checked").value;
        let method = Method::from_name(name)
            .ok_or_else(|| self.bad("method.name", format!("expected dpsm | stodpsm | csub | stocsub, found `{name}`")))?;
        let batch = match self.raw("method.batch_size").map(|e| e.value.as_str()) {
            None | Some("full") => Batch::Full,
            Some(_) => Batch::Sample(Self::need(
                self.get("method.batch_size", "`full` or a positive integer")?,
            )),
        };

        let used: &[&str] = match variant.as_deref() {
            Some("epoch-polynomial") => &["stepsize.a", "stepsize.q", "stepsize.epoch_length"],
            _ => stepsize_required,
        };
        let unused: Vec<&str> = STEPSIZE_PARAMS.iter().copied().filter(|k| !used.contains(k)).collect();
        self.reject(&unused, "by this stepsize.variant")?;
        let r = |k: &str| -> Result<f64> { Ok(Self::need(self.real(k)?)) };
        let stepsize = match variant.as_deref().expect("checked") {
            "polynomial" => StepsizeSpec::Polynomial {
                a: r("stepsize.a")?,
                q: r("stepsize.q")?,
            },
            "epoch-polynomial" => StepsizeSpec::EpochPolynomial {
                a: r("stepsize.a")?,
                q: r("stepsize.q")?,
                epoch_length: self.int("stepsize.epoch_length")?,
            },
            "geometric" => StepsizeSpec::Geometric {
                mu0: r("stepsize.mu0")?,
                gamma: r("stepsize.gamma")?,
            },
            _ => StepsizeSpec::Constant {
                alpha: r("stepsize.alpha")?,
            },
        };

        let constraint = match kind.as_deref() {
            None | Some("whole") => {
                self.reject(&["constraint.radius", "constraint.lower", "constraint.upper"], "by a whole-space constraint")?;
                ConstraintSpec::WholeSpace
            }
            Some("ball") => {
                self.reject(&["constraint.lower", "constraint.upper"], "by a ball constraint")?;
                ConstraintSpec::Ball {
                    radius: r("constraint.radius")?,
                }
            }
            Some("box") => {
                self.reject(&["constraint.radius"], "by a box constraint")?;
                ConstraintSpec::Box {
                    lower: r("constraint.lower")?,
                    upper: r("constraint.upper")?,
                }
            }
            Some(other) => {
                return Err(self.bad("constraint.kind", format!("expected whole | ball | box, found `{other}`")))
            }
        };

        let d = ControlConfig::default();
        let control = ControlConfig {
            max_iterations: self.int("control.max_iterations")?.unwrap_or(d.max_iterations),
            stop_tol: self.real("control.stop_tol")?.unwrap_or(d.stop_tol),
            metric_stride: self.int("control.metric_stride")?.unwrap_or(d.metric_stride),
            envelope_stride: self.int("control.envelope_stride")?.unwrap_or(d.envelope_stride),
            t_factor: self.real("control.t_factor")?.unwrap_or(d.t_factor),
            inner_budget: self.int("control.inner_budget")?.unwrap_or(d.inner_budget),
            sharpness_probes: self.int("control.sharpness_probes")?.unwrap_or(d.sharpness_probes),
            sharpness_radius: self.real("control.sharpness_radius")?.unwrap_or(d.sharpness_radius),
        };
        let output = OutputConfig {
            csv: self.raw("output.csv").map(|e| e.value.clone()),
            image: self.raw("output.image").map(|e| e.value.clone()),
        };

        let config = RunConfig {
            problem,
            network,
            method: MethodConfig { method, batch },
            stepsize,
            constraint,
            control,
            output,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parse and validate one config text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigLayers::new().apply_text(text)?.build()
}

/// Parse `text` and then apply `key=value` overrides.
pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<RunConfig> {
    let mut layers = ConfigLayers::new();
    layers.apply_text(text)?;
    for o in overrides {
        layers.apply_override(o.as_ref())?;
    }
    layers.build()
}

/// The key/value pairs describing `config`, in canonical order. Floats use
/// the shortest representation that parses back to the same value.
pub fn entries(config: &RunConfig) -> Vec<(&'static str, String)> {
    let mut out: Vec<(&'static str, String)> = Vec::new();
    let mut push = |k: &'static str, v: String| out.push((k, v));
    let p = &config.problem;
    match &p.source {
        ProblemSource::Synthetic { n } => push("problem.n", n.to_string()),
        ProblemSource::Mnist { .. } => {}
    }
    push("problem.N", p.agents.to_string());
    push("problem.m", p.m.to_string());
    push("problem.seed", p.seed.to_string());
    if let ProblemSource::Mnist {
        path,
        image_index,
        downsample,
    } = &p.source
    {
        push("problem.mnist_path", path.clone());
        push("problem.image_index", image_index.to_string());
        push("problem.downsample", downsample.to_string());
    }

    let net = &config.network;
    push(
        "network.mode",
        match net.mode {
            NetworkMode::Fixed => "fixed",
            NetworkMode::Resample => "resample",
        }
        .into(),
    );
    push("network.p", format!("{:?}", net.p));
    push("network.seed", net.seed.to_string());
    if let Some(b) = net.interval_bound {
        push("network.interval_bound", b.to_string());
    }

    push("method.name", config.method.method.name().into());
    push(
        "method.batch_size",
        match config.method.batch {
            Batch::Full => "full".into(),
            Batch::Sample(b) => b.to_string(),
        },
    );

    match config.stepsize {
        StepsizeSpec::Polynomial { a, q } => {
            push("stepsize.variant", "polynomial".into());
            push("stepsize.a", format!("{a:?}"));
            push("stepsize.q", format!("{q:?}"));
        }
        StepsizeSpec::EpochPolynomial { a, q, epoch_length } => {
            push("stepsize.variant", "epoch-polynomial".into());
            push("stepsize.a", format!("{a:?}"));
            push("stepsize.q", format!("{q:?}"));
            if let Some(e) = epoch_length {
                push("stepsize.epoch_length", e.to_string());
            }
        }
        StepsizeSpec::Geometric { mu0, gamma } => {
            push("stepsize.variant", "geometric".into());
            push("stepsize.mu0", format!("{mu0:?}"));
            push("stepsize.gamma", format!("{gamma:?}"));
        }
        StepsizeSpec::Constant { alpha } => {
            push("stepsize.variant", "constant".into());
            push("stepsize.alpha", format!("{alpha:?}"));
        }
    }

    match config.constraint {
        ConstraintSpec::WholeSpace => push("constraint.kind", "whole".into()),
        ConstraintSpec::Ball { radius } => {
            push("constraint.kind", "ball".into());
            push("constraint.radius", format!("{radius:?}"));
        }
        ConstraintSpec::Box { lower, upper } => {
            push("constraint.kind", "box".into());
            push("constraint.lower", format!("{lower:?}"));
            push("constraint.upper", format!("{upper:?}"));
        }
    }

    let c = &config.control;
    push("control.max_iterations", c.max_iterations.to_string());
    push("control.stop_tol", format!("{:?}", c.stop_tol));
    push("control.metric_stride", c.metric_stride.to_string());
    push("control.envelope_stride", c.envelope_stride.to_string());
    push("control.t_factor", format!("{:?}", c.t_factor));
    push("control.inner_budget", c.inner_budget.to_string());
    push("control.sharpness_probes", c.sharpness_probes.to_string());
    push("control.sharpness_radius", format!("{:?}", c.sharpness_radius));

    if let Some(p) = &config.output.csv {
        push("output.csv", p.clone());
    }
    if let Some(p) = &config.output.image {
        push("output.image", p.clone());
    }
    out
}

/// Render `config` as config text that [`parse_config`] reads back to an
/// equal value.
pub fn render(config: &RunConfig) -> String {
    let mut s = String::new();
    for (k, v) in entries(config) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

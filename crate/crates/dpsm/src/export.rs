//! CSV export of run records and consensus-decay traces.
//!
//! Files start with `# key=value` comment lines (the config echo, then
//! `run.*` values computed by the run), followed by an ordinary CSV table.
//! Floats are written with `{:e}`, which reads back to the same value.

use std::fmt::Write as _;

use dpsm_core::config::RunConfig;
use dpsm_core::solver::{MetricRow, RunRecord};
use dpsm_core::theory_checks::PhiFit;

use crate::config;
use crate::error::{Error, Result};

pub const RUN_COLUMNS: [&str; 7] = ["k", "alpha", "mean_sq_dist", "consensus", "objective", "sigma2", "env_grad"];

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn table<I, R>(header: &[&str], records: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Format {
        what: "CSV table",
        reason: e.to_string(),
    };
    w.write_record(header).map_err(wrap)?;
    for r in records {
        w.write_record(r.into_iter().collect::<Vec<_>>()).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format {
        what: "CSV table",
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

/// `run.*` header values, in output order.
pub fn run_header(record: &RunRecord) -> Vec<(&'static str, String)> {
    let h = &record.header;
    let mut v = vec![
        ("run.n", h.n.to_string()),
        ("run.N", h.agents.to_string()),
        ("run.m", h.m.to_string()),
        ("run.seed", h.seed.to_string()),
        ("run.network_seed", h.network_seed.to_string()),
        ("run.method", h.method.name().to_string()),
        ("run.rho_hat", fmt_f(h.rho_hat)),
        ("run.l_hat", fmt_f(h.l_hat)),
        ("run.kappa_hat", fmt_f(h.kappa_hat)),
        ("run.beta_hat", fmt_f(h.beta_hat)),
        ("run.t", fmt_f(h.t)),
        ("run.sign", fmt_f(h.sign.factor())),
        ("run.truth_norm", fmt_f(h.truth_norm)),
    ];
    if let Some(s) = h.sigma2 {
        v.push(("run.sigma2", fmt_f(s)));
    }
    v.push(("run.status", record.status.name().to_string()));
    v.push(("run.rows", record.rows.len().to_string()));
    v
}

fn row_fields(r: &MetricRow) -> Vec<String> {
    vec![
        r.k.to_string(),
        fmt_f(r.alpha),
        fmt_f(r.mean_sq_dist),
        fmt_f(r.consensus),
        fmt_f(r.objective),
        fmt_opt(r.sigma2),
        fmt_opt(r.env_grad),
    ]
}

/// The full CSV text for a run.
pub fn run_csv(config: &RunConfig, record: &RunRecord) -> Result<String> {
    let mut s = String::new();
    for (k, v) in config::entries(config) {
        let _ = writeln!(s, "# {k}={v}");
    }
    for (k, v) in run_header(record) {
        let _ = writeln!(s, "# {k}={v}");
    }
    s.push_str(&table(&RUN_COLUMNS, record.rows.iter().map(row_fields))?);
    Ok(s)
}

/// Two-column `k,norm` trace with the decay fit in the header.
pub fn decay_csv(meta: &[(&str, String)], trace: &[f64], fit: &PhiFit) -> Result<String> {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "# fit.c_hat={}", fmt_f(fit.c_hat));
    let _ = writeln!(s, "# fit.lambda_hat={}", fmt_f(fit.lambda_hat));
    let _ = writeln!(s, "# fit.r_squared={}", fmt_f(fit.r_squared));
    let _ = writeln!(s, "# fit.points_used={}", fit.points_used);
    s.push_str(&table(
        &["k", "norm"],
        trace.iter().enumerate().map(|(k, v)| [k.to_string(), fmt_f(*v)]),
    )?);
    Ok(s)
}

/// A parsed CSV export: comment metadata plus the table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDoc {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parse cell `(row, column)` as `f64`; empty cells give `None`.
    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        let cell = self.rows.get(row)?.get(self.column(name)?)?;
        cell.parse().ok()
    }
}

/// Read back a file written by [`run_csv`] or [`decay_csv`].
pub fn parse_csv(text: &str) -> Result<CsvDoc> {
    let mut meta = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.to_string(), v.to_string()));
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let wrap = |e: csv::Error| Error::Format {
        what: "CSV table",
        reason: e.to_string(),
    };
    let header = rdr.headers().map_err(wrap)?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(wrap)?;
    Ok(CsvDoc { meta, header, rows })
}

/// The lines of a CSV export that carry data, i.e. everything but comments.
pub fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_csv_reads_back() {
        let fit = PhiFit {
            c_hat: 1.5,
            lambda_hat: 0.25,
            r_squared: 1.0,
            points_used: 3,
            degenerate: false,
        };
        let text = decay_csv(&[("nodes", "4".into())], &[1.0, 0.25, 1e-300], &fit).unwrap();
        let doc = parse_csv(&text).unwrap();
        assert_eq!(doc.header, vec!["k", "norm"]);
        assert_eq!(doc.meta("nodes"), Some("4"));
        assert_eq!(doc.meta("fit.lambda_hat"), Some("2.5e-1"));
        assert_eq!(doc.value(2, "norm"), Some(1e-300));
        assert_eq!(data_lines(&text).len(), 4);
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -0.0, 5e-324] {
            assert_eq!(fmt_f(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_opt(None), "");
    }
}

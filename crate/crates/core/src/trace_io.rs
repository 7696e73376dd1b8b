//! CSV serialisation of traces.
//!
//! Two files: the metrics table with the fixed header [`METRICS_HEADER`],
//! and an optional iterates table `k,v_0,...,v_{n-1}` from which every
//! metric can be recomputed. Floats are written with 17 significant digits,
//! `.` as decimal separator and LF line endings; missing values are empty
//! cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterate::{Algorithm, IterationRecord, IterationTrace, Metrics};
use crate::mdp::{optimality_unchecked, span_seminorm, Mdp, ValueVector};
use crate::schedule::{NormalizationFn, Schedule};

pub const METRICS_HEADER: &str =
    "k,lambda,f_value,bellman_sup_err,bellman_span,normalized_err,policy_err,upper_bound,lower_bound";

const N_COLUMNS: usize = 9;

/// One line of the metrics table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub lambda: Option<f64>,
    pub f_value: Option<f64>,
    pub bellman_sup_err: Option<f64>,
    pub bellman_span: Option<f64>,
    pub normalized_err: Option<f64>,
    pub policy_err: Option<f64>,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
}

impl TraceRow {
    /// Row for `rec` with empty bound columns.
    pub fn from_record(rec: &IterationRecord) -> Self {
        TraceRow {
            k: rec.k,
            lambda: rec.lambda,
            f_value: rec.f_value,
            bellman_sup_err: rec.metrics.bellman_sup_err,
            bellman_span: Some(rec.metrics.bellman_span),
            normalized_err: rec.metrics.normalized_err,
            policy_err: rec.metrics.policy_err,
            upper_bound: None,
            lower_bound: None,
        }
    }

    fn cells(&self) -> [Option<f64>; N_COLUMNS - 1] {
        [
            self.lambda,
            self.f_value,
            self.bellman_sup_err,
            self.bellman_span,
            self.normalized_err,
            self.policy_err,
            self.upper_bound,
            self.lower_bound,
        ]
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn parse_cell(text: &str, line: usize) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: bad number '{text}'")))
}

fn parse_k(text: &str, line: usize) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad iteration index '{text}'")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

/// Metrics table as CSV text.
pub fn write_metrics_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.k.to_string());
        for c in row.cells() {
            out.push(',');
            out.push_str(&cell(c));
        }
        out.push('\n');
    }
    out
}

/// Parses a metrics table written by [`write_metrics_csv`].
pub fn parse_metrics_csv(text: &str) -> Result<Vec<TraceRow>> {
    let header = text.split('\n').next().unwrap_or("");
    if header.trim_end_matches('\r') != METRICS_HEADER {
        return Err(Error::Parse(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != N_COLUMNS {
            return Err(Error::Parse(format!(
                "line {line}: expected {N_COLUMNS} fields, found {}",
                fields.len()
            )));
        }
        let v: Vec<Option<f64>> = fields[1..]
            .iter()
            .map(|f| parse_cell(f, line))
            .collect::<Result<_>>()?;
        rows.push(TraceRow {
            k: parse_k(fields[0], line)?,
            lambda: v[0],
            f_value: v[1],
            bellman_sup_err: v[2],
            bellman_span: v[3],
            normalized_err: v[4],
            policy_err: v[5],
            upper_bound: v[6],
            lower_bound: v[7],
        });
    }
    Ok(rows)
}

/// Iterates table: `k,v_0,...,v_{n-1}`.
pub fn write_iterates_csv(trace: &IterationTrace) -> String {
    let n = trace.v0().len();
    let mut out = String::from("k");
    for i in 0..n {
        out.push_str(&format!(",v_{i}"));
    }
    out.push('\n');
    for rec in &trace.records {
        out.push_str(&rec.k.to_string());
        for x in rec.iterate.iter() {
            out.push(',');
            out.push_str(&format_float(*x));
        }
        out.push('\n');
    }
    out
}

/// Parses an iterates table; rows must be `k = 0, 1, 2, ...` in order.
pub fn parse_iterates_csv(text: &str) -> Result<Vec<ValueVector>> {
    let header = text.split('\n').next().unwrap_or("").trim_end_matches('\r');
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"k")
        || cols.len() < 2
        || cols[1..]
            .iter()
            .enumerate()
            .any(|(i, c)| *c != format!("v_{i}"))
    {
        return Err(Error::Parse(format!("unexpected header '{header}'")));
    }
    let n = cols.len() - 1;
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != n + 1 {
            return Err(Error::Parse(format!(
                "line {line}: expected {} fields, found {}",
                n + 1,
                fields.len()
            )));
        }
        let k = parse_k(fields[0], line)?;
        if k != out.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected k = {}",
                out.len()
            )));
        }
        let v = fields[1..]
            .iter()
            .map(|f| {
                parse_cell(f, line)?
                    .ok_or_else(|| Error::Parse(format!("line {line}: empty value")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(ValueVector::new(v));
    }
    if out.is_empty() {
        return Err(Error::Parse("no iterates".into()));
    }
    Ok(out)
}

/// Rebuilds a trace (residuals, greedy policies, `f` values and spans)
/// from stored iterates, so that metrics can be recomputed offline.
pub fn rebuild_trace(
    m: &Mdp,
    algorithm: Algorithm,
    schedule: &Schedule,
    normalization: Option<NormalizationFn>,
    iterates: Vec<ValueVector>,
) -> Result<IterationTrace> {
    let mut records = Vec::with_capacity(iterates.len());
    for (k, v) in iterates.into_iter().enumerate() {
        crate::error::check_len(m.n_states(), v.len())?;
        let (tv, greedy) = optimality_unchecked(m, v.as_slice());
        let residual = tv.sub(&v);
        records.push(IterationRecord {
            k,
            lambda: (k > 0).then(|| schedule.lambda(k)),
            f_value: normalization.map(|f| f.eval(v.as_slice(), tv.as_slice())),
            metrics: Metrics {
                bellman_span: span_seminorm(&residual),
                ..Metrics::default()
            },
            iterate: v,
            residual,
            greedy,
        });
    }
    Ok(IterationTrace {
        algorithm,
        schedule: schedule.clone(),
        normalization,
        records,
    })
}

//! Step-size schedules `k -> lambda_k` and normalisation functions for the
//! relative iterations, with their command-line spellings.
//!
//! The k-th update (producing `V^k`) uses `lambda_k`, starting from
//! `lambda_1`; `lambda_0 = 0` by convention in coefficient formulas.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rule `k -> lambda_k in [0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Schedule {
    /// `lambda_k = 0`: plain value iteration.
    Zero,
    Constant(f64),
    /// `lambda_k = 2 / (k + 2)`.
    Anchor,
    /// `values[k - 1]` for `k <= len`; the last value repeats afterwards.
    Custom(Vec<f64>),
}

impl Schedule {
    /// `lambda_k`, with `lambda_0 = 0`.
    pub fn lambda(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            Schedule::Zero => 0.0,
            Schedule::Constant(x) => *x,
            Schedule::Anchor => 2.0 / (k as f64 + 2.0),
            Schedule::Custom(values) => values[(k - 1).min(values.len() - 1)],
        }
    }

    /// `[lambda_0, lambda_1, ..., lambda_k]`.
    pub fn prefix(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|i| self.lambda(i)).collect()
    }

    /// Checks `0 <= lambda_k < 1` for every `k`.
    pub fn validate(&self) -> Result<()> {
        let bad = |x: f64| !(0.0..1.0).contains(&x);
        match self {
            Schedule::Constant(x) if bad(*x) => Err(Error::OutOfRange {
                what: "lambda",
                detail: format!("{x} not in [0, 1)"),
            }),
            Schedule::Custom(values) if values.is_empty() => Err(Error::OutOfRange {
                what: "lambda",
                detail: "custom schedule is empty".into(),
            }),
            Schedule::Custom(values) => match values.iter().position(|&x| bad(x)) {
                Some(i) => Err(Error::OutOfRange {
                    what: "lambda",
                    detail: format!("lambda_{} = {} not in [0, 1)", i + 1, values[i]),
                }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Whether `lambda_{i+1} <= lambda_i` for `1 <= i < k`.
    pub fn is_nonincreasing_to(&self, k: usize) -> bool {
        match self {
            Schedule::Zero | Schedule::Constant(_) | Schedule::Anchor => true,
            Schedule::Custom(_) => (1..k).all(|i| self.lambda(i + 1) <= self.lambda(i)),
        }
    }

    /// Parses `zero`, `anchor`, `const:<x>` or `file:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let schedule = match spec.trim() {
            "zero" => Schedule::Zero,
            "anchor" => Schedule::Anchor,
            s => {
                if let Some(x) = s.strip_prefix("const:") {
                    Schedule::Constant(parse_f64(x)?)
                } else if let Some(path) = s.strip_prefix("file:") {
                    Schedule::from_file(Path::new(path))?
                } else {
                    return Err(Error::Parse(format!("unknown schedule '{s}'")));
                }
            }
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Schedule::from_values_text(&text)
    }

    /// Custom schedule from numbers separated by whitespace or commas.
    pub fn from_values_text(text: &str) -> Result<Self> {
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(parse_f64)
            .collect::<Result<Vec<_>>>()?;
        let schedule = Schedule::Custom(values);
        schedule.validate()?;
        Ok(schedule)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Zero => f.write_str("zero"),
            Schedule::Constant(x) => write!(f, "const:{x}"),
            Schedule::Anchor => f.write_str("anchor"),
            Schedule::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse(format!("not finite: '{s}'")))
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a state index: '{s}'")))
}

/// A map `f` with `f(x + c 1) = f(x) + c`, subtracted by the relative
/// iterations. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum NormalizationFn {
    /// `f(h) = h_i`.
    ComponentOfH(usize),
    /// `f(h) = (T h)_i`.
    ComponentOfTh(usize),
    Max,
    Min,
    /// `(max h + min h) / 2`.
    SpanMidpoint,
}

impl NormalizationFn {
    /// Evaluates `f(h)` given `th = T h`.
    pub fn eval(&self, h: &[f64], th: &[f64]) -> f64 {
        match *self {
            NormalizationFn::ComponentOfH(i) => h[i],
            NormalizationFn::ComponentOfTh(i) => th[i],
            NormalizationFn::Max => h.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            NormalizationFn::Min => h.iter().copied().fold(f64::INFINITY, f64::min),
            NormalizationFn::SpanMidpoint => {
                let hi = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = h.iter().copied().fold(f64::INFINITY, f64::min);
                0.5 * (hi + lo)
            }
        }
    }

    pub fn check(&self, n_states: usize) -> Result<()> {
        match *self {
            NormalizationFn::ComponentOfH(i) | NormalizationFn::ComponentOfTh(i)
                if i >= n_states =>
            {
                Err(Error::OutOfRange {
                    what: "normalization index",
                    detail: format!("{i} >= n_states {n_states}"),
                })
            }
            _ => Ok(()),
        }
    }

    /// Parses `h:<i>`, `th:<i>`, `max`, `min` or `mid`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.trim() {
            "max" => Ok(NormalizationFn::Max),
            "min" => Ok(NormalizationFn::Min),
            "mid" => Ok(NormalizationFn::SpanMidpoint),
            s => {
                if let Some(i) = s.strip_prefix("th:") {
                    Ok(NormalizationFn::ComponentOfTh(parse_index(i)?))
                } else if let Some(i) = s.strip_prefix("h:") {
                    Ok(NormalizationFn::ComponentOfH(parse_index(i)?))
                } else {
                    Err(Error::Parse(format!("unknown normalization '{s}'")))
                }
            }
        }
    }
}

impl fmt::Display for NormalizationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationFn::ComponentOfH(i) => write!(f, "h:{i}"),
            NormalizationFn::ComponentOfTh(i) => write!(f, "th:{i}"),
            NormalizationFn::Max => f.write_str("max"),
            NormalizationFn::Min => f.write_str("min"),
            NormalizationFn::SpanMidpoint => f.write_str("mid"),
        }
    }
}

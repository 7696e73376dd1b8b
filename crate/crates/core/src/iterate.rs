//! Value iteration and its relaxed, anchored and relative variants.
//!
//! | algorithm | update producing `V^k`                                   |
//! |-----------|----------------------------------------------------------|
//! | VI        | `T V^{k-1}`                                              |
//! | Rx-VI     | `l_k V^{k-1} + (1 - l_k) T V^{k-1}`                      |
//! | Anc-VI    | `l_k V^0 + (1 - l_k) T V^{k-1}`                          |
//! | Rx-RVI    | `l_k h^{k-1} + (1 - l_k) (T h^{k-1} - f(h^{k-1}) 1)`     |
//! | Anc-RVI   | `l_k h^0 + (1 - l_k) (T h^{k-1} - f(h^{k-1}) 1)`         |
//!
//! Every run records the full trajectory. Metrics that need `(g*, h*)` are
//! filled in by [`IterationTrace::attach_metrics`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::policy_gain;
use crate::error::{check_len, Error, Result};
use crate::mdp::{
    optimality_unchecked, span_seminorm, sup_error, DeterministicPolicy, Mdp, SolutionPair,
    ValueVector,
};
use crate::schedule::{NormalizationFn, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "vi")]
    Vi,
    #[serde(rename = "rx-vi")]
    RxVi,
    #[serde(rename = "anc-vi")]
    AncVi,
    #[serde(rename = "rx-rvi")]
    RxRvi,
    #[serde(rename = "anc-rvi")]
    AncRvi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Vi,
        Algorithm::RxVi,
        Algorithm::AncVi,
        Algorithm::RxRvi,
        Algorithm::AncRvi,
    ];

    /// Relative variants subtract `f(h) 1` and need a [`NormalizationFn`].
    pub fn is_relative(self) -> bool {
        matches!(self, Algorithm::RxRvi | Algorithm::AncRvi)
    }

    pub fn is_anchored(self) -> bool {
        matches!(self, Algorithm::AncVi | Algorithm::AncRvi)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vi => "vi",
            Algorithm::RxVi => "rx-vi",
            Algorithm::AncVi => "anc-vi",
            Algorithm::RxRvi => "rx-rvi",
            Algorithm::AncRvi => "anc-rvi",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm '{s}'")))
    }
}

/// Error measures of one iterate; `None` when `(g*, h*)` is unavailable or
/// the measure does not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `||T V^k - V^k - g*||_inf`.
    pub bellman_sup_err: Option<f64>,
    /// `||T V^k - V^k||_sp`.
    pub bellman_span: f64,
    /// `||(V^k - V^0) / alpha_k - g*||_inf`.
    pub normalized_err: Option<f64>,
    /// `||g^{pi_k} - g*||_inf` for the greedy policy `pi_k`.
    pub policy_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `lambda_k` used to produce this iterate; `None` at `k = 0`.
    pub lambda: Option<f64>,
    pub iterate: ValueVector,
    pub residual: ValueVector,
    pub greedy: DeterministicPolicy,
    /// `f(h^k)` for relative runs.
    pub f_value: Option<f64>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    pub normalization: Option<NormalizationFn>,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn v0(&self) -> &ValueVector {
        &self.records[0].iterate
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace has the k = 0 row")
    }

    /// `||V^k - V^{k-1}||_inf` for `k >= 1`.
    pub fn drift(&self, k: usize) -> Option<f64> {
        if k == 0 || k >= self.records.len() {
            return None;
        }
        sup_error(&self.records[k].iterate, &self.records[k - 1].iterate).ok()
    }

    /// Normaliser `alpha_k` of `(V^k - V^0) / alpha_k`, for `k >= 1`.
    ///
    /// `k` for VI, `sum_i (1 - l_i)` for Rx-VI and
    /// `sum_i prod_{j=i..k} (1 - l_j)` for Anc-VI; relative runs have none.
    pub fn normalizers(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.records.len());
        out.push(None);
        let mut acc = 0.0;
        for k in 1..self.records.len() {
            let lam = self.schedule.lambda(k);
            let alpha = match self.algorithm {
                Algorithm::Vi => Some(k as f64),
                Algorithm::RxVi => {
                    acc += 1.0 - lam;
                    Some(acc)
                }
                Algorithm::AncVi => {
                    acc = (1.0 - lam) * (acc + 1.0);
                    Some(acc)
                }
                Algorithm::RxRvi | Algorithm::AncRvi => None,
            };
            out.push(alpha.filter(|a| *a > 0.0));
        }
        out
    }

    /// Fills the `(g*, h*)`-dependent metrics of every row. Gains of greedy
    /// policies are computed once per distinct policy.
    pub fn attach_metrics(&mut self, m: &Mdp, solution: &SolutionPair) -> Result<()> {
        check_len(m.n_states(), solution.gain.len())?;
        let g = &solution.gain;
        let v0 = self.v0().clone();
        let alphas = self.normalizers();
        let mut gains: HashMap<DeterministicPolicy, ValueVector> = HashMap::new();
        for (rec, alpha) in self.records.iter_mut().zip(alphas) {
            rec.metrics.bellman_sup_err = Some(sup_error(&rec.residual, g)?);
            rec.metrics.normalized_err = match alpha {
                Some(a) => Some(sup_error(&rec.iterate.sub(&v0).scale(1.0 / a), g)?),
                None => None,
            };
            let gain = match gains.get(&rec.greedy) {
                Some(x) => x,
                None => {
                    let x = policy_gain(m, &rec.greedy)?;
                    gains.entry(rec.greedy.clone()).or_insert(x)
                }
            };
            rec.metrics.policy_err = Some(sup_error(gain, g)?);
        }
        Ok(())
    }
}

/// Runs `algorithm` for `iters` updates from `v0`.
///
/// `normalization` is required for relative variants and rejected otherwise.
pub fn run(
    m: &Mdp,
    algorithm: Algorithm,
    v0: &ValueVector,
    schedule: &Schedule,
    normalization: Option<NormalizationFn>,
    iters: usize,
) -> Result<IterationTrace> {
    check_len(m.n_states(), v0.len())?;
    schedule.validate()?;
    let f = match (algorithm.is_relative(), normalization) {
        (true, Some(f)) => {
            f.check(m.n_states())?;
            Some(f)
        }
        (true, None) => {
            return Err(Error::OutOfRange {
                what: "normalization",
                detail: format!("{algorithm} needs a normalization function"),
            })
        }
        (false, Some(_)) => {
            return Err(Error::OutOfRange {
                what: "normalization",
                detail: format!("{algorithm} does not take a normalization function"),
            })
        }
        (false, None) => None,
    };
    if !v0.is_finite() {
        return Err(Error::OutOfRange {
            what: "v0",
            detail: "entries must be finite".into(),
        });
    }

    let record = |k: usize, lambda: Option<f64>, v: ValueVector| {
        let (tv, greedy) = optimality_unchecked(m, v.as_slice());
        let residual = tv.sub(&v);
        let f_value = f.map(|f| f.eval(v.as_slice(), tv.as_slice()));
        let metrics = Metrics {
            bellman_span: span_seminorm(&residual),
            ..Metrics::default()
        };
        (
            IterationRecord {
                k,
                lambda,
                iterate: v,
                residual,
                greedy,
                f_value,
                metrics,
            },
            tv,
        )
    };

    let mut records = Vec::with_capacity(iters + 1);
    let (first, mut tv) = record(0, None, v0.clone());
    records.push(first);
    for k in 1..=iters {
        let lam = schedule.lambda(k);
        let prev: &IterationRecord = records.last().expect("nonempty");
        let mix = |a: &[f64], b: &[f64], shift: f64| -> ValueVector {
            ValueVector::new(
                a.iter()
                    .zip(b)
                    .map(|(x, t)| lam * x + (1.0 - lam) * (t - shift))
                    .collect(),
            )
        };
        let next = match algorithm {
            Algorithm::Vi => tv.clone(),
            Algorithm::RxVi => mix(prev.iterate.as_slice(), tv.as_slice(), 0.0),
            Algorithm::AncVi => mix(v0.as_slice(), tv.as_slice(), 0.0),
            Algorithm::RxRvi => mix(
                prev.iterate.as_slice(),
                tv.as_slice(),
                prev.f_value.expect("relative run"),
            ),
            Algorithm::AncRvi => mix(
                v0.as_slice(),
                tv.as_slice(),
                prev.f_value.expect("relative run"),
            ),
        };
        if !next.is_finite() {
            return Err(Error::OutOfRange {
                what: "iterate",
                detail: format!("non-finite value at k = {k}"),
            });
        }
        let (rec, t) = record(k, Some(lam), next);
        records.push(rec);
        tv = t;
    }
    Ok(IterationTrace {
        algorithm,
        schedule: schedule.clone(),
        normalization: f,
        records,
    })
}

/// Standard value iteration.
pub fn run_vi(m: &Mdp, v0: &ValueVector, iters: usize) -> Result<IterationTrace> {
    run(m, Algorithm::Vi, v0, &Schedule::Zero, None, iters)
}

/// Relaxed value iteration.
pub fn run_rx_vi(
    m: &Mdp,
    v0: &ValueVector,
    schedule: &Schedule,
    iters: usize,
) -> Result<IterationTrace> {
    run(m, Algorithm::RxVi, v0, schedule, None, iters)
}

/// Anchored value iteration.
pub fn run_anc_vi(
    m: &Mdp,
    v0: &ValueVector,
    schedule: &Schedule,
    iters: usize,
) -> Result<IterationTrace> {
    run(m, Algorithm::AncVi, v0, schedule, None, iters)
}

/// Relaxed relative value iteration.
pub fn run_rx_rvi(
    m: &Mdp,
    h0: &ValueVector,
    schedule: &Schedule,
    f: NormalizationFn,
    iters: usize,
) -> Result<IterationTrace> {
    run(m, Algorithm::RxRvi, h0, schedule, Some(f), iters)
}

/// Anchored relative value iteration.
pub fn run_anc_rvi(
    m: &Mdp,
    h0: &ValueVector,
    schedule: &Schedule,
    f: NormalizationFn,
    iters: usize,
) -> Result<IterationTrace> {
    run(m, Algorithm::AncRvi, h0, schedule, Some(f), iters)
}

/// Span-condition check for one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanVerdict {
    pub k: usize,
    /// `||x - proj(x)||_2 / ||x||_2` for `x = V^{k+1} - V^0`; 0 when `x = 0`.
    pub remainder: f64,
    pub holds: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(x, q);
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi -= c * qi;
            }
        }
    }
}

/// Checks `V^{k+1} in V^0 + span{T V^i - V^i : i <= k}` for every `k` with a
/// successor in the trace.
pub fn check_span_condition(trace: &IterationTrace, tol: f64) -> Vec<SpanVerdict> {
    let v0 = trace.v0().as_slice();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(trace.len().saturating_sub(1));
    for k in 0..trace.len().saturating_sub(1) {
        let mut q = trace.records[k].residual.as_slice().to_vec();
        let norm = dot(&q, &q).sqrt();
        project_out(&mut q, &basis);
        let rest = dot(&q, &q).sqrt();
        if rest > 1e-12 * norm && rest > 0.0 {
            for x in q.iter_mut() {
                *x /= rest;
            }
            basis.push(q);
        }
        let mut x: Vec<f64> = trace.records[k + 1]
            .iterate
            .iter()
            .zip(v0)
            .map(|(a, b)| a - b)
            .collect();
        let xnorm = dot(&x, &x).sqrt();
        let remainder = if xnorm == 0.0 {
            0.0
        } else {
            project_out(&mut x, &basis);
            dot(&x, &x).sqrt() / xnorm
        };
        out.push(SpanVerdict {
            k,
            remainder,
            holds: remainder <= tol,
        });
    }
    out
}

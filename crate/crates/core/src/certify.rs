//! Machine-checkable certificates: runs an algorithm on a batch of instances
//! and checks a named inequality at every iteration, recording slacks and
//! violations.
//!
//! Every inequality is checked as `lhs <= rhs + tol`; its slack is
//! `rhs - lhs`.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    anc_vi_rate, first_k_after, general_rates, k_anc, k_rx, km_coefficients, lower_bound,
    rx_vi_rate, vi_normalized_rate, BoundInputs, Family,
};
use crate::error::{Error, Result};
use crate::iterate::{run, Algorithm, IterationTrace};
use crate::mdp::{Mdp, SolutionPair, ValueVector};
use crate::schedule::{NormalizationFn, Schedule};

/// Violations stored per inequality; the total is always counted.
const MAX_STORED_VIOLATIONS: usize = 20;

/// One problem instance with its ground truth and start point.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub mdp: Mdp,
    pub solution: SolutionPair,
    pub v0: ValueVector,
    /// Set for worst-case family members.
    pub family: Option<Family>,
}

/// Available certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertKind {
    /// Anchored VI Bellman error against `8d/(k+1) + K G/(k+1)`.
    #[serde(rename = "anc-vi")]
    AncVi,
    /// Relaxed VI Bellman error against `4d/sqrt(pi (k-K))`.
    #[serde(rename = "rx-vi")]
    RxVi,
    /// VI normalised iterates against `2d/k`.
    #[serde(rename = "vi-normalized")]
    ViNormalized,
    /// Policy error against Bellman error for Rx-VI and Anc-VI.
    #[serde(rename = "policy-error")]
    PolicyError,
    /// Worst-case family lower bounds.
    #[serde(rename = "lower-bound")]
    LowerBound,
    /// Coefficient table row sums and the `c_{k+1,k}` bound.
    #[serde(rename = "coefficients")]
    Coefficients,
    /// Relative iterations against their Bellman error rates.
    #[serde(rename = "rvi")]
    Rvi,
}

impl CertKind {
    pub const ALL: [CertKind; 7] = [
        CertKind::AncVi,
        CertKind::RxVi,
        CertKind::ViNormalized,
        CertKind::PolicyError,
        CertKind::LowerBound,
        CertKind::Coefficients,
        CertKind::Rvi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CertKind::AncVi => "anc-vi",
            CertKind::RxVi => "rx-vi",
            CertKind::ViNormalized => "vi-normalized",
            CertKind::PolicyError => "policy-error",
            CertKind::LowerBound => "lower-bound",
            CertKind::Coefficients => "coefficients",
            CertKind::Rvi => "rvi",
        }
    }

    /// Schedule used when none is given.
    pub fn default_schedule(self) -> Schedule {
        match self {
            CertKind::AncVi => Schedule::Anchor,
            CertKind::ViNormalized => Schedule::Zero,
            _ => Schedule::Constant(0.5),
        }
    }

    pub fn needs_instances(self) -> bool {
        self != CertKind::Coefficients
    }
}

impl std::str::FromStr for CertKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CertKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown certificate '{s}'")))
    }
}

/// Settings shared by all certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct CertConfig {
    /// Overrides [`CertKind::default_schedule`].
    pub schedule: Option<Schedule>,
    pub normalization: NormalizationFn,
    pub iters: usize,
    pub tol: f64,
    /// Table size for [`CertKind::Coefficients`].
    pub k_max: usize,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            schedule: None,
            normalization: NormalizationFn::ComponentOfH(0),
            iters: 500,
            tol: 1e-12,
            k_max: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationDetail {
    pub instance: String,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub statement: String,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub checked: usize,
    pub max_slack: Option<f64>,
    pub min_slack: Option<f64>,
    pub violation_count: usize,
    pub violations: Vec<ViolationDetail>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certificate: String,
    pub schedule: String,
    pub instances: usize,
    pub inequalities: Vec<InequalityReport>,
    pub pass: bool,
}

impl Certificate {
    /// Names of the inequalities that failed.
    pub fn failed(&self) -> Vec<&str> {
        self.inequalities
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect()
    }
}

struct Tally {
    report: InequalityReport,
    tol: f64,
}

impl Tally {
    fn new(name: &str, statement: &str, tol: f64) -> Self {
        Tally {
            report: InequalityReport {
                name: name.into(),
                statement: statement.into(),
                k_min: None,
                k_max: None,
                checked: 0,
                max_slack: None,
                min_slack: None,
                violation_count: 0,
                violations: Vec::new(),
                pass: true,
            },
            tol,
        }
    }

    fn check(&mut self, instance: &str, k: usize, lhs: f64, rhs: f64) {
        let r = &mut self.report;
        let slack = rhs - lhs;
        r.checked += 1;
        r.k_min = Some(r.k_min.map_or(k, |x| x.min(k)));
        r.k_max = Some(r.k_max.map_or(k, |x| x.max(k)));
        r.max_slack = Some(r.max_slack.map_or(slack, |x| x.max(slack)));
        r.min_slack = Some(r.min_slack.map_or(slack, |x| x.min(slack)));
        // NaN counts as a violation
        let within = matches!(
            lhs.partial_cmp(&(rhs + self.tol)),
            Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
        );
        if !within {
            r.violation_count += 1;
            r.pass = false;
            if r.violations.len() < MAX_STORED_VIOLATIONS {
                r.violations.push(ViolationDetail {
                    instance: instance.into(),
                    k,
                    lhs,
                    rhs,
                });
            }
        }
    }

    fn finish(self) -> InequalityReport {
        self.report
    }
}

fn traced(
    inst: &Instance,
    algorithm: Algorithm,
    schedule: &Schedule,
    f: Option<NormalizationFn>,
    iters: usize,
) -> Result<IterationTrace> {
    let mut t = run(&inst.mdp, algorithm, &inst.v0, schedule, f, iters)?;
    t.attach_metrics(&inst.mdp, &inst.solution)?;
    Ok(t)
}

fn inputs(inst: &Instance, schedule: &Schedule) -> Result<BoundInputs> {
    BoundInputs::from_instance(&inst.mdp, &inst.v0, &inst.solution, schedule.clone())
}

fn metric(value: Option<f64>) -> f64 {
    value.unwrap_or(f64::NAN)
}

/// Runs certificate `kind` over `instances`.
pub fn certify(kind: CertKind, instances: &[Instance], cfg: &CertConfig) -> Result<Certificate> {
    if kind.needs_instances() && instances.is_empty() {
        return Err(Error::OutOfRange {
            what: "instances",
            detail: format!("certificate {} needs at least one instance", kind.name()),
        });
    }
    let schedule = cfg
        .schedule
        .clone()
        .unwrap_or_else(|| kind.default_schedule());
    schedule.validate()?;
    let tol = cfg.tol;
    let iters = cfg.iters;
    let mut out = Vec::new();
    match kind {
        CertKind::AncVi => {
            let mut t = Tally::new(
                "anc-vi bellman envelope",
                "||TV^k - V^k - g*|| <= 8/(k+1) ||V0 - h*|| + K/(k+1) ||g*||, k > K",
                tol,
            );
            for inst in instances {
                let b = inputs(inst, &schedule)?;
                let big_k = k_anc(&b);
                let trace = traced(inst, Algorithm::AncVi, &schedule, None, iters)?;
                for rec in trace.records.iter().skip(first_k_after(big_k)) {
                    let rhs = anc_vi_rate(rec.k, big_k, b.dist0, b.gnorm)?;
                    t.check(&inst.label, rec.k, metric(rec.metrics.bellman_sup_err), rhs);
                }
            }
            out.push(t.finish());
        }
        CertKind::RxVi => {
            let mut t = Tally::new(
                "rx-vi bellman envelope",
                "||TV^k - V^k - g*|| <= 4 ||V0 - h*|| / sqrt(pi (k - K)), k > K",
                tol,
            );
            for inst in instances {
                let b = inputs(inst, &schedule)?;
                let big_k = k_rx(&b);
                let trace = traced(inst, Algorithm::RxVi, &schedule, None, iters)?;
                for rec in trace.records.iter().skip(first_k_after(big_k)) {
                    let rhs = rx_vi_rate(rec.k, big_k, b.dist0)?;
                    t.check(&inst.label, rec.k, metric(rec.metrics.bellman_sup_err), rhs);
                }
            }
            out.push(t.finish());
        }
        CertKind::ViNormalized => {
            let mut t = Tally::new(
                "vi normalized iterates",
                "||(V^k - V0)/k - g*|| <= 2/k ||V0 - h*||, k >= 1",
                tol,
            );
            for inst in instances {
                let d = inputs(inst, &schedule)?.dist0;
                let trace = traced(inst, Algorithm::Vi, &Schedule::Zero, None, iters)?;
                for rec in trace.records.iter().skip(1) {
                    let rhs = vi_normalized_rate(rec.k, d)?;
                    t.check(&inst.label, rec.k, metric(rec.metrics.normalized_err), rhs);
                }
            }
            out.push(t.finish());
        }
        CertKind::PolicyError => {
            for (algorithm, sched) in [
                (Algorithm::RxVi, Schedule::Constant(0.5)),
                (Algorithm::AncVi, Schedule::Anchor),
            ] {
                let mut t = Tally::new(
                    &format!("{algorithm} policy error"),
                    "||g* - g^{pi_k}|| <= ||TV^k - V^k - g*||",
                    tol,
                );
                for inst in instances {
                    let trace = traced(inst, algorithm, &sched, None, iters)?;
                    for rec in &trace.records {
                        t.check(
                            &inst.label,
                            rec.k,
                            metric(rec.metrics.policy_err),
                            metric(rec.metrics.bellman_sup_err),
                        );
                    }
                }
                out.push(t.finish());
            }
        }
        CertKind::LowerBound => {
            let mut uni = Tally::new(
                "unichain lower bound",
                "||TV^k - V^k - g*|| >= 1/(k+1) ||V0 - h*||, k <= n-2",
                tol,
            );
            let mut multi = Tally::new(
                "multichain lower bound",
                "||(V^{k+1} - V0)/(k+1) - g*|| >= 2/(k+1) ||V0 - h*||, k <= n-3",
                tol,
            );
            for inst in instances {
                let n = inst.mdp.n_states();
                let d = inputs(inst, &schedule)?.dist0;
                match inst.family {
                    Some(Family::Unichain) => {
                        for (algorithm, sched) in [
                            (Algorithm::Vi, Schedule::Zero),
                            (Algorithm::RxVi, Schedule::Constant(0.5)),
                            (Algorithm::AncVi, Schedule::Anchor),
                        ] {
                            let trace = traced(inst, algorithm, &sched, None, iters.min(n - 2))?;
                            let label = format!("{} {algorithm}", inst.label);
                            for rec in &trace.records {
                                let lo = lower_bound(rec.k, d, Family::Unichain);
                                t_check_lower(
                                    &mut uni,
                                    &label,
                                    rec.k,
                                    metric(rec.metrics.bellman_sup_err),
                                    lo,
                                );
                            }
                        }
                    }
                    Some(Family::Multichain) => {
                        let trace =
                            traced(inst, Algorithm::Vi, &Schedule::Zero, None, iters.min(n - 2))?;
                        for rec in trace.records.iter().skip(1) {
                            let lo = lower_bound(rec.k - 1, d, Family::Multichain);
                            t_check_lower(
                                &mut multi,
                                &inst.label,
                                rec.k - 1,
                                metric(rec.metrics.normalized_err),
                                lo,
                            );
                        }
                    }
                    None => {
                        return Err(Error::OutOfRange {
                            what: "instance",
                            detail: format!("{} is not a worst-case family member", inst.label),
                        })
                    }
                }
            }
            out.push(uni.finish());
            out.push(multi.finish());
        }
        CertKind::Coefficients => {
            let table = km_coefficients(&schedule, cfg.k_max)?;
            let mut rows = Tally::new("coefficient row sums", "|sum_j a^k_j - 1| <= 1e-12", 0.0);
            for (k, row) in table.a.iter().enumerate() {
                rows.check("table", k, (row.iter().sum::<f64>() - 1.0).abs(), 1e-12);
            }
            out.push(rows.finish());
            let mut c = Tally::new(
                "coefficient bound",
                "c_{k+1,k} / (1 - l_{k+1}) <= 2 / sqrt(pi sum_{i<=k} l_i (1 - l_i))",
                tol,
            );
            for chk in &table.coefficient_checks {
                c.check("table", chk.k, chk.lhs, chk.rhs);
            }
            out.push(c.finish());
        }
        CertKind::Rvi => {
            let f = cfg.normalization;
            let mut rx = Tally::new(
                "rx-rvi bellman envelope",
                "||Th^k - h^k - g*|| <= 2 ||h0 - h*|| / sqrt(pi sum_{i<=k} l_i (1 - l_i))",
                tol,
            );
            let mut anc = Tally::new(
                "anc-rvi bellman envelope",
                "||Th^k - h^k - g*|| <= 2 sum_{i<=k} prod_{j>i}(1 - l_j) l_i^2 ||h0 - h*||, l_0 = 1",
                tol,
            );
            for inst in instances {
                let d = inputs(inst, &schedule)?.dist0;
                let trace = traced(inst, Algorithm::RxRvi, &schedule, Some(f), iters)?;
                let mut var = 0.0;
                for rec in trace.records.iter().skip(1) {
                    let l = schedule.lambda(rec.k);
                    var += l * (1.0 - l);
                    let rhs = 2.0 * d / (std::f64::consts::PI * var).sqrt();
                    rx.check(&inst.label, rec.k, metric(rec.metrics.bellman_sup_err), rhs);
                }
                let trace = traced(inst, Algorithm::AncRvi, &Schedule::Anchor, Some(f), iters)?;
                for rec in trace.records.iter().skip(1) {
                    let rhs = general_rates(&Schedule::Anchor, rec.k, 0.0, d, 0.0)?
                        .anc_bellman_fixed_gain;
                    anc.check(&inst.label, rec.k, metric(rec.metrics.bellman_sup_err), rhs);
                }
            }
            out.push(rx.finish());
            out.push(anc.finish());
        }
    }
    let pass = out.iter().all(|r| r.pass);
    Ok(Certificate {
        certificate: kind.name().into(),
        schedule: schedule.to_string(),
        instances: instances.len(),
        inequalities: out,
        pass,
    })
}

/// Lower bounds are checked as `rhs <= lhs`, i.e. with the roles swapped.
fn t_check_lower(t: &mut Tally, instance: &str, k: usize, value: f64, bound: f64) {
    t.check(instance, k, bound, value);
}

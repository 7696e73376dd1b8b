//! Closed-form convergence rates, worst-case lower bounds, burn-in constants
//! and the Krasnosel'skii–Mann coefficient tables.
//!
//! Notation: `d = ||V^0 - h*||_inf`, `G = ||g*||_inf`, `R = ||r||_inf`,
//! `eps` is the gap returned by [`crate::chain::epsilon_gap`] and `K` is a
//! burn-in index. Bounds stated "for k > K" are compared at `k > ceil(K)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chain::{epsilon_gap, MdpClass};
use crate::error::{check_len, Error, Result};
use crate::iterate::Algorithm;
use crate::mdp::{sup_error, Mdp, SolutionPair, ValueVector};
use crate::schedule::Schedule;

/// Factors below this switch running products to log space.
const LOG_SPACE_BELOW: f64 = 1e-8;

/// Largest table accepted by [`km_coefficients`].
pub const KM_MAX: usize = 300;

/// Problem constants entering the rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `||V^0 - h*||_inf`.
    pub dist0: f64,
    /// `||g*||_inf`.
    pub gnorm: f64,
    /// `||r||_inf`.
    pub rnorm: f64,
    /// `||V^0||_inf`.
    pub v0norm: f64,
    /// Gap `eps`, possibly `+inf`.
    #[serde(with = "extended_float")]
    pub eps: f64,
    pub schedule: Schedule,
}

impl BoundInputs {
    /// Computes every constant from an instance, a start point and a solution.
    pub fn from_instance(
        m: &Mdp,
        v0: &ValueVector,
        solution: &SolutionPair,
        schedule: Schedule,
    ) -> Result<Self> {
        check_len(m.n_states(), v0.len())?;
        Ok(BoundInputs {
            dist0: sup_error(v0, &solution.bias)?,
            gnorm: solution.gain.sup_norm(),
            rnorm: m.reward_sup_norm(),
            v0norm: v0.sup_norm(),
            eps: epsilon_gap(m, &solution.gain)?,
            schedule,
        })
    }
}

/// Serialises `+inf` as the string `"inf"` so JSON stays valid.
pub mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            Repr::Num(*x).serialize(s)
        } else if x.is_nan() {
            Repr::Text("nan".into()).serialize(s)
        } else if *x > 0.0 {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Text("-inf".into()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `K = (2R + 4||V^0|| + 16 d + 2G) / eps`, zero when `eps = +inf`.
pub fn k_rx(b: &BoundInputs) -> f64 {
    if b.eps.is_infinite() {
        return 0.0;
    }
    (2.0 * b.rnorm + 4.0 * b.v0norm + 16.0 * b.dist0 + 2.0 * b.gnorm) / b.eps
}

/// `K = (3R + 12 d + 3G) / eps`, zero when `eps = +inf`.
pub fn k_anc(b: &BoundInputs) -> f64 {
    if b.eps.is_infinite() {
        return 0.0;
    }
    (3.0 * b.rnorm + 12.0 * b.dist0 + 3.0 * b.gnorm) / b.eps
}

/// First iteration index covered by a "for k > K" bound.
pub fn first_k_after(big_k: f64) -> usize {
    big_k.ceil() as usize + 1
}

fn require_after(k: usize, big_k: f64) -> Result<()> {
    if k >= first_k_after(big_k) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "k",
            detail: format!("k = {k} must exceed K = {big_k}"),
        })
    }
}

/// Relaxed VI with `lambda = 1/2`: `4 d / sqrt(pi (k - K))`.
pub fn rx_vi_rate(k: usize, big_k: f64, dist0: f64) -> Result<f64> {
    require_after(k, big_k)?;
    Ok(4.0 * dist0 / (PI * (k as f64 - big_k)).sqrt())
}

/// Anchored VI with `lambda_k = 2/(k+2)`: `8 d/(k+1) + K G/(k+1)`.
pub fn anc_vi_rate(k: usize, big_k: f64, dist0: f64, gnorm: f64) -> Result<f64> {
    require_after(k, big_k)?;
    let k1 = k as f64 + 1.0;
    Ok(8.0 / k1 * dist0 + big_k / k1 * gnorm)
}

/// Normalised VI iterates: `2 d / k`.
pub fn vi_normalized_rate(k: usize, dist0: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "k",
            detail: "normalised rate needs k >= 1".into(),
        });
    }
    Ok(2.0 / k as f64 * dist0)
}

/// Which worst-case family a lower bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Unichain,
    Multichain,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unichain" => Ok(Family::Unichain),
            "multichain" => Ok(Family::Multichain),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

/// `d/(k+1)` on the unichain family and `2d/(k+1)` on the multichain one.
pub fn lower_bound(k: usize, dist0: f64, family: Family) -> f64 {
    let c = match family {
        Family::Unichain => 1.0,
        Family::Multichain => 2.0,
    };
    c * dist0 / (k as f64 + 1.0)
}

/// Running product of factors, switching to log space once a factor
/// falls below [`LOG_SPACE_BELOW`].
#[derive(Debug, Clone, Copy)]
struct Product {
    log: bool,
    value: f64,
}

impl Product {
    fn one() -> Self {
        Product {
            log: false,
            value: 1.0,
        }
    }

    fn mul(&mut self, x: f64) {
        if x == 0.0 {
            *self = Product {
                log: true,
                value: f64::NEG_INFINITY,
            };
            return;
        }
        if !self.log && x < LOG_SPACE_BELOW {
            self.log = true;
            self.value = self.value.ln();
        }
        if self.log {
            self.value += x.ln();
        } else {
            self.value *= x;
        }
    }

    fn get(&self) -> f64 {
        if self.log {
            self.value.exp()
        } else {
            self.value
        }
    }
}

/// `prod_{j=from..=to} f(j)`, the empty product being 1.
fn product(from: usize, to: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut p = Product::one();
    for j in from..=to {
        p.mul(f(j));
    }
    if from > to {
        1.0
    } else {
        p.get()
    }
}

/// The general-schedule rates at iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralRates {
    /// Relaxed VI, normalised iterates: `2(1 - prod l_i) / sum(1 - l_i) d`.
    pub rx_normalized: f64,
    /// Relaxed VI, Bellman error: `2 d / sqrt(pi sum_{i>K} l_i (1 - l_i))`.
    #[serde(with = "extended_float")]
    pub rx_bellman: f64,
    /// Anchored VI, normalised iterates:
    /// `2(1 - l_k) / sum_i prod_{j=i..k} (1 - l_j) d`.
    pub anc_normalized: f64,
    /// Anchored VI, Bellman error:
    /// `2(1 - sum_i l_i prod_{j=i..k}(1 - l_j)) d + 2 prod_{j=K..k}(1 - l_j) G`.
    pub anc_bellman: f64,
    /// Anchored VI, Bellman error when every policy fixes `g*`:
    /// `2 sum_{i=0..k} prod_{j=i+1..k}(1 - l_j) l_i^2 d`.
    pub anc_bellman_fixed_gain: f64,
}

/// Evaluates all general-schedule rates at `k >= 1`.
///
/// The anchored Bellman forms require a nonincreasing schedule.
pub fn general_rates(
    schedule: &Schedule,
    k: usize,
    big_k: f64,
    dist0: f64,
    gnorm: f64,
) -> Result<GeneralRates> {
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "k",
            detail: "rates need k >= 1".into(),
        });
    }
    if !schedule.is_nonincreasing_to(k) {
        return Err(Error::SchedulePreconditionViolated(format!(
            "{schedule} is not nonincreasing up to k = {k}"
        )));
    }
    let lam = schedule.prefix(k);
    let k0 = big_k.ceil().max(0.0) as usize;

    let prod_lambda = product(1, k, |i| lam[i]);
    let sum_one_minus: f64 = (1..=k).map(|i| 1.0 - lam[i]).sum();
    let rx_normalized = 2.0 * (1.0 - prod_lambda) / sum_one_minus * dist0;

    let var: f64 = (k0 + 1..=k).map(|i| lam[i] * (1.0 - lam[i])).sum();
    let rx_bellman = if var > 0.0 {
        2.0 * dist0 / (PI * var).sqrt()
    } else {
        f64::INFINITY
    };

    // Suffix products prod_{j=i..k}(1 - l_j), for i = k down to 1.
    let mut alpha = 0.0;
    let mut weighted = 0.0;
    let mut suffix = Product::one();
    for i in (1..=k).rev() {
        suffix.mul(1.0 - lam[i]);
        let p = suffix.get();
        alpha += p;
        weighted += lam[i] * p;
    }
    let anc_normalized = 2.0 * (1.0 - lam[k]) / alpha * dist0;
    // The anchored forms weight V^0 by lambda_0 = 1.
    let anc = |j: usize| if j == 0 { 1.0 } else { lam[j] };
    let tail = product(k0, k, |j| 1.0 - anc(j));
    let anc_bellman = 2.0 * (1.0 - weighted) * dist0 + 2.0 * tail * gnorm;

    let mut fixed = 0.0;
    let mut suffix = Product::one();
    for i in (0..=k).rev() {
        // suffix = prod_{j=i+1..k}(1 - l_j)
        fixed += suffix.get() * anc(i) * anc(i);
        suffix.mul(1.0 - anc(i));
    }
    let anc_bellman_fixed_gain = 2.0 * fixed * dist0;

    Ok(GeneralRates {
        rx_normalized,
        rx_bellman,
        anc_normalized,
        anc_bellman,
        anc_bellman_fixed_gain,
    })
}

/// Upper bound reported next to row `k` of a trace.
///
/// For VI this bounds the normalised iterate error; for the other
/// algorithms it bounds the Bellman error. `None` when no proved rate
/// applies to the configuration at this `k`.
pub fn trace_upper_bound(
    algorithm: Algorithm,
    k: usize,
    inputs: &BoundInputs,
    class: MdpClass,
) -> Option<f64> {
    if k == 0 {
        return None;
    }
    let d = inputs.dist0;
    let sched = &inputs.schedule;
    let gain_fixed = inputs.eps.is_infinite();
    match algorithm {
        Algorithm::Vi => vi_normalized_rate(k, d).ok(),
        Algorithm::RxVi => {
            if *sched == Schedule::Constant(0.5) {
                rx_vi_rate(k, k_rx(inputs), d).ok()
            } else if gain_fixed {
                rx_bellman_from_start(sched, k, d)
            } else {
                None
            }
        }
        Algorithm::AncVi => {
            if *sched == Schedule::Anchor {
                anc_vi_rate(k, k_anc(inputs), d, inputs.gnorm).ok()
            } else if gain_fixed {
                general_rates(sched, k, 0.0, d, inputs.gnorm)
                    .ok()
                    .map(|r| r.anc_bellman_fixed_gain)
            } else {
                None
            }
        }
        Algorithm::RxRvi if class.is_weakly_communicating() => rx_bellman_from_start(sched, k, d),
        Algorithm::AncRvi if class.is_weakly_communicating() => {
            general_rates(sched, k, 0.0, d, inputs.gnorm)
                .ok()
                .map(|r| r.anc_bellman_fixed_gain)
        }
        Algorithm::RxRvi | Algorithm::AncRvi => None,
    }
}

/// `2 d / sqrt(pi sum_{i=1..k} l_i (1 - l_i))`, without the monotonicity
/// requirement of the anchored forms.
fn rx_bellman_from_start(schedule: &Schedule, k: usize, dist0: f64) -> Option<f64> {
    let var: f64 = (1..=k)
        .map(|i| {
            let l = schedule.lambda(i);
            l * (1.0 - l)
        })
        .sum();
    (var > 0.0).then(|| 2.0 * dist0 / (PI * var).sqrt())
}

/// Coefficient tables `a^k_j` and `c_{k+1,k}` with their sanity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmTable {
    pub k_max: usize,
    /// `lambda_0 = 0, lambda_1, ..., lambda_{k_max + 1}`.
    pub lambdas: Vec<f64>,
    /// `a[k][j]` for `0 <= j <= k <= k_max + 1`.
    pub a: Vec<Vec<f64>>,
    /// `c_{k+1,k}` for `0 <= k <= k_max`.
    pub c_next: Vec<f64>,
    /// `max_k |sum_j a^k_j - 1|`.
    pub max_row_sum_error: f64,
    /// One entry per `1 <= k <= k_max`.
    pub coefficient_checks: Vec<CoefficientCheck>,
}

/// `(1 - l_{k+1})^{-1} c_{k+1,k}` against `2 / sqrt(pi sum_{i<=k} l_i (1 - l_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub k: usize,
    pub lhs: f64,
    #[serde(with = "extended_float")]
    pub rhs: f64,
    pub holds: bool,
}

impl KmTable {
    pub fn all_hold(&self, row_tol: f64) -> bool {
        self.max_row_sum_error <= row_tol && self.coefficient_checks.iter().all(|c| c.holds)
    }
}

/// `a^k_j = (prod_{i=j+1..k} l_i)(1 - l_j)` with `l_0 = 0`.
fn a_table(lam: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|k| {
            let mut row = vec![0.0; k + 1];
            let mut suffix = Product::one();
            for j in (0..=k).rev() {
                row[j] = suffix.get() * (1.0 - lam[j]);
                suffix.mul(lam[j]);
            }
            row
        })
        .collect()
}

/// Full `c` table, `c[k1][k2 + 1] = c_{k1,k2}` for `-1 <= k2 <= k1 <= n`,
/// using the one-step recursion in `k1` for the inner sum.
fn c_table(lam: &[f64], a: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 2]; n + 1];
    for row in c.iter_mut() {
        row[0] = 1.0;
    }
    for k2 in 0..=n {
        // s[j] = sum_{i=k2+1..k1} a^{k1}_i c_{i-1,j-1}, advanced in k1.
        let mut s = vec![0.0; k2 + 1];
        for k1 in k2 + 1..=n {
            let l = lam[k1];
            for (j, sj) in s.iter_mut().enumerate() {
                *sj = l * *sj + (1.0 - l) * c[k1 - 1][j];
            }
            c[k1][k2 + 1] = (0..=k2).map(|j| a[k2][j] * s[j]).sum();
        }
    }
    c
}

/// Coefficient table for `schedule` up to `k_max <= 300`.
pub fn km_coefficients(schedule: &Schedule, k_max: usize) -> Result<KmTable> {
    if k_max > KM_MAX {
        return Err(Error::OutOfRange {
            what: "k_max",
            detail: format!("{k_max} > {KM_MAX}"),
        });
    }
    schedule.validate()?;
    let n = k_max + 1;
    let lam = schedule.prefix(n);
    let a = a_table(&lam, n);
    let c = c_table(&lam, &a, n);
    let max_row_sum_error = a
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let c_next: Vec<f64> = (0..=k_max).map(|k| c[k + 1][k + 1]).collect();
    let mut var = 0.0;
    let mut coefficient_checks = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        var += lam[k] * (1.0 - lam[k]);
        let lhs = c_next[k] / (1.0 - lam[k + 1]);
        let rhs = if var > 0.0 {
            2.0 / (PI * var).sqrt()
        } else {
            f64::INFINITY
        };
        coefficient_checks.push(CoefficientCheck {
            k,
            lhs,
            rhs,
            holds: lhs <= rhs,
        });
    }
    Ok(KmTable {
        k_max,
        lambdas: lam,
        a,
        c_next,
        max_row_sum_error,
        coefficient_checks,
    })
}

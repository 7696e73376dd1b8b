//! MDP data model and the exact Bellman operators.
//!
//! An [`Mdp`] is only ever built from a validated [`MdpFile`]: every
//! transition row is checked to sum to one within [`ROW_SUM_TOL`] and is then
//! renormalised exactly once, so structural questions (which edges exist)
//! can use `p > 0` without a tolerance.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Tolerance on transition row sums accepted at load time.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A real vector indexed by states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        ValueVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ValueVector(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self - other` componentwise.
    pub fn sub(&self, other: &ValueVector) -> ValueVector {
        debug_assert_eq!(self.len(), other.len());
        ValueVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + other` componentwise.
    pub fn add(&self, other: &ValueVector) -> ValueVector {
        debug_assert_eq!(self.len(), other.len());
        ValueVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn shift(&self, c: f64) -> ValueVector {
        ValueVector(self.0.iter().map(|x| x + c).collect())
    }

    pub fn scale(&self, c: f64) -> ValueVector {
        ValueVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        ValueVector(v)
    }
}

impl Index<usize> for ValueVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ValueVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// A mapping state index -> action index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterministicPolicy(Vec<usize>);

impl DeterministicPolicy {
    pub fn new(action_of: Vec<usize>) -> Self {
        DeterministicPolicy(action_of)
    }

    /// The policy choosing action `a` everywhere.
    pub fn uniform(n_states: usize, a: usize) -> Self {
        DeterministicPolicy(vec![a; n_states])
    }

    pub fn action(&self, s: usize) -> usize {
        self.0[s]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn check(&self, m: &Mdp) -> Result<()> {
        check_len(m.n_states(), self.len())?;
        if let Some(&a) = self.0.iter().find(|&&a| a >= m.n_actions()) {
            return Err(Error::OutOfRange {
                what: "action index",
                detail: format!("{a} >= n_actions {}", m.n_actions()),
            });
        }
        Ok(())
    }
}

/// A solution `(g*, h*, pi*)` of the modified Bellman equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPair {
    pub gain: ValueVector,
    pub bias: ValueVector,
    pub attaining_policy: DeterministicPolicy,
}

/// One violated invariant found by [`MdpFile::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    RowNotStochastic {
        state: usize,
        action: usize,
        sum: f64,
    },
    NegativeProbability {
        state: usize,
        action: usize,
        next: usize,
    },
    NonFiniteProbability {
        state: usize,
        action: usize,
        next: usize,
    },
    NonFiniteReward {
        state: usize,
        action: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::RowNotStochastic { state, action, sum } => {
                write!(f, "row ({state},{action}) sums to {sum}")
            }
            Violation::NegativeProbability {
                state,
                action,
                next,
            } => {
                write!(f, "negative probability at ({state},{action},{next})")
            }
            Violation::NonFiniteProbability {
                state,
                action,
                next,
            } => {
                write!(f, "non-finite probability at ({state},{action},{next})")
            }
            Violation::NonFiniteReward { state, action } => {
                write!(f, "non-finite reward at ({state},{action})")
            }
        }
    }
}

/// Every violation found while validating an MDP description.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// On-disk MDP description.
///
/// `transitions[s][a][s']` and `rewards[s][a]`; this is the JSON file format
/// read by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpFile {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<f64>>,
}

impl MdpFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("MdpFile serialises")
    }

    /// Checks every MDP invariant and reports all violations at once.
    pub fn validate(&self) -> std::result::Result<(), ValidationReport> {
        let mut violations = Vec::new();
        if self.n_states == 0 {
            violations.push(Violation::Shape("n_states must be positive".into()));
        }
        if self.n_actions == 0 {
            violations.push(Violation::Shape("n_actions must be positive".into()));
        }
        if self.transitions.len() != self.n_states {
            violations.push(Violation::Shape(format!(
                "transitions has {} states, expected {}",
                self.transitions.len(),
                self.n_states
            )));
        }
        if self.rewards.len() != self.n_states {
            violations.push(Violation::Shape(format!(
                "rewards has {} states, expected {}",
                self.rewards.len(),
                self.n_states
            )));
        }
        if !violations.is_empty() {
            return Err(ValidationReport { violations });
        }
        for s in 0..self.n_states {
            if self.transitions[s].len() != self.n_actions {
                violations.push(Violation::Shape(format!(
                    "transitions[{s}] has {} actions, expected {}",
                    self.transitions[s].len(),
                    self.n_actions
                )));
                continue;
            }
            if self.rewards[s].len() != self.n_actions {
                violations.push(Violation::Shape(format!(
                    "rewards[{s}] has {} actions, expected {}",
                    self.rewards[s].len(),
                    self.n_actions
                )));
            }
            for a in 0..self.n_actions {
                let row = &self.transitions[s][a];
                if row.len() != self.n_states {
                    violations.push(Violation::Shape(format!(
                        "transitions[{s}][{a}] has length {}, expected {}",
                        row.len(),
                        self.n_states
                    )));
                    continue;
                }
                let mut row_ok = true;
                for (next, &p) in row.iter().enumerate() {
                    if !p.is_finite() {
                        violations.push(Violation::NonFiniteProbability {
                            state: s,
                            action: a,
                            next,
                        });
                        row_ok = false;
                    } else if p < 0.0 {
                        violations.push(Violation::NegativeProbability {
                            state: s,
                            action: a,
                            next,
                        });
                        row_ok = false;
                    }
                }
                if row_ok {
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        violations.push(Violation::RowNotStochastic {
                            state: s,
                            action: a,
                            sum,
                        });
                    }
                }
            }
            if self.rewards[s].len() == self.n_actions {
                for (a, r) in self.rewards[s].iter().enumerate() {
                    if !r.is_finite() {
                        violations.push(Violation::NonFiniteReward {
                            state: s,
                            action: a,
                        });
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }
}

/// A validated finite MDP `(S, A, P, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    n_states: usize,
    n_actions: usize,
    // [s][a][s'] flattened
    transition: Vec<f64>,
    // [s][a] flattened
    reward: Vec<f64>,
}

impl Mdp {
    /// Validates and renormalises.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<Vec<Vec<f64>>>,
        rewards: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Mdp::try_from(MdpFile {
            n_states,
            n_actions,
            transitions,
            rewards,
        })
    }

    /// Single-action MDP from a transition matrix and reward vector.
    pub fn markov_reward_process(p: Vec<Vec<f64>>, r: Vec<f64>) -> Result<Self> {
        let n = p.len();
        Mdp::new(
            n,
            1,
            p.into_iter().map(|row| vec![row]).collect(),
            r.into_iter().map(|x| vec![x]).collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Mdp::try_from(MdpFile::from_json(text)?)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// `P(. | s, a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    /// `max |r(s,a)|`.
    pub fn reward_sup_norm(&self) -> f64 {
        self.reward.iter().fold(0.0, |acc, r| acc.max(r.abs()))
    }

    /// Number of deterministic policies, `|A|^|S|`, as a float (may be huge).
    pub fn policy_count(&self) -> f64 {
        (self.n_actions as f64).powi(self.n_states as i32)
    }

    /// `r(s,a) + sum_s' P(s'|s,a) v(s')`, summed in state order.
    #[inline]
    pub fn q_value(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        let row = self.row(s, a);
        let mut acc = 0.0;
        for (p, x) in row.iter().zip(v) {
            acc += p * x;
        }
        self.reward(s, a) + acc
    }

    /// `sum_s' P(s'|s,a) v(s')`.
    pub fn expect(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        self.row(s, a).iter().zip(v).map(|(p, x)| p * x).sum()
    }

    pub fn policy_reward(&self, pi: &DeterministicPolicy) -> ValueVector {
        ValueVector(
            (0..self.n_states)
                .map(|s| self.reward(s, pi.action(s)))
                .collect(),
        )
    }

    pub fn to_file(&self) -> MdpFile {
        MdpFile {
            n_states: self.n_states,
            n_actions: self.n_actions,
            transitions: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| self.row(s, a).to_vec())
                        .collect()
                })
                .collect(),
            rewards: (0..self.n_states)
                .map(|s| (0..self.n_actions).map(|a| self.reward(s, a)).collect())
                .collect(),
        }
    }

    fn check_vec(&self, v: &ValueVector) -> Result<()> {
        check_len(self.n_states, v.len())
    }
}

impl TryFrom<MdpFile> for Mdp {
    type Error = Error;

    fn try_from(file: MdpFile) -> Result<Self> {
        file.validate().map_err(Error::InvalidMdp)?;
        let (n, na) = (file.n_states, file.n_actions);
        let mut transition = Vec::with_capacity(n * na * n);
        let mut reward = Vec::with_capacity(n * na);
        for (rows, rs) in file.transitions.into_iter().zip(file.rewards) {
            for row in rows {
                let sum: f64 = row.iter().sum();
                transition.extend(row.into_iter().map(|p| p / sum));
            }
            reward.extend(rs);
        }
        Ok(Mdp {
            n_states: n,
            n_actions: na,
            transition,
            reward,
        })
    }
}

/// Checks an on-disk description without building an [`Mdp`].
pub fn validate_mdp(file: &MdpFile) -> std::result::Result<(), ValidationReport> {
    file.validate()
}

/// `T^pi v = r^pi + P^pi v`.
pub fn bellman_consistency(
    m: &Mdp,
    pi: &DeterministicPolicy,
    v: &ValueVector,
) -> Result<ValueVector> {
    m.check_vec(v)?;
    pi.check(m)?;
    Ok(ValueVector(
        (0..m.n_states)
            .map(|s| m.q_value(s, pi.action(s), v.as_slice()))
            .collect(),
    ))
}

/// `T v` together with the greedy policy; ties go to the lowest action index.
pub fn bellman_optimality(m: &Mdp, v: &ValueVector) -> Result<(ValueVector, DeterministicPolicy)> {
    m.check_vec(v)?;
    Ok(optimality_unchecked(m, v.as_slice()))
}

pub(crate) fn optimality_unchecked(m: &Mdp, v: &[f64]) -> (ValueVector, DeterministicPolicy) {
    let mut tv = Vec::with_capacity(m.n_states);
    let mut greedy = Vec::with_capacity(m.n_states);
    for s in 0..m.n_states {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for a in 0..m.n_actions {
            let q = m.q_value(s, a, v);
            if q > best {
                best = q;
                arg = a;
            }
        }
        tv.push(best);
        greedy.push(arg);
    }
    (ValueVector(tv), DeterministicPolicy(greedy))
}

/// `T v - v`.
pub fn bellman_residual(m: &Mdp, v: &ValueVector) -> Result<ValueVector> {
    let (tv, _) = bellman_optimality(m, v)?;
    Ok(tv.sub(v))
}

/// `max_s |x[s] - target[s]|`.
pub fn sup_error(x: &ValueVector, target: &ValueVector) -> Result<f64> {
    check_len(target.len(), x.len())?;
    Ok(x.iter()
        .zip(target.iter())
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

/// `max_i x_i - min_i x_i`.
pub fn span_seminorm(x: &ValueVector) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.max() - x.min()
}

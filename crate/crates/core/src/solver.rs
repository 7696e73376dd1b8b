//! Ground-truth solutions `(g*, h*, pi*)` of the modified Bellman equations
//!
//! ```text
//! max_pi P^pi g = g,    max_pi { r^pi + P^pi h } = h + g,
//! ```
//!
//! with one deterministic policy attaining both maxima.
//!
//! `g*` is the componentwise maximum of all deterministic policy gains.
//! Candidate biases come from gain-optimal policies: `h = D r^pi` plus one
//! free offset per recurrent class of `pi`, spread over the states that
//! are absorbed into it. The offsets are chosen by a small linear program
//! that enforces the bias equation at every other action while minimising
//! `||h||_inf` (plus a tiny `l1` penalty on the offsets so the optimum is
//! unique). A candidate is accepted only after [`verify_solution`].

use serde::{Deserialize, Serialize};

use crate::chain::{all_policies, PolicyStructure};
use crate::error::{check_len, Error, Result};
use crate::lp::{minimize, Constraint, LpOutcome, Rel};
use crate::mdp::{sup_error, DeterministicPolicy, Mdp, SolutionPair, ValueVector};

/// Tolerance used to accept solver output.
pub const SOLVE_TOL: f64 = 1e-9;

/// Gains within this distance of `g*` count as optimal.
const GAIN_MATCH_TOL: f64 = 1e-9;

/// Right-hand-side relaxation of the offset program, absorbing round-off in
/// constraints that hold with equality.
const LP_SLACK: f64 = 1e-11;

const OFFSET_PENALTY: f64 = 1e-6;

/// Outcome of [`verify_solution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    /// `max_s |max_a P g - g|`.
    pub gain_error: f64,
    /// `max_s |max_a (r + P h) - h - g|`.
    pub bias_error: f64,
    /// Lowest-index policy attaining both maxima within `tol`, if any.
    pub attaining_policy: Option<DeterministicPolicy>,
}

/// Checks `(g, h)` against the modified Bellman equations.
pub fn verify_solution(m: &Mdp, g: &ValueVector, h: &ValueVector, tol: f64) -> Result<Verdict> {
    check_len(m.n_states(), g.len())?;
    check_len(m.n_states(), h.len())?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange {
            what: "tolerance",
            detail: format!("{tol} is not positive"),
        });
    }
    let (g, h) = (g.as_slice(), h.as_slice());
    let mut gain_error: f64 = 0.0;
    let mut bias_error: f64 = 0.0;
    let mut policy = Some(Vec::with_capacity(m.n_states()));
    for s in 0..m.n_states() {
        let pg: Vec<f64> = (0..m.n_actions()).map(|a| m.expect(s, a, g)).collect();
        let q: Vec<f64> = (0..m.n_actions()).map(|a| m.q_value(s, a, h)).collect();
        let pg_max = pg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q_max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gain_error = gain_error.max((pg_max - g[s]).abs());
        bias_error = bias_error.max((q_max - h[s] - g[s]).abs());
        let both = (0..m.n_actions()).find(|&a| pg[a] >= pg_max - tol && q[a] >= q_max - tol);
        match (both, policy.as_mut()) {
            (Some(a), Some(p)) => p.push(a),
            _ => policy = None,
        }
    }
    let attaining_policy = policy.map(DeterministicPolicy::new);
    let holds = gain_error <= tol && bias_error <= tol && attaining_policy.is_some();
    Ok(Verdict {
        holds,
        gain_error,
        bias_error,
        attaining_policy,
    })
}

/// Componentwise maximum of all deterministic policy gains.
pub fn optimal_gain(m: &Mdp) -> Result<ValueVector> {
    let mut best = vec![f64::NEG_INFINITY; m.n_states()];
    for pi in all_policies(m)? {
        let g = PolicyStructure::new(m, &pi)?.gain();
        for (b, x) in best.iter_mut().zip(g.iter()) {
            *b = b.max(*x);
        }
    }
    Ok(ValueVector::new(best))
}

/// Solves the modified Bellman equations by policy enumeration.
pub fn solve_modified_bellman(m: &Mdp) -> Result<SolutionPair> {
    let g_star = optimal_gain(m)?;
    for pi in all_policies(m)? {
        let structure = PolicyStructure::new(m, &pi)?;
        if sup_error(&structure.gain(), &g_star)? > GAIN_MATCH_TOL {
            continue;
        }
        let Some(h) = bias_candidate(m, &pi, &structure, &g_star)? else {
            continue;
        };
        let verdict = verify_solution(m, &g_star, &h, SOLVE_TOL)?;
        if verdict.holds {
            return Ok(SolutionPair {
                gain: g_star,
                bias: h,
                attaining_policy: verdict.attaining_policy.expect("holds implies a policy"),
            });
        }
    }
    Err(Error::NoVerifiedCandidate)
}

/// `D r^pi + sum_c theta_c a_c` with offsets from the minimax program, or
/// `None` when the program is infeasible.
fn bias_candidate(
    m: &Mdp,
    pi: &DeterministicPolicy,
    structure: &PolicyStructure,
    g: &ValueVector,
) -> Result<Option<ValueVector>> {
    let n = m.n_states();
    let base = structure.bias()?;
    let basis = &structure.absorption;
    let c = basis.len();
    // variables: theta_plus[0..c], theta_minus[0..c], u
    let nv = 2 * c + 1;
    let offset_coeffs = |weights: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut row = vec![0.0; nv];
        for k in 0..c {
            let w = weights(k);
            row[k] = w;
            row[c + k] = -w;
        }
        row
    };
    let mut rows = Vec::new();
    for s in 0..n {
        let mut upper = offset_coeffs(&|k| basis[k][s]);
        upper[2 * c] = -1.0;
        rows.push(Constraint {
            coeffs: upper,
            rel: Rel::Le,
            rhs: -base[s],
        });
        let mut lower = offset_coeffs(&|k| -basis[k][s]);
        lower[2 * c] = -1.0;
        rows.push(Constraint {
            coeffs: lower,
            rel: Rel::Le,
            rhs: base[s],
        });
    }
    for s in 0..n {
        for a in 0..m.n_actions() {
            if a == pi.action(s) {
                continue;
            }
            // r(s,a) + P(s,a) h <= h(s) + g(s)
            let coeffs = offset_coeffs(&|k| m.expect(s, a, &basis[k]) - basis[k][s]);
            let rhs = g[s] + base[s] - m.q_value(s, a, base.as_slice()) + LP_SLACK;
            rows.push(Constraint {
                coeffs,
                rel: Rel::Le,
                rhs,
            });
        }
    }
    let mut cost = vec![OFFSET_PENALTY; nv];
    cost[2 * c] = 1.0;
    let x = match minimize(&cost, &rows) {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible | LpOutcome::Unbounded => return Ok(None),
    };
    let h = (0..n)
        .map(|s| base[s] + (0..c).map(|k| (x[k] - x[c + k]) * basis[k][s]).sum::<f64>())
        .collect();
    Ok(Some(ValueVector::new(h)))
}

//! Chain structure of policies: recurrent classes, MDP classification,
//! Cesàro limits, gains, deviation matrices and the ε gap.
//!
//! Structural questions use the exact edge relation `p > 0`; transition
//! rows were renormalised once when the [`Mdp`] was built.
//!
//! Weak communication is decided by exhaustive policy enumeration: `R` is the
//! set of states recurrent under at least one deterministic policy, and the
//! MDP is weakly communicating iff the states of `R` are mutually accessible
//! in the union graph (edge `s -> s'` iff some action reaches `s'` with
//! positive probability). States outside `R` are transient under every
//! policy by construction of `R`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mdp::{sup_error, DeterministicPolicy, Mdp, ValueVector};

/// Default cap on `|A|^|S|` for enumeration-based routines.
pub const DEFAULT_MAX_POLICIES: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_MAX_POLICIES`].
pub const MAX_POLICIES_ENV: &str = "AVGMDP_MAX_POLICIES";

/// A policy counts as fixing `g*` when `||P^pi g* - g*|| <= GAP_FIX_TOL`.
pub const GAP_FIX_TOL: f64 = 1e-10;

const STOCHASTIC_TOL: f64 = 1e-10;

/// Current enumeration limit (environment override or the default).
pub fn enumeration_limit() -> u64 {
    std::env::var(MAX_POLICIES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_POLICIES)
}

/// Iterator over all deterministic policies in lexicographic order of the
/// action vector (last state varies fastest).
#[derive(Debug, Clone)]
pub struct PolicyIter {
    n_actions: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for PolicyIter {
    type Item = DeterministicPolicy;

    fn next(&mut self) -> Option<DeterministicPolicy> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        let mut carried = true;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.n_actions {
                carried = false;
                break;
            }
            succ[i] = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(DeterministicPolicy::new(current))
    }
}

/// All deterministic policies of `m`, or [`Error::TooManyPolicies`] when
/// `|A|^|S|` exceeds [`enumeration_limit`].
pub fn all_policies(m: &Mdp) -> Result<PolicyIter> {
    let count = m.policy_count();
    let limit = enumeration_limit();
    if count > limit as f64 {
        return Err(Error::TooManyPolicies { count, limit });
    }
    Ok(PolicyIter {
        n_actions: m.n_actions(),
        next: Some(vec![0; m.n_states()]),
    })
}

/// Recurrent classes and transient states of one stochastic matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDecomposition {
    pub recurrent_classes: Vec<Vec<usize>>,
    pub transient_states: Vec<usize>,
}

impl ChainDecomposition {
    /// Class index of every state, `None` for transient states.
    pub fn class_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, class) in self.recurrent_classes.iter().enumerate() {
            for &s in class {
                out[s] = Some(c);
            }
        }
        out
    }
}

/// MDP classes, nested as Unichain ⊂ WeaklyCommunicating ⊂ Multichain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MdpClass {
    Unichain,
    WeaklyCommunicatingNotUnichain,
    MultichainGeneral,
}

impl MdpClass {
    pub fn is_weakly_communicating(self) -> bool {
        !matches!(self, MdpClass::MultichainGeneral)
    }
}

fn reachable_from(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn adjacency<'a>(n: usize, rows: impl Fn(usize) -> &'a [f64]) -> Vec<Vec<usize>> {
    (0..n)
        .map(|s| {
            rows(s)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(t, _)| t)
                .collect()
        })
        .collect()
}

/// Closed strongly connected components are recurrent, the rest transient.
fn decompose_graph(adj: &[Vec<usize>]) -> ChainDecomposition {
    let n = adj.len();
    let reach: Vec<Vec<bool>> = (0..n).map(|s| reachable_from(adj, s)).collect();
    let mut assigned = vec![false; n];
    let mut recurrent_classes = Vec::new();
    let mut transient_states = Vec::new();
    for s in 0..n {
        if assigned[s] {
            continue;
        }
        // s is recurrent iff everything reachable from s reaches back.
        let closed = (0..n).all(|t| !reach[s][t] || reach[t][s]);
        if closed {
            let class: Vec<usize> = (0..n).filter(|&t| reach[s][t]).collect();
            for &t in &class {
                assigned[t] = true;
            }
            recurrent_classes.push(class);
        } else {
            assigned[s] = true;
            transient_states.push(s);
        }
    }
    ChainDecomposition {
        recurrent_classes,
        transient_states,
    }
}

/// Decomposes `P^pi` into recurrent classes and transient states.
pub fn policy_chain(m: &Mdp, pi: &DeterministicPolicy) -> Result<ChainDecomposition> {
    pi.check(m)?;
    let adj = adjacency(m.n_states(), |s| m.row(s, pi.action(s)));
    Ok(decompose_graph(&adj))
}

/// Decomposes an arbitrary nonnegative square matrix by its positive entries.
pub fn matrix_chain(p: &DMatrix<f64>) -> ChainDecomposition {
    let n = p.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|s| (0..n).filter(|&t| p[(s, t)] > 0.0).collect())
        .collect();
    decompose_graph(&adj)
}

/// Classifies `m` by enumerating its deterministic policies.
pub fn classify(m: &Mdp) -> Result<MdpClass> {
    let n = m.n_states();
    let mut unichain = true;
    let mut recurrent_somewhere = vec![false; n];
    for pi in all_policies(m)? {
        let dec = policy_chain(m, &pi)?;
        if dec.recurrent_classes.len() != 1 {
            unichain = false;
        }
        for class in &dec.recurrent_classes {
            for &s in class {
                recurrent_somewhere[s] = true;
            }
        }
    }
    if unichain {
        return Ok(MdpClass::Unichain);
    }
    let union: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            (0..n)
                .filter(|&t| (0..m.n_actions()).any(|a| m.row(s, a)[t] > 0.0))
                .collect()
        })
        .collect();
    let members: Vec<usize> = (0..n).filter(|&s| recurrent_somewhere[s]).collect();
    let communicating = members.iter().all(|&s| {
        let seen = reachable_from(&union, s);
        members.iter().all(|&t| seen[t])
    });
    Ok(if communicating {
        MdpClass::WeaklyCommunicatingNotUnichain
    } else {
        MdpClass::MultichainGeneral
    })
}

/// Builds the dense matrix `P^pi`.
pub fn policy_matrix(m: &Mdp, pi: &DeterministicPolicy) -> DMatrix<f64> {
    let n = m.n_states();
    DMatrix::from_fn(n, n, |s, t| m.row(s, pi.action(s))[t])
}

fn check_stochastic(p: &DMatrix<f64>) -> Result<()> {
    check_len(p.nrows(), p.ncols())?;
    for i in 0..p.nrows() {
        let row = p.row(i);
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&x| x < 0.0 || !x.is_finite()) || (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { row: i, sum });
        }
    }
    Ok(())
}

/// Stationary distribution of the closed class `class` of `p`.
fn stationary(p: &DMatrix<f64>, class: &[usize]) -> Result<Vec<f64>> {
    let k = class.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    // pi^T (P_C - I) = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = DMatrix::from_fn(k, k, |i, j| {
        let v = p[(class[j], class[i])];
        if i == j {
            v - 1.0
        } else {
            v
        }
    });
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(k);
    b[k - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::SingularSystem("stationary distribution"))?;
    Ok(x.iter().copied().collect())
}

/// Cesàro limit `P* = lim (1/k) sum_{i<k} P^i`, computed structurally.
pub fn cesaro_limit(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_stochastic(p)?;
    let dec = matrix_chain(p);
    Ok(cesaro_from_parts(p, &dec)?.0)
}

/// Returns `P*` and the absorption probability of every state into every
/// recurrent class (`absorption[c][s]`).
pub(crate) fn cesaro_from_parts(
    p: &DMatrix<f64>,
    dec: &ChainDecomposition,
) -> Result<(DMatrix<f64>, Vec<Vec<f64>>)> {
    let n = p.nrows();
    let mut star = DMatrix::zeros(n, n);
    let mut absorption = vec![vec![0.0; n]; dec.recurrent_classes.len()];
    let transient = &dec.transient_states;
    let lu = if transient.is_empty() {
        None
    } else {
        let t = transient.len();
        let m = DMatrix::from_fn(t, t, |i, j| {
            let v = -p[(transient[i], transient[j])];
            if i == j {
                1.0 + v
            } else {
                v
            }
        });
        Some(m.lu())
    };
    for (c, class) in dec.recurrent_classes.iter().enumerate() {
        let pi = stationary(p, class)?;
        for &s in class {
            absorption[c][s] = 1.0;
            for (j, &t) in class.iter().enumerate() {
                star[(s, t)] = pi[j];
            }
        }
        if let Some(lu) = &lu {
            let rhs = nalgebra::DVector::from_iterator(
                transient.len(),
                transient
                    .iter()
                    .map(|&s| class.iter().map(|&t| p[(s, t)]).sum::<f64>()),
            );
            let x = lu
                .solve(&rhs)
                .ok_or(Error::SingularSystem("absorption probabilities"))?;
            for (i, &s) in transient.iter().enumerate() {
                absorption[c][s] = x[i];
                for (j, &t) in class.iter().enumerate() {
                    star[(s, t)] = x[i] * pi[j];
                }
            }
        }
    }
    Ok((star, absorption))
}

/// Everything the exact solver needs about one policy.
#[derive(Debug, Clone)]
pub struct PolicyStructure {
    pub decomposition: ChainDecomposition,
    pub matrix: DMatrix<f64>,
    pub cesaro: DMatrix<f64>,
    /// `absorption[c][s]`: probability of ending in recurrent class `c` from `s`.
    pub absorption: Vec<Vec<f64>>,
    pub reward: ValueVector,
}

impl PolicyStructure {
    pub fn new(m: &Mdp, pi: &DeterministicPolicy) -> Result<Self> {
        let decomposition = policy_chain(m, pi)?;
        let matrix = policy_matrix(m, pi);
        let (cesaro, absorption) = cesaro_from_parts(&matrix, &decomposition)?;
        Ok(PolicyStructure {
            decomposition,
            matrix,
            cesaro,
            absorption,
            reward: m.policy_reward(pi),
        })
    }

    pub fn gain(&self) -> ValueVector {
        mat_vec(&self.cesaro, &self.reward)
    }

    pub fn deviation(&self) -> Result<DMatrix<f64>> {
        deviation_from(&self.matrix, &self.cesaro)
    }

    /// `D r^pi`.
    pub fn bias(&self) -> Result<ValueVector> {
        Ok(mat_vec(&self.deviation()?, &self.reward))
    }
}

pub(crate) fn mat_vec(a: &DMatrix<f64>, v: &ValueVector) -> ValueVector {
    let n = a.nrows();
    ValueVector::new(
        (0..n)
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
            .collect(),
    )
}

fn deviation_from(p: &DMatrix<f64>, star: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = p.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let fundamental = &eye - p + star;
    let rhs = &eye - star;
    fundamental
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem("deviation matrix"))
}

/// `g^pi = P*^pi r^pi`.
pub fn policy_gain(m: &Mdp, pi: &DeterministicPolicy) -> Result<ValueVector> {
    Ok(PolicyStructure::new(m, pi)?.gain())
}

/// `D = (I - P^pi + P*^pi)^{-1} (I - P*^pi)`.
pub fn deviation_matrix(m: &Mdp, pi: &DeterministicPolicy) -> Result<DMatrix<f64>> {
    PolicyStructure::new(m, pi)?.deviation()
}

/// `||g^pi - g*||_inf`.
pub fn policy_error(m: &Mdp, pi: &DeterministicPolicy, g_star: &ValueVector) -> Result<f64> {
    check_len(m.n_states(), g_star.len())?;
    sup_error(&policy_gain(m, pi)?, g_star)
}

/// `ε = inf { ||P^pi g* - g*||_inf : pi deterministic, P^pi g* != g* }`,
/// `+inf` when every policy fixes `g*`.
///
/// `P^pi g* - g*` at state `s` only depends on `pi(s)`, so the infimum over
/// `|A|^|S|` policies reduces to a scan of the per-pair deviations.
pub fn epsilon_gap(m: &Mdp, g_star: &ValueVector) -> Result<f64> {
    check_len(m.n_states(), g_star.len())?;
    let g = g_star.as_slice();
    let dev: Vec<Vec<f64>> = (0..m.n_states())
        .map(|s| {
            (0..m.n_actions())
                .map(|a| (m.expect(s, a, g) - g[s]).abs())
                .collect()
        })
        .collect();
    let min_per_state: Vec<f64> = dev
        .iter()
        .map(|d| d.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let forced = min_per_state.iter().copied().fold(0.0, f64::max);
    if forced > GAP_FIX_TOL {
        // No policy fixes g*; the best one takes the smallest deviation everywhere.
        return Ok(forced);
    }
    Ok(dev
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d > GAP_FIX_TOL)
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{branch_mdp, two_state_switch};
    use crate::worst_case::{make_multichain_family, make_unichain_family};

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn assert_mat_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn policy_iter_counts() {
        let m = branch_mdp();
        let all: Vec<_> = all_policies(&m).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].as_slice(), &[0, 0, 0]);
        assert_eq!(all[1].as_slice(), &[0, 0, 1]);
        assert_eq!(all[7].as_slice(), &[1, 1, 1]);
    }

    #[test]
    fn chain_of_families() {
        let (m, _) = make_unichain_family(4, None).unwrap();
        let dec = policy_chain(&m, &DeterministicPolicy::uniform(4, 0)).unwrap();
        assert_eq!(dec.recurrent_classes, vec![vec![0, 1, 2]]);
        assert_eq!(dec.transient_states, vec![3]);

        let (m, _) = make_multichain_family(5, None).unwrap();
        let dec = policy_chain(&m, &DeterministicPolicy::uniform(5, 0)).unwrap();
        assert_eq!(dec.recurrent_classes, vec![vec![0], vec![4]]);
        assert_eq!(dec.transient_states, vec![1, 2, 3]);
    }

    #[test]
    fn identity_chain_has_singleton_classes() {
        let n = 4;
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let m = Mdp::markov_reward_process(p, vec![0.0; n]).unwrap();
        let dec = policy_chain(&m, &DeterministicPolicy::uniform(n, 0)).unwrap();
        assert_eq!(dec.recurrent_classes.len(), n);
        assert!(dec.transient_states.is_empty());
    }

    #[test]
    fn classify_examples() {
        for n in 4..=12 {
            let (m, _) = make_unichain_family(n, None).unwrap();
            assert_eq!(classify(&m).unwrap(), MdpClass::Unichain);
            let (m, _) = make_multichain_family(n, None).unwrap();
            assert_eq!(classify(&m).unwrap(), MdpClass::MultichainGeneral);
        }
        assert_eq!(
            classify(&two_state_switch()).unwrap(),
            MdpClass::WeaklyCommunicatingNotUnichain
        );
        assert_eq!(
            classify(&branch_mdp()).unwrap(),
            MdpClass::MultichainGeneral
        );
    }

    #[test]
    fn cesaro_examples() {
        let eye = DMatrix::<f64>::identity(3, 3);
        assert_mat_close(&cesaro_limit(&eye).unwrap(), &eye, 0.0);

        let cyc = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_mat_close(
            &cesaro_limit(&cyc).unwrap(),
            &mat(&[&[0.5, 0.5], &[0.5, 0.5]]),
            1e-15,
        );

        let absorb = mat(&[&[1.0, 0.0], &[0.5, 0.5]]);
        assert_mat_close(
            &cesaro_limit(&absorb).unwrap(),
            &mat(&[&[1.0, 0.0], &[1.0, 0.0]]),
            1e-15,
        );

        assert!(matches!(
            cesaro_limit(&mat(&[&[0.5, 0.4], &[0.0, 1.0]])),
            Err(Error::NotStochastic { row: 0, .. })
        ));
    }

    #[test]
    fn cesaro_matches_power_average() {
        // oracle: average of the first 10^4 powers
        let p = mat(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.25, 0.25, 0.25, 0.25],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        let terms = 10_000;
        let mut power = DMatrix::<f64>::identity(4, 4);
        let mut acc = DMatrix::<f64>::zeros(4, 4);
        for _ in 0..terms {
            acc += &power;
            power = &power * &p;
        }
        acc /= terms as f64;
        assert_mat_close(&cesaro_limit(&p).unwrap(), &acc, 1e-3);
    }

    #[test]
    fn gains_of_families() {
        for n in 4..=9 {
            let (m, _) = make_unichain_family(n, None).unwrap();
            let g = policy_gain(&m, &DeterministicPolicy::uniform(n, 0)).unwrap();
            for x in g.iter() {
                assert!((x - 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
            }
            let (m, _) = make_multichain_family(n, None).unwrap();
            let g = policy_gain(&m, &DeterministicPolicy::uniform(n, 0)).unwrap();
            let mut expect = vec![0.0; n];
            expect[n - 1] = 1.0;
            for (x, y) in g.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let m = Mdp::markov_reward_process(vec![vec![0.3, 0.7], vec![0.6, 0.4]], vec![0.0, 0.0])
            .unwrap();
        let g = policy_gain(&m, &DeterministicPolicy::uniform(2, 0)).unwrap();
        assert_eq!(g.sup_norm(), 0.0);
    }

    #[test]
    fn deviation_examples() {
        let n = 3;
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let m = Mdp::markov_reward_process(p, vec![1.0, 2.0, 3.0]).unwrap();
        let d = deviation_matrix(&m, &DeterministicPolicy::uniform(n, 0)).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-15));

        let m = Mdp::markov_reward_process(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0])
            .unwrap();
        let ps = PolicyStructure::new(&m, &DeterministicPolicy::uniform(2, 0)).unwrap();
        let h = ps.bias().unwrap();
        assert!((h[0] - 0.25).abs() < 1e-14 && (h[1] + 0.25).abs() < 1e-14);
        // P* D r = 0
        let check = mat_vec(&ps.cesaro, &h);
        assert!(check.sup_norm() < 1e-9);

        let (m, sol) = make_unichain_family(4, None).unwrap();
        let ps = PolicyStructure::new(&m, &DeterministicPolicy::uniform(4, 0)).unwrap();
        let diff = ps.bias().unwrap().sub(&sol.bias);
        assert!(crate::mdp::span_seminorm(&diff) < 1e-12);
    }

    #[test]
    fn policy_error_examples() {
        let m = branch_mdp();
        let g_star = ValueVector::new(vec![0.0, 1.0, 1.0]);
        let to_s1 = DeterministicPolicy::new(vec![0, 0, 0]);
        let to_s2 = DeterministicPolicy::new(vec![0, 0, 1]);
        assert!((policy_error(&m, &to_s1, &g_star).unwrap() - 1.0).abs() < 1e-14);
        assert!(policy_error(&m, &to_s2, &g_star).unwrap() < 1e-14);
    }

    fn brute_force_gap(m: &Mdp, g: &ValueVector) -> f64 {
        let mut best = f64::INFINITY;
        for pi in all_policies(m).unwrap() {
            let dev = (0..m.n_states())
                .map(|s| (m.expect(s, pi.action(s), g.as_slice()) - g[s]).abs())
                .fold(0.0, f64::max);
            if dev > GAP_FIX_TOL {
                best = best.min(dev);
            }
        }
        best
    }

    #[test]
    fn epsilon_examples() {
        let m = branch_mdp();
        let g = ValueVector::new(vec![0.0, 1.0, 1.0]);
        assert_eq!(epsilon_gap(&m, &g).unwrap(), 1.0);
        assert_eq!(brute_force_gap(&m, &g), 1.0);

        assert_eq!(
            epsilon_gap(&m, &ValueVector::constant(3, 0.7)).unwrap(),
            f64::INFINITY
        );
        let (m, sol) = make_multichain_family(6, None).unwrap();
        assert_eq!(epsilon_gap(&m, &sol.gain).unwrap(), f64::INFINITY);
    }

    #[test]
    fn epsilon_matches_brute_force_on_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for seed in 0..20 {
            let m = crate::generate::random_general(4, 3, seed).unwrap();
            // mix of "solution-like" and arbitrary g vectors
            let g = if seed % 2 == 0 {
                ValueVector::new((0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            } else {
                ValueVector::constant(4, rng.random_range(-1.0..1.0))
            };
            let fast = epsilon_gap(&m, &g).unwrap();
            let slow = brute_force_gap(&m, &g);
            assert!(
                fast == slow || (fast - slow).abs() < 1e-14,
                "{fast} vs {slow}"
            );
        }
    }

    #[test]
    fn enumeration_guard_trips() {
        let m = crate::generate::random_general(30, 3, 0).unwrap();
        assert!(matches!(
            all_policies(&m),
            Err(Error::TooManyPolicies { .. })
        ));
        assert!(classify(&m).is_err());
    }
}

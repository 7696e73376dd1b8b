//! Seeded random MDP generators.
//!
//! Rows are drawn from the uniform simplex by normalising independent
//! exponential draws; rewards are uniform in `[-1, 1]`. All generators use
//! `ChaCha8Rng` seeded from a `u64`, so output depends only on the arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Mdp, ValueVector};

/// Mass mixed into the structural target of every row.
pub const MIX: f64 = 0.05;

/// Generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    General,
    Unichain,
    WeaklyComm,
}

impl std::str::FromStr for RandomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_general" | "general" => Ok(RandomKind::General),
            "random_unichain" | "unichain" => Ok(RandomKind::Unichain),
            "random_weakly_comm" | "weakly_comm" => Ok(RandomKind::WeaklyComm),
            other => Err(Error::Parse(format!("unknown generator kind '{other}'"))),
        }
    }
}

/// Dispatches to the generator for `kind`.
pub fn random_mdp(kind: RandomKind, n_states: usize, n_actions: usize, seed: u64) -> Result<Mdp> {
    match kind {
        RandomKind::General => random_general(n_states, n_actions, seed),
        RandomKind::Unichain => random_unichain(n_states, n_actions, seed),
        RandomKind::WeaklyComm => random_weakly_comm(n_states, n_actions, seed),
    }
}

fn check_sizes(n_states: usize, n_actions: usize, min_states: usize) -> Result<()> {
    if n_states < min_states {
        return Err(Error::BadSize {
            n: n_states,
            min: min_states,
        });
    }
    if n_actions == 0 {
        return Err(Error::BadSize { n: 0, min: 1 });
    }
    Ok(())
}

fn simplex(rng: &mut ChaCha8Rng, support: &[usize], n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    let mut total = 0.0;
    for &i in support {
        let x: f64 = rng.sample(Exp1);
        row[i] = x;
        total += x;
    }
    for x in row.iter_mut() {
        *x /= total;
    }
    row
}

fn mix_into(row: &mut [f64], target: usize) {
    for x in row.iter_mut() {
        *x *= 1.0 - MIX;
    }
    row[target] += MIX;
}

fn assemble(
    n: usize,
    na: usize,
    rng: &mut ChaCha8Rng,
    mut row_for: impl FnMut(&mut ChaCha8Rng, usize, usize) -> Vec<f64>,
) -> Result<Mdp> {
    let mut transitions = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for s in 0..n {
        let mut rows = Vec::with_capacity(na);
        let mut rs = Vec::with_capacity(na);
        for a in 0..na {
            rows.push(row_for(rng, s, a));
            rs.push(rng.random_range(-1.0..=1.0));
        }
        transitions.push(rows);
        rewards.push(rs);
    }
    Mdp::new(n, na, transitions, rewards)
}

/// Every row uniform on the full simplex.
pub fn random_general(n_states: usize, n_actions: usize, seed: u64) -> Result<Mdp> {
    check_sizes(n_states, n_actions, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..n_states).collect();
    assemble(n_states, n_actions, &mut rng, |rng, _, _| {
        simplex(rng, &all, n_states)
    })
}

/// As [`random_general`] with `0.05` of every row moved to state 0, which
/// is then reachable in one step from everywhere and has a self-loop.
pub fn random_unichain(n_states: usize, n_actions: usize, seed: u64) -> Result<Mdp> {
    check_sizes(n_states, n_actions, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..n_states).collect();
    assemble(n_states, n_actions, &mut rng, |rng, _, _| {
        let mut row = simplex(rng, &all, n_states);
        mix_into(&mut row, 0);
        row
    })
}

/// Size of the communicating block of [`random_weakly_comm`].
pub fn weakly_comm_block(n_states: usize) -> usize {
    n_states - n_states / 4
}

/// The first `n - n/4` states form a closed communicating block; the rest
/// are transient under every policy.
///
/// Block rows are sparse simplices over the block (each block state kept
/// with probability 1/2) with `0.05` mass on a designated state: the ring
/// successor `s + 1 mod m` for action 0 and a uniform block state for the
/// other actions. Each action other than 0 is, with probability 1/2, a pure
/// self-loop instead. The action-0 ring makes the block communicating, and
/// the self-loops let some policies split it into several recurrent classes.
/// Rows outside the block are full simplices with `0.05` mass on a uniform
/// block state.
pub fn random_weakly_comm(n_states: usize, n_actions: usize, seed: u64) -> Result<Mdp> {
    check_sizes(n_states, n_actions, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = weakly_comm_block(n_states);
    let all: Vec<usize> = (0..n_states).collect();
    assemble(n_states, n_actions, &mut rng, |rng, s, a| {
        if s < m {
            if a > 0 && rng.random_bool(0.5) {
                let mut stay = vec![0.0; n_states];
                stay[s] = 1.0;
                return stay;
            }
            let mut support: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
            if support.is_empty() {
                support.push(rng.random_range(0..m));
            }
            let mut row = simplex(rng, &support, n_states);
            let target = if a == 0 {
                (s + 1) % m
            } else {
                rng.random_range(0..m)
            };
            mix_into(&mut row, target);
            row
        } else {
            let mut row = simplex(rng, &all, n_states);
            let target = rng.random_range(0..m);
            mix_into(&mut row, target);
            row
        }
    })
}

/// Vector with entries uniform in `[-1, 1]`.
pub fn random_vector(n: usize, seed: u64) -> ValueVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ValueVector::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify, MdpClass};

    #[test]
    fn deterministic_given_seed() {
        for kind in [
            RandomKind::General,
            RandomKind::Unichain,
            RandomKind::WeaklyComm,
        ] {
            let a = random_mdp(kind, 6, 2, 42).unwrap();
            let b = random_mdp(kind, 6, 2, 42).unwrap();
            assert_eq!(a.to_file().to_json(), b.to_file().to_json());
            let c = random_mdp(kind, 6, 2, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn single_state_general() {
        let m = random_general(1, 1, 9).unwrap();
        assert_eq!(m.row(0, 0), &[1.0]);
        assert!(m.reward(0, 0).abs() <= 1.0);
    }

    #[test]
    fn bad_sizes() {
        assert!(random_general(0, 2, 0).is_err());
        assert!(random_unichain(3, 0, 0).is_err());
    }

    #[test]
    fn rewards_in_range() {
        let m = random_general(5, 3, 1).unwrap();
        assert!(m.reward_sup_norm() <= 1.0);
    }

    #[test]
    fn unichain_generator_classifies() {
        for seed in 0..100 {
            let m = random_unichain(6, 2, seed).unwrap();
            assert_eq!(classify(&m).unwrap(), MdpClass::Unichain, "seed {seed}");
        }
    }

    #[test]
    fn weakly_comm_generator_classifies() {
        let mut split = 0;
        for seed in 0..20 {
            let m = random_weakly_comm(8, 3, seed).unwrap();
            let class = classify(&m).unwrap();
            assert!(class.is_weakly_communicating(), "seed {seed}");
            if class == MdpClass::WeaklyCommunicatingNotUnichain {
                split += 1;
            }
        }
        assert!(split > 0);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            "random_general".parse::<RandomKind>().unwrap(),
            RandomKind::General
        );
        assert_eq!(
            "weakly_comm".parse::<RandomKind>().unwrap(),
            RandomKind::WeaklyComm
        );
        assert!("nope".parse::<RandomKind>().is_err());
    }
}

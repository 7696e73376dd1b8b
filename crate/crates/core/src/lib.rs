//! Average-reward MDPs: exact Bellman operators, chain structure, a
//! ground-truth solver, value-iteration-type algorithms with anchoring and
//! relaxation, closed-form convergence rates and worst-case instances.

pub mod bounds;
pub mod certify;
pub mod chain;
pub mod error;
pub mod generate;
pub mod iterate;
mod lp;
pub mod mdp;
pub mod schedule;
pub mod solver;
pub mod trace_io;
pub mod worst_case;

#[cfg(test)]
mod testutil;

pub use chain::{
    cesaro_limit, classify, deviation_matrix, epsilon_gap, policy_chain, policy_error, policy_gain,
    ChainDecomposition, MdpClass,
};
pub use error::{Error, Result};
pub use mdp::{
    bellman_consistency, bellman_optimality, bellman_residual, span_seminorm, sup_error,
    validate_mdp, DeterministicPolicy, Mdp, MdpFile, SolutionPair, ValueVector,
};
pub use solver::{solve_modified_bellman, verify_solution, Verdict};
pub use worst_case::{make_multichain_family, make_unichain_family};

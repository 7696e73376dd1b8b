//! Worst-case instances for algorithms satisfying the span condition.
//!
//! Both families have a single action. States are 0-based here; the table
//! maps them to the 1-based labels `s1..sn` used in the literature.
//!
//! | code     | label  | unichain (cycle)         | multichain              |
//! |----------|--------|--------------------------|-------------------------|
//! | `0`      | `s1`   | moves to `n-2`, reward 1 | absorbing, reward 0     |
//! | `1`      | `s2`   | moves to `0`             | moves to `0`, reward 1  |
//! | `j`      | `sj+1` | moves to `j-1`           | moves to `j-1`          |
//! | `n-1`    | `sn`   | moves to `n-2`, transient| absorbing, reward 1     |
//!
//! Given a starting point `V0`, the rewards are shifted to
//! `r = r0 + V0 - P V0`, so that `T V = T0 (V - V0) + V0` and every
//! span-condition algorithm started at `V0` produces the same residuals as
//! the unshifted instance started at zero. The bias shifts to `h0* + V0`.

use crate::error::{check_len, Error, Result};
use crate::mdp::{DeterministicPolicy, Mdp, SolutionPair, ValueVector};

fn build(
    next: impl Fn(usize) -> usize,
    base_reward: Vec<f64>,
    gain: ValueVector,
    bias: ValueVector,
    v0: Option<&ValueVector>,
) -> Result<(Mdp, SolutionPair)> {
    let n = base_reward.len();
    let transitions: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|s| {
            let mut row = vec![0.0; n];
            row[next(s)] = 1.0;
            vec![row]
        })
        .collect();
    let (rewards, bias) = match v0 {
        None => (base_reward, bias),
        Some(v0) => {
            check_len(n, v0.len())?;
            let r = (0..n)
                .map(|s| base_reward[s] + v0[s] - v0[next(s)])
                .collect();
            (r, bias.add(v0))
        }
    };
    let m = Mdp::new(
        n,
        1,
        transitions,
        rewards.into_iter().map(|x| vec![x]).collect(),
    )?;
    Ok((
        m,
        SolutionPair {
            gain,
            bias,
            attaining_policy: DeterministicPolicy::uniform(n, 0),
        },
    ))
}

/// Counting-down cycle on `s1..s(n-1)` with `sn` feeding into it; reward 1
/// at `s1`. Closed forms: `g* = 1/(n-1)` and
/// `h*_i = (n - 1 - 2i) / (2n - 2)` for 0-based `i`.
pub fn make_unichain_family(n: usize, v0: Option<&ValueVector>) -> Result<(Mdp, SolutionPair)> {
    if n < 3 {
        return Err(Error::BadSize { n, min: 3 });
    }
    let denom = 2.0 * (n as f64 - 1.0);
    let mut r = vec![0.0; n];
    r[0] = 1.0;
    build(
        |s| if s == 0 { n - 2 } else { s - 1 },
        r,
        ValueVector::constant(n, 1.0 / (n as f64 - 1.0)),
        ValueVector::new(
            (0..n)
                .map(|i| (n as f64 - 1.0 - 2.0 * i as f64) / denom)
                .collect(),
        ),
        v0,
    )
}

/// Chain `s(n-1) -> ... -> s2 -> s1` between the absorbing states `s1` and
/// `sn`; reward 1 at `s2` and `sn`. Closed forms: `g* = e_n` and
/// `h* = [-1/2, 1/2, ..., 1/2, 0]`.
pub fn make_multichain_family(n: usize, v0: Option<&ValueVector>) -> Result<(Mdp, SolutionPair)> {
    if n < 4 {
        return Err(Error::BadSize { n, min: 4 });
    }
    let mut r = vec![0.0; n];
    r[1] = 1.0;
    r[n - 1] = 1.0;
    let mut g = vec![0.0; n];
    g[n - 1] = 1.0;
    let mut h = vec![0.5; n];
    h[0] = -0.5;
    h[n - 1] = 0.0;
    build(
        |s| if s == 0 || s == n - 1 { s } else { s - 1 },
        r,
        ValueVector::new(g),
        ValueVector::new(h),
        v0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify, epsilon_gap, MdpClass};
    use crate::mdp::{bellman_residual, sup_error};
    use crate::solver::verify_solution;

    #[test]
    fn size_guards() {
        assert_eq!(
            make_unichain_family(2, None).unwrap_err(),
            Error::BadSize { n: 2, min: 3 }
        );
        assert!(make_multichain_family(3, None).is_err());
        assert!(make_unichain_family(4, Some(&ValueVector::zeros(3))).is_err());
    }

    #[test]
    fn closed_forms() {
        let (_, sol) = make_unichain_family(4, None).unwrap();
        assert_eq!(sol.bias.as_slice(), &[0.5, 1.0 / 6.0, -1.0 / 6.0, -0.5]);
        assert_eq!(sol.gain, ValueVector::constant(4, 1.0 / 3.0));
        assert_eq!(sol.bias.sup_norm(), 0.5);
        let (_, sol) = make_unichain_family(5, None).unwrap();
        assert_eq!(sol.bias.as_slice(), &[0.5, 0.25, 0.0, -0.25, -0.5]);
        let (_, sol) = make_multichain_family(5, None).unwrap();
        assert_eq!(sol.gain.as_slice(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(sol.bias.as_slice(), &[-0.5, 0.5, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn closed_forms_verify() {
        for n in 4..=16 {
            let (m, sol) = make_unichain_family(n, None).unwrap();
            assert!(
                verify_solution(&m, &sol.gain, &sol.bias, 1e-12)
                    .unwrap()
                    .holds
            );
            let (m, sol) = make_multichain_family(n, None).unwrap();
            assert!(
                verify_solution(&m, &sol.gain, &sol.bias, 1e-12)
                    .unwrap()
                    .holds
            );
            assert_eq!(classify(&m).unwrap(), MdpClass::MultichainGeneral);
            assert_eq!(epsilon_gap(&m, &sol.gain).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn shifted_instances_verify() {
        let v0 = ValueVector::new(vec![0.3, -2.0, 1.5, 0.25, -0.75, 4.0]);
        let (m, sol) = make_unichain_family(6, Some(&v0)).unwrap();
        assert!(
            verify_solution(&m, &sol.gain, &sol.bias, 1e-12)
                .unwrap()
                .holds
        );
        let (m, sol) = make_multichain_family(6, Some(&v0)).unwrap();
        assert!(
            verify_solution(&m, &sol.gain, &sol.bias, 1e-12)
                .unwrap()
                .holds
        );
        // residual at V0 equals the unshifted residual at zero
        let (m0, _) = make_multichain_family(6, None).unwrap();
        let a = bellman_residual(&m, &v0).unwrap();
        let b = bellman_residual(&m0, &ValueVector::zeros(6)).unwrap();
        assert!(sup_error(&a, &b).unwrap() < 1e-15);
    }
}

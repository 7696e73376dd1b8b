//! Small dense two-phase simplex for the bias-offset programs of the exact
//! solver. Problems have a handful of variables and a few dozen rows.
//!
//! Bland's rule is used for both entering and leaving variables, so the
//! method terminates without cycling.

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (x, y) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
        self.basis[r] = col;
    }

    /// Sets the objective row to the reduced costs of `cost`.
    fn price(&mut self, cost: &[f64]) {
        self.obj = vec![0.0; self.width + 1];
        self.obj[..cost.len()].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.obj[b];
            if cb != 0.0 {
                for (x, y) in self.obj.iter_mut().zip(&self.rows[i]) {
                    *x -= cb * y;
                }
            }
        }
    }

    /// Runs simplex pivots; `Err(())` means unbounded.
    fn optimise(&mut self, allowed: &[bool]) -> Result<(), ()> {
        let rhs = self.rhs();
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..self.width).find(|&j| allowed[j] && self.obj[j] < -PIVOT_TOL)
            else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - PIVOT_TOL
                                || (ratio <= best + PIVOT_TOL && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return Err(()),
            }
        }
        Err(())
    }

    fn value(&self) -> f64 {
        -self.obj[self.rhs()]
    }
}

/// Minimises `cost . x` subject to `constraints` and `x >= 0`.
pub(crate) fn minimize(cost: &[f64], constraints: &[Constraint]) -> LpOutcome {
    let n = cost.len();
    let m = constraints.len();
    let n_slack = constraints.iter().filter(|c| c.rel != Rel::Eq).count();
    let mut rows = Vec::with_capacity(m);
    let mut rels = Vec::with_capacity(m);
    for c in constraints {
        debug_assert_eq!(c.coeffs.len(), n);
        let (sign, rel) = if c.rhs < 0.0 {
            let flipped = match c.rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
            (-1.0, flipped)
        } else {
            (1.0, c.rel)
        };
        rows.push((
            c.coeffs.iter().map(|x| sign * x).collect::<Vec<_>>(),
            sign * c.rhs,
        ));
        rels.push(rel);
    }
    let n_art = rels.iter().filter(|r| **r != Rel::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut table = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut slack, mut art) = (n, art_start);
    for ((coeffs, rhs), rel) in rows.into_iter().zip(&rels) {
        let mut row = vec![0.0; width + 1];
        row[..n].copy_from_slice(&coeffs);
        row[width] = rhs;
        match rel {
            Rel::Le => {
                row[slack] = 1.0;
                basis.push(slack);
                slack += 1;
            }
            Rel::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
            Rel::Eq => {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        table.push(row);
    }
    let mut t = Tableau {
        rows: table,
        obj: Vec::new(),
        basis,
        width,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        t.price(&phase1);
        if t.optimise(&vec![true; width]).is_err() {
            return LpOutcome::Infeasible;
        }
        let scale = 1.0 + t.rows.iter().map(|r| r[width].abs()).fold(0.0, f64::max);
        if t.value() > FEAS_TOL * scale {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificial variables out of the basis.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| t.rows[i][j].abs() > FEAS_TOL) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    t.price(cost);
    if t.optimise(&allowed).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][width];
        }
    }
    let value = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn le(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            rel: Rel::Le,
            rhs,
        }
    }

    fn ge(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            rel: Rel::Ge,
            rhs,
        }
    }

    fn optimum(out: LpOutcome) -> (Vec<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let (x, v) = optimum(minimize(
            &[-3.0, -5.0],
            &[
                le(&[1.0, 0.0], 4.0),
                le(&[0.0, 2.0], 12.0),
                le(&[3.0, 2.0], 18.0),
            ],
        ));
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
        assert!((v + 36.0).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y, x + y >= 2, x - y = 0 -> (1, 1)
        let (x, v) = optimum(minimize(
            &[1.0, 1.0],
            &[
                ge(&[1.0, 1.0], 2.0),
                Constraint {
                    coeffs: vec![1.0, -1.0],
                    rel: Rel::Eq,
                    rhs: 0.0,
                },
            ],
        ));
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows() {
        // min x, -x <= -3 -> x = 3
        let (x, _) = optimum(minimize(&[1.0], &[le(&[-1.0], -3.0)]));
        assert!((x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        assert_eq!(
            minimize(&[1.0], &[le(&[1.0], 1.0), ge(&[1.0], 2.0)]),
            LpOutcome::Infeasible
        );
        assert_eq!(minimize(&[-1.0], &[ge(&[1.0], 1.0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn minimax_of_absolute_values() {
        // min u s.t. |t - 1| <= u, |t + 3| <= u with t = tp - tn -> t = -1, u = 2
        let rows = [
            le(&[1.0, -1.0, -1.0], 1.0),
            le(&[-1.0, 1.0, -1.0], -1.0),
            le(&[1.0, -1.0, -1.0], -3.0),
            le(&[-1.0, 1.0, -1.0], 3.0),
        ];
        let (x, v) = optimum(minimize(&[0.0, 0.0, 1.0], &rows));
        assert!((v - 2.0).abs() < 1e-12);
        assert!((x[0] - x[1] + 1.0).abs() < 1e-12);
    }

    proptest! {
        // A bounded box LP: min c.x over 0 <= x <= ub has optimum sum of min(c_i, 0) ub_i.
        #[test]
        fn box_problems(c in prop::collection::vec(-5.0f64..5.0, 1..6),
                        ub in prop::collection::vec(0.1f64..3.0, 6)) {
            let n = c.len();
            let rows: Vec<Constraint> = (0..n)
                .map(|i| {
                    let mut coeffs = vec![0.0; n];
                    coeffs[i] = 1.0;
                    le(&coeffs, ub[i])
                })
                .collect();
            let (x, v) = optimum(minimize(&c, &rows));
            let expect: f64 = (0..n).map(|i| c[i].min(0.0) * ub[i]).sum();
            prop_assert!((v - expect).abs() < 1e-9);
            for i in 0..n {
                prop_assert!(x[i] >= -1e-12 && x[i] <= ub[i] + 1e-12);
            }
        }
    }
}

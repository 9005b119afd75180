//! Dense full-tableau primal simplex for `max c·y  s.t.  A y ≤ b, y ≥ 0` with
//! `b ≥ 0`, so the slack basis is a feasible start. Bland's rule keeps it
//! cycle-free.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    /// Objective coefficients, one per structural variable.
    pub objective: Vec<f64>,
    /// Constraint matrix, one row per constraint.
    pub rows: Vec<Vec<f64>>,
    /// Right-hand sides, all non-negative.
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    /// Optimal dual values, one per constraint.
    pub duals: Vec<f64>,
    pub objective: f64,
    /// Basic variable per row; indices `≥ n_vars` are slacks.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Plain-text rendering of the program, one constraint per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "max");
        for (k, c) in self.objective.iter().enumerate() {
            let _ = write!(out, " {c:+.6e}*y{k}");
        }
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "r{r}:");
            for (k, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    let _ = write!(out, " {a:+.6e}*y{k}");
                }
            }
            let _ = writeln!(out, " <= {:.6e}", self.rhs[r]);
        }
        out
    }
}

/// Solves `lp` to optimality with feasibility/optimality tolerance `tol`.
pub fn solve(lp: &LinearProgram, tol: f64) -> Result<LpSolution> {
    let n = lp.n_vars();
    let r = lp.n_rows();
    if lp.rhs.len() != r || lp.rows.iter().any(|row| row.len() != n) {
        return Err(Error::Simplex {
            reason: "inconsistent dimensions".into(),
            basis: Vec::new(),
        });
    }
    if let Some(k) = lp.rhs.iter().position(|&b| !(b >= 0.0)) {
        return Err(Error::Simplex {
            reason: format!("right-hand side {k} is negative"),
            basis: Vec::new(),
        });
    }
    let width = n + r + 1;
    // Rows 0..r are constraints, row r is the reduced-cost row.
    let mut t = vec![vec![0.0; width]; r + 1];
    for i in 0..r {
        t[i][..n].copy_from_slice(&lp.rows[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = lp.rhs[i];
    }
    for k in 0..n {
        t[r][k] = -lp.objective[k];
    }
    let mut basis: Vec<usize> = (n..n + r).collect();

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + r).find(|&k| t[r][k] < -tol) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..r {
            let a = t[i][enter];
            if a > tol {
                let ratio = t[i][width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Simplex {
                reason: format!("unbounded in variable {enter}"),
                basis,
            });
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Simplex {
                reason: format!("no convergence after {MAX_PIVOTS} pivots"),
                basis,
            });
        }
    }

    let mut primal = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            primal[b] = t[i][width - 1].max(0.0);
        }
    }
    let duals = (0..r).map(|i| t[r][n + i].max(0.0)).collect();
    let objective = primal.iter().zip(&lp.objective).map(|(y, c)| y * c).sum();
    Ok(LpSolution {
        primal,
        duals,
        objective,
        basis,
        pivots,
    })
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, line) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = line[col];
        if factor != 0.0 {
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            line[col] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_example() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let lp = LinearProgram {
            objective: vec![3.0, 5.0],
            rows: vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            rhs: vec![4.0, 12.0, 18.0],
        };
        let s = solve(&lp, 1e-12).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.primal[0] - 2.0).abs() < 1e-9);
        assert!((s.primal[1] - 6.0).abs() < 1e-9);
        // Duals (0, 3/2, 1) reproduce the objective.
        assert!((s.duals[0]).abs() < 1e-9);
        assert!((s.duals[1] - 1.5).abs() < 1e-9);
        assert!((s.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_objective_stays_at_origin() {
        let lp = LinearProgram {
            objective: vec![-1.0],
            rows: vec![vec![1.0]],
            rhs: vec![1.0],
        };
        let s = solve(&lp, 1e-12).unwrap();
        assert_eq!(s.primal, vec![0.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn unbounded_is_reported_with_basis() {
        let lp = LinearProgram {
            objective: vec![1.0, 0.0],
            rows: vec![vec![0.0, 1.0]],
            rhs: vec![1.0],
        };
        match solve(&lp, 1e-12) {
            Err(Error::Simplex { basis, .. }) => assert_eq!(basis, vec![2]),
            other => panic!("expected simplex error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Klee-Minty-like degenerate rows with zero right-hand sides.
        let lp = LinearProgram {
            objective: vec![10.0, -57.0, -9.0, -24.0],
            rows: vec![
                vec![0.5, -5.5, -2.5, 9.0],
                vec![0.5, -1.5, -0.5, 1.0],
                vec![1.0, 0.0, 0.0, 0.0],
            ],
            rhs: vec![0.0, 0.0, 1.0],
        };
        let s = solve(&lp, 1e-12).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn strong_duality_on_random_packing_lps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let r = rng.gen_range(1..6);
            let lp = LinearProgram {
                objective: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                rows: (0..r)
                    .map(|_| (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.1..1.0) }).collect())
                    .collect(),
                rhs: (0..r).map(|_| rng.gen_range(0.0..2.0)).collect(),
            };
            // Make every variable bounded.
            let mut lp = lp;
            lp.rows.push(vec![1.0; n]);
            lp.rhs.push(3.0);
            let s = solve(&lp, 1e-12).unwrap();
            let dual_obj: f64 = s.duals.iter().zip(&lp.rhs).map(|(d, b)| d * b).sum();
            assert!((dual_obj - s.objective).abs() < 1e-9);
            for (k, c) in lp.objective.iter().enumerate() {
                let lhs: f64 = (0..lp.rows.len()).map(|i| lp.rows[i][k] * s.duals[i]).sum();
                assert!(lhs >= c - 1e-9);
            }
            for (i, row) in lp.rows.iter().enumerate() {
                let a: f64 = row.iter().zip(&s.primal).map(|(a, y)| a * y).sum();
                assert!(a <= lp.rhs[i] + 1e-9);
            }
        }
    }
}

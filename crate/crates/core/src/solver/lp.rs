//! Exact weighted basis pursuit by dense two-phase simplex.
//!
//! `min Σ w_j |u_j|  s.t.  Au = y` is rewritten with `u = u⁺ − u⁻`,
//! `u± ≥ 0`. Bland's rule keeps the method cycle-free; the cost is
//! exponential in the worst case, hence the column cap.

use alloc::vec;
use alloc::vec::Vec;

use super::check_problem;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest number of unknowns the oracle accepts.
pub const ORACLE_MAX_COLS: usize = 40;

const PIVOT_TOL: f64 = 1e-11;

struct Tableau {
    /// `rows × (vars + 1)`, last column is the right-hand side.
    body: Vec<Vec<f64>>,
    basis: Vec<usize>,
    vars: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let width = self.vars + 1;
        let p = self.body[r][c];
        for v in self.body[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.body[r].clone();
        for (i, row) in self.body.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for k in 0..width {
                cost[k] -= f * pivot_row[k];
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on reduced costs `cost` (same layout as a row).
    /// Only columns with `allowed[j]` may enter.
    fn optimize(&mut self, cost: &mut [f64], allowed: &[bool]) -> Result<()> {
        loop {
            let entering = (0..self.vars).find(|&j| allowed[j] && cost[j] < -PIVOT_TOL);
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.body.iter().enumerate() {
                if row[c] > PIVOT_TOL {
                    let ratio = row[self.vars] / row[c];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_TOL
                                || (ratio <= lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Infeasible("linear program is unbounded"));
            };
            self.pivot(r, c, cost);
        }
    }
}

/// Solves `min Σ_j w_j |u_j|` subject to `Au = y` exactly (up to rounding).
pub fn lp_oracle(a: &Matrix, y: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    check_problem(a, y, 0.0, weights)?;
    let (m, n) = (a.nrows(), a.ncols());
    if n > ORACLE_MAX_COLS {
        return Err(Error::OracleCap {
            found: n,
            cap: ORACLE_MAX_COLS,
        });
    }
    let structural = 2 * n;
    let vars = structural + m;
    let mut body = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if y[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; vars + 1];
        for j in 0..n {
            row[j] = sign * a.get(i, j);
            row[n + j] = -sign * a.get(i, j);
        }
        row[structural + i] = 1.0;
        row[vars] = sign * y[i];
        body.push(row);
    }
    let mut tab = Tableau {
        body,
        basis: (structural..vars).collect(),
        vars,
    };

    // phase one: minimize the sum of artificials
    let mut cost = vec![0.0; vars + 1];
    for row in &tab.body {
        for k in 0..structural {
            cost[k] -= row[k];
        }
        cost[vars] -= row[vars];
    }
    let all = vec![true; vars];
    tab.optimize(&mut cost, &all)?;
    let scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if -cost[vars] > 1e-9 * scale {
        return Err(Error::Infeasible("equality constraints are inconsistent"));
    }

    // drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant and removed
    let mut r = 0;
    while r < tab.body.len() {
        if tab.basis[r] >= structural {
            let col = (0..structural).find(|&j| tab.body[r][j].abs() > PIVOT_TOL);
            match col {
                Some(c) => {
                    let mut dummy = vec![0.0; vars + 1];
                    tab.pivot(r, c, &mut dummy);
                }
                None => {
                    tab.body.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // phase two on the structural columns
    let mut cost = vec![0.0; vars + 1];
    for j in 0..n {
        cost[j] = weights[j];
        cost[n + j] = weights[j];
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        let cb = cost[b];
        if cb != 0.0 {
            for k in 0..=vars {
                cost[k] -= cb * tab.body[i][k];
            }
        }
    }
    let allowed: Vec<bool> = (0..vars).map(|j| j < structural).collect();
    tab.optimize(&mut cost, &allowed)?;

    let mut u = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        let val = tab.body[i][vars];
        if b < n {
            u[b] += val;
        } else if b < structural {
            u[b - n] -= val;
        }
    }
    Ok(u)
}

//! Exact small linear programs over dummy-rate allocations.
//!
//! The primal has one variable per level Eve cannot decode, a box per
//! variable, one sum bound per subset and one sum equality. It is solved
//! through its dual, which has only as many rows as variables and starts
//! from an obvious feasible basis, with Bland's rule to rule out cycling.
//! Primal infeasibility shows up as an unbounded dual.

use crate::error::{Error, Result};

/// Largest number of variables for which every subset constraint is materialized.
pub const MAX_LP_VARIABLES: usize = 12;

const PIVOT_TOL: f64 = 1e-12;

/// Dummy-rate allocation problem on `d` variables:
///
/// minimize `Σ_{l in key_mask} x_l` subject to
/// `lower_l ≤ x_l ≤ upper_l`, `Σ_{l in S} x_l ≤ budgets[S]` for every
/// nonempty proper subset `S` (a bitmask), and `Σ_l x_l = budgets[full]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DummyRateProblem {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Indexed by subset bitmask; entry 0 is unused.
    pub budgets: Vec<f64>,
    pub key_mask: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
}

impl DummyRateProblem {
    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_LP_VARIABLES {
            return Err(Error::SizeGuard {
                what: "dummy-rate variables",
                size: d,
                limit: MAX_LP_VARIABLES,
            });
        }
        if self.lower.len() != d || self.budgets.len() != 1 << d {
            return Err(Error::Domain("inconsistent dummy-rate problem dimensions".into()));
        }
        let all = self.lower.iter().chain(&self.upper).chain(&self.budgets[1..]);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Domain("dummy-rate problem data must be finite".into()));
        }
        Ok(())
    }

    /// Solves the problem exactly (up to floating-point pivoting).
    pub fn solve(&self) -> Result<LpOutcome> {
        self.validate()?;
        let d = self.dim();
        let full = (1u32 << d) - 1;
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Ok(LpOutcome::Infeasible);
        }

        // Shift to y = x - lower >= 0. Primal rows A y <= b:
        // one box row per variable, one row per proper subset; plus 1^T y = beta.
        let lower_sum = |mask: u32| -> f64 {
            (0..d).filter(|j| mask & (1 << j) != 0).map(|j| self.lower[j]).sum()
        };
        let mut rows: Vec<(u32, f64)> = Vec::with_capacity(d + (1 << d));
        for j in 0..d {
            rows.push((1 << j, self.upper[j] - self.lower[j]));
        }
        for mask in 1..full {
            rows.push((mask, self.budgets[mask as usize] - lower_sum(mask)));
        }
        let beta = self.budgets[full as usize] - lower_sum(full);
        let cost: Vec<f64> = (0..d).map(|j| if self.key_mask & (1 << j) != 0 { 1.0 } else { 0.0 }).collect();

        match dual_simplex(d, &rows, beta, &cost)? {
            None => Ok(LpOutcome::Infeasible),
            Some(y) => {
                let x: Vec<f64> = y.iter().zip(&self.lower).map(|(y, l)| y + l).collect();
                let objective = (0..d).filter(|j| self.key_mask & (1 << j) != 0).map(|j| x[j]).sum();
                Ok(LpOutcome::Optimal { x, objective })
            }
        }
    }
}

/// Solves `min c^T y` s.t. `A y <= b`, `1^T y = beta`, `y >= 0`, with rows of
/// `A` given as 0/1 indicator masks, by running the primal simplex on
///
/// `min b^T w - beta·z⁺ + beta·z⁻` s.t. `-A^T w + 1·z⁺ - 1·z⁻ + s = c`,
/// all variables nonnegative.
///
/// Since `c >= 0` the slacks `s` form a feasible starting basis. Returns the
/// primal optimum, or `None` when the dual is unbounded.
fn dual_simplex(d: usize, rows: &[(u32, f64)], beta: f64, cost: &[f64]) -> Result<Option<Vec<f64>>> {
    let m = rows.len();
    // Columns: w_0..w_{m-1}, z⁺, z⁻, s_0..s_{d-1}.
    let ncols = m + 2 + d;
    let zp = m;
    let zm = m + 1;
    let slack0 = m + 2;

    let mut col_cost = vec![0.0; ncols];
    for (k, &(_, b)) in rows.iter().enumerate() {
        col_cost[k] = b;
    }
    col_cost[zp] = -beta;
    col_cost[zm] = beta;

    let column = |col: usize, row: usize| -> f64 {
        if col < m {
            if rows[col].0 & (1 << row) != 0 {
                -1.0
            } else {
                0.0
            }
        } else if col == zp {
            1.0
        } else if col == zm {
            -1.0
        } else if col - slack0 == row {
            1.0
        } else {
            0.0
        }
    };

    let mut tab = vec![vec![0.0; ncols]; d];
    let mut rhs = cost.to_vec();
    for (r, row) in tab.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = column(c, r);
        }
    }
    let mut basis: Vec<usize> = (0..d).map(|r| slack0 + r).collect();
    // Reduced costs; the initial basis has zero cost.
    let mut reduced = col_cost.clone();

    let max_iter = 50 * (ncols + d);
    for _ in 0..max_iter {
        let Some(enter) = (0..ncols).find(|&c| reduced[c] < -PIVOT_TOL) else {
            return Ok(Some(recover_primal(d, &basis, &col_cost, &column)?));
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..d {
            let a = tab[r][enter];
            if a > PIVOT_TOL {
                let ratio = rhs[r].max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best_ratio - 1e-15 || (ratio <= best_ratio + 1e-15 && basis[r] < basis[l]),
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(pr) = leave else {
            return Ok(None);
        };
        let piv = tab[pr][enter];
        for v in tab[pr].iter_mut() {
            *v /= piv;
        }
        rhs[pr] /= piv;
        let pivot_row = tab[pr].clone();
        let pivot_rhs = rhs[pr];
        for r in 0..d {
            if r != pr {
                let f = tab[r][enter];
                if f != 0.0 {
                    for (v, p) in tab[r].iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                    rhs[r] -= f * pivot_rhs;
                }
            }
        }
        let f = reduced[enter];
        for (v, p) in reduced.iter_mut().zip(&pivot_row) {
            *v -= f * p;
        }
        basis[pr] = enter;
    }
    Err(Error::NonConvergence("simplex iteration limit reached".into()))
}

/// Simplex multipliers of the final basis are the negated primal solution;
/// solve `B^T π = c_B` directly for accuracy.
fn recover_primal(
    d: usize,
    basis: &[usize],
    col_cost: &[f64],
    column: &dyn Fn(usize, usize) -> f64,
) -> Result<Vec<f64>> {
    // Row r of B^T is basic column basis[r].
    let mut mat: Vec<Vec<f64>> = basis.iter().map(|&c| (0..d).map(|row| column(c, row)).collect()).collect();
    let mut rhs: Vec<f64> = basis.iter().map(|&c| col_cost[c]).collect();
    let pi = solve_dense(&mut mat, &mut rhs)?;
    Ok(pi.into_iter().map(|p| (-p).max(0.0)).collect())
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))
            .expect("nonempty range");
        if mat[piv][col].abs() < PIVOT_TOL {
            return Err(Error::NonConvergence("singular simplex basis".into()));
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = mat[r][col] / mat[col][col];
            if f != 0.0 {
                let (top, bottom) = mat.split_at_mut(r);
                for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *dst -= f * src;
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| mat[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / mat[r][r];
    }
    Ok(x)
}

//! Dense two-phase primal simplex with Bland's rule.

use super::{LinearProgram, LpSolution, LpStatus, Relation};

/// Reduced costs below `-PRICE_TOL` make a column eligible to enter.
const PRICE_TOL: f64 = 1e-10;
/// Smallest magnitude accepted as a pivot element.
const PIVOT_TOL: f64 = 1e-11;
/// Phase-one residual above which the program is declared infeasible.
const FEASIBILITY_TOL: f64 = 1e-8;

struct Tableau {
    /// `rows x (cols + 1)`, rhs in the last column.
    a: Vec<Vec<f64>>,
    /// Reduced costs, objective value negated in the last column.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> f64 {
        self.a[row][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols + 1;
        let scale = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= scale;
        }
        self.a[row][col] = 1.0;
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for j in 0..width {
                    r[j] -= factor * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for j in 0..width {
                self.cost[j] -= factor * pivot_row[j];
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Loads a cost vector and prices out the current basis.
    fn set_cost(&mut self, costs: &[f64]) {
        self.cost = vec![0.0; self.cols + 1];
        self.cost[..costs.len()].copy_from_slice(costs);
        for (row, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for j in 0..=self.cols {
                    self.cost[j] -= cb * self.a[row][j];
                }
            }
        }
    }

    /// Runs Bland's rule over the columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -PRICE_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for row in 0..self.a.len() {
                let coef = self.a[row][enter];
                if coef <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(row) / coef;
                leave = match leave {
                    None => Some((row, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie
                            || tie && self.basis[row] < self.basis[best]
                        {
                            Some((row, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return false,
            }
        }
    }
}

/// Minimises `objective . x` subject to the program's rows and `x >= 0`.
///
/// Optimal solutions are basic, so the returned point is a vertex of the
/// feasible polytope.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    let vars = lp.num_vars();
    let m = lp.rows.len();

    // Orient every row to a nonnegative right-hand side.
    let mut rows = Vec::with_capacity(m);
    for c in &lp.rows {
        let flip = c.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let kind = match (c.relation, flip) {
            (Relation::Eq, _) => RowKind::Eq,
            (Relation::Le, false) => RowKind::Le,
            (Relation::Le, true) => RowKind::Ge,
        };
        rows.push((c.coeffs.iter().map(|v| v * sign).collect::<Vec<_>>(), kind, c.rhs * sign));
    }

    let slacks = rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != RowKind::Le).count();
    let structural = vars + slacks;
    let cols = structural + artificials;

    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (vars, structural);
    for (i, (coeffs, kind, rhs)) in rows.iter().enumerate() {
        a[i][..vars].copy_from_slice(coeffs);
        a[i][cols] = *rhs;
        match kind {
            RowKind::Le => {
                a[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            RowKind::Ge => {
                a[i][next_slack] = -1.0;
                next_slack += 1;
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            RowKind::Eq => {
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau {
        a,
        cost: Vec::new(),
        basis,
        cols,
    };

    if artificials > 0 {
        let mut phase_one = vec![0.0; cols];
        phase_one[structural..].iter_mut().for_each(|v| *v = 1.0);
        t.set_cost(&phase_one);
        t.optimize(cols);
        let residual = -t.cost[cols];
        if residual > FEASIBILITY_TOL {
            return LpSolution::failed(LpStatus::Infeasible, vars);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut row = 0;
        while row < t.a.len() {
            if t.basis[row] >= structural {
                let col = (0..structural).find(|&j| t.a[row][j].abs() > 1e-9);
                match col {
                    Some(j) => t.pivot(row, j),
                    None => {
                        t.a.remove(row);
                        t.basis.remove(row);
                        continue;
                    }
                }
            }
            row += 1;
        }
    }

    t.set_cost(&lp.objective);
    if !t.optimize(structural) {
        return LpSolution::failed(LpStatus::Unbounded, vars);
    }

    let mut x = vec![0.0; vars];
    for (row, &b) in t.basis.iter().enumerate() {
        if b < vars {
            x[b] = t.rhs(row);
        }
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let mut basis = t.basis.clone();
    basis.sort_unstable();
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        basis,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Le,
    Ge,
    Eq,
}

//! Allocation linear programs and constraint-polytope tooling.
//!
//! Both programs use `2k` variables, the allocation `n_j` followed by the
//! deviation slacks `s_j >= |n_j - p_j|`.

mod simplex;
mod vertices;

pub use simplex::solve;
pub use vertices::{enumerate_vertices, VERTEX_DEDUP_TOL, VERTEX_LOCATION_LIMIT};

use crate::error::Result;
use crate::model::{check_k, Distance, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective . x` over `x >= 0` and the listed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a row; panics if its width differs from the variable count.
    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "row width must match variable count");
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn count(&self, relation: Relation) -> usize {
        self.rows.iter().filter(|r| r.relation == relation).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Sorted column indices of the final basis (slack columns follow the variables).
    pub basis: Vec<usize>,
}

impl LpSolution {
    fn failed(status: LpStatus, vars: usize) -> Self {
        Self {
            status,
            x: vec![0.0; vars],
            objective_value: f64::NAN,
            basis: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Builds the allocation program for objective coefficients `c` on `n`.
///
/// Rows, per location: `n_j - s_j <= p_j`, `-n_j - s_j <= -p_j`,
/// `alpha n_j <= p_j`; then the distance rows (`sum s_j <= eps` for l1,
/// `s_j <= eps p_j` for relative l-infinity); then `sum n_j = 1`.
pub fn build_lp(scenario: &Scenario, c: &[f64]) -> Result<LinearProgram> {
    check_k(scenario, "c", c.len())?;
    let k = scenario.k();
    let p = scenario.shares();
    let alpha = scenario.alpha();
    let width = 2 * k;
    let mut objective = vec![0.0; width];
    objective[..k].copy_from_slice(c);
    let mut lp = LinearProgram::new(objective);
    let row = |entries: &[(usize, f64)]| {
        let mut r = vec![0.0; width];
        for &(j, v) in entries {
            r[j] = v;
        }
        r
    };
    for j in 0..k {
        lp.push(row(&[(j, 1.0), (k + j, -1.0)]), Relation::Le, p[j]);
        lp.push(row(&[(j, -1.0), (k + j, -1.0)]), Relation::Le, -p[j]);
        lp.push(row(&[(j, alpha)]), Relation::Le, p[j]);
    }
    let eps = scenario.epsilon();
    match scenario.distance() {
        Distance::L1 => {
            let entries: Vec<_> = (0..k).map(|j| (k + j, 1.0)).collect();
            lp.push(row(&entries), Relation::Le, eps);
        }
        Distance::LInf => {
            for j in 0..k {
                lp.push(row(&[(k + j, 1.0)]), Relation::Le, eps * p[j]);
            }
        }
    }
    let entries: Vec<_> = (0..k).map(|j| (j, 1.0)).collect();
    lp.push(row(&entries), Relation::Eq, 1.0);
    Ok(lp)
}

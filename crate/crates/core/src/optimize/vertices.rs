//! Vertex enumeration of the allocation polytope by active sets.
//!
//! A vertex of the lifted `(n, s)` polytope pins every location by two
//! tight rows, except for the few locations that are determined by the
//! coupling rows (`sum n = 1`, and for l1 also `sum s = eps`). A pinned
//! location sits at a bound or at the kink `n_j = p_j`. So the projected
//! vertex set is found by choosing, per location, one of three values or
//! "free", and solving the coupling rows for the free ones.

use crate::error::{Error, Result};
use crate::model::{Allocation, Distance, Scenario};

/// Largest location count accepted by [`enumerate_vertices`].
pub const VERTEX_LOCATION_LIMIT: usize = 12;

/// Two vertices closer than this in l-infinity are merged.
pub const VERTEX_DEDUP_TOL: f64 = 1e-8;

const SLACK: f64 = 1e-10;

struct Search<'a> {
    p: &'a [f64],
    lower: Vec<f64>,
    upper: Vec<f64>,
    pins: Vec<Vec<f64>>,
    l1_budget: Option<f64>,
    max_free: usize,
    point: Vec<f64>,
    free: Vec<usize>,
    out: Vec<Vec<f64>>,
}

impl Search<'_> {
    fn dfs(&mut self, j: usize, sum: f64, used: f64) {
        if sum > 1.0 + SLACK {
            return;
        }
        if let Some(budget) = self.l1_budget {
            if used > budget + SLACK {
                return;
            }
        }
        if j == self.p.len() {
            self.close(sum, used);
            return;
        }
        for i in 0..self.pins[j].len() {
            let v = self.pins[j][i];
            self.point[j] = v;
            self.dfs(j + 1, sum + v, used + (v - self.p[j]).abs());
        }
        if self.free.len() < self.max_free {
            self.free.push(j);
            self.dfs(j + 1, sum, used);
            self.free.pop();
        }
    }

    fn close(&mut self, sum: f64, used: f64) {
        let rest = 1.0 - sum;
        match self.free.as_slice() {
            [] => {
                if rest.abs() <= SLACK {
                    self.out.push(self.point.clone());
                }
            }
            &[j] => {
                if let Some(v) = self.fit(j, rest) {
                    let total = used + (v - self.p[j]).abs();
                    if self.l1_budget.is_none_or(|b| total <= b + SLACK) {
                        let mut n = self.point.clone();
                        n[j] = v;
                        self.out.push(n);
                    }
                }
            }
            &[i, j] => {
                let Some(budget) = self.l1_budget else {
                    return;
                };
                let spare = budget - used;
                // one location above its share, the other below
                for (up, down) in [(i, j), (j, i)] {
                    let x_up = 0.5 * (rest + spare + self.p[up] - self.p[down]);
                    let x_down = rest - x_up;
                    if x_up < self.p[up] - SLACK || x_down > self.p[down] + SLACK {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (self.fit(up, x_up), self.fit(down, x_down)) {
                        let mut n = self.point.clone();
                        n[up] = a;
                        n[down] = b;
                        self.out.push(n);
                    }
                }
            }
            _ => unreachable!("at most two free locations"),
        }
    }

    fn fit(&self, j: usize, v: f64) -> Option<f64> {
        if v < self.lower[j] - SLACK || v > self.upper[j] + SLACK {
            None
        } else {
            Some(v.clamp(self.lower[j], self.upper[j]))
        }
    }
}

/// Vertices of the feasible allocation polytope, projected to `n`.
///
/// Points are returned in lexicographic order. The list also contains the
/// proportional kinks `n_j = p_j` that are vertices of the lifted program
/// even when they are not extreme in `n`.
pub fn enumerate_vertices(scenario: &Scenario) -> Result<Vec<Allocation>> {
    let k = scenario.k();
    if k > VERTEX_LOCATION_LIMIT {
        return Err(Error::ScaleLimit {
            what: "locations",
            size: k,
            limit: VERTEX_LOCATION_LIMIT,
        });
    }
    let p = scenario.shares();
    let alpha = scenario.alpha();
    let eps = scenario.epsilon();
    let cap: Vec<f64> = p.iter().map(|&pj| pj / alpha).collect();
    let (lower, upper, l1_budget, max_free) = match scenario.distance() {
        Distance::L1 => (vec![0.0; k], cap.clone(), Some(eps), 2),
        Distance::LInf => (
            p.iter().map(|&pj| (pj * (1.0 - eps)).max(0.0)).collect(),
            p.iter()
                .zip(&cap)
                .map(|(&pj, &c)| (pj * (1.0 + eps)).min(c))
                .collect::<Vec<_>>(),
            None,
            1,
        ),
    };
    let pins = (0..k)
        .map(|j| {
            let mut v = vec![lower[j], p[j], upper[j]];
            v.dedup_by(|a, b| (*a - *b).abs() <= VERTEX_DEDUP_TOL);
            v
        })
        .collect();
    let mut search = Search {
        p,
        lower,
        upper,
        pins,
        l1_budget,
        max_free,
        point: vec![0.0; k],
        free: Vec::new(),
        out: Vec::new(),
    };
    search.dfs(0, 0.0, 0.0);

    let mut points = search.out;
    points.sort_by(|a, b| a.partial_cmp(b).expect("vertex coordinates are finite"));
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for n in points {
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|m| n[0] - m[0] <= VERTEX_DEDUP_TOL)
            .any(|m| m.iter().zip(&n).all(|(a, b)| (a - b).abs() <= VERTEX_DEDUP_TOL));
        if !duplicate {
            kept.push(n);
        }
    }
    kept.into_iter().map(normalize).collect()
}

/// Removes rounding drift from the simplex sum before validation.
fn normalize(mut n: Vec<f64>) -> Result<Allocation> {
    let sum: f64 = n.iter().sum();
    n.iter_mut().for_each(|v| *v /= sum);
    Allocation::new(n)
}

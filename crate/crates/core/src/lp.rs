//! Dense two-phase tableau simplex for `min cᵀx  s.t.  Ax ≤ b, x ≥ 0`.
//!
//! Rows with negative right-hand side are negated and given an artificial
//! variable; phase I drives the artificials to zero. Entering variables are
//! priced by the most negative reduced cost, switching to Bland's rule
//! after a run of degenerate pivots so the method cannot cycle. The final
//! basis is re-solved with an LU factorization to remove the round-off
//! accumulated by the tableau updates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 40;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    m: usize,
    /// Number of columns excluding the right-hand side.
    cols: usize,
    /// Row-major `m × (cols + 1)`, last entry of each row is the rhs.
    data: Vec<f64>,
    /// Reduced costs, last entry is minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width();
        self.obj = cost.to_vec();
        self.obj.push(0.0);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (o, a) in self.obj.iter_mut().zip(row) {
                    *o -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let inv = 1.0 / self.at(r, c);
        let mut prow = self.data[r * w..(r + 1) * w].to_vec();
        for v in prow.iter_mut() {
            *v *= inv;
        }
        prow[c] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (a, p) in row.iter_mut().zip(&prow) {
                *a -= f * p;
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (o, p) in self.obj.iter_mut().zip(&prow) {
                *o -= f * p;
            }
            self.obj[c] = 0.0;
        }
        self.data[r * w..(r + 1) * w].copy_from_slice(&prow);
        self.basis[r] = c;
    }

    fn entering(&self, allowed: &[bool], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if !allowed[j] || self.obj[j] >= -COST_TOL {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, v)| self.obj[j] < v) {
                best = Some((j, self.obj[j]));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum-ratio row, ties broken towards the smallest basic index.
    fn leaving(&self, c: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, c);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i).max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                    if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best
    }

    fn run(&mut self, allowed: &[bool], iterations: &mut usize, limit: usize) -> Outcome {
        let mut degenerate = 0;
        loop {
            if *iterations >= limit {
                return Outcome::Limit;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let Some(c) = self.entering(allowed, bland) else {
                return Outcome::Optimal;
            };
            let Some((r, ratio)) = self.leaving(c) else {
                return Outcome::Unbounded;
            };
            self.pivot(r, c);
            *iterations += 1;
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    fn most_negative_cost(&self, allowed: &[bool]) -> f64 {
        (0..self.cols)
            .filter(|&j| allowed[j])
            .map(|j| (-self.obj[j]).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Solve `min cᵀx` subject to `Ax ≤ b`, `x ≥ 0` with at most `max_iters`
/// pivots in total.
pub fn minimize_le(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, max_iters: usize) -> Result<LpSolution> {
    let (m, nv) = a.shape();
    if b.len() != m || c.len() != nv {
        return Err(Error::invalid("LP dimensions do not agree"));
    }
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let na = negative.len();
    let cols = nv + m + na;
    let w = cols + 1;

    // Augmented constraint matrix, rows with negative rhs negated.
    let mut full = DMatrix::<f64>::zeros(m, cols);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            full[(i, j)] = flip * a[(i, j)];
        }
        full[(i, nv + i)] = flip;
        rhs[i] = flip * b[i];
        if flip < 0.0 {
            full[(i, nv + m + art)] = 1.0;
            basis[i] = nv + m + art;
            art += 1;
        } else {
            basis[i] = nv + i;
        }
    }
    let mut data = vec![0.0; m * w];
    for i in 0..m {
        for j in 0..cols {
            data[i * w + j] = full[(i, j)];
        }
        data[i * w + cols] = rhs[i];
    }
    let mut t = Tableau {
        m,
        cols,
        data,
        obj: Vec::new(),
        basis,
    };
    let mut iterations = 0;
    let mut allowed = vec![true; cols];

    if na > 0 {
        let mut cost = vec![0.0; cols];
        for v in cost.iter_mut().skip(nv + m) {
            *v = 1.0;
        }
        t.set_costs(&cost);
        match t.run(&allowed, &mut iterations, max_iters) {
            Outcome::Optimal => {}
            Outcome::Unbounded => return Err(Error::Internal("phase I unbounded".into())),
            Outcome::Limit => {
                return Err(Error::LpIterationLimit {
                    iterations,
                    objective: f64::NAN,
                    gap: -t.obj[cols],
                })
            }
        }
        let infeasibility = -t.obj[cols];
        if infeasibility > 1e-7 * (1.0 + b.amax()) {
            return Err(Error::Internal(format!("LP infeasible (phase I value {infeasibility:.3e})")));
        }
        // Pivot zero-level artificials out of the basis where possible.
        for i in 0..m {
            if t.basis[i] < nv + m {
                continue;
            }
            if let Some(j) = (0..nv + m).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                t.pivot(i, j);
            }
        }
        for flag in allowed.iter_mut().skip(nv + m) {
            *flag = false;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..nv].copy_from_slice(c.as_slice());
    t.set_costs(&cost);
    match t.run(&allowed, &mut iterations, max_iters) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Err(Error::Internal("LP unbounded".into())),
        Outcome::Limit => {
            return Err(Error::LpIterationLimit {
                iterations,
                objective: -t.obj[cols],
                gap: t.most_negative_cost(&allowed),
            })
        }
    }

    let mut x = DVector::<f64>::zeros(cols);
    for i in 0..m {
        x[t.basis[i]] = t.rhs(i);
    }
    // Basis re-solve.
    let cols_b: Vec<usize> = t.basis.clone();
    let ab = full.select_columns(&cols_b);
    if let Some(xb) = ab.lu().solve(&rhs) {
        if xb.iter().all(|v| v.is_finite()) {
            x.fill(0.0);
            for (i, &j) in cols_b.iter().enumerate() {
                x[j] = xb[i];
            }
        }
    }
    let x = DVector::from_iterator(nv, x.iter().take(nv).map(|v| v.max(0.0)));
    let objective = c.dot(&x);
    Ok(LpSolution { x, objective, iterations })
}

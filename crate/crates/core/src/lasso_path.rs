//! Lasso regularization path for `(1/2n)‖Y − Xβ‖² + λ‖β‖₁`.
//!
//! [`lars_path`] is the LARS homotopy with the lasso modification (a
//! coefficient that would cross zero leaves the active set). The active Gram
//! matrix is held as a Cholesky factor updated one variable at a time. At
//! every knot the active coefficients are re-solved from the normal
//! equations `G_AA β_A = z_A − λ s_A`, so knot values do not accumulate
//! drift along the path.
//!
//! Sign convention everywhere: the gradient of the smooth part is
//! `g = −Xᵀ(Y − Xβ)/n`.
//!
//! [`cd_lasso`] is an independent cyclic coordinate-descent solver used to
//! cross-check the path, and [`kkt_residual`] certifies either solution.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, UpdatableCholesky};

/// Pivot tolerance for adding a column to the active Cholesky factor,
/// relative to the column's squared norm.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Knot {
    pub lambda: f64,
    pub beta: DVector<f64>,
    /// Active set governing the segment that starts at this knot.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEnd {
    /// The path was followed down to λ = 0.
    ReachedZero,
    /// With `p > n`, the active set reached `n − 1` variables.
    ActiveLimit,
    /// `max_knots` knots were produced.
    KnotLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct LassoPath {
    knots: Vec<Knot>,
    lambda_max: f64,
    end: PathEnd,
}

impl LassoPath {
    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn end(&self) -> PathEnd {
        self.end
    }

    pub fn p(&self) -> usize {
        self.knots[0].beta.len()
    }

    /// Smallest penalty at which the path is exact.
    pub fn lambda_min(&self) -> f64 {
        self.knots.last().map(|k| k.lambda).unwrap_or(0.0)
    }

    /// Lasso solution at `lambda` by linear interpolation between the
    /// bracketing knots. Penalties at or above `λ_max` give the zero vector;
    /// penalties below [`LassoPath::lambda_min`] on a truncated path return
    /// the last knot.
    pub fn at(&self, lambda: f64) -> DVector<f64> {
        let first = &self.knots[0];
        if lambda >= first.lambda {
            return DVector::zeros(self.p());
        }
        for pair in self.knots.windows(2) {
            let (hi, lo) = (&pair[0], &pair[1]);
            if lambda == lo.lambda {
                return lo.beta.clone();
            }
            if lambda > lo.lambda {
                let t = (hi.lambda - lambda) / (hi.lambda - lo.lambda);
                return hi.beta.scale(1.0 - t) + lo.beta.scale(t);
            }
        }
        self.knots.last().expect("path has a knot").beta.clone()
    }

    /// CSV rows `knot,lambda,j,beta_j` for every nonzero coefficient.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "knot,lambda,j,beta_j")?;
        for (k, knot) in self.knots.iter().enumerate() {
            for (j, b) in knot.beta.iter().enumerate() {
                if *b != 0.0 {
                    writeln!(out, "{k},{},{j},{b}", knot.lambda)?;
                }
            }
        }
        Ok(())
    }
}

/// Generous knot budget for a path on an `n × p` design.
pub fn default_max_knots(n: usize, p: usize) -> usize {
    8 * n.min(p) + 64
}

/// Lasso solution at `lambda_n` read off `path` (see [`LassoPath::at`]).
pub fn lasso_at(path: &LassoPath, lambda_n: f64) -> DVector<f64> {
    path.at(lambda_n)
}

enum Event {
    Join(usize),
    Drop(usize),
    End,
}

fn first_argmax_abs(v: &DVector<f64>) -> (usize, f64) {
    let mut best = (0, v[0].abs());
    for (j, x) in v.iter().enumerate().skip(1) {
        if x.abs() > best.1 {
            best = (j, x.abs());
        }
    }
    best
}

/// Full LARS-lasso path of `(X, Y)`.
///
/// Ties between variables reaching the maximal correlation are broken by the
/// lowest index. The path stops at λ = 0, when (for `p > n`) the active set
/// reaches `n − 1` variables (the last knot is where the next variable would
/// enter), or after `max_knots` knots.
pub fn lars_path(x: &DMatrix<f64>, y: &DVector<f64>, max_knots: usize) -> Result<LassoPath> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::invalid("empty design"));
    }
    if y.len() != n {
        return Err(Error::invalid(format!("response length {} != n = {n}", y.len())));
    }
    if max_knots == 0 {
        return Err(Error::invalid("max_knots must be >= 1"));
    }
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared() / nf).collect();
    if let Some(j) = col_sq.iter().position(|v| *v == 0.0) {
        return Err(Error::invalid(format!("column {j} is identically zero")));
    }
    let z = x.tr_mul(y) / nf;
    let (j0, lambda_max) = first_argmax_abs(&z);
    let zero_knot = |active: Vec<usize>| Knot {
        lambda: lambda_max,
        beta: DVector::zeros(p),
        active,
    };
    if lambda_max == 0.0 {
        return Ok(LassoPath {
            knots: vec![zero_knot(Vec::new())],
            lambda_max,
            end: PathEnd::ReachedZero,
        });
    }
    let max_active = if p <= n { p } else { n - 1 };
    if max_active == 0 {
        return Ok(LassoPath {
            knots: vec![zero_knot(Vec::new())],
            lambda_max,
            end: PathEnd::ActiveLimit,
        });
    }

    let mut gram: Vec<Option<DVector<f64>>> = vec![None; p];
    let mut gram_col = |j: usize| -> DVector<f64> {
        gram[j]
            .get_or_insert_with(|| x.tr_mul(&x.column(j)) / nf)
            .clone()
    };

    let mut active: Vec<usize> = Vec::new();
    let mut active_cols: Vec<DVector<f64>> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut is_active = vec![false; p];
    let mut chol = UpdatableCholesky::new();

    let col = gram_col(j0);
    chol.push(&[], col_sq[j0], PIVOT_TOL);
    active.push(j0);
    active_cols.push(col);
    signs.push(linalg::sign(z[j0]));
    is_active[j0] = true;

    let mut beta: DVector<f64> = DVector::zeros(p);
    let mut lambda = lambda_max;
    let mut c = z.clone();
    let mut knots = vec![zero_knot(active.clone())];
    let tiny = 1e-12 * lambda_max;
    let mut last_dropped: Option<usize> = None;
    let mut last_joined: Option<usize> = Some(j0);
    let iteration_cap = max_knots + 4 * p + 16;

    for _ in 0..iteration_cap {
        if knots.len() >= max_knots {
            return Ok(LassoPath { knots, lambda_max, end: PathEnd::KnotLimit });
        }
        let w = chol.solve(&signs);
        let mut a: DVector<f64> = DVector::zeros(p);
        for (wk, gk) in w.iter().zip(&active_cols) {
            a.axpy(*wk, gk, 1.0);
        }

        let mut gamma = lambda;
        let mut event = Event::End;
        for j in 0..p {
            if is_active[j] {
                continue;
            }
            let floor = if last_dropped == Some(j) { tiny } else { -1.0 };
            let up = 1.0 - a[j];
            if up > 1e-12 {
                let g = (lambda - c[j]).max(0.0) / up;
                if g > floor && g < gamma {
                    gamma = g;
                    event = Event::Join(j);
                }
            }
            let down = 1.0 + a[j];
            if down > 1e-12 {
                let g = (lambda + c[j]).max(0.0) / down;
                if g > floor && g < gamma {
                    gamma = g;
                    event = Event::Join(j);
                }
            }
        }
        for (k, &j) in active.iter().enumerate() {
            if w[k] == 0.0 || last_joined == Some(j) && beta[j] == 0.0 {
                continue;
            }
            let g = -beta[j] / w[k];
            if g > tiny && g < gamma {
                gamma = g;
                event = Event::Drop(k);
            }
        }

        let moved = gamma > tiny;
        if moved {
            lambda = if matches!(event, Event::End) { 0.0 } else { lambda - gamma };
            let rhs: Vec<f64> = active
                .iter()
                .zip(&signs)
                .map(|(&j, s)| z[j] - lambda * s)
                .collect();
            let sol = chol.solve(&rhs);
            for (&j, v) in active.iter().zip(sol) {
                beta[j] = v;
            }
        }

        last_dropped = None;
        last_joined = None;
        match event {
            Event::End => {}
            Event::Drop(k) => {
                let j = active.remove(k);
                beta[j] = 0.0;
                chol.remove(k);
                active_cols.remove(k);
                signs.remove(k);
                is_active[j] = false;
                last_dropped = Some(j);
            }
            Event::Join(_) => {}
        }

        // c = z − G_{·A} β_A
        c.copy_from(&z);
        for (&j, gk) in active.iter().zip(&active_cols) {
            c.axpy(-beta[j], gk, 1.0);
        }

        if let Event::Join(j) = event {
            if active.len() >= max_active {
                push_knot(&mut knots, moved, lambda, &beta, &active);
                return Ok(LassoPath { knots, lambda_max, end: PathEnd::ActiveLimit });
            }
            let gj = gram_col(j);
            let cross: Vec<f64> = active.iter().map(|&i| gj[i]).collect();
            if !chol.push(&cross, col_sq[j], PIVOT_TOL) {
                let mut set = active.clone();
                set.push(j);
                return Err(Error::DegenerateDesign { active: set });
            }
            active.push(j);
            active_cols.push(gj);
            signs.push(linalg::sign(c[j]));
            is_active[j] = true;
            last_joined = Some(j);
        }

        push_knot(&mut knots, moved, lambda, &beta, &active);
        if matches!(event, Event::End) || lambda <= tiny {
            return Ok(LassoPath { knots, lambda_max, end: PathEnd::ReachedZero });
        }
    }
    Ok(LassoPath { knots, lambda_max, end: PathEnd::KnotLimit })
}

fn push_knot(knots: &mut Vec<Knot>, moved: bool, lambda: f64, beta: &DVector<f64>, active: &[usize]) {
    if moved {
        knots.push(Knot {
            lambda,
            beta: beta.clone(),
            active: active.to_vec(),
        });
    } else if let Some(last) = knots.last_mut() {
        // Zero-length step: another event at the same penalty.
        last.beta = beta.clone();
        last.active = active.to_vec();
    }
}

/// Lasso KKT violation of `beta` at penalty `lambda_n`: the largest of
/// `|g_j + λ sign(β_j)|` over nonzero coefficients and `max(0, |g_j| − λ)`
/// over zero coefficients, with `g = −Xᵀ(Y − Xβ)/n`.
pub fn kkt_residual(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda_n: f64) -> f64 {
    let resid = y - x * beta;
    let g = -linalg::scaled_xt_mul(x, &resid);
    g.iter()
        .zip(beta.iter())
        .map(|(gj, bj)| {
            if *bj != 0.0 {
                (gj + lambda_n * linalg::sign(*bj)).abs()
            } else {
                (gj.abs() - lambda_n).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent for the lasso at a single penalty.
///
/// Sweeps until the largest coordinate change falls below
/// `tol · (1 + ‖β‖∞)` and the KKT residual is at most `10 · tol`.
pub fn cd_lasso(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda_n: f64,
    tol: f64,
    max_iters: usize,
) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    if !(lambda_n > 0.0) {
        return Err(Error::invalid(format!("cd_lasso needs lambda > 0, got {lambda_n}")));
    }
    if y.len() != n {
        return Err(Error::invalid(format!("response length {} != n = {n}", y.len())));
    }
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared() / nf).collect();
    if col_sq.iter().any(|v| *v == 0.0) {
        return Err(Error::invalid("zero column in design"));
    }
    let mut beta: DVector<f64> = DVector::zeros(p);
    if linalg::inf_norm(&linalg::scaled_xt_mul(x, y)) <= lambda_n {
        return Ok(beta);
    }
    let mut resid = y.clone();
    let mut kkt = f64::INFINITY;
    for _ in 0..max_iters {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let xj = x.column(j);
            let old = beta[j];
            let rho = xj.dot(&resid) / nf + col_sq[j] * old;
            let new = linalg::soft_threshold(rho, lambda_n) / col_sq[j];
            if new != old {
                resid.axpy(old - new, &xj, 1.0);
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change < tol * (1.0 + linalg::inf_norm(&beta)) {
            resid = y - x * &beta;
            kkt = kkt_residual(x, y, &beta, lambda_n);
            if kkt <= 10.0 * tol {
                return Ok(beta);
            }
        }
    }
    if kkt.is_infinite() {
        kkt = kkt_residual(x, y, &beta, lambda_n);
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual: kkt,
    })
}

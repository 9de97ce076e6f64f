//! Dantzig selector: `min ‖β‖₁` subject to `‖Xᵀ(Y − Xβ)/n‖∞ ≤ λ_n`.
//!
//! Solved as a linear program in split variables `β = u − v` with
//! `u, v ≥ 0` and the 2p constraints
//! `G(u − v) ≤ z + λ`, `−G(u − v) ≤ λ − z`, where `G = XᵀX/n` and
//! `z = XᵀY/n`. When the LP has several optimal vertices the first one
//! reached by the simplex is returned.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp;

/// Largest constraint violation accepted from the LP solve.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DantzigSolution {
    pub beta: DVector<f64>,
    pub lambda_n: f64,
    pub l1_norm: f64,
    /// `max(0, ‖Xᵀ(Y − Xβ)/n‖∞ − λ_n)`.
    pub feasibility_gap: f64,
}

/// `‖Xᵀ(Y − Xβ)/n‖∞ − λ_n`; negative means strictly feasible.
pub fn ds_feasibility(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda_n: f64) -> f64 {
    let resid = y - x * beta;
    linalg::inf_norm(&linalg::scaled_xt_mul(x, &resid)) - lambda_n
}

pub fn dantzig_selector(x: &DMatrix<f64>, y: &DVector<f64>, lambda_n: f64) -> Result<DantzigSolution> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::invalid("empty design"));
    }
    if y.len() != n {
        return Err(Error::invalid(format!("response length {} != n = {n}", y.len())));
    }
    if !(lambda_n >= 0.0) || !lambda_n.is_finite() {
        return Err(Error::invalid(format!("lambda_n must be finite and >= 0, got {lambda_n}")));
    }
    let z = linalg::scaled_xt_mul(x, y);
    if linalg::inf_norm(&z) <= lambda_n {
        return Ok(DantzigSolution {
            beta: DVector::zeros(p),
            lambda_n,
            l1_norm: 0.0,
            feasibility_gap: 0.0,
        });
    }

    let g = x.tr_mul(x) / n as f64;
    let mut a = DMatrix::<f64>::zeros(2 * p, 2 * p);
    a.view_mut((0, 0), (p, p)).copy_from(&g);
    a.view_mut((0, p), (p, p)).copy_from(&(-&g));
    a.view_mut((p, 0), (p, p)).copy_from(&(-&g));
    a.view_mut((p, p), (p, p)).copy_from(&g);
    let mut b = DVector::<f64>::zeros(2 * p);
    for j in 0..p {
        b[j] = z[j] + lambda_n;
        b[p + j] = lambda_n - z[j];
    }
    let c = DVector::from_element(2 * p, 1.0);
    let sol = lp::minimize_le(&a, &b, &c, 200 * p + 1000)?;

    let beta = DVector::from_fn(p, |j, _| sol.x[j] - sol.x[p + j]);
    let gap = ds_feasibility(x, y, &beta, lambda_n).max(0.0);
    if gap > FEASIBILITY_TOL {
        return Err(Error::Internal(format!(
            "Dantzig LP solution violates the constraint by {gap:.3e}"
        )));
    }
    Ok(DantzigSolution {
        l1_norm: linalg::l1_norm(&beta),
        beta,
        lambda_n,
        feasibility_gap: gap,
    })
}

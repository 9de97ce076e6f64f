//! Least-squares refit on a selected model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::GroundTruth;

/// Smallest accepted ratio of extreme singular values of `X_I`.
pub const RANK_TOL: f64 = 1e-8;

fn normalized_set(set: &[usize], n: usize, p: usize) -> Result<Vec<usize>> {
    let mut idx = set.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&j) = idx.iter().find(|&&j| j >= p) {
        return Err(Error::invalid(format!("index {j} out of range for p = {p}")));
    }
    if idx.len() > n {
        return Err(Error::invalid(format!("model size {} exceeds n = {n}", idx.len())));
    }
    Ok(idx)
}

/// OLS of `y` on the columns `set` of `x`, returned as a length-p vector
/// that is zero off `set`. Solved through a Householder QR of `X_I`.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, set: &[usize]) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::invalid(format!("response length {} != n = {n}", y.len())));
    }
    let idx = normalized_set(set, n, p)?;
    let mut beta = DVector::zeros(p);
    if idx.is_empty() {
        return Ok(beta);
    }
    let k = idx.len();
    let qr = linalg::select_columns(x, &idx).qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (smin, smax) = (sv.min(), sv.max());
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio >= RANK_TOL) {
        return Err(Error::RankDeficient { set: idx, ratio });
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let coef = r
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::RankDeficient { set: idx.clone(), ratio })?;
    for (&j, c) in idx.iter().zip(coef.iter()) {
        beta[j] = *c;
    }
    Ok(beta)
}

/// The two terms of `E‖Xβ̂_I − Xβ‖²/n` for the OLS refit on `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossDecomposition {
    /// `‖(P_I − Id) X_{Iᶜ} β_{Iᶜ}‖² / n`
    pub bias_sq: f64,
    /// `|I| σ² / n`
    pub variance: f64,
}

impl LossDecomposition {
    pub fn total(&self) -> f64 {
        self.bias_sq + self.variance
    }
}

pub fn ols_loss_decomposition(
    x: &DMatrix<f64>,
    truth: &GroundTruth,
    set: &[usize],
    sigma: f64,
) -> Result<LossDecomposition> {
    let (n, p) = x.shape();
    if truth.p() != p {
        return Err(Error::invalid("truth length does not match design"));
    }
    let idx = normalized_set(set, n, p)?;
    let mut missing = truth.beta().clone();
    for &j in &idx {
        missing[j] = 0.0;
    }
    let v = x * &missing;
    let fitted = x * ols(x, &v, &idx)?;
    Ok(LossDecomposition {
        bias_sq: (fitted - v).norm_squared() / n as f64,
        variance: idx.len() as f64 * sigma * sigma / n as f64,
    })
}

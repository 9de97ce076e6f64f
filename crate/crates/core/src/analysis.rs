//! Incoherence constants, oracle quantities and theoretical constants, plus
//! a per-realization audit of the thresholding theorems.
//!
//! Sparse eigenvalues and restricted orthogonality constants are computed by
//! enumerating column subsets of exactly the requested size. Both are
//! monotone in the size (Cauchy interlacing for eigenvalues, submatrix
//! singular values for θ), so the exact-size values equal the `≤`-size
//! values used in the theory. Sampled mode draws random subsets instead and
//! gives one-sided estimates: an upper estimate of `Λ_min`, lower estimates
//! of `Λ_max`, `δ` and `θ`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics;
use crate::model::{GroundTruth, ProblemInstance};
use crate::procedures::ProcedureResult;
use crate::refit;
use crate::rng::SimRng;

pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnumerationMode {
    Exact { budget: u64 },
    Sampled { trials: usize, seed: u64 },
}

impl EnumerationMode {
    pub fn exact() -> Self {
        EnumerationMode::Exact { budget: DEFAULT_BUDGET }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, EnumerationMode::Exact { .. })
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_budget(required: u128, mode: &EnumerationMode) -> Result<()> {
    if let EnumerationMode::Exact { budget } = mode {
        if required > *budget as u128 {
            return Err(Error::Budget {
                required,
                budget: *budget as u128,
            });
        }
    }
    Ok(())
}

/// `XᵀX / n`.
pub fn gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.tr_mul(x) / x.nrows() as f64
}

fn principal(g: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])])
}

fn subset_extremes(g: &DMatrix<f64>, idx: &[usize]) -> (f64, f64) {
    if idx.len() == 1 {
        let d = g[(idx[0], idx[0])];
        return (d, d);
    }
    let ev = principal(g, idx).symmetric_eigenvalues();
    (ev.min(), ev.max())
}

fn cross_norm(g: &DMatrix<f64>, t: &[usize], u: &[usize]) -> f64 {
    let block = DMatrix::from_fn(t.len(), u.len(), |i, j| g[(t[i], u[j])]);
    if t.len() == 1 || u.len() == 1 {
        block.norm()
    } else {
        block.singular_values().max()
    }
}

fn merge_extremes(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

fn eigs_from_gram(g: &DMatrix<f64>, m: usize, mode: &EnumerationMode) -> Result<(f64, f64)> {
    let p = g.nrows();
    if m == 0 || m > p {
        return Err(Error::invalid(format!("subset size {m} outside 1..={p}")));
    }
    check_budget(binomial(p, m), mode)?;
    let init = (f64::INFINITY, f64::NEG_INFINITY);
    Ok(match mode {
        EnumerationMode::Exact { .. } => (0..p)
            .combinations(m)
            .par_bridge()
            .map(|idx| subset_extremes(g, &idx))
            .reduce(|| init, merge_extremes),
        EnumerationMode::Sampled { trials, seed } => {
            let mut rng = SimRng::seed_from(*seed).child(m as u64);
            (0..(*trials).max(1)).fold(init, |acc, _| merge_extremes(acc, subset_extremes(g, &rng.subset(p, m))))
        }
    })
}

fn theta_from_gram(g: &DMatrix<f64>, s: usize, s_prime: usize, mode: &EnumerationMode) -> Result<f64> {
    let p = g.nrows();
    if s == 0 || s_prime == 0 {
        return Ok(0.0);
    }
    if s + s_prime > p {
        return Err(Error::invalid(format!("theta needs s + s' <= p ({s} + {s_prime} > {p})")));
    }
    check_budget(binomial(p, s).saturating_mul(binomial(p - s, s_prime)), mode)?;
    Ok(match mode {
        EnumerationMode::Exact { .. } => (0..p)
            .combinations(s)
            .par_bridge()
            .map(|t| {
                let rest = linalg::complement(&t, p);
                rest.iter()
                    .copied()
                    .combinations(s_prime)
                    .map(|u| cross_norm(g, &t, &u))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max),
        EnumerationMode::Sampled { trials, seed } => {
            let mut rng = SimRng::seed_from(*seed).child(((s as u64) << 32) | s_prime as u64);
            let mut best: f64 = 0.0;
            for _ in 0..(*trials).max(1) {
                let both = rng.subset(p, s + s_prime);
                let mut order = both;
                // Random split of the drawn set into T and T'.
                for i in (1..order.len()).rev() {
                    order.swap(i, rng.below(i + 1));
                }
                let (t, u) = order.split_at(s);
                best = best.max(cross_norm(g, t, u));
            }
            best
        }
    })
}

/// `(Λ_min(m), Λ_max(m))`: extreme eigenvalues of `X_TᵀX_T/n` over subsets
/// `|T| = m`.
pub fn sparse_eigs(x: &DMatrix<f64>, m: usize, mode: &EnumerationMode) -> Result<(f64, f64)> {
    eigs_from_gram(&gram(x), m, mode)
}

/// Restricted isometry constant `δ_s = max_{m ≤ s} max(Λ_max(m) − 1, 1 − Λ_min(m))`.
pub fn delta_s(x: &DMatrix<f64>, s: usize, mode: &EnumerationMode) -> Result<f64> {
    let g = gram(x);
    let mut delta: f64 = 0.0;
    for m in 1..=s {
        let (lo, hi) = eigs_from_gram(&g, m, mode)?;
        delta = delta.max(hi - 1.0).max(1.0 - lo);
    }
    Ok(delta)
}

/// Restricted orthogonality constant `θ_{s,s'}`: largest singular value of
/// `X_TᵀX_{T'}/n` over disjoint `|T| = s`, `|T'| = s'`.
pub fn theta(x: &DMatrix<f64>, s: usize, s_prime: usize, mode: &EnumerationMode) -> Result<f64> {
    theta_from_gram(&gram(x), s, s_prime, mode)
}

/// Upper bound on the restricted-eigenvalue constant `K(s, k0)` from sparse
/// eigenvalues: `√Λ_min(2s) / (Λ_min(2s) − k0 θ_{s,2s})`. For `k0 = 1` this
/// is the classical UUP implication; larger `k0` use the same argument with
/// the cone width. `None` when the bound is vacuous.
pub fn re_constant_upper(lambda_min_2s: f64, theta_s_2s: f64, k0: f64) -> Option<f64> {
    let denom = lambda_min_2s - k0 * theta_s_2s;
    if lambda_min_2s > 0.0 && denom > 0.0 {
        Some(lambda_min_2s.sqrt() / denom)
    } else {
        None
    }
}

/// Lower estimate of `K(s, k0)`: the largest `√n‖υ_{J0}‖/‖Xυ‖` over sampled
/// cone members `‖υ_{J0ᶜ}‖₁ ≤ k0 ‖υ_{J0}‖₁`, `|J0| ≤ s`.
pub fn re_cone_lower_estimate(x: &DMatrix<f64>, s: usize, k0: f64, trials: usize, seed: u64) -> f64 {
    let (n, p) = x.shape();
    let g = gram(x);
    let mut rng = SimRng::seed_from(seed);
    let mut best: f64 = 0.0;
    let mut consider = |v: &DVector<f64>, j0: &[usize]| {
        let on: f64 = j0.iter().map(|&j| v[j].abs()).sum();
        let total = linalg::l1_norm(v);
        if total - on > k0 * on * (1.0 + 1e-12) {
            return;
        }
        let num = j0.iter().map(|&j| v[j] * v[j]).sum::<f64>().sqrt();
        let den = (x * v).norm() / (n as f64).sqrt();
        if den > 0.0 {
            best = best.max(num / den);
        }
    };
    let s = s.min(p).max(1);
    for _ in 0..trials {
        // Smallest-eigenvalue direction of a random 2s-subset; its top-s
        // entries dominate the rest, so it lies in the cone for k0 ≥ 1.
        let m = (2 * s).min(p);
        let idx = rng.subset(p, m);
        let eig = principal(&g, &idx).symmetric_eigen();
        let k = eig.eigenvalues.imin();
        let mut v = DVector::zeros(p);
        for (r, &j) in idx.iter().enumerate() {
            v[j] = eig.eigenvectors[(r, k)];
        }
        let mut order = idx.clone();
        order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
        order.truncate(s);
        consider(&v, &order);

        // A random cone member.
        let j0 = rng.subset(p, s);
        let mut w = DVector::zeros(p);
        for &j in &j0 {
            w[j] = rng.normal();
        }
        let on = linalg::l1_norm(&w);
        let rest = linalg::complement(&j0, p);
        if !rest.is_empty() {
            let mut tail = DVector::from_fn(rest.len(), |_, _| rng.normal());
            let budget = k0 * on * rng.uniform();
            let l1 = linalg::l1_norm(&tail);
            if l1 > 0.0 {
                tail *= budget / l1;
            }
            for (r, &j) in rest.iter().enumerate() {
                w[j] = tail[r];
            }
        }
        consider(&w, &j0);
    }
    best
}

/// Sparse eigenvalues, restricted isometry and orthogonality constants for
/// all subset sizes up to `max_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncoherenceReport {
    pub n: usize,
    pub p: usize,
    pub max_size: usize,
    /// `lambda_min[m − 1] = Λ_min(m)`
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
    /// `delta[m − 1] = δ_m`
    pub delta: Vec<f64>,
    /// `theta[a − 1][b − 1] = θ_{a,b}` for `a + b ≤ max_size`.
    pub theta: Vec<Vec<f64>>,
    /// True when every value comes from full enumeration.
    pub enumerated: bool,
}

impl IncoherenceReport {
    pub fn compute(x: &DMatrix<f64>, max_size: usize, mode: &EnumerationMode) -> Result<Self> {
        let (n, p) = x.shape();
        if max_size == 0 || max_size > p {
            return Err(Error::invalid(format!("max_size {max_size} outside 1..={p}")));
        }
        let g = gram(x);
        let mut lambda_min = Vec::with_capacity(max_size);
        let mut lambda_max = Vec::with_capacity(max_size);
        let mut delta = Vec::with_capacity(max_size);
        let mut running: f64 = 0.0;
        for m in 1..=max_size {
            let (lo, hi) = eigs_from_gram(&g, m, mode)?;
            running = running.max(hi - 1.0).max(1.0 - lo);
            lambda_min.push(lo);
            lambda_max.push(hi);
            delta.push(running);
        }
        let mut theta = vec![Vec::new(); max_size.saturating_sub(1)];
        for a in 1..max_size {
            theta[a - 1] = vec![f64::NAN; max_size - a];
        }
        for a in 1..max_size {
            for b in a..=(max_size - a) {
                let v = theta_from_gram(&g, a, b, mode)?;
                theta[a - 1][b - 1] = v;
                theta[b - 1][a - 1] = v;
            }
        }
        Ok(Self {
            n,
            p,
            max_size,
            lambda_min,
            lambda_max,
            delta,
            theta,
            enumerated: mode.is_exact(),
        })
    }

    pub fn lambda_min(&self, m: usize) -> Option<f64> {
        (m >= 1 && m <= self.max_size).then(|| self.lambda_min[m - 1])
    }

    pub fn lambda_max(&self, m: usize) -> Option<f64> {
        (m >= 1 && m <= self.max_size).then(|| self.lambda_max[m - 1])
    }

    pub fn delta(&self, s: usize) -> Option<f64> {
        if s == 0 {
            return Some(0.0);
        }
        (s <= self.max_size).then(|| self.delta[s - 1])
    }

    pub fn theta(&self, a: usize, b: usize) -> Option<f64> {
        if a == 0 || b == 0 {
            return Some(0.0);
        }
        (a + b <= self.max_size).then(|| self.theta[a - 1][b - 1])
    }

    /// Upper bound on `K(s, k0)` (see [`re_constant_upper`]).
    pub fn k_upper(&self, s: usize, k0: f64) -> Option<f64> {
        if s == 0 {
            return None;
        }
        re_constant_upper(self.lambda_min(2 * s)?, self.theta(s, 2 * s)?, k0)
    }

    /// Structural checks: the δ sandwich, monotonicity in the subset size,
    /// and `θ_{a,b} ≤ (Λ_max(a+b) − Λ_min(a+b))/2`. Returns a description of
    /// every violation (meaningful for exact reports).
    pub fn violations(&self) -> Vec<String> {
        const TOL: f64 = 1e-10;
        let mut out = Vec::new();
        for m in 1..=self.max_size {
            let (lo, hi, d) = (self.lambda_min[m - 1], self.lambda_max[m - 1], self.delta[m - 1]);
            if 1.0 - d > lo + TOL || hi > 1.0 + d + TOL {
                out.push(format!("sandwich violated at m={m}"));
            }
            if m > 1 {
                if lo > self.lambda_min[m - 2] + TOL {
                    out.push(format!("Lambda_min increased at m={m}"));
                }
                if hi < self.lambda_max[m - 2] - TOL {
                    out.push(format!("Lambda_max decreased at m={m}"));
                }
                if d < self.delta[m - 2] - TOL {
                    out.push(format!("delta decreased at m={m}"));
                }
            }
        }
        for a in 1..self.max_size {
            for b in 1..=(self.max_size - a) {
                let t = self.theta[a - 1][b - 1];
                let bound = (self.lambda_max[a + b - 1] - self.lambda_min[a + b - 1]) / 2.0;
                if t > bound + TOL {
                    out.push(format!("theta({a},{b}) = {t} exceeds half eigen-range {bound}"));
                }
                if b > 1 && t < self.theta[a - 1][b - 2] - TOL {
                    out.push(format!("theta({a},{b}) decreased in b"));
                }
            }
        }
        out
    }
}

/// `λ = √(2 log p / n)`.
pub fn universal_lambda(n: usize, p: usize) -> f64 {
    (2.0 * (p as f64).ln() / n as f64).sqrt()
}

/// `λ_{σ,a,p} = σ √(1 + a) √(2 log p / n)`.
pub fn lambda_sap(sigma: f64, a: f64, n: usize, p: usize) -> f64 {
    sigma * (1.0 + a).sqrt() * universal_lambda(n, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleQuantities {
    pub s0: usize,
    pub lambda: f64,
    pub lambda_sap: f64,
    /// Positions of the `s0` largest `|β_j|`.
    pub t0: Vec<usize>,
    /// `{j : |β_j| > λσ}`
    pub a0_set: Vec<usize>,
    pub a0: usize,
    pub beta_min: Option<f64>,
    pub beta_min_a0: Option<f64>,
}

/// Indices ordered by decreasing `|β_j|`, ties to the lower index.
fn magnitude_order(beta: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..beta.len()).collect();
    idx.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    idx
}

pub fn oracle_quantities(truth: &GroundTruth, p: usize, n: usize, sigma: f64, a: f64) -> Result<OracleQuantities> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    if truth.p() != p {
        return Err(Error::invalid("truth length does not match p"));
    }
    let lambda = universal_lambda(n, p);
    let level = lambda * sigma;
    let s0 = smallest_s0(truth.beta(), level);
    let mut t0: Vec<usize> = magnitude_order(truth.beta()).into_iter().take(s0).collect();
    t0.sort_unstable();
    let a0_set: Vec<usize> = (0..p).filter(|&j| truth.beta()[j].abs() > level).collect();
    let beta_min_a0 = a0_set.iter().map(|&j| truth.beta()[j].abs()).reduce(f64::min);
    Ok(OracleQuantities {
        s0,
        lambda,
        lambda_sap: lambda_sap(sigma, a, n, p),
        t0,
        a0: a0_set.len(),
        a0_set,
        beta_min: truth.beta_min(),
        beta_min_a0,
    })
}

/// Smallest integer `k` with `Σ min(β_i², level²) ≤ k level²`.
fn smallest_s0(beta: &DVector<f64>, level: f64) -> usize {
    let l2 = level * level;
    let sum: f64 = beta.iter().map(|b| (b * b).min(l2)).sum();
    let mut k = (sum / l2).ceil() as usize;
    while k > 0 && sum <= (k - 1) as f64 * l2 {
        k -= 1;
    }
    while sum > k as f64 * l2 {
        k += 1;
    }
    k
}

/// `|{j ∉ T0 : |β_j| ≥ σ√(log p/(c′n))}| ≤ (2c′ − 1)(s0 − a0)`.
pub fn counting_bound_check(truth: &GroundTruth, p: usize, n: usize, sigma: f64, c_prime: f64) -> Result<bool> {
    if !(c_prime > 0.5) {
        return Err(Error::invalid(format!("c' must exceed 1/2, got {c_prime}")));
    }
    let oq = oracle_quantities(truth, p, n, sigma, 0.0)?;
    let level = ((p as f64).ln() / (c_prime * n as f64)).sqrt() * sigma;
    let count = (0..p)
        .filter(|j| !oq.t0.contains(j))
        .filter(|&j| truth.beta()[j].abs() >= level)
        .count();
    Ok(count as f64 <= (2.0 * c_prime - 1.0) * (oq.s0 - oq.a0) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealMse {
    /// `min_{|I| ≤ s} E‖β̂_I − β‖²` in closed form.
    pub mse: f64,
    /// A minimizing model.
    pub set: Vec<usize>,
    /// Monte-Carlo estimate of `E‖β̂_I − β‖²` on `set`, when requested.
    pub mc_estimate: Option<f64>,
}

/// Risk of the ideal subset least-squares estimator over models of size at
/// most `s`, by exhaustive enumeration.
pub fn ideal_estimator_mse(
    x: &DMatrix<f64>,
    truth: &GroundTruth,
    sigma: f64,
    s: usize,
    mc_reps: usize,
    subset_budget: u64,
    seed: u64,
) -> Result<IdealMse> {
    let (n, p) = x.shape();
    if truth.p() != p {
        return Err(Error::invalid("truth length does not match design"));
    }
    let s = s.min(p);
    let required: u128 = (0..=s).map(|m| binomial(p, m)).fold(0u128, |a, b| a.saturating_add(b));
    check_budget(required, &EnumerationMode::Exact { budget: subset_budget })?;
    let beta = truth.beta();
    let signal = x * beta;
    let risk = |idx: &[usize]| -> Option<f64> {
        if idx.is_empty() {
            return Some(beta.norm_squared());
        }
        if idx.len() > n {
            return None;
        }
        let xi = linalg::select_columns(x, idx);
        let chol = xi.tr_mul(&xi).cholesky()?;
        let inv = chol.inverse();
        let mut missing = signal.clone();
        for &j in idx {
            missing.axpy(-beta[j], &x.column(j), 1.0);
        }
        let off: f64 = (0..p).filter(|j| !idx.contains(j)).map(|j| beta[j] * beta[j]).sum();
        let bias = &inv * xi.tr_mul(&missing);
        Some(off + bias.norm_squared() + sigma * sigma * inv.trace())
    };
    let mut best = (beta.norm_squared(), Vec::new());
    for m in 1..=s {
        let cand = (0..p)
            .combinations(m)
            .par_bridge()
            .filter_map(|idx| risk(&idx).map(|r| (r, idx)))
            .reduce(
                || (f64::INFINITY, Vec::new()),
                |a, b| if b.0 < a.0 || b.0 == a.0 && b.1 < a.1 { b } else { a },
            );
        if cand.0 < best.0 {
            best = cand;
        }
    }
    let mc_estimate = if mc_reps > 0 {
        let mut rng = SimRng::seed_from(seed);
        let mut acc = 0.0;
        for _ in 0..mc_reps {
            let y = DVector::from_fn(n, |i, _| signal[i] + sigma * rng.normal());
            let b = refit::ols(x, &y, &best.1)?;
            acc += (b - beta).norm_squared();
        }
        Some(acc / mc_reps as f64)
    } else {
        None
    };
    Ok(IdealMse {
        mse: best.0,
        set: best.1,
        mc_estimate,
    })
}

/// `min(1, 1/Λ_max(s)) Σ min(β_i², σ²/n)`.
pub fn me_diamond_lower_bound(lambda_max_s: f64, truth: &GroundTruth, sigma: f64, n: usize) -> f64 {
    let floor = sigma * sigma / n as f64;
    let ideal: f64 = truth.beta().iter().map(|b| (b * b).min(floor)).sum();
    (1.0f64).min(1.0 / lambda_max_s) * ideal
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsConstants {
    pub c0: f64,
    pub c0_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Constants of the Gauss-Dantzig analysis with `δ = δ_2s`, `θ = θ_{s,2s}`.
pub fn ds_constants(delta: f64, theta: f64, a: f64, tau: f64, c4: f64, lambda_min_2s0: f64) -> Result<DsConstants> {
    let gap = 1.0 - delta - theta;
    if !(gap > 0.0) {
        return Err(Error::InvalidRegime(format!("1 - delta - theta = {gap} <= 0")));
    }
    if !(tau > 0.0) || !(lambda_min_2s0 > 0.0) {
        return Err(Error::InvalidRegime("tau and Lambda_min(2 s0) must be positive".into()));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let c0 = 2.0 * sqrt2 * (1.0 + (1.0 - delta * delta) / gap) + (1.0 + 1.0 / sqrt2) * (1.0 + delta).powi(2) / gap;
    let c0_prime = c0 / gap + theta * (1.0 + delta) / (gap * gap);
    let c1 = c0_prime + (1.0 + delta) / gap;
    let c2 = 2.0 * c0_prime + (1.0 + delta) / gap;
    let lead = (1.0 + a).sqrt() + 1.0 / tau;
    let c3_sq = 3.0 * lead * lead * ((c0_prime + c4).powi(2) + 1.0) + 4.0 * (1.0 + a) / lambda_min_2s0.powi(2);
    Ok(DsConstants {
        c0,
        c0_prime,
        c1,
        c2,
        c3: c3_sq.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConstants {
    pub d: f64,
    pub d0: f64,
    pub d1: f64,
}

/// Constants of the Thresholded Lasso analysis; `k` is (a bound on)
/// `K(s0, 6)` and `d0 = λ_n / (λσ)`.
pub fn lasso_oracle_constants(
    k: f64,
    lambda_max_s_minus_s0: f64,
    lambda_min_2s0: f64,
    theta_s0_2s0: f64,
    d0: f64,
) -> Result<LassoConstants> {
    if !(k > 0.0 && lambda_min_2s0 > 0.0 && d0 > 0.0 && lambda_max_s_minus_s0 >= 0.0 && theta_s0_2s0 >= 0.0) {
        return Err(Error::invalid("lasso constants need positive K, Lambda_min, d0"));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let lmax = lambda_max_s_minus_s0;
    let d = (sqrt2 + 1.0) * lmax.sqrt() / lambda_min_2s0.sqrt() + theta_s0_2s0 * lmax / lambda_min_2s0;
    let d0_const = d.max(k * sqrt2 * (2.0 * lmax.sqrt() + 3.0 * d0 * k));
    let d1 = 2.0 * lmax / d0 + 9.0 * k * k * d0 / 2.0;
    Ok(LassoConstants { d, d0: d0_const, d1 })
}

/// `f(I) = √(2(1+a) Λ_max(|I|)) / Λ_min(|I|)`, zero for the empty model.
pub fn f_model(a: f64, lambda_max_i: f64, lambda_min_i: f64, size: usize) -> f64 {
    if size == 0 {
        0.0
    } else {
        (2.0 * (1.0 + a) * lambda_max_i).sqrt() / lambda_min_i
    }
}

/// Prediction-error constant of the Gauss-Dantzig selector.
pub fn c5_constant(lambda_max_s: f64, c0_prime: f64, c4: f64, a: f64, tau: f64, f_i: f64) -> f64 {
    lambda_max_s.sqrt() * ((c0_prime + c4).powi(2) + 1.0).sqrt() * ((1.0 + a).sqrt() + 1.0 / tau) + f_i
}

/// Prediction-error constant of the Thresholded Lasso.
pub fn c6_constant(lambda_max_s: f64, d0: f64, c4: f64, f_i: f64) -> f64 {
    lambda_max_s.sqrt() * ((d0 + c4).powi(2) + 1.0).sqrt() + f_i
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Lasso,
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub init: InitKind,
    pub a: f64,
    /// UUP margin `τ` for the Gauss-Dantzig clauses.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub clause: String,
    pub verdict: Verdict,
    pub detail: String,
    /// Premises were evaluated with the eigenvalue-based bound on `K`.
    pub uses_k_surrogate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// `‖Xᵀε/n‖∞ ≤ λ_{σ,a,p}` on the realized noise.
    pub t_a: bool,
    pub clauses: Vec<ClauseCheck>,
}

impl BoundCheck {
    pub fn failures(&self) -> Vec<&ClauseCheck> {
        self.clauses.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn applicable(&self) -> usize {
        self.clauses.iter().filter(|c| c.verdict != Verdict::NotApplicable).count()
    }
}

const AUDIT_TOL: f64 = 1e-9;

struct Clause {
    name: &'static str,
    surrogate: bool,
    premise_failures: Vec<String>,
    conclusion_failures: Vec<String>,
}

impl Clause {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            surrogate: false,
            premise_failures: Vec::new(),
            conclusion_failures: Vec::new(),
        }
    }

    fn premise(&mut self, ok: bool, what: impl Into<String>) -> bool {
        if !ok {
            self.premise_failures.push(what.into());
        }
        ok
    }

    fn premises_hold(&self) -> bool {
        self.premise_failures.is_empty()
    }

    fn conclude(&mut self, lhs: f64, rhs: f64, what: &str) {
        if !(lhs <= rhs * (1.0 + AUDIT_TOL) + AUDIT_TOL) {
            self.conclusion_failures.push(format!("{what}: {lhs:.6e} > {rhs:.6e}"));
        }
    }

    fn conclude_that(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.conclusion_failures.push(what.into());
        }
    }

    fn finish(self) -> ClauseCheck {
        let (verdict, detail) = if !self.premise_failures.is_empty() {
            (Verdict::NotApplicable, format!("premise false: {}", self.premise_failures.join("; ")))
        } else if !self.conclusion_failures.is_empty() {
            (Verdict::Fail, self.conclusion_failures.join("; "))
        } else {
            (Verdict::Pass, String::new())
        };
        ClauseCheck {
            clause: self.name.to_string(),
            verdict,
            detail,
            uses_k_surrogate: self.surrogate,
        }
    }
}

/// Audit the thresholding theorems on one realization.
///
/// Every clause first evaluates its premises on the realized instance
/// (using oracle access to `β` and `ε`); if any premise is false the clause
/// is reported as not applicable, otherwise its conclusions are checked.
/// Requires an exact incoherence report covering all subset sizes used.
pub fn check_theorem_bounds(
    inst: &ProblemInstance,
    result: &ProcedureResult,
    report: &IncoherenceReport,
    settings: &AuditSettings,
) -> Result<BoundCheck> {
    if !report.enumerated {
        return Err(Error::Precision(
            "theorem audit needs an exactly enumerated incoherence report".into(),
        ));
    }
    let x = inst.design();
    let (n, p) = x.shape();
    if report.p != p {
        return Err(Error::invalid("report was computed for a different design"));
    }
    let a = settings.a;
    let sigma = inst.sigma;
    let truth = &inst.truth;
    let beta = truth.beta();
    let support = truth.support();
    let s = support.len();
    let lam = universal_lambda(n, p);
    let lsap = lambda_sap(sigma, a, n, p);
    let noise_corr = linalg::inf_norm(&linalg::scaled_xt_mul(x, &inst.noise));
    let t_a = noise_corr <= lsap;
    let oq = oracle_quantities(truth, p, n, sigma, a)?;
    let s0 = oq.s0;
    let lambda_n = result.lambda_n;

    let selected = result.selected().to_vec();
    let k = selected.len();
    let dropped: Vec<usize> = support.iter().copied().filter(|j| !selected.contains(j)).collect();
    let beta_d_norm = dropped.iter().map(|&j| beta[j] * beta[j]).sum::<f64>().sqrt();
    let lmin = |m: usize| report.lambda_min(m);
    let lmax = |m: usize| if m == 0 { Some(0.0) } else { report.lambda_max(m) };
    let lmin_i = if k == 0 { Some(1.0) } else { lmin(k).filter(|v| *v > 0.0) };
    let ols_i = refit::ols(x, &inst.y, &selected).ok();
    let iterative = result.stages.len() == 3 && result.stages[0].refit.is_none();

    let mut clauses = Vec::new();

    // OLS on a model with missing variables.
    {
        let mut c = Clause::new("mse_missing");
        c.premise(t_a, "T_a event");
        c.premise(k + dropped.len() <= 2 * s, "|I| + |S_D| <= 2s");
        c.premise(lmin_i.is_some(), "Lambda_min(|I|) > 0");
        let th = report.theta(k, dropped.len());
        c.premise(th.is_some(), "theta(|I|,|S_D|) available");
        c.premise(ols_i.is_some(), "OLS on I well posed");
        if c.premises_hold() {
            let lm = lmin_i.unwrap();
            let b = ols_i.as_ref().unwrap();
            let lhs = (b - beta).norm_squared();
            let first = if k == 0 { 0.0 } else { (th.unwrap() * beta_d_norm + lsap * (k as f64).sqrt()).powi(2) / (lm * lm) };
            c.conclude(lhs, first + beta_d_norm * beta_d_norm, "l2 loss with missing variables");
        }
        clauses.push(c.finish());
    }

    // Prediction error of the OLS refit, first inequality.
    let pred = ols_i.as_ref().map(|b| metrics::prediction_loss(x, b, truth)).transpose()?;
    let pred_bound = match (lmin_i, lmax(s), lmax(k)) {
        (Some(lm), Some(ls), Some(lk)) if pred.is_some() => {
            let var = if k == 0 { 0.0 } else { (k as f64 * lk).sqrt() * lsap / lm };
            Some(ls.sqrt() * beta_d_norm + var)
        }
        _ => None,
    };
    {
        let mut c = Clause::new("prediction_error");
        c.premise(t_a, "T_a event");
        c.premise(pred_bound.is_some(), "eigenvalues for |I| and s available");
        if c.premises_hold() {
            c.conclude(pred.unwrap(), pred_bound.unwrap(), "prediction error");
        }
        clauses.push(c.finish());
    }

    let f_i = match (lmin_i, lmax(k)) {
        (Some(lm), Some(lk)) => Some(f_model(a, lk, lm, k)),
        _ => None,
    };
    let ideal_floor: f64 = beta.iter().map(|b| (b * b).min(sigma * sigma / n as f64)).sum();

    if !iterative && settings.init == InitKind::Dantzig {
        let t0 = result.stages[0].threshold;
        let lpt = ((1.0 + a).sqrt() + 1.0 / settings.tau) * lam;
        let mut c = Clause::new("gauss_dantzig_oracle");
        c.premise(t_a, "T_a event");
        c.premise(s >= 1, "s >= 1");
        c.premise(
            (lambda_n - lpt * sigma).abs() <= 1e-9 * lambda_n.max(1e-300),
            "lambda_n = lambda_{p,tau} sigma",
        );
        let uup = match (report.delta(2 * s), report.theta(s, 2 * s)) {
            (Some(d), Some(t)) if s >= 1 => Some((d, t)),
            _ => None,
        };
        c.premise(uup.map_or(false, |(d, t)| d + t < 1.0 - settings.tau), "delta_2s + theta_s,2s < 1 - tau");
        let lmin_2s0 = if s0 == 0 { Some(1.0) } else { lmin(2 * s0).filter(|v| *v > 0.0) };
        c.premise(lmin_2s0.is_some(), "Lambda_min(2 s0) > 0");
        c.premise(f_i.is_some() && lmax(s).is_some(), "eigenvalues for |I| and s available");
        if c.premises_hold() {
            let (d, t) = uup.unwrap();
            let c4 = t0 / (lpt * sigma);
            let consts = ds_constants(d, t, a, settings.tau, c4, lmin_2s0.unwrap())?;
            if c.premise(t0 > consts.c1 * lpt * sigma, "t0 > C1 lambda_{p,tau} sigma") {
                let extra = selected.iter().filter(|j| !support.contains(j)).count();
                c.conclude(k as f64, 2.0 * s0 as f64, "|I| <= 2 s0");
                c.conclude(extra as f64, s0 as f64, "|I \\ S| <= s0");
                let c5 = c5_constant(lmax(s).unwrap(), consts.c0_prime, c4, a, settings.tau, f_i.unwrap());
                c.conclude(pred.unwrap(), c5 * (s0 as f64).sqrt() * lam * sigma, "prediction <= C5 sqrt(s0) lambda sigma");
                let l2 = (ols_i.as_ref().unwrap() - beta).norm_squared();
                let rhs = 2.0 * consts.c3.powi(2) * (p as f64).ln() * (sigma * sigma / n as f64 + ideal_floor);
                c.conclude(l2, rhs, "l2 loss <= 2 C3^2 log p (sigma^2/n + ideal)");
            }
        }
        clauses.push(c.finish());
    }

    if !iterative && settings.init == InitKind::Lasso {
        let t0 = result.stages[0].threshold;
        let mut c = Clause::new("thresholded_lasso_oracle");
        c.surrogate = true;
        c.premise(t_a, "T_a event");
        c.premise(s0 >= 1, "s0 >= 1");
        let d0 = lambda_n / (lam * sigma);
        c.premise(lambda_n >= 2.0 * lsap, "lambda_n >= 2 lambda_{sigma,a,p}");
        c.premise(d0 >= 2.0 * (1.0 + a).sqrt(), "d0 >= 2 sqrt(1+a)");
        let kbar = if s0 >= 1 { report.k_upper(s0, 6.0) } else { None };
        c.premise(kbar.is_some(), "RE(s0, 6) via eigenvalue bound");
        let pieces = match (lmax(s.saturating_sub(s0)), lmin(2 * s0), report.theta(s0, 2 * s0), lmax(s)) {
            (Some(a1), Some(a2), Some(a3), Some(a4)) if a2 > 0.0 => Some((a1, a2, a3, a4)),
            _ => None,
        };
        c.premise(pieces.is_some(), "eigenvalues for s - s0, 2 s0 and s available");
        c.premise(f_i.is_some(), "Lambda_min(|I|) > 0");
        if c.premises_hold() {
            let (lmax_rest, lmin_2s0, th, lmax_s) = pieces.unwrap();
            let consts = lasso_oracle_constants(kbar.unwrap(), lmax_rest, lmin_2s0, th, d0)?;
            let c4 = t0 / (lam * sigma);
            if c.premise(c4 >= consts.d1, "C4 >= D1") {
                let union = support.len() + selected.iter().filter(|j| !support.contains(j)).count();
                c.conclude(k as f64, s0 as f64 * (1.0 + consts.d1 / c4), "|I| <= s0 (1 + D1/C4)");
                c.conclude(union as f64, (s + s0) as f64, "|I u S| <= s + s0");
                let c6 = c6_constant(lmax_s, consts.d0, c4, f_i.unwrap());
                c.conclude(pred.unwrap(), c6 * (s0 as f64).sqrt() * lam * sigma, "prediction <= C6 sqrt(s0) lambda sigma");
            }
        }
        clauses.push(c.finish());
    }

    if iterative {
        let (f, k0) = match settings.init {
            InitKind::Lasso => (2.0, 3.0),
            InitKind::Dantzig => (1.0, 1.0),
        };
        let s1 = &result.stages[1].selected;
        let s2 = &result.stages[2].selected;
        let lmin_2s = if s >= 1 { lmin(2 * s).filter(|v| *v > 0.0) } else { None };

        // Multi-step procedure under the restricted eigenvalue condition.
        {
            let mut c = Clause::new("multistep_re");
            c.surrogate = true;
            c.premise(t_a, "T_a event");
            c.premise(lambda_n >= f * lsap, "lambda_n >= f lambda_{sigma,a,p}");
            c.premise(lmin_2s.is_some(), "Lambda_min(2s) > 0");
            let kbar = if s >= 1 { report.k_upper(s, k0) } else { None };
            c.premise(kbar.is_some(), "RE(s, k0) via eigenvalue bound");
            if c.premises_hold() {
                let kb = kbar.unwrap();
                let lm2 = lmin_2s.unwrap();
                let b4 = 4.0 * std::f64::consts::SQRT_2 * kb.max(1.0)
                    + (4.0 * kb * kb).max(std::f64::consts::SQRT_2 / (f * lm2));
                c.premise(s as f64 >= kb.powi(4), "s >= K^4");
                c.premise(
                    truth.beta_min().unwrap_or(0.0) >= b4 * lambda_n * (s as f64).sqrt(),
                    "beta_min >= B4 lambda_n sqrt(s)",
                );
                if c.premises_hold() {
                    let cap = 1.0 / (16.0 * f * f * lm2 * lm2);
                    let extra = s2.iter().filter(|j| !support.contains(j)).count();
                    c.conclude_that(support.iter().all(|j| s2.contains(j)), "S subset of supp(beta_hat)");
                    c.conclude_that((extra as f64) < cap, format!("|I \\ S| = {extra} not < {cap:.4}"));
                    match lmin(k).filter(|v| *v > 0.0) {
                        Some(lk) => {
                            let l2 = (&result.beta_hat - beta).norm_squared();
                            let mid = lsap * lsap * k as f64 / (lk * lk);
                            let b3 = (1.0 + a) * (1.0 + cap);
                            c.conclude(l2, mid, "l2 loss <= lambda_sap^2 |I| / Lambda_min^2(|I|)");
                            c.conclude(mid, b3 * lam * lam * s as f64 * sigma * sigma / (lk * lk), "B3 bound");
                        }
                        None => c.conclude_that(false, "Lambda_min(|I|) not positive"),
                    }
                }
            }
            clauses.push(c.finish());
        }

        // Generic iterative-procedure theorem with measured B0, B1.
        {
            let mut c = Clause::new("multistep_generic");
            c.premise(t_a, "T_a event");
            c.premise(s >= 1, "s >= 1");
            c.premise(lmin_2s.is_some(), "Lambda_min(2s) > 0");
            let b = lambda_n / lsap;
            c.premise(b >= 1.0, "lambda_n >= lambda_{sigma,a,p}");
            if c.premises_hold() {
                let ups = &result.beta_init - beta;
                let ups_s = support.iter().map(|&j| ups[j] * ups[j]).sum::<f64>().sqrt();
                let off_l1: f64 = (0..p).filter(|j| !support.contains(j)).map(|j| result.beta_init[j].abs()).sum();
                let sf = s as f64;
                let b0 = ups_s / (lambda_n * sf.sqrt());
                let b1 = off_l1 / (lambda_n * sf);
                let lm2 = lmin_2s.unwrap();
                let b2 = 1.0 / (b * lm2);
                let need = (b1.sqrt().max(2.0) * 2.0 * std::f64::consts::SQRT_2 + b0.max(std::f64::consts::SQRT_2 * b2))
                    * lambda_n
                    * sf.sqrt();
                c.premise(truth.beta_min().unwrap_or(0.0) >= need, "beta_min lower bound");
                c.premise(sf >= b1 * b1 / 16.0, "s >= B1^2/16");
                if c.premises_hold() {
                    for (i, stage) in result.stages[1..].iter().enumerate() {
                        let si = stage.selected.len();
                        c.conclude(si as f64, 2.0 * sf, &format!("|S_{}| <= 2s", i + 1));
                        match lmin(si).filter(|v| *v > 0.0) {
                            Some(lk) => {
                                let err = (stage.refit.as_ref().unwrap() - beta).norm();
                                let mid = lsap * (si as f64).sqrt() / lk;
                                c.conclude(err, mid, &format!("l2 loss of stage {}", i + 1));
                                c.conclude(mid, lambda_n * b2 * (2.0 * sf).sqrt(), &format!("stage {} rate", i + 1));
                            }
                            None => c.conclude_that(false, format!("Lambda_min(|S_{}|) not positive", i + 1)),
                        }
                    }
                    c.conclude_that(support.iter().all(|j| s2.contains(j)), "S subset of S_2");
                    c.conclude_that(s2.iter().all(|j| s1.contains(j)), "S_2 subset of S_1");
                    let extra = s2.iter().filter(|j| !support.contains(j)).count() as f64;
                    if let Some(l1) = lmin(s1.len()).filter(|v| *v > 0.0) {
                        let cap = 1.0 / (16.0 * b * b * l1 * l1);
                        c.conclude(extra, cap, "|S_2 \\ S| <= 1/(16 B^2 Lambda_min^2(|S_1|))");
                        c.conclude(cap, b2 * b2 / 16.0, "extra-variable cap <= B2^2/16");
                    }
                }
            }
            clauses.push(c.finish());
        }
    }

    Ok(BoundCheck { t_a, clauses })
}

//! Two-step and multi-step thresholding procedures.
//!
//! Every procedure starts from an initial estimator (Lasso or Dantzig
//! selector), hard-thresholds it and refits OLS on the surviving set. The
//! `*_from_init` variants take the initial estimator as input so sweeps
//! over the threshold can reuse one initial solve.

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::dantzig;
use crate::error::{Error, Result};
use crate::lasso_path::{self, LassoPath};
use crate::linalg;
use crate::model::{GroundTruth, ProblemInstance};
use crate::refit;

/// `(index, value)` pairs of the nonzero entries, plus the full length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseVector {
    pub len: usize,
    pub entries: Vec<(usize, f64)>,
}

impl From<&DVector<f64>> for SparseVector {
    fn from(v: &DVector<f64>) -> Self {
        Self {
            len: v.len(),
            entries: v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(j, x)| (j, *x)).collect(),
        }
    }
}

fn as_sparse<S: Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    SparseVector::from(v).serialize(s)
}

fn as_sparse_opt<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(SparseVector::from).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub threshold: f64,
    pub selected: Vec<usize>,
    /// OLS refit on `selected`; absent for the initial screening stage.
    #[serde(serialize_with = "as_sparse_opt")]
    pub refit: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcedureResult {
    #[serde(serialize_with = "as_sparse")]
    pub beta_init: DVector<f64>,
    pub stages: Vec<Stage>,
    #[serde(serialize_with = "as_sparse")]
    pub beta_hat: DVector<f64>,
    pub lambda_n: f64,
    /// Set when a selected model had to be cut down to fit the sample size.
    pub truncated: bool,
}

impl ProcedureResult {
    /// Final selected set.
    pub fn selected(&self) -> &[usize] {
        self.stages.last().map(|s| s.selected.as_slice()).unwrap_or(&[])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("procedure result serializes")
    }
}

/// `{j : |β_j| ≥ t0}`, increasing order.
pub fn threshold_select(beta: &DVector<f64>, t0: f64) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j].abs() >= t0).collect()
}

/// Keep at most `n − 1` variables of `set`, preferring large `|beta_j|` and
/// then low indices. Returns the kept set (increasing) and whether anything
/// was dropped.
fn cap_model(beta: &DVector<f64>, set: Vec<usize>, n: usize) -> (Vec<usize>, bool) {
    let cap = n.saturating_sub(1);
    if set.len() <= cap {
        return (set, false);
    }
    let mut ranked = set;
    ranked.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    ranked.truncate(cap);
    ranked.sort_unstable();
    (ranked, true)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// Threshold `beta_init` at `t0` and refit OLS on the survivors.
pub fn two_step_from_init(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta_init: DVector<f64>,
    lambda_n: f64,
    t0: f64,
) -> Result<ProcedureResult> {
    let (set, truncated) = cap_model(&beta_init, threshold_select(&beta_init, t0), x.nrows());
    let beta_hat = refit::ols(x, y, &set)?;
    Ok(ProcedureResult {
        beta_init,
        stages: vec![Stage {
            threshold: t0,
            selected: set,
            refit: Some(beta_hat.clone()),
        }],
        beta_hat,
        lambda_n,
        truncated,
    })
}

fn lasso_init(inst: &ProblemInstance, lambda_n: f64) -> Result<DVector<f64>> {
    let x = inst.design();
    let path = lasso_path::lars_path(x, &inst.y, lasso_path::default_max_knots(x.nrows(), x.ncols()))?;
    Ok(path.at(lambda_n))
}

/// Lasso at `lambda_n`, thresholded at `t0`, refit by OLS.
pub fn thresholded_lasso(inst: &ProblemInstance, lambda_n: f64, t0: f64) -> Result<ProcedureResult> {
    check_positive("lambda_n", lambda_n)?;
    check_positive("t0", t0)?;
    let init = lasso_init(inst, lambda_n)?;
    two_step_from_init(inst.design(), &inst.y, init, lambda_n, t0)
}

/// Dantzig selector at `lambda_n`, thresholded at `t0`, refit by OLS.
pub fn gauss_dantzig(inst: &ProblemInstance, lambda_n: f64, t0: f64) -> Result<ProcedureResult> {
    check_positive("lambda_n", lambda_n)?;
    check_positive("t0", t0)?;
    let init = dantzig::dantzig_selector(inst.design(), &inst.y, lambda_n)?.beta;
    two_step_from_init(inst.design(), &inst.y, init, lambda_n, t0)
}

/// Iterative procedure from a given initial estimator: screen at `4λ_n`,
/// then twice threshold the current estimate at `t_i = 4λ_n √|Ŝ_i|` within
/// `Ŝ_i` and refit.
pub fn iterative_from_init(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta_init: DVector<f64>,
    lambda_n: f64,
) -> Result<ProcedureResult> {
    check_positive("lambda_n", lambda_n)?;
    let n = x.nrows();
    let screen = 4.0 * lambda_n;
    let s0: Vec<usize> = (0..beta_init.len()).filter(|&j| beta_init[j].abs() > screen).collect();
    let (mut current, mut truncated) = cap_model(&beta_init, s0, n);
    let mut stages = vec![Stage {
        threshold: screen,
        selected: current.clone(),
        refit: None,
    }];
    let mut estimate = beta_init.clone();
    for _ in 0..2 {
        let t = 4.0 * lambda_n * (current.len() as f64).sqrt();
        let next: Vec<usize> = current.iter().copied().filter(|&j| estimate[j].abs() >= t).collect();
        let (next, cut) = cap_model(&estimate, next, n);
        truncated |= cut;
        estimate = refit::ols(x, y, &next)?;
        stages.push(Stage {
            threshold: t,
            selected: next.clone(),
            refit: Some(estimate.clone()),
        });
        current = next;
    }
    Ok(ProcedureResult {
        beta_init,
        stages,
        beta_hat: estimate,
        lambda_n,
        truncated,
    })
}

/// Iterative procedure with the Lasso at `lambda_n` as initial estimator.
pub fn iterative_multistep(inst: &ProblemInstance, lambda_n: f64) -> Result<ProcedureResult> {
    check_positive("lambda_n", lambda_n)?;
    let init = lasso_init(inst, lambda_n)?;
    iterative_from_init(inst.design(), &inst.y, init, lambda_n)
}

/// Second-stage weighted Lasso path: coordinate `j` is penalized by
/// `1/|β_init,j|` and coordinates with `β_init,j = 0` are removed.
#[derive(Debug, Clone)]
pub struct AdaptivePath {
    p: usize,
    columns: Vec<usize>,
    scale: Vec<f64>,
    path: LassoPath,
}

impl AdaptivePath {
    /// Path of the rescaled problem (coefficients on the rescaled columns).
    pub fn path(&self) -> &LassoPath {
        &self.path
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    fn unscale(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut beta = DVector::zeros(self.p);
        for (k, &j) in self.columns.iter().enumerate() {
            beta[j] = reduced[k] * self.scale[k];
        }
        beta
    }

    /// Coefficients (original scale, length p) at penalty `lambda`.
    pub fn at(&self, lambda: f64) -> DVector<f64> {
        self.unscale(&self.path.at(lambda))
    }

    /// Coefficients at every knot of the path.
    pub fn knot_coefficients(&self) -> Vec<DVector<f64>> {
        self.path.knots().iter().map(|k| self.unscale(&k.beta)).collect()
    }
}

pub fn adaptive_lasso_path(x: &DMatrix<f64>, y: &DVector<f64>, beta_init: &DVector<f64>) -> Result<AdaptivePath> {
    if beta_init.len() != x.ncols() {
        return Err(Error::invalid("beta_init length does not match design"));
    }
    let columns = linalg::support(beta_init);
    if columns.is_empty() {
        return Err(Error::EmptyModel);
    }
    let scale: Vec<f64> = columns.iter().map(|&j| beta_init[j].abs()).collect();
    let mut xs = linalg::select_columns(x, &columns);
    for (k, mut col) in xs.column_iter_mut().enumerate() {
        col *= scale[k];
    }
    let path = lasso_path::lars_path(&xs, y, lasso_path::default_max_knots(xs.nrows(), xs.ncols()))?;
    Ok(AdaptivePath {
        p: x.ncols(),
        columns,
        scale,
        path,
    })
}

/// Adaptive Lasso coefficients at each penalty in `lambda_grid`.
pub fn adaptive_lasso(
    inst: &ProblemInstance,
    beta_init: &DVector<f64>,
    lambda_grid: &[f64],
) -> Result<Vec<DVector<f64>>> {
    let ap = adaptive_lasso_path(inst.design(), &inst.y, beta_init)?;
    Ok(lambda_grid.iter().map(|&l| ap.at(l)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathCriterion {
    MinL2Loss,
    BestSupportMatch,
}

/// Oracle choice of a knot on the Lasso path.
pub fn optimal_path_estimate(path: &LassoPath, truth: &GroundTruth, criterion: PathCriterion) -> DVector<f64> {
    let knots = path.knots();
    let l2 = |b: &DVector<f64>| (b - truth.beta()).norm();
    let score = |b: &DVector<f64>| -> i64 {
        let mut tp = 0i64;
        let mut fp = 0i64;
        for (e, t) in b.iter().zip(truth.beta().iter()) {
            if *e != 0.0 {
                if *t != 0.0 {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        tp - fp
    };
    let mut best = 0;
    let mut best_l2 = l2(&knots[0].beta);
    let mut best_score = score(&knots[0].beta);
    for (k, knot) in knots.iter().enumerate().skip(1) {
        let d = l2(&knot.beta);
        let better = match criterion {
            PathCriterion::MinL2Loss => d < best_l2,
            PathCriterion::BestSupportMatch => {
                let sc = score(&knot.beta);
                sc > best_score || sc == best_score && d < best_l2
            }
        };
        if better {
            best = k;
            best_l2 = d;
            best_score = score(&knot.beta);
        }
    }
    knots[best].beta.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{self, EnsembleKind, EnsembleSpec};
    use crate::lasso_path::lars_path;
    use crate::model::{sample_beta, synthesize, BetaScheme, DesignMatrix};
    use crate::rng::SimRng;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn orthogonal_instance(beta: &[f64], sigma: f64, seed: u64) -> ProblemInstance {
        let n = beta.len();
        let x = DesignMatrix::from_matrix(DMatrix::identity(n, n) * (n as f64).sqrt()).unwrap();
        synthesize(Arc::new(x), GroundTruth::from_slice(beta), sigma, &mut SimRng::seed_from(seed)).unwrap()
    }

    fn gaussian_instance(n: usize, p: usize, s: usize, sigma: f64, seed: u64) -> ProblemInstance {
        let mut rng = SimRng::seed_from(seed);
        let x = ensembles::generate(&EnsembleSpec::new(EnsembleKind::GaussianIid, n, p), &mut rng).unwrap();
        let truth = sample_beta(p, s, &BetaScheme::GaussianMixture, &mut rng).unwrap();
        synthesize(Arc::new(x), truth, sigma, &mut rng).unwrap()
    }

    fn lambda(n: usize, p: usize) -> f64 {
        (2.0 * (p as f64).ln() / n as f64).sqrt()
    }

    #[test]
    fn threshold_select_cases() {
        let b = v(&[0.5, -0.3, 0.0]);
        assert_eq!(threshold_select(&b, 0.4), vec![0]);
        assert_eq!(threshold_select(&b, 0.3), vec![0, 1]);
        assert!(threshold_select(&b, 0.6).is_empty());
        assert_eq!(threshold_select(&b, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn cap_keeps_largest_with_low_index_ties() {
        let b = v(&[1.0, 3.0, 2.0, 3.0, 0.5]);
        let (set, cut) = cap_model(&b, vec![0, 1, 2, 3, 4], 4);
        assert!(cut);
        assert_eq!(set, vec![1, 2, 3]);
        let b = v(&[1.0, 1.0, 1.0]);
        assert_eq!(cap_model(&b, vec![0, 1, 2], 3), (vec![0, 1], true));
        assert_eq!(cap_model(&b, vec![0, 1], 3), (vec![0, 1], false));
    }

    #[test]
    fn noiseless_orthogonal_recovery() {
        let beta = [3.0, 0.0, -2.0, 0.0, 1.5, 0.0];
        let inst = orthogonal_instance(&beta, 0.0, 0);
        let r = thresholded_lasso(&inst, 0.5, 0.4).unwrap();
        assert_eq!(r.selected(), &[0, 2, 4]);
        assert!((&r.beta_hat - inst.truth.beta()).amax() < 1e-12);
        let r = gauss_dantzig(&inst, 0.5, 0.4).unwrap();
        assert!((&r.beta_hat - inst.truth.beta()).amax() < 1e-12);
    }

    #[test]
    fn huge_threshold_selects_nothing() {
        let inst = gaussian_instance(40, 80, 5, 0.5, 1);
        let r = thresholded_lasso(&inst, 0.1, 1e6).unwrap();
        assert!(r.selected().is_empty());
        assert!(r.beta_hat.iter().all(|x| *x == 0.0));
        let rho = crate::metrics::rho_squared(&r.beta_hat, &inst.truth, inst.sigma, 40).unwrap();
        let floor = inst.sigma * inst.sigma / 40.0;
        let denom: f64 = inst.truth.beta().iter().map(|b| (b * b).min(floor)).sum();
        assert!((rho - inst.truth.beta().norm_squared() / denom).abs() < 1e-9);
    }

    #[test]
    fn gauss_dantzig_large_lambda_is_empty() {
        let inst = gaussian_instance(30, 40, 3, 1.0, 2);
        let lmax = linalg::inf_norm(&linalg::scaled_xt_mul(inst.design(), &inst.y));
        let r = gauss_dantzig(&inst, lmax * 1.01, 0.1).unwrap();
        assert!(r.beta_init.iter().all(|x| *x == 0.0));
        assert!(r.selected().is_empty());
    }

    #[test]
    fn iterative_hand_run() {
        let inst = orthogonal_instance(&[10.0, 10.0, 0.0, 0.0], 0.0, 0);
        let r = iterative_multistep(&inst, 0.5).unwrap();
        assert_eq!(r.stages.len(), 3);
        assert_eq!(r.stages[0].selected, vec![0, 1]);
        let t = 4.0 * 0.5 * 2f64.sqrt();
        assert!((r.stages[1].threshold - t).abs() < 1e-15);
        assert_eq!(r.stages[1].selected, vec![0, 1]);
        assert!((r.stages[1].refit.as_ref().unwrap() - inst.truth.beta()).amax() < 1e-12);
        assert!((r.stages[2].threshold - t).abs() < 1e-15);
        assert_eq!(r.stages[2].selected, vec![0, 1]);
        assert!((&r.beta_hat - inst.truth.beta()).amax() < 1e-12);
    }

    #[test]
    fn iterative_zero_init() {
        let x = DMatrix::identity(4, 4) * 2.0;
        let y = DVector::zeros(4);
        let r = iterative_from_init(&x, &y, DVector::zeros(4), 0.3).unwrap();
        assert!(r.stages.iter().all(|s| s.selected.is_empty()));
        assert!(r.beta_hat.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn iterative_recovers_support_at_high_snr() {
        let (n, p, s) = (72, 256, 8);
        let sigma = (s as f64).sqrt() / 3.0;
        let lam_n = 0.69 * lambda(n, p) * sigma;
        let mut hits = 0;
        let trials = 100;
        for seed in 0..trials {
            let mut rng = SimRng::seed_from(500 + seed);
            let x = ensembles::generate(&EnsembleSpec::new(EnsembleKind::GaussianIid, n, p), &mut rng).unwrap();
            // β_min well above 4λ_n√s·√2 so every threshold stage keeps S.
            let bmin = 12.0 * lam_n * (s as f64).sqrt();
            let truth = sample_beta(p, s, &BetaScheme::Constant { value: bmin }, &mut rng).unwrap();
            let inst = synthesize(Arc::new(x), truth, sigma, &mut rng).unwrap();
            let r = iterative_multistep(&inst, lam_n).unwrap();
            let sel = r.selected();
            let contains = inst.truth.support().iter().all(|j| sel.contains(j));
            let extra = sel.iter().filter(|j| !inst.truth.support().contains(j)).count();
            if contains && extra <= 1 {
                hits += 1;
            }
        }
        assert!(hits as f64 > 0.9 * trials as f64, "{hits}/{trials}");
    }

    #[test]
    fn nesting_and_final_support() {
        for seed in 0..30 {
            let inst = gaussian_instance(50, 120, 6, 1.0, 900 + seed);
            let lam_n = 0.3 * lambda(50, 120);
            let r = iterative_multistep(&inst, lam_n).unwrap();
            for w in r.stages.windows(2) {
                assert!(w[1].selected.iter().all(|j| w[0].selected.contains(j)));
            }
            for (j, b) in r.beta_hat.iter().enumerate() {
                if *b != 0.0 {
                    assert!(r.selected().contains(&j));
                }
            }
            assert!(r.stages.iter().all(|s| s.selected.len() <= 50));
        }
    }

    #[test]
    fn threshold_monotonicity_per_realization() {
        let inst = gaussian_instance(72, 256, 8, 8f64.sqrt(), 3);
        let lam = lambda(72, 256);
        let path = lars_path(inst.design(), &inst.y, 2000).unwrap();
        let init = path.at(0.69 * lam * inst.sigma);
        let mut prev: Option<(usize, usize)> = None;
        for k in 1..=150 {
            let t0 = 0.01 * k as f64 * lam * inst.sigma;
            let r = two_step_from_init(inst.design(), &inst.y, init.clone(), 0.1, t0).unwrap();
            let c = crate::metrics::confusion(&r.beta_hat, &inst.truth).unwrap();
            if let Some((fp, fn_)) = prev {
                assert!(c.fp <= fp && c.fn_ >= fn_);
            }
            prev = Some((c.fp, c.fn_));
        }
    }

    #[test]
    fn pipeline_is_scale_equivariant() {
        for seed in 0..10 {
            let inst = gaussian_instance(60, 150, 6, 1.0, 40 + seed);
            let lam = lambda(60, 150);
            for c in [0.5, 2.0, 4.0] {
                let scaled = inst.scaled(c);
                let a = thresholded_lasso(&inst, 0.69 * lam * inst.sigma, lam * inst.sigma).unwrap();
                let b = thresholded_lasso(&scaled, 0.69 * lam * scaled.sigma, lam * scaled.sigma).unwrap();
                assert_eq!(a.selected(), b.selected());
                assert!((&b.beta_init - &a.beta_init * c).amax() <= 1e-10 * c);
                assert!((&b.beta_hat - &a.beta_hat * c).amax() <= 1e-10 * c);
            }
        }
    }

    #[test]
    fn truncation_flag_set_when_model_too_large() {
        let inst = gaussian_instance(10, 30, 3, 1.0, 5);
        let init = DVector::from_fn(30, |j, _| 1.0 + j as f64);
        let r = two_step_from_init(inst.design(), &inst.y, init, 0.1, 0.5).unwrap();
        assert!(r.truncated);
        assert_eq!(r.selected(), &(21..30).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn adaptive_single_column_reaches_least_squares() {
        let inst = gaussian_instance(30, 20, 2, 0.5, 6);
        let mut init = DVector::zeros(20);
        init[inst.truth.support()[0]] = 0.7;
        let ap = adaptive_lasso_path(inst.design(), &inst.y, &init).unwrap();
        let j = inst.truth.support()[0];
        let xj = inst.design().column(j);
        let ls = xj.dot(&inst.y) / xj.norm_squared();
        let b = ap.at(0.0);
        assert!((b[j] - ls).abs() < 1e-10);
        assert_eq!(linalg::support(&b), vec![j]);
    }

    #[test]
    fn adaptive_equal_weights_is_rescaled_lasso() {
        let inst = gaussian_instance(40, 60, 4, 0.5, 7);
        let cols: Vec<usize> = (0..15).collect();
        let c = 2.5;
        let mut init = DVector::zeros(60);
        for &j in &cols {
            init[j] = if j % 2 == 0 { c } else { -c };
        }
        let ap = adaptive_lasso_path(inst.design(), &inst.y, &init).unwrap();
        let reduced = linalg::select_columns(inst.design(), &cols);
        let plain = lars_path(&reduced, &inst.y, 1000).unwrap();
        for frac in [0.9, 0.5, 0.2, 0.05] {
            let lam = frac * ap.path().lambda_max();
            let a = ap.at(lam);
            let b = plain.at(lam / c);
            for (k, &j) in cols.iter().enumerate() {
                assert!((a[j] - b[k]).abs() < 1e-8);
            }
        }
        let grid = adaptive_lasso(&inst, &init, &[0.1, 0.2]).unwrap();
        assert_eq!(grid.len(), 2);
    }

    #[test]
    fn adaptive_rejects_zero_init() {
        let inst = gaussian_instance(10, 5, 1, 0.5, 8);
        assert!(matches!(
            adaptive_lasso_path(inst.design(), &inst.y, &DVector::zeros(5)),
            Err(Error::EmptyModel)
        ));
    }

    #[test]
    fn optimal_path_trivial_cases() {
        let inst = gaussian_instance(30, 40, 3, 1.0, 9);
        let path = lars_path(inst.design(), &inst.y, 1000).unwrap();
        let zero = GroundTruth::new(DVector::zeros(40));
        for crit in [PathCriterion::MinL2Loss, PathCriterion::BestSupportMatch] {
            assert!(optimal_path_estimate(&path, &zero, crit).iter().all(|x| *x == 0.0));
        }
        let o = orthogonal_instance(&[2.0, 0.0, -1.0, 0.0, 0.0], 0.0, 0);
        let path = lars_path(o.design(), &o.y, 100).unwrap();
        let b = optimal_path_estimate(&path, &o.truth, PathCriterion::MinL2Loss);
        assert!((&b - o.truth.beta()).norm() < 1e-12);
    }

    #[test]
    fn best_support_match_prefers_exact_support() {
        let o = orthogonal_instance(&[2.0, 0.0, -1.0, 0.0, 0.3], 0.0, 0);
        let path = lars_path(o.design(), &o.y, 100).unwrap();
        let b = optimal_path_estimate(&path, &o.truth, PathCriterion::BestSupportMatch);
        assert_eq!(linalg::support(&b), vec![0, 2, 4]);
    }

    #[test]
    fn result_json_is_sparse() {
        let inst = orthogonal_instance(&[3.0, 0.0, -2.0, 0.0], 0.0, 0);
        let r = thresholded_lasso(&inst, 0.5, 0.4).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["beta_hat"]["len"], 4);
        assert_eq!(json["beta_hat"]["entries"].as_array().unwrap().len(), 2);
        assert_eq!(json["stages"][0]["selected"], serde_json::json!([0, 2]));
    }

    proptest! {
        #[test]
        fn threshold_sets_are_nested(
            b in proptest::collection::vec(-3.0..3.0f64, 1..40),
            t1 in 0.0..3.0f64,
            dt in 0.0..3.0f64,
        ) {
            let beta = DVector::from_vec(b);
            let lo = threshold_select(&beta, t1);
            let hi = threshold_select(&beta, t1 + dt);
            prop_assert!(hi.iter().all(|j| lo.contains(j)));
        }
    }
}

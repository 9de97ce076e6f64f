use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DantzigLambda, Estimator, ExperimentConfig, ExperimentKind, T0Rule};
use crate::analysis::universal_lambda;
use crate::dantzig;
use crate::ensembles::{self, EnsembleSpec};
use crate::error::{Error, Result};
use crate::lasso_path::{self, LassoPath};
use crate::metrics;
use crate::model::{sample_beta, synthesize, DesignMatrix, ProblemInstance};
use crate::procedures::{self, PathCriterion};
use crate::rng::{split_seed, SimRng};

/// One row of output: a single estimate on one replication at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub master_seed: u64,
    pub experiment: ExperimentKind,
    pub replication: usize,
    pub estimator: String,
    /// Name of the swept parameter (`none` when nothing is swept).
    pub grid: String,
    pub grid_value: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub sigma: f64,
    pub lambda_n: f64,
    pub t0: Option<f64>,
    pub tp: Option<usize>,
    pub fp: Option<usize>,
    #[serde(rename = "fn")]
    pub fn_: Option<usize>,
    pub tn: Option<usize>,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
    pub rho2: Option<f64>,
    pub l2_loss: Option<f64>,
    pub pred_loss: Option<f64>,
    pub success: Option<bool>,
    pub error: Option<String>,
    pub wall_ms: Option<f64>,
}

/// Column order of the record CSV. Frozen.
pub const RECORD_COLUMNS: [&str; 25] = [
    "config_hash", "master_seed", "experiment", "replication", "estimator", "grid", "grid_value", "n", "p", "s",
    "sigma", "lambda_n", "t0", "tp", "fp", "fn", "tn", "fpr", "tpr", "rho2", "l2_loss", "pred_loss", "success",
    "error", "wall_ms",
];

/// Sample sizes used for one sparsity level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridUsed {
    pub s: usize,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub grid: Vec<GridUsed>,
    pub records: Vec<ExperimentRecord>,
}

struct Point {
    s: usize,
    n: usize,
    design: Arc<DesignMatrix>,
}

/// An estimate before metrics are attached.
struct Estimate {
    estimator: &'static str,
    grid: &'static str,
    grid_value: Option<f64>,
    lambda_n: f64,
    t0: Option<f64>,
    outcome: std::result::Result<DVector<f64>, String>,
    wall_ms: f64,
}

/// Run any experiment kind.
///
/// The design for each sample size is drawn once from the design seed and
/// held fixed; replication `r` draws `β` and `ε` from `split_seed(seed, r)`.
/// Replications run in parallel and records come back in (grid point,
/// replication, estimator, sweep value) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let hash = config.hash();
    let mut designs: HashMap<usize, Arc<DesignMatrix>> = HashMap::new();
    let mut points = Vec::new();
    let mut grid = Vec::new();
    for s in config.s_values() {
        let ns = config.n.resolve(s, config.p);
        for &n in &ns {
            let design = match designs.get(&n) {
                Some(d) => Arc::clone(d),
                None => {
                    let spec = EnsembleSpec::new(config.ensemble, n, config.p);
                    let mut rng = SimRng::seed_from(split_seed(config.design_seed(), n as u64));
                    let d = Arc::new(ensembles::generate(&spec, &mut rng)?);
                    designs.insert(n, Arc::clone(&d));
                    d
                }
            };
            points.push(Point { s, n, design });
        }
        grid.push(GridUsed { s, n: ns });
    }
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|k| (0..config.reps).map(move |r| (k, r)))
        .collect();
    let records: Vec<ExperimentRecord> = tasks
        .par_iter()
        .map(|&(k, r)| replicate(config, &hash, &points[k], r))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(RunOutput {
        config: config.clone(),
        config_hash: hash,
        grid,
        records,
    })
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.experiment != kind {
        return Err(Error::Config(format!(
            "config is for '{}', not '{}'",
            config.experiment.name(),
            kind.name()
        )));
    }
    Ok(())
}

pub fn run_type12_sweep(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Type12Sweep)?;
    run_experiment(config)
}

pub fn run_rho_hist(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::RhoHist)?;
    run_experiment(config)
}

pub fn run_sparsity_table(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::SparsityTable)?;
    run_experiment(config)
}

pub fn run_success_prob(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::SuccessProb)?;
    run_experiment(config)
}

pub fn run_roc(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Roc)?;
    run_experiment(config)
}

pub fn run_illustrative(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Illustrative)?;
    run_experiment(config)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64() * 1e3)
}

/// Error text stored in records: `<kind>: <message>`.
fn describe(e: Error) -> String {
    format!("{}: {e}", e.kind())
}

/// Thresholds for one initial estimate: `(grid name, grid value, t0)`.
fn thresholds(config: &ExperimentConfig, init: &DVector<f64>, lambda_sigma: f64, lambda_n: f64) -> Vec<(&'static str, f64, f64)> {
    match &config.t0_rule {
        T0Rule::Multiple(g) => g.values().into_iter().map(|m| ("t0_multiple", m, m * lambda_sigma)).collect(),
        T0Rule::SqrtScreen { f_t, screen } => {
            let kept = init.iter().filter(|b| b.abs() >= screen * lambda_n).count().max(1);
            f_t.values()
                .into_iter()
                .map(|f| ("f_t", f, f * (kept as f64).sqrt() * lambda_sigma))
                .collect()
        }
    }
}

/// Penalty levels `λ_max·q` for the ROC sweep, `q` log-spaced from 1 to 1e-3.
fn sweep_fractions(points: usize) -> Vec<f64> {
    (0..points).map(|k| 10f64.powf(-3.0 * k as f64 / (points - 1) as f64)).collect()
}

fn replicate(config: &ExperimentConfig, hash: &str, point: &Point, r: usize) -> Vec<ExperimentRecord> {
    let (n, p, s) = (point.n, config.p, point.s);
    let sigma = config.sigma_rule.sigma(s);
    let lambda_sigma = universal_lambda(n, p) * sigma;
    let lambda_n = config.lambda_factor * lambda_sigma;
    let blank = ExperimentRecord {
        config_hash: hash.to_string(),
        master_seed: config.seed,
        experiment: config.experiment,
        replication: r,
        estimator: String::new(),
        grid: "none".into(),
        grid_value: None,
        n,
        p,
        s,
        sigma,
        lambda_n,
        t0: None,
        tp: None,
        fp: None,
        fn_: None,
        tn: None,
        fpr: None,
        tpr: None,
        rho2: None,
        l2_loss: None,
        pred_loss: None,
        success: None,
        error: None,
        wall_ms: None,
    };

    let mut rng = SimRng::seed_from(split_seed(config.seed, r as u64));
    let inst = sample_beta(p, s, &config.beta, &mut rng)
        .and_then(|truth| synthesize(Arc::clone(&point.design), truth, sigma, &mut rng));
    let inst = match inst {
        Ok(i) => i,
        Err(e) => {
            let text = describe(e);
            return config
                .estimators
                .iter()
                .map(|est| ExperimentRecord {
                    estimator: est.name().into(),
                    error: Some(text.clone()),
                    ..blank.clone()
                })
                .collect()
        }
    };

    let estimates = estimate_all(config, &inst, lambda_sigma, lambda_n);
    estimates
        .into_iter()
        .map(|est| {
            let mut rec = ExperimentRecord {
                estimator: est.estimator.into(),
                grid: est.grid.into(),
                grid_value: est.grid_value,
                lambda_n: est.lambda_n,
                t0: est.t0,
                wall_ms: config.record_timing.then_some(est.wall_ms),
                ..blank.clone()
            };
            match est.outcome {
                Ok(beta_hat) => attach_metrics(&mut rec, &inst, &beta_hat),
                Err(e) => rec.error = Some(e),
            }
            rec
        })
        .collect()
}

fn attach_metrics(rec: &mut ExperimentRecord, inst: &ProblemInstance, beta_hat: &DVector<f64>) {
    match metrics::confusion(beta_hat, &inst.truth) {
        Ok(c) => {
            rec.tp = Some(c.tp);
            rec.fp = Some(c.fp);
            rec.fn_ = Some(c.fn_);
            rec.tn = Some(c.tn);
            rec.fpr = Some(c.fpr);
            rec.tpr = Some(c.tpr);
        }
        Err(e) => rec.error = Some(format!("{}: {e}", e.kind())),
    }
    rec.rho2 = metrics::rho_squared(beta_hat, &inst.truth, inst.sigma, inst.n()).ok();
    rec.l2_loss = metrics::ell2_loss(beta_hat, &inst.truth).ok();
    rec.pred_loss = metrics::prediction_loss(inst.design(), beta_hat, &inst.truth).ok();
    rec.success = Some(metrics::exact_sign_recovery(beta_hat, &inst.truth));
}

fn estimate_all(config: &ExperimentConfig, inst: &ProblemInstance, lambda_sigma: f64, lambda_n: f64) -> Vec<Estimate> {
    let x = inst.design();
    let y = &inst.y;
    let roc = config.experiment == ExperimentKind::Roc;
    let needs_path = config.estimators.iter().any(|e| *e != Estimator::GaussDantzig);
    let (path, path_ms): (std::result::Result<LassoPath, String>, f64) = if needs_path {
        timed(|| lasso_path::lars_path(x, y, lasso_path::default_max_knots(x.nrows(), x.ncols())).map_err(describe))
    } else {
        (Err("internal: path not computed".into()), 0.0)
    };
    let lasso_init = path.as_ref().map(|pa| pa.at(lambda_n)).map_err(String::clone);

    let mut out = Vec::new();
    for est in &config.estimators {
        match est {
            Estimator::ThresholdedLasso | Estimator::GaussDantzig => {
                let (init, lam, ms) = if *est == Estimator::ThresholdedLasso {
                    (lasso_init.clone(), lambda_n, path_ms)
                } else {
                    let lam = match config.dantzig_lambda {
                        DantzigLambda::Uup { a, tau } => ((1.0 + a).sqrt() + 1.0 / tau) * lambda_sigma,
                        DantzigLambda::Matched => lambda_n,
                    };
                    let (sol, ms) = timed(|| dantzig::dantzig_selector(x, y, lam));
                    (sol.map(|s| s.beta).map_err(describe), lam, ms)
                };
                match init {
                    Err(e) => out.push(Estimate {
                        estimator: est.name(),
                        grid: "none",
                        grid_value: None,
                        lambda_n: lam,
                        t0: None,
                        outcome: Err(e),
                        wall_ms: ms,
                    }),
                    Ok(init) => {
                        for (grid, value, t0) in thresholds(config, &init, lambda_sigma, lam) {
                            let (res, step_ms) =
                                timed(|| {
                                procedures::two_step_from_init(x, y, init.clone(), lam, t0)
                                    .map(|r| r.beta_hat)
                                    .map_err(describe)
                            });
                            out.push(Estimate {
                                estimator: est.name(),
                                grid,
                                grid_value: Some(value),
                                lambda_n: lam,
                                t0: Some(t0),
                                outcome: res,
                                wall_ms: ms + step_ms,
                            });
                        }
                    }
                }
            }
            Estimator::Iterative => {
                let (res, ms) = timed(|| {
                    lasso_init.clone().and_then(|init| {
                        procedures::iterative_from_init(x, y, init, lambda_n)
                            .map(|r| r.beta_hat)
                            .map_err(describe)
                    })
                });
                out.push(Estimate {
                    estimator: est.name(),
                    grid: "none",
                    grid_value: None,
                    lambda_n,
                    t0: None,
                    outcome: res,
                    wall_ms: path_ms + ms,
                });
            }
            Estimator::LassoOptimal => match (&path, roc) {
                (Ok(pa), true) => {
                    for q in sweep_fractions(config.roc_points) {
                        let lam = q * pa.lambda_max();
                        out.push(Estimate {
                            estimator: "lasso_path",
                            grid: "lambda_fraction",
                            grid_value: Some(q),
                            lambda_n: lam,
                            t0: None,
                            outcome: Ok(pa.at(lam)),
                            wall_ms: path_ms,
                        });
                    }
                }
                _ => {
                    let res = path
                        .as_ref()
                        .map(|pa| procedures::optimal_path_estimate(pa, &inst.truth, config.path_criterion()))
                        .map_err(String::clone);
                    out.push(Estimate {
                        estimator: est.name(),
                        grid: "none",
                        grid_value: None,
                        lambda_n,
                        t0: None,
                        outcome: res,
                        wall_ms: path_ms,
                    });
                }
            },
            Estimator::AdaptiveLasso => {
                let (ap, ms) = timed(|| {
                    path.as_ref().map_err(String::clone).and_then(|pa| {
                        let init = procedures::optimal_path_estimate(pa, &inst.truth, PathCriterion::MinL2Loss);
                        procedures::adaptive_lasso_path(x, y, &init).map_err(describe)
                    })
                });
                match ap {
                    Ok(ap) if roc => {
                        for q in sweep_fractions(config.roc_points) {
                            let lam = q * ap.path().lambda_max();
                            out.push(Estimate {
                                estimator: est.name(),
                                grid: "lambda_fraction",
                                grid_value: Some(q),
                                lambda_n: lam,
                                t0: None,
                                outcome: Ok(ap.at(lam)),
                                wall_ms: path_ms + ms,
                            });
                        }
                    }
                    other => {
                        let res = other.map(|ap| {
                            ap.knot_coefficients()
                                .into_iter()
                                .min_by(|a, b| {
                                    let da = (a - inst.truth.beta()).norm();
                                    let db = (b - inst.truth.beta()).norm();
                                    da.total_cmp(&db)
                                })
                                .expect("path has at least one knot")
                        });
                        out.push(Estimate {
                            estimator: est.name(),
                            grid: "none",
                            grid_value: None,
                            lambda_n,
                            t0: None,
                            outcome: res,
                            wall_ms: path_ms + ms,
                        });
                    }
                }
            }
        }
    }
    out
}

use tlasso_core::harness::{
    self, parse_records_csv, read_records_csv, records_to_csv_string, spearman, summarize, Estimator,
    ExperimentConfig, ExperimentKind, Grid, Preset, SigmaRule, SizeGrid, T0Rule, RECORD_COLUMNS, SUMMARY_COLUMNS,
};
use std::sync::Arc;

use tlasso_core::ensembles::{self, EnsembleKind, EnsembleSpec};
use tlasso_core::model::{sample_beta, synthesize, BetaScheme};
use tlasso_core::procedures;
use tlasso_core::rng::SimRng;

fn small(kind: ExperimentKind, reps: usize) -> ExperimentConfig {
    let mut c = harness::preset(kind, Preset::Small);
    c.reps = reps;
    c.seed = 5;
    c
}

#[test]
fn high_snr_sweep_has_a_clean_threshold_range() {
    let cfg = harness::preset(ExperimentKind::Type12Sweep, Preset::Full);
    let summary = summarize(&harness::run_type12_sweep(&cfg).unwrap().records);
    let clean: Vec<f64> = summary
        .iter()
        .filter(|r| r.mean_fp.unwrap() < 0.1 && r.mean_fn.unwrap() < 0.1)
        .map(|r| r.grid_value.unwrap())
        .collect();
    assert!(!clean.is_empty());
}

#[test]
fn low_snr_false_negatives_rise_with_threshold() {
    let mut cfg = harness::preset(ExperimentKind::Type12Sweep, Preset::Full);
    cfg.sigma_rule = SigmaRule::SqrtS;
    let summary = summarize(&harness::run_type12_sweep(&cfg).unwrap().records);
    let t0: Vec<f64> = summary.iter().map(|r| r.grid_value.unwrap()).collect();
    let fns: Vec<f64> = summary.iter().map(|r| r.mean_fn.unwrap()).collect();
    assert!(spearman(&t0, &fns).unwrap() > 0.9);
}

#[test]
fn single_threshold_gives_single_column() {
    let mut cfg = small(ExperimentKind::Type12Sweep, 4);
    cfg.t0_rule = T0Rule::Multiple(Grid::One(0.8));
    let out = harness::run_type12_sweep(&cfg).unwrap();
    assert_eq!(out.records.len(), 4);
    assert_eq!(summarize(&out.records).len(), 1);
}

#[test]
fn one_replication_gives_one_record_per_estimator() {
    let out = harness::run_rho_hist(&small(ExperimentKind::RhoHist, 1)).unwrap();
    let names: Vec<&str> = out.records.iter().map(|r| r.estimator.as_str()).collect();
    assert_eq!(names, vec!["thresholded_lasso", "lasso_optimal"]);
    assert!(out.records.iter().all(|r| r.rho2.is_some() && r.error.is_none()));
}

#[test]
fn single_sparsity_level_gives_one_row_per_estimator() {
    let mut cfg = small(ExperimentKind::SparsityTable, 3);
    cfg.s = SizeGrid::One(5);
    let summary = summarize(&harness::run_sparsity_table(&cfg).unwrap().records);
    assert_eq!(summary.len(), 2);
    assert!(summary.iter().all(|r| r.s == 5 && r.reps == 3));
}

#[test]
fn success_metrics_are_invariant_to_noise_scale() {
    // λ_n, the screening cut and t0 all scale with σ, and so does the noise,
    // so support recovery depends on the noise pattern but not its size.
    let run = |sigma: f64| {
        let mut cfg = small(ExperimentKind::SuccessProb, 20);
        cfg.p = 20;
        cfg.n = SizeGrid::Many(vec![40, 200]);
        cfg.s = SizeGrid::One(4);
        cfg.sigma_rule = SigmaRule::Fixed(sigma);
        cfg.estimators = vec![Estimator::ThresholdedLasso];
        harness::run_success_prob(&cfg).unwrap().records
    };
    let (a, b) = (run(1e-3), run(1e-6));
    let key = |r: &harness::ExperimentRecord| (r.n, r.replication, r.tp, r.fp, r.fn_, r.success);
    assert_eq!(a.iter().map(key).collect::<Vec<_>>(), b.iter().map(key).collect::<Vec<_>>());
    let summary = summarize(&b);
    assert!(summary.iter().all(|r| r.success_rate.unwrap() >= 0.9 && r.mean_fn == Some(0.0)));
}

#[test]
fn overdetermined_noiseless_thresholded_lasso_recovers_support() {
    let mut rng = SimRng::seed_from(8);
    for n in [20, 40, 80] {
        let spec = EnsembleSpec::new(EnsembleKind::GaussianIid, n, 20);
        let x = Arc::new(ensembles::generate(&spec, &mut rng).unwrap());
        for _ in 0..20 {
            let truth = sample_beta(20, 4, &BetaScheme::Constant { value: 0.9 }, &mut rng).unwrap();
            let inst = synthesize(x.clone(), truth, 0.0, &mut rng).unwrap();
            let res = procedures::thresholded_lasso(&inst, 1e-6, 0.1).unwrap();
            assert_eq!(res.selected(), inst.truth.support());
            assert!((&res.beta_hat - inst.truth.beta()).amax() < 1e-10);
        }
    }
}

#[test]
fn success_grid_is_reported() {
    let cfg = small(ExperimentKind::SuccessProb, 1);
    let out = harness::run_success_prob(&cfg).unwrap();
    assert_eq!(out.grid.len(), 1);
    assert_eq!(out.grid[0].n, cfg.n.resolve(8, cfg.p));
}

#[test]
fn roc_endpoints() {
    let mut cfg = small(ExperimentKind::Roc, 3);
    cfg.p = 64;
    cfg.n = SizeGrid::One(40);
    cfg.s = SizeGrid::One(6);
    cfg.t0_rule = T0Rule::Multiple(Grid::Many(vec![1e-9, 1e6]));
    cfg.estimators = vec![Estimator::ThresholdedLasso, Estimator::LassoOptimal];
    let out = harness::run_roc(&cfg).unwrap();
    let at = |rep: usize, m: f64| {
        out.records
            .iter()
            .find(|r| r.replication == rep && r.estimator == "thresholded_lasso" && r.grid_value == Some(m))
            .unwrap()
    };
    for rep in 0..3 {
        let top = at(rep, 1e6);
        assert_eq!((top.fpr, top.tpr), (Some(0.0), Some(0.0)));
        // The smallest threshold keeps the whole Lasso support at λ_n,
        // which is the path sweep point with the same penalty.
        let bottom = at(rep, 1e-9);
        assert!(bottom.fp.unwrap() + bottom.tp.unwrap() > 0);
    }
    assert!(out.records.iter().any(|r| r.estimator == "lasso_path" && r.grid == "lambda_fraction"));
}

#[test]
fn single_roc_point() {
    let mut cfg = small(ExperimentKind::Roc, 1);
    cfg.p = 32;
    cfg.n = SizeGrid::One(24);
    cfg.s = SizeGrid::One(3);
    cfg.t0_rule = T0Rule::Multiple(Grid::One(1.0));
    cfg.estimators = vec![Estimator::ThresholdedLasso];
    let summary = summarize(&harness::run_roc(&cfg).unwrap().records);
    assert_eq!(harness::roc_curve(&summary, "thresholded_lasso").len(), 1);
}

#[test]
fn solver_failures_are_isolated() {
    // With a negligible signal the best Lasso knot is the empty model, so
    // the adaptive second stage has nothing to reweight.
    let mut cfg = small(ExperimentKind::RhoHist, 6);
    cfg.p = 30;
    cfg.n = SizeGrid::One(20);
    cfg.s = SizeGrid::One(2);
    cfg.beta = BetaScheme::Constant { value: 1e-6 };
    cfg.sigma_rule = SigmaRule::Unit;
    cfg.estimators = vec![Estimator::ThresholdedLasso, Estimator::AdaptiveLasso];
    let out = harness::run_rho_hist(&cfg).unwrap();
    assert_eq!(out.records.len(), 12);
    let failed: Vec<_> = out.records.iter().filter(|r| r.error.is_some()).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r.estimator == "adaptive_lasso"));
    assert!(failed[0].error.as_ref().unwrap().starts_with("empty_model"));
    assert!(out.records.iter().filter(|r| r.estimator == "thresholded_lasso").all(|r| r.error.is_none()));
    let summary = summarize(&out.records);
    assert_eq!(summary.iter().map(|r| r.errors).sum::<usize>(), failed.len());
}

#[test]
fn wrong_runner_is_rejected() {
    let cfg = small(ExperimentKind::RhoHist, 1);
    assert!(harness::run_roc(&cfg).is_err());
}

#[test]
fn empty_stream_is_header_only() {
    let text = records_to_csv_string(&[]);
    assert_eq!(text, format!("{}\n", RECORD_COLUMNS.join(",")));
    assert!(parse_records_csv(&text).unwrap().is_empty());
}

#[test]
fn csv_round_trip_is_exact() {
    let mut cfg = small(ExperimentKind::Illustrative, 3);
    cfg.record_timing = true;
    let out = harness::run_illustrative(&cfg).unwrap();
    let back = parse_records_csv(&records_to_csv_string(&out.records)).unwrap();
    assert_eq!(back, out.records);
}

#[test]
fn emitted_files_are_reproducible() {
    let cfg = small(ExperimentKind::Type12Sweep, 5);
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}/type12.csv"));
        let files = harness::emit(&harness::run_experiment(&cfg).unwrap(), &path).unwrap();
        let read = |p: &std::path::Path| std::fs::read_to_string(p).unwrap();
        let summary = read(&files.summary);
        assert!(summary.starts_with(&SUMMARY_COLUMNS.join(",")));
        let json: serde_json::Value = serde_json::from_str(&read(&files.json)).unwrap();
        assert_eq!(json["config_hash"], cfg.hash());
        assert_eq!(json["master_seed"], cfg.seed);
        assert_eq!(read_records_csv(&files.records).unwrap().len(), json["records"].as_array().unwrap().len());
        texts.push((read(&files.records), summary, read(&files.json)));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn records_carry_replay_information() {
    let cfg = small(ExperimentKind::RhoHist, 2);
    let out = harness::run_rho_hist(&cfg).unwrap();
    for r in &out.records {
        assert_eq!(r.config_hash, cfg.hash());
        assert_eq!(r.master_seed, cfg.seed);
        assert_eq!(r.experiment, ExperimentKind::RhoHist);
        assert!(r.wall_ms.is_none());
    }
}

#[test]
fn gauss_dantzig_and_iterative_run_in_the_harness() {
    let mut cfg = small(ExperimentKind::RhoHist, 3);
    cfg.p = 40;
    cfg.n = SizeGrid::One(30);
    cfg.s = SizeGrid::One(3);
    cfg.estimators = vec![Estimator::GaussDantzig, Estimator::Iterative, Estimator::AdaptiveLasso];
    let out = harness::run_rho_hist(&cfg).unwrap();
    for name in ["gauss_dantzig", "iterative", "adaptive_lasso"] {
        assert_eq!(out.records.iter().filter(|r| r.estimator == name).count(), 3);
    }
    let ds = out.records.iter().find(|r| r.estimator == "gauss_dantzig").unwrap();
    // Default Dantzig penalty (√(1+a) + 1/τ)λσ with a = 0, τ = 1.
    let lambda_sigma = (2.0 * 40f64.ln() / 30.0).sqrt() * ds.sigma;
    assert!((ds.lambda_n - 2.0 * lambda_sigma).abs() < 1e-12);
}

#[test]
fn config_files_load_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("exp.toml");
    std::fs::write(
        &toml_path,
        "experiment = \"type12_sweep\"\np = 64\nn = 40\ns = 4\nreps = 2\nseed = 3\nestimators = [\"thresholded_lasso\", \"lasso_optimal\"]\n\n[sigma_rule]\nfixed = 0.5\n\n[t0_rule]\nmultiple = [0.5, 1.0]\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&toml_path).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::Type12Sweep);
    assert_eq!(cfg.sigma_rule, SigmaRule::Fixed(0.5));
    let json_path = dir.path().join("exp.json");
    std::fs::write(&json_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(ExperimentConfig::load(&json_path).unwrap().hash(), cfg.hash());
    assert_eq!(harness::run_experiment(&cfg).unwrap().records.len(), 6);

    std::fs::write(&toml_path, "experiment = \"roc\"\nbogus = 1\n").unwrap();
    assert!(ExperimentConfig::load(&toml_path).is_err());
}

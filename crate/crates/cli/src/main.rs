use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tlasso_core::analysis::EnumerationMode;
use tlasso_core::harness::{self, DiagnoseConfig, ExperimentConfig, ExperimentKind, Preset};
use tlasso_core::Error;

#[derive(Parser)]
#[command(name = "tlasso", version, about = "Thresholded Lasso and Gauss-Dantzig simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// False positives and negatives across a threshold sweep.
    Type12(ExperimentArgs),
    /// Per-replication ρ² of the thresholded and oracle Lasso.
    RhoHist(ExperimentArgs),
    /// Mean ρ² for each sparsity level.
    SparsityTable(ExperimentArgs),
    /// Exact sign-recovery rate as the sample size grows.
    SuccessProb(ExperimentArgs),
    /// ROC points of the thresholded, path and adaptive Lasso.
    Roc(ExperimentArgs),
    /// A single illustrative comparison.
    Illustrative(ExperimentArgs),
    /// Incoherence report (sparse eigenvalues, δ, θ) of a design.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (.json or .toml).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration used when no --config is given: `full` or `small`.
    #[arg(long, default_value = "small")]
    preset: String,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replication count override.
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated estimator list override.
    #[arg(long)]
    estimators: Option<String>,
    /// Records CSV path; the summary CSV and JSON are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Diagnose configuration (.json or .toml) describing a generated design.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Design matrix CSV (rows are samples); columns are normalized first.
    #[arg(long, conflicts_with = "config")]
    design: Option<PathBuf>,
    /// Largest subset size to enumerate.
    #[arg(long)]
    max_size: Option<usize>,
    /// Rows of a generated Gaussian design (without --config or --design).
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Columns of a generated Gaussian design.
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Use this many random subsets instead of full enumeration.
    #[arg(long)]
    sampled: Option<usize>,
    /// Output JSON path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn experiment_config(kind: ExperimentKind, args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(Error::Config(format!(
                    "{} describes '{}', not '{}'",
                    path.display(),
                    cfg.experiment.name(),
                    kind.name()
                )));
            }
            cfg
        }
        None => harness::preset(kind, args.preset.parse::<Preset>()?),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(list) = &args.estimators {
        cfg.estimators = harness::parse_estimators(list)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(kind: ExperimentKind, args: &ExperimentArgs) -> Result<(), Error> {
    let cfg = experiment_config(kind, args)?;
    let output = harness::run_experiment(&cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    let files = harness::emit(&output, &out)?;
    let errors = output.records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{}",
        json!({
            "experiment": kind.name(),
            "config_hash": output.config_hash,
            "master_seed": cfg.seed,
            "records": output.records.len(),
            "error_records": errors,
            "records_csv": files.records,
            "summary_csv": files.summary,
            "json": files.json,
        })
    );
    Ok(())
}

fn run_diagnose(args: &DiagnoseArgs) -> Result<(), Error> {
    let mode = match args.sampled {
        Some(trials) => EnumerationMode::Sampled {
            trials,
            seed: args.seed.unwrap_or(0),
        },
        None => EnumerationMode::exact(),
    };
    let (design, max_size, mode) = if let Some(path) = &args.config {
        let mut cfg = DiagnoseConfig::load(path)?;
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        let mode = if args.sampled.is_some() { mode } else { cfg.mode };
        (cfg.design()?, args.max_size.unwrap_or(cfg.max_size), mode)
    } else if let Some(path) = &args.design {
        let d = harness::read_design_csv(path)?;
        let m = args.max_size.unwrap_or(d.p().min(4));
        (d, m, mode)
    } else {
        let cfg = DiagnoseConfig {
            ensemble: tlasso_core::ensembles::EnsembleKind::GaussianIid,
            n: args.n,
            p: args.p,
            max_size: args.max_size.unwrap_or(args.p.min(4)),
            seed: args.seed.unwrap_or(0),
            mode,
        };
        (cfg.design()?, cfg.max_size, mode)
    };
    let diagnosis = harness::diagnose(&design, max_size, &mode)?;
    let text = serde_json::to_string_pretty(&diagnosis).map_err(|e| Error::Internal(e.to_string()))?;
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => println!("{text}"),
    }
    Ok(())
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string()),
    };
    let result = match &cli.command {
        Command::Type12(a) => run_experiment(ExperimentKind::Type12Sweep, a),
        Command::RhoHist(a) => run_experiment(ExperimentKind::RhoHist, a),
        Command::SparsityTable(a) => run_experiment(ExperimentKind::SparsityTable, a),
        Command::SuccessProb(a) => run_experiment(ExperimentKind::SuccessProb, a),
        Command::Roc(a) => run_experiment(ExperimentKind::Roc, a),
        Command::Illustrative(a) => run_experiment(ExperimentKind::Illustrative, a),
        Command::Diagnose(a) => run_diagnose(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}

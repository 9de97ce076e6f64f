//! Experiment driver: configuration, replication, aggregation and output.

mod config;
mod diagnose;
mod emit;
mod presets;
mod run;
mod summary;

pub use config::{
    parse_estimators, DantzigLambda, Estimator, ExperimentConfig, ExperimentKind, Grid, SigmaRule, SizeGrid, T0Rule,
};
pub use diagnose::{diagnose, read_design_csv, DiagnoseConfig, Diagnosis};
pub use emit::{
    emit, parse_records_csv, read_records_csv, records_to_csv_string, write_records_csv, Emitted, SUMMARY_COLUMNS,
};
pub use presets::{preset, Preset};
pub use run::{
    run_experiment, run_illustrative, run_rho_hist, run_roc, run_sparsity_table, run_success_prob,
    run_type12_sweep, ExperimentRecord, GridUsed, RunOutput, RECORD_COLUMNS,
};
pub use summary::{
    interpolate_tpr, isotonic_fit, isotonic_residual, mean, median, roc_curve, spearman, std_dev, summarize,
    SummaryRow,
};

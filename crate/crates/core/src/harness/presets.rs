//! Full-scale experiment configurations and their desk-scale counterparts.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{DantzigLambda, Estimator, ExperimentConfig, ExperimentKind, Grid, SigmaRule, SizeGrid, T0Rule};
use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};
use crate::model::BetaScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Full,
    Small,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Preset::Full),
            "small" => Ok(Preset::Small),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected full or small)"))),
        }
    }
}

const DEFAULT_SEED: u64 = 20090528;

fn base(experiment: ExperimentKind, p: usize, n: SizeGrid, s: SizeGrid, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        ensemble: EnsembleKind::GaussianIid,
        p,
        n,
        s,
        beta: BetaScheme::GaussianMixture,
        sigma_rule: SigmaRule::SqrtSOver3,
        lambda_factor: 0.69,
        t0_rule: T0Rule::Multiple(Grid::One(1.0)),
        dantzig_lambda: DantzigLambda::Uup { a: 0.0, tau: 1.0 },
        reps,
        seed: DEFAULT_SEED,
        design_seed: None,
        estimators: vec![Estimator::ThresholdedLasso, Estimator::LassoOptimal],
        path_criterion: None,
        roc_points: 80,
        record_timing: false,
    }
}

/// The reference configuration of each experiment. `Small` halves `p` (and
/// scales `n`, `s` with it where they are tied to `p`) and keeps at least 100
/// replications.
pub fn preset(experiment: ExperimentKind, which: Preset) -> ExperimentConfig {
    let full = which == Preset::Full;
    match experiment {
        ExperimentKind::Illustrative => {
            let mut c = base(experiment, if full { 256 } else { 128 }, SizeGrid::One(72), SizeGrid::One(8), if full { 1 } else { 100 });
            c.estimators = vec![Estimator::ThresholdedLasso, Estimator::GaussDantzig, Estimator::LassoOptimal];
            c
        }
        ExperimentKind::Type12Sweep => {
            let mut c = base(experiment, if full { 256 } else { 128 }, SizeGrid::One(72), SizeGrid::One(8), 200);
            c.t0_rule = T0Rule::Multiple(Grid::Range { from: 0.01, to: 1.5, steps: 30 });
            c.estimators = vec![Estimator::ThresholdedLasso];
            c
        }
        ExperimentKind::RhoHist => base(
            experiment,
            if full { 256 } else { 128 },
            SizeGrid::One(72),
            SizeGrid::One(8),
            if full { 500 } else { 100 },
        ),
        ExperimentKind::SparsityTable => {
            if full {
                base(experiment, 2000, SizeGrid::One(400), SizeGrid::Many(vec![5, 18, 20, 40, 60, 80, 100]), 100)
            } else {
                base(experiment, 500, SizeGrid::One(200), SizeGrid::Many(vec![5, 15, 25]), 100)
            }
        }
        ExperimentKind::SuccessProb => {
            let mut c = base(
                experiment,
                if full { 256 } else { 128 },
                SizeGrid::Scaled { s_log_p: [0.5, 6.0], steps: 10 },
                SizeGrid::One(8),
                100,
            );
            c.beta = BetaScheme::Constant { value: 0.9 };
            c.sigma_rule = SigmaRule::Unit;
            c.t0_rule = T0Rule::SqrtScreen { f_t: Grid::One(0.24), screen: 0.5 };
            c
        }
        ExperimentKind::Roc => {
            let (p, n, s) = if full { (512, 330, 64) } else { (256, 165, 32) };
            let mut c = base(experiment, p, SizeGrid::One(n), SizeGrid::One(s), 100);
            c.t0_rule = T0Rule::Multiple(Grid::Range { from: 0.01, to: 1.5, steps: 40 });
            c.estimators = vec![Estimator::ThresholdedLasso, Estimator::LassoOptimal, Estimator::AdaptiveLasso];
            c
        }
    }
}

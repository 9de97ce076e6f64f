use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};
use crate::model::BetaScheme;
use crate::procedures::PathCriterion;
use crate::rng::split_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Illustrative,
    Type12Sweep,
    RhoHist,
    SparsityTable,
    SuccessProb,
    Roc,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Illustrative => "illustrative",
            ExperimentKind::Type12Sweep => "type12_sweep",
            ExperimentKind::RhoHist => "rho_hist",
            ExperimentKind::SparsityTable => "sparsity_table",
            ExperimentKind::SuccessProb => "success_prob",
            ExperimentKind::Roc => "roc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    ThresholdedLasso,
    GaussDantzig,
    Iterative,
    LassoOptimal,
    AdaptiveLasso,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::ThresholdedLasso,
        Estimator::GaussDantzig,
        Estimator::Iterative,
        Estimator::LassoOptimal,
        Estimator::AdaptiveLasso,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::ThresholdedLasso => "thresholded_lasso",
            Estimator::GaussDantzig => "gauss_dantzig",
            Estimator::Iterative => "iterative",
            Estimator::LassoOptimal => "lasso_optimal",
            Estimator::AdaptiveLasso => "adaptive_lasso",
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown estimator '{s}'")))
    }
}

/// Parse a comma-separated estimator list.
pub fn parse_estimators(list: &str) -> Result<Vec<Estimator>> {
    let mut out: Vec<Estimator> = list
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("estimator list is empty".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaRule {
    Fixed(f64),
    #[serde(rename = "sqrt_s_over_3")]
    SqrtSOver3,
    SqrtS,
    Unit,
}

impl SigmaRule {
    pub fn sigma(&self, s: usize) -> f64 {
        match self {
            SigmaRule::Fixed(v) => *v,
            SigmaRule::SqrtSOver3 => (s as f64).sqrt() / 3.0,
            SigmaRule::SqrtS => (s as f64).sqrt(),
            SigmaRule::Unit => 1.0,
        }
    }
}

/// A single value, an explicit list, or `steps` evenly spaced values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    One(f64),
    Many(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::One(v) => vec![*v],
            Grid::Many(v) => v.clone(),
            Grid::Range { from, to, steps } => linspace(*from, *to, *steps),
        }
    }
}

fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Sample sizes: explicit values, or `n = c·s·ln p` for `steps` evenly
/// spaced `c` in `s_log_p = [from, to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeGrid {
    One(usize),
    Many(Vec<usize>),
    Scaled { s_log_p: [f64; 2], steps: usize },
}

impl SizeGrid {
    pub fn resolve(&self, s: usize, p: usize) -> Vec<usize> {
        match self {
            SizeGrid::One(v) => vec![*v],
            SizeGrid::Many(v) => v.clone(),
            SizeGrid::Scaled { s_log_p, steps } => {
                let unit = s as f64 * (p as f64).ln();
                let mut out: Vec<usize> = linspace(s_log_p[0], s_log_p[1], *steps)
                    .into_iter()
                    .map(|c| ((c * unit).round() as usize).max(2))
                    .collect();
                out.dedup();
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T0Rule {
    /// `t0 = m·λσ` for each multiple `m`.
    Multiple(Grid),
    /// `t0 = f_t·√|Ŝ0|·λσ` with `Ŝ0 = {j : |β_init,j| ≥ screen·λ_n}`.
    SqrtScreen {
        f_t: Grid,
        #[serde(default = "default_screen")]
        screen: f64,
    },
}

fn default_screen() -> f64 {
    0.5
}

/// Penalty of the Dantzig selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DantzigLambda {
    /// `(√(1+a) + 1/τ)·λσ`
    Uup { a: f64, tau: f64 },
    /// Same penalty as the Lasso.
    Matched,
}

fn default_lambda_factor() -> f64 {
    0.69
}

fn default_dantzig_lambda() -> DantzigLambda {
    DantzigLambda::Uup { a: 0.0, tau: 1.0 }
}

fn default_ensemble() -> EnsembleKind {
    EnsembleKind::GaussianIid
}

fn default_beta() -> BetaScheme {
    BetaScheme::GaussianMixture
}

fn default_roc_points() -> usize {
    80
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleKind,
    pub p: usize,
    pub n: SizeGrid,
    pub s: SizeGrid,
    #[serde(default = "default_beta")]
    pub beta: BetaScheme,
    pub sigma_rule: SigmaRule,
    /// `λ_n = lambda_factor·λσ`.
    #[serde(default = "default_lambda_factor")]
    pub lambda_factor: f64,
    pub t0_rule: T0Rule,
    #[serde(default = "default_dantzig_lambda")]
    pub dantzig_lambda: DantzigLambda,
    pub reps: usize,
    pub seed: u64,
    /// Seed of the fixed design; derived from `seed` when absent.
    #[serde(default)]
    pub design_seed: Option<u64>,
    pub estimators: Vec<Estimator>,
    /// Knot choice for `lasso_optimal`; defaults to best support match for
    /// success-probability runs and minimum ℓ2 loss otherwise.
    #[serde(default)]
    pub path_criterion: Option<PathCriterion>,
    /// Number of penalty levels swept along Lasso paths in ROC runs.
    #[serde(default = "default_roc_points")]
    pub roc_points: usize,
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        if self.p == 0 {
            return bad("p must be >= 1".into());
        }
        if self.estimators.is_empty() {
            return bad("estimator list is empty".into());
        }
        if !(self.lambda_factor > 0.0 && self.lambda_factor.is_finite()) {
            return bad(format!("lambda_factor must be > 0, got {}", self.lambda_factor));
        }
        if let SigmaRule::Fixed(v) = self.sigma_rule {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("fixed sigma must be > 0, got {v}"));
            }
        }
        if matches!(self.s, SizeGrid::Scaled { .. }) {
            return bad("s must be a value or a list".into());
        }
        let s_values = self.s_values();
        if s_values.is_empty() {
            return bad("s grid is empty".into());
        }
        for &s in &s_values {
            if s == 0 || s > self.p {
                return bad(format!("s={s} must lie in 1..=p"));
            }
            let ns = self.n.resolve(s, self.p);
            if ns.is_empty() || ns.contains(&0) {
                return bad("n grid is empty or contains 0".into());
            }
        }
        let t0 = match &self.t0_rule {
            T0Rule::Multiple(g) => g.values(),
            T0Rule::SqrtScreen { f_t, screen } => {
                if !(*screen >= 0.0) {
                    return bad("screen factor must be >= 0".into());
                }
                f_t.values()
            }
        };
        if t0.is_empty() || t0.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("threshold grid must be nonempty with positive entries".into());
        }
        if let DantzigLambda::Uup { a, tau } = self.dantzig_lambda {
            if !(a >= 0.0 && tau > 0.0) {
                return bad("dantzig_lambda needs a >= 0 and tau > 0".into());
            }
        }
        if self.experiment == ExperimentKind::Roc && self.roc_points < 2 {
            return bad("roc_points must be >= 2".into());
        }
        crate::ensembles::EnsembleSpec::new(self.ensemble, 1, self.p)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn s_values(&self) -> Vec<usize> {
        self.s.resolve(0, self.p)
    }

    pub fn design_seed(&self) -> u64 {
        self.design_seed.unwrap_or_else(|| split_seed(self.seed, u64::MAX))
    }

    pub fn path_criterion(&self) -> PathCriterion {
        self.path_criterion.unwrap_or(match self.experiment {
            ExperimentKind::SuccessProb => PathCriterion::BestSupportMatch,
            _ => PathCriterion::MinL2Loss,
        })
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load from a `.toml` or `.json` file (by extension; JSON otherwise).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text)?,
            _ => Self::from_json(&text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Type12Sweep,
            ensemble: EnsembleKind::GaussianIid,
            p: 64,
            n: SizeGrid::One(30),
            s: SizeGrid::Many(vec![2, 4]),
            beta: BetaScheme::GaussianMixture,
            sigma_rule: SigmaRule::SqrtSOver3,
            lambda_factor: 0.69,
            t0_rule: T0Rule::Multiple(Grid::Range { from: 0.1, to: 1.0, steps: 4 }),
            dantzig_lambda: DantzigLambda::Matched,
            reps: 3,
            seed: 9,
            design_seed: None,
            estimators: vec![Estimator::ThresholdedLasso],
            path_criterion: None,
            roc_points: 80,
            record_timing: false,
        }
    }

    #[test]
    fn json_and_toml_round_trip() {
        let cfg = sample();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let text = r#"
experiment = "rho_hist"
p = 256
n = 72
s = 8
sigma_rule = "sqrt_s_over_3"
t0_rule = { multiple = 1.0 }
reps = 5
seed = 1
estimators = ["thresholded_lasso", "lasso_optimal"]
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.lambda_factor, 0.69);
        assert_eq!(cfg.ensemble, EnsembleKind::GaussianIid);
        assert_eq!(cfg.dantzig_lambda, DantzigLambda::Uup { a: 0.0, tau: 1.0 });
        assert_eq!(cfg.path_criterion(), PathCriterion::MinL2Loss);
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn validation_errors() {
        let mut c = sample();
        c.reps = 0;
        assert!(c.validate().is_err());
        let mut c = sample();
        c.s = SizeGrid::Many(vec![]);
        assert!(c.validate().is_err());
        let mut c = sample();
        c.s = SizeGrid::One(65);
        assert!(c.validate().is_err());
        let mut c = sample();
        c.t0_rule = T0Rule::Multiple(Grid::Many(vec![0.5, -1.0]));
        assert!(c.validate().is_err());
        sample().validate().unwrap();
    }

    #[test]
    fn hash_tracks_content() {
        let a = sample();
        let mut b = sample();
        assert_eq!(a.hash(), b.hash());
        b.seed = 10;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn grids_resolve() {
        assert_eq!(Grid::Range { from: 0.0, to: 1.0, steps: 3 }.values(), vec![0.0, 0.5, 1.0]);
        let n = SizeGrid::Scaled { s_log_p: [0.5, 6.0], steps: 10 }.resolve(8, 256);
        assert_eq!(n.len(), 10);
        assert_eq!(n[0], (0.5 * 8.0 * 256f64.ln()).round() as usize);
        assert_eq!(*n.last().unwrap(), (6.0 * 8.0 * 256f64.ln()).round() as usize);
    }

    #[test]
    fn estimator_lists() {
        let e = parse_estimators("lasso_optimal, thresholded_lasso").unwrap();
        assert_eq!(e, vec![Estimator::ThresholdedLasso, Estimator::LassoOptimal]);
        assert!(parse_estimators("lars").is_err());
        assert!(parse_estimators("").is_err());
    }
}

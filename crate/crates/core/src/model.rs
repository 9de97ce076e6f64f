//! Problem instances for the linear model `Y = Xβ + ε`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ensembles::{self, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::SimRng;

/// Dense `n × p` design whose columns are normalized to ℓ2 norm `√n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
}

impl DesignMatrix {
    /// Wrap `x` as is. Use [`DesignMatrix::normalized`] to rescale columns.
    pub fn from_matrix(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid(format!(
                "design must be at least 1x1, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(Self { x })
    }

    /// Rescale every column of `x` to norm `√n`.
    pub fn normalized(x: DMatrix<f64>) -> Result<Self> {
        let mut d = Self::from_matrix(x)?;
        d.normalize()?;
        Ok(d)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let target = (self.n() as f64).sqrt();
        for j in 0..self.p() {
            let norm = self.x.column(j).norm();
            if norm == 0.0 {
                return Err(Error::invalid(format!("column {j} is identically zero")));
            }
            // Columns already at the target norm are left bit-identical.
            if norm != target {
                self.x.column_mut(j).scale_mut(target / norm);
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.x
    }

    /// Largest relative deviation of a column norm from `√n`.
    pub fn normalization_error(&self) -> f64 {
        let target = (self.n() as f64).sqrt();
        (0..self.p())
            .map(|j| (self.x.column(j).norm() - target).abs() / target)
            .fold(0.0, f64::max)
    }
}

/// True coefficient vector and its support.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    beta: DVector<f64>,
    support: Vec<usize>,
}

impl GroundTruth {
    pub fn new(beta: DVector<f64>) -> Self {
        let support = linalg::support(&beta);
        Self { beta, support }
    }

    pub fn from_slice(beta: &[f64]) -> Self {
        Self::new(DVector::from_column_slice(beta))
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn beta_min(&self) -> Option<f64> {
        self.support
            .iter()
            .map(|&j| self.beta[j].abs())
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.min(v))))
    }

    /// Same support, coefficients multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(&self.beta * c)
    }
}

/// How nonzero coefficients are drawn on the sampled support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaScheme {
    /// `β_i = μ_i (1 + |g_i|)`, `μ_i = ±1` w.p. 1/2, `g_i ~ N(0, 1)`.
    GaussianMixture,
    /// `β_i = ±value` w.p. 1/2.
    Constant { value: f64 },
    /// The given values, assigned to the sampled support in ascending index order.
    Explicit { values: Vec<f64> },
}

pub fn sample_beta(p: usize, s: usize, scheme: &BetaScheme, rng: &mut SimRng) -> Result<GroundTruth> {
    if s > p {
        return Err(Error::invalid(format!("sparsity s={s} exceeds dimension p={p}")));
    }
    if let BetaScheme::Explicit { values } = scheme {
        if values.len() != s {
            return Err(Error::invalid(format!(
                "explicit scheme has {} values for s={s}",
                values.len()
            )));
        }
        if values.iter().any(|v| *v == 0.0) {
            return Err(Error::invalid("explicit values must be nonzero"));
        }
    }
    let support = rng.subset(p, s);
    let mut beta = DVector::zeros(p);
    for (k, &j) in support.iter().enumerate() {
        beta[j] = match scheme {
            BetaScheme::GaussianMixture => {
                let mu = rng.sign();
                mu * (1.0 + rng.normal().abs())
            }
            BetaScheme::Constant { value } => rng.sign() * value,
            BetaScheme::Explicit { values } => values[k],
        };
    }
    Ok(GroundTruth::new(beta))
}

/// One realization of the linear model on a fixed design.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub x: Arc<DesignMatrix>,
    pub truth: GroundTruth,
    pub sigma: f64,
    pub y: DVector<f64>,
    /// Realized noise `ε = Y − Xβ`, kept for oracle checks.
    pub noise: DVector<f64>,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        self.x.matrix()
    }

    /// Instance with `(β, σ, Y)` multiplied by `c` on the same design.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x: Arc::clone(&self.x),
            truth: self.truth.scaled(c),
            sigma: self.sigma * c,
            y: &self.y * c,
            noise: &self.noise * c,
            seed: self.seed,
        }
    }

    /// Write `X`, `β` and `Y` as CSV: one row per sample with columns
    /// `y,x0..x{p-1}`, preceded by a `beta` row holding the coefficients.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let p = self.p();
        let header: Vec<String> = std::iter::once("row".to_string())
            .chain(std::iter::once("y".to_string()))
            .chain((0..p).map(|j| format!("x{j}")))
            .collect();
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        let beta: Vec<String> = self.truth.beta().iter().map(|v| v.to_string()).collect();
        writeln!(out, "beta,,{}", beta.join(",")).map_err(io)?;
        let x = self.design();
        for i in 0..self.n() {
            let row: Vec<String> = (0..p).map(|j| x[(i, j)].to_string()).collect();
            writeln!(out, "{i},{},{}", self.y[i], row.join(",")).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Draw `Y = Xβ + ε` with `ε ~ N(0, σ² I)`.
pub fn synthesize(
    x: Arc<DesignMatrix>,
    truth: GroundTruth,
    sigma: f64,
    rng: &mut SimRng,
) -> Result<ProblemInstance> {
    if x.p() != truth.p() {
        return Err(Error::invalid(format!(
            "design has p={} columns but beta has length {}",
            x.p(),
            truth.p()
        )));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    let noise = DVector::from_fn(x.n(), |_, _| sigma * rng.normal());
    let y = x.matrix() * truth.beta() + &noise;
    Ok(ProblemInstance {
        x,
        truth,
        sigma,
        y,
        noise,
        seed: rng.seed(),
    })
}

/// `‖β‖² / σ²`.
pub fn snr(truth: &GroundTruth, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("SNR requires sigma > 0"));
    }
    Ok(truth.beta().norm_squared() / (sigma * sigma))
}

/// Everything needed to regenerate a [`ProblemInstance`] bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub ensemble: EnsembleSpec,
    pub design_seed: u64,
    pub s: usize,
    pub scheme: BetaScheme,
    pub sigma: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn realize(&self) -> Result<ProblemInstance> {
        let x = ensembles::generate(&self.ensemble, &mut SimRng::seed_from(self.design_seed))?;
        let mut rng = SimRng::seed_from(self.seed);
        let truth = sample_beta(x.p(), self.s, &self.scheme, &mut rng)?;
        synthesize(Arc::new(x), truth, self.sigma, &mut rng)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

//! Random design ensembles.
//!
//! Entries are drawn column by column (column-major order) from the supplied
//! stream, so a given `(spec, seed)` always yields the same matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DesignMatrix;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    GaussianIid,
    /// Rows i.i.d. `N(0, T(γ))` with `T(γ)_{ij} = γ^{|i-j|}`.
    Toeplitz { gamma: f64 },
    /// i.i.d. ±1 entries.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub n: usize,
    pub p: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, p: usize) -> Self {
        Self { kind, n, p }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid(format!(
                "ensemble needs n >= 1 and p >= 1, got n={} p={}",
                self.n, self.p
            )));
        }
        if let EnsembleKind::Toeplitz { gamma } = self.kind {
            check_gamma(gamma)?;
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("toeplitz correlation must lie in (0, 1), got {gamma}")))
    }
}

/// Draw a design from `spec` and normalize its columns to norm `√n`.
pub fn generate(spec: &EnsembleSpec, rng: &mut SimRng) -> Result<DesignMatrix> {
    let raw = generate_raw(spec, rng)?;
    DesignMatrix::normalized(raw)
}

/// The design before column normalization.
pub fn generate_raw(spec: &EnsembleSpec, rng: &mut SimRng) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let x = match spec.kind {
        EnsembleKind::GaussianIid => gaussian(n, p, rng),
        EnsembleKind::Bernoulli => {
            let mut x = DMatrix::zeros(n, p);
            for j in 0..p {
                for i in 0..n {
                    x[(i, j)] = rng.sign();
                }
            }
            x
        }
        EnsembleKind::Toeplitz { gamma } => {
            let l = toeplitz_cholesky(gamma, p)?;
            // Row i is L z_i, i.e. X = Z Lᵀ.
            gaussian(n, p, rng) * l.transpose()
        }
    };
    Ok(x)
}

fn gaussian(n: usize, p: usize, rng: &mut SimRng) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, p);
    for j in 0..p {
        for i in 0..n {
            x[(i, j)] = rng.normal();
        }
    }
    x
}

pub fn toeplitz_covariance(gamma: f64, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| gamma.powi((i as i32 - j as i32).abs()))
}

/// Lower-triangular `L` with `L Lᵀ = T(γ)`.
pub fn toeplitz_cholesky(gamma: f64, p: usize) -> Result<DMatrix<f64>> {
    check_gamma(gamma)?;
    if p == 0 {
        return Err(Error::invalid("toeplitz dimension must be >= 1"));
    }
    let t = toeplitz_covariance(gamma, p);
    let chol = nalgebra::Cholesky::new(t)
        .ok_or_else(|| Error::Internal(format!("T({gamma}) of size {p} not positive definite")))?;
    Ok(chol.l())
}

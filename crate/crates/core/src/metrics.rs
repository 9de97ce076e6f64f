//! Support-recovery and estimation-error metrics.
//!
//! Supports are read off exact nonzeros: refit estimators carry exact zeros
//! outside the selected model, so no extra thresholding happens here.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    /// `fp / (p − s)`, 0 when every variable is relevant.
    pub fpr: f64,
    /// `tp / s`, 1 when there is nothing to find.
    pub tpr: f64,
}

fn check_len(beta_hat: &DVector<f64>, truth: &GroundTruth) -> Result<()> {
    if beta_hat.len() != truth.p() {
        return Err(Error::invalid(format!(
            "estimate has length {}, truth has length {}",
            beta_hat.len(),
            truth.p()
        )));
    }
    Ok(())
}

pub fn confusion(beta_hat: &DVector<f64>, truth: &GroundTruth) -> Result<Confusion> {
    check_len(beta_hat, truth)?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (b, t) in beta_hat.iter().zip(truth.beta().iter()) {
        match (*b != 0.0, *t != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let s = tp + fn_;
    let negatives = fp + tn;
    Ok(Confusion {
        tp,
        fp,
        fn_,
        tn,
        fpr: if negatives == 0 { 0.0 } else { fp as f64 / negatives as f64 },
        tpr: if s == 0 { 1.0 } else { tp as f64 / s as f64 },
    })
}

/// `Σ(β̂ᵢ − βᵢ)² / Σ min(βᵢ², σ²/n)`.
pub fn rho_squared(beta_hat: &DVector<f64>, truth: &GroundTruth, sigma: f64, n: usize) -> Result<f64> {
    check_len(beta_hat, truth)?;
    let floor = sigma * sigma / n as f64;
    let denom: f64 = truth.beta().iter().map(|b| (b * b).min(floor)).sum();
    if !(denom > 0.0) {
        return Err(Error::UndefinedMetric(
            "rho^2 needs a nonzero truth and sigma > 0".into(),
        ));
    }
    Ok((beta_hat - truth.beta()).norm_squared() / denom)
}

/// `‖β̂ − β‖₂`
pub fn ell2_loss(beta_hat: &DVector<f64>, truth: &GroundTruth) -> Result<f64> {
    check_len(beta_hat, truth)?;
    Ok((beta_hat - truth.beta()).norm())
}

/// `‖Xβ̂ − Xβ‖₂ / √n`
pub fn prediction_loss(x: &DMatrix<f64>, beta_hat: &DVector<f64>, truth: &GroundTruth) -> Result<f64> {
    check_len(beta_hat, truth)?;
    if x.ncols() != truth.p() {
        return Err(Error::invalid("design width does not match truth"));
    }
    Ok((x * (beta_hat - truth.beta())).norm() / (x.nrows() as f64).sqrt())
}

/// True iff every coordinate has the right sign, zeros included.
pub fn exact_sign_recovery(beta_hat: &DVector<f64>, truth: &GroundTruth) -> bool {
    beta_hat.len() == truth.p()
        && beta_hat
            .iter()
            .zip(truth.beta().iter())
            .all(|(b, t)| linalg::sign(*b) == linalg::sign(*t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{self, EnsembleKind, EnsembleSpec};
    use crate::rng::SimRng;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn confusion_cases() {
        let truth = GroundTruth::from_slice(&[1.0, 0.0, 1.0, 0.0]);
        let c = confusion(&v(&[1.0, 1.0, 0.0, 0.0]), &truth).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 1, 1));
        assert_eq!((c.fpr, c.tpr), (0.5, 0.5));

        let c = confusion(truth.beta(), &truth).unwrap();
        assert_eq!((c.fp, c.fn_, c.fpr, c.tpr), (0, 0, 0.0, 1.0));

        let c = confusion(&v(&[0.0; 4]), &truth).unwrap();
        assert_eq!((c.tp, c.fn_, c.fpr), (0, 2, 0.0));

        let empty = GroundTruth::from_slice(&[0.0, 0.0]);
        assert_eq!(confusion(&v(&[0.0, 0.0]), &empty).unwrap().tpr, 1.0);
        let full = GroundTruth::from_slice(&[1.0, 2.0]);
        assert_eq!(confusion(&v(&[1.0, 0.0]), &full).unwrap().fpr, 0.0);

        assert!(matches!(confusion(&v(&[1.0]), &truth), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rho_squared_cases() {
        let truth = GroundTruth::from_slice(&[2.0, -3.0, 0.0, 1.5]);
        assert_eq!(rho_squared(truth.beta(), &truth, 1.0, 16).unwrap(), 0.0);
        // All |β_i| ≥ σ/√n: denominator is s σ²/n.
        let r = rho_squared(&v(&[0.0; 4]), &truth, 1.0, 16).unwrap();
        let expect = truth.beta().norm_squared() * 16.0 / (3.0 * 1.0);
        assert!((r - expect).abs() < 1e-12);
        let zero = GroundTruth::from_slice(&[0.0, 0.0]);
        assert!(matches!(rho_squared(&v(&[1.0, 0.0]), &zero, 1.0, 4), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn losses_on_orthogonal_design() {
        let n = 5;
        let x = DMatrix::<f64>::identity(n, n) * (n as f64).sqrt();
        let truth = GroundTruth::from_slice(&[1.0, 0.0, -2.0, 0.0, 0.5]);
        let est = v(&[0.8, 0.1, -2.2, 0.0, 0.0]);
        assert_eq!(ell2_loss(truth.beta(), &truth).unwrap(), 0.0);
        assert_eq!(prediction_loss(&x, truth.beta(), &truth).unwrap(), 0.0);
        let a = ell2_loss(&est, &truth).unwrap();
        let b = prediction_loss(&x, &est, &truth).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn prediction_loss_bounded_by_sparse_eigenvalue() {
        // Difference supported on two coordinates: ratio bounded by √Λ_max(2).
        let x = ensembles::generate(&EnsembleSpec::new(EnsembleKind::GaussianIid, 8, 6), &mut SimRng::seed_from(3))
            .unwrap()
            .into_matrix();
        let mut lmax2: f64 = 0.0;
        for i in 0..6 {
            for j in i + 1..6 {
                let sub = linalg::select_columns(&x, &[i, j]);
                let g = sub.tr_mul(&sub) / 8.0;
                lmax2 = lmax2.max(g.symmetric_eigenvalues().max());
            }
        }
        let truth = GroundTruth::from_slice(&[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let mut rng = SimRng::seed_from(4);
        for _ in 0..50 {
            let mut est = truth.beta().clone();
            est[1] += rng.normal();
            est[3] += rng.normal();
            let pl = prediction_loss(&x, &est, &truth).unwrap();
            let l2 = ell2_loss(&est, &truth).unwrap();
            assert!(pl <= lmax2.sqrt() * l2 + 1e-12);
        }
    }

    #[test]
    fn sign_recovery_cases() {
        let truth = GroundTruth::from_slice(&[1.0, 0.0, -1.0]);
        assert!(exact_sign_recovery(truth.beta(), &truth));
        assert!(!exact_sign_recovery(&v(&[1.0, 0.1, -1.0]), &truth));
        assert!(!exact_sign_recovery(&v(&[1.0, 0.0, 1.0]), &truth));
    }

    proptest! {
        #[test]
        fn counts_sum_to_p(
            b in proptest::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], 1..30),
            mask in proptest::collection::vec(any::<bool>(), 30),
        ) {
            let t: Vec<f64> = mask[..b.len()].iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
            let truth = GroundTruth::from_slice(&t);
            let c = confusion(&DVector::from_vec(b.clone()), &truth).unwrap();
            prop_assert_eq!(c.tp + c.fp + c.fn_ + c.tn, b.len());
            prop_assert_eq!(c.tp + c.fn_, truth.s());
            prop_assert!((0.0..=1.0).contains(&c.fpr) && (0.0..=1.0).contains(&c.tpr));
        }

        #[test]
        fn rho_squared_scale_invariant(
            t in proptest::collection::vec(0.1..3.0f64, 1..10),
            d in proptest::collection::vec(-1.0..1.0f64, 10),
            c in 0.1..10.0f64,
            sigma in 0.1..2.0f64,
        ) {
            let truth = GroundTruth::from_slice(&t);
            let est = DVector::from_iterator(t.len(), t.iter().zip(&d).map(|(a, b)| a + b));
            let r1 = rho_squared(&est, &truth, sigma, 20).unwrap();
            let r2 = rho_squared(&(&est * c), &truth.scaled(c), sigma * c, 20).unwrap();
            prop_assert!((r1 - r2).abs() <= 1e-9 * (1.0 + r1));
        }
    }
}

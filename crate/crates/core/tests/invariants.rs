use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use tlasso_core::dantzig::{dantzig_selector, ds_feasibility};
use tlasso_core::ensembles::{self, EnsembleKind, EnsembleSpec};
use tlasso_core::lasso_path::{cd_lasso, default_max_knots, kkt_residual, lars_path, lasso_at};
use tlasso_core::rng::SimRng;

fn problem(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = SimRng::seed_from(seed);
    let spec = EnsembleSpec::new(EnsembleKind::GaussianIid, n, p);
    let x = ensembles::generate(&spec, &mut rng).unwrap().into_matrix();
    let y = DVector::from_fn(n, |_, _| rng.normal());
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_is_optimal_between_knots(n in 6usize..24, p in 3usize..30, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let (x, y) = problem(n, p, seed);
        let path = lars_path(&x, &y, default_max_knots(n, p)).unwrap();
        let lo = path.lambda_min().max(1e-3 * path.lambda_max());
        let lambda = lo + frac * (path.lambda_max() - lo);
        let beta = lasso_at(&path, lambda);
        prop_assert!(kkt_residual(&x, &y, &beta, lambda) < 1e-8);
        let active = beta.iter().filter(|v| **v != 0.0).count();
        prop_assert!(active <= n.min(p));
    }

    #[test]
    fn path_agrees_with_coordinate_descent(n in 8usize..20, p in 3usize..16, seed in any::<u64>()) {
        let (x, y) = problem(n, p, seed);
        let path = lars_path(&x, &y, default_max_knots(n, p)).unwrap();
        let lambda = 0.3 * path.lambda_max();
        prop_assume!(lambda >= path.lambda_min());
        let cd = cd_lasso(&x, &y, lambda, 1e-12, 100_000).unwrap();
        prop_assert!((lasso_at(&path, lambda) - cd).amax() < 1e-6);
    }

    #[test]
    fn dantzig_is_feasible_and_sparser_in_l1_than_lasso(n in 6usize..16, p in 3usize..14, seed in any::<u64>(), frac in 0.1f64..0.9) {
        let (x, y) = problem(n, p, seed);
        let path = lars_path(&x, &y, default_max_knots(n, p)).unwrap();
        let lambda = frac * path.lambda_max();
        prop_assume!(lambda >= path.lambda_min());
        let ds = dantzig_selector(&x, &y, lambda).unwrap();
        prop_assert!(ds_feasibility(&x, &y, &ds.beta, lambda) <= 1e-7);
        // The Lasso solution satisfies the Dantzig constraint, so it bounds
        // the Dantzig objective from above.
        let lasso = lasso_at(&path, lambda);
        prop_assert!(ds.l1_norm <= lasso.lp_norm(1) + 1e-8);
    }

    #[test]
    fn zero_above_lambda_max(n in 4usize..20, p in 2usize..20, seed in any::<u64>(), scale in 1.0f64..5.0) {
        let (x, y) = problem(n, p, seed);
        let path = lars_path(&x, &y, default_max_knots(n, p)).unwrap();
        prop_assert!(lasso_at(&path, scale * path.lambda_max()).iter().all(|v| *v == 0.0));
        let ds = dantzig_selector(&x, &y, scale * path.lambda_max()).unwrap();
        prop_assert!(ds.beta.iter().all(|v| *v == 0.0));
    }
}

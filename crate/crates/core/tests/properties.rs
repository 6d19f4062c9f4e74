mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use common::*;
use ridge_mml::posterior::scaled_neighborhood;
use ridge_mml::ridge::{grr_lambda, rr_objective};
use ridge_mml::simulation::{roc_analysis, Orientation};
use ridge_mml::{
    diagnostics, lambda_vector, log_marginal, posterior_fit, predictive, standardize, student, Dataset,
    ResidualKind, RidgeSpec, ScaleMode, ShrinkageProfile, Standardization, StandardizedDesign,
};

fn instance() -> impl Strategy<Value = (DMatrix<f64>, DVector<f64>)> {
    (1usize..=8).prop_flat_map(|p| {
        (p + 2..=20).prop_flat_map(move |n| {
            (
                prop::collection::vec(-3.0f64..3.0, n * p),
                prop::collection::vec(-3.0f64..3.0, n),
            )
                .prop_map(move |(xs, ys)| (DMatrix::from_vec(n, p, xs), DVector::from_vec(ys)))
        })
    })
}

fn design(x: DMatrix<f64>, y: DVector<f64>) -> StandardizedDesign {
    let p = x.ncols();
    StandardizedDesign::from_standardized(x, y, Standardization::identity(p), 1e-12).unwrap()
}

fn well_conditioned(x: &DMatrix<f64>) -> bool {
    let (values, _) = gram_eigenvectors(x);
    values.last().copied().unwrap_or(0.0) > 1e-3 * values[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_path_matches_dense_matrices((x, y) in instance(), pick in prop::collection::vec(0usize..3, 8)) {
        prop_assume!(well_conditioned(&x));
        let p = x.ncols();
        let lambdas: Vec<f64> = (0..p).map(|k| [0.1, 1.0, 10.0][pick[k]]).collect();
        let oracle = DenseNig::new(&x, &y, &prior_precision(&x, &lambdas), 0.8, 1.3);
        let d = design(x, y);
        let profile = ShrinkageProfile::new(lambdas).unwrap();
        let post = posterior_fit(&d, &profile, 0.8, 1.3).unwrap();
        prop_assert!(rel_err(log_marginal(&d, &profile, 0.8, 1.3).unwrap(), oracle.log_ml) < 1e-8);
        prop_assert!(rel_err_vec(&post.beta_bar, oracle.beta_bar.as_slice()) < 1e-8);
        prop_assert!(rel_err_vec(&post.v_tilde, &oracle.coef_variance()) < 1e-8);
        prop_assert!(rel_err(post.b_bar, oracle.b_bar) < 1e-8);
    }

    #[test]
    fn residual_identity((x, y) in instance(), lambda in 0.01f64..50.0) {
        // ‖y − Xβ̄‖² = yᵀy − Σ c_k (2 s_k − s_k²)
        let beta = direct_ridge(&x, &y, lambda);
        let direct = (&y - &x * &beta).norm_squared();
        let d = design(x, y);
        let s = d.spectrum();
        let shortcut = s.yty()
            - (0..s.q())
                .map(|k| {
                    let c = s.uty(k).powi(2);
                    let sk = s.d_sq()[k] / (s.d_sq()[k] + lambda);
                    c * (2.0 * sk - sk * sk)
                })
                .sum::<f64>();
        prop_assert!((direct - shortcut).abs() <= 1e-8 * direct.max(1e-12) + 1e-12);
        prop_assert!((s.rss(&vec![lambda; s.q()]) - direct).abs() <= 1e-8 * direct.max(1e-12) + 1e-12);
    }

    #[test]
    fn decomposition_is_orthonormal_and_exact((x, y) in instance()) {
        let d = design(x.clone(), y);
        let q = d.q();
        let utu = d.u().tr_mul(d.u());
        let wtw = d.w().tr_mul(d.w());
        prop_assert!((utu - DMatrix::identity(q, q)).amax() < 1e-10);
        prop_assert!((wtw - DMatrix::identity(q, q)).amax() < 1e-10);
        let recon = d.u() * DMatrix::from_diagonal(&DVector::from_column_slice(d.d())) * d.w().transpose();
        prop_assert!((recon - x).amax() < 1e-10);
        prop_assert!(d.d().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn standardize_is_idempotent((x, y) in instance(), ss in any::<bool>()) {
        let mode = if ss { ScaleMode::UnitSumOfSquares } else { ScaleMode::UnitVariance };
        let ds = Dataset::from_matrix(y, x).unwrap();
        prop_assume!(standardize(&ds, mode, true).is_ok());
        let (x1, y1, _) = standardize(&ds, mode, true).unwrap();
        let again = Dataset::from_matrix(y1.clone(), x1.clone()).unwrap();
        let (x2, y2, _) = standardize(&again, mode, true).unwrap();
        prop_assert!((x2 - x1).amax() < 1e-12);
        prop_assert!((y2 - y1).amax() < 1e-12);
    }

    #[test]
    fn family_nesting((x, y) in instance(), lambda in 0.01f64..100.0) {
        let d = design(x, y);
        let q = d.q();
        let rr = log_marginal(&d, &ShrinkageProfile::constant(lambda, q).unwrap(), 0.001, 0.001).unwrap();
        let prr = log_marginal(&d, &lambda_vector(&RidgeSpec::prr(lambda, 0.0), d.d()), 0.001, 0.001).unwrap();
        let grr = log_marginal(&d, &lambda_vector(&RidgeSpec::grr(vec![lambda; q]), d.d()), 0.001, 0.001).unwrap();
        prop_assert_eq!(rr, prr);
        prop_assert_eq!(rr, grr);
    }

    #[test]
    fn b_bar_grows_and_coefficients_shrink((x, y) in instance(), l1 in 0.01f64..10.0, factor in 1.0f64..20.0) {
        let d = design(x, y);
        let q = d.q();
        let lo = posterior_fit(&d, &ShrinkageProfile::constant(l1, q).unwrap(), 0.001, 0.001).unwrap();
        let hi = posterior_fit(&d, &ShrinkageProfile::constant(l1 * factor, q).unwrap(), 0.001, 0.001).unwrap();
        prop_assert!(hi.b_bar >= lo.b_bar * (1.0 - 1e-12));
        for k in 0..q {
            prop_assert!(hi.alpha_bar[k].abs() <= lo.alpha_bar[k].abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn grr_numerator_nonnegative((x, y) in instance()) {
        let d = design(x, y);
        let s = d.spectrum();
        for k in 0..s.q() {
            let num = s.d_sq()[k] * s.yty() - s.d_sq()[k].powi(2) * s.alpha_hat()[k].powi(2);
            prop_assert!(num >= -1e-10 * s.d_sq()[k] * s.yty().max(1.0));
        }
    }

    #[test]
    fn rr_argmax_scales_with_columns((x, y) in instance(), up in any::<bool>()) {
        // scaling X by c scales d² by c², so the grid argmax moves from λ to c² λ
        let c: f64 = if up { 2.0 } else { 0.5 };
        let grid: Vec<f64> = (0..200).map(|i| 0.01 * 1.05f64.powi(i)).collect();
        let argmax = |d: &StandardizedDesign, g: &[f64]| {
            let vals: Vec<f64> = g.iter().map(|l| rr_objective(d, *l).unwrap()).collect();
            (0..g.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b })
        };
        let base = design(x.clone(), y.clone());
        let scaled = design(x * c, y);
        let scaled_grid: Vec<f64> = grid.iter().map(|l| l * c * c).collect();
        prop_assert_eq!(argmax(&base, &grid), argmax(&scaled, &scaled_grid));
    }

    #[test]
    fn grr_closed_form_beats_neighbors(d2 in 0.01f64..50.0, alpha in -5.0f64..5.0, n in 3usize..300, extra in 0.01f64..20.0) {
        let yty = d2 * alpha * alpha + extra;
        let lam = grr_lambda(d2, alpha, yty, n, 1e10);
        prop_assume!(lam < 1e10);
        let phi = |l: f64| -(d2 / l).ln_1p() - n as f64 * (yty - alpha * alpha * d2 * d2 / (l + d2)).ln();
        prop_assert!(phi(lam) >= phi(lam * 1.01) - 1e-12);
        prop_assert!(phi(lam) >= phi(lam / 1.01) - 1e-12);
    }

    #[test]
    fn hat_trace_and_df_identities((x, y) in instance(), lambda in 0.01f64..20.0) {
        let d = design(x, y);
        let post = posterior_fit(&d, &ShrinkageProfile::constant(lambda, d.q()).unwrap(), 0.001, 0.001).unwrap();
        let diag = diagnostics(&post, &d, ResidualKind::Approximate).unwrap();
        let trace: f64 = diag.hat_diag.iter().sum();
        prop_assert!((trace - diag.df).abs() < 1e-8 * diag.df.max(1.0));
        prop_assert!((diag.df_error - (2.0 * diag.df - diag.df_variance)).abs() < 1e-8);
        prop_assert!(diag.df_variance <= diag.df + 1e-12);
        prop_assert!(diag.df <= d.q() as f64 + 1e-12);
    }

    #[test]
    fn g_prior_shrinks_ols((x, y) in instance(), lambda in 0.05f64..10.0) {
        prop_assume!(well_conditioned(&x));
        let ols = direct_ridge(&x, &y, 0.0);
        let d = design(x, y);
        let profile = lambda_vector(&RidgeSpec::prr(lambda, -1.0), d.d());
        let post = posterior_fit(&d, &profile, 0.001, 0.001).unwrap();
        let want: Vec<f64> = ols.iter().map(|b| b / (lambda + 1.0)).collect();
        prop_assert!(rel_err_vec(&post.beta_bar, &want) < 1e-8);
    }

    #[test]
    fn predictive_is_linear_in_x((x, y) in instance(), scale in 0.5f64..3.0) {
        let d = design(x.clone(), y);
        let post = posterior_fit(&d, &ShrinkageProfile::constant(1.0, d.q()).unwrap(), 3.0, 1.0).unwrap();
        let row: Vec<f64> = x.row(0).iter().copied().collect();
        let scaled: Vec<f64> = row.iter().map(|v| v * scale).collect();
        let m1 = predictive(&post, &d, &row).unwrap().mean;
        let m2 = predictive(&post, &d, &scaled).unwrap().mean;
        prop_assert!((m2 - scale * m1).abs() <= 1e-10 * m1.abs().max(1.0));
    }

    #[test]
    fn sn_decreasing_and_symmetric(z in 0.0f64..6.0, step in 0.01f64..1.0, dof in 1.0f64..200.0) {
        let a = scaled_neighborhood(z, dof).unwrap();
        let b = scaled_neighborhood(z + step, dof).unwrap();
        prop_assert!(b < a || (a < 1e-12 && b <= a));
        prop_assert_eq!(a, scaled_neighborhood(-z, dof).unwrap());
    }

    #[test]
    fn auc_complements(scores in prop::collection::hash_set(-1000i32..1000, 4..30), seed in any::<u64>()) {
        let scores: Vec<f64> = scores.into_iter().map(|s| s as f64).collect();
        let labels: Vec<bool> = (0..scores.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
        let up = roc_analysis(&scores, &labels, Orientation::HigherIsSignificant, 0.0).unwrap();
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let down = roc_analysis(&negated, &labels, Orientation::HigherIsSignificant, 0.0).unwrap();
        prop_assert!((up.auc + down.auc - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&up.sensitivity) && (0.0..=1.0).contains(&up.specificity));
    }

    #[test]
    fn student_cdf_monotone_symmetric(t in -50.0f64..50.0, dt in 0.001f64..5.0, dof in 0.5f64..500.0) {
        let a = student::cdf(t, dof).unwrap();
        let b = student::cdf(t + dt, dof).unwrap();
        prop_assert!(b >= a);
        prop_assert!((a + student::cdf(-t, dof).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn back_transform_round_trip((x, y) in instance(), slopes in prop::collection::vec(-5.0f64..5.0, 8)) {
        let ds = Dataset::from_matrix(y, x).unwrap();
        prop_assume!(standardize(&ds, ScaleMode::UnitVariance, true).is_ok());
        let (_, _, st) = standardize(&ds, ScaleMode::UnitVariance, true).unwrap();
        let p = st.p();
        let beta = st.forward_transform(&slopes[..p]).unwrap();
        let back = st.back_transform(&beta).unwrap();
        prop_assert!(rel_err_vec(&back[1..], &slopes[..p]) < 1e-12);
        // predictions agree on the original scale
        let row: Vec<f64> = ds.covariates().row(0).iter().copied().collect();
        let z = st.transform_row(&row).unwrap();
        let std_pred = st.untransform_response(z.iter().zip(&beta).map(|(a, b)| a * b).sum());
        let raw_pred = back[0] + row.iter().zip(&back[1..]).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((std_pred - raw_pred).abs() < 1e-9 * raw_pred.abs().max(1.0));
    }
}

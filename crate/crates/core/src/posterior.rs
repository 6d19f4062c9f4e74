//! Posterior summaries, predictive distributions and diagnostics, all computed
//! through the thin SVD.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::design::StandardizedDesign;
use crate::error::{check_positive, Error, Result};
use crate::ridge::ShrinkageProfile;
use crate::student;

/// Normal-inverse-gamma posterior for a fixed shrinkage profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub alpha_bar: Vec<f64>,
    pub beta_bar: Vec<f64>,
    /// Marginal posterior variances of the coefficients.
    pub v_tilde: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub a_bar: f64,
    pub b_bar: f64,
    pub sigma2_mean: f64,
    /// Undefined (None) when `ā ≤ 2`.
    pub sigma2_var: Option<f64>,
    /// Degrees of freedom `2a + n` of the coefficient marginals.
    pub dof: f64,
    pub lambdas: Vec<f64>,
}

fn check_profile(design: &StandardizedDesign, profile: &ShrinkageProfile) -> Result<()> {
    if profile.len() == design.q() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: design.q(), found: profile.len() })
    }
}

/// `1/(λ_l + d_l²)` per component.
fn inv_precision(design: &StandardizedDesign, lambdas: &[f64]) -> Vec<f64> {
    design.spectrum().d_sq().iter().zip(lambdas).map(|(d2, l)| 1.0 / (l + d2)).collect()
}

pub fn posterior_fit(
    design: &StandardizedDesign,
    profile: &ShrinkageProfile,
    a: f64,
    b: f64,
) -> Result<PosteriorSummary> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_profile(design, profile)?;
    let s = design.spectrum();
    let lambdas = profile.as_slice();
    let alpha_bar: Vec<f64> = (0..s.q())
        .map(|k| {
            let d2 = s.d_sq()[k];
            s.alpha_hat()[k] * d2 / (d2 + lambdas[k])
        })
        .collect();
    let beta_bar = (design.w() * DVector::from_column_slice(&alpha_bar)).iter().copied().collect();

    let n = s.n() as f64;
    let a_bar = a + 0.5 * n;
    let b_bar = b + 0.5 * s.residual_term(lambdas);
    let sigma2_mean = b_bar / (a_bar - 1.0);
    let sigma2_var = (a_bar > 2.0).then(|| b_bar * b_bar / ((a_bar - 1.0).powi(2) * (a_bar - 2.0)));

    let inv = inv_precision(design, lambdas);
    let w = design.w();
    let v_tilde = (0..design.p())
        .map(|k| sigma2_mean * (0..s.q()).map(|l| w[(k, l)].powi(2) * inv[l]).sum::<f64>())
        .collect();

    Ok(PosteriorSummary {
        alpha_bar,
        beta_bar,
        v_tilde,
        a,
        b,
        a_bar,
        b_bar,
        sigma2_mean,
        sigma2_var,
        dof: 2.0 * a + n,
        lambdas: lambdas.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Predictive {
    pub mean: f64,
    pub variance: f64,
    pub dof: f64,
}

/// `Σ_l (xᵀw_l)²/(λ_l + d_l²)`, i.e. `xᵀ V̄ x`.
fn quadratic_form(summary: &PosteriorSummary, design: &StandardizedDesign, x: &[f64]) -> f64 {
    let inv = inv_precision(design, &summary.lambdas);
    let proj = design.w().tr_mul(&DVector::from_column_slice(x));
    proj.iter().zip(&inv).map(|(v, i)| v * v * i).sum()
}

fn check_row(design: &StandardizedDesign, x: &[f64]) -> Result<()> {
    if x.len() == design.p() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: design.p(), found: x.len() })
    }
}

/// Student predictive distribution of a new response at a standardized covariate row.
pub fn predictive(
    summary: &PosteriorSummary,
    design: &StandardizedDesign,
    x_new: &[f64],
) -> Result<Predictive> {
    check_row(design, x_new)?;
    if summary.a_bar <= 2.0 {
        return Err(Error::ShapeTooSmall(summary.a_bar));
    }
    let mean = x_new.iter().zip(&summary.beta_bar).map(|(x, b)| x * b).sum();
    let variance =
        summary.b_bar / (summary.a_bar - 2.0) * (1.0 + quadratic_form(summary, design, x_new));
    Ok(Predictive { mean, variance, dof: summary.a_bar })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// `(y_i − ŷ_i)/σ̄`.
    #[default]
    Approximate,
    /// `(y_i − ŷ_i)/(σ̄ √(1 − h_ii))`.
    LeverageAdjusted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub hat_diag: Vec<f64>,
    pub fitted: Vec<f64>,
    pub std_residuals: Vec<f64>,
    pub df: f64,
    pub df_variance: f64,
    pub df_error: f64,
    pub r_squared: f64,
}

impl Diagnostics {
    /// One row per observation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "fitted", "hat", "std_residual"])?;
        for i in 0..self.hat_diag.len() {
            w.write_record(&[
                i.to_string(),
                self.fitted[i].to_string(),
                self.hat_diag[i].to_string(),
                self.std_residuals[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn diagnostics(
    summary: &PosteriorSummary,
    design: &StandardizedDesign,
    kind: ResidualKind,
) -> Result<Diagnostics> {
    let s = design.spectrum();
    let lambdas = &summary.lambdas;
    if lambdas.len() != s.q() {
        return Err(Error::DimensionMismatch { expected: s.q(), found: lambdas.len() });
    }
    let shrink: Vec<f64> = s.d_sq().iter().zip(lambdas).map(|(d2, l)| d2 / (d2 + l)).collect();
    let u = design.u();
    let hat_diag: Vec<f64> = (0..s.n())
        .map(|i| (0..s.q()).map(|l| u[(i, l)].powi(2) * shrink[l]).sum())
        .collect();
    let z_alpha: Vec<f64> = (0..s.q()).map(|k| s.d()[k] * summary.alpha_bar[k]).collect();
    let fitted_v = u * DVector::from_column_slice(&z_alpha);
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let y = design.y();
    let sigma = summary.sigma2_mean.sqrt();
    let std_residuals = (0..s.n())
        .map(|i| {
            let r = y[i] - fitted[i];
            match kind {
                ResidualKind::Approximate => r / sigma,
                ResidualKind::LeverageAdjusted => r / (sigma * (1.0 - hat_diag[i]).max(0.0).sqrt()),
            }
        })
        .collect();
    let df = s.df(lambdas);
    let df_variance = s.df_variance(lambdas);
    let rss = (y - &fitted_v).norm_squared();
    let y_mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    Ok(Diagnostics {
        hat_diag,
        fitted,
        std_residuals,
        df,
        df_variance,
        df_error: 2.0 * df - df_variance,
        r_squared: 1.0 - rss / tss,
    })
}

/// Approximate change `β̄ − β̄_(i)` in the posterior mean from deleting observation `i`.
pub fn loo_delta_beta(
    summary: &PosteriorSummary,
    design: &StandardizedDesign,
    i: usize,
) -> Result<Vec<f64>> {
    if i >= design.n() {
        return Err(Error::InvalidArgument(format!("row {i} out of range")));
    }
    let s = design.spectrum();
    let inv = inv_precision(design, &summary.lambdas);
    let u = design.u();
    // Wᵀx_i = diag(d) Uᵀe_i
    let scaled: Vec<f64> = (0..s.q()).map(|l| s.d()[l] * u[(i, l)] * inv[l]).collect();
    let h: f64 = (0..s.q()).map(|l| (s.d()[l] * u[(i, l)]).powi(2) * inv[l]).sum();
    if 1.0 - h <= 1e-12 {
        return Err(Error::LeverageOne(i));
    }
    let x_i = design.x().row(i);
    let fitted: f64 = x_i.iter().zip(&summary.beta_bar).map(|(x, b)| x * b).sum();
    let factor = (design.y()[i] - fitted) / (1.0 - h);
    let delta = design.w() * DVector::from_vec(scaled) * factor;
    Ok(delta.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateSignificance {
    pub name: String,
    pub beta_bar: f64,
    pub sd: f64,
    pub ci50: (f64, f64),
    pub ci95: (f64, f64),
    pub sn: f64,
    /// `St(|β̄|/√ṽ)`: larger values are more significant.
    pub ci_score: f64,
    /// `St(β̄/√ṽ)`: the signed version of `ci_score`.
    pub signed_score: f64,
    pub flag_ci50: bool,
    pub flag_ci95: bool,
    pub flag_sn: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub dof: f64,
    pub covariates: Vec<CovariateSignificance>,
}

impl SignificanceReport {
    /// One row per covariate.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "covariate", "beta_bar", "sd", "ci50_lo", "ci50_hi", "ci95_lo", "ci95_hi", "sn",
            "flag_ci50", "flag_ci95", "flag_sn",
        ])?;
        for c in &self.covariates {
            w.write_record(&[
                c.name.clone(),
                c.beta_bar.to_string(),
                c.sd.to_string(),
                c.ci50.0.to_string(),
                c.ci50.1.to_string(),
                c.ci95.0.to_string(),
                c.ci95.1.to_string(),
                c.sn.to_string(),
                c.flag_ci50.to_string(),
                c.flag_ci95.to_string(),
                c.flag_sn.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Posterior probability that a coefficient lies within one posterior
/// standard deviation of zero, given `z = β̄/√ṽ`.
pub fn scaled_neighborhood(z: f64, dof: f64) -> Result<f64> {
    let z = z.abs();
    Ok((student::cdf(1.0 - z, dof)? - student::cdf(-1.0 - z, dof)?).clamp(0.0, 1.0))
}

/// Credible intervals and the scaled-neighborhood criterion for every coefficient.
pub fn significance(summary: &PosteriorSummary, names: Option<&[String]>) -> Result<SignificanceReport> {
    let dof = summary.dof;
    let q75 = student::quantile(0.75, dof)?;
    let q975 = student::quantile(0.975, dof)?;
    let covariates = (0..summary.beta_bar.len())
        .map(|k| {
            let beta = summary.beta_bar[k];
            let sd = summary.v_tilde[k].sqrt();
            if !(sd > 0.0) {
                return Err(Error::Domain(format!("coefficient {k} has zero posterior variance")));
            }
            let z = beta / sd;
            let sn = scaled_neighborhood(z, dof)?;
            let name = names.and_then(|n| n.get(k).cloned()).unwrap_or_else(|| format!("x{}", k + 1));
            Ok(CovariateSignificance {
                name,
                beta_bar: beta,
                sd,
                ci50: (beta - q75 * sd, beta + q75 * sd),
                ci95: (beta - q975 * sd, beta + q975 * sd),
                sn,
                ci_score: student::cdf(z.abs(), dof)?,
                signed_score: student::cdf(z, dof)?,
                flag_ci50: z.abs() > q75,
                flag_ci95: z.abs() > q975,
                flag_sn: sn < 0.5,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SignificanceReport { dof, covariates })
}

/// Predictive probability that the response (coded ±1, centered by `y_offset`) is positive.
pub fn class_probability(
    summary: &PosteriorSummary,
    design: &StandardizedDesign,
    x_new: &[f64],
    y_offset: f64,
) -> Result<f64> {
    let pred = predictive(summary, design, x_new)?;
    student::cdf((pred.mean + y_offset) / pred.variance.sqrt(), pred.dof)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoreticalError {
    pub bias: Vec<f64>,
    pub mse: f64,
}

/// Frequentist bias and mean squared error of the shrinkage estimator when
/// the true canonical coefficients are `alpha_true`.
pub fn theoretical_error(
    profile: &ShrinkageProfile,
    d: &[f64],
    alpha_true: &[f64],
    sigma2: f64,
    w: &DMatrix<f64>,
) -> Result<TheoreticalError> {
    let q = d.len();
    for len in [profile.len(), alpha_true.len(), w.ncols()] {
        if len != q {
            return Err(Error::DimensionMismatch { expected: q, found: len });
        }
    }
    let lambdas = profile.as_slice();
    let mut canonical_bias = Vec::with_capacity(q);
    let mut mse = 0.0;
    for k in 0..q {
        let d2 = d[k] * d[k];
        let l = lambdas[k];
        canonical_bias.push(-l * alpha_true[k] / (d2 + l));
        mse += (d2 * sigma2 + l * l * alpha_true[k].powi(2)) / (d2 + l).powi(2);
    }
    let bias = (w * DVector::from_vec(canonical_bias)).iter().copied().collect();
    Ok(TheoreticalError { bias, mse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Standardization;
    use crate::design::DEFAULT_RANK_TOL;

    fn design() -> StandardizedDesign {
        let x = DMatrix::from_row_slice(
            5,
            2,
            &[1.0, 0.0, 0.0, 1.0, -1.0, 0.5, 0.3, -0.8, -0.3, -0.7],
        );
        let y = DVector::from_row_slice(&[0.9, 0.2, -1.1, 0.4, -0.4]);
        StandardizedDesign::from_standardized(x, y, Standardization::identity(2), DEFAULT_RANK_TOL).unwrap()
    }

    #[test]
    fn half_shrinkage() {
        // single orthonormal column: d = 1
        let x = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, -0.5, -0.5]);
        let y = DVector::from_row_slice(&[1.0, 1.0, -1.0, -1.0]);
        let d = StandardizedDesign::from_standardized(x, y, Standardization::identity(1), DEFAULT_RANK_TOL).unwrap();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(1.0, 1).unwrap(), 1.0, 1.0).unwrap();
        assert!((post.alpha_bar[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn total_shrinkage_limit() {
        let d = design();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(1e10, 2).unwrap(), 0.1, 0.2).unwrap();
        let alpha_norm: f64 = d.alpha_hat().iter().map(|a| a * a).sum::<f64>().sqrt();
        let beta_norm: f64 = post.beta_bar.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(beta_norm <= 1e-8 * alpha_norm);
        assert!((post.b_bar - (0.2 + d.yty() / 2.0)).abs() < 1e-8);
    }

    #[test]
    fn zero_row_predictive() {
        let d = design();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(0.5, 2).unwrap(), 1.0, 1.0).unwrap();
        let p = predictive(&post, &d, &[0.0, 0.0]).unwrap();
        assert_eq!(p.mean, 0.0);
        assert!((p.variance - post.b_bar / (post.a_bar - 2.0)).abs() < 1e-15);
        assert_eq!(p.dof, post.a_bar);
        let p1 = predictive(&post, &d, &[0.3, -0.2]).unwrap();
        let p2 = predictive(&post, &d, &[0.6, -0.4]).unwrap();
        assert!((p2.mean - 2.0 * p1.mean).abs() < 1e-15);
    }

    #[test]
    fn predictive_needs_shape_above_two() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let y = DVector::from_row_slice(&[0.5, -0.2]);
        let d = StandardizedDesign::from_standardized(x, y, Standardization::identity(1), DEFAULT_RANK_TOL).unwrap();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(1.0, 1).unwrap(), 0.5, 1.0).unwrap();
        assert!(matches!(predictive(&post, &d, &[1.0]), Err(Error::ShapeTooSmall(_))));
        assert!(post.sigma2_var.is_none());
    }

    #[test]
    fn df_closed_forms() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let y = DVector::from_row_slice(&[1.0, 0.5, -0.5]);
        let d = StandardizedDesign::from_standardized(x, y, Standardization::identity(1), DEFAULT_RANK_TOL).unwrap();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(1.0, 1).unwrap(), 1.0, 1.0).unwrap();
        let diag = diagnostics(&post, &d, ResidualKind::Approximate).unwrap();
        assert!((diag.df - 0.5).abs() < 1e-15);
        assert!((diag.df_variance - 0.25).abs() < 1e-15);
        assert!((diag.df_error - 0.75).abs() < 1e-15);

        let full = posterior_fit(&design(), &ShrinkageProfile::constant(0.0, 2).unwrap(), 1.0, 1.0).unwrap();
        let diag = diagnostics(&full, &design(), ResidualKind::Approximate).unwrap();
        assert!((diag.df - 2.0).abs() < 1e-14);
    }

    #[test]
    fn loo_zero_cases() {
        let d = design();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(0.7, 2).unwrap(), 1.0, 1.0).unwrap();
        // a row of zeros has no leverage and no influence
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, 0.0, 0.0, -1.0, 0.4]);
        let y = DVector::from_row_slice(&[0.5, 0.3, -0.5]);
        let z = StandardizedDesign::from_standardized(x, y, Standardization::identity(2), DEFAULT_RANK_TOL).unwrap();
        let pz = posterior_fit(&z, &ShrinkageProfile::constant(0.7, 2).unwrap(), 1.0, 1.0).unwrap();
        assert!(loo_delta_beta(&pz, &z, 1).unwrap().iter().all(|v| v.abs() < 1e-14));
        assert!(loo_delta_beta(&post, &d, 9).is_err());
    }

    #[test]
    fn leverage_one_detected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let y = DVector::from_row_slice(&[1.0, 2.0, 0.0]);
        let d = StandardizedDesign::from_standardized(x, y, Standardization::identity(2), DEFAULT_RANK_TOL).unwrap();
        let post = posterior_fit(&d, &ShrinkageProfile::constant(0.0, 2).unwrap(), 1.0, 1.0).unwrap();
        assert!(matches!(loo_delta_beta(&post, &d, 0), Err(Error::LeverageOne(0))));
    }

    #[test]
    fn sn_properties() {
        let sn0 = scaled_neighborhood(0.0, 12.0).unwrap();
        assert!((sn0 - (2.0 * student::cdf(1.0, 12.0).unwrap() - 1.0)).abs() < 1e-15);
        assert!(sn0 > 0.5);
        assert!((scaled_neighborhood(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(scaled_neighborhood(1e6, 10.0).unwrap() < 1e-12);
        assert_eq!(scaled_neighborhood(-2.3, 7.0).unwrap(), scaled_neighborhood(2.3, 7.0).unwrap());
    }

    #[test]
    fn intervals_symmetric_for_zero_mean() {
        let post = PosteriorSummary {
            alpha_bar: vec![0.0],
            beta_bar: vec![0.0],
            v_tilde: vec![4.0],
            a: 1.0,
            b: 1.0,
            a_bar: 6.0,
            b_bar: 2.0,
            sigma2_mean: 0.4,
            sigma2_var: None,
            dof: 12.0,
            lambdas: vec![1.0],
        };
        let rep = significance(&post, None).unwrap();
        let c = &rep.covariates[0];
        assert!((c.ci50.0 + c.ci50.1).abs() < 1e-15);
        assert!(c.ci95.0 < c.ci50.0 && c.ci50.1 < c.ci95.1);
        assert!(!c.flag_sn && !c.flag_ci50 && !c.flag_ci95);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn theoretical_error_cases() {
        let w = DMatrix::identity(1, 1);
        let one = ShrinkageProfile::constant(1.0, 1).unwrap();
        let te = theoretical_error(&one, &[1.0], &[1.0], 1.0, &w).unwrap();
        assert!((te.mse - 0.5).abs() < 1e-15);
        assert!((te.bias[0] + 0.5).abs() < 1e-15);

        let w2 = DMatrix::identity(2, 2);
        let zero = ShrinkageProfile::constant(0.0, 2).unwrap();
        let ols = theoretical_error(&zero, &[2.0, 0.5], &[1.0, -1.0], 3.0, &w2).unwrap();
        assert!(ols.bias.iter().all(|b| *b == 0.0));
        assert!((ols.mse - 3.0 * (0.25 + 4.0)).abs() < 1e-12);
        let big = ShrinkageProfile::constant(1e12, 2).unwrap();
        let null = theoretical_error(&big, &[2.0, 0.5], &[1.0, -1.0], 3.0, &w2).unwrap();
        assert!((null.mse - 2.0).abs() < 1e-9);
    }
}

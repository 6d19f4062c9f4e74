use serde::Serialize;

use crate::design::{AsSpectrum, StandardizedDesign};
use crate::error::{Error, Result};
use crate::ridge::DEFAULT_LAMBDA_MAX;

/// Plug-in estimate `p σ̂² / β̂ᵀβ̂` from the OLS fit.
pub fn hkb_classic(design: &StandardizedDesign) -> Result<f64> {
    let s = design.spectrum();
    let (n, p) = (design.n(), design.p());
    if s.q() < p || n <= p {
        return Err(Error::SingularDesign);
    }
    let sigma2 = s.ortho_ss() / (n - p) as f64;
    let beta_sq: f64 = s.alpha_hat().iter().map(|a| a * a).sum();
    Ok(if beta_sq > 0.0 { (p as f64 * sigma2 / beta_sq).min(DEFAULT_LAMBDA_MAX) } else { DEFAULT_LAMBDA_MAX })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HkbExtended {
    pub lambda: f64,
    /// Number of principal components retained.
    pub r: usize,
    /// `|r − Σ_k d_k⁴/(d_k² + λ_r)²|` for `r = 1, 2, …`.
    pub criterion: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Plug-in estimate based on a principal-components fit whose size `r` best
/// matches the degrees of freedom for variance it implies.
pub fn hkb_extended(design: &impl AsSpectrum) -> Result<HkbExtended> {
    let s = design.as_spectrum();
    let r_max = s.q().min(s.n().saturating_sub(1));
    if r_max == 0 {
        return Err(Error::TooFewRows { needed: 2, found: s.n() });
    }
    let c2: Vec<f64> = (0..s.q()).map(|k| s.uty(k).powi(2)).collect();
    let mut lambdas = Vec::with_capacity(r_max);
    let mut criterion = Vec::with_capacity(r_max);
    let mut alpha_sq = 0.0;
    for r in 1..=r_max {
        alpha_sq += s.alpha_hat()[r - 1].powi(2);
        let resid = s.ortho_ss() + c2[r..].iter().sum::<f64>();
        let sigma2 = resid / (s.n() - r) as f64;
        let lambda = if alpha_sq > 0.0 {
            (r as f64 * sigma2 / alpha_sq).min(DEFAULT_LAMBDA_MAX)
        } else {
            DEFAULT_LAMBDA_MAX
        };
        let df_var = s.df_variance(&vec![lambda; s.q()]);
        lambdas.push(lambda);
        criterion.push((r as f64 - df_var).abs());
    }
    let best = (0..r_max).fold(0, |b, i| if criterion[i] < criterion[b] { i } else { b });
    Ok(HkbExtended { lambda: lambdas[best], r: best + 1, criterion, lambdas })
}

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::design::StandardizedDesign;
use crate::error::{check_positive, Error, Result};
use crate::rng::{stream_rng, GIBBS_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaPrior {
    /// `λ ~ Gamma(shape, rate)`.
    Gamma { shape: f64, rate: f64 },
    /// `λ` held at a known value.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsConfig {
    pub a: f64,
    pub b: f64,
    pub lambda_prior: LambdaPrior,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Number of batches used for the batch-means Monte Carlo standard errors.
    pub batches: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            a: 0.001,
            b: 0.001,
            lambda_prior: LambdaPrior::Gamma { shape: 0.001, rate: 0.001 },
            iterations: 110_000,
            burn_in: 10_000,
            seed: 0,
            batches: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsResult {
    pub beta_mean: Vec<f64>,
    pub beta_var: Vec<f64>,
    /// Batch-means Monte Carlo standard errors of `beta_mean`.
    pub beta_mcse: Vec<f64>,
    pub sigma2_mean: f64,
    pub lambda_mean: f64,
    pub sigma2_draws: Vec<f64>,
    pub lambda_draws: Vec<f64>,
    pub log_joint: Vec<f64>,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Gibbs sampler for ridge regression with a gamma prior on λ.
///
/// Each sweep draws σ² from its conditional with the coefficients integrated
/// out, then the canonical coefficients given σ², then λ given β and σ².
pub fn gibbs_rr(design: &StandardizedDesign, config: &GibbsConfig) -> Result<GibbsResult> {
    check_positive("a", config.a)?;
    check_positive("b", config.b)?;
    let mut lambda = match config.lambda_prior {
        LambdaPrior::Gamma { shape, rate } => {
            check_positive("a_lambda", shape)?;
            check_positive("b_lambda", rate)?;
            1.0
        }
        LambdaPrior::Fixed(l) => {
            check_positive("lambda", l)?;
            l
        }
    };
    if config.iterations <= config.burn_in {
        return Err(Error::InvalidArgument("iterations must exceed burn_in".into()));
    }
    let s = design.spectrum();
    let (n, p, q) = (s.n(), design.p(), s.q());
    let a_bar = config.a + 0.5 * n as f64;
    let kept = config.iterations - config.burn_in;
    let batches = config.batches.clamp(1, kept);
    let batch_len = kept / batches;

    let mut rng = stream_rng(config.seed, GIBBS_STREAM);
    let null_dim = p - q;
    let chi_null = (null_dim > 0).then(|| ChiSquared::new(null_dim as f64).expect("positive dof"));

    let mut alpha = DVector::zeros(q);
    let mut sum = vec![0.0; p];
    let mut sum_sq = vec![0.0; p];
    let mut batch_sum = vec![vec![0.0; p]; batches];
    let mut sigma2_draws = Vec::with_capacity(kept);
    let mut lambda_draws = Vec::with_capacity(kept);
    let mut log_joint = Vec::with_capacity(kept);

    for it in 0..config.iterations {
        let lambdas = vec![lambda; q];
        let b_bar = config.b + 0.5 * s.residual_term(&lambdas);
        let precision: f64 = Gamma::new(a_bar, 1.0 / b_bar)
            .map_err(|e| Error::NumericalFailure(e.to_string()))?
            .sample(&mut rng);
        let sigma2 = 1.0 / precision;

        for k in 0..q {
            let d2 = s.d_sq()[k];
            let mean = s.alpha_hat()[k] * d2 / (d2 + lambda);
            let z: f64 = rng.sample(StandardNormal);
            alpha[k] = mean + z * (sigma2 / (lambda + d2)).sqrt();
        }
        let beta = design.w() * &alpha;
        let alpha_sq = alpha.norm_squared();
        // the part of β outside the row space of X is never informed by the data
        let null_sq = chi_null.as_ref().map_or(0.0, |c| c.sample(&mut rng) * sigma2 / lambda);
        let beta_sq = alpha_sq + null_sq;

        if let LambdaPrior::Gamma { shape, rate } = config.lambda_prior {
            let post_shape = shape + 0.5 * p as f64;
            let post_rate = rate + beta_sq / (2.0 * sigma2);
            lambda = Gamma::new(post_shape, 1.0 / post_rate)
                .map_err(|e| Error::NumericalFailure(e.to_string()))?
                .sample(&mut rng)
                .max(f64::MIN_POSITIVE);
        }

        if it >= config.burn_in {
            let idx = it - config.burn_in;
            let batch = (idx / batch_len.max(1)).min(batches - 1);
            for j in 0..p {
                sum[j] += beta[j];
                sum_sq[j] += beta[j] * beta[j];
                batch_sum[batch][j] += beta[j];
            }
            sigma2_draws.push(sigma2);
            lambda_draws.push(lambda);

            let resid: f64 = s.ortho_ss()
                + (0..q).map(|k| (s.uty(k) - s.d()[k] * alpha[k]).powi(2)).sum::<f64>();
            let mut lj = -0.5 * n as f64 * (2.0 * PI * sigma2).ln() - resid / (2.0 * sigma2)
                - 0.5 * p as f64 * (2.0 * PI * sigma2 / lambda).ln()
                - lambda * beta_sq / (2.0 * sigma2)
                + config.a * config.b.ln()
                - ln_gamma(config.a)
                - (config.a + 1.0) * sigma2.ln()
                - config.b / sigma2;
            if let LambdaPrior::Gamma { shape, rate } = config.lambda_prior {
                lj += shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * lambda.ln() - rate * lambda;
            }
            log_joint.push(lj);
        }
    }

    let m = kept as f64;
    let beta_mean: Vec<f64> = sum.iter().map(|v| v / m).collect();
    let beta_var: Vec<f64> = (0..p)
        .map(|j| (sum_sq[j] / m - beta_mean[j].powi(2)).max(0.0) * m / (m - 1.0).max(1.0))
        .collect();
    let beta_mcse = batch_mcse(&batch_sum, &beta_mean, kept, batches, batch_len);
    Ok(GibbsResult {
        beta_mean,
        beta_var,
        beta_mcse,
        sigma2_mean: sigma2_draws.iter().sum::<f64>() / m,
        lambda_mean: lambda_draws.iter().sum::<f64>() / m,
        sigma2_draws,
        lambda_draws,
        log_joint,
        iterations: config.iterations,
        burn_in: config.burn_in,
        seed: config.seed,
    })
}

fn batch_mcse(
    batch_sum: &[Vec<f64>],
    mean: &[f64],
    kept: usize,
    batches: usize,
    batch_len: usize,
) -> Vec<f64> {
    if batches < 2 {
        return vec![f64::INFINITY; mean.len()];
    }
    // the last batch absorbs the remainder
    let sizes: Vec<f64> = (0..batches)
        .map(|b| if b + 1 < batches { batch_len } else { kept - batch_len * (batches - 1) } as f64)
        .collect();
    (0..mean.len())
        .map(|j| {
            let var: f64 = (0..batches)
                .map(|b| sizes[b] * (batch_sum[b][j] / sizes[b] - mean[j]).powi(2))
                .sum::<f64>()
                / (batches - 1) as f64;
            (var / kept as f64).sqrt()
        })
        .collect()
}

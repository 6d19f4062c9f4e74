//! Marginal likelihood of the ridge family and its maximizers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::design::{AsSpectrum, Spectrum};
use crate::error::{check_positive, Error, Result};
use crate::optimize::{fminbnd, DEFAULT_MAX_EVALS, DEFAULT_XATOL};

pub const DEFAULT_LAMBDA_MAX: f64 = 1e10;
pub const DEFAULT_A: f64 = 0.001;
pub const DEFAULT_B: f64 = 0.001;

/// Grid stride of the first search phase.
const GRID_STEP: f64 = 0.25;
/// Beyond this value the grid doubles instead of stepping linearly.
const LINEAR_LIMIT: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Rr { lambda: f64 },
    Prr { lambda: f64, delta: f64 },
    Grr { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rr,
    Prr,
    Grr,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Rr, Model::Prr, Model::Grr];

    pub fn name(self) -> &'static str {
        match self {
            Model::Rr => "RR",
            Model::Prr => "PRR",
            Model::Grr => "GRR",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rr" => Ok(Model::Rr),
            "prr" => Ok(Model::Prr),
            "grr" => Ok(Model::Grr),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// A member of the ridge family together with its inverse-gamma hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeSpec {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub lambda_max: f64,
}

impl RidgeSpec {
    pub fn new(family: Family) -> Self {
        RidgeSpec { family, a: DEFAULT_A, b: DEFAULT_B, lambda_max: DEFAULT_LAMBDA_MAX }
    }

    pub fn rr(lambda: f64) -> Self {
        RidgeSpec::new(Family::Rr { lambda })
    }

    pub fn prr(lambda: f64, delta: f64) -> Self {
        RidgeSpec::new(Family::Prr { lambda, delta })
    }

    pub fn grr(lambdas: Vec<f64>) -> Self {
        RidgeSpec::new(Family::Grr { lambdas })
    }

    pub fn with_hyper(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn model(&self) -> Model {
        match self.family {
            Family::Rr { .. } => Model::Rr,
            Family::Prr { .. } => Model::Prr,
            Family::Grr { .. } => Model::Grr,
        }
    }

    pub fn profile(&self, d: &[f64]) -> ShrinkageProfile {
        lambda_vector(self, d)
    }
}

/// Per-component shrinkage values `λ_1, …, λ_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageProfile {
    lambdas: Vec<f64>,
}

impl ShrinkageProfile {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("empty shrinkage profile".into()));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!("shrinkage value {l} is not in [0, inf)")));
        }
        Ok(ShrinkageProfile { lambdas })
    }

    pub fn constant(lambda: f64, q: usize) -> Result<Self> {
        ShrinkageProfile::new(vec![lambda; q])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maps a family member to its per-component shrinkage values.
///
/// Power ridge uses `λ_k = λ / (d_k²)^δ`: δ = 0 is ordinary ridge and
/// δ = −1 reproduces the g-prior.
pub fn lambda_vector(spec: &RidgeSpec, d: &[f64]) -> ShrinkageProfile {
    let clamp = |l: f64| if l.is_nan() { spec.lambda_max } else { l.clamp(0.0, spec.lambda_max) };
    let lambdas = match &spec.family {
        Family::Rr { lambda } => vec![clamp(*lambda); d.len()],
        Family::Prr { lambda, delta } => {
            d.iter().map(|dk| clamp(prr_component(*lambda, *delta, dk * dk))).collect()
        }
        Family::Grr { lambdas } => lambdas.iter().map(|l| clamp(*l)).collect(),
    };
    ShrinkageProfile { lambdas }
}

fn prr_component(lambda: f64, delta: f64, d_sq: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * (-delta * d_sq.ln()).exp()
    }
}

fn check_len(spectrum: &Spectrum, lambdas: &[f64]) -> Result<()> {
    if lambdas.len() == spectrum.q() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: spectrum.q(), found: lambdas.len() })
    }
}

/// `Σ_k [log λ_k − log(λ_k + d_k²)]`, or `-inf` if some `λ_k = 0`.
fn log_det_ratio(spectrum: &Spectrum, lambdas: &[f64]) -> f64 {
    let mut total = 0.0;
    for (l, d2) in lambdas.iter().zip(spectrum.d_sq()) {
        if *l <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total -= (d2 / l).ln_1p();
    }
    total
}

/// Log marginal likelihood of the data under the normal-inverse-gamma prior
/// with per-component shrinkage `profile`.
pub fn log_marginal(
    design: &impl AsSpectrum,
    profile: &ShrinkageProfile,
    a: f64,
    b: f64,
) -> Result<f64> {
    let s = design.as_spectrum();
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_len(s, profile.as_slice())?;
    let det = log_det_ratio(s, profile.as_slice());
    if det == f64::NEG_INFINITY {
        return Ok(det);
    }
    let n = s.n() as f64;
    let a_bar = a + 0.5 * n;
    let b_bar = b + 0.5 * s.residual_term(profile.as_slice());
    Ok(0.5 * det + a * b.ln() - a_bar * b_bar.ln() + ln_gamma(a_bar) - ln_gamma(a)
        - 0.5 * n * PI.ln())
}

/// `Σ_k [log λ_k − log(λ_k + d_k²)] − n log(yᵀy − Σ_k α̂_k² d_k⁴/(λ_k + d_k²))`:
/// twice the log marginal likelihood as `a, b → 0`, up to a constant.
pub fn reduced_objective(design: &impl AsSpectrum, profile: &ShrinkageProfile) -> Result<f64> {
    let s = design.as_spectrum();
    check_len(s, profile.as_slice())?;
    let det = log_det_ratio(s, profile.as_slice());
    if det == f64::NEG_INFINITY {
        return Ok(det);
    }
    let resid = s.residual_term(profile.as_slice());
    if !(resid > 0.0) {
        return Err(Error::DegenerateFit);
    }
    Ok(det - s.n() as f64 * resid.ln())
}

/// Reduced objective of ordinary ridge at a single λ.
pub fn rr_objective(design: &impl AsSpectrum, lambda: f64) -> Result<f64> {
    let s = design.as_spectrum();
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    reduced_objective(s, &ShrinkageProfile { lambdas: vec![lambda; s.q()] })
}

/// Reduced objective of power ridge at `(λ, δ)`.
pub fn prr_objective(design: &impl AsSpectrum, lambda: f64, delta: f64, lambda_max: f64) -> Result<f64> {
    let s = design.as_spectrum();
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be non-negative, got {lambda}")));
    }
    let spec = RidgeSpec { lambda_max, ..RidgeSpec::prr(lambda, delta) };
    reduced_objective(s, &lambda_vector(&spec, s.d()))
}

/// The component-`k` term of the separable generalized ridge objective.
pub fn grr_phi(design: &impl AsSpectrum, k: usize, lambda: f64) -> f64 {
    let s = design.as_spectrum();
    let d2 = s.d_sq()[k];
    let a2 = s.alpha_hat()[k].powi(2);
    let resid = s.yty() - a2 * d2 * d2 / (lambda + d2);
    -(d2 / lambda).ln_1p() - s.n() as f64 * resid.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    /// The objective was still increasing at `lambda_max`.
    NoBracket,
    /// The outer coordinate-ascent loop hit its cycle limit.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmlFit {
    pub spec: RidgeSpec,
    pub log_ml: f64,
    pub objective_evals: usize,
    pub converged: bool,
    pub status: FitStatus,
}

impl MmlFit {
    pub fn profile(&self, design: &impl AsSpectrum) -> ShrinkageProfile {
        lambda_vector(&self.spec, design.as_spectrum().d())
    }

    pub fn model(&self) -> Model {
        self.spec.model()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MmlOptions {
    /// Hyperparameters used to report the log marginal likelihood.
    pub a: f64,
    pub b: f64,
    pub lambda_max: f64,
    pub xatol: f64,
    pub delta_bounds: (f64, f64),
    pub delta_bounds_wide: (f64, f64),
    pub max_outer: usize,
    /// Stop the coordinate ascent once a cycle raises the log marginal likelihood by less than this.
    pub tol: f64,
}

impl Default for MmlOptions {
    fn default() -> Self {
        MmlOptions {
            a: DEFAULT_A,
            b: DEFAULT_B,
            lambda_max: DEFAULT_LAMBDA_MAX,
            xatol: DEFAULT_XATOL,
            delta_bounds: (-3.0, 3.0),
            delta_bounds_wide: (-10.0, 10.0),
            max_outer: 100,
            tol: 1e-4,
        }
    }
}

/// Fallback hyperparameter used when the reduced objective degenerates.
const FALLBACK_B: f64 = 0.001;

struct LineSearch {
    lambda: f64,
    value: f64,
    evals: usize,
    bracketed: bool,
}

/// Maximizes `f` over `λ ∈ (0, lambda_max]`: a grid of stride 1/4 (doubling
/// past 1000) until the first decrease, then bounded minimization on the
/// bracket around the best grid point.
fn search_lambda<F>(mut f: F, lambda_max: f64, xatol: f64) -> Result<LineSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evals = 0;
    let mut eval = |l: f64, evals: &mut usize| {
        *evals += 1;
        f(l)
    };
    let mut prev2 = 0.0f64;
    let mut prev = 0.0f64;
    let mut prev_val = f64::NEG_INFINITY;
    let mut k = 1u64;
    let bracket = loop {
        let lambda = if k as f64 * GRID_STEP <= LINEAR_LIMIT {
            k as f64 * GRID_STEP
        } else {
            (prev * 2.0).min(lambda_max)
        };
        let lambda = lambda.min(lambda_max);
        let val = eval(lambda, &mut evals)?;
        if val < prev_val {
            break Some((prev2, lambda));
        }
        if lambda >= lambda_max {
            break None;
        }
        prev2 = prev;
        prev = lambda;
        prev_val = val;
        k += 1;
    };
    let Some((lo, hi)) = bracket else {
        let value = eval(lambda_max, &mut evals)?;
        return Ok(LineSearch { lambda: lambda_max, value, evals, bracketed: false });
    };

    let mut failure = None;
    let m = fminbnd(
        |l| match eval(l, &mut evals) {
            Ok(v) => -v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        xatol,
        DEFAULT_MAX_EVALS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (lambda, value) = if -m.fx >= prev_val { (m.x, -m.fx) } else { (prev, prev_val) };
    Ok(LineSearch { lambda, value, evals, bracketed: true })
}

/// Runs `search` on the reduced objective, retrying with the full log
/// marginal likelihood (`b = 0.001`) if the reduced objective degenerates.
fn with_fallback<T>(search: impl Fn(bool) -> Result<T>) -> Result<T> {
    match search(false) {
        Err(Error::DegenerateFit) => search(true),
        other => other,
    }
}

fn profile_objective(s: &Spectrum, spec: &RidgeSpec, full: bool) -> Result<f64> {
    let profile = lambda_vector(spec, s.d());
    if full {
        Ok(2.0 * log_marginal(s, &profile, DEFAULT_A, FALLBACK_B)?)
    } else {
        reduced_objective(s, &profile)
    }
}

fn check_options(opts: &MmlOptions) -> Result<()> {
    check_positive("a", opts.a)?;
    check_positive("b", opts.b)?;
    check_positive("lambda_max", opts.lambda_max)?;
    Ok(())
}

/// Marginal maximum likelihood estimate of the ordinary ridge parameter.
pub fn estimate_rr(design: &impl AsSpectrum, opts: &MmlOptions) -> Result<MmlFit> {
    let s = design.as_spectrum();
    check_options(opts)?;
    let base = RidgeSpec { a: opts.a, b: opts.b, lambda_max: opts.lambda_max, ..RidgeSpec::rr(0.0) };
    let search = with_fallback(|full| {
        search_lambda(
            |l| {
                let spec = RidgeSpec { family: Family::Rr { lambda: l }, ..base.clone() };
                profile_objective(s, &spec, full)
            },
            opts.lambda_max,
            opts.xatol,
        )
    })?;
    let spec = RidgeSpec { family: Family::Rr { lambda: search.lambda }, ..base };
    let log_ml = log_marginal(s, &lambda_vector(&spec, s.d()), opts.a, opts.b)?;
    let status = if search.bracketed { FitStatus::Converged } else { FitStatus::NoBracket };
    Ok(MmlFit {
        spec,
        log_ml,
        objective_evals: search.evals,
        converged: status == FitStatus::Converged,
        status,
    })
}

/// Marginal maximum likelihood estimate of `(λ, δ)` for power ridge by
/// alternating a λ line search and a bounded δ search.
pub fn estimate_prr(design: &impl AsSpectrum, opts: &MmlOptions) -> Result<MmlFit> {
    let s = design.as_spectrum();
    check_options(opts)?;
    with_fallback(|full| prr_ascent(s, opts, full))
}

fn prr_ascent(s: &Spectrum, opts: &MmlOptions, full: bool) -> Result<MmlFit> {
    let base = RidgeSpec { a: opts.a, b: opts.b, lambda_max: opts.lambda_max, ..RidgeSpec::prr(0.0, 0.0) };
    let objective = |lambda: f64, delta: f64| {
        let spec = RidgeSpec { family: Family::Prr { lambda, delta }, ..base.clone() };
        profile_objective(s, &spec, full)
    };
    let mut evals = 0;
    let mut delta = 0.0;
    let first = search_lambda(|l| objective(l, delta), opts.lambda_max, opts.xatol)?;
    evals += first.evals;
    let mut lambda = first.lambda;
    let mut value = first.value;
    let mut bracketed = first.bracketed;
    let mut bounds = opts.delta_bounds;
    let mut widened = false;
    let mut status = FitStatus::MaxIterations;

    for _ in 0..opts.max_outer {
        let start = value;

        let (new_delta, delta_val) = loop {
            let mut failure = None;
            let m = fminbnd(
                |dl| match objective(lambda, dl) {
                    Ok(v) => -v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                bounds.0,
                bounds.1,
                opts.xatol,
                DEFAULT_MAX_EVALS,
            );
            evals += m.evals;
            if let Some(e) = failure {
                return Err(e);
            }
            let edge = 1e-3 * (bounds.1 - bounds.0);
            let on_boundary = m.x - bounds.0 < edge || bounds.1 - m.x < edge;
            if on_boundary && !widened {
                widened = true;
                bounds = opts.delta_bounds_wide;
                continue;
            }
            break (m.x, -m.fx);
        };
        if delta_val > value {
            delta = new_delta;
            value = delta_val;
        }

        let line = search_lambda(|l| objective(l, delta), opts.lambda_max, opts.xatol)?;
        evals += line.evals;
        if line.value > value {
            lambda = line.lambda;
            value = line.value;
            bracketed = line.bracketed;
        }

        // the objective is twice the log marginal likelihood
        if 0.5 * (value - start) < opts.tol {
            status = FitStatus::Converged;
            break;
        }
    }
    if !bracketed {
        status = FitStatus::NoBracket;
    }
    let spec = RidgeSpec { family: Family::Prr { lambda, delta }, ..base };
    let log_ml = log_marginal(s, &lambda_vector(&spec, s.d()), opts.a, opts.b)?;
    Ok(MmlFit {
        spec,
        log_ml,
        objective_evals: evals,
        converged: status == FitStatus::Converged,
        status,
    })
}

/// Closed-form componentwise maximizer of the separable generalized ridge objective.
pub fn grr_lambda(d_sq: f64, alpha_hat: f64, yty: f64, n: usize, lambda_max: f64) -> f64 {
    let a2 = alpha_hat * alpha_hat;
    let num = d_sq * yty - d_sq * d_sq * a2;
    let den = d_sq * n as f64 * a2 - yty;
    if den > 0.0 && num > 0.0 {
        (num / den).min(lambda_max)
    } else {
        lambda_max
    }
}

/// Marginal maximum likelihood estimate of the generalized ridge parameters.
pub fn estimate_grr(design: &impl AsSpectrum, opts: &MmlOptions) -> Result<MmlFit> {
    let s = design.as_spectrum();
    check_options(opts)?;
    let lambdas: Vec<f64> = (0..s.q())
        .map(|k| grr_lambda(s.d_sq()[k], s.alpha_hat()[k], s.yty(), s.n(), opts.lambda_max))
        .collect();
    let spec = RidgeSpec { a: opts.a, b: opts.b, lambda_max: opts.lambda_max, ..RidgeSpec::grr(lambdas) };
    let log_ml = log_marginal(s, &lambda_vector(&spec, s.d()), opts.a, opts.b)?;
    Ok(MmlFit {
        spec,
        log_ml,
        objective_evals: s.q(),
        converged: true,
        status: FitStatus::Converged,
    })
}

pub fn estimate(model: Model, design: &impl AsSpectrum, opts: &MmlOptions) -> Result<MmlFit> {
    match model {
        Model::Rr => estimate_rr(design, opts),
        Model::Prr => estimate_prr(design, opts),
        Model::Grr => estimate_grr(design, opts),
    }
}

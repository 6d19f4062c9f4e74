use rayon::prelude::*;
use serde::Serialize;

use super::{check_grid, CriterionName, SelectionTrace};
use crate::design::{AsSpectrum, Spectrum};
use crate::error::{Error, Result};

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidArgument(format!("bad grid {start}..{stop} by {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn is_saturated(s: &Spectrum, df: f64) -> bool {
    (s.n() as f64 - df).abs() <= 1e-12 * s.n() as f64
}

/// Generalized cross-validation score at `λ`, or `None` when `df_λ = n`.
pub fn gcv_value(design: &impl AsSpectrum, lambda: f64) -> Option<f64> {
    let s = design.as_spectrum();
    let lambdas = vec![lambda; s.q()];
    let df = s.df(&lambdas);
    if is_saturated(s, df) {
        return None;
    }
    let n = s.n() as f64;
    Some(s.rss(&lambdas) / (n * (1.0 - df / n).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InformationCriterion {
    Bic,
    Aic,
}

/// `(RSS_λ + penalty · df_λ)/n` with penalty `log n` (BIC) or 2 (AIC).
pub fn ic_value(design: &impl AsSpectrum, criterion: InformationCriterion, lambda: f64) -> f64 {
    let s = design.as_spectrum();
    let lambdas = vec![lambda; s.q()];
    let n = s.n() as f64;
    let penalty = match criterion {
        InformationCriterion::Bic => n.ln(),
        InformationCriterion::Aic => 2.0,
    };
    (s.rss(&lambdas) + penalty * s.df(&lambdas)) / n
}

pub fn gcv_select(design: &impl AsSpectrum, grid: &[f64]) -> Result<SelectionTrace> {
    check_grid(grid)?;
    let s = design.as_spectrum();
    let values: Vec<Option<f64>> = grid.par_iter().map(|l| gcv_value(s, *l)).collect();
    let (kept, crit): (Vec<f64>, Vec<f64>) =
        grid.iter().zip(values).filter_map(|(l, v)| v.map(|v| (*l, v))).unzip();
    if kept.is_empty() {
        return Err(Error::EmptyGrid);
    }
    SelectionTrace::from_values(CriterionName::Gcv, kept, crit, None)
}

pub fn ic_select(
    design: &impl AsSpectrum,
    criterion: InformationCriterion,
    grid: &[f64],
) -> Result<SelectionTrace> {
    check_grid(grid)?;
    let s = design.as_spectrum();
    let values: Vec<f64> = grid.par_iter().map(|l| ic_value(s, criterion, *l)).collect();
    let name = match criterion {
        InformationCriterion::Bic => CriterionName::Bic,
        InformationCriterion::Aic => CriterionName::Aic,
    };
    SelectionTrace::from_values(name, grid.to_vec(), values, None)
}

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{CriterionName, SelectionTrace};
use crate::design::{canonical_ols, decompose, Spectrum, StandardizedDesign, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::ridge::ShrinkageProfile;
use crate::rng::{stream_rng, FOLD_STREAM};

/// A partition of the row indices into test folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folds {
    groups: Vec<Vec<usize>>,
    n: usize,
}

impl Folds {
    /// Shuffles `0..n` with the fold stream of `seed` and cuts it into `k`
    /// contiguous near-equal folds (`k` is capped at `n`).
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, found: n });
        }
        let k = k.clamp(2, n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream_rng(seed, FOLD_STREAM));
        let (base, extra) = (n / k, n % k);
        let mut groups = Vec::with_capacity(k);
        let mut start = 0;
        for f in 0..k {
            let size = base + usize::from(f < extra);
            groups.push(order[start..start + size].to_vec());
            start += size;
        }
        Ok(Folds { groups, n })
    }

    /// Uses an explicit partition of `0..n`.
    pub fn from_groups(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in groups.iter().flatten() {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument("folds must partition the rows".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) || groups.len() < 2 || groups.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument("folds must partition the rows".into()));
        }
        Ok(Folds { groups, n })
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    /// Pooled mean squared prediction error per setting.
    pub cv: Vec<f64>,
    /// Standard error of `cv` from the spread of the per-fold errors.
    pub se: Vec<f64>,
    /// `fold_mse[k][j]`: mean squared error of fold `k` under setting `j`.
    pub fold_mse: Vec<Vec<f64>>,
}

struct FoldFit {
    spectrum: Spectrum,
    w: DMatrix<f64>,
    x_means: DVector<f64>,
    y_mean: f64,
}

fn fit_fold(x: &DMatrix<f64>, y: &DVector<f64>, train: &[usize]) -> Result<FoldFit> {
    let p = x.ncols();
    let mut xt = x.select_rows(train);
    let mut yt = DVector::from_iterator(train.len(), train.iter().map(|&i| y[i]));
    let x_means = DVector::from_iterator(p, (0..p).map(|j| xt.column(j).mean()));
    let y_mean = yt.mean();
    for j in 0..p {
        xt.column_mut(j).add_scalar_mut(-x_means[j]);
    }
    yt.add_scalar_mut(-y_mean);
    let svd = decompose(&xt, DEFAULT_RANK_TOL)?;
    let alpha = canonical_ols(&svd.u, &svd.d, &yt)?;
    let ortho = (&yt - &svd.u * svd.u.tr_mul(&yt)).norm_squared();
    let spectrum = Spectrum::with_residual(train.len(), svd.d, alpha, yt.norm_squared(), ortho)?;
    Ok(FoldFit { spectrum, w: svd.w, x_means, y_mean })
}

/// K-fold cross-validated prediction error of every setting. Each training
/// fold is re-centered and re-decomposed; `profile_for` maps a setting to a
/// shrinkage profile on that fold's spectrum.
pub fn cross_validate<S, F>(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    folds: &Folds,
    settings: &[S],
    profile_for: F,
) -> Result<CvResult>
where
    S: Sync,
    F: Fn(&Spectrum, &S) -> Result<ShrinkageProfile> + Sync,
{
    if x.nrows() != y.len() || folds.n() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: folds.n() });
    }
    if settings.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = y.len();
    let sse: Vec<Vec<f64>> = folds
        .groups()
        .par_iter()
        .map(|test| {
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            if train.len() < 2 {
                return Err(Error::TooFewRows { needed: 2, found: train.len() });
            }
            let fit = fit_fold(x, y, &train)?;
            let s = &fit.spectrum;
            let x_test = DMatrix::from_fn(test.len(), x.ncols(), |r, j| x[(test[r], j)] - fit.x_means[j]);
            settings
                .iter()
                .map(|setting| {
                    let profile = profile_for(s, setting)?;
                    let alpha_bar = DVector::from_iterator(
                        s.q(),
                        (0..s.q()).map(|k| {
                            let d2 = s.d_sq()[k];
                            s.alpha_hat()[k] * d2 / (d2 + profile.as_slice()[k])
                        }),
                    );
                    let beta = &fit.w * alpha_bar;
                    let pred = &x_test * beta;
                    Ok(test
                        .iter()
                        .enumerate()
                        .map(|(r, &i)| (y[i] - fit.y_mean - pred[r]).powi(2))
                        .sum::<f64>())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let k = folds.k() as f64;
    let fold_mse: Vec<Vec<f64>> = sse
        .iter()
        .zip(folds.groups())
        .map(|(row, g)| row.iter().map(|v| v / g.len() as f64).collect())
        .collect();
    let mut cv = Vec::with_capacity(settings.len());
    let mut se = Vec::with_capacity(settings.len());
    for j in 0..settings.len() {
        cv.push(sse.iter().map(|row| row[j]).sum::<f64>() / n as f64);
        let mean = fold_mse.iter().map(|row| row[j]).sum::<f64>() / k;
        let var = fold_mse.iter().map(|row| (row[j] - mean).powi(2)).sum::<f64>() / (k - 1.0);
        se.push((var / k).sqrt());
    }
    Ok(CvResult { cv, se, fold_mse })
}

fn max_abs_beta(design: &StandardizedDesign, lambda: f64) -> f64 {
    let s = design.spectrum();
    let alpha = DVector::from_iterator(
        s.q(),
        (0..s.q()).map(|k| s.alpha_hat()[k] * s.d_sq()[k] / (s.d_sq()[k] + lambda)),
    );
    (design.w() * alpha).amax()
}

/// Smallest power of ten at which every ridge coefficient is below `1e-4`
/// times the largest least-squares coefficient.
pub fn cv_lambda_max(design: &StandardizedDesign) -> f64 {
    let reference = max_abs_beta(design, 0.0);
    (-3..=15)
        .map(|e| 10f64.powi(e))
        .find(|&l| max_abs_beta(design, l) < 1e-4 * reference)
        .unwrap_or(1e15)
}

/// Ridge parameter chosen by K-fold cross-validation (K = 10, or n when n < 10)
/// over `λ = 0` plus `n_grid` log-spaced values in `[1e-4 λ_max, λ_max]`.
pub fn cv10_select(design: &StandardizedDesign, n_grid: usize, seed: u64) -> Result<SelectionTrace> {
    if n_grid == 0 {
        return Err(Error::EmptyGrid);
    }
    let folds = Folds::random(design.n(), 10, seed)?;
    let lambda_max = cv_lambda_max(design);
    let lo = (1e-4 * lambda_max).ln();
    let hi = lambda_max.ln();
    let mut grid = vec![0.0];
    grid.extend((0..n_grid).map(|i| {
        let t = if n_grid == 1 { 1.0 } else { i as f64 / (n_grid - 1) as f64 };
        (lo + t * (hi - lo)).exp()
    }));
    let result = cross_validate(design.x(), design.y(), &folds, &grid, |s, l| {
        ShrinkageProfile::constant(*l, s.q())
    })?;
    SelectionTrace::from_values(CriterionName::Cv10, grid, result.cv, Some(result.se))
}

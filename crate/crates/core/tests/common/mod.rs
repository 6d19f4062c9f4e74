//! Dense-matrix reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use ridge_mml::rng::StreamRng;

pub fn normal_matrix(rng: &mut StreamRng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn normal_vector(rng: &mut StreamRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Eigenvectors of `XᵀX` ordered by decreasing eigenvalue.
pub fn gram_eigenvectors(x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = x.tr_mul(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(x.ncols(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Prior precision `Σ_k λ_k w_k w_kᵀ` on the principal axes of `XᵀX`.
pub fn prior_precision(x: &DMatrix<f64>, lambdas: &[f64]) -> DMatrix<f64> {
    let (_, w) = gram_eigenvectors(x);
    &w * DMatrix::from_diagonal(&DVector::from_column_slice(lambdas)) * w.transpose()
}

/// Normal-inverse-gamma update with prior mean zero, computed with explicit
/// inverses and determinants.
pub struct DenseNig {
    pub v_bar: DMatrix<f64>,
    pub beta_bar: DVector<f64>,
    pub a_bar: f64,
    pub b_bar: f64,
    pub log_ml: f64,
    pub hat: DMatrix<f64>,
}

impl DenseNig {
    pub fn new(x: &DMatrix<f64>, y: &DVector<f64>, precision: &DMatrix<f64>, a: f64, b: f64) -> Self {
        let n = x.nrows() as f64;
        let v = precision.clone().try_inverse().expect("prior precision invertible");
        let v_bar_inv = precision + x.tr_mul(x);
        let v_bar = v_bar_inv.clone().try_inverse().expect("posterior precision invertible");
        let beta_bar = &v_bar * x.tr_mul(y);
        let a_bar = a + n / 2.0;
        let b_bar = b + (y.dot(y) - (beta_bar.transpose() * &v_bar_inv * &beta_bar)[(0, 0)]) / 2.0;
        let log_ml = 0.5 * v_bar.determinant().ln() - 0.5 * v.determinant().ln() + a * b.ln()
            - a_bar * b_bar.ln()
            + ln_gamma(a_bar)
            - ln_gamma(a)
            - n / 2.0 * std::f64::consts::PI.ln();
        let hat = x * &v_bar * x.transpose();
        DenseNig { v_bar, beta_bar, a_bar, b_bar, log_ml, hat }
    }

    /// Marginal posterior variances of the coefficients.
    pub fn coef_variance(&self) -> Vec<f64> {
        let s2 = self.b_bar / (self.a_bar - 1.0);
        (0..self.v_bar.nrows()).map(|i| s2 * self.v_bar[(i, i)]).collect()
    }

    pub fn predictive_variance(&self, x_new: &DVector<f64>) -> f64 {
        let quad = (x_new.transpose() * &self.v_bar * x_new)[(0, 0)];
        self.b_bar / (self.a_bar - 2.0) * (1.0 + quad)
    }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Largest absolute difference relative to the largest reference entry.
pub fn rel_err_vec(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max) / scale
}

/// Ridge coefficients by solving `(XᵀX + λI) β = Xᵀy` directly.
pub fn direct_ridge(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let p = x.ncols();
    let a = x.tr_mul(x) + DMatrix::identity(p, p) * lambda;
    a.lu().solve(&x.tr_mul(y)).expect("ridge system solvable")
}

/// Rises then falls: exactly one sign change in successive differences,
/// ignoring steps below `noise`.
pub fn is_unimodal(values: &[f64], noise: f64) -> bool {
    let signs: Vec<i8> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| d.abs() > noise)
        .map(|d| if d > 0.0 { 1 } else { -1 })
        .collect();
    let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
    changes == 1 && signs[0] > 0
}

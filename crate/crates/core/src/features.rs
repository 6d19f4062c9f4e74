//! Polynomial and cubic-spline basis expansions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Expansion {
    /// Linear terms, squares, and all distinct pairwise products.
    Quadratic,
    /// Appends `‖x − κ_i‖³` for each knot `κ_i`; the knots default to the rows of the input.
    CubicSpline { knots: Option<DMatrix<f64>> },
}

pub fn expand_features(x0: &DMatrix<f64>, kind: &Expansion) -> Result<DMatrix<f64>> {
    match kind {
        Expansion::Quadratic => Ok(quadratic(x0)),
        Expansion::CubicSpline { knots } => cubic_spline(x0, knots.as_ref().unwrap_or(x0)),
    }
}

/// Column names matching [`expand_features`] output.
pub fn expanded_names(names: &[String], kind: &Expansion) -> Vec<String> {
    match kind {
        Expansion::Quadratic => {
            let mut out: Vec<String> = names.to_vec();
            out.extend(names.iter().map(|n| format!("{n}^2")));
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    out.push(format!("{}:{}", names[i], names[j]));
                }
            }
            out
        }
        Expansion::CubicSpline { knots } => {
            let m = knots.as_ref().map_or(0, |k| k.nrows());
            let mut out: Vec<String> = names.to_vec();
            out.extend((1..=m).map(|i| format!("spline{i}")));
            out
        }
    }
}

fn quadratic(x0: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p0) = x0.shape();
    let p = 2 * p0 + p0 * (p0.saturating_sub(1)) / 2;
    let mut out = DMatrix::zeros(n, p);
    for j in 0..p0 {
        out.set_column(j, &x0.column(j));
        out.set_column(p0 + j, &x0.column(j).map(|v| v * v));
    }
    let mut col = 2 * p0;
    for i in 0..p0 {
        for j in i + 1..p0 {
            out.set_column(col, &x0.column(i).component_mul(&x0.column(j)));
            col += 1;
        }
    }
    out
}

fn cubic_spline(x0: &DMatrix<f64>, knots: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p0) = x0.shape();
    if knots.ncols() != p0 {
        return Err(Error::DimensionMismatch { expected: p0, found: knots.ncols() });
    }
    let m = knots.nrows();
    let mut out = DMatrix::zeros(n, p0 + m);
    out.columns_mut(0, p0).copy_from(x0);
    for i in 0..m {
        for r in 0..n {
            let dist2: f64 = (0..p0).map(|j| (x0[(r, j)] - knots[(i, j)]).powi(2)).sum();
            out[(r, p0 + i)] = dist2.sqrt().powi(3);
        }
    }
    Ok(out)
}

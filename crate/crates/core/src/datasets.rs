//! Small public datasets bundled with the crate.

use crate::data::{read_csv, standardize, ColumnSelector, CsvOptions, Dataset, ScaleMode};
use crate::error::Result;
use crate::features::{expand_features, expanded_names, Expansion};

pub const IRIS_CSV: &str = include_str!("../data/iris.csv");
pub const DIABETES_CSV: &str = include_str!("../data/diabetes.csv");

/// Fisher's iris measurements: sepal length regressed on the other three measurements.
pub fn iris() -> Dataset {
    read_csv(IRIS_CSV.as_bytes(), &CsvOptions::new(ColumnSelector::Name("sepal_length".into())))
        .expect("bundled iris data is valid")
}

/// Diabetes progression with the ten raw baseline covariates.
pub fn diabetes() -> Dataset {
    read_csv(DIABETES_CSV.as_bytes(), &CsvOptions::new(ColumnSelector::Name("progression".into())))
        .expect("bundled diabetes data is valid")
}

/// Diabetes with 65 covariates: the standardized baseline covariates, their
/// squares, and their pairwise interactions.
pub fn diabetes_quadratic() -> Result<Dataset> {
    let base = diabetes();
    let (z, _, _) = standardize(&base, ScaleMode::UnitVariance, false)?;
    let x = expand_features(&z, &Expansion::Quadratic)?;
    let names = expanded_names(base.covariate_names(), &Expansion::Quadratic);
    base.with_covariates(x, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let iris = iris();
        assert_eq!((iris.n(), iris.p()), (150, 3));
        let diabetes = diabetes();
        assert_eq!((diabetes.n(), diabetes.p()), (442, 10));
        let quad = diabetes_quadratic().unwrap();
        assert_eq!(quad.p(), 65);
        assert_eq!(quad.covariate_names()[10], "age^2");
    }
}

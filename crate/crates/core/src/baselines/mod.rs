//! Competing shrinkage selectors and a Gibbs sampler for the fully Bayesian ridge model.

mod criteria;
mod cv;
mod gibbs;
mod hkb;

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

pub use criteria::{gcv_select, gcv_value, ic_select, ic_value, linear_grid, InformationCriterion};
pub use cv::{cross_validate, cv10_select, cv_lambda_max, CvResult, Folds};
pub use gibbs::{gibbs_rr, GibbsConfig, GibbsResult, LambdaPrior};
pub use hkb::{hkb_classic, hkb_extended, HkbExtended};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionName {
    #[serde(rename = "GCV")]
    Gcv,
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "AIC")]
    Aic,
    #[serde(rename = "CV10")]
    Cv10,
}

impl fmt::Display for CriterionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionName::Gcv => "GCV",
            CriterionName::Bic => "BIC",
            CriterionName::Aic => "AIC",
            CriterionName::Cv10 => "CV10",
        })
    }
}

/// Criterion values over a grid of trial shrinkage values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub criterion_name: CriterionName,
    pub grid: Vec<f64>,
    pub criterion: Vec<f64>,
    pub se: Option<Vec<f64>>,
    pub chosen: f64,
}

impl SelectionTrace {
    fn from_values(
        criterion_name: CriterionName,
        grid: Vec<f64>,
        criterion: Vec<f64>,
        se: Option<Vec<f64>>,
    ) -> Result<Self> {
        let best = criterion
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                Some((_, b)) if b <= *v => best,
                _ => Some((i, *v)),
            })
            .ok_or(Error::EmptyGrid)?;
        Ok(SelectionTrace { criterion_name, chosen: grid[best.0], grid, criterion, se })
    }

    /// Index of the chosen grid point.
    pub fn chosen_index(&self) -> usize {
        self.grid.iter().position(|g| *g == self.chosen).unwrap_or(0)
    }

    /// Writes `lambda,criterion[,se]` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let name = self.criterion_name.to_string();
        match &self.se {
            Some(_) => w.write_record(["lambda", name.as_str(), "se"])?,
            None => w.write_record(["lambda", name.as_str()])?,
        }
        for (i, (g, c)) in self.grid.iter().zip(&self.criterion).enumerate() {
            match &self.se {
                Some(se) => w.write_record(&[g.to_string(), c.to_string(), se[i].to_string()])?,
                None => w.write_record(&[g.to_string(), c.to_string()])?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument("grid values must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

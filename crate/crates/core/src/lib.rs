//! Fast marginal maximum likelihood estimation of ridge shrinkage parameters.
//!
//! Everything works from the thin SVD `X = U diag(d) Wᵀ` of the standardized
//! design, so no p×p inverse or determinant is ever formed.

pub mod baselines;
pub mod data;
pub mod datasets;
pub mod design;
pub mod error;
pub mod features;
pub mod optimize;
pub mod posterior;
pub mod ridge;
pub mod rng;
pub mod simulation;
pub mod student;

pub use data::{back_transform, read_csv, read_csv_path, standardize, ColumnSelector, CsvOptions, Dataset, ScaleMode, Standardization};
pub use design::{canonical_ols, decompose, AsSpectrum, DesignOptions, Spectrum, StandardizedDesign, ThinSvd};
pub use error::{Error, Result};
pub use ridge::{
    estimate, estimate_grr, estimate_prr, estimate_rr, grr_phi, lambda_vector, log_marginal,
    prr_objective, rr_objective, Family, FitStatus, MmlFit, MmlOptions, Model, RidgeSpec,
    ShrinkageProfile,
};
pub use posterior::{
    class_probability, diagnostics, loo_delta_beta, posterior_fit, predictive, significance,
    theoretical_error, Diagnostics, PosteriorSummary, Predictive, ResidualKind, SignificanceReport,
};
pub use simulation::{
    published_template, roc_analysis, run_study, simulate_dataset, CiScore, Criterion, Orientation, RocResult,
    SimulationTemplate, StudyConfig, StudyTable,
};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;

//! Simulation study: dataset-shaped templates, significance scoring and ROC summaries.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{standardize, Dataset, ScaleMode};
use crate::datasets;
use crate::design::{StandardizedDesign, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::features::{expand_features, Expansion};
use crate::posterior::{posterior_fit, significance};
use crate::ridge::{estimate, MmlOptions, Model};
use crate::rng::{simulation_stream, stream_rng, StreamRng};

/// Diagonal constant added to every template covariance.
pub const COVARIANCE_JITTER: f64 = 0.001;

#[derive(Debug, Clone)]
pub enum Covariance {
    /// Lower Cholesky factor of a dense covariance.
    Dense(DMatrix<f64>),
    /// Unit variances, common correlation `rho`, plus the jitter.
    Equicorrelated { rho: f64 },
}

#[derive(Debug, Clone)]
pub struct SimulationTemplate {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub covariance: Covariance,
    pub sigma2: f64,
    pub zero_proportion: f64,
    pub seed: u64,
    /// True when the covariance is a stand-in rather than estimated from data.
    pub surrogate: bool,
}

impl SimulationTemplate {
    /// Template with covariance `S + 0.001 I` for a symmetric matrix `S`.
    pub fn dense(name: &str, n: usize, cov: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        let p = cov.nrows();
        if cov.ncols() != p {
            return Err(Error::DimensionMismatch { expected: p, found: cov.ncols() });
        }
        let jittered = cov + DMatrix::identity(p, p) * COVARIANCE_JITTER;
        let chol = jittered.cholesky().ok_or(Error::CovarianceNotPositiveDefinite)?;
        Ok(SimulationTemplate {
            name: name.to_string(),
            n,
            p,
            covariance: Covariance::Dense(chol.l()),
            sigma2,
            zero_proportion: 0.25,
            seed: 0,
            surrogate: false,
        })
    }

    /// Template whose covariance is `XᵀX/n + 0.001 I` for the standardized covariates of `dataset`.
    pub fn from_dataset(name: &str, dataset: &Dataset, sigma2: f64) -> Result<Self> {
        let (x, _, _) = standardize(dataset, ScaleMode::UnitVariance, false)?;
        SimulationTemplate::from_matrix(name, &x, sigma2)
    }

    fn from_matrix(name: &str, x: &DMatrix<f64>, sigma2: f64) -> Result<Self> {
        let n = x.nrows();
        let cov = x.tr_mul(x) / n as f64;
        SimulationTemplate::dense(name, n, cov, sigma2)
    }

    pub fn equicorrelated(name: &str, n: usize, p: usize, rho: f64, sigma2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) || p == 0 || n < 2 {
            return Err(Error::InvalidArgument(format!("bad equicorrelated template rho={rho}")));
        }
        Ok(SimulationTemplate {
            name: name.to_string(),
            n,
            p,
            covariance: Covariance::Equicorrelated { rho },
            sigma2,
            zero_proportion: 0.25,
            seed: 0,
            surrogate: true,
        })
    }

    pub fn with_zero_proportion(mut self, zero_proportion: f64) -> Self {
        self.zero_proportion = zero_proportion;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) {
            return Err(Error::NonPositiveHyperparameter { name: "sigma2", value: self.sigma2 });
        }
        if !(0.0..=1.0).contains(&self.zero_proportion) {
            return Err(Error::InvalidArgument("zero proportion must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Draws `n` covariate rows.
    pub fn sample_covariates(&self, rng: &mut impl RngCore) -> DMatrix<f64> {
        let z = DMatrix::from_fn(self.n, self.p, |_, _| rng.sample::<f64, _>(StandardNormal));
        match &self.covariance {
            Covariance::Dense(l) => z * l.transpose(),
            Covariance::Equicorrelated { rho } => {
                let common = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let own = (1.0 - rho + COVARIANCE_JITTER).sqrt();
                let shared = rho.sqrt();
                DMatrix::from_fn(self.n, self.p, |i, j| shared * common[i] + own * z[(i, j)])
            }
        }
    }
}

/// Error variances of the ten published benchmark conditions.
pub const PUBLISHED_SIGMA2: [(&str, usize, usize, f64); 10] = [
    ("Iris", 150, 3, 0.15),
    ("Teacher", 347, 349, 3e-13),
    ("DiabetesQ", 442, 65, 0.48),
    ("DiabetesS", 442, 507, 0.49),
    ("Meaning", 20994, 113, 0.87),
    ("Blog", 52397, 2520, 0.62),
    ("Wheat", 24, 6, 0.03),
    ("Yarn", 28, 268, 3.8e-8),
    ("Lymphoma", 77, 7129, 4.1e-10),
    ("Cancer", 253, 15154, 1.3e-9),
];

/// Correlation used for templates whose data are not bundled.
pub const SURROGATE_RHO: f64 = 0.3;

/// Template for a published condition: built from bundled data when
/// available, otherwise an equicorrelated surrogate of the same shape.
pub fn published_template(name: &str) -> Result<SimulationTemplate> {
    let &(label, n, p, sigma2) = PUBLISHED_SIGMA2
        .iter()
        .find(|(label, ..)| label.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::InvalidArgument(format!("unknown template {name:?}")))?;
    match label {
        "Iris" => SimulationTemplate::from_dataset(label, &datasets::iris(), sigma2),
        "DiabetesQ" => SimulationTemplate::from_dataset(label, &datasets::diabetes_quadratic()?, sigma2),
        "DiabetesS" => {
            let (z, _, _) = standardize(&datasets::diabetes(), ScaleMode::UnitVariance, false)?;
            let quad = expand_features(&z, &Expansion::Quadratic)?;
            let spline = expand_features(&z, &Expansion::CubicSpline { knots: None })?;
            let splines = spline.columns(z.ncols(), spline.ncols() - z.ncols());
            let mut x = DMatrix::zeros(z.nrows(), quad.ncols() + splines.ncols());
            x.columns_mut(0, quad.ncols()).copy_from(&quad);
            x.columns_mut(quad.ncols(), splines.ncols()).copy_from(&splines);
            let ds = Dataset::from_matrix(DVector::zeros(z.nrows()), x)?;
            SimulationTemplate::from_dataset(label, &ds, sigma2)
        }
        _ => SimulationTemplate::equicorrelated(label, n, p, SURROGATE_RHO, sigma2),
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta: Vec<f64>,
}

/// Coefficients `β_k ~ N(0, 1)` with `round(zero_proportion · p)` of them
/// set to zero at random positions.
pub fn draw_beta(p: usize, zero_proportion: f64, rng: &mut impl RngCore) -> Vec<f64> {
    let mut beta: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let zeros = ((zero_proportion * p as f64).round() as usize).min(p);
    for i in sample(rng, p, zeros) {
        beta[i] = 0.0;
    }
    beta
}

/// The coefficient vector shared by every replication of a template.
pub fn condition_beta(template: &SimulationTemplate) -> Vec<f64> {
    let mut rng = stream_rng(template.seed, simulation_stream(0, None));
    draw_beta(template.p, template.zero_proportion, &mut rng)
}

/// Simulates replication `replication` of a template.
pub fn simulate_dataset(template: &SimulationTemplate, replication: usize) -> Result<SimulatedData> {
    template.validate()?;
    let beta = condition_beta(template);
    let mut rng: StreamRng = stream_rng(template.seed, simulation_stream(0, Some(replication)));
    let x = template.sample_covariates(&mut rng);
    let sigma = template.sigma2.sqrt();
    let noise = DVector::from_fn(template.n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    let y = &x * DVector::from_column_slice(&beta) + noise;
    Ok(SimulatedData { x, y, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Larger scores indicate a nonzero coefficient.
    HigherIsSignificant,
    /// Smaller scores indicate a nonzero coefficient.
    LowerIsSignificant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocResult {
    pub auc: f64,
    /// Fraction of truly zero coefficients not flagged.
    pub sensitivity: f64,
    /// Fraction of truly nonzero coefficients flagged.
    pub specificity: f64,
    pub threshold_rule: String,
}

/// Area under the ROC curve (Mann–Whitney with midranks) with nonzero
/// coefficients as positives, plus sensitivity and specificity at `threshold`.
pub fn roc_analysis(
    scores: &[f64],
    is_zero: &[bool],
    orientation: Orientation,
    threshold: f64,
) -> Result<RocResult> {
    if scores.len() != is_zero.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), found: is_zero.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let n_neg = is_zero.iter().filter(|z| **z).count();
    let n_pos = is_zero.len() - n_neg;
    if n_neg == 0 || n_pos == 0 {
        return Err(Error::DegenerateLabels);
    }
    let oriented: Vec<f64> = match orientation {
        Orientation::HigherIsSignificant => scores.to_vec(),
        Orientation::LowerIsSignificant => scores.iter().map(|s| -s).collect(),
    };
    let ranks = midranks(&oriented);
    let pos_rank_sum: f64 = ranks.iter().zip(is_zero).filter(|(_, z)| !**z).map(|(r, _)| r).sum();
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let auc = (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);

    let flagged = |s: f64| match orientation {
        Orientation::HigherIsSignificant => s > threshold,
        Orientation::LowerIsSignificant => s < threshold,
    };
    let zero_kept = scores.iter().zip(is_zero).filter(|(s, z)| **z && !flagged(**s)).count();
    let nonzero_flagged = scores.iter().zip(is_zero).filter(|(s, z)| !**z && flagged(**s)).count();
    let rule = match orientation {
        Orientation::HigherIsSignificant => format!("score > {threshold}"),
        Orientation::LowerIsSignificant => format!("score < {threshold}"),
    };
    Ok(RocResult {
        auc,
        sensitivity: zero_kept as f64 / nn,
        specificity: nonzero_flagged as f64 / np,
        threshold_rule: rule,
    })
}

/// Sensitivity and specificity of explicit significance flags.
pub fn flag_rates(flags: &[bool], is_zero: &[bool]) -> (f64, f64) {
    let zeros = is_zero.iter().filter(|z| **z).count();
    let nonzeros = is_zero.len() - zeros;
    let kept = flags.iter().zip(is_zero).filter(|(f, z)| **z && !**f).count();
    let hit = flags.iter().zip(is_zero).filter(|(f, z)| !**z && **f).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(kept, zeros), ratio(hit, nonzeros))
}

/// 1-based ranks with ties given their average rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Criterion {
    #[serde(rename = "CI50")]
    Ci50,
    #[serde(rename = "CI95")]
    Ci95,
    #[serde(rename = "SN")]
    Sn,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Ci50, Criterion::Ci95, Criterion::Sn];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Ci50 => "CI50",
            Criterion::Ci95 => "CI95",
            Criterion::Sn => "SN",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Criterion::Ci50 | Criterion::Ci95 => Orientation::HigherIsSignificant,
            Criterion::Sn => Orientation::LowerIsSignificant,
        }
    }

    /// Native decision threshold on the criterion's score.
    pub fn threshold(self) -> f64 {
        match self {
            Criterion::Ci50 => 0.75,
            Criterion::Ci95 => 0.975,
            Criterion::Sn => 0.5,
        }
    }
}

/// Score ranked by the interval criteria in the ROC analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiScore {
    /// `St(|β̄|/√ṽ)`.
    #[default]
    Absolute,
    /// `St(β̄/√ṽ)`.
    Signed,
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub replications: usize,
    pub models: Vec<Model>,
    pub criteria: Vec<Criterion>,
    pub seed: u64,
    pub options: MmlOptions,
    pub ci_score: CiScore,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            replications: 50,
            models: Model::ALL.to_vec(),
            criteria: Criterion::ALL.to_vec(),
            seed: 0,
            options: MmlOptions::default(),
            ci_score: CiScore::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub condition: String,
    pub zero_proportion: f64,
    pub replication: usize,
    pub model: Model,
    pub criterion: Criterion,
    pub roc: RocResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(values: &[f64]) -> MeanSd {
        let m = values.len() as f64;
        if values.is_empty() {
            return MeanSd { mean: 0.0, sd: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / m;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

impl std::fmt::Display for MeanSd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ({:.2})", self.mean, self.sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub condition: String,
    pub surrogate: bool,
    pub zero_proportion: f64,
    pub model: Model,
    pub criterion: Criterion,
    pub auc: MeanSd,
    pub sensitivity: MeanSd,
    pub specificity: MeanSd,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub replications: Vec<ReplicationRecord>,
}

impl StudyTable {
    pub fn row(&self, condition: &str, zero_proportion: f64, model: Model, criterion: Criterion) -> Option<&StudyRow> {
        self.rows.iter().find(|r| {
            r.condition == condition
                && r.zero_proportion == zero_proportion
                && r.model == model
                && r.criterion == criterion
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "condition", "surrogate", "zero_proportion", "model", "criterion", "auc_mean", "auc_sd",
            "sensitivity_mean", "sensitivity_sd", "specificity_mean", "specificity_sd", "completed",
            "failed",
        ])?;
        for r in &self.rows {
            w.write_record(&[
                r.condition.clone(),
                r.surrogate.to_string(),
                r.zero_proportion.to_string(),
                r.model.to_string(),
                r.criterion.name().to_string(),
                r.auc.mean.to_string(),
                r.auc.sd.to_string(),
                r.sensitivity.mean.to_string(),
                r.sensitivity.sd.to_string(),
                r.specificity.mean.to_string(),
                r.specificity.sd.to_string(),
                r.completed.to_string(),
                r.failed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seed of condition `index` derived from the study seed.
fn condition_seed(study_seed: u64, index: usize) -> u64 {
    stream_rng(study_seed, simulation_stream(index, None)).next_u64()
}

/// Fits every model to one replication and scores every criterion.
fn score_replication(
    template: &SimulationTemplate,
    replication: usize,
    config: &StudyConfig,
) -> Result<Vec<(Model, Criterion, RocResult)>> {
    let data = simulate_dataset(template, replication)?;
    let ds = Dataset::from_matrix(data.y.clone(), data.x)?;
    let (x, y, st) = standardize(&ds, ScaleMode::UnitVariance, false)?;
    let design = StandardizedDesign::from_standardized(x, y, st, DEFAULT_RANK_TOL)?;
    let is_zero: Vec<bool> = data.beta.iter().map(|b| *b == 0.0).collect();
    let mut out = Vec::new();
    for &model in &config.models {
        let fit = estimate(model, &design, &config.options)?;
        let post = posterior_fit(&design, &fit.profile(&design), config.options.a, config.options.b)?;
        let report = significance(&post, None)?;
        for &criterion in &config.criteria {
            let scores: Vec<f64> = report
                .covariates
                .iter()
                .map(|c| match criterion {
                    Criterion::Ci50 | Criterion::Ci95 => match config.ci_score {
                        CiScore::Signed => c.signed_score,
                        CiScore::Absolute => c.ci_score,
                    },
                    Criterion::Sn => c.sn,
                })
                .collect();
            let flags: Vec<bool> = report
                .covariates
                .iter()
                .map(|c| match criterion {
                    Criterion::Ci50 => c.flag_ci50,
                    Criterion::Ci95 => c.flag_ci95,
                    Criterion::Sn => c.flag_sn,
                })
                .collect();
            let mut roc = roc_analysis(&scores, &is_zero, criterion.orientation(), criterion.threshold())?;
            (roc.sensitivity, roc.specificity) = flag_rates(&flags, &is_zero);
            out.push((model, criterion, roc));
        }
    }
    Ok(out)
}

/// Runs every template for `config.replications` replications in parallel
/// and summarizes the ROC statistics per (condition, model, criterion).
pub fn run_study(templates: &[SimulationTemplate], config: &StudyConfig) -> Result<StudyTable> {
    if templates.is_empty() {
        return Err(Error::InvalidArgument("no simulation templates".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (index, template) in templates.iter().enumerate() {
        template.validate()?;
        let template = template.clone().with_seed(condition_seed(config.seed, index));
        let results: Vec<Result<Vec<(Model, Criterion, RocResult)>>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| score_replication(&template, rep, config))
            .collect();
        let failed = results.iter().filter(|r| r.is_err()).count();
        for &model in &config.models {
            for &criterion in &config.criteria {
                let rocs: Vec<&RocResult> = results
                    .iter()
                    .filter_map(|r| r.as_ref().ok())
                    .flat_map(|v| v.iter())
                    .filter(|(m, c, _)| *m == model && *c == criterion)
                    .map(|(_, _, roc)| roc)
                    .collect();
                let pick = |f: fn(&RocResult) -> f64| MeanSd::of(&rocs.iter().map(|r| f(r)).collect::<Vec<_>>());
                rows.push(StudyRow {
                    condition: template.name.clone(),
                    surrogate: template.surrogate,
                    zero_proportion: template.zero_proportion,
                    model,
                    criterion,
                    auc: pick(|r| r.auc),
                    sensitivity: pick(|r| r.sensitivity),
                    specificity: pick(|r| r.specificity),
                    completed: rocs.len(),
                    failed,
                });
            }
        }
        for (rep, result) in results.into_iter().enumerate() {
            for (model, criterion, roc) in result.into_iter().flatten() {
                records.push(ReplicationRecord {
                    condition: template.name.clone(),
                    zero_proportion: template.zero_proportion,
                    replication: rep,
                    model,
                    criterion,
                    roc,
                });
            }
        }
    }
    Ok(StudyTable { rows, replications: records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation_and_ties() {
        let is_zero = [true, true, false, false, false];
        let perfect = roc_analysis(&[0.1, 0.2, 0.8, 0.9, 0.95], &is_zero, Orientation::HigherIsSignificant, 0.5).unwrap();
        assert_eq!(perfect.auc, 1.0);
        assert_eq!(perfect.sensitivity, 1.0);
        assert_eq!(perfect.specificity, 1.0);
        let flat = roc_analysis(&[0.3; 5], &is_zero, Orientation::HigherIsSignificant, 0.5).unwrap();
        assert_eq!(flat.auc, 0.5);
        let reversed = roc_analysis(&[0.1, 0.2, 0.8, 0.9, 0.95], &is_zero, Orientation::LowerIsSignificant, 0.5).unwrap();
        assert_eq!(reversed.auc, 0.0);
    }

    #[test]
    fn pairwise_oracle() {
        let scores = [0.4, 0.7, 0.4, 0.1, 0.9, 0.7];
        let is_zero = [true, false, false, true, false, true];
        let roc = roc_analysis(&scores, &is_zero, Orientation::HigherIsSignificant, 0.5).unwrap();
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                if !is_zero[i] && is_zero[j] {
                    pairs += 1.0;
                    wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        assert_eq!(roc.auc, wins / pairs);
    }

    #[test]
    fn degenerate_labels() {
        assert!(matches!(
            roc_analysis(&[0.1, 0.2], &[false, false], Orientation::HigherIsSignificant, 0.5),
            Err(Error::DegenerateLabels)
        ));
    }

    #[test]
    fn beta_zero_count() {
        let mut rng = stream_rng(3, 0);
        let b = draw_beta(12, 0.75, &mut rng);
        assert_eq!(b.iter().filter(|v| **v == 0.0).count(), 9);
        let b = draw_beta(3, 0.25, &mut rng);
        assert_eq!(b.iter().filter(|v| **v == 0.0).count(), 1);
    }

    #[test]
    fn iris_template() {
        let t = published_template("iris").unwrap();
        assert_eq!((t.n, t.p, t.sigma2), (150, 3, 0.15));
        assert!(!t.surrogate);
        assert!(published_template("cancer").unwrap().surrogate);
        assert!(published_template("nope").is_err());
    }

    #[test]
    fn minimal_study() {
        let t = published_template("iris").unwrap();
        let cfg = StudyConfig { replications: 1, ..Default::default() };
        let table = run_study(&[t], &cfg).unwrap();
        assert_eq!(table.rows.len(), 9);
        assert!(table.rows.iter().all(|r| r.completed == 1));
    }

    #[test]
    fn same_beta_across_replications() {
        let t = published_template("iris").unwrap().with_seed(5);
        let a = simulate_dataset(&t, 0).unwrap();
        let b = simulate_dataset(&t, 1).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_ne!(a.y, b.y);
        assert_eq!(simulate_dataset(&t, 1).unwrap().y, b.y);
    }
}

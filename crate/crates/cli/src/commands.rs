use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use ridge_mml::baselines::{
    cross_validate, cv10_select, gcv_select, gcv_value, gibbs_rr, hkb_classic, hkb_extended,
    ic_select, ic_value, linear_grid, Folds, GibbsConfig, InformationCriterion, LambdaPrior,
};
use ridge_mml::simulation::{published_template, run_study, Criterion, StudyConfig};
use ridge_mml::{
    diagnostics, estimate, estimate_grr, grr_phi, lambda_vector, log_marginal, posterior_fit,
    predictive, significance, student, Error, Family, MmlOptions, Model, ResidualKind, Result,
    RidgeSpec, ShrinkageProfile, Spectrum, StandardizedDesign,
};

use crate::input::{load_design, read_rows};
use crate::output::{cell, csv_bytes, document, num, nums, seconds_since, write_bytes, write_json};
use crate::{
    CompareArgs, CurveArgs, EstimatorArg, EstimatorArgs, ExpandArg, FitArgs, FormatArg, ModelArg,
    OutputArgs, PredictArgs, SimulateArgs,
};

/// How a selected shrinkage setting is carried over to a cross-validation fold.
enum FoldMapping {
    Scalar(f64),
    Power { lambda: f64, delta: f64 },
    RefitGrr,
}

struct Selection {
    profile: ShrinkageProfile,
    fields: Map<String, Value>,
    mapping: FoldMapping,
}

fn estimator_name(e: EstimatorArg) -> &'static str {
    match e {
        EstimatorArg::Mml => "mml",
        EstimatorArg::Hkb => "hkb",
        EstimatorArg::HkbExt => "hkb-ext",
        EstimatorArg::Gcv => "gcv",
        EstimatorArg::Bic => "bic",
        EstimatorArg::Aic => "aic",
        EstimatorArg::Cv10 => "cv10",
        EstimatorArg::Gibbs => "gibbs",
    }
}

fn scalar_selection(design: &StandardizedDesign, lambda: f64, mut fields: Map<String, Value>) -> Result<Selection> {
    fields.insert("lambda_hat".into(), num(lambda));
    Ok(Selection {
        profile: ShrinkageProfile::constant(lambda, design.q())?,
        fields,
        mapping: FoldMapping::Scalar(lambda),
    })
}

fn select(
    design: &StandardizedDesign,
    model: ModelArg,
    estimator: EstimatorArg,
    args: &EstimatorArgs,
    a: f64,
    b: f64,
) -> Result<Selection> {
    if estimator != EstimatorArg::Mml && model != ModelArg::Rr {
        return Err(Error::InvalidArgument(format!(
            "estimator {} applies to the rr model only",
            estimator_name(estimator)
        )));
    }
    let mut fields = Map::new();
    match estimator {
        EstimatorArg::Mml => {
            let opts = MmlOptions { a, b, ..MmlOptions::default() };
            let fit = estimate(model.into(), design, &opts)?;
            let profile = fit.profile(design);
            fields.insert("status".into(), json!(fit.status));
            fields.insert("objective_evals".into(), json!(fit.objective_evals));
            let mapping = match &fit.spec.family {
                Family::Rr { lambda } => {
                    fields.insert("lambda_hat".into(), num(*lambda));
                    FoldMapping::Scalar(*lambda)
                }
                Family::Prr { lambda, delta } => {
                    fields.insert("lambda_hat".into(), num(*lambda));
                    fields.insert("delta_hat".into(), num(*delta));
                    fields.insert("lambda_min".into(), num(profile.min()));
                    fields.insert("lambda_max".into(), num(profile.max()));
                    FoldMapping::Power { lambda: *lambda, delta: *delta }
                }
                Family::Grr { lambdas } => {
                    fields.insert("lambda_min".into(), num(profile.min()));
                    fields.insert("lambda_max".into(), num(profile.max()));
                    fields.insert("lambdas".into(), nums(lambdas));
                    FoldMapping::RefitGrr
                }
            };
            Ok(Selection { profile, fields, mapping })
        }
        EstimatorArg::Hkb => scalar_selection(design, hkb_classic(design)?, fields),
        EstimatorArg::HkbExt => {
            let h = hkb_extended(design)?;
            fields.insert("components".into(), json!(h.r));
            scalar_selection(design, h.lambda, fields)
        }
        EstimatorArg::Gcv | EstimatorArg::Bic | EstimatorArg::Aic => {
            let grid = linear_grid(0.0, args.grid_max, args.grid_step)?;
            let trace = match estimator {
                EstimatorArg::Gcv => gcv_select(design, &grid)?,
                EstimatorArg::Bic => ic_select(design, InformationCriterion::Bic, &grid)?,
                _ => ic_select(design, InformationCriterion::Aic, &grid)?,
            };
            fields.insert("criterion".into(), num(trace.criterion[trace.chosen_index()]));
            scalar_selection(design, trace.chosen, fields)
        }
        EstimatorArg::Cv10 => {
            let trace = cv10_select(design, args.cv_points, args.seed)?;
            let i = trace.chosen_index();
            fields.insert("criterion".into(), num(trace.criterion[i]));
            if let Some(se) = &trace.se {
                fields.insert("criterion_se".into(), num(se[i]));
            }
            scalar_selection(design, trace.chosen, fields)
        }
        EstimatorArg::Gibbs => {
            let config = GibbsConfig {
                a,
                b,
                lambda_prior: LambdaPrior::Gamma { shape: a, rate: b },
                iterations: args.iterations,
                burn_in: args.burn_in,
                seed: args.seed,
                ..GibbsConfig::default()
            };
            let g = gibbs_rr(design, &config)?;
            fields.insert(
                "gibbs".into(),
                json!({
                    "sigma2_mean": num(g.sigma2_mean),
                    "beta_mean": nums(&g.beta_mean),
                    "beta_mcse": nums(&g.beta_mcse),
                    "iterations": g.iterations,
                    "burn_in": g.burn_in,
                }),
            );
            scalar_selection(design, g.lambda_mean, fields)
        }
    }
}

fn fold_profile(mapping: &FoldMapping, s: &Spectrum, opts: &MmlOptions) -> Result<ShrinkageProfile> {
    match mapping {
        FoldMapping::Scalar(lambda) => ShrinkageProfile::constant(*lambda, s.q()),
        FoldMapping::Power { lambda, delta } => Ok(lambda_vector(&RidgeSpec::prr(*lambda, *delta), s.d())),
        FoldMapping::RefitGrr => Ok(estimate_grr(s, opts)?.profile(s)),
    }
}

fn data_fields(doc: &mut Map<String, Value>, args: &crate::DataArgs, design: &StandardizedDesign, response: &str) {
    doc.insert(
        "data".into(),
        json!({
            "path": args.data.display().to_string(),
            "response": response,
            "n": design.n(),
            "p": design.p(),
            "q": design.q(),
        }),
    );
}

fn format_or(output: &OutputArgs, default: FormatArg) -> FormatArg {
    output.format.unwrap_or(default)
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let (dataset, design) = load_design(&args.data)?;
    let (a, b) = (args.data.a, args.data.b);
    let start = Instant::now();
    let sel = select(&design, args.estimator.model, args.estimator.estimator, &args.estimator, a, b)?;
    let elapsed = seconds_since(start);

    let post = posterior_fit(&design, &sel.profile, a, b)?;
    let diag = diagnostics(&post, &design, ResidualKind::Approximate)?;
    let report = significance(&post, Some(design.covariate_names()))?;
    let original = design.standardization().back_transform(&post.beta_bar)?;
    let log_ml = log_marginal(&design, &sel.profile, a, b)?;

    if format_or(&args.output, FormatArg::Json) == FormatArg::Csv {
        let mut rows = vec![vec!["(intercept)".to_string(), String::new(), String::new(), cell(Some(original[0]))]];
        for (k, c) in report.covariates.iter().enumerate() {
            rows.push(vec![
                c.name.clone(),
                cell(Some(c.beta_bar)),
                cell(Some(c.sd)),
                cell(Some(original[k + 1])),
                cell(Some(c.ci95.0)),
                cell(Some(c.ci95.1)),
                cell(Some(c.sn)),
                c.flag_ci95.to_string(),
                c.flag_sn.to_string(),
            ]);
        }
        for row in &mut rows[..1] {
            row.extend(std::iter::repeat_n(String::new(), 5));
        }
        let header = ["covariate", "beta_bar", "sd", "original", "ci95_lo", "ci95_hi", "sn", "flag_ci95", "flag_sn"];
        return write_bytes(&csv_bytes(&header, &rows)?, args.output.out.as_deref());
    }

    let mut doc = document("fit");
    doc.insert("model".into(), Model::from(args.estimator.model).name().into());
    doc.insert("estimator".into(), estimator_name(args.estimator.estimator).into());
    data_fields(&mut doc, &args.data, &design, dataset.response_name());
    doc.extend(sel.fields);
    doc.insert("log_ml".into(), num(log_ml));
    doc.insert("df".into(), num(diag.df));
    doc.insert("df_variance".into(), num(diag.df_variance));
    doc.insert("df_error".into(), num(diag.df_error));
    doc.insert("r_squared".into(), num(diag.r_squared));
    doc.insert("sigma2_mean".into(), num(post.sigma2_mean));
    doc.insert("sigma2_var".into(), post.sigma2_var.map_or(Value::Null, num));
    doc.insert("dof".into(), num(post.dof));
    doc.insert("intercept".into(), num(original[0]));
    let coefficients: Vec<Value> = report
        .covariates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            json!({
                "name": c.name,
                "beta_bar": num(c.beta_bar),
                "sd": num(c.sd),
                "original": num(original[k + 1]),
                "ci50": [num(c.ci50.0), num(c.ci50.1)],
                "ci95": [num(c.ci95.0), num(c.ci95.1)],
                "sn": num(c.sn),
                "significant_ci50": c.flag_ci50,
                "significant_ci95": c.flag_ci95,
                "significant_sn": c.flag_sn,
            })
        })
        .collect();
    doc.insert("coefficients".into(), Value::Array(coefficients));
    if !args.output.no_timing {
        doc.insert("seconds".into(), num(elapsed));
    }
    write_json(doc, args.output.out.as_deref())
}

fn parse_compare_entry(name: &str) -> Result<(&'static str, ModelArg, EstimatorArg)> {
    Ok(match name.trim().to_ascii_lowercase().as_str() {
        "rr" => ("RR", ModelArg::Rr, EstimatorArg::Mml),
        "prr" => ("PRR", ModelArg::Prr, EstimatorArg::Mml),
        "grr" => ("GRR", ModelArg::Grr, EstimatorArg::Mml),
        "hkb" => ("HKB", ModelArg::Rr, EstimatorArg::Hkb),
        "hkb-ext" => ("HKB-ext", ModelArg::Rr, EstimatorArg::HkbExt),
        "gcv" => ("GCV", ModelArg::Rr, EstimatorArg::Gcv),
        "bic" => ("BIC", ModelArg::Rr, EstimatorArg::Bic),
        "aic" => ("AIC", ModelArg::Rr, EstimatorArg::Aic),
        "cv10" => ("CV10", ModelArg::Rr, EstimatorArg::Cv10),
        "gibbs" => ("Gibbs", ModelArg::Rr, EstimatorArg::Gibbs),
        other => return Err(Error::InvalidArgument(format!("unknown estimator {other:?}"))),
    })
}

struct CompareRow {
    label: &'static str,
    outcome: Result<CompareValues>,
}

struct CompareValues {
    fields: Map<String, Value>,
    lambda_hat: Option<f64>,
    delta_hat: Option<f64>,
    lambda_min: f64,
    lambda_max: f64,
    log_ml: f64,
    cv: f64,
    cv_se: f64,
    seconds: f64,
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let entries = args
        .estimators
        .iter()
        .filter(|e| !e.trim().is_empty())
        .map(|e| parse_compare_entry(e))
        .collect::<Result<Vec<_>>>()?;
    let (dataset, design) = load_design(&args.data)?;
    let (a, b) = (args.data.a, args.data.b);
    let opts = MmlOptions { a, b, ..MmlOptions::default() };
    let folds = Folds::random(design.n(), 10, args.estimator.seed)?;

    let rows: Vec<CompareRow> = entries
        .par_iter()
        .map(|&(label, model, estimator)| {
            let outcome = (|| {
                let start = Instant::now();
                let sel = select(&design, model, estimator, &args.estimator, a, b)?;
                let seconds = seconds_since(start);
                let log_ml = log_marginal(&design, &sel.profile, a, b)?;
                let cv = cross_validate(design.x(), design.y(), &folds, &[()], |s, _| {
                    fold_profile(&sel.mapping, s, &opts)
                })?;
                let value = |key: &str| sel.fields.get(key).and_then(Value::as_f64);
                Ok(CompareValues {
                    lambda_hat: value("lambda_hat"),
                    delta_hat: value("delta_hat"),
                    lambda_min: sel.profile.min(),
                    lambda_max: sel.profile.max(),
                    log_ml,
                    cv: cv.cv[0],
                    cv_se: cv.se[0],
                    seconds,
                    fields: sel.fields,
                })
            })();
            CompareRow { label, outcome }
        })
        .collect();

    let timing = !args.output.no_timing;
    if format_or(&args.output, FormatArg::Csv) == FormatArg::Csv {
        let mut header = vec!["estimator", "lambda_hat", "delta_hat", "lambda_min", "lambda_max", "log_ml", "cv10", "cv10_se"];
        if timing {
            header.push("seconds");
        }
        header.push("error");
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![r.label.to_string()];
                match &r.outcome {
                    Ok(v) => {
                        row.extend([
                            cell(v.lambda_hat),
                            cell(v.delta_hat),
                            cell(Some(v.lambda_min)),
                            cell(Some(v.lambda_max)),
                            cell(Some(v.log_ml)),
                            cell(Some(v.cv)),
                            cell(Some(v.cv_se)),
                        ]);
                        if timing {
                            row.push(cell(Some(v.seconds)));
                        }
                        row.push(String::new());
                    }
                    Err(e) => {
                        row.extend(std::iter::repeat_n(String::new(), if timing { 8 } else { 7 }));
                        row.push(e.kind().to_string());
                    }
                }
                row
            })
            .collect();
        return write_bytes(&csv_bytes(&header, &table)?, args.output.out.as_deref());
    }

    let mut doc = document("compare");
    data_fields(&mut doc, &args.data, &design, dataset.response_name());
    let json_rows: Vec<Value> = rows
        .into_iter()
        .map(|r| {
            let mut row = Map::new();
            row.insert("estimator".into(), r.label.into());
            match r.outcome {
                Ok(v) => {
                    row.extend(v.fields);
                    row.insert("lambda_min".into(), num(v.lambda_min));
                    row.insert("lambda_max".into(), num(v.lambda_max));
                    row.insert("log_ml".into(), num(v.log_ml));
                    row.insert("cv10".into(), num(v.cv));
                    row.insert("cv10_se".into(), num(v.cv_se));
                    if timing {
                        row.insert("seconds".into(), num(v.seconds));
                    }
                }
                Err(e) => {
                    row.insert("error".into(), json!({ "kind": e.kind(), "message": e.to_string() }));
                }
            }
            Value::Object(row)
        })
        .collect();
    doc.insert("rows".into(), Value::Array(json_rows));
    write_json(doc, args.output.out.as_deref())
}

pub fn curve(args: &CurveArgs) -> Result<()> {
    let (_, design) = load_design(&args.data)?;
    let (a, b) = (args.data.a, args.data.b);
    let grid = linear_grid(args.grid_min.unwrap_or(args.grid_step), args.grid_max, args.grid_step)?;
    let (columns, rows): (Vec<String>, Vec<Vec<f64>>) = match (args.estimator, args.model) {
        (EstimatorArg::Mml, ModelArg::Rr) => (
            vec!["lambda".into(), "log_ml".into()],
            grid.iter()
                .map(|&l| Ok(vec![l, log_marginal(&design, &ShrinkageProfile::constant(l, design.q())?, a, b)?]))
                .collect::<Result<_>>()?,
        ),
        (EstimatorArg::Mml, ModelArg::Prr) => {
            let deltas = linear_grid(args.delta_min, args.delta_max, args.delta_step)?;
            let mut rows = Vec::with_capacity(grid.len() * deltas.len());
            for &l in &grid {
                for &delta in &deltas {
                    let profile = lambda_vector(&RidgeSpec::prr(l, delta), design.spectrum().d());
                    rows.push(vec![l, delta, log_marginal(&design, &profile, a, b)?]);
                }
            }
            (vec!["lambda".into(), "delta".into(), "log_ml".into()], rows)
        }
        (EstimatorArg::Mml, ModelArg::Grr) => {
            let mut columns = vec!["lambda".to_string()];
            columns.extend((1..=design.q()).map(|k| format!("phi_{k}")));
            let rows = grid
                .iter()
                .map(|&l| std::iter::once(l).chain((0..design.q()).map(|k| grr_phi(&design, k, l))).collect())
                .collect();
            (columns, rows)
        }
        (EstimatorArg::Gcv | EstimatorArg::Bic | EstimatorArg::Aic, ModelArg::Rr) => {
            let name = estimator_name(args.estimator);
            let rows = grid
                .iter()
                .map(|&l| {
                    let v = match args.estimator {
                        EstimatorArg::Gcv => gcv_value(&design, l).unwrap_or(f64::NAN),
                        EstimatorArg::Bic => ic_value(&design, InformationCriterion::Bic, l),
                        _ => ic_value(&design, InformationCriterion::Aic, l),
                    };
                    vec![l, v]
                })
                .collect();
            (vec!["lambda".into(), name.into()], rows)
        }
        (e, m) => {
            return Err(Error::InvalidArgument(format!(
                "no curve for estimator {} with model {}",
                estimator_name(e),
                Model::from(m)
            )))
        }
    };

    if format_or(&args.output, FormatArg::Csv) == FormatArg::Csv {
        let header: Vec<&str> = columns.iter().map(String::as_str).collect();
        let table: Vec<Vec<String>> =
            rows.iter().map(|r| r.iter().map(|v| cell(Some(*v))).collect()).collect();
        return write_bytes(&csv_bytes(&header, &table)?, args.output.out.as_deref());
    }
    let mut doc = document("curve");
    doc.insert("model".into(), Model::from(args.model).name().into());
    doc.insert("columns".into(), json!(columns));
    doc.insert("rows".into(), Value::Array(rows.iter().map(|r| nums(r)).collect()));
    write_json(doc, args.output.out.as_deref())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut templates = Vec::new();
    for name in args.templates.iter().filter(|t| !t.trim().is_empty()) {
        let base = published_template(name.trim())?;
        for &zp in &args.zero_proportions {
            templates.push(base.clone().with_zero_proportion(zp));
        }
    }
    let config = StudyConfig {
        replications: args.replications,
        models: args.models.iter().map(|m| Model::from(*m)).collect(),
        criteria: Criterion::ALL.to_vec(),
        seed: args.seed,
        options: MmlOptions { a: args.a, b: args.b, ..MmlOptions::default() },
        ci_score: args.ci_score.into(),
    };
    let start = Instant::now();
    let table = run_study(&templates, &config)?;
    let elapsed = seconds_since(start);

    if let Some(path) = &args.detail {
        let mut lines = String::new();
        for record in &table.replications {
            let value = crate::output::sanitize(
                serde_json::to_value(record).map_err(|e| Error::InvalidArgument(e.to_string()))?,
            );
            lines.push_str(&value.to_string());
            lines.push('\n');
        }
        std::fs::write(path, lines)?;
    }

    if format_or(&args.output, FormatArg::Csv) == FormatArg::Csv {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        return write_bytes(&buf, args.output.out.as_deref());
    }
    let mut doc = document("simulate");
    doc.insert("replications".into(), json!(args.replications));
    doc.insert("seed".into(), json!(args.seed));
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "condition": r.condition,
                "surrogate": r.surrogate,
                "zero_proportion": num(r.zero_proportion),
                "model": r.model.name(),
                "criterion": r.criterion.name(),
                "auc": { "mean": num(r.auc.mean), "sd": num(r.auc.sd), "display": r.auc.to_string() },
                "sensitivity": { "mean": num(r.sensitivity.mean), "sd": num(r.sensitivity.sd) },
                "specificity": { "mean": num(r.specificity.mean), "sd": num(r.specificity.sd) },
                "completed": r.completed,
                "failed": r.failed,
            })
        })
        .collect();
    doc.insert("rows".into(), Value::Array(rows));
    if !args.output.no_timing {
        doc.insert("seconds".into(), num(elapsed));
    }
    write_json(doc, args.output.out.as_deref())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    if args.data.expand != ExpandArg::None {
        return Err(Error::InvalidArgument("predict works on the raw covariates only".into()));
    }
    let (_, design) = load_design(&args.data)?;
    let (a, b) = (args.data.a, args.data.b);
    let sel = select(&design, args.estimator.model, args.estimator.estimator, &args.estimator, a, b)?;
    let post = posterior_fit(&design, &sel.profile, a, b)?;
    let st = design.standardization();
    let rows = read_rows(&args.new, design.covariate_names())?;
    let predictions = rows
        .iter()
        .map(|row| {
            let p = predictive(&post, &design, &st.transform_row(row)?)?;
            let mean = st.untransform_response(p.mean);
            let variance = p.variance * st.y_scale * st.y_scale;
            let half = student::quantile(0.975, p.dof)? * variance.sqrt();
            Ok([mean, variance, p.dof, mean - half, mean + half])
        })
        .collect::<Result<Vec<_>>>()?;

    if format_or(&args.output, FormatArg::Json) == FormatArg::Csv {
        let table: Vec<Vec<String>> = predictions
            .iter()
            .enumerate()
            .map(|(i, p)| std::iter::once((i + 1).to_string()).chain(p.iter().map(|v| cell(Some(*v)))).collect())
            .collect();
        let header = ["row", "mean", "variance", "dof", "lower95", "upper95"];
        return write_bytes(&csv_bytes(&header, &table)?, args.output.out.as_deref());
    }
    let mut doc = document("predict");
    doc.insert("model".into(), Model::from(args.estimator.model).name().into());
    doc.insert("estimator".into(), estimator_name(args.estimator.estimator).into());
    doc.extend(sel.fields);
    let list: Vec<Value> = predictions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "row": i + 1,
                "mean": num(p[0]),
                "variance": num(p[1]),
                "dof": num(p[2]),
                "interval95": [num(p[3]), num(p[4])],
            })
        })
        .collect();
    doc.insert("predictions".into(), Value::Array(list));
    write_json(doc, args.output.out.as_deref())
}

use std::path::Path;

use ridge_mml::features::{expand_features, expanded_names, Expansion};
use ridge_mml::{
    read_csv_path, standardize, ColumnSelector, CsvOptions, Dataset, DesignOptions, Error, Result,
    ScaleMode, StandardizedDesign,
};

use crate::{DataArgs, ExpandArg, StandardizeArg};

fn selector(s: &str) -> ColumnSelector {
    match s.parse() {
        Ok(sel) => sel,
        Err(never) => match never {},
    }
}

pub fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let mut opts = CsvOptions::new(selector(&args.response));
    opts.drop = args.drop.iter().map(|s| selector(s)).collect();
    let dataset = read_csv_path(&args.data, &opts)?;
    match args.expand {
        ExpandArg::None => Ok(dataset),
        ExpandArg::Quadratic => {
            let (z, _, _) = standardize(&dataset, ScaleMode::UnitVariance, false)?;
            let x = expand_features(&z, &Expansion::Quadratic)?;
            let names = expanded_names(dataset.covariate_names(), &Expansion::Quadratic);
            dataset.with_covariates(x, names)
        }
    }
}

pub fn design_options(args: &DataArgs) -> DesignOptions {
    DesignOptions {
        mode: match args.standardize {
            StandardizeArg::Variance => ScaleMode::UnitVariance,
            StandardizeArg::Ss => ScaleMode::UnitSumOfSquares,
        },
        scale_y: args.scale_y,
        ..DesignOptions::default()
    }
}

pub fn load_design(args: &DataArgs) -> Result<(Dataset, StandardizedDesign)> {
    let dataset = load_dataset(args)?;
    let design = StandardizedDesign::from_dataset(&dataset, &design_options(args))?;
    Ok((dataset, design))
}

/// Reads the named columns of a headed CSV file as rows of covariates.
pub fn read_rows(path: &Path, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(std::io::BufReader::new(file));
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let columns: Vec<usize> = names
        .iter()
        .map(|n| headers.iter().position(|h| h == n).ok_or_else(|| Error::UnknownColumn(n.clone())))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let values = columns
            .iter()
            .map(|&j| {
                let field = record.get(j).unwrap_or("");
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    row: row + 1,
                    column: headers[j].clone(),
                    value: field.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

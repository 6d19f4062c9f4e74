use ridge_mml::features::{expand_features, expanded_names, Expansion};
use ridge_mml::{
    datasets, read_csv, read_csv_path, standardize, ColumnSelector, CsvOptions, DesignOptions, Error, ScaleMode,
    StandardizedDesign,
};

const TABLE: &str = "id, y ,a,b\n1,2.0,1,10\n2,4.5,2,9\n3,1.0,4,13\n4,3.5,3,8\n";

fn opts(response: &str, drop: &[&str]) -> CsvOptions {
    CsvOptions { response: response.parse().unwrap(), drop: drop.iter().map(|d| d.parse().unwrap()).collect() }
}

#[test]
fn reads_named_and_indexed_columns() {
    let ds = read_csv(TABLE.as_bytes(), &opts("y", &["id"])).unwrap();
    assert_eq!((ds.n(), ds.p()), (4, 2));
    assert_eq!(ds.covariate_names(), ["a", "b"]);
    assert_eq!(ds.response().as_slice(), [2.0, 4.5, 1.0, 3.5]);
    assert_eq!(ds.covariates()[(2, 1)], 13.0);

    let by_index = read_csv(TABLE.as_bytes(), &opts("1", &["0"])).unwrap();
    assert_eq!(by_index.covariates(), ds.covariates());
    let kept = read_csv(TABLE.as_bytes(), &opts("y", &[])).unwrap();
    assert_eq!(kept.covariate_names(), ["id", "a", "b"]);
}

#[test]
fn reports_missing_and_malformed_values() {
    let missing = "y,a\n1,2\n2,NA\n";
    match read_csv(missing.as_bytes(), &opts("y", &[])) {
        Err(Error::MissingValue { row, column }) => assert_eq!((row, column.as_str()), (2, "a")),
        other => panic!("{other:?}"),
    }
    let bad = "y,a\n1,2\nx,3\n";
    assert!(matches!(read_csv(bad.as_bytes(), &opts("y", &[])), Err(Error::Parse { row: 2, .. })));
    assert!(matches!(read_csv(TABLE.as_bytes(), &opts("z", &[])), Err(Error::UnknownColumn(_))));
    assert!(matches!(read_csv(TABLE.as_bytes(), &opts("9", &[])), Err(Error::UnknownColumn(_))));
    assert!(matches!(read_csv_path("/nonexistent/table.csv", &opts("y", &[])), Err(Error::Io(_))));
}

#[test]
fn standardization_modes() {
    let ds = read_csv(TABLE.as_bytes(), &opts("y", &["id"])).unwrap();
    let (x, y, s) = standardize(&ds, ScaleMode::UnitVariance, true).unwrap();
    for j in 0..2 {
        let col = x.column(j);
        assert!(col.mean().abs() < 1e-14);
        assert!((col.norm_squared() / 3.0 - 1.0).abs() < 1e-12);
    }
    assert!((y.norm_squared() / 3.0 - 1.0).abs() < 1e-12);
    assert_eq!(s.y_mean, 2.75);

    let (x, y, _) = standardize(&ds, ScaleMode::UnitSumOfSquares, false).unwrap();
    assert!((x.column(0).norm_squared() - 1.0).abs() < 1e-12);
    assert!((y.sum()).abs() < 1e-12);
    assert!((y[1] - 1.75).abs() < 1e-12);

    let constant = read_csv("y,a\n1,5\n2,5\n3,5\n".as_bytes(), &opts("y", &[])).unwrap();
    assert!(matches!(standardize(&constant, ScaleMode::UnitVariance, true), Err(Error::ConstantColumn(0))));
}

#[test]
fn back_transform_recovers_least_squares_on_raw_scale() {
    let ds = datasets::iris();
    let d = StandardizedDesign::from_dataset(&ds, &DesignOptions::default()).unwrap();
    let s = d.spectrum();
    let alpha: Vec<f64> = s.alpha_hat().to_vec();
    let beta = d.w() * nalgebra::DVector::from_vec(alpha);
    let raw = d.standardization().back_transform(beta.as_slice()).unwrap();
    // least squares through the raw data with an intercept
    let x = ds.covariates().clone().insert_column(0, 1.0);
    let ols = (x.tr_mul(&x)).lu().solve(&x.tr_mul(ds.response())).unwrap();
    for (a, b) in raw.iter().zip(ols.iter()) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn quadratic_expansion_shapes() {
    let base = datasets::diabetes();
    assert_eq!((base.n(), base.p()), (442, 10));
    let q = datasets::diabetes_quadratic().unwrap();
    assert_eq!(q.p(), 65);
    assert_eq!(q.covariate_names()[10], format!("{}^2", base.covariate_names()[0]));
    let x = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 2.0]);
    let e = expand_features(&x, &Expansion::Quadratic).unwrap();
    assert_eq!(e.row(0).iter().copied().collect::<Vec<_>>(), [1.0, 2.0, 3.0, 1.0, 4.0, 9.0, 2.0, 3.0, 6.0]);
    let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    assert_eq!(expanded_names(&names, &Expansion::Quadratic)[6..], ["a:b", "a:c", "b:c"]);
    let spline = expand_features(&x, &Expansion::CubicSpline { knots: None }).unwrap();
    assert_eq!(spline.ncols(), 5);
    assert_eq!(spline[(0, 3)], 0.0);
}

#[test]
fn design_cache_round_trip() {
    let d = StandardizedDesign::from_dataset(&datasets::iris(), &DesignOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iris.cache");
    d.save(&path).unwrap();
    let back = StandardizedDesign::load(&path).unwrap();
    assert_eq!(back.x(), d.x());
    assert_eq!(back.u(), d.u());
    assert_eq!(back.w(), d.w());
    assert_eq!(back.spectrum(), d.spectrum());
    assert_eq!(back.standardization(), d.standardization());
    assert_eq!(back.covariate_names(), d.covariate_names());

    let bytes = std::fs::read(&path).unwrap();
    assert!(matches!(StandardizedDesign::read_cache(&bytes[..bytes.len() / 2]), Err(Error::CacheFormat(_))));
    assert!(matches!(StandardizedDesign::read_cache(&b"garbage!"[..]), Err(Error::CacheFormat(_))));
}

#[test]
fn column_selector_parsing() {
    assert_eq!("3".parse::<ColumnSelector>().unwrap(), ColumnSelector::Index(3));
    assert_eq!("y".parse::<ColumnSelector>().unwrap(), ColumnSelector::Name("y".into()));
}

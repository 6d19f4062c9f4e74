use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("column {0} is constant and cannot be standardized")]
    ConstantColumn(usize),

    #[error("response is constant and cannot be scaled")]
    ConstantResponse,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("cannot parse {value:?} at row {row}, column {column}")]
    Parse { row: usize, column: String, value: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache format error: {0}")]
    CacheFormat(String),

    #[error("singular value decomposition failed: {0}")]
    NumericalFailure(String),

    #[error("singular value {0} is zero")]
    ZeroSingularValue(usize),

    #[error("design has rank zero")]
    SingularDesign,

    #[error("hyperparameter {name} must be positive, got {value}")]
    NonPositiveHyperparameter { name: &'static str, value: f64 },

    #[error("residual sum of squares is not positive")]
    DegenerateFit,

    #[error("posterior shape {0} is too small for this moment")]
    ShapeTooSmall(f64),

    #[error("observation {0} has leverage one")]
    LeverageOne(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("labels contain only one class")]
    DegenerateLabels,

    #[error("covariance matrix is not positive definite")]
    CovarianceNotPositiveDefinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TooFewRows { .. } => "TooFewRows",
            Error::ConstantColumn(_) => "ConstantColumn",
            Error::ConstantResponse => "ConstantResponse",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::MissingValue { .. } => "MissingValue",
            Error::Parse { .. } => "ParseError",
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::Csv(_) => "CsvError",
            Error::Io(_) => "IoError",
            Error::CacheFormat(_) => "CacheFormat",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::ZeroSingularValue(_) => "ZeroSingularValue",
            Error::SingularDesign => "SingularDesign",
            Error::NonPositiveHyperparameter { .. } => "NonPositiveHyperparameter",
            Error::DegenerateFit => "DegenerateFit",
            Error::ShapeTooSmall(_) => "ShapeTooSmall",
            Error::LeverageOne(_) => "LeverageOne",
            Error::Domain(_) => "DomainError",
            Error::EmptyGrid => "EmptyGrid",
            Error::DegenerateLabels => "DegenerateLabels",
            Error::CovarianceNotPositiveDefinite => "CovarianceNotPD",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveHyperparameter { name, value })
    }
}

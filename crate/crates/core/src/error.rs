use std::fmt;

/// Coordinates of a grid node or evaluation point, printed compactly in error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("function returned a non-finite value at {0}")]
    Sampling(Point),
    #[error("cannot partition axis: {0}")]
    Partition(String),
    #[error("point {0} is not a node of the grid tensor")]
    Lookup(Point),
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
    #[error("1-D null-space solve has all-zero data at frozen coordinates {0}")]
    DegenerateSlice(Point),
    #[error("all barycentric weights were pruned away (tol_k = {0})")]
    OverPrunedModel(f64),
    #[error("barycentric denominator vanished at {0}")]
    PoleEncountered(Point),
    #[error("model carries no per-variable factors")]
    FactorsUnavailable,
    #[error("benchmark case #{0} is unavailable (formula not published)")]
    CaseUnavailable(usize),
    #[error("every configuration of the sweep failed for case #{0}")]
    SweepExhausted(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

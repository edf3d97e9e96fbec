use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("incompatible element kinds: {0}")]
    Kind(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("size cap exceeded: {what} would exceed {cap} elements")]
    SizeCap { what: String, cap: usize },
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("sets live on different models")]
    IncompatibleModel,
    #[error("operation requires an exact model: {0}")]
    NotExact(String),
    #[error("left and right sets intersect in {0} points; disjointify first")]
    NotDisjoint(usize),
    #[error("measures differ: {a} vs {b}")]
    MeasureMismatch { a: f64, b: f64 },
    #[error("covering fails: point {point} is not reached")]
    CoverFails { point: usize },
    #[error("expansion check failed on test set {set}: {lhs} < {rhs}")]
    ExpansionFails { set: String, lhs: f64, rhs: f64 },
    #[error("unmatched residue {residue} exceeds threshold {threshold}")]
    Residue { residue: f64, threshold: f64 },
    #[error("no feasible parameter: {0}")]
    Infeasible(String),
    #[error("statistical resolution too coarse: {0}")]
    Resolution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate invalid: {0}")]
    Certificate(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element or function does not belong to model {0}")]
    ModelMismatch(String),

    #[error("radius cap exceeded: requested radius {requested}, cap {cap}")]
    RadiusCapExceeded { requested: usize, cap: usize },

    #[error("budget exceeded for {what}: {size} > {cap}")]
    BudgetExceeded { what: &'static str, size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("divergent sum: {0}")]
    Divergent(String),

    #[error("no analytic envelope available: {0}")]
    NoEnvelope(String),

    #[error("function is not self-adjoint (defect {defect:e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    QuadratureNonConvergent {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("summation suspected divergent: {0}")]
    DivergenceSuspected(String),

    #[error("series truncation could not reach tolerance {tol:e} within {max_terms} terms")]
    SeriesTruncation { tol: f64, max_terms: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

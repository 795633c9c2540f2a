use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series did not converge after {terms} terms")]
    Divergence { terms: usize },
    #[error("argument {0} lies on the branch cut [1, inf)")]
    BranchCut(f64),
    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("ill-conditioned period matrix: smallest eigenvalue of Im(tau) is {0:e}")]
    Conditioning(f64),
    #[error("reality condition violated: {0}")]
    Reality(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("integration path error: {0}")]
    Path(String),
    #[error("no branch-integral combination for {0}")]
    Combination(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("inadmissible winding data (n1, m1) = ({n1}, {m1})")]
    Inadmissible { n1: i64, m1: i64 },
    #[error("period matrix does not have reduced block shape: {0}")]
    ReductionShape(String),
    #[error("symplectic reduction failed: {0}")]
    ReductionFailure(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("gauge flow became stiff at z = {z}: condition number {cond:e}")]
    Stiffness { z: f64, cond: f64 },
    #[error("grid point {0} is too close to an endpoint pole")]
    EndpointPole(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;

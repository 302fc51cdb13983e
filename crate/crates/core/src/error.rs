use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("parity condition violated: beta={beta} is odd and p-r+1={value} is not even")]
    Parity { beta: u32, value: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{what} did not converge (last change {change:e}, tolerance {tol:e})")]
    NonConvergence { what: String, change: f64, tol: f64 },
    #[error("branch ambiguity: argument jump {jump:.3} rad at node {node}")]
    Branch { node: usize, jump: f64 },
    #[error("point {0} lies within {1:e} of the contour or support")]
    TooClose(String, f64),
    #[error("super-critical spike h={h} (threshold sqrt(c)={threshold})")]
    SuperCritical { h: f64, threshold: f64 },
    #[error("half-plane condition Re z < S/sum(h/(1+h)) violated: Re z={re}, bound={bound}")]
    HalfPlane { re: f64, bound: f64 },
    #[error("covariance not positive semidefinite: smallest eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("cost guard: {0}")]
    CostGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;

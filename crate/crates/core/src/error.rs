use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value for {what}")]
    NonFinite { what: &'static str },

    #[error("grid too coarse: nx = {nx}, need nx >= 4")]
    GridTooCoarse { nx: usize },

    #[error("non-finite sample at node {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64 },

    #[error("non-finite evaluation in cell {cell}")]
    NonFiniteInCell { cell: usize },

    #[error("periodic spline system is singular: {0}")]
    SplineSolve(String),

    #[error("moment condition k = {k} violated: got {got}, want {want}")]
    MomentViolation { k: u32, got: f64, want: f64 },

    #[error(
        "fixed point did not converge{} after {iters} iterations (residual {residual:.3e}{})",
        match node { Some(j) => format!(" at node {j}"), None => String::new() },
        if *wellposedness_exceeded { ", well-posedness proxy > 1" } else { "" }
    )]
    NonConvergence {
        node: Option<usize>,
        iters: u32,
        residual: f64,
        /// Set when 3 * dt * |f'| * max-slope exceeded 1 during the solve.
        wellposedness_exceeded: bool,
    },

    #[error("numeric blow-up{}", match node { Some(j) => format!(" at node {j}"), None => String::new() })]
    NumericBlowup { node: Option<usize> },

    #[error("derivative update singular at node {node}: |1 + w f'(u) dt| = {denom:.3e}")]
    DerivativeSingularity { node: usize, denom: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep row (h = {h}, dt = {dt}) failed: {source}")]
    RowFailed {
        h: f64,
        dt: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("division by a vanishing norm ({norm:.3e})")]
    VanishingNorm { norm: f64 },
}

impl Error {
    pub(crate) fn at_node(self, node: usize) -> Error {
        match self {
            Error::NonConvergence {
                iters,
                residual,
                wellposedness_exceeded,
                ..
            } => Error::NonConvergence {
                node: Some(node),
                iters,
                residual,
                wellposedness_exceeded,
            },
            Error::NumericBlowup { .. } => Error::NumericBlowup { node: Some(node) },
            other => other,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::StepFailed {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

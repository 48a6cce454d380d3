use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("off-diagonal entry a_{index} = {value} is not strictly positive")]
    NonPositiveOffdiag { index: usize, value: f64 },

    #[error("non-finite value {value} at position {index} of {what}")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("values are not strictly increasing at index {index}")]
    NotIncreasing { index: usize },

    #[error("nodes {index} and {} are closer than {gap:e}", index + 1)]
    NearDegenerate { index: usize, gap: f64 },

    #[error("weight {index} = {value} is not strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("Stieltjes procedure broke down at step {index} (a_{index}^2 = {value:e})")]
    StieltjesBreakdown { index: usize, value: f64 },

    #[error("Christoffel weights are not positive at nodes {nodes:?}")]
    SignViolation { nodes: Vec<f64> },

    #[error("orthogonality residual {residual:e} between members {n} and {m}")]
    Orthogonality { n: usize, m: usize, residual: f64 },

    #[error("band matrix entry ({row}, {col}) = {value:e} lies outside bandwidth 3")]
    Bandwidth { row: usize, col: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures caused by the arithmetic rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::StieltjesBreakdown { .. }
                | Error::Orthogonality { .. }
                | Error::Bandwidth { .. }
                | Error::Numerical(_)
        )
    }
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

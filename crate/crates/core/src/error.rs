use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("feature length {len} is not divisible by n_divide = {n_divide}")]
    NonDivisibleDimension { len: usize, n_divide: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFiniteInput { what: &'static str, index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("collision report does not match the input: {0}")]
    StaleReport(String),

    #[error("tape does not match the parameters: {0}")]
    StaleTape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    DivergenceDetected { epoch: usize, loss: f64 },

    #[error("malformed CSV: {0}")]
    Parse(String),
}

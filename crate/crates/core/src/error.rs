use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Exhaustive enumeration would visit `required` items, more than `cap`.
    #[error("enumeration budget exceeded: {} items required, cap is {cap}", show_required(.required))]
    BudgetExceeded { required: u128, cap: u128 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vertex {index} out of range for graph with {n} vertices")]
    Index { index: usize, n: usize },

    #[error("probability normalization residual {residual:e} exceeds {limit:e}")]
    Normalization { residual: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}

fn show_required(required: &u128) -> String {
    let required = *required;
    if required == u128::MAX {
        format!("more than {:e}", u128::MAX as f64)
    } else {
        required.to_string()
    }
}

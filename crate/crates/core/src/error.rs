use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Gram matrix rejected as numerically singular.
    #[error("singular Gram matrix (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("infeasible subset: {size} antennas cannot serve {users} users")]
    InfeasibleSubset { size: usize, users: usize },

    /// Circuit power leaves no transmit power, or a chain count exceeds the budget.
    #[error("infeasible budget: {0}")]
    Infeasible(String),

    #[error("enumeration of {required} subsets exceeds cap {cap}")]
    Capacity { required: u128, cap: u128 },

    #[error("aggregate merge error: {0}")]
    Merge(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by the problem instance rather than by bad input.
    pub fn is_runtime_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::InfeasibleSubset { .. }
                | Error::Infeasible(_)
                | Error::Capacity { .. }
        )
    }
}

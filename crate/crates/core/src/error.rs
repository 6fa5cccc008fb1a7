use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("argument {v} is outside the domain of the {family} carrier")]
    Domain { v: f64, family: String },

    #[error(
        "moment matrix is numerically rank deficient (smallest/largest singular value = {ratio:e})"
    )]
    SingularMoments { ratio: f64 },

    #[error("{stage} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("{what} is ill-conditioned (condition number {condition:e})")]
    IllConditioned { what: &'static str, condition: f64 },

    #[error("quadrature failed to reach tolerance (error estimate {residual:e})")]
    Quadrature { residual: f64 },

    #[error("positive-part mass {mass} on the grid is below 0.5; widen the grid")]
    Support { mass: f64 },

    #[error("kernel '{kernel}' has psi(k) = {psi}; the distribution-function bandwidth needs psi(k) > 0")]
    NonPositivePsi { kernel: String, psi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::SingularMoments { .. }
                | Error::IllConditioned { .. }
                | Error::Quadrature { .. }
                | Error::Domain { .. }
        )
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a covariance matrix: min eigenvalue of gamma + i*omega is {min_eigenvalue:.3e}")]
    InvalidCovariance {
        min_eigenvalue: f64,
        symmetric: bool,
    },

    #[error("asymmetric state (n = {n}, m = {m}); the closed form covers m = n only")]
    Asymmetric { n: f64, m: f64 },

    #[error("numerical conditioning: {0}")]
    Conditioning(String),

    #[error("boundary state n = k_x; balancing squeezing is singular")]
    BoundaryState,

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error(
        "decomposition inapplicable: min eigenvalue of gamma - gamma_delta is {min_eigenvalue:.3e}"
    )]
    DecompositionInapplicable { min_eigenvalue: f64 },

    #[error("optimizer did not converge: best value {best_bits} bits, feasibility residual {residual:.3e}")]
    NonConvergence { best_bits: f64, residual: f64 },
}

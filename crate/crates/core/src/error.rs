use thiserror::Error;

/// Errors raised by model construction and numerical checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("singular matrix (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("singular seed at x = {x}")]
    SingularSeed { x: f64 },
    #[error("invalid seed energy: {0}")]
    InvalidSeedEnergy(String),
    #[error("pole in formula: {0}")]
    Pole(String),
    #[error("E = {energy} is not a scattering energy: {reason}")]
    NotScatteringEnergy { energy: f64, reason: String },
    #[error("one-sided scattering at E = {energy}: {reason}")]
    OneSidedScattering { energy: f64, reason: String },
    #[error("degenerate asymptotics (D = {0:.3e})")]
    DegenerateAsymptotics(f64),
    #[error("operator is not reducible (off-block leakage {leakage:.3e})")]
    NotReducible { leakage: f64 },
    #[error("closed form disagrees with the generic engine by {0:.3e}")]
    OracleMismatch(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_)
                | Error::SingularMatrix { .. }
                | Error::SingularSeed { .. }
                | Error::DegenerateAsymptotics(_)
                | Error::OracleMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

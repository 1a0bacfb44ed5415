//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A kernel was evaluated at its singular point `r = 0`.
    #[error("kernel evaluated at its singular point |r| = 0")]
    SingularPoint,

    /// Real energy on the free spectrum where the momentum-space resolvent
    /// has its on-shell pole.
    #[error("resolvent pole: real energy {mu} is on shell for |q|^2 = {q2}")]
    SingularShell { mu: f64, q2: f64 },

    /// Real energy inside the closed spectral gap `[-m, m]` where the
    /// scattering kernel has no boundary value.
    #[error("branch error: real energy {mu} lies inside the gap [-{m}, {m}]")]
    BranchError { mu: f64, m: f64 },

    /// Scattering requested at an energy inside the gap.
    #[error("energy {lambda} lies inside the spectral gap (|λ| ≤ m = {m})")]
    GapEnergy { lambda: f64, m: f64 },

    /// Channel index inconsistent with the sign of the energy.
    #[error("channel {channel} is not open at energy {lambda} (channels 1,2 need λ < -m; 3,4 need λ > m)")]
    ChannelMismatch { channel: usize, lambda: f64 },

    /// The discretised `I + K` operator is numerically singular: the energy
    /// is (close to) an exceptional value.
    #[error("exceptional value near λ = {lambda}: smallest singular value {sigma_min:.3e} below threshold {threshold:.3e}")]
    ExceptionalValue {
        lambda: f64,
        sigma_min: f64,
        threshold: f64,
    },

    /// Radial (partial-wave) machinery applied to a non-radial potential.
    #[error("potential is not spherically symmetric")]
    NonRadialPotential,

    /// Root bracketing for a bound-state search failed.
    #[error("no root in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    /// Proportionality fit attempted against a vanishing reference.
    #[error("degenerate fit: reference matrix norm {norm:.3e} too small")]
    DegenerateFit { norm: f64 },

    /// Iterative linear solver failed to converge.
    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    /// Dense linear-algebra backend failure.
    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    /// Invalid configuration or input data.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

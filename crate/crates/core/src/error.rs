use thiserror::Error;

/// Errors reported by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("EIT denominator |Ω1|² + |E1|² vanishes")]
    VanishingDenominator,

    #[error("adiabatic branch is degenerate: overlaps {first:.3e} and {second:.3e} are indistinguishable")]
    DegenerateBranch { first: f64, second: f64 },

    #[error("step size underflow at xi = {xi}")]
    StepSizeUnderflow { xi: f64 },

    #[error("integrator exceeded {steps} steps before xi = {xi}")]
    TooManySteps { steps: usize, xi: f64 },

    #[error("degenerate orbit for y0 = {y0}")]
    DegenerateOrbit { y0: f64 },

    #[error("tridiagonal eigensolver did not converge (dimension {dim})")]
    EigenSolver { dim: usize },

    #[error("photon statistics undefined for zero mean")]
    UndefinedStatistics,

    #[error("no bracketed minimum in the series")]
    NoMinimum,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("sector ({n1}, {n2}, {n3}, {n4}): {source}")]
    Sector {
        n1: u32,
        n2: u32,
        n3: u32,
        n4: u32,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

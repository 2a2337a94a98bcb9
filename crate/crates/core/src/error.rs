use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state violates the uncertainty bound: a*b = {product} < 1")]
    Inadmissible { product: f64 },

    #[error("formula requires a centered state (center_r = center_p = 0)")]
    NotCentered,

    #[error("wavefunction is not normalized: measured norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("gauge function has no gradient")]
    GaugeWithoutGradient,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("density has non-integrable modulus")]
    NonIntegrable,

    #[error("{divergent} of {total} trajectories diverged (limit is 1%)")]
    TooManyDivergent { divergent: usize, total: usize },

    #[error("time step {dt} exceeds the explicit stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("time series do not overlap")]
    DisjointSeries,

    #[error("series mismatch: {0}")]
    SeriesMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite (got {value})")))
    }
}

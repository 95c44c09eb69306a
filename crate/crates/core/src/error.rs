use alloc::boxed::Box;

/// Errors raised by the sensor models.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("laminate must have one or two layers, got {0}")]
    LayerCount(usize),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("deflection profile is undefined once the diaphragm touches (contact radius {0} m)")]
    TouchedState(f64),

    #[error("touch-mode capacitance needs a touched state (contact radius is zero)")]
    UntouchedState,

    #[error("center deflection {deflection} m reaches the effective gap {effective_gap} m")]
    GapClosed { deflection: f64, effective_gap: f64 },

    #[error(
        "touch mode needs a dielectric layer on the back plate (dielectric thickness is zero)"
    )]
    MissingDielectric,

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("singular linear system (zero pivot in column {0})")]
    SingularSystem(usize),

    #[error("grid too coarse: {0} nodes, at least 16 required")]
    GridTooCoarse(usize),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("{what} must be strictly increasing (violated at index {index})")]
    NotIncreasing { what: &'static str, index: usize },

    #[error("no detectable step: amplitude {amplitude} is below 5x the baseline noise {noise}")]
    NoStep { amplitude: f64, noise: f64 },

    #[error("expected a {expected} series")]
    WrongSeriesKind { expected: &'static str },

    #[error("at point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<ModelError>,
    },
}

pub type Result<T, E = ModelError> = core::result::Result<T, E>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

//! Model calibration against measured data, mode segmentation, sensitivity
//! and rise-time extraction.

mod fit;
mod metrics;
mod segment;
mod series;

pub use fit::{
    fit_model, FitLoss, FitParameter, FitResult, FitSettings, FittedParameter, ParameterBound,
};
pub use metrics::{rise_time, rise_time_with, sensitivity_linearity, RiseTimeSettings};
pub use segment::{segment_modes, ModeSegmentation, SegmentFit, MIN_SEGMENTATION_SAMPLES};
pub use series::{MeasuredSeries, SeriesKind};

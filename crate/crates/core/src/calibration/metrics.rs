use alloc::vec::Vec;

use crate::error::{ModelError, Result};
use crate::stats::{fit_line, median, std_dev, LinearFit};

use super::series::{MeasuredSeries, SeriesKind};

/// Least-squares sensitivity (F/Pa) and R² over samples with `lo ≤ P ≤ hi`.
pub fn sensitivity_linearity(data: &MeasuredSeries, lo: f64, hi: f64) -> Result<LinearFit> {
    data.expect(SeriesKind::PressureCapacitance)?;
    let (p, c): (Vec<f64>, Vec<f64>) = data
        .abscissa()
        .iter()
        .zip(data.capacitance())
        .filter(|(p, _)| **p >= lo && **p <= hi)
        .map(|(p, c)| (*p, *c))
        .unzip();
    if p.len() < 3 {
        return Err(ModelError::InsufficientData {
            needed: 3,
            got: p.len(),
        });
    }
    fit_line(&p, &c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiseTimeSettings {
    /// Lower crossing level as a fraction of the step amplitude.
    pub low_fraction: f64,
    /// Upper crossing level as a fraction of the step amplitude.
    pub high_fraction: f64,
    /// Share of samples at each end used for the baseline and plateau medians.
    pub window_fraction: f64,
    /// A step must exceed this multiple of the baseline standard deviation.
    pub noise_factor: f64,
}

impl Default for RiseTimeSettings {
    fn default() -> Self {
        Self {
            low_fraction: 0.1,
            high_fraction: 0.9,
            window_fraction: 0.1,
            noise_factor: 5.0,
        }
    }
}

/// 10–90% rise time (s) of a step response.
pub fn rise_time(data: &MeasuredSeries) -> Result<f64> {
    rise_time_with(data, &RiseTimeSettings::default())
}

/// Rise time between the configured crossing levels.
///
/// Baseline and plateau are the medians of the first and last
/// `window_fraction` of the samples; crossings are located by linear
/// interpolation. Falling steps are handled symmetrically.
pub fn rise_time_with(data: &MeasuredSeries, settings: &RiseTimeSettings) -> Result<f64> {
    data.expect(SeriesKind::TimeCapacitance)?;
    if !(0.0 < settings.low_fraction
        && settings.low_fraction < settings.high_fraction
        && settings.high_fraction < 1.0)
    {
        return Err(ModelError::InvalidParameter {
            name: "high_fraction",
            value: settings.high_fraction,
            reason: "crossing levels must satisfy 0 < low < high < 1",
        });
    }
    if !(settings.window_fraction > 0.0 && settings.window_fraction < 0.5) {
        return Err(ModelError::InvalidParameter {
            name: "window_fraction",
            value: settings.window_fraction,
            reason: "must lie in (0, 0.5)",
        });
    }
    let n = data.len();
    if n < 4 {
        return Err(ModelError::InsufficientData { needed: 4, got: n });
    }
    let t = data.abscissa();
    let c = data.capacitance();
    let m = ((n as f64 * settings.window_fraction) as usize).max(1);
    let baseline = median(&c[..m]);
    let plateau = median(&c[n - m..]);
    let amplitude = plateau - baseline;
    let noise = std_dev(&c[..m]);
    if amplitude == 0.0 || amplitude.abs() <= settings.noise_factor * noise {
        return Err(ModelError::NoStep {
            amplitude: amplitude.abs(),
            noise,
        });
    }
    let level = |i: usize| (c[i] - baseline) / amplitude;
    let crossing = |from: usize, target: f64| -> Option<(usize, f64)> {
        (from.max(1)..n).find(|&i| level(i) >= target).map(|i| {
            let (y0, y1) = (level(i - 1), level(i));
            let time = if y1 == y0 || y0 >= target {
                t[i]
            } else {
                t[i - 1] + (target - y0) / (y1 - y0) * (t[i] - t[i - 1])
            };
            (i, time)
        })
    };
    let (i_low, t_low) = crossing(1, settings.low_fraction).ok_or(ModelError::NoStep {
        amplitude: amplitude.abs(),
        noise,
    })?;
    let (_, t_high) = crossing(i_low, settings.high_fraction).ok_or(ModelError::NoStep {
        amplitude: amplitude.abs(),
        noise,
    })?;
    Ok(t_high - t_low)
}

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SeriesKind {
    /// Abscissa is pressure (Pa).
    PressureCapacitance,
    /// Abscissa is time (s).
    TimeCapacitance,
}

impl SeriesKind {
    pub fn abscissa_name(self) -> &'static str {
        match self {
            Self::PressureCapacitance => "pressure_pa",
            Self::TimeCapacitance => "time_s",
        }
    }
}

/// Capacitance samples (F) against a strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasuredSeries {
    kind: SeriesKind,
    abscissa: Vec<f64>,
    capacitance: Vec<f64>,
    label: String,
}

impl MeasuredSeries {
    pub fn new(
        kind: SeriesKind,
        abscissa: Vec<f64>,
        capacitance: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if abscissa.len() != capacitance.len() {
            return Err(ModelError::Degenerate(
                "abscissa and capacitance lengths differ",
            ));
        }
        if let Some(bad) = abscissa.iter().chain(&capacitance).find(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "sample",
                value: *bad,
                reason: "must be finite",
            });
        }
        if let Some(i) = abscissa.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ModelError::NotIncreasing {
                what: kind.abscissa_name(),
                index: i + 1,
            });
        }
        Ok(Self {
            kind,
            abscissa,
            capacitance,
            label: label.into(),
        })
    }

    pub fn pressure(
        pressure: Vec<f64>,
        capacitance: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::new(
            SeriesKind::PressureCapacitance,
            pressure,
            capacitance,
            label,
        )
    }

    pub fn time(time: Vec<f64>, capacitance: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(SeriesKind::TimeCapacitance, time, capacitance, label)
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn capacitance(&self) -> &[f64] {
        &self.capacitance
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub(crate) fn expect(&self, kind: SeriesKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(ModelError::WrongSeriesKind {
                expected: match kind {
                    SeriesKind::PressureCapacitance => "pressure-capacitance",
                    SeriesKind::TimeCapacitance => "time-capacitance",
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validation() {
        assert!(MeasuredSeries::pressure(vec![0.0, 1.0], vec![1.0], "x").is_err());
        assert_eq!(
            MeasuredSeries::pressure(vec![0.0, 1.0, 1.0], vec![1.0; 3], "x").unwrap_err(),
            ModelError::NotIncreasing {
                what: "pressure_pa",
                index: 2
            }
        );
        assert!(MeasuredSeries::time(vec![0.0, 1.0], vec![1.0, f64::NAN], "x").is_err());
        let s = MeasuredSeries::time(vec![0.0, 1.0], vec![1.0, 2.0], "step").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.expect(SeriesKind::PressureCapacitance).is_err());
    }
}

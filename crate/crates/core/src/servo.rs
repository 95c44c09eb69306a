//! Clamped affine map from sensor input to actuator angle.

use crate::error::{ModelError, Result};

/// Maps inputs in `[p_min, p_max]` linearly onto `[angle_min, angle_max]` degrees.
///
/// The input is normally pressure (Pa) but any monotone sensor quantity works,
/// e.g. capacitance in farad.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ServoMap {
    p_min: f64,
    p_max: f64,
    angle_min: f64,
    angle_max: f64,
}

impl ServoMap {
    pub fn new(p_min: f64, p_max: f64, angle_min: f64, angle_max: f64) -> Result<Self> {
        let finite = [p_min, p_max, angle_min, angle_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || p_min >= p_max {
            return Err(ModelError::InvalidParameter {
                name: "p_max",
                value: p_max,
                reason: "input range must be finite with p_min < p_max",
            });
        }
        if angle_min >= angle_max {
            return Err(ModelError::InvalidParameter {
                name: "angle_max",
                value: angle_max,
                reason: "angle range must satisfy angle_min < angle_max",
            });
        }
        Ok(Self {
            p_min,
            p_max,
            angle_min,
            angle_max,
        })
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn angle_min(&self) -> f64 {
        self.angle_min
    }

    pub fn angle_max(&self) -> f64 {
        self.angle_max
    }

    /// Angle in degrees, clamped to `[angle_min, angle_max]`.
    pub fn angle(&self, input: f64) -> f64 {
        if input <= self.p_min {
            return self.angle_min;
        }
        if input >= self.p_max {
            return self.angle_max;
        }
        let t = (input - self.p_min) / (self.p_max - self.p_min);
        (self.angle_min + (self.angle_max - self.angle_min) * t)
            .clamp(self.angle_min, self.angle_max)
    }
}

impl Default for ServoMap {
    /// 10 kPa → 0°, 40 kPa → 90°.
    fn default() -> Self {
        Self {
            p_min: 10e3,
            p_max: 40e3,
            angle_min: 0.0,
            angle_max: 90.0,
        }
    }
}

/// Free-function form of [`ServoMap::angle`].
pub fn servo_angle(map: &ServoMap, pressure: f64) -> f64 {
    map.angle(pressure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_midpoint_and_clamping() {
        let m = ServoMap::default();
        assert_eq!(m.angle(10e3), 0.0);
        assert_eq!(m.angle(40e3), 90.0);
        assert_eq!(m.angle(25e3), 45.0);
        assert_eq!(m.angle(5e3), 0.0);
        assert_eq!(m.angle(60e3), 90.0);
    }

    #[test]
    fn invalid_ranges() {
        assert!(ServoMap::new(1.0, 1.0, 0.0, 90.0).is_err());
        assert!(ServoMap::new(0.0, 1.0, 90.0, 0.0).is_err());
        assert!(ServoMap::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_idempotent(a in -1e5..1e5f64, b in -1e5..1e5f64) {
            let m = ServoMap::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.angle(lo) <= m.angle(hi));
            let clamped = a.clamp(m.p_min(), m.p_max());
            prop_assert_eq!(m.angle(clamped), m.angle(a));
        }
    }
}

//! Clamped circular diaphragm under uniform pressure: center deflection in the
//! small- and large-deflection regimes, deflection profile, contact radius and
//! operating-mode classification.

use core::fmt;
use core::str::FromStr;

use crate::error::{check_non_negative, check_positive, ModelError, Result};
use crate::materials::Laminate;
use crate::math::sqrt;

/// Coefficient of the cubic stiffening term of a clamped plate, `0.488 (W₀/h)²`.
pub const LARGE_DEFLECTION_COEFFICIENT: f64 = 0.488;

/// One sensor element: diaphragm, electrode gap and back-plate dielectric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviceGeometry {
    /// Diaphragm radius `R` (m).
    pub radius: f64,
    pub laminate: Laminate,
    /// Air gap between the undeflected diaphragm and the dielectric surface `d` (m).
    pub gap: f64,
    /// Tensile built-in stress `σ` (Pa).
    pub builtin_stress: f64,
    /// Insulating layer on the back electrode `t₁` (m); zero for none.
    pub dielectric_thickness: f64,
    /// Relative permittivity of the insulating layer `ε_t1`.
    pub dielectric_rel_permittivity: f64,
    /// Relative permittivity of the gap medium `ε_r` (air ≈ 1).
    pub medium_rel_permittivity: f64,
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<()> {
        check_positive("radius", self.radius)?;
        check_positive("gap", self.gap)?;
        check_non_negative("builtin_stress", self.builtin_stress)?;
        check_non_negative("dielectric_thickness", self.dielectric_thickness)?;
        check_positive(
            "dielectric_rel_permittivity",
            self.dielectric_rel_permittivity,
        )?;
        check_positive("medium_rel_permittivity", self.medium_rel_permittivity)?;
        Ok(())
    }

    /// Diaphragm thickness `h` (m).
    pub fn thickness(&self) -> f64 {
        self.laminate.total_thickness()
    }

    /// Flexural rigidity `D` of the diaphragm (N·m).
    pub fn rigidity(&self) -> f64 {
        self.laminate.flexural_rigidity()
    }

    /// Free travel of the diaphragm before it lands on the dielectric, `g`.
    pub fn travel(&self) -> f64 {
        self.gap
    }

    /// Medium-equivalent electrode separation of the undeflected stack:
    /// `d + t₁ ε_r / ε_t1` (series combination of gap medium and dielectric).
    pub fn effective_gap(&self) -> f64 {
        self.travel()
            + self.dielectric_thickness * self.medium_rel_permittivity
                / self.dielectric_rel_permittivity
    }

    /// Built-in stress stiffening term `σ h R² / (16 D)`.
    pub fn stress_term(&self) -> f64 {
        self.builtin_stress * self.thickness() * self.radius * self.radius
            / (16.0 * self.rigidity())
    }

    /// Linear plate response without stress, `P R⁴ / (64 D)` (m).
    pub fn plate_load(&self, pressure: f64) -> f64 {
        let r2 = self.radius * self.radius;
        pressure * r2 * r2 / (64.0 * self.rigidity())
    }
}

fn check_pressure(pressure: f64) -> Result<()> {
    check_non_negative("pressure", pressure)
}

/// Small-deflection center deflection with built-in stress:
/// `W₀ = P R⁴ / (64 D) / (1 + σ h R² / 16D)`.
pub fn small_deflection_center(geom: &DeviceGeometry, pressure: f64) -> Result<f64> {
    geom.validate()?;
    check_pressure(pressure)?;
    Ok(geom.plate_load(pressure) / (1.0 + geom.stress_term()))
}

/// Large-deflection center deflection, the root of
/// `W₀ (1 + 0.488 (W₀/h)² + σ h R² / 16D) = P R⁴ / 64D`.
pub fn large_deflection_center(geom: &DeviceGeometry, pressure: f64) -> Result<f64> {
    geom.validate()?;
    check_pressure(pressure)?;
    let h = geom.thickness();
    solve_stiffening_cubic(
        LARGE_DEFLECTION_COEFFICIENT / (h * h),
        1.0 + geom.stress_term(),
        geom.plate_load(pressure),
    )
}

/// Positive root of `k w³ + s w = q` for `k ≥ 0`, `s > 0`, `q ≥ 0`.
///
/// The left side is increasing and convex on `w ≥ 0`, so Newton started from
/// the upper bracket `q / s` descends monotonically; a bisection fallback keeps
/// every iterate inside the bracket.
pub(crate) fn solve_stiffening_cubic(k: f64, s: f64, q: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(0.0);
    }
    let residual = |w: f64| w * (k * w * w + s) - q;
    let (mut lo, mut hi) = (0.0_f64, q / s);
    let mut w = hi;
    for _ in 0..200 {
        let f = residual(w);
        if f.abs() <= 4.0 * f64::EPSILON * q {
            return Ok(w);
        }
        if f > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let mut next = w - f / (3.0 * k * w * w + s);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == w {
            break;
        }
        w = next;
    }
    if residual(w).abs() <= 1e-12 * q {
        Ok(w)
    } else {
        Err(ModelError::NonConvergence("large-deflection root solve"))
    }
}

/// Radius where the free profile `W₀ (1 - (r/R)²)²` reaches the travel `g`;
/// zero while `W₀ < g`.
pub fn contact_radius_for_deflection(radius: f64, travel: f64, center_deflection: f64) -> f64 {
    if center_deflection < travel || center_deflection <= 0.0 {
        0.0
    } else {
        radius * sqrt(1.0 - sqrt(travel / center_deflection))
    }
}

/// Contact radius `a` of the diaphragm on the dielectric at `pressure` (m).
///
/// Uses the unconstrained large-deflection center deflection and the
/// intersection of the free profile with the travel `g`:
/// `a = R sqrt(1 - sqrt(g / W₀))` once `W₀ ≥ g`.
pub fn contact_radius(geom: &DeviceGeometry, pressure: f64) -> Result<f64> {
    let w0 = large_deflection_center(geom, pressure)?;
    Ok(contact_radius_for_deflection(
        geom.radius,
        geom.travel(),
        w0,
    ))
}

/// Normal-mode design bound: one third of the electrode gap (m).
pub fn pullin_safe_deflection(geom: &DeviceGeometry) -> f64 {
    geom.gap / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeflectionRegime {
    SmallLinear,
    LargeNonlinear,
}

/// Applied pressure and the resulting diaphragm shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionState {
    pub pressure: f64,
    /// Center deflection, capped at the travel `g` once touching (m).
    pub center_deflection: f64,
    /// Center deflection ignoring the back plate (m); drives the contact model.
    pub unconstrained_deflection: f64,
    pub regime: DeflectionRegime,
    /// Contact radius `a` (m), zero when untouched.
    pub contact_radius: f64,
}

impl DeflectionState {
    /// Solves the center deflection at `pressure` with the chosen regime.
    pub fn solve(geom: &DeviceGeometry, pressure: f64, regime: DeflectionRegime) -> Result<Self> {
        let w0 = match regime {
            DeflectionRegime::SmallLinear => small_deflection_center(geom, pressure)?,
            DeflectionRegime::LargeNonlinear => large_deflection_center(geom, pressure)?,
        };
        Ok(Self::from_unconstrained(geom, pressure, w0, regime))
    }

    /// Builds a state from a known unconstrained center deflection.
    pub fn from_unconstrained(
        geom: &DeviceGeometry,
        pressure: f64,
        unconstrained_deflection: f64,
        regime: DeflectionRegime,
    ) -> Self {
        let g = geom.travel();
        Self {
            pressure,
            center_deflection: unconstrained_deflection.min(g),
            unconstrained_deflection,
            regime,
            contact_radius: contact_radius_for_deflection(geom.radius, g, unconstrained_deflection),
        }
    }

    pub fn is_touching(&self) -> bool {
        self.contact_radius > 0.0
    }
}

/// Free deflection profile `W(r) = W₀ (1 - (r/R)²)²` of an untouched diaphragm (m).
pub fn deflection_profile(state: &DeflectionState, geom: &DeviceGeometry, r: f64) -> Result<f64> {
    if state.is_touching() {
        return Err(ModelError::TouchedState(state.contact_radius));
    }
    if !(r >= 0.0 && r <= geom.radius) {
        return Err(ModelError::OutOfRange {
            what: "radial position",
            value: r,
            lo: 0.0,
            hi: geom.radius,
        });
    }
    let u = 1.0 - (r / geom.radius) * (r / geom.radius);
    Ok(state.center_deflection * u * u)
}

/// The four operating modes of a touch-mode sensor, in order of increasing pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OperatingMode {
    Normal,
    Transition,
    Touch,
    Saturation,
}

impl OperatingMode {
    pub const ALL: [OperatingMode; 4] = [
        OperatingMode::Normal,
        OperatingMode::Transition,
        OperatingMode::Touch,
        OperatingMode::Saturation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Transition => "transition",
            Self::Touch => "touch",
            Self::Saturation => "saturation",
        }
    }
}

impl fmt::Display for OperatingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatingMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or(ModelError::Degenerate("unknown operating mode label"))
    }
}

/// Configurable mode boundaries.
///
/// - Normal while `W₀ < transition_fraction · g`
/// - Transition until the contact radius reaches `onset_contact_fraction · R`
/// - Touch until it reaches `saturation_contact_fraction · R`
/// - Saturation beyond
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeThresholds {
    pub transition_fraction: f64,
    pub onset_contact_fraction: f64,
    pub saturation_contact_fraction: f64,
}

impl Default for ModeThresholds {
    fn default() -> Self {
        Self {
            transition_fraction: 2.0 / 3.0,
            onset_contact_fraction: 0.05,
            saturation_contact_fraction: 0.6,
        }
    }
}

impl ModeThresholds {
    pub fn validate(&self) -> Result<()> {
        let unit = |name, value: f64| {
            if value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in (0, 1)",
                })
            }
        };
        unit("transition_fraction", self.transition_fraction)?;
        unit("onset_contact_fraction", self.onset_contact_fraction)?;
        unit(
            "saturation_contact_fraction",
            self.saturation_contact_fraction,
        )?;
        if self.onset_contact_fraction >= self.saturation_contact_fraction {
            return Err(ModelError::InvalidParameter {
                name: "onset_contact_fraction",
                value: self.onset_contact_fraction,
                reason: "must be below saturation_contact_fraction",
            });
        }
        Ok(())
    }

    /// Mode of a diaphragm with unconstrained center deflection `w0`.
    pub fn classify(&self, geom: &DeviceGeometry, w0: f64) -> OperatingMode {
        let g = geom.travel();
        if w0 < self.transition_fraction * g {
            return OperatingMode::Normal;
        }
        let frac = contact_radius_for_deflection(geom.radius, g, w0) / geom.radius;
        if frac < self.onset_contact_fraction {
            OperatingMode::Transition
        } else if frac < self.saturation_contact_fraction {
            OperatingMode::Touch
        } else {
            OperatingMode::Saturation
        }
    }
}

/// Operating mode at `pressure`, driven by the large-deflection solution.
pub fn classify_mode(
    geom: &DeviceGeometry,
    pressure: f64,
    thresholds: &ModeThresholds,
) -> Result<OperatingMode> {
    thresholds.validate()?;
    let w0 = large_deflection_center(geom, pressure)?;
    Ok(thresholds.classify(geom, w0))
}

//! Sensor capacitance in every operating mode and C–P sweeps.
//!
//! Separations are medium-equivalent: the dielectric layer of thickness `t₁`
//! counts as `t₁ ε_r / ε_t1`, so the undeflected stack has
//! `d_eff = d + t₁ ε_r / ε_t1` and a touched region has `t₁ ε_r / ε_t1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_non_negative, ModelError, Result};
use crate::math::{atanh_sqrt_ratio, ln, sqrt};
use crate::mechanics::{
    large_deflection_center, DeflectionRegime, DeflectionState, DeviceGeometry, ModeThresholds,
    OperatingMode,
};
use crate::quad::{integrate_checked, QuadSettings};

/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// How the touch-mode capacitance is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CapacitanceMethod {
    /// Exact antiderivative of the annulus integral.
    ClosedForm,
    /// Adaptive quadrature of the annulus integral.
    #[default]
    Quadrature,
    /// Direct evaluation of the published `δ`, `A₁`, `A₂` expression
    /// (`a` = contact radius, `b` = diaphragm radius). Diagnostic only.
    Literal,
}

/// Touch-mode capacitance split into the touched disk and the free annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacitanceBreakdown {
    pub total: f64,
    pub touched_part: f64,
    pub untouched_part: f64,
    pub method: CapacitanceMethod,
}

/// Parallel-plate capacitance of the undeflected sensor, `ε₀ ε_r π R² / d_eff`.
pub fn base_capacitance(geom: &DeviceGeometry) -> f64 {
    EPSILON_0 * geom.medium_rel_permittivity * PI * geom.radius * geom.radius / geom.effective_gap()
}

fn check_open_gap(geom: &DeviceGeometry, w0: f64) -> Result<f64> {
    check_non_negative("center deflection", w0)?;
    let d = geom.effective_gap();
    if w0 >= d {
        return Err(ModelError::GapClosed {
            deflection: w0,
            effective_gap: d,
        });
    }
    Ok(d)
}

/// Normal-mode capacitance for a free profile with center deflection `w0`:
/// `C₀ · atanh(√(W₀/d_eff)) / √(W₀/d_eff)`.
pub fn normal_mode_capacitance_at(geom: &DeviceGeometry, w0: f64) -> Result<f64> {
    let d = check_open_gap(geom, w0)?;
    Ok(base_capacitance(geom) * atanh_sqrt_ratio(w0 / d))
}

/// Normal-mode capacitance of an untouched deflection state.
pub fn normal_mode_capacitance(geom: &DeviceGeometry, state: &DeflectionState) -> Result<f64> {
    if state.is_touching() {
        return Err(ModelError::TouchedState(state.contact_radius));
    }
    normal_mode_capacitance_at(geom, state.center_deflection)
}

/// Normal-mode capacitance by adaptive quadrature of
/// `∫₀ᴿ 2π ε₀ ε_r r / (d_eff − W(r)) dr`.
pub fn normal_mode_capacitance_quadrature(
    geom: &DeviceGeometry,
    w0: f64,
    quad: &QuadSettings,
) -> Result<f64> {
    let d = check_open_gap(geom, w0)?;
    let r_outer = geom.radius;
    let scale = 2.0 * PI * EPSILON_0 * geom.medium_rel_permittivity;
    integrate_checked(
        |r| {
            let u = 1.0 - (r / r_outer) * (r / r_outer);
            scale * r / (d - w0 * u * u)
        },
        0.0,
        r_outer,
        quad,
    )
}

/// Touch-mode capacitance at `pressure` with the canonical quadrature method.
pub fn touch_mode_capacitance(
    geom: &DeviceGeometry,
    pressure: f64,
) -> Result<CapacitanceBreakdown> {
    let state = DeflectionState::solve(geom, pressure, DeflectionRegime::LargeNonlinear)?;
    touch_mode_capacitance_with(
        geom,
        &state,
        CapacitanceMethod::Quadrature,
        &QuadSettings::default(),
    )
}

/// Touch-mode capacitance of a touched state.
///
/// The disk `r < a` rests on the dielectric; the annulus follows
/// `W(r) = g [(1 − (r/R)²) / (1 − (a/R)²)]²`, which meets the dielectric at
/// `(a, g)` and stays clamped at `R`.
pub fn touch_mode_capacitance_with(
    geom: &DeviceGeometry,
    state: &DeflectionState,
    method: CapacitanceMethod,
    quad: &QuadSettings,
) -> Result<CapacitanceBreakdown> {
    geom.validate()?;
    if !state.is_touching() {
        return Err(ModelError::UntouchedState);
    }
    let t1 = geom.dielectric_thickness;
    if t1 == 0.0 {
        return Err(ModelError::MissingDielectric);
    }
    let r_outer = geom.radius;
    let a = state.contact_radius;
    let g = geom.travel();
    let d = geom.effective_gap();
    let touched_part = EPSILON_0 * geom.dielectric_rel_permittivity * PI * a * a / t1;
    let alpha2 = (a / r_outer) * (a / r_outer);

    let untouched_part = match method {
        CapacitanceMethod::ClosedForm => {
            // substituting u = (1 − ρ²)/(1 − α²) maps the annulus onto the
            // free-profile integral at W₀ = g, scaled by the annulus fraction
            (1.0 - alpha2) * base_capacitance(geom) * atanh_sqrt_ratio(g / d)
        }
        CapacitanceMethod::Quadrature => {
            let scale = 2.0 * PI * EPSILON_0 * geom.medium_rel_permittivity;
            let denom = 1.0 - alpha2;
            integrate_checked(
                |r| {
                    let u = (1.0 - (r / r_outer) * (r / r_outer)) / denom;
                    scale * r / (d - g * u * u)
                },
                a,
                r_outer,
                quad,
            )?
        }
        CapacitanceMethod::Literal => {
            let w0 = state.unconstrained_deflection;
            let eps_t1 = geom.dielectric_rel_permittivity;
            let delta = EPSILON_0 * w0 / (t1 + geom.gap * eps_t1);
            let root = sqrt(delta);
            let a1 = ln(((1.0 + root) / (1.0 - root)).abs());
            let a2 = 1.0 / (1.0 - delta)
                - 2.0 * delta / (3.0 * (1.0 - delta))
                - delta * (3.0 * delta + 1.0)
                    / (5.0 * (delta - 1.0) * (delta - 1.0) * (delta - 1.0));
            let value =
                2.0 * PI * delta * eps_t1 / w0 * (r_outer * r_outer * a1 + a * r_outer * a2);
            if !value.is_finite() {
                return Err(ModelError::Degenerate(
                    "literal touch-mode expression is not finite",
                ));
            }
            value
        }
    };
    Ok(CapacitanceBreakdown {
        total: touched_part + untouched_part,
        touched_part,
        untouched_part,
        method,
    })
}

/// Evaluation settings shared by [`capacitance_at`] and [`sweep_cp_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepSettings {
    pub method: CapacitanceMethod,
    pub quad: QuadSettings,
    pub thresholds: ModeThresholds,
}

/// One sample of a C–P curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CpPoint {
    pub pressure: f64,
    pub capacitance: f64,
    pub mode: OperatingMode,
    pub center_deflection: f64,
    pub contact_radius: f64,
}

/// Capacitance at one pressure, choosing the normal- or touch-mode path from
/// the large-deflection contact state.
pub fn capacitance_at(
    geom: &DeviceGeometry,
    pressure: f64,
    settings: &SweepSettings,
) -> Result<CpPoint> {
    settings.thresholds.validate()?;
    let w0 = large_deflection_center(geom, pressure)?;
    let state =
        DeflectionState::from_unconstrained(geom, pressure, w0, DeflectionRegime::LargeNonlinear);
    let capacitance = if state.is_touching() {
        touch_mode_capacitance_with(geom, &state, settings.method, &settings.quad)?.total
    } else {
        match settings.method {
            CapacitanceMethod::Quadrature => {
                normal_mode_capacitance_quadrature(geom, state.center_deflection, &settings.quad)?
            }
            _ => normal_mode_capacitance(geom, &state)?,
        }
    };
    Ok(CpPoint {
        pressure,
        capacitance,
        mode: settings.thresholds.classify(geom, w0),
        center_deflection: state.center_deflection,
        contact_radius: state.contact_radius,
    })
}

/// Capacitance–pressure characteristic.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CpCurve {
    /// Fingerprint of the geometry that produced the curve, see [`geometry_id`].
    pub geometry_id: String,
    pub points: Vec<CpPoint>,
}

impl CpCurve {
    pub fn pressures(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.pressure).collect()
    }

    pub fn capacitances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.capacitance).collect()
    }
}

/// Sweeps `pressures` (strictly increasing, non-negative).
pub fn sweep_cp_curve(
    geom: &DeviceGeometry,
    pressures: &[f64],
    settings: &SweepSettings,
) -> Result<CpCurve> {
    geom.validate()?;
    for (i, w) in pressures.windows(2).enumerate() {
        if w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater) {
            return Err(ModelError::NotIncreasing {
                what: "pressures",
                index: i + 1,
            });
        }
    }
    let points = pressures
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            capacitance_at(geom, p, settings).map_err(|e| ModelError::AtPoint {
                index,
                source: alloc::boxed::Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CpCurve {
        geometry_id: geometry_id(geom),
        points,
    })
}

/// Stable 64-bit FNV-1a fingerprint of every geometry field, as 16 hex digits.
pub fn geometry_id(geom: &DeviceGeometry) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for v in [
        geom.radius,
        geom.gap,
        geom.builtin_stress,
        geom.dielectric_thickness,
        geom.dielectric_rel_permittivity,
        geom.medium_rel_permittivity,
    ] {
        feed(&v.to_bits().to_le_bytes());
    }
    for layer in geom.laminate.layers() {
        feed(layer.name.as_bytes());
        for v in [layer.youngs_modulus, layer.poisson_ratio, layer.thickness] {
            feed(&v.to_bits().to_le_bytes());
        }
    }
    feed(&[geom.laminate.weight() as u8]);
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::typical;
    use crate::math::rel_diff;

    fn full_scale() -> DeviceGeometry {
        DeviceGeometry {
            radius: 0.01,
            laminate: typical::al_on_polyimide(),
            gap: 400e-6,
            builtin_stress: 0.0,
            dielectric_thickness: 0.0,
            dielectric_rel_permittivity: 1.0,
            medium_rel_permittivity: 1.0,
        }
    }

    fn with_dielectric() -> DeviceGeometry {
        DeviceGeometry {
            dielectric_thickness: 50e-6,
            dielectric_rel_permittivity: 3.4,
            ..full_scale()
        }
    }

    // ε₀ π (0.01)² / 400e-6, 40-digit arithmetic
    const GOLDEN_C0: f64 = 6.954_062_846_549_19e-12;

    #[test]
    fn base_capacitance_golden_and_scaling() {
        let g = full_scale();
        assert!(rel_diff(base_capacitance(&g), GOLDEN_C0) < 1e-15);
        let doubled = DeviceGeometry {
            gap: 800e-6,
            ..full_scale()
        };
        assert!(rel_diff(base_capacitance(&doubled), GOLDEN_C0 / 2.0) < 1e-15);
        let wide = DeviceGeometry {
            radius: 0.02,
            ..full_scale()
        };
        assert!(rel_diff(base_capacitance(&wide), 4.0 * GOLDEN_C0) < 1e-15);
    }

    #[test]
    fn dielectric_adds_series_gap() {
        let g = with_dielectric();
        assert!(rel_diff(g.effective_gap(), 400e-6 + 50e-6 / 3.4) < 1e-15);
    }

    #[test]
    fn flat_diaphragm_gives_base_capacitance() {
        let g = full_scale();
        assert_eq!(
            normal_mode_capacitance_at(&g, 0.0).unwrap(),
            base_capacitance(&g)
        );
    }

    #[test]
    fn normal_mode_closed_form_matches_quadrature() {
        let g = with_dielectric();
        let d = g.effective_gap();
        for frac in [1e-6, 0.01, 0.5, 0.9, 0.95, 0.999] {
            let cf = normal_mode_capacitance_at(&g, frac * d).unwrap();
            let q =
                normal_mode_capacitance_quadrature(&g, frac * d, &QuadSettings::default()).unwrap();
            assert!(rel_diff(cf, q) < 1e-9, "{frac}: {cf} vs {q}");
        }
    }

    #[test]
    fn normal_mode_rejects_closed_gap() {
        let g = full_scale();
        assert!(matches!(
            normal_mode_capacitance_at(&g, g.effective_gap()),
            Err(ModelError::GapClosed { .. })
        ));
        let touched = DeflectionState::from_unconstrained(
            &g,
            1.0,
            2.0 * g.gap,
            DeflectionRegime::LargeNonlinear,
        );
        assert!(normal_mode_capacitance(&g, &touched).is_err());
    }

    #[test]
    fn touch_mode_parts_for_half_radius_contact() {
        let g = with_dielectric();
        // a = R/2 ⇔ sqrt(g/W0) = 3/4
        let w0 = g.gap / (0.75 * 0.75);
        let state =
            DeflectionState::from_unconstrained(&g, 1.0, w0, DeflectionRegime::LargeNonlinear);
        assert!(rel_diff(state.contact_radius, 0.005) < 1e-14);
        let q = touch_mode_capacitance_with(
            &g,
            &state,
            CapacitanceMethod::Quadrature,
            &QuadSettings::default(),
        )
        .unwrap();
        let cf = touch_mode_capacitance_with(
            &g,
            &state,
            CapacitanceMethod::ClosedForm,
            &QuadSettings::default(),
        )
        .unwrap();
        let disk = EPSILON_0 * 3.4 * PI * 0.005 * 0.005 / 50e-6;
        assert!(rel_diff(q.touched_part, disk) < 1e-15);
        assert!(rel_diff(q.untouched_part, cf.untouched_part) < 1e-9);
        assert!(rel_diff(q.total, q.touched_part + q.untouched_part) < 1e-15);
    }

    #[test]
    fn touch_mode_requires_contact_and_dielectric() {
        let g = with_dielectric();
        let free = DeflectionState::from_unconstrained(
            &g,
            1.0,
            0.5 * g.gap,
            DeflectionRegime::LargeNonlinear,
        );
        assert!(matches!(
            touch_mode_capacitance_with(
                &g,
                &free,
                CapacitanceMethod::Quadrature,
                &QuadSettings::default()
            ),
            Err(ModelError::UntouchedState)
        ));
        let bare = full_scale();
        let touched = DeflectionState::from_unconstrained(
            &bare,
            1.0,
            2.0 * bare.gap,
            DeflectionRegime::LargeNonlinear,
        );
        assert!(matches!(
            touch_mode_capacitance_with(
                &bare,
                &touched,
                CapacitanceMethod::ClosedForm,
                &QuadSettings::default()
            ),
            Err(ModelError::MissingDielectric)
        ));
    }

    #[test]
    fn literal_form_is_finite_and_positive() {
        let g = with_dielectric();
        let state = DeflectionState::from_unconstrained(
            &g,
            1.0,
            2.0 * g.gap,
            DeflectionRegime::LargeNonlinear,
        );
        let lit = touch_mode_capacitance_with(
            &g,
            &state,
            CapacitanceMethod::Literal,
            &QuadSettings::default(),
        )
        .unwrap();
        assert!(lit.untouched_part.is_finite() && lit.untouched_part > 0.0);
        assert_eq!(lit.method, CapacitanceMethod::Literal);
    }

    #[test]
    fn sweep_rejects_unsorted_pressures() {
        let g = with_dielectric();
        let err = sweep_cp_curve(&g, &[0.0, 2.0, 2.0], &SweepSettings::default()).unwrap_err();
        assert_eq!(
            err,
            ModelError::NotIncreasing {
                what: "pressures",
                index: 2
            }
        );
    }

    #[test]
    fn sweep_single_zero_point() {
        let g = with_dielectric();
        let c = sweep_cp_curve(&g, &[0.0], &SweepSettings::default()).unwrap();
        assert_eq!(c.points.len(), 1);
        assert!(rel_diff(c.points[0].capacitance, base_capacitance(&g)) < 1e-12);
        assert_eq!(c.points[0].mode, OperatingMode::Normal);
    }

    #[test]
    fn sweep_errors_carry_index() {
        let g = full_scale();
        // bare electrode: touching at high pressure has no dielectric
        let err = sweep_cp_curve(&g, &[0.0, 1e3, 1e6], &SweepSettings::default()).unwrap_err();
        match err {
            ModelError::AtPoint { index, source } => {
                assert_eq!(index, 2);
                assert_eq!(*source, ModelError::MissingDielectric);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn geometry_id_is_stable_and_sensitive() {
        let a = geometry_id(&with_dielectric());
        assert_eq!(a, geometry_id(&with_dielectric()));
        assert_eq!(a.len(), 16);
        let mut other = with_dielectric();
        other.gap = 401e-6;
        assert_ne!(a, geometry_id(&other));
    }
}

//! Models for touch-mode capacitive pressure sensors built on clamped
//! circular composite diaphragms.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`materials`]: layered diaphragm stiffness (neutral plane, flexural rigidity)
//! - [`mechanics`]: center deflection in the small/large deflection regimes,
//!   contact radius and operating-mode classification
//! - [`capacitance`]: base, normal-mode and touch-mode capacitance plus C–P sweeps
//! - [`plate_fd`]: axisymmetric finite-difference biharmonic plate solver
//! - [`calibration`]: model fitting, mode segmentation, linearity and rise time
//! - [`servo`]: affine pressure-to-angle mapping
//!
//! File formats, configuration and the command-line front end live in the
//! `touchcap` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod capacitance;
mod error;
pub mod linalg;
pub mod materials;
pub mod math;
pub mod mechanics;
pub mod plate_fd;
pub mod quad;
pub mod servo;
pub mod stats;

pub use error::{ModelError, Result};

pub use capacitance::{
    base_capacitance, capacitance_at, normal_mode_capacitance, sweep_cp_curve,
    touch_mode_capacitance, CapacitanceBreakdown, CapacitanceMethod, CpCurve, CpPoint, EPSILON_0,
};
pub use materials::{Laminate, MaterialLayer, NeutralPlaneWeight};
pub use mechanics::{
    classify_mode, contact_radius, large_deflection_center, pullin_safe_deflection,
    small_deflection_center, DeflectionRegime, DeflectionState, DeviceGeometry, ModeThresholds,
    OperatingMode,
};
pub use servo::ServoMap;

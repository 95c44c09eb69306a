//! Device configuration: a JSON document with SI units spelled out in the
//! field names.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use touchcap_core::calibration::{FitLoss, FitParameter, FitSettings, ParameterBound};
use touchcap_core::capacitance::{CapacitanceMethod, SweepSettings};
use touchcap_core::plate_fd::MIN_NODES;
use touchcap_core::quad::QuadSettings;
use touchcap_core::{DeviceGeometry, Laminate, MaterialLayer, ModeThresholds, ServoMap};

use crate::error::CliError;

/// The configuration bundled with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub youngs_modulus_pa: f64,
    pub poisson_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub material: String,
    pub thickness_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub radius_m: f64,
    /// Bottom layer first.
    pub layers: Vec<LayerSpec>,
    pub gap_m: f64,
    pub builtin_stress_pa: f64,
    pub dielectric_thickness_m: f64,
    pub dielectric_rel_permittivity: f64,
    pub medium_rel_permittivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub start_pa: f64,
    pub end_pa: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub capacitance_method: CapacitanceMethod,
    pub quad_rel_tol: f64,
    pub quad_max_subintervals: usize,
    pub grid_nodes: usize,
    pub convergence_nodes: Vec<usize>,
    pub validation_pressure_pa: f64,
    pub linearity_pressures_pa: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBounds {
    pub gap_m: [f64; 2],
    pub builtin_stress_pa: [f64; 2],
    pub dielectric_thickness_m: [f64; 2],
    pub dielectric_rel_permittivity: [f64; 2],
    pub parasitic_offset_f: [f64; 2],
}

impl FitBounds {
    pub fn get(&self, param: FitParameter) -> [f64; 2] {
        match param {
            FitParameter::Gap => self.gap_m,
            FitParameter::BuiltinStress => self.builtin_stress_pa,
            FitParameter::DielectricThickness => self.dielectric_thickness_m,
            FitParameter::DielectricRelPermittivity => self.dielectric_rel_permittivity,
            FitParameter::ParasiticOffset => self.parasitic_offset_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub free_params: Vec<String>,
    pub bounds: FitBounds,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub loss: FitLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServoInput {
    /// `input_min`/`input_max` in Pa.
    Pressure,
    /// `input_min`/`input_max` in F.
    Capacitance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServoSpec {
    pub input: ServoInput,
    pub input_min: f64,
    pub input_max: f64,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default)]
    pub notes: Vec<String>,
    pub materials: BTreeMap<String, MaterialSpec>,
    /// Profile used by sweep, fit, servo.
    pub profile: String,
    /// Profile used by the plate solver validation.
    pub validation_profile: String,
    pub profiles: BTreeMap<String, ProfileSpec>,
    pub thresholds: ModeThresholds,
    pub sweep: SweepSpec,
    pub solver: SolverSpec,
    pub fit: FitSpec,
    pub servo: ServoSpec,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl DeviceConfig {
    pub fn bundled() -> Self {
        Self::from_json(DEFAULT_CONFIG).expect("bundled configuration is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Parse {
            source_name: "configuration".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::bundled()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                    path: p.display().to_string(),
                    source: e,
                })?;
                Self::from_json(&text).map_err(|e| match e {
                    CliError::Parse { message, .. } => CliError::Parse {
                        source_name: p.display().to_string(),
                        message,
                    },
                    other => other,
                })
            }
        }
    }

    /// Checks every name reference and numeric range.
    pub fn validate(&self) -> Result<(), CliError> {
        for name in self.profiles.keys() {
            self.geometry(name)?;
        }
        self.geometry(&self.profile)?;
        self.geometry(&self.validation_profile)?;
        self.thresholds
            .validate()
            .map_err(|e| invalid(format!("thresholds: {e}")))?;

        let s = &self.sweep;
        if !(s.start_pa.is_finite()
            && s.end_pa.is_finite()
            && s.start_pa >= 0.0
            && s.end_pa > s.start_pa)
        {
            return Err(invalid("sweep: need 0 <= start_pa < end_pa"));
        }
        if s.steps < 2 {
            return Err(invalid("sweep: steps must be at least 2"));
        }

        let sv = &self.solver;
        if !(sv.quad_rel_tol > 0.0 && sv.quad_rel_tol < 1.0) {
            return Err(invalid("solver: quad_rel_tol must lie in (0, 1)"));
        }
        if sv.quad_max_subintervals < 1 {
            return Err(invalid("solver: quad_max_subintervals must be positive"));
        }
        if sv.grid_nodes < MIN_NODES || sv.convergence_nodes.iter().any(|&n| n < MIN_NODES) {
            return Err(invalid(format!(
                "solver: grids need at least {MIN_NODES} nodes"
            )));
        }
        if sv.convergence_nodes.is_empty() || sv.convergence_nodes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(invalid(
                "solver: convergence_nodes must be non-empty and increasing",
            ));
        }
        if !(sv.validation_pressure_pa.is_finite() && sv.validation_pressure_pa > 0.0) {
            return Err(invalid("solver: validation_pressure_pa must be positive"));
        }
        if sv.linearity_pressures_pa.len() < 3
            || sv
                .linearity_pressures_pa
                .iter()
                .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(invalid(
                "solver: linearity_pressures_pa needs at least 3 non-negative values",
            ));
        }

        let f = &self.fit;
        self.free_params(&f.free_params)
            .map_err(|e| invalid(format!("fit: {e}")))?;
        for p in FitParameter::ALL {
            let [lo, hi] = f.bounds.get(p);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!(
                    "fit: bounds for {p} must be finite with lo < hi"
                )));
            }
        }
        if !(f.tolerance > 0.0 && f.tolerance < 1.0) || f.max_iterations == 0 {
            return Err(invalid(
                "fit: tolerance must lie in (0, 1) and max_iterations be positive",
            ));
        }
        self.servo_map()?;
        Ok(())
    }

    pub fn geometry(&self, profile: &str) -> Result<DeviceGeometry, CliError> {
        let spec = self
            .profiles
            .get(profile)
            .ok_or_else(|| invalid(format!("unknown profile '{profile}'")))?;
        let layers = spec
            .layers
            .iter()
            .map(|l| {
                let m = self.materials.get(&l.material).ok_or_else(|| {
                    invalid(format!(
                        "profile '{profile}': unknown material '{}'",
                        l.material
                    ))
                })?;
                MaterialLayer::new(
                    l.material.clone(),
                    m.youngs_modulus_pa,
                    m.poisson_ratio,
                    l.thickness_m,
                )
                .map_err(|e| {
                    invalid(format!(
                        "profile '{profile}', material '{}': {e}",
                        l.material
                    ))
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let laminate =
            Laminate::new(layers).map_err(|e| invalid(format!("profile '{profile}': {e}")))?;
        let geom = DeviceGeometry {
            radius: spec.radius_m,
            laminate,
            gap: spec.gap_m,
            builtin_stress: spec.builtin_stress_pa,
            dielectric_thickness: spec.dielectric_thickness_m,
            dielectric_rel_permittivity: spec.dielectric_rel_permittivity,
            medium_rel_permittivity: spec.medium_rel_permittivity,
        };
        geom.validate()
            .map_err(|e| invalid(format!("profile '{profile}': {e}")))?;
        Ok(geom)
    }

    pub fn quad(&self) -> QuadSettings {
        QuadSettings {
            rel_tol: self.solver.quad_rel_tol,
            abs_tol: 0.0,
            max_subintervals: self.solver.quad_max_subintervals,
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            method: self.solver.capacitance_method,
            quad: self.quad(),
            thresholds: self.thresholds,
        }
    }

    /// Evenly spaced sweep pressures; the last one equals `end` exactly.
    pub fn pressures(start: f64, end: f64, steps: usize) -> Vec<f64> {
        let span = end - start;
        (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    end
                } else {
                    start + span * i as f64 / (steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn free_params(&self, names: &[String]) -> Result<Vec<FitParameter>, CliError> {
        if names.is_empty() {
            return Err(CliError::Usage(
                "at least one free parameter is required".into(),
            ));
        }
        let mut out: Vec<FitParameter> = Vec::with_capacity(names.len());
        for n in names {
            let p: FitParameter = n.parse().map_err(|_| {
                let known: Vec<&str> = FitParameter::ALL.iter().map(|p| p.as_str()).collect();
                CliError::Usage(format!(
                    "unknown free parameter '{n}' (known: {})",
                    known.join(", ")
                ))
            })?;
            if out.contains(&p) {
                return Err(CliError::Usage(format!(
                    "free parameter '{n}' listed twice"
                )));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn fit_bounds(&self, params: &[FitParameter]) -> Vec<ParameterBound> {
        params
            .iter()
            .map(|&param| {
                let [lo, hi] = self.fit.bounds.get(param);
                ParameterBound { param, lo, hi }
            })
            .collect()
    }

    pub fn fit_settings(&self) -> FitSettings {
        FitSettings {
            tolerance: self.fit.tolerance,
            max_iterations: self.fit.max_iterations,
            loss: self.fit.loss,
            sweep: SweepSettings {
                method: CapacitanceMethod::ClosedForm,
                quad: self.quad(),
                thresholds: self.thresholds,
            },
        }
    }

    pub fn servo_map(&self) -> Result<ServoMap, CliError> {
        let s = &self.servo;
        ServoMap::new(s.input_min, s.input_max, s.angle_min_deg, s.angle_max_deg)
            .map_err(|e| invalid(format!("servo: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_is_valid() {
        let cfg = DeviceConfig::bundled();
        assert_eq!(cfg.profiles.len(), 4);
        let g = cfg.geometry("full_scale").unwrap();
        assert_eq!(g.gap, 400e-6);
        assert!((g.thickness() - 25.2e-6).abs() < 1e-18);
        assert_eq!(cfg.geometry("fem_scaled").unwrap().radius, 100e-6);
    }

    #[test]
    fn unknown_references_are_rejected() {
        let mut cfg = DeviceConfig::bundled();
        cfg.profile = "missing".into();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let mut cfg = DeviceConfig::bundled();
        cfg.profiles.get_mut("calibrated").unwrap().layers[0].material = "steel".into();
        assert!(cfg.validate().is_err());

        let mut cfg = DeviceConfig::bundled();
        cfg.fit.free_params = vec!["thickness".into()];
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_fail_to_parse() {
        let text = DEFAULT_CONFIG.replace("\"gap_m\": 400e-6", "\"gap_um\": 400");
        assert!(matches!(
            DeviceConfig::from_json(&text),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn pressure_grid_hits_endpoints() {
        let p = DeviceConfig::pressures(0.0, 60e3, 61);
        assert_eq!(p.len(), 61);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[10], 10e3);
        assert_eq!(p[60], 60e3);
    }
}

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::capacitance::{capacitance_at, CapacitanceMethod, SweepSettings};
use crate::error::{ModelError, Result};
use crate::math::sqrt;
use crate::mechanics::DeviceGeometry;

use super::series::{MeasuredSeries, SeriesKind};

/// Model quantities that can be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitParameter {
    Gap,
    BuiltinStress,
    DielectricThickness,
    DielectricRelPermittivity,
    /// Constant capacitance added to the model (F).
    ParasiticOffset,
}

impl FitParameter {
    pub const ALL: [FitParameter; 5] = [
        FitParameter::Gap,
        FitParameter::BuiltinStress,
        FitParameter::DielectricThickness,
        FitParameter::DielectricRelPermittivity,
        FitParameter::ParasiticOffset,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gap => "gap",
            Self::BuiltinStress => "builtin_stress",
            Self::DielectricThickness => "dielectric_thickness",
            Self::DielectricRelPermittivity => "dielectric_rel_permittivity",
            Self::ParasiticOffset => "parasitic_offset",
        }
    }

    fn get(self, geom: &DeviceGeometry, offset: f64) -> f64 {
        match self {
            Self::Gap => geom.gap,
            Self::BuiltinStress => geom.builtin_stress,
            Self::DielectricThickness => geom.dielectric_thickness,
            Self::DielectricRelPermittivity => geom.dielectric_rel_permittivity,
            Self::ParasiticOffset => offset,
        }
    }

    fn set(self, geom: &mut DeviceGeometry, offset: &mut f64, value: f64) {
        match self {
            Self::Gap => geom.gap = value,
            Self::BuiltinStress => geom.builtin_stress = value,
            Self::DielectricThickness => geom.dielectric_thickness = value,
            Self::DielectricRelPermittivity => geom.dielectric_rel_permittivity = value,
            Self::ParasiticOffset => *offset = value,
        }
    }
}

impl fmt::Display for FitParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitParameter {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or(ModelError::Degenerate("unknown fit parameter name"))
    }
}

/// A free parameter with its search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterBound {
    pub param: FitParameter,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitLoss {
    /// RMS of `C_model − C_data` (F).
    #[default]
    Absolute,
    /// RMS of `(C_model − C_data) / C_data`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitSettings {
    /// Simplex size, in units of each parameter's bound width, that ends the search.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub loss: FitLoss,
    /// Model evaluation; defaults to the closed-form capacitance path.
    pub sweep: SweepSettings,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 2000,
            loss: FitLoss::Absolute,
            sweep: SweepSettings {
                method: CapacitanceMethod::ClosedForm,
                ..SweepSettings::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedParameter {
    pub param: FitParameter,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub params: Vec<FittedParameter>,
    /// Root-mean-square residual in the units of the chosen loss.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Starting geometry with the fitted values substituted.
    pub geometry: DeviceGeometry,
    pub parasitic_offset: f64,
}

impl FitResult {
    pub fn value(&self, param: FitParameter) -> Option<f64> {
        self.params
            .iter()
            .find(|p| p.param == param)
            .map(|p| p.value)
    }

    /// Model capacitance at each pressure with the fitted parameters.
    pub fn predict(&self, pressures: &[f64], settings: &SweepSettings) -> Result<Vec<f64>> {
        pressures
            .iter()
            .map(|&p| {
                capacitance_at(&self.geometry, p, settings)
                    .map(|pt| pt.capacitance + self.parasitic_offset)
            })
            .collect()
    }
}

struct Problem<'a> {
    data: &'a MeasuredSeries,
    base: &'a DeviceGeometry,
    base_offset: f64,
    bounds: &'a [ParameterBound],
    settings: &'a FitSettings,
}

impl Problem<'_> {
    fn materialize(&self, u: &[f64]) -> (DeviceGeometry, f64) {
        let mut geom = self.base.clone();
        let mut offset = self.base_offset;
        for (b, &ui) in self.bounds.iter().zip(u) {
            b.param
                .set(&mut geom, &mut offset, b.lo + ui * (b.hi - b.lo));
        }
        (geom, offset)
    }

    /// RMS loss at normalized coordinates `u`, `+∞` where the model is undefined.
    fn loss(&self, u: &[f64]) -> f64 {
        let (geom, offset) = self.materialize(u);
        let mut ss = 0.0;
        for (&p, &c) in self.data.abscissa().iter().zip(self.data.capacitance()) {
            let model = match capacitance_at(&geom, p, &self.settings.sweep) {
                Ok(pt) => pt.capacitance + offset,
                Err(_) => return f64::INFINITY,
            };
            let r = match self.settings.loss {
                FitLoss::Absolute => model - c,
                FitLoss::Relative => (model - c) / c,
            };
            ss += r * r;
        }
        sqrt(ss / self.data.len() as f64)
    }
}

fn clamp_unit(u: &mut [f64]) {
    for v in u {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Fits the parameters listed in `bounds` by minimizing the RMS residual
/// between the model and `data`.
///
/// Nelder–Mead runs in coordinates normalized to each bound interval, with
/// every trial point clamped into the box. The start is `geom0` (and a zero
/// parasitic offset) clamped into the bounds; the initial simplex steps 10% of
/// each interval. A run that hits `max_iterations` returns the best point with
/// `converged == false`.
pub fn fit_model(
    data: &MeasuredSeries,
    geom0: &DeviceGeometry,
    bounds: &[ParameterBound],
    settings: &FitSettings,
) -> Result<FitResult> {
    data.expect(SeriesKind::PressureCapacitance)?;
    if data.len() < 4 {
        return Err(ModelError::InsufficientData {
            needed: 4,
            got: data.len(),
        });
    }
    if bounds.is_empty() {
        return Err(ModelError::Degenerate("no free parameters"));
    }
    for (i, b) in bounds.iter().enumerate() {
        if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi) {
            return Err(ModelError::InvalidParameter {
                name: b.param.as_str(),
                value: b.hi,
                reason: "bounds must be finite with lo < hi",
            });
        }
        if bounds[..i].iter().any(|o| o.param == b.param) {
            return Err(ModelError::Degenerate("fit parameter listed twice"));
        }
    }
    geom0.validate()?;
    settings.sweep.thresholds.validate()?;

    let problem = Problem {
        data,
        base: geom0,
        base_offset: 0.0,
        bounds,
        settings,
    };
    let n = bounds.len();
    let start: Vec<f64> = bounds
        .iter()
        .map(|b| ((b.param.get(geom0, 0.0) - b.lo) / (b.hi - b.lo)).clamp(0.0, 1.0))
        .collect();

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        v[i] += if v[i] + 0.1 <= 1.0 { 0.1 } else { -0.1 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| problem.loss(v)).collect();
    if !values[0].is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "initial geometry",
            value: values[0],
            reason: "model cannot be evaluated at the starting point",
        });
    }

    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < settings.max_iterations {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let size = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < settings.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                *c += x / n as f64;
            }
        }
        let towards = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            clamp_unit(&mut p);
            p
        };

        let reflected = towards(alpha);
        let f_r = problem.loss(&reflected);
        if f_r < values[best] {
            let expanded = towards(gamma);
            let f_e = problem.loss(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[worst] {
            let p = towards(rho * alpha);
            let f = problem.loss(&p);
            (p, f)
        } else {
            let p = towards(-rho);
            let f = problem.loss(&p);
            (p, f)
        };
        if f_c < values[worst].min(f_r) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        let anchor = simplex[best].clone();
        for k in 0..=n {
            if k == best {
                continue;
            }
            for (x, a) in simplex[k].iter_mut().zip(&anchor) {
                *x = a + shrink * (*x - a);
            }
            values[k] = problem.loss(&simplex[k]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    let (geometry, parasitic_offset) = problem.materialize(&simplex[best]);
    let params = bounds
        .iter()
        .map(|b| FittedParameter {
            param: b.param,
            value: b.param.get(&geometry, parasitic_offset),
        })
        .collect();
    Ok(FitResult {
        params,
        residual_norm: values[best],
        iterations,
        converged,
        geometry,
        parasitic_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::typical;

    fn device() -> DeviceGeometry {
        DeviceGeometry {
            radius: 0.01,
            laminate: typical::al_on_polyimide(),
            gap: 682e-6,
            builtin_stress: 0.0,
            dielectric_thickness: 25e-6,
            dielectric_rel_permittivity: 3.4,
            medium_rel_permittivity: 1.0,
        }
    }

    fn synthetic(geom: &DeviceGeometry) -> MeasuredSeries {
        let p: Vec<f64> = (0..=30).map(|i| i as f64 * 2e3).collect();
        let settings = FitSettings::default().sweep;
        let c = p
            .iter()
            .map(|&x| capacitance_at(geom, x, &settings).unwrap().capacitance)
            .collect();
        MeasuredSeries::pressure(p, c, "synthetic").unwrap()
    }

    #[test]
    fn recovers_gap_without_noise() {
        let truth = device();
        let data = synthetic(&truth);
        let start = DeviceGeometry {
            gap: 500e-6,
            ..device()
        };
        let bounds = [ParameterBound {
            param: FitParameter::Gap,
            lo: 100e-6,
            hi: 2000e-6,
        }];
        let fit = fit_model(&data, &start, &bounds, &FitSettings::default()).unwrap();
        assert!(fit.converged);
        let gap = fit.value(FitParameter::Gap).unwrap();
        assert!((gap - truth.gap).abs() / truth.gap < 1e-3, "{gap}");
    }

    #[test]
    fn recovers_offset() {
        let truth = device();
        let mut data = synthetic(&truth);
        let shifted: Vec<f64> = data.capacitance().iter().map(|c| c + 1e-12).collect();
        data = MeasuredSeries::pressure(data.abscissa().to_vec(), shifted, "offset").unwrap();
        let bounds = [ParameterBound {
            param: FitParameter::ParasiticOffset,
            lo: 0.0,
            hi: 5e-12,
        }];
        let fit = fit_model(&data, &truth, &bounds, &FitSettings::default()).unwrap();
        assert!((fit.parasitic_offset - 1e-12).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_requests() {
        let data = synthetic(&device());
        let s = FitSettings::default();
        assert!(fit_model(&data, &device(), &[], &s).is_err());
        let inverted = [ParameterBound {
            param: FitParameter::Gap,
            lo: 1.0,
            hi: 0.5,
        }];
        assert!(fit_model(&data, &device(), &inverted, &s).is_err());
        let twice = [
            ParameterBound {
                param: FitParameter::Gap,
                lo: 1e-4,
                hi: 1e-3,
            },
            ParameterBound {
                param: FitParameter::Gap,
                lo: 1e-4,
                hi: 1e-3,
            },
        ];
        assert!(fit_model(&data, &device(), &twice, &s).is_err());
        let step = MeasuredSeries::time(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4], "t").unwrap();
        let ok = [ParameterBound {
            param: FitParameter::Gap,
            lo: 1e-4,
            hi: 1e-3,
        }];
        assert!(matches!(
            fit_model(&step, &device(), &ok, &s),
            Err(ModelError::WrongSeriesKind { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_best_so_far() {
        let data = synthetic(&device());
        let start = DeviceGeometry {
            gap: 500e-6,
            ..device()
        };
        let bounds = [ParameterBound {
            param: FitParameter::Gap,
            lo: 100e-6,
            hi: 2000e-6,
        }];
        let settings = FitSettings {
            max_iterations: 3,
            ..FitSettings::default()
        };
        let fit = fit_model(&data, &start, &bounds, &settings).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 3);
        assert!(fit.residual_norm.is_finite());
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in FitParameter::ALL {
            assert_eq!(p.as_str().parse::<FitParameter>().unwrap(), p);
        }
        assert!("thickness".parse::<FitParameter>().is_err());
    }
}

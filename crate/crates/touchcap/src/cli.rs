//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use touchcap_core::calibration::{
    fit_model, segment_modes, FitResult, ModeSegmentation, SeriesKind, MIN_SEGMENTATION_SAMPLES,
};
use touchcap_core::capacitance::{capacitance_at, geometry_id, sweep_cp_curve, CpCurve, CpPoint};
use touchcap_core::plate_fd::{
    convergence_study, linearity_check, solve_plate, ConvergenceRow, PlateSolution, RadialGrid,
    MIN_NODES,
};
use touchcap_core::stats::LinearFit;
use touchcap_core::{DeviceGeometry, Laminate, MaterialLayer, ModeThresholds, OperatingMode};

use crate::config::{DeviceConfig, ServoInput};
use crate::error::CliError;
use crate::io::{csv_bytes, fmt_f64, json_bytes, read_pressures, read_series, Destination};

#[derive(Debug, Parser)]
#[command(
    name = "touchcap",
    version,
    about = "Touch-mode capacitive pressure sensor models"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Device configuration (JSON); the bundled default when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Primary output file; `-` or omitted writes to stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format; inferred from the output extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Suppress summaries on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacitance–pressure sweep with operating-mode labels.
    Sweep(SweepArgs),
    /// Check the plate solver against the analytic deflection.
    Validate(ValidateArgs),
    /// Fit model parameters to a measured C–P curve.
    Fit(FitArgs),
    /// Map pressures to servo angles through the device model.
    Servo(ServoArgs),
    /// Split a measured C–P curve into its four operating modes.
    Modes(ModesArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "PA")]
    pub start_pa: Option<f64>,
    #[arg(long, value_name = "PA")]
    pub end_pa: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Configuration profile; the configured default when omitted.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Grid sizes for the convergence study, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "N,N,..")]
    pub nodes: Option<Vec<usize>>,
    /// Also write the deflection, moment and stress field at the validation pressure.
    #[arg(long, value_name = "PATH")]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with `pressure_pa` and `capacitance_f` columns (`-` for stdin).
    pub data: PathBuf,
    /// Parameters to fit, comma separated; the configured list when omitted.
    #[arg(long, value_delimiter = ',', value_name = "NAME,..")]
    pub free: Option<Vec<String>>,
    /// Profile providing the starting geometry.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServoArgs {
    /// CSV with a `pressure_pa` column (`-` for stdin).
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "pressures",
        required_unless_present = "pressures"
    )]
    pub data: Option<PathBuf>,
    /// Pressures in Pa, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "PA,..",
        allow_hyphen_values = true
    )]
    pub pressures: Option<Vec<f64>>,
    /// Configuration profile; the configured default when omitted.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    /// CSV with `pressure_pa` and `capacitance_f` columns (`-` for stdin).
    pub data: PathBuf,
}

struct Context {
    config: DeviceConfig,
    output: Destination,
    format: Format,
    quiet: bool,
}

impl Context {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    /// Writes the primary output, plus `sidecar` next to it when writing to a file.
    fn emit(&self, primary: &[u8], sidecar: Option<(&str, &[u8])>) -> Result<(), CliError> {
        let Some((ext, bytes)) = sidecar else {
            return self.output.write(primary);
        };
        let Some(path) = self.output.sibling(ext) else {
            return self.output.write(primary);
        };
        let side = Destination::File(path);
        if side == self.output {
            return Err(CliError::Usage(format!(
                "output path would collide with its .{ext} sidecar"
            )));
        }
        self.output.write(primary)?;
        side.write(bytes)
    }

    fn geometry(&self, profile: Option<&str>) -> Result<(String, DeviceGeometry), CliError> {
        let name = profile.unwrap_or(&self.config.profile).to_string();
        let geom = self.config.geometry(&name)?;
        Ok((name, geom))
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                crate::error::exit::USAGE
            } else {
                crate::error::exit::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => crate::error::exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = DeviceConfig::load(cli.global.config.as_deref())?;
    let output = Destination::from_arg(cli.global.output.as_deref());
    let format = cli.global.format.unwrap_or(match &output {
        Destination::File(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    let ctx = Context {
        config,
        output,
        format,
        quiet: cli.global.quiet,
    };
    match cli.command {
        Command::Sweep(a) => sweep(&ctx, &a),
        Command::Validate(a) => validate(&ctx, &a),
        Command::Fit(a) => fit(&ctx, &a),
        Command::Servo(a) => servo(&ctx, &a),
        Command::Modes(a) => modes(&ctx, &a),
    }
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    geometry_id: &'a str,
    profile: &'a str,
    geometry: &'a DeviceGeometry,
    thresholds: &'a ModeThresholds,
    capacitance_method: touchcap_core::CapacitanceMethod,
    points: &'a [CpPoint],
}

fn curve_csv(curve: &CpCurve) -> Vec<u8> {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.pressure),
                fmt_f64(p.capacitance),
                p.mode.to_string(),
            ]
        })
        .collect();
    csv_bytes(&["pressure_pa", "capacitance_f", "mode"], &rows)
}

fn sweep(ctx: &Context, a: &SweepArgs) -> Result<(), CliError> {
    let s = ctx.config.sweep;
    let start = a.start_pa.unwrap_or(s.start_pa);
    let end = a.end_pa.unwrap_or(s.end_pa);
    let steps = a.steps.unwrap_or(s.steps);
    if steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
        return Err(CliError::Usage("need 0 <= --start-pa < --end-pa".into()));
    }
    let (profile, geom) = ctx.geometry(a.profile.as_deref())?;
    let settings = ctx.config.sweep_settings();
    let pressures = DeviceConfig::pressures(start, end, steps);
    let curve = sweep_cp_curve(&geom, &pressures, &settings)?;
    let doc = json_bytes(&SweepDocument {
        geometry_id: &curve.geometry_id,
        profile: &profile,
        geometry: &geom,
        thresholds: &settings.thresholds,
        capacitance_method: settings.method,
        points: &curve.points,
    });
    match ctx.format {
        Format::Csv => ctx.emit(&curve_csv(&curve), Some(("json", &doc)))?,
        Format::Json => ctx.emit(&doc, None)?,
    }
    let mut counts = [0usize; 4];
    for p in &curve.points {
        counts[p.mode.index()] += 1;
    }
    let summary: Vec<String> = OperatingMode::ALL
        .iter()
        .map(|m| format!("{m} {}", counts[m.index()]))
        .collect();
    ctx.note(format!(
        "sweep: profile {profile} ({}), {} points, {}",
        curve.geometry_id,
        curve.points.len(),
        summary.join(", ")
    ));
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct VariantReport {
    variant: String,
    rigidity: f64,
    convergence: Vec<ConvergenceRow>,
    linearity: LinearFit,
}

#[derive(Serialize)]
struct ValidationDocument {
    profile: String,
    pressure_pa: f64,
    variants: Vec<VariantReport>,
    checks: Vec<Check>,
    passed: bool,
}

fn single_layer_variant(geom: &DeviceGeometry) -> Result<DeviceGeometry, CliError> {
    let base = geom
        .laminate
        .layers()
        .first()
        .ok_or_else(|| CliError::Config("laminate has no layers".into()))?;
    let layer = MaterialLayer::new(
        base.name.clone(),
        base.youngs_modulus,
        base.poisson_ratio,
        geom.thickness(),
    )?;
    Ok(DeviceGeometry {
        laminate: Laminate::single(layer)?,
        ..geom.clone()
    })
}

fn plate_field_csv(sol: &PlateSolution) -> Vec<u8> {
    let rows: Vec<Vec<String>> = sol
        .grid
        .nodes()
        .enumerate()
        .map(|(i, r)| {
            vec![
                fmt_f64(r),
                fmt_f64(sol.deflection[i]),
                fmt_f64(sol.radial_moment[i]),
                fmt_f64(sol.tangential_moment[i]),
                fmt_f64(sol.von_mises[i]),
            ]
        })
        .collect();
    csv_bytes(&["r_m", "w_m", "mr_n", "mt_n", "von_mises_pa"], &rows)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best })
}

fn validate(ctx: &Context, a: &ValidateArgs) -> Result<(), CliError> {
    let solver = &ctx.config.solver;
    let nodes = a
        .nodes
        .clone()
        .unwrap_or_else(|| solver.convergence_nodes.clone());
    if nodes.is_empty() {
        return Err(CliError::Usage(
            "--nodes needs at least one grid size".into(),
        ));
    }
    if let Some(n) = nodes.iter().find(|&&n| n < MIN_NODES) {
        return Err(CliError::Usage(format!(
            "grid of {n} nodes is too coarse (minimum {MIN_NODES})"
        )));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(
            "--nodes must be strictly increasing".into(),
        ));
    }
    let profile = ctx.config.validation_profile.clone();
    let composite = ctx.config.geometry(&profile)?;
    let single = single_layer_variant(&composite)?;
    let pressure = solver.validation_pressure_pa;
    let finest = *nodes.last().expect("non-empty");
    let grid = RadialGrid::new(finest, composite.radius)?;

    let mut checks = Vec::new();
    let mut variants = Vec::new();
    for (variant, geom) in [("composite", &composite), ("single_layer", &single)] {
        let rows = convergence_study(geom, pressure, &nodes)?;
        let last = rows.last().expect("non-empty");
        checks.push(Check {
            name: format!(
                "{variant}: center deflection within 1% at {} nodes",
                last.node_count
            ),
            passed: last.relative_error < 0.01,
            detail: format!("relative error {:.3e}", last.relative_error),
        });
        let orders: Vec<f64> = rows.iter().filter_map(|r| r.observed_order).collect();
        if !orders.is_empty() {
            let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
            checks.push(Check {
                name: format!("{variant}: convergence order at least 1.8"),
                passed: min >= 1.8,
                detail: format!("minimum observed order {min:.4}"),
            });
        }
        let linearity = linearity_check(geom, &solver.linearity_pressures_pa, &grid)?;
        checks.push(Check {
            name: format!("{variant}: deflection linear in pressure"),
            passed: linearity.r_squared >= 1.0 - 1e-9,
            detail: format!("1 - R^2 = {:.3e}", 1.0 - linearity.r_squared),
        });
        let mut outer = true;
        let mut centered = true;
        for &p in &solver.linearity_pressures_pa {
            let sol = solve_plate(geom, p, &grid)?;
            outer &= sol.max_von_mises.radius >= 0.95 * geom.radius;
            centered &= argmax(&sol.deflection) == 0;
        }
        checks.push(Check {
            name: format!("{variant}: peak von Mises stress in the outer 5% of the radius"),
            passed: outer,
            detail: format!("{} pressures", solver.linearity_pressures_pa.len()),
        });
        checks.push(Check {
            name: format!("{variant}: peak deflection at the center"),
            passed: centered,
            detail: format!("{} pressures", solver.linearity_pressures_pa.len()),
        });
        variants.push(VariantReport {
            variant: variant.to_string(),
            rigidity: geom.rigidity(),
            convergence: rows,
            linearity,
        });
    }

    if let Some(path) = &a.field {
        let sol = solve_plate(&composite, pressure, &grid)?;
        Destination::File(path.clone()).write(&plate_field_csv(&sol))?;
    }

    let passed = checks.iter().all(|c| c.passed);
    let primary = match ctx.format {
        Format::Json => json_bytes(&ValidationDocument {
            profile: profile.clone(),
            pressure_pa: pressure,
            variants,
            checks: checks.clone(),
            passed,
        }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = variants
                .iter()
                .flat_map(|v| {
                    v.convergence.iter().map(move |r| {
                        vec![
                            v.variant.clone(),
                            r.node_count.to_string(),
                            fmt_f64(r.center_deflection),
                            fmt_f64(r.relative_error),
                            r.observed_order.map(fmt_f64).unwrap_or_default(),
                        ]
                    })
                })
                .collect();
            csv_bytes(
                &[
                    "variant",
                    "node_count",
                    "center_deflection_m",
                    "relative_error",
                    "observed_order",
                ],
                &rows,
            )
        }
    };
    ctx.output.write(&primary)?;
    for c in &checks {
        ctx.note(format!(
            "{} {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Failed(format!(
            "validation failed: {}",
            failed.join("; ")
        )))
    }
}

#[derive(Serialize)]
struct FitDocument<'a> {
    data: &'a str,
    profile: &'a str,
    result: &'a FitResult,
    segmentation: Option<&'a ModeSegmentation>,
}

fn segmentation_summary(seg: &ModeSegmentation) -> String {
    let b: Vec<String> = seg
        .boundaries
        .iter()
        .map(|p| format!("{:.1} kPa", p / 1e3))
        .collect();
    let r2: Vec<String> = OperatingMode::ALL
        .iter()
        .zip(&seg.segments)
        .map(|(m, s)| format!("{m} R^2 {:.5}", s.r_squared))
        .collect();
    format!(
        "modes: boundaries {}; {}{}",
        b.join(", "),
        r2.join(", "),
        if seg.low_confidence {
            " (low confidence: data is nearly a straight line)"
        } else {
            ""
        }
    )
}

fn fit(ctx: &Context, a: &FitArgs) -> Result<(), CliError> {
    let names = a
        .free
        .clone()
        .unwrap_or_else(|| ctx.config.fit.free_params.clone());
    let params = ctx.config.free_params(&names)?;
    let (profile, geom0) = ctx.geometry(a.profile.as_deref())?;
    let data = read_series(&a.data, Some(SeriesKind::PressureCapacitance))?;
    let settings = ctx.config.fit_settings();
    let result = fit_model(&data, &geom0, &ctx.config.fit_bounds(&params), &settings)?;
    let model = result.predict(data.abscissa(), &settings.sweep)?;
    let segmentation = if data.len() >= MIN_SEGMENTATION_SAMPLES {
        Some(segment_modes(&data)?)
    } else {
        None
    };

    let rows: Vec<Vec<String>> = data
        .abscissa()
        .iter()
        .zip(data.capacitance())
        .zip(&model)
        .map(|((p, c), m)| vec![fmt_f64(*p), fmt_f64(*c), fmt_f64(*m), fmt_f64(c - m)])
        .collect();
    let residuals = csv_bytes(
        &["pressure_pa", "measured_f", "model_f", "residual_f"],
        &rows,
    );
    let data_name = a.data.display().to_string();
    let report = json_bytes(&FitDocument {
        data: &data_name,
        profile: &profile,
        result: &result,
        segmentation: segmentation.as_ref(),
    });
    match ctx.format {
        Format::Csv => ctx.emit(&residuals, Some(("json", &report)))?,
        Format::Json => ctx.emit(&report, Some(("csv", &residuals)))?,
    }

    let values: Vec<String> = result
        .params
        .iter()
        .map(|p| format!("{} = {:e}", p.param, p.value))
        .collect();
    ctx.note(format!(
        "fit: {}; rms residual {:e} F after {} iterations",
        values.join(", "),
        result.residual_norm,
        result.iterations
    ));
    match &segmentation {
        Some(seg) => ctx.note(segmentation_summary(seg)),
        None => ctx.note(format!(
            "modes: skipped, fewer than {MIN_SEGMENTATION_SAMPLES} samples"
        )),
    }
    if result.converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "fit did not converge within {} iterations; best point written",
            settings.max_iterations
        )))
    }
}

#[derive(Serialize)]
struct ServoRow {
    pressure_pa: f64,
    capacitance_f: f64,
    angle_deg: f64,
}

#[derive(Serialize)]
struct ServoDocument<'a> {
    profile: &'a str,
    input: ServoInput,
    input_min: f64,
    input_max: f64,
    angle_min_deg: f64,
    angle_max_deg: f64,
    rows: &'a [ServoRow],
}

fn servo(ctx: &Context, a: &ServoArgs) -> Result<(), CliError> {
    let pressures = match (&a.pressures, &a.data) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => read_pressures(path)?,
        (None, None) => return Err(CliError::Usage("give --data or --pressures".into())),
    };
    if let Some(p) = pressures.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(CliError::Usage(format!(
            "pressure {p} must be finite and non-negative"
        )));
    }
    let (profile, geom) = ctx.geometry(a.profile.as_deref())?;
    let settings = ctx.config.sweep_settings();
    let map = ctx.config.servo_map()?;
    let spec = ctx.config.servo;
    let rows = pressures
        .iter()
        .map(|&p| {
            let c = capacitance_at(&geom, p, &settings)?;
            let input = match spec.input {
                ServoInput::Pressure => p,
                ServoInput::Capacitance => c.capacitance,
            };
            Ok(ServoRow {
                pressure_pa: p,
                capacitance_f: c.capacitance,
                angle_deg: map.angle(input),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let primary = match ctx.format {
        Format::Json => json_bytes(&ServoDocument {
            profile: &profile,
            input: spec.input,
            input_min: spec.input_min,
            input_max: spec.input_max,
            angle_min_deg: spec.angle_min_deg,
            angle_max_deg: spec.angle_max_deg,
            rows: &rows,
        }),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.pressure_pa),
                        fmt_f64(r.capacitance_f),
                        fmt_f64(r.angle_deg),
                    ]
                })
                .collect();
            csv_bytes(&["pressure_pa", "capacitance_f", "angle_deg"], &cells)
        }
    };
    ctx.output.write(&primary)?;
    ctx.note(format!(
        "servo: {} rows, profile {profile} ({})",
        rows.len(),
        geometry_id(&geom)
    ));
    Ok(())
}

fn modes(ctx: &Context, a: &ModesArgs) -> Result<(), CliError> {
    let data = read_series(&a.data, Some(SeriesKind::PressureCapacitance))?;
    let seg = segment_modes(&data)?;
    let primary = match ctx.format {
        Format::Json => json_bytes(&seg),
        Format::Csv => {
            let rows: Vec<Vec<String>> = OperatingMode::ALL
                .iter()
                .zip(&seg.segments)
                .map(|(m, s)| {
                    vec![
                        m.to_string(),
                        fmt_f64(s.start_pressure),
                        fmt_f64(s.end_pressure),
                        fmt_f64(s.slope),
                        fmt_f64(s.intercept),
                        fmt_f64(s.r_squared),
                        s.samples.to_string(),
                    ]
                })
                .collect();
            csv_bytes(
                &[
                    "mode",
                    "start_pa",
                    "end_pa",
                    "slope_f_per_pa",
                    "intercept_f",
                    "r_squared",
                    "samples",
                ],
                &rows,
            )
        }
    };
    ctx.output.write(&primary)?;
    ctx.note(segmentation_summary(&seg));
    Ok(())
}

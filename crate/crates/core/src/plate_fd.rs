//! Axisymmetric finite differences for the clamped circular plate
//! `D ∇⁴ w = P`, with bending moments and surface stresses.
//!
//! The radial Laplacian `(1/r)(r u′)′` is discretized in flux form and applied
//! twice. At the origin the symmetric limit `4 (u₁ − u₀) / h²` is used; at the
//! clamped edge `w = 0` and a mirrored ghost node enforces `w′ = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_non_negative, check_positive, ModelError, Result};
use crate::linalg::BandedMatrix;
use crate::math::{ln, rel_diff, sqrt};
use crate::mechanics::DeviceGeometry;
use crate::stats::{fit_line, LinearFit};

pub const MIN_NODES: usize = 16;

/// Uniform radial grid `rᵢ = i · spacing`, `i = 0 … node_count − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialGrid {
    node_count: usize,
    radius: f64,
}

impl RadialGrid {
    pub fn new(node_count: usize, radius: f64) -> Result<Self> {
        if node_count < MIN_NODES {
            return Err(ModelError::GridTooCoarse(node_count));
        }
        check_positive("radius", radius)?;
        Ok(Self { node_count, radius })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.radius / (self.node_count - 1) as f64
    }

    /// Position of node `i`; the last node sits exactly on `radius`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.node_count {
            self.radius
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count).map(|i| self.node(i))
    }
}

/// Largest von Mises stress and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakStress {
    pub value: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlateSolution {
    pub grid: RadialGrid,
    /// Deflection per node (m), positive along the load.
    pub deflection: Vec<f64>,
    /// Radial bending moment per unit length `M_r` (N).
    pub radial_moment: Vec<f64>,
    /// Tangential bending moment per unit length `M_t` (N).
    pub tangential_moment: Vec<f64>,
    /// Largest von Mises stress over the layer surfaces at each node (Pa).
    pub von_mises: Vec<f64>,
    pub center_deflection: f64,
    /// Radial surface stress of largest magnitude at the clamped edge (Pa).
    pub edge_radial_stress: f64,
    pub max_von_mises: PeakStress,
}

/// Coefficients `(lower, diag, upper)` of the discrete radial Laplacian at node `i`.
fn laplacian_row(i: usize, h: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    if i == 0 {
        (0.0, -4.0 / h2, 4.0 / h2)
    } else {
        let r = i as f64;
        let lo = (r - 0.5) / (r * h2);
        let hi = (r + 0.5) / (r * h2);
        (lo, -(lo + hi), hi)
    }
}

/// Solves the unstressed biharmonic problem at `pressure` on `grid`.
pub fn solve_plate(
    geom: &DeviceGeometry,
    pressure: f64,
    grid: &RadialGrid,
) -> Result<PlateSolution> {
    geom.validate()?;
    check_non_negative("pressure", pressure)?;
    if rel_diff(grid.radius(), geom.radius) > 1e-12 {
        return Err(ModelError::InvalidParameter {
            name: "grid radius",
            value: grid.radius(),
            reason: "must equal the diaphragm radius",
        });
    }
    let n = grid.node_count();
    let h = grid.spacing();
    let d = geom.rigidity();
    let unknowns = n - 1;

    // v = L w on nodes 0..n-1, expressed through w_0..w_{n-2}
    // (w_{n-1} = 0, ghost w_n = w_{n-2})
    let lw = |k: usize| -> [(usize, f64); 3] {
        let (lo, di, hi) = laplacian_row(k, h);
        let mut out = [(0, 0.0); 3];
        let mut put = |slot: usize, j: isize, c: f64| {
            if j < 0 {
                return;
            }
            let mut j = j as usize;
            if j == n - 1 {
                return;
            }
            if j == n {
                j = n - 2;
            }
            out[slot] = (j, c);
        };
        put(0, k as isize - 1, lo);
        put(1, k as isize, di);
        put(2, k as isize + 1, hi);
        out
    };

    let mut a = BandedMatrix::zeros(unknowns, 2, 2);
    for i in 0..unknowns {
        let (lo, di, hi) = laplacian_row(i, h);
        let outer = [(i as isize - 1, lo), (i as isize, di), (i as isize + 1, hi)];
        for (k, ck) in outer {
            if k < 0 || ck == 0.0 {
                continue;
            }
            for (j, cj) in lw(k as usize) {
                if cj != 0.0 {
                    a.add(i, j, ck * cj);
                }
            }
        }
    }
    let rhs = vec![pressure / d; unknowns];
    let mut w = if pressure == 0.0 {
        vec![0.0; unknowns]
    } else {
        a.solve(&rhs)?
    };
    w.push(0.0);

    Ok(recover_stresses(geom, *grid, w))
}

fn recover_stresses(geom: &DeviceGeometry, grid: RadialGrid, w: Vec<f64>) -> PlateSolution {
    let n = grid.node_count();
    let h = grid.spacing();
    let h2 = h * h;
    let d = geom.rigidity();
    let nu_eff = geom.laminate.effective_poisson_ratio();
    let e = geom.laminate.neutral_plane();
    let surfaces: Vec<(f64, f64, f64)> = geom
        .laminate
        .layer_extents()
        .flat_map(|(layer, zb, zt)| {
            let m = layer.plate_modulus();
            [
                (m, layer.poisson_ratio, zb - e),
                (m, layer.poisson_ratio, zt - e),
            ]
        })
        .collect();

    // (w″, w′/r) per node
    let curvatures = (0..n).map(|i| {
        if i == 0 {
            let w2 = 2.0 * (w[1] - w[0]) / h2;
            (w2, w2)
        } else if i == n - 1 {
            (2.0 * w[n - 2] / h2, 0.0)
        } else {
            let w2 = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / h2;
            let w1 = (w[i + 1] - w[i - 1]) / (2.0 * h);
            (w2, w1 / grid.node(i))
        }
    });

    let mut radial_moment = Vec::with_capacity(n);
    let mut tangential_moment = Vec::with_capacity(n);
    let mut von_mises = Vec::with_capacity(n);
    let mut edge_radial_stress = 0.0_f64;
    for (i, (k_r, k_t)) in curvatures.enumerate() {
        radial_moment.push(-d * (k_r + nu_eff * k_t));
        tangential_moment.push(-d * (nu_eff * k_r + k_t));
        let mut vm_node = 0.0_f64;
        for &(modulus, nu, z) in &surfaces {
            let sr = -modulus * z * (k_r + nu * k_t);
            let st = -modulus * z * (nu * k_r + k_t);
            vm_node = vm_node.max(sqrt(sr * sr - sr * st + st * st));
            if i == n - 1 && sr.abs() > edge_radial_stress.abs() {
                edge_radial_stress = sr;
            }
        }
        von_mises.push(vm_node);
    }
    let (peak_index, peak) =
        von_mises
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, v)| if v > best.1 { (i, v) } else { best },
            );

    PlateSolution {
        grid,
        center_deflection: w[0],
        deflection: w,
        radial_moment,
        tangential_moment,
        von_mises,
        edge_radial_stress,
        max_von_mises: PeakStress {
            value: peak,
            radius: grid.node(peak_index),
        },
    }
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceRow {
    pub node_count: usize,
    pub center_deflection: f64,
    /// `|w_fd(0) − P R⁴/64D| / (P R⁴/64D)`.
    pub relative_error: f64,
    /// Log-log slope of the error against the previous row's spacing.
    pub observed_order: Option<f64>,
}

/// Center-deflection error against the analytic solution for each grid size.
pub fn convergence_study(
    geom: &DeviceGeometry,
    pressure: f64,
    node_counts: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    check_positive("pressure", pressure)?;
    for (i, w) in node_counts.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(ModelError::NotIncreasing {
                what: "node counts",
                index: i + 1,
            });
        }
    }
    let exact = geom.plate_load(pressure);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(node_counts.len());
    for &count in node_counts {
        let grid = RadialGrid::new(count, geom.radius)?;
        let sol = solve_plate(geom, pressure, &grid)?;
        let relative_error = (sol.center_deflection - exact).abs() / exact;
        let observed_order = rows.last().map(|prev| {
            let h_prev = 1.0 / (prev.node_count - 1) as f64;
            let h = 1.0 / (count - 1) as f64;
            ln(prev.relative_error / relative_error) / ln(h_prev / h)
        });
        rows.push(ConvergenceRow {
            node_count: count,
            center_deflection: sol.center_deflection,
            relative_error,
            observed_order,
        });
    }
    Ok(rows)
}

/// Least-squares line through `(P, w_fd(0))`.
pub fn linearity_check(
    geom: &DeviceGeometry,
    pressures: &[f64],
    grid: &RadialGrid,
) -> Result<LinearFit> {
    if pressures.len() < 3 {
        return Err(ModelError::InsufficientData {
            needed: 3,
            got: pressures.len(),
        });
    }
    let centers = pressures
        .iter()
        .map(|&p| solve_plate(geom, p, grid).map(|s| s.center_deflection))
        .collect::<Result<Vec<_>>>()?;
    fit_line(pressures, &centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{typical, Laminate};

    fn fem_geometry() -> DeviceGeometry {
        DeviceGeometry {
            radius: 100e-6,
            laminate: typical::al_on_polyimide(),
            gap: 10e-6,
            builtin_stress: 0.0,
            dielectric_thickness: 0.0,
            dielectric_rel_permittivity: 1.0,
            medium_rel_permittivity: 1.0,
        }
    }

    #[test]
    fn grid_spacing_and_edge() {
        let g = RadialGrid::new(201, 100e-6).unwrap();
        assert_eq!(g.node(200), 100e-6);
        assert!(rel_diff(g.spacing() * 200.0, 100e-6) < 1e-15);
        assert!(matches!(
            RadialGrid::new(15, 1.0),
            Err(ModelError::GridTooCoarse(15))
        ));
    }

    #[test]
    fn zero_pressure_is_zero_solution() {
        let geom = fem_geometry();
        let sol = solve_plate(&geom, 0.0, &RadialGrid::new(51, geom.radius).unwrap()).unwrap();
        assert!(sol.deflection.iter().all(|&w| w == 0.0));
        assert!(sol.von_mises.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn center_deflection_approaches_analytic() {
        let geom = fem_geometry();
        let sol = solve_plate(&geom, 1e4, &RadialGrid::new(201, geom.radius).unwrap()).unwrap();
        let exact = geom.plate_load(1e4);
        let err = (sol.center_deflection - exact).abs() / exact;
        assert!(err < 0.01, "{err}");
        assert!(err > 0.0);
    }

    #[test]
    fn profile_matches_quartic_shape() {
        let geom = fem_geometry();
        let grid = RadialGrid::new(201, geom.radius).unwrap();
        let sol = solve_plate(&geom, 1e4, &grid).unwrap();
        let w0 = sol.center_deflection;
        let worst = grid
            .nodes()
            .zip(&sol.deflection)
            .map(|(r, &w)| {
                let u = 1.0 - (r / geom.radius) * (r / geom.radius);
                (w / w0 - u * u).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.005, "{worst}");
    }

    #[test]
    fn second_order_convergence() {
        let rows = convergence_study(&fem_geometry(), 1e4, &[51, 101, 201]).unwrap();
        assert!(rows[0].observed_order.is_none());
        for row in &rows[1..] {
            let p = row.observed_order.unwrap();
            assert!((1.8..2.5).contains(&p), "order {p}");
        }
        let single = convergence_study(&fem_geometry(), 1e4, &[51]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(convergence_study(&fem_geometry(), 1e4, &[101, 51]).is_err());
    }

    #[test]
    fn single_layer_converges_like_laminate() {
        let geom = DeviceGeometry {
            laminate: Laminate::single(typical::polyimide(25e-6)).unwrap(),
            ..fem_geometry()
        };
        let rows = convergence_study(&geom, 1e4, &[51, 101, 201]).unwrap();
        let lam = convergence_study(&fem_geometry(), 1e4, &[51, 101, 201]).unwrap();
        for (a, b) in rows.iter().zip(&lam) {
            assert!(rel_diff(a.relative_error, b.relative_error) < 1e-6);
        }
    }

    #[test]
    fn stress_peaks_at_edge_and_deflection_at_center() {
        let geom = fem_geometry();
        let grid = RadialGrid::new(201, geom.radius).unwrap();
        for p in [2e3, 4e3, 6e3, 8e3, 1e4] {
            let sol = solve_plate(&geom, p, &grid).unwrap();
            assert!(sol.max_von_mises.radius >= 0.95 * geom.radius);
            let argmax = sol
                .deflection
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |b, (i, &w)| if w > b.1 { (i, w) } else { b })
                .0;
            assert_eq!(argmax, 0);
        }
    }

    #[test]
    fn edge_moment_matches_analytic() {
        // clamped plate: M_r(R) = -P R² / 8
        let geom = fem_geometry();
        let sol = solve_plate(&geom, 1e4, &RadialGrid::new(201, geom.radius).unwrap()).unwrap();
        let exact = -1e4 * geom.radius * geom.radius / 8.0;
        let got = *sol.radial_moment.last().unwrap();
        assert!(rel_diff(got, exact) < 0.02, "{got} vs {exact}");
    }

    #[test]
    fn single_layer_stress_is_six_m_over_h_squared() {
        let geom = DeviceGeometry {
            laminate: Laminate::single(typical::polyimide(25e-6)).unwrap(),
            ..fem_geometry()
        };
        let sol = solve_plate(&geom, 1e4, &RadialGrid::new(101, geom.radius).unwrap()).unwrap();
        let h = 25e-6;
        let m = *sol.radial_moment.last().unwrap();
        assert!(rel_diff(sol.edge_radial_stress.abs(), 6.0 * m.abs() / (h * h)) < 1e-12);
    }

    #[test]
    fn solution_is_linear_in_pressure() {
        let geom = fem_geometry();
        let grid = RadialGrid::new(101, geom.radius).unwrap();
        let a = solve_plate(&geom, 3e3, &grid).unwrap();
        let b = solve_plate(&geom, 6e3, &grid).unwrap();
        for (x, y) in a.deflection.iter().zip(&b.deflection) {
            assert!(rel_diff(2.0 * x, *y) < 1e-12);
        }
        let fit = linearity_check(&geom, &[2e3, 4e3, 6e3, 8e3, 1e4], &grid).unwrap();
        assert!(fit.r_squared >= 1.0 - 1e-9);
        let unit = solve_plate(&geom, 1.0, &grid).unwrap().center_deflection;
        assert!(rel_diff(fit.slope, unit) < 1e-9);
        assert!(linearity_check(&geom, &[1e3, 1e3, 1e3], &grid).is_err());
        assert!(linearity_check(&geom, &[1e3, 2e3], &grid).is_err());
    }

    #[test]
    fn grid_radius_must_match() {
        let geom = fem_geometry();
        assert!(solve_plate(&geom, 1.0, &RadialGrid::new(51, 1.0).unwrap()).is_err());
    }
}

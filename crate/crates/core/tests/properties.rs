use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use touchcap_core::calibration::{
    fit_model, rise_time, segment_modes, sensitivity_linearity, FitParameter, FitSettings,
    MeasuredSeries, ParameterBound,
};
use touchcap_core::capacitance::{
    normal_mode_capacitance_at, normal_mode_capacitance_quadrature, touch_mode_capacitance_with,
    SweepSettings,
};
use touchcap_core::materials::{typical, Laminate};
use touchcap_core::math::rel_diff;
use touchcap_core::quad::QuadSettings;
use touchcap_core::*;

fn geometry() -> impl Strategy<Value = DeviceGeometry> {
    (
        1e-4..2e-2f64,
        20e-6..2e-3f64,
        0.0..1e7f64,
        prop_oneof![Just(0.0), 1e-6..100e-6f64],
        1.0..12.0f64,
        1.0..3.0f64,
        prop_oneof![Just(true), Just(false)],
    )
        .prop_map(
            |(radius, gap, stress, t1, eps_t1, eps_r, laminate)| DeviceGeometry {
                radius,
                laminate: if laminate {
                    typical::al_on_polyimide()
                } else {
                    Laminate::single(typical::polyimide(25e-6)).unwrap()
                },
                gap,
                builtin_stress: stress,
                dielectric_thickness: t1,
                dielectric_rel_permittivity: eps_t1,
                medium_rel_permittivity: eps_r,
            },
        )
}

fn touching_geometry() -> impl Strategy<Value = DeviceGeometry> {
    geometry().prop_map(|mut g| {
        if g.dielectric_thickness == 0.0 {
            g.dielectric_thickness = 10e-6;
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_mode_closed_form_matches_quadrature(geom in geometry(), frac in 0.01..0.95f64) {
        let w0 = frac * geom.effective_gap();
        let cf = normal_mode_capacitance_at(&geom, w0).unwrap();
        let q = normal_mode_capacitance_quadrature(&geom, w0, &QuadSettings::default()).unwrap();
        prop_assert!(rel_diff(cf, q) < 1e-9);
    }

    #[test]
    fn normal_mode_increases_with_deflection(geom in geometry(), a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let d = geom.effective_gap();
        prop_assert!(normal_mode_capacitance_at(&geom, lo * d).unwrap() < normal_mode_capacitance_at(&geom, hi * d).unwrap());
    }

    #[test]
    fn touch_mode_parts_add_up(geom in touching_geometry(), ratio in 1.0001..50.0f64) {
        let state = DeflectionState::from_unconstrained(&geom, 0.0, ratio * geom.gap, DeflectionRegime::LargeNonlinear);
        for method in [CapacitanceMethod::Quadrature, CapacitanceMethod::ClosedForm] {
            let b = touch_mode_capacitance_with(&geom, &state, method, &QuadSettings::default()).unwrap();
            prop_assert!(b.touched_part >= 0.0 && b.untouched_part >= 0.0);
            prop_assert!(rel_diff(b.total, b.touched_part + b.untouched_part) < 1e-12);
        }
        let q = touch_mode_capacitance_with(&geom, &state, CapacitanceMethod::Quadrature, &QuadSettings::default()).unwrap();
        let c = touch_mode_capacitance_with(&geom, &state, CapacitanceMethod::ClosedForm, &QuadSettings::default()).unwrap();
        prop_assert!(rel_diff(q.total, c.total) < 1e-9);
    }

    #[test]
    fn touch_onset_is_continuous(geom in touching_geometry()) {
        // bisection on W0(P) = g
        let g = geom.travel();
        let (mut lo, mut hi) = (0.0, 1.0);
        while large_deflection_center(&geom, hi).unwrap() < g {
            hi *= 2.0;
        }
        while (hi - lo) > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if large_deflection_center(&geom, mid).unwrap() < g { lo = mid } else { hi = mid }
        }
        let before = DeflectionState::solve(&geom, lo, DeflectionRegime::LargeNonlinear).unwrap();
        let after = DeflectionState::solve(&geom, hi, DeflectionRegime::LargeNonlinear).unwrap();
        prop_assert!(!before.is_touching());
        prop_assert!(after.is_touching());
        let normal = normal_mode_capacitance(&geom, &before).unwrap();
        let touch = touch_mode_capacitance_with(&geom, &after, CapacitanceMethod::Quadrature, &QuadSettings::default()).unwrap();
        prop_assert!(rel_diff(normal, touch.total) < 1e-6);
    }

    #[test]
    fn sweep_capacitance_is_monotone(geom in touching_geometry(), top in 1e2..1e5f64) {
        let p: Vec<f64> = (0..40).map(|i| top * i as f64 / 39.0).collect();
        let settings = SweepSettings { method: CapacitanceMethod::ClosedForm, ..SweepSettings::default() };
        let curve = sweep_cp_curve(&geom, &p, &settings).unwrap();
        let c = curve.capacitances();
        prop_assert!(c.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(curve.points.windows(2).all(|w| w[1].mode >= w[0].mode));
    }

    #[test]
    fn contact_radius_grows_and_stays_inside(geom in touching_geometry(), p1 in 0.0..1e6f64, p2 in 0.0..1e6f64) {
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        let a_lo = contact_radius(&geom, lo).unwrap();
        let a_hi = contact_radius(&geom, hi).unwrap();
        prop_assert!(a_lo <= a_hi);
        prop_assert!(a_hi < geom.radius);
    }

    #[test]
    fn large_matches_small_when_stiffening_is_negligible(geom in geometry(), frac in 1e-4..1.0f64) {
        // choose P so that 0.488 (W0/h)^2 < 1e-5
        let h = geom.thickness();
        let w_target = frac * h * (1e-5f64 / 0.488).sqrt();
        let p = w_target * (1.0 + geom.stress_term()) / geom.plate_load(1.0);
        let large = large_deflection_center(&geom, p).unwrap();
        let small = small_deflection_center(&geom, p).unwrap();
        prop_assert!(0.488 * (large / h) * (large / h) < 1e-5);
        prop_assert!(rel_diff(large, small) < 1e-3);
    }

    #[test]
    fn rise_time_is_affine_invariant(alpha in 0.01..100.0f64, beta in -1e-9..1e-9f64, tau in 1e-3..2e-2f64) {
        let t: Vec<f64> = (0..1000).map(|i| i as f64 * 1e-3 / 4.0).collect();
        let c: Vec<f64> = t.iter().map(|&ti| if ti < 0.05 { 0.0 } else { 1.0 - (-(ti - 0.05) / tau).exp() }).collect();
        let base = rise_time(&MeasuredSeries::time(t.clone(), c.clone(), "a").unwrap()).unwrap();
        let scaled: Vec<f64> = c.iter().map(|v| alpha * v + beta).collect();
        let other = rise_time(&MeasuredSeries::time(t, scaled, "b").unwrap()).unwrap();
        prop_assert!((base - other).abs() < 1e-9 * base.max(1e-3));
    }

    #[test]
    fn sensitivity_scales_inversely_with_pressure_units(k in 0.1..1000.0f64, slope in 1e-16..1e-14f64, curve in 0.0..1e-22f64) {
        let p: Vec<f64> = (0..20).map(|i| i as f64 * 1e3).collect();
        let c: Vec<f64> = p.iter().map(|v| 1e-12 + slope * v + curve * v * v).collect();
        let a = sensitivity_linearity(&MeasuredSeries::pressure(p.clone(), c.clone(), "a").unwrap(), 0.0, 2e4).unwrap();
        let scaled: Vec<f64> = p.iter().map(|v| v * k).collect();
        let b = sensitivity_linearity(&MeasuredSeries::pressure(scaled, c, "b").unwrap(), 0.0, 2e4 * k).unwrap();
        prop_assert!(rel_diff(a.slope / k, b.slope) < 1e-9);
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-9);
    }
}

/// Least-squares SSE of the continuous piecewise-linear fit through dense
/// normal equations on the hat basis, solved by Gaussian elimination.
#[allow(clippy::needless_range_loop)]
fn dense_piecewise_sse(x: &[f64], y: &[f64], knots: [usize; 5]) -> f64 {
    let k: Vec<f64> = knots.iter().map(|&i| x[i]).collect();
    let hat = |q: usize, xv: f64| -> f64 {
        let left = if q > 0 && xv >= k[q - 1] && xv <= k[q] {
            (xv - k[q - 1]) / (k[q] - k[q - 1])
        } else {
            0.0
        };
        let right = if q < 4 && xv >= k[q] && xv <= k[q + 1] {
            (k[q + 1] - xv) / (k[q + 1] - k[q])
        } else {
            0.0
        };
        left.max(right)
    };
    let mut a = [[0.0f64; 6]; 5];
    for (&xv, &yv) in x.iter().zip(y) {
        let b: Vec<f64> = (0..5).map(|q| hat(q, xv)).collect();
        for r in 0..5 {
            for c in 0..5 {
                a[r][c] += b[r] * b[c];
            }
            a[r][5] += b[r] * yv;
        }
    }
    for col in 0..5 {
        let piv = (col..5)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for r in col + 1..5 {
            let f = a[r][col] / a[col][col];
            for c in col..6 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut coef = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|c| a[r][c] * coef[c]).sum();
        coef[r] = (a[r][5] - s) / a[r][r];
    }
    x.iter()
        .zip(y)
        .map(|(&xv, &yv)| {
            let fit: f64 = (0..5).map(|q| coef[q] * hat(q, xv)).sum();
            (yv - fit) * (yv - fit)
        })
        .sum()
}

#[test]
fn segmentation_attains_the_exhaustive_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let n = rng.gen_range(12..20);
        let x: Vec<f64> = (0..n).map(|i| i as f64 + rng.gen_range(0.0..0.5)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| (0.3 * v).sin() * 2.0 + rng.gen_range(-0.2..0.2))
            .collect();
        let seg =
            segment_modes(&MeasuredSeries::pressure(x.clone(), y.clone(), "r").unwrap()).unwrap();
        let mut best = f64::INFINITY;
        for i in 1..n - 3 {
            for j in i + 1..n - 2 {
                for k in j + 1..n - 1 {
                    best = best.min(dense_piecewise_sse(&x, &y, [0, i, j, k, n - 1]));
                }
            }
        }
        let [i, j, k] = seg.boundary_indices;
        let chosen = dense_piecewise_sse(&x, &y, [0, i, j, k, n - 1]);
        assert!(chosen <= best * (1.0 + 1e-9) + 1e-12, "{chosen} vs {best}");
        assert!(rel_diff(seg.sse, chosen) < 1e-6);
    }
}

#[test]
fn fit_recovers_every_single_parameter() {
    let truth = DeviceGeometry {
        radius: 0.01,
        laminate: typical::al_on_polyimide(),
        gap: 682e-6,
        builtin_stress: 2e5,
        dielectric_thickness: 25e-6,
        dielectric_rel_permittivity: 3.4,
        medium_rel_permittivity: 1.0,
    };
    let settings = FitSettings::default();
    let p: Vec<f64> = (0..=60).map(|i| i as f64 * 1e3).collect();
    let c = p
        .iter()
        .map(|&x| {
            capacitance_at(&truth, x, &settings.sweep)
                .unwrap()
                .capacitance
        })
        .collect();
    let data = MeasuredSeries::pressure(p, c, "truth").unwrap();
    let cases = [
        (FitParameter::Gap, 300e-6, 1500e-6),
        (FitParameter::BuiltinStress, 0.0, 1e6),
        (FitParameter::DielectricThickness, 5e-6, 100e-6),
        (FitParameter::DielectricRelPermittivity, 1.0, 10.0),
    ];
    for (param, lo, hi) in cases {
        let bounds = [ParameterBound { param, lo, hi }];
        let mut start = truth.clone();
        match param {
            FitParameter::Gap => start.gap = 0.8 * truth.gap,
            FitParameter::BuiltinStress => start.builtin_stress = 0.5 * truth.builtin_stress,
            FitParameter::DielectricThickness => {
                start.dielectric_thickness = 1.5 * truth.dielectric_thickness
            }
            FitParameter::DielectricRelPermittivity => start.dielectric_rel_permittivity = 2.0,
            FitParameter::ParasiticOffset => unreachable!(),
        }
        let fit = fit_model(&data, &start, &bounds, &settings).unwrap();
        let got = fit.value(param).unwrap();
        let want = match param {
            FitParameter::Gap => truth.gap,
            FitParameter::BuiltinStress => truth.builtin_stress,
            FitParameter::DielectricThickness => truth.dielectric_thickness,
            _ => truth.dielectric_rel_permittivity,
        };
        assert!(rel_diff(got, want) < 1e-3, "{param}: {got} vs {want}");
    }
}

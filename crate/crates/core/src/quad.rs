//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |integral|)` or the subinterval cap
//! is reached.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{ModelError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the center.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subintervals: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subintervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, returning the best estimate even when the
/// tolerance was not met (`converged == false`).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, settings: &QuadSettings) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            subintervals: 0,
            converged: true,
        };
    }
    let (value, error) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let tolerance = |total: f64| settings.abs_tol.max(settings.rel_tol * total.abs());

    while total_err > tolerance(total) && heap.len() < settings.max_subintervals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (lv, le) = kronrod15(&f, worst.a, mid);
        let (rv, re) = kronrod15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }

    // re-sum to shed the drift of the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    QuadResult {
        value,
        error,
        subintervals: heap.len(),
        converged: error <= tolerance(value),
    }
}

/// Like [`integrate`] but reports non-convergence as an error.
pub fn integrate_checked<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    let r = integrate(f, a, b, settings);
    if r.converged && r.value.is_finite() {
        Ok(r.value)
    } else {
        Err(ModelError::NonConvergence("adaptive quadrature"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rel_diff;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let r = integrate(
            |x| x.powi(20) + 3.0 * x,
            -1.0,
            2.0,
            &QuadSettings::default(),
        );
        let exact = (2f64.powi(21) + 1.0) / 21.0 + 3.0 * (4.0 - 1.0) / 2.0;
        assert!(rel_diff(r.value, exact) < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn near_singular_integrand_converges() {
        // 1/(1 - 0.999 x^2) on [0,1] = atanh(sqrt(0.999)) / sqrt(0.999)
        let c = 0.999_f64;
        let r = integrate(
            |x| 1.0 / (1.0 - c * x * x),
            0.0,
            1.0,
            &QuadSettings::default(),
        );
        let exact = libm::atanh(c.sqrt()) / c.sqrt();
        assert!(r.converged);
        assert!(rel_diff(r.value, exact) < 1e-10, "{} vs {}", r.value, exact);
        assert!(r.subintervals > 1);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let s = QuadSettings::default();
        assert_eq!(integrate(|x| x, 1.0, 1.0, &s).value, 0.0);
        let r = integrate(|x| x, 1.0, 0.0, &s);
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn subinterval_cap_reports_non_convergence() {
        let s = QuadSettings {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_subintervals: 2,
        };
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 1e-12, 1.0, &s);
        assert!(!r.converged);
        assert!(integrate_checked(|x: f64| 1.0 / x.sqrt(), 1e-12, 1.0, &s).is_err());
    }
}

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ModelError, Result};
use crate::stats::{fit_line, LinearFit};

use super::series::{MeasuredSeries, SeriesKind};

pub const MIN_SEGMENTATION_SAMPLES: usize = 12;

/// Ordinary least-squares line over one segment's samples (endpoints shared
/// with the neighbouring segments).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentFit {
    pub start_pressure: f64,
    pub end_pressure: f64,
    /// Sensitivity (F/Pa).
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Best continuous four-piece linear description of a C–P curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeSegmentation {
    /// Normal→transition, transition→touch, touch→saturation (Pa).
    pub boundaries: [f64; 3],
    pub boundary_indices: [usize; 3],
    /// Normal, transition, touch, saturation.
    pub segments: [SegmentFit; 4],
    /// Squared error of the piecewise-linear fit (F²).
    pub sse: f64,
    /// Set when the four-piece fit is no better than a single line.
    pub low_confidence: bool,
}

/// Running sums over samples `0..m` for O(1) range moments.
struct Prefix {
    s0: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    sy: Vec<f64>,
    sxy: Vec<f64>,
}

impl Prefix {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut p = Prefix {
            s0: vec![0.0; n + 1],
            s1: vec![0.0; n + 1],
            s2: vec![0.0; n + 1],
            sy: vec![0.0; n + 1],
            sxy: vec![0.0; n + 1],
        };
        for m in 0..n {
            p.s0[m + 1] = p.s0[m] + 1.0;
            p.s1[m + 1] = p.s1[m] + x[m];
            p.s2[m + 1] = p.s2[m] + x[m] * x[m];
            p.sy[m + 1] = p.sy[m] + y[m];
            p.sxy[m + 1] = p.sxy[m] + x[m] * y[m];
        }
        p
    }

    fn range(&self, lo: usize, hi: usize) -> [f64; 5] {
        [
            self.s0[hi] - self.s0[lo],
            self.s1[hi] - self.s1[lo],
            self.s2[hi] - self.s2[lo],
            self.sy[hi] - self.sy[lo],
            self.sxy[hi] - self.sxy[lo],
        ]
    }
}

/// Squared error of the least-squares continuous piecewise-linear fit with
/// knots at `x[knots[..]]`, via the tridiagonal hat-basis normal equations.
fn piecewise_sse(x: &[f64], prefix: &Prefix, yy: f64, knots: &[usize; 5]) -> f64 {
    let mut diag = [0.0; 5];
    let mut off = [0.0; 4];
    let mut rhs = [0.0; 5];
    for s in 0..4 {
        let (a, b) = (knots[s], knots[s + 1]);
        // each sample belongs to exactly one segment; the left knot goes to the first
        let lo = if s == 0 { a } else { a + 1 };
        let [c0, c1, c2, cy, cxy] = prefix.range(lo, b + 1);
        let xa = x[a];
        let len = x[b] - xa;
        // t = (x - xa) / len on the segment; basis (1 - t, t)
        let st = (c1 - xa * c0) / len;
        let st2 = (c2 - 2.0 * xa * c1 + xa * xa * c0) / (len * len);
        let sty = (cxy - xa * cy) / len;
        diag[s] += c0 - 2.0 * st + st2;
        off[s] += st - st2;
        diag[s + 1] += st2;
        rhs[s] += cy - sty;
        rhs[s + 1] += sty;
    }
    let mut cp = [0.0; 4];
    let mut dp = [0.0; 5];
    cp[0] = off[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for q in 1..5 {
        let den = diag[q] - off[q - 1] * cp[q - 1];
        if q < 4 {
            cp[q] = off[q] / den;
        }
        dp[q] = (rhs[q] - off[q - 1] * dp[q - 1]) / den;
    }
    let mut c = [0.0; 5];
    c[4] = dp[4];
    for q in (0..4).rev() {
        c[q] = dp[q] - cp[q] * c[q + 1];
    }
    yy - c.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>()
}

/// Splits a C–P curve into normal, transition, touch and saturation segments.
///
/// Every on-grid boundary triple `1 ≤ i < j < k ≤ n − 2` is scored by the
/// squared error of the best continuous four-piece linear fit; the first
/// triple attaining the minimum wins. When that fit is no better than a single
/// line the boundaries are moved to `(x₁, x_{n−3}, x_{n−2})` and the result is
/// flagged `low_confidence`.
pub fn segment_modes(data: &MeasuredSeries) -> Result<ModeSegmentation> {
    data.expect(SeriesKind::PressureCapacitance)?;
    let n = data.len();
    if n < MIN_SEGMENTATION_SAMPLES {
        return Err(ModelError::InsufficientData {
            needed: MIN_SEGMENTATION_SAMPLES,
            got: n,
        });
    }
    let p = data.abscissa();
    let c = data.capacitance();
    let mean = c.iter().sum::<f64>() / n as f64;
    let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return Err(ModelError::Degenerate("all capacitance samples are equal"));
    }
    // unit-free coordinates keep the normal equations well conditioned
    let std = crate::math::sqrt(var);
    let span = p[n - 1] - p[0];
    let x: Vec<f64> = p.iter().map(|v| (v - p[0]) / span).collect();
    let y: Vec<f64> = c.iter().map(|v| (v - mean) / std).collect();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let prefix = Prefix::new(&x, &y);

    let mut best = (f64::INFINITY, [1, 2, 3]);
    for i in 1..n - 3 {
        for j in i + 1..n - 2 {
            for k in j + 1..n - 1 {
                let sse = piecewise_sse(&x, &prefix, yy, &[0, i, j, k, n - 1]);
                if sse < best.0 {
                    best = (sse, [i, j, k]);
                }
            }
        }
    }
    let single = fit_line(&x, &y)?;
    let single_sse = (1.0 - single.r_squared) * yy;
    let low_confidence = single_sse - best.0 <= 1e-9 * yy;
    let indices = if low_confidence {
        [1, n - 3, n - 2]
    } else {
        best.1
    };

    let knots = [0, indices[0], indices[1], indices[2], n - 1];
    let mut segments = [SegmentFit {
        start_pressure: 0.0,
        end_pressure: 0.0,
        slope: 0.0,
        intercept: 0.0,
        r_squared: 0.0,
        samples: 0,
    }; 4];
    for (s, seg) in segments.iter_mut().enumerate() {
        let (a, b) = (knots[s], knots[s + 1]);
        let LinearFit {
            slope,
            intercept,
            r_squared,
            samples,
        } = fit_line(&p[a..=b], &c[a..=b])?;
        *seg = SegmentFit {
            start_pressure: p[a],
            end_pressure: p[b],
            slope,
            intercept,
            r_squared,
            samples,
        };
    }
    let sse = piecewise_sse(&x, &prefix, yy, &knots).max(0.0) * var;
    Ok(ModeSegmentation {
        boundaries: [p[indices[0]], p[indices[1]], p[indices[2]]],
        boundary_indices: indices,
        segments,
        sse,
        low_confidence,
    })
}

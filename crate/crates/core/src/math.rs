//! Thin wrappers over `libm` so the same routines are used with and without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `atanh(sqrt(x)) / sqrt(x)` for `0 <= x < 1`, continuous at `x = 0` where it equals 1.
pub fn atanh_sqrt_ratio(x: f64) -> f64 {
    if x < 1e-8 {
        // 1 + x/3 + x^2/5 + ...
        1.0 + x / 3.0 + x * x / 5.0
    } else {
        let s = sqrt(x);
        atanh(s) / s
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

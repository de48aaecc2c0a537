//! Complex scalars with principal-branch conventions.
//!
//! Square roots and logarithms use the principal branch with the argument
//! taken in `(-π, π]`. On the negative real axis the result is the limit from
//! the upper half plane regardless of the sign of a zero imaginary part, so
//! `sqrt(-1) = i` even for `-1 - 0i`.

use std::f64::consts::PI;

pub use num_complex::Complex64 as Cx;

pub const I: Cx = Cx::new(0.0, 1.0);
pub const ONE: Cx = Cx::new(1.0, 0.0);
pub const ZERO: Cx = Cx::new(0.0, 0.0);

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

/// Argument in `(-π, π]`.
#[inline]
pub fn arg(w: Cx) -> f64 {
    if w.im == 0.0 && w.re < 0.0 {
        PI
    } else {
        w.im.atan2(w.re)
    }
}

/// `sqrt(r e^{iθ}) = sqrt(r) e^{iθ/2}` with `-π < θ ≤ π`.
pub fn sqrt(w: Cx) -> Cx {
    if w.im == 0.0 {
        if w.re >= 0.0 {
            return Cx::new(w.re.sqrt(), 0.0);
        }
        return Cx::new(0.0, (-w.re).sqrt());
    }
    let r = w.norm();
    // Half-angle formulas; avoids the cancellation of sqrt(r) * cis(θ/2).
    let t = ((r + w.re.abs()) * 0.5).sqrt();
    if w.re >= 0.0 {
        Cx::new(t, w.im / (2.0 * t))
    } else {
        Cx::new(w.im.abs() / (2.0 * t), t.copysign(w.im))
    }
}

/// Principal logarithm, imaginary part in `(-π, π]`.
pub fn ln(w: Cx) -> Cx {
    Cx::new(w.norm().ln(), arg(w))
}

/// Distance of `arg(w)` to the cut at `±π`.
#[inline]
pub fn cut_distance(w: Cx) -> f64 {
    PI - arg(w).abs()
}

/// Principal `atan`, `i/2 (log(1 - i w) - log(1 + i w))`.
pub fn atan(w: Cx) -> Cx {
    let iw = I * w;
    I * 0.5 * (ln(ONE - iw) - ln(ONE + iw))
}

/// Principal `artanh`, `1/2 (log(1 + w) - log(1 - w))`.
pub fn atanh(w: Cx) -> Cx {
    0.5 * (ln(ONE + w) - ln(ONE - w))
}

/// Largest modulus in a slice, 0 for an empty slice.
pub fn max_norm<'a>(it: impl IntoIterator<Item = &'a Cx>) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_minus_one_is_i_on_both_signed_zeros() {
        assert_eq!(sqrt(cx(-1.0, 0.0)), I);
        assert_eq!(sqrt(cx(-1.0, -0.0)), I);
    }

    #[test]
    fn sqrt_of_2i() {
        let s = sqrt(cx(0.0, 2.0));
        assert!((s - cx(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_lands_in_right_half_plane() {
        for &(re, im) in &[(3.0, -4.0), (-3.0, 4.0), (-3.0, -4.0), (1e-300, 1e-300), (-2.0, 1e-20)] {
            let w = cx(re, im);
            let s = sqrt(w);
            let a = arg(s);
            assert!(a > -PI / 2.0 && a <= PI / 2.0, "{w} -> {s}");
            assert!((s * s - w).norm() <= 1e-14 * w.norm().max(1e-300), "{w}");
        }
    }

    #[test]
    fn atanh_half() {
        assert!((atanh(cx(0.5, 0.0)).re - 0.549_306_144_334_054_8).abs() < 1e-15);
    }

    #[test]
    fn log_matches_num_complex_off_cut() {
        let w = cx(-0.3, 0.8);
        assert!((ln(w) - w.ln()).norm() < 1e-15);
    }
}

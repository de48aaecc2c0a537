//! Adaptive Gauss–Kronrod integration of complex-valued integrands and the
//! lifting of integral-defined functions into jet arithmetic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cx::{Cx, ZERO};
use crate::error::{Error, Result};
use crate::jet::Jet;

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_EVALS: usize = 100_000;

// 15-point Kronrod nodes on [-1, 1] (non-negative half, descending), with the
// embedded 7-point Gauss rule on the odd-indexed nodes.
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Cx,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Cx,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the bisection order is reproducible
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Cx>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx)?, f(c + dx)?);
        k += (f1 + f2) * WGK[i];
        abs_sum += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * WG[i / 2];
        }
    }
    let value = k * h;
    let abs_mass = abs_sum * h.abs();
    let error = ((k - g) * h).norm().max(50.0 * f64::EPSILON * abs_mass);
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection of a
/// 15-point Gauss–Kronrod rule.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Cx>,
{
    integrate_with(
        f,
        a,
        b,
        &QuadConfig {
            abs_tol,
            rel_tol,
            max_evals: DEFAULT_MAX_EVALS,
        },
    )
}

pub fn integrate_with<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Cx>,
{
    if a == b {
        return Ok(QuadResult {
            value: ZERO,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let first = kronrod15(&f, a, b)?;
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.norm()) {
            break;
        }
        if evaluations + 30 > cfg.max_evals {
            let worst = heap.peek().expect("non-empty");
            return Err(Error::Accuracy {
                evaluations,
                worst_a: worst.a,
                worst_b: worst.b,
                error,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod15(&f, worst.a, mid)?;
        let right = kronrod15(&f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().fold(ZERO, |acc, p| acc + p.value);
    let error = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        evaluations,
    })
}

/// A univariate analytic integrand with access to its Taylor expansion.
pub trait Integrand: Sync {
    fn at(&self, t: Cx) -> Result<Cx>;
    /// Univariate Taylor series (a jet in one variable) at `t`.
    fn series(&self, t: Cx, order: usize) -> Result<Jet>;
}

/// Integrates along the straight segment from `base` to `upper`, which is a
/// real interval for real `upper`.
pub fn integrate_segment<I: Integrand + ?Sized>(integrand: &I, base: f64, upper: Cx, cfg: &QuadConfig) -> Result<QuadResult> {
    if upper.im == 0.0 {
        return integrate_with(|t| integrand.at(Cx::new(t, 0.0)), base, upper.re, cfg);
    }
    let span = upper - base;
    let r = integrate_with(|tau| integrand.at(Cx::new(base, 0.0) + span * tau), 0.0, 1.0, cfg)?;
    Ok(QuadResult {
        value: r.value * span,
        abs_error_estimate: r.abs_error_estimate * span.norm(),
        evaluations: r.evaluations,
    })
}

/// Jet of `G(u) = ∫_base^{u} φ(t) dt` at the jet `upper`.
///
/// The value comes from adaptive quadrature; every derivative coefficient
/// comes from the Taylor series of `φ` at `value(upper)` (fundamental theorem
/// of calculus), composed with `upper`.
pub fn integral_jet<I: Integrand + ?Sized>(integrand: &I, base: f64, upper: &Jet, cfg: &QuadConfig) -> Result<Jet> {
    let u0 = upper.value();
    let q = integrate_segment(integrand, base, u0, cfg)?;
    let order = upper.order();
    let mut antider = vec![q.value];
    if order > 0 {
        let phi = integrand.series(u0, order - 1)?;
        antider.extend(phi.coeffs().iter().enumerate().map(|(m, c)| c / (m + 1) as f64));
    }
    Ok(upper.compose(&antider))
}

/// Adapts a closure on univariate jets into an [`Integrand`].
pub struct JetIntegrand<F>(pub F);

impl<F> Integrand for JetIntegrand<F>
where
    F: Fn(&Jet) -> Result<Jet> + Sync,
{
    fn at(&self, t: Cx) -> Result<Cx> {
        Ok((self.0)(&Jet::constant(t, 1, 0)?)?.value())
    }

    fn series(&self, t: Cx, order: usize) -> Result<Jet> {
        (self.0)(&Jet::var_unchecked(1, t, 1, order)?)
    }
}

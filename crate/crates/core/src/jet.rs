//! Truncated multivariate Taylor expansions ("jets") over complex scalars.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^α f / α!` of a function of
//! `nvars` parameters for every multi-index `|α| ≤ order`, laid out densely in
//! graded-lexicographic order. Because the layout is graded, the layout of
//! order `K - 1` is a prefix of the layout of order `K`; truncation is a slice
//! and differentiation maps an order-`K` jet to an order-`K - 1` jet.
//!
//! Arithmetic between jets of different orders truncates to the smaller order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::cx::{self, Cx, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest order accepted by the public constructors.
pub const MAX_ORDER: usize = 4;
/// Internal ceiling; univariate profile expansions go one or two orders
/// beyond [`MAX_ORDER`] when a derivative of a profile is itself expanded.
pub const MAX_INTERNAL_ORDER: usize = 6;
pub const MAX_VARS: usize = 8;

/// Default proximity tolerance to poles and branch cuts.
pub const DEFAULT_BRANCH_TOL: f64 = 1e-9;

type Exps = [u8; MAX_VARS];

/// Index tables for one `(nvars, order)` pair.
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Exps>,
    degree: Vec<u8>,
    lookup: HashMap<Exps, usize>,
    /// `(i, j, k)` with `exps[i] + exps[j] = exps[k]`.
    mul: Vec<(u32, u32, u32)>,
    /// `raise[v][i]` is the index of `exps[i] + e_v`, defined for `degree[i] < order`.
    raise: Vec<Vec<u32>>,
    /// `α!` per index.
    factorial: Vec<f64>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        let mut degree = Vec::new();
        for d in 0..=order {
            let mut cur = [0u8; MAX_VARS];
            compositions(nvars, d, 0, &mut cur, &mut exps);
            degree.resize(exps.len(), d as u8);
        }
        let lookup: HashMap<Exps, usize> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let len = exps.len();
        let mut mul = Vec::new();
        for i in 0..len {
            for j in 0..len {
                if degree[i] as usize + degree[j] as usize > order {
                    continue;
                }
                let mut e = [0u8; MAX_VARS];
                for v in 0..nvars {
                    e[v] = exps[i][v] + exps[j][v];
                }
                mul.push((i as u32, j as u32, lookup[&e] as u32));
            }
        }
        let mut raise = vec![Vec::new(); nvars];
        for (v, row) in raise.iter_mut().enumerate() {
            for i in 0..len {
                if (degree[i] as usize) < order {
                    let mut e = exps[i];
                    e[v] += 1;
                    row.push(lookup[&e] as u32);
                }
            }
        }
        let factorial = exps
            .iter()
            .map(|e| e[..nvars].iter().map(|&k| fact(k as usize)).product())
            .collect();
        Layout {
            nvars,
            order,
            exps,
            degree,
            lookup,
            mul,
            raise,
            factorial,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients of degree `< d`, i.e. the length of the
    /// order-`d - 1` prefix.
    fn prefix_len(&self, order: usize) -> usize {
        self.degree.partition_point(|&g| (g as usize) <= order)
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.exps[i][..self.nvars]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() != self.nvars {
            return None;
        }
        let mut e = [0u8; MAX_VARS];
        e[..self.nvars].copy_from_slice(alpha);
        self.lookup.get(&e).copied()
    }
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All exponent vectors of total degree `d` over variables `v..nvars`,
/// lexicographically descending.
fn compositions(nvars: usize, d: usize, v: usize, cur: &mut Exps, out: &mut Vec<Exps>) {
    if v + 1 == nvars {
        cur[v] = d as u8;
        out.push(*cur);
        cur[v] = 0;
        return;
    }
    for k in (0..=d).rev() {
        cur[v] = k as u8;
        compositions(nvars, d - k, v + 1, cur, out);
    }
    cur[v] = 0;
}

static LAYOUTS: [[OnceLock<Layout>; MAX_INTERNAL_ORDER + 1]; MAX_VARS + 1] =
    [const { [const { OnceLock::new() }; MAX_INTERNAL_ORDER + 1] }; MAX_VARS + 1];

fn layout(nvars: usize, order: usize) -> &'static Layout {
    debug_assert!((1..=MAX_VARS).contains(&nvars) && order <= MAX_INTERNAL_ORDER);
    LAYOUTS[nvars][order].get_or_init(|| Layout::build(nvars, order))
}

/// Elementary functions that can be lifted to jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElemFn {
    Sin,
    Cos,
    Tan,
    SqrtPrincipal,
    LogPrincipal,
    Atan,
    Artanh,
    Reciprocal,
    Exp,
}

impl ElemFn {
    pub fn name(self) -> &'static str {
        match self {
            ElemFn::Sin => "sin",
            ElemFn::Cos => "cos",
            ElemFn::Tan => "tan",
            ElemFn::SqrtPrincipal => "sqrt_principal",
            ElemFn::LogPrincipal => "log_principal",
            ElemFn::Atan => "atan",
            ElemFn::Artanh => "artanh",
            ElemFn::Reciprocal => "reciprocal",
            ElemFn::Exp => "exp",
        }
    }

    /// Plain scalar evaluation (no domain checks).
    pub fn eval(self, w: Cx) -> Cx {
        match self {
            ElemFn::Sin => w.sin(),
            ElemFn::Cos => w.cos(),
            ElemFn::Tan => w.sin() / w.cos(),
            ElemFn::SqrtPrincipal => cx::sqrt(w),
            ElemFn::LogPrincipal => cx::ln(w),
            ElemFn::Atan => cx::atan(w),
            ElemFn::Artanh => cx::atanh(w),
            ElemFn::Reciprocal => ONE / w,
            ElemFn::Exp => w.exp(),
        }
    }

    fn check_domain(self, w: Cx, tol: f64, constant: bool) -> Result<()> {
        let err = |reason: &str| Err(Error::domain(self.name(), w, reason));
        match self {
            ElemFn::SqrtPrincipal | ElemFn::LogPrincipal => {
                if w == ZERO {
                    return err("branch point at 0");
                }
                // A constant carries no derivative information, so sitting on
                // the cut itself is harmless.
                if !constant && cx::cut_distance(w) < tol {
                    return err("argument on or near the branch cut arg = ±π");
                }
            }
            ElemFn::Tan => {
                if w.cos().norm() < tol {
                    return err("pole of tan");
                }
            }
            ElemFn::Atan => {
                if (ONE + w * w).norm() < tol {
                    return err("pole of atan at ±i");
                }
            }
            ElemFn::Artanh => {
                if (ONE - w * w).norm() < tol {
                    return err("pole of artanh at ±1");
                }
            }
            ElemFn::Reciprocal => {
                if w.norm() < f64::MIN_POSITIVE {
                    return err("division by zero");
                }
            }
            ElemFn::Sin | ElemFn::Cos | ElemFn::Exp => {}
        }
        Ok(())
    }

    /// Taylor coefficients `f^{(m)}(w)/m!`, `m = 0..=order`.
    pub fn taylor(self, w: Cx, order: usize) -> Vec<Cx> {
        let n = order + 1;
        match self {
            ElemFn::Exp => {
                let e = w.exp();
                (0..n).map(|m| e / fact(m)).collect()
            }
            ElemFn::Sin | ElemFn::Cos => {
                let (s, c) = (w.sin(), w.cos());
                let cycle = if self == ElemFn::Sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
                (0..n).map(|m| cycle[m % 4] / fact(m)).collect()
            }
            ElemFn::Tan => {
                let s = ElemFn::Sin.taylor(w, order);
                let c = ElemFn::Cos.taylor(w, order);
                series_div(&s, &c)
            }
            ElemFn::SqrtPrincipal => {
                let r = cx::sqrt(w);
                let mut out = Vec::with_capacity(n);
                let mut coef = r;
                out.push(coef);
                for m in 1..n {
                    // binom(1/2, m) recurrence
                    coef *= (0.5 - (m - 1) as f64) / m as f64;
                    coef /= w;
                    out.push(coef);
                }
                out
            }
            ElemFn::LogPrincipal => {
                let mut out = vec![cx::ln(w)];
                let inv = ONE / w;
                let mut p = ONE;
                for m in 1..n {
                    p *= inv;
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(p * sign / m as f64);
                }
                out
            }
            ElemFn::Reciprocal => {
                let inv = ONE / w;
                let mut out = Vec::with_capacity(n);
                let mut p = inv;
                for m in 0..n {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(p * sign);
                    p *= inv;
                }
                out
            }
            ElemFn::Atan | ElemFn::Artanh => {
                // derivative 1/(1 ± x²) as a series in s = x - w, then integrate.
                let sign = if self == ElemFn::Atan { 1.0 } else { -1.0 };
                let mut den = vec![ZERO; n.max(3)];
                den[0] = ONE + sign * w * w;
                den[1] = sign * 2.0 * w;
                den[2] = Cx::new(sign, 0.0);
                den.truncate(n.max(1));
                let mut one = vec![ZERO; den.len()];
                one[0] = ONE;
                let d = series_div(&one, &den);
                let mut out = vec![self.eval(w)];
                for m in 1..n {
                    out.push(d[m - 1] / m as f64);
                }
                out
            }
        }
    }
}

/// Truncated univariate series division `a / b` (same length).
fn series_div(a: &[Cx], b: &[Cx]) -> Vec<Cx> {
    let n = a.len();
    let mut q = vec![ZERO; n];
    let inv = ONE / b[0];
    for m in 0..n {
        let mut acc = a[m];
        for i in 1..=m.min(b.len() - 1) {
            acc -= b[i] * q[m - i];
        }
        q[m] = acc * inv;
    }
    q
}

/// Truncated Taylor expansion of a complex function of `nvars` parameters.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    coeffs: Vec<Cx>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                m.entry(&self.layout.multi_index(i), c);
            }
        }
        m.finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.nvars() == other.nvars() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

fn check_shape(nvars: usize, order: usize, max_order: usize) -> Result<()> {
    if !(1..=MAX_VARS).contains(&nvars) {
        return Err(Error::Config(format!("nvars must be in 1..={MAX_VARS}, got {nvars}")));
    }
    if order > max_order {
        return Err(Error::Config(format!("jet order must be at most {max_order}, got {order}")));
    }
    Ok(())
}

impl Jet {
    /// Constant jet.
    pub fn constant(value: Cx, nvars: usize, order: usize) -> Result<Jet> {
        check_shape(nvars, order, MAX_INTERNAL_ORDER)?;
        Ok(Self::constant_in(layout(nvars, order), value))
    }

    fn constant_in(layout: &'static Layout, value: Cx) -> Jet {
        let mut coeffs = vec![ZERO; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// Coordinate jet `u^index` (1-based) at `value`: value coefficient
    /// `value`, unit first-order coefficient in slot `index`.
    pub fn var(index: usize, value: Cx, nvars: usize, order: usize) -> Result<Jet> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Config(format!("jet order must be in 1..={MAX_ORDER}, got {order}")));
        }
        Self::var_unchecked(index, value, nvars, order)
    }

    /// Like [`Jet::var`] but accepts any order up to the internal ceiling,
    /// including 0.
    pub(crate) fn var_unchecked(index: usize, value: Cx, nvars: usize, order: usize) -> Result<Jet> {
        check_shape(nvars, order, MAX_INTERNAL_ORDER)?;
        if !(1..=nvars).contains(&index) {
            return Err(Error::Config(format!("variable index {index} outside 1..={nvars}")));
        }
        let mut j = Self::constant_in(layout(nvars, order), value);
        if order >= 1 {
            j.coeffs[index] = ONE;
        }
        Ok(j)
    }

    /// Builds a jet from raw Taylor coefficients in layout order.
    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<Cx>) -> Result<Jet> {
        check_shape(nvars, order, MAX_INTERNAL_ORDER)?;
        let layout = layout(nvars, order);
        if coeffs.len() != layout.len() {
            return Err(Error::Usage(format!(
                "expected {} coefficients for nvars={nvars}, order={order}, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { layout, coeffs })
    }

    /// Embeds a univariate Taylor series (coefficients in powers of
    /// `u^index - u0`) into an `nvars`-variable jet of the given order.
    pub fn from_univariate(series: &Jet, index: usize, nvars: usize, order: usize) -> Result<Jet> {
        if series.nvars() != 1 {
            return Err(Error::Usage("from_univariate expects a univariate series".into()));
        }
        if order > series.order() {
            return Err(Error::Usage(format!(
                "series of order {} cannot fill a jet of order {order}",
                series.order()
            )));
        }
        check_shape(nvars, order, MAX_INTERNAL_ORDER)?;
        let layout = layout(nvars, order);
        let mut coeffs = vec![ZERO; layout.len()];
        let mut e = [0u8; MAX_VARS];
        for m in 0..=order {
            e[index - 1] = m as u8;
            coeffs[layout.lookup[&e]] = series.coeffs[m];
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn zeros_like(&self) -> Jet {
        Jet {
            layout: self.layout,
            coeffs: vec![ZERO; self.coeffs.len()],
        }
    }

    pub fn constant_like(&self, value: Cx) -> Jet {
        Self::constant_in(self.layout, value)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn value(&self) -> Cx {
        self.coeffs[0]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == ZERO)
    }

    /// Taylor coefficient for multi-index `alpha`.
    pub fn coeff(&self, alpha: &[u8]) -> Result<Cx> {
        let i = self.slot(alpha)?;
        Ok(self.coeffs[i])
    }

    fn slot(&self, alpha: &[u8]) -> Result<usize> {
        if alpha.len() != self.nvars() {
            return Err(Error::Usage(format!(
                "multi-index has {} entries, jet has {} variables",
                alpha.len(),
                self.nvars()
            )));
        }
        let deg: usize = alpha.iter().map(|&a| a as usize).sum();
        if deg > self.order() {
            return Err(Error::Usage(format!(
                "partial of order {deg} requested from a jet of order {}",
                self.order()
            )));
        }
        Ok(self.layout.index_of(alpha).expect("degree checked"))
    }

    /// The partial derivative `∂^α` (Taylor coefficient times `α!`).
    pub fn partial(&self, alpha: &[u8]) -> Result<Cx> {
        let i = self.slot(alpha)?;
        Ok(self.coeffs[i] * self.layout.factorial[i])
    }

    /// First partial `∂/∂u^v` (0-based `v`) at the expansion point.
    pub fn d1(&self, v: usize) -> Cx {
        if self.order() == 0 {
            return ZERO;
        }
        self.coeffs[1 + v]
    }

    /// Truncates to a lower order (no-op if `order >= self.order()`).
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        Jet {
            layout: layout(self.nvars(), order),
            coeffs: self.coeffs[..self.layout.prefix_len(order)].to_vec(),
        }
    }

    /// Derivative `∂/∂u^{v+1}` (0-based `v`), one order lower.
    pub fn diff(&self, v: usize) -> Jet {
        assert!(v < self.nvars(), "variable {v} out of range");
        let k = self.order();
        if k == 0 {
            return self.clone().scale(ZERO);
        }
        let lower = layout(self.nvars(), k - 1);
        let src = &self.layout.raise[v];
        let coeffs = (0..lower.len())
            .map(|i| {
                let j = src[i] as usize;
                self.coeffs[j] * self.layout.exps[j][v] as f64
            })
            .collect();
        Jet { layout: lower, coeffs }
    }

    pub fn scale(mut self, c: Cx) -> Jet {
        for x in &mut self.coeffs {
            *x *= c;
        }
        self
    }

    fn common(&self, other: &Jet) -> &'static Layout {
        assert_eq!(self.nvars(), other.nvars(), "jets over different parameter counts");
        if self.order() <= other.order() {
            self.layout
        } else {
            other.layout
        }
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        let layout = self.common(other);
        let mut out = vec![ZERO; layout.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &layout.mul {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { layout, coeffs: out }
    }

    /// Composition `f ∘ self` for a univariate series `f` given by its Taylor
    /// coefficients at `self.value()`.
    pub fn compose(&self, series: &[Cx]) -> Jet {
        let k = self.order().min(series.len().saturating_sub(1));
        let mut s = self.clone();
        s.coeffs[0] = ZERO;
        let mut acc = self.constant_like(series[k]);
        for m in (0..k).rev() {
            acc = acc.mul_ref(&s);
            acc.coeffs[0] += series[m];
        }
        acc
    }

    /// Lifts an elementary function using the default branch tolerance.
    pub fn apply(&self, f: ElemFn) -> Result<Jet> {
        self.apply_with_tol(f, DEFAULT_BRANCH_TOL)
    }

    pub fn apply_with_tol(&self, f: ElemFn, tol: f64) -> Result<Jet> {
        let w = self.value();
        let constant = self.is_constant();
        if f == ElemFn::SqrtPrincipal && w == ZERO && constant {
            return Ok(self.clone());
        }
        f.check_domain(w, tol, constant)?;
        Ok(self.compose(&f.taylor(w, self.order())))
    }

    pub fn sin(&self) -> Jet {
        self.compose(&ElemFn::Sin.taylor(self.value(), self.order()))
    }

    pub fn cos(&self) -> Jet {
        self.compose(&ElemFn::Cos.taylor(self.value(), self.order()))
    }

    pub fn exp(&self) -> Jet {
        self.compose(&ElemFn::Exp.taylor(self.value(), self.order()))
    }

    pub fn tan(&self) -> Result<Jet> {
        self.apply(ElemFn::Tan)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.apply(ElemFn::SqrtPrincipal)
    }

    /// Square root whose value is the principal one and whose higher
    /// coefficients follow the local analytic branch, even on the cut.
    pub fn sqrt_local(&self) -> Result<Jet> {
        let w = self.value();
        if w == ZERO {
            if self.is_constant() {
                return Ok(self.clone());
            }
            return Err(Error::domain("sqrt_principal", w, "branch point at 0"));
        }
        Ok(self.compose(&ElemFn::SqrtPrincipal.taylor(w, self.order())))
    }

    pub fn ln(&self) -> Result<Jet> {
        self.apply(ElemFn::LogPrincipal)
    }

    pub fn recip(&self) -> Result<Jet> {
        self.apply(ElemFn::Reciprocal)
    }

    pub fn square(&self) -> Jet {
        self.mul_ref(self)
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut acc = self.constant_like(ONE);
        for _ in 0..p {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// `self / other`, failing if `other` vanishes at the expansion point.
    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_ref(&other.recip()?))
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        cx::max_norm(&self.coeffs)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let layout = a.common(b);
    let coeffs = (0..layout.len()).map(|i| a.coeffs[i] + b.coeffs[i]).collect();
    Jet { layout, coeffs }
});
binop!(Sub, sub, |a, b| {
    let layout = a.common(b);
    let coeffs = (0..layout.len()).map(|i| a.coeffs[i] - b.coeffs[i]).collect();
    Jet { layout, coeffs }
});
binop!(Mul, mul, |a, b| a.mul_ref(b));
// Division panics on a vanishing divisor; use `Jet::checked_div` where that
// can happen.
binop!(Div, div, |a, b| a.checked_div(b).expect("jet division by zero"));

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone().scale(-ONE)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = &*self + rhs;
            return;
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = &*self - rhs;
            return;
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, rhs: &Jet) {
        *self = self.mul_ref(rhs);
    }
}

macro_rules! scalar_ops {
    ($t:ty, $conv:expr) => {
        impl Mul<$t> for Jet {
            type Output = Jet;
            fn mul(self, rhs: $t) -> Jet {
                let c: Cx = $conv(rhs);
                self.scale(c)
            }
        }
        impl Mul<$t> for &Jet {
            type Output = Jet;
            fn mul(self, rhs: $t) -> Jet {
                let c: Cx = $conv(rhs);
                self.clone().scale(c)
            }
        }
        impl Add<$t> for Jet {
            type Output = Jet;
            fn add(mut self, rhs: $t) -> Jet {
                let c: Cx = $conv(rhs);
                self.coeffs[0] += c;
                self
            }
        }
        impl Add<$t> for &Jet {
            type Output = Jet;
            fn add(self, rhs: $t) -> Jet {
                self.clone() + rhs
            }
        }
        impl Sub<$t> for Jet {
            type Output = Jet;
            fn sub(mut self, rhs: $t) -> Jet {
                let c: Cx = $conv(rhs);
                self.coeffs[0] -= c;
                self
            }
        }
        impl Sub<$t> for &Jet {
            type Output = Jet;
            fn sub(self, rhs: $t) -> Jet {
                self.clone() - rhs
            }
        }
        impl Div<$t> for Jet {
            type Output = Jet;
            fn div(self, rhs: $t) -> Jet {
                let c: Cx = $conv(rhs);
                self.scale(ONE / c)
            }
        }
        impl Div<$t> for &Jet {
            type Output = Jet;
            fn div(self, rhs: $t) -> Jet {
                self.clone() / rhs
            }
        }
    };
}

scalar_ops!(Cx, |c: Cx| c);
scalar_ops!(f64, |c: f64| Cx::new(c, 0.0));

/// Coordinate jet, the public constructor with the `1..=4` order check.
pub fn jet_var(index: usize, value: Cx, nvars: usize, order: usize) -> Result<Jet> {
    Jet::var(index, value, nvars, order)
}

pub fn jet_apply(f: ElemFn, x: &Jet) -> Result<Jet> {
    x.apply(f)
}

pub fn jet_partial(x: &Jet, alpha: &[u8]) -> Result<Cx> {
    x.partial(alpha)
}

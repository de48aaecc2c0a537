//! The quadric in spherical coordinates, Peterson's deformation family, its
//! closed form at `z = 1`, the embedding `C^{n+1} → C^{2n-1}` and the
//! generalized profile families.
//!
//! Every immersion is assembled from univariate profiles through
//! [`eval_surface`]:
//!
//! ```text
//! X = Σ_{k=1}^{n-1} C_k f_k(u^k) (cos g_k(u^k) e_{2k-2} + sin g_k(u^k) e_{2k-1}) + h(u^n) e_{2n-2}
//! C_k = Π_{j>k} cos u^j
//! ```
//!
//! A constant added to `g_k` rotates the `(e_{2k-2}, e_{2k-1})` plane and a
//! constant added to `h` translates along `e_{2n-2}`; both are rigid motions,
//! which is what makes moving an integral's base point harmless.

use std::f64::consts::FRAC_PI_2;

use crate::cx::{self, Cx, ONE, ZERO};
use crate::error::{Error, Result};
use crate::geometry::ImmersionJet;
use crate::jet::{Jet, MAX_ORDER, MAX_VARS};
use crate::quadrature::{integral_jet, integrate_segment, Integrand, QuadConfig};

pub const DISTINCTNESS_TOL: f64 = 1e-8;
/// `|denominator(base)|` below this marks a profile integral as singular.
pub const SINGULARITY_SCAN_TOL: f64 = 1e-8;
pub const REBASE_POINT: f64 = FRAC_PI_2;
/// Relative clearance of the profile denominator from zero along an
/// integration path below which the alternative base point is tried.
pub const PATH_CLEARANCE_TOL: f64 = 1e-3;
const PATH_SAMPLES: usize = 128;

/// Smallest distance from 0 to the polygon through `d(t)` along the segment
/// `base → upper`, relative to the largest `|d|` on it.
fn path_clearance(base: f64, upper: Cx, d: impl Fn(Cx) -> Cx) -> f64 {
    let start = Cx::new(base, 0.0);
    let span = upper - start;
    let vals: Vec<Cx> = (0..=PATH_SAMPLES)
        .map(|i| d(start + span * (i as f64 / PATH_SAMPLES as f64)))
        .collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let near = vals
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0], w[1]);
            let e = q - p;
            let len2 = e.norm_sqr();
            if len2 == 0.0 {
                return p.norm();
            }
            let tau = (-(p.re * e.re + p.im * e.im) / len2).clamp(0.0, 1.0);
            (p + e * tau).norm()
        })
        .fold(f64::INFINITY, f64::min);
    near / scale
}

/// Integration base for a profile evaluated at `upper`: the family's base,
/// or the other candidate when the denominator comes close to zero on the
/// way and rebasing is enabled.
fn select_base(default: f64, rebase: bool, upper: Cx, d: impl Fn(Cx) -> Cx) -> f64 {
    if !rebase {
        return default;
    }
    let c0 = path_clearance(default, upper, &d);
    if c0 >= PATH_CLEARANCE_TOL {
        return default;
    }
    let alt = if default == 0.0 { REBASE_POINT } else { 0.0 };
    if path_clearance(alt, upper, &d) > c0 {
        alt
    } else {
        default
    }
}

/// Central quadric `Σ x_j² / a_j = 1` with distinct non-zero `a_0..a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricSpec {
    a: Vec<Cx>,
    sqrt_a: Vec<Cx>,
}

impl QuadricSpec {
    pub fn new(a: Vec<Cx>) -> Result<Self> {
        Self::with_tolerance(a, DISTINCTNESS_TOL)
    }

    pub fn with_tolerance(a: Vec<Cx>, tol: f64) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::Config(format!(
                "need n ≥ 2, i.e. at least 3 coefficients a_j, got {}",
                a.len()
            )));
        }
        if a.len() - 1 > MAX_VARS {
            return Err(Error::Config(format!(
                "dimension n = {} exceeds the supported maximum {MAX_VARS}",
                a.len() - 1
            )));
        }
        for (j, aj) in a.iter().enumerate() {
            if !(aj.re.is_finite() && aj.im.is_finite()) || *aj == ZERO {
                return Err(Error::Config(format!("a_{j} = {aj} must be finite and non-zero")));
            }
        }
        for j in 0..a.len() {
            for k in j + 1..a.len() {
                if (a[j] - a[k]).norm() < tol {
                    return Err(Error::Config(format!(
                        "a_{j} = {} and a_{k} = {} coincide (|a_{j} - a_{k}| < {tol:e})",
                        a[j], a[k]
                    )));
                }
            }
        }
        let sqrt_a = a.iter().map(|&x| cx::sqrt(x)).collect();
        Ok(QuadricSpec { a, sqrt_a })
    }

    /// Dimension `n` (there are `n + 1` coefficients).
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, j: usize) -> Cx {
        self.a[j]
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.a
    }

    pub fn sqrt_a(&self, j: usize) -> Cx {
        self.sqrt_a[j]
    }

    /// `Σ x_j² / a_j - 1`.
    pub fn defining_residual(&self, x: &[Cx]) -> Cx {
        x.iter().zip(&self.a).map(|(xj, aj)| xj * xj / aj).sum::<Cx>() - ONE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `z_0 := 1`, the family of the main theorem.
    Theorem1,
    /// `z_0 := 0`, families built on arbitrary base profiles.
    Generalized,
}

/// Deformation parameters `z_1..z_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformParams {
    z: Vec<Cx>,
    convention: Convention,
    rebase: bool,
}

impl DeformParams {
    pub fn new(z: Vec<Cx>, convention: Convention) -> Self {
        DeformParams {
            z,
            convention,
            rebase: true,
        }
    }

    pub fn theorem1(z: Vec<Cx>) -> Self {
        Self::new(z, Convention::Theorem1)
    }

    pub fn generalized(z: Vec<Cx>) -> Self {
        Self::new(z, Convention::Generalized)
    }

    /// All `z_k` equal to `value`.
    pub fn uniform(n: usize, value: Cx, convention: Convention) -> Self {
        Self::new(vec![value; n - 1], convention)
    }

    /// Enables or disables moving singular profile integrals to `π/2`.
    pub fn with_rebase(mut self, rebase: bool) -> Self {
        self.rebase = rebase;
        self
    }

    pub fn rebase(&self) -> bool {
        self.rebase
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn z(&self) -> &[Cx] {
        &self.z
    }

    /// `z_k` for `k = 0..n-1`, with the implicit `z_0`.
    pub fn z_full(&self, k: usize) -> Cx {
        if k == 0 {
            match self.convention {
                Convention::Theorem1 => ONE,
                Convention::Generalized => ZERO,
            }
        } else {
            self.z[k - 1]
        }
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if self.z.len() + 1 != n {
            return Err(Error::Config(format!(
                "expected {} deformation parameters for n = {n}, got {}",
                n - 1,
                self.z.len()
            )));
        }
        Ok(())
    }
}

/// Univariate profiles `f_k`, `g_k` (k = 1..n-1) and `h` of a surface of the
/// form above, each returned as a Taylor series in one variable at `t`.
///
/// Radicals take the principal value at `t` and continue analytically from
/// there, so a radicand sitting on the negative real axis (common for real
/// parameters) is not an error; only a vanishing radicand is.
pub trait Profiles: Send + Sync {
    fn n(&self) -> usize;

    fn radius(&self, k: usize, t: Cx, order: usize) -> Result<Jet>;

    fn radius_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        Ok(self.radius(k, t, order + 1)?.diff(0))
    }

    fn angle(&self, k: usize, t: Cx, order: usize) -> Result<Jet>;

    fn angle_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        Ok(self.angle(k, t, order + 1)?.diff(0))
    }

    fn height(&self, t: Cx, order: usize) -> Result<Jet>;

    fn height_rate(&self, t: Cx, order: usize) -> Result<Jet> {
        Ok(self.height(t, order + 1)?.diff(0))
    }
}

fn uvar(t: Cx, order: usize) -> Result<Jet> {
    Jet::var_unchecked(1, t, 1, order)
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Config(format!("immersion order must be in 0..={MAX_ORDER}, got {order}")));
    }
    Ok(())
}

fn check_u(u: &[Cx], n: usize) -> Result<()> {
    if u.len() != n {
        return Err(Error::Usage(format!("expected {n} surface parameters, got {}", u.len())));
    }
    Ok(())
}

/// `C_k = Π_{j=k+1}^{n} cos(u^j)`; `C_n = 1`.
pub fn cosine_cascade(u: &[Cx], k: usize) -> Cx {
    u.iter().skip(k).map(|x| x.cos()).product()
}

/// Jets of `C_0..C_n` (index = k).
fn cascade_jets(vars: &[Jet]) -> Vec<Jet> {
    let n = vars.len();
    let mut c = vec![vars[0].constant_like(ONE); n + 1];
    for k in (0..n).rev() {
        c[k] = &c[k + 1] * &vars[k].cos();
    }
    c
}

fn coordinate_vars(u: &[Cx], order: usize) -> Result<Vec<Jet>> {
    let n = u.len();
    (0..n).map(|j| Jet::var_unchecked(j + 1, u[j], n, order)).collect()
}

/// Quadric in spherical coordinates:
/// `X = √a_0 C_0 e_0 + Σ_k √a_k C_k sin(u^k) e_k`.
pub fn eval_quadric(q: &QuadricSpec, u: &[Cx], order: usize) -> Result<ImmersionJet> {
    check_order(order)?;
    check_u(u, q.n())?;
    let vars = coordinate_vars(u, order)?;
    let c = cascade_jets(&vars);
    let mut coords = Vec::with_capacity(q.n() + 1);
    coords.push(&c[0] * q.sqrt_a(0));
    for k in 1..=q.n() {
        coords.push((&c[k] * &vars[k - 1].sin()) * q.sqrt_a(k));
    }
    Ok(ImmersionJet::new(u.to_vec(), coords))
}

/// Assembles `X` from univariate profiles.
pub fn eval_surface<P: Profiles + ?Sized>(p: &P, u: &[Cx], order: usize) -> Result<ImmersionJet> {
    check_order(order)?;
    let n = p.n();
    check_u(u, n)?;
    let vars = coordinate_vars(u, order)?;
    let c = cascade_jets(&vars);
    let mut coords = Vec::with_capacity(2 * n - 1);
    for k in 1..n {
        let f = Jet::from_univariate(&p.radius(k, u[k - 1], order)?, k, n, order)?;
        let g = Jet::from_univariate(&p.angle(k, u[k - 1], order)?, k, n, order)?;
        let cf = &c[k] * &f;
        coords.push(&cf * &g.cos());
        coords.push(&cf * &g.sin());
    }
    coords.push(Jet::from_univariate(&p.height(u[n - 1], order)?, n, n, order)?);
    Ok(ImmersionJet::new(u.to_vec(), coords))
}

/// Peterson's deformation `X_z` of the quadric.
pub fn eval_peterson(q: &QuadricSpec, p: &DeformParams, u: &[Cx], order: usize) -> Result<ImmersionJet> {
    let fam = PetersonFamily::new(q.clone(), p)?;
    eval_surface(&fam, u, order)
}

/// `(x_0, …, x_n) ↦ (x_0, x_1, x_2, 0, x_3, 0, …, x_{n-1}, 0, x_n)`.
pub fn embed<T: Clone>(x: &[T], zero: T) -> Vec<T> {
    let n = x.len() - 1;
    assert!(n >= 2, "embedding needs n ≥ 2");
    let mut out = Vec::with_capacity(2 * n - 1);
    out.push(x[0].clone());
    out.push(x[1].clone());
    for xk in &x[2..n] {
        out.push(xk.clone());
        out.push(zero.clone());
    }
    out.push(x[n].clone());
    out
}

/// Embeds a quadric immersion jet into `C^{2n-1}`.
pub fn embed_immersion(x: &ImmersionJet) -> ImmersionJet {
    let zero = x.coords()[0].zeros_like();
    ImmersionJet::new(x.u().to_vec(), embed(x.coords(), zero))
}

/// Profiles of the family `X_z` with `z_0 = 1`:
///
/// ```text
/// f_k² = (z_{k-1} - z_k) a_0 + (a_k - z_{k-1} a_0) sin² t
/// g_k' = √((z_{k-1} - z_k) a_0 a_k + (a_k - z_{k-1} a_0) z_k a_0 sin² t) / f_k²
/// h'²  = a_n - (a_n - z_{n-1} a_0) sin² t
/// ```
#[derive(Debug, Clone)]
pub struct PetersonFamily {
    q: QuadricSpec,
    /// `z_0..z_{n-1}`
    z: Vec<Cx>,
    bases: Vec<f64>,
    rebase: bool,
    quad: QuadConfig,
}

struct RadicandCoeffs {
    /// `f_k² = p + q sin²`
    p: Cx,
    q: Cx,
    /// numerator radicand `na + nb sin²`
    na: Cx,
    nb: Cx,
}

impl PetersonFamily {
    pub fn new(q: QuadricSpec, params: &DeformParams) -> Result<Self> {
        Self::with_quadrature(q, params, QuadConfig::default())
    }

    pub fn with_quadrature(q: QuadricSpec, params: &DeformParams, quad: QuadConfig) -> Result<Self> {
        let n = q.n();
        params.check_dimension(n)?;
        if params.convention() != Convention::Theorem1 {
            return Err(Error::Config(
                "Peterson's family uses the z_0 = 1 convention; use GeneralizedFamily for z_0 = 0".into(),
            ));
        }
        let z = (0..n).map(|k| params.z_full(k)).collect();
        let mut fam = PetersonFamily {
            q,
            z,
            bases: vec![0.0; n - 1],
            rebase: params.rebase(),
            quad,
        };
        for k in 1..n {
            if fam.coeffs(k).numerator_vanishes() {
                continue;
            }
            let d0 = fam.radius_radicand(k, ZERO).norm();
            if d0 < SINGULARITY_SCAN_TOL {
                if !params.rebase() {
                    return Err(Error::SingularProfile {
                        k,
                        base: 0.0,
                        denominator: d0,
                    });
                }
                let d1 = fam.radius_radicand(k, Cx::new(REBASE_POINT, 0.0)).norm();
                if d1 < SINGULARITY_SCAN_TOL {
                    return Err(Error::SingularProfile {
                        k,
                        base: REBASE_POINT,
                        denominator: d1,
                    });
                }
                fam.bases[k - 1] = REBASE_POINT;
            }
        }
        Ok(fam)
    }

    pub fn quadric(&self) -> &QuadricSpec {
        &self.q
    }

    /// `z_k`, `k = 0..n-1`.
    pub fn z(&self, k: usize) -> Cx {
        self.z[k]
    }

    /// Default integration base of `g_k`.
    pub fn base_point(&self, k: usize) -> f64 {
        self.bases[k - 1]
    }

    /// Integration base actually used for `g_k(t)`.
    pub fn base_for(&self, k: usize, t: Cx) -> f64 {
        select_base(self.bases[k - 1], self.rebase, t, |s| self.radius_radicand(k, s))
    }

    fn coeffs(&self, k: usize) -> RadicandCoeffs {
        let (a0, ak) = (self.q.a(0), self.q.a(k));
        let (zp, zk) = (self.z[k - 1], self.z[k]);
        let p = (zp - zk) * a0;
        let q = ak - zp * a0;
        RadicandCoeffs {
            p,
            q,
            na: p * ak,
            nb: q * zk * a0,
        }
    }

    /// `f_k(t)²`.
    pub fn radius_radicand(&self, k: usize, t: Cx) -> Cx {
        let c = self.coeffs(k);
        let s = t.sin();
        c.p + c.q * s * s
    }

    /// Radicand in the numerator of `g_k'`.
    pub fn angle_radicand(&self, k: usize, t: Cx) -> Cx {
        let c = self.coeffs(k);
        let s = t.sin();
        c.na + c.nb * s * s
    }

    /// `h'(t)²`.
    pub fn height_radicand(&self, t: Cx) -> Cx {
        let n = self.q.n();
        let an = self.q.a(n);
        let s = t.sin();
        an - (an - self.z[n - 1] * self.q.a(0)) * s * s
    }

    fn sin2(t: &Jet) -> Jet {
        t.sin().square()
    }
}

impl RadicandCoeffs {
    fn numerator_vanishes(&self) -> bool {
        self.na == ZERO && self.nb == ZERO
    }
}

struct AngleRate<'a> {
    fam: &'a PetersonFamily,
    k: usize,
}

impl Integrand for AngleRate<'_> {
    fn at(&self, t: Cx) -> Result<Cx> {
        let d = self.fam.radius_radicand(self.k, t);
        if d == ZERO {
            return Err(Error::domain("reciprocal", d, format!("f_{}² vanishes at t = {t}", self.k)));
        }
        Ok(cx::sqrt(self.fam.angle_radicand(self.k, t)) / d)
    }

    fn series(&self, t: Cx, order: usize) -> Result<Jet> {
        self.fam.angle_rate(self.k, t, order)
    }
}

struct HeightRate<'a> {
    fam: &'a PetersonFamily,
}

impl Integrand for HeightRate<'_> {
    fn at(&self, t: Cx) -> Result<Cx> {
        Ok(cx::sqrt(self.fam.height_radicand(t)))
    }

    fn series(&self, t: Cx, order: usize) -> Result<Jet> {
        self.fam.height_rate(t, order)
    }
}

impl Profiles for PetersonFamily {
    fn n(&self) -> usize {
        self.q.n()
    }

    fn radius(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        let c = self.coeffs(k);
        let tj = uvar(t, order)?;
        (Self::sin2(&tj) * c.q + c.p).sqrt_local()
    }

    fn radius_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        // f' = q sin cos / f
        let c = self.coeffs(k);
        let tj = uvar(t, order)?;
        let f = self.radius(k, t, order)?;
        (tj.sin() * tj.cos() * c.q).checked_div(&f)
    }

    fn angle(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        if self.coeffs(k).numerator_vanishes() {
            return Jet::constant(ZERO, 1, order);
        }
        integral_jet(&AngleRate { fam: self, k }, self.base_for(k, t), &uvar(t, order)?, &self.quad)
    }

    fn angle_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        let c = self.coeffs(k);
        if c.numerator_vanishes() {
            return Jet::constant(ZERO, 1, order);
        }
        let s2 = Self::sin2(&uvar(t, order)?);
        let num = (&s2 * c.nb + c.na).sqrt_local()?;
        num.checked_div(&(s2 * c.q + c.p))
    }

    fn height(&self, t: Cx, order: usize) -> Result<Jet> {
        integral_jet(&HeightRate { fam: self }, 0.0, &uvar(t, order)?, &self.quad)
    }

    fn height_rate(&self, t: Cx, order: usize) -> Result<Jet> {
        let n = self.q.n();
        let an = self.q.a(n);
        let s2 = Self::sin2(&uvar(t, order)?);
        (s2 * (-(an - self.z[n - 1] * self.q.a(0))) + an).sqrt_local()
    }
}

/// Closed form of `X_1` (all `z_k = 1`): per principal plane the radius
/// `√(a_k - a_0) C_k sin u^k` and angle `√a_0/√(a_k - a_0) artanh(cos u^k)`,
/// plus the last coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormZ1 {
    pub radius: Vec<Jet>,
    pub angle: Vec<Jet>,
    pub height: Jet,
}

/// Closed form at `z = 1` as jets of the given order.
pub fn peterson_closed_z1_jet(q: &QuadricSpec, u: &[Cx], order: usize) -> Result<ClosedFormZ1> {
    check_order(order)?;
    let n = q.n();
    check_u(u, n)?;
    let vars = coordinate_vars(u, order)?;
    let c = cascade_jets(&vars);
    let mut radius = Vec::with_capacity(n - 1);
    let mut angle = Vec::with_capacity(n - 1);
    for k in 1..n {
        let r = cx::sqrt(q.a(k) - q.a(0));
        if r == ZERO {
            return Err(Error::domain("sqrt_principal", ZERO, format!("a_{k} = a_0")));
        }
        radius.push((&c[k] * &vars[k - 1].sin()) * r);
        let cu = vars[k - 1].cos();
        let at = cu.apply(crate::jet::ElemFn::Artanh).map_err(|e| match e {
            Error::Domain { func, arg, reason } => Error::Domain {
                func,
                arg,
                reason: format!("{reason}; u^{k} must avoid 0 and π"),
            },
            other => other,
        })?;
        angle.push(at * (q.sqrt_a(0) / r));
    }
    let fam = PetersonFamily::new(q.clone(), &DeformParams::uniform(n, ONE, Convention::Theorem1))?;
    let height = Jet::from_univariate(&fam.height(u[n - 1], order)?, n, n, order)?;
    Ok(ClosedFormZ1 { radius, angle, height })
}

/// Plain values of the closed form: `(radius_k, angle_k)` for `k = 1..n-1`
/// and `x_{2n-2}`.
pub fn peterson_closed_z1(q: &QuadricSpec, u: &[Cx]) -> Result<(Vec<(Cx, Cx)>, Cx)> {
    let c = peterson_closed_z1_jet(q, u, 0)?;
    let pairs = c.radius.iter().zip(&c.angle).map(|(r, a)| (r.value(), a.value())).collect();
    Ok((pairs, c.height.value()))
}

/// `h` of the last coordinate on its own, `∫_0^u √(a_n - (a_n - z a_0) sin² t) dt`.
pub fn height_integral(q: &QuadricSpec, z_last: Cx, u: Cx) -> Result<Cx> {
    let n = q.n();
    let mut z = vec![ZERO; n - 1];
    z[n - 2] = z_last;
    let fam = PetersonFamily::new(q.clone(), &DeformParams::theorem1(z).with_rebase(true))?;
    Ok(integrate_segment(&HeightRate { fam: &fam }, 0.0, u, &fam.quad)?.value)
}

/// Which closed formula defines the angle profiles of a generalized family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralizedForm {
    /// Any `n`, `z_0 = 0`:
    /// `g_k' = √(f_k'² + f_k² g_k'² - (F_k'² + z_{k-1} sin²)) / F_k`.
    Fgr,
    /// `n = 2` only: `g' = √(z (f'² + f² g'²) + f⁴ g'²) / (z + f²)`.
    Bla,
}

/// A family of deformations built on arbitrary base profiles `B` (the member
/// at `z = 0`), with `z_0 = 0`:
///
/// ```text
/// F_k² = z_k + f_k² - z_{k-1} cos² t
/// H'²  = h'² - z_{n-1} sin² t
/// ```
pub struct GeneralizedFamily<B: Profiles> {
    base: B,
    z: Vec<Cx>,
    form: GeneralizedForm,
    bases: Vec<f64>,
    rebase: bool,
    quad: QuadConfig,
}

impl<B: Profiles> GeneralizedFamily<B> {
    pub fn new(base: B, params: &DeformParams, form: GeneralizedForm) -> Result<Self> {
        let n = base.n();
        params.check_dimension(n)?;
        if params.convention() != Convention::Generalized {
            return Err(Error::Config("generalized families use the z_0 = 0 convention".into()));
        }
        if form == GeneralizedForm::Bla && n != 2 {
            return Err(Error::Config(format!("the one-parameter surface form needs n = 2, got {n}")));
        }
        let z = (0..n).map(|k| params.z_full(k)).collect();
        let mut fam = GeneralizedFamily {
            base,
            z,
            form,
            bases: vec![0.0; n - 1],
            rebase: params.rebase(),
            quad: QuadConfig::default(),
        };
        for k in 1..n {
            if fam.passthrough(k) {
                continue;
            }
            let d0 = fam.radius_sq(k, ZERO, 0)?.value().norm();
            if d0 < SINGULARITY_SCAN_TOL {
                if !params.rebase() {
                    return Err(Error::SingularProfile {
                        k,
                        base: 0.0,
                        denominator: d0,
                    });
                }
                fam.bases[k - 1] = REBASE_POINT;
            }
        }
        Ok(fam)
    }

    /// At `z_{k-1} = z_k = 0` the member coincides with the base profile.
    fn passthrough(&self, k: usize) -> bool {
        self.z[k - 1] == ZERO && self.z[k] == ZERO
    }

    fn radius_sq(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        let f = self.base.radius(k, t, order)?;
        let c = uvar(t, order)?.cos();
        Ok(f.square() + self.z[k] - c.square() * self.z[k - 1])
    }

    fn with_context(e: Error, what: &str, k: usize, t: Cx) -> Error {
        match e {
            Error::Domain { func, arg, reason } => Error::Domain {
                func,
                arg,
                reason: format!("{reason} (radicand of {what}_{k} at t = {t})"),
            },
            other => other,
        }
    }
}

struct GenAngleRate<'a, B: Profiles> {
    fam: &'a GeneralizedFamily<B>,
    k: usize,
}

impl<B: Profiles> Integrand for GenAngleRate<'_, B> {
    fn at(&self, t: Cx) -> Result<Cx> {
        Ok(self.fam.angle_rate(self.k, t, 0)?.value())
    }

    fn series(&self, t: Cx, order: usize) -> Result<Jet> {
        self.fam.angle_rate(self.k, t, order)
    }
}

struct GenHeightRate<'a, B: Profiles> {
    fam: &'a GeneralizedFamily<B>,
}

impl<B: Profiles> Integrand for GenHeightRate<'_, B> {
    fn at(&self, t: Cx) -> Result<Cx> {
        Ok(self.fam.height_rate(t, 0)?.value())
    }

    fn series(&self, t: Cx, order: usize) -> Result<Jet> {
        self.fam.height_rate(t, order)
    }
}

impl<B: Profiles> Profiles for GeneralizedFamily<B> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn radius(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        if self.passthrough(k) {
            return self.base.radius(k, t, order);
        }
        self.radius_sq(k, t, order)?
            .sqrt_local()
            .map_err(|e| Self::with_context(e, "f", k, t))
    }

    fn radius_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        if self.passthrough(k) {
            return self.base.radius_rate(k, t, order);
        }
        // F F' = f f' + z_{k-1} sin cos
        let tj = uvar(t, order)?;
        let f = self.base.radius(k, t, order)?;
        let df = self.base.radius_rate(k, t, order)?;
        (f * df + tj.sin() * tj.cos() * self.z[k - 1]).checked_div(&self.radius(k, t, order)?)
    }

    fn angle(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        if self.passthrough(k) {
            return self.base.angle(k, t, order);
        }
        let base = select_base(self.bases[k - 1], self.rebase, t, |s| {
            self.radius_sq(k, s, 0).map(|j| j.value()).unwrap_or(ZERO)
        });
        integral_jet(&GenAngleRate { fam: self, k }, base, &uvar(t, order)?, &self.quad)
    }

    fn angle_rate(&self, k: usize, t: Cx, order: usize) -> Result<Jet> {
        if self.passthrough(k) {
            return self.base.angle_rate(k, t, order);
        }
        let tj = uvar(t, order)?;
        let s2 = tj.sin().square();
        let f = self.base.radius(k, t, order)?;
        let df = self.base.radius_rate(k, t, order)?;
        let dg = self.base.angle_rate(k, t, order)?;
        let metric_kk = df.square() + f.square() * dg.square();
        let ctx = |e| Self::with_context(e, "g", k, t);
        match self.form {
            GeneralizedForm::Fgr => {
                let big_f = self.radius(k, t, order)?;
                let big_df = self.radius_rate(k, t, order)?;
                let rad = metric_kk - big_df.square() - s2 * self.z[k - 1];
                rad.sqrt_local().map_err(ctx)?.checked_div(&big_f)
            }
            GeneralizedForm::Bla => {
                let z = self.z[k];
                let f2 = f.square();
                let rad = metric_kk * z + f2.square() * dg.square();
                rad.sqrt_local().map_err(ctx)?.checked_div(&(f2 + z))
            }
        }
    }

    fn height(&self, t: Cx, order: usize) -> Result<Jet> {
        let n = self.n();
        if self.z[n - 1] == ZERO {
            return self.base.height(t, order);
        }
        integral_jet(&GenHeightRate { fam: self }, 0.0, &uvar(t, order)?, &self.quad)
    }

    fn height_rate(&self, t: Cx, order: usize) -> Result<Jet> {
        let n = self.n();
        if self.z[n - 1] == ZERO {
            return self.base.height_rate(t, order);
        }
        let s2 = uvar(t, order)?.sin().square();
        let dh = self.base.height_rate(t, order)?;
        (dh.square() - s2 * self.z[n - 1])
            .sqrt_local()
            .map_err(|e| Self::with_context(e, "h", n, t))
    }
}

/// Evaluates a member of a generalized family built on `base`.
pub fn eval_generalized<B: Profiles>(
    base: B,
    params: &DeformParams,
    form: GeneralizedForm,
    u: &[Cx],
    order: usize,
) -> Result<ImmersionJet> {
    let fam = GeneralizedFamily::new(base, params, form)?;
    eval_surface(&fam, u, order)
}

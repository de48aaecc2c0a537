//! Induced geometry of immersions under the bilinear form `⟨x, y⟩ = xᵀy`:
//! fundamental forms, Christoffel symbols, the Riemann tensor, normal frames
//! with their connection and curvature, and the joined second forms of a
//! quadric and one of its deformations.
//!
//! Everything is computed on jets, so a quantity built from an immersion of
//! order `K` comes out as a jet of a lower order that can be differentiated
//! again:
//!
//! | quantity                        | order  |
//! |---------------------------------|--------|
//! | `g`, `g⁻¹`, unit normals        | `K-1`  |
//! | `Γ`, `h`, normal connection     | `K-2`  |
//! | `R`, normal curvature           | `K-3`  |

use std::ops::Index;

use crate::cx::{Cx, I, ONE};
use crate::error::{Error, Result};
use crate::immersions::{Profiles, QuadricSpec};
use crate::jet::Jet;
use crate::linalg::{dot, invert, orthonormalize_bilinear, SquareMat};

/// Coordinates of an immersion `u ↦ x(u) ∈ C^m` as jets sharing the
/// parameter count and order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionJet {
    u: Vec<Cx>,
    coords: Vec<Jet>,
}

impl ImmersionJet {
    pub fn new(u: Vec<Cx>, coords: Vec<Jet>) -> Self {
        assert!(!coords.is_empty(), "an immersion needs at least one coordinate");
        let (n, k) = (coords[0].nvars(), coords[0].order());
        assert!(
            coords.iter().all(|c| c.nvars() == n && c.order() == k),
            "coordinate jets must share nvars and order"
        );
        assert_eq!(u.len(), n, "parameter point does not match the jets");
        ImmersionJet { u, coords }
    }

    pub fn u(&self) -> &[Cx] {
        &self.u
    }

    pub fn coords(&self) -> &[Jet] {
        &self.coords
    }

    pub fn nvars(&self) -> usize {
        self.coords[0].nvars()
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn order(&self) -> usize {
        self.coords[0].order()
    }

    pub fn point(&self) -> Vec<Cx> {
        self.coords.iter().map(Jet::value).collect()
    }

    /// `∂^α x`.
    pub fn partial(&self, alpha: &[u8]) -> Result<Vec<Cx>> {
        self.coords.iter().map(|c| c.partial(alpha)).collect()
    }

    /// `∂_j x` as jets one order lower (0-based `j`).
    pub fn derivative(&self, j: usize) -> Vec<Jet> {
        self.coords.iter().map(|c| c.diff(j)).collect()
    }

    pub fn truncate(&self, order: usize) -> ImmersionJet {
        ImmersionJet {
            u: self.u.clone(),
            coords: self.coords.iter().map(|c| c.truncate(order)).collect(),
        }
    }
}

/// Dense array of jets with arbitrary dimensions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<Jet>,
}

impl Tensor {
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Result<Jet>) -> Result<Tensor> {
        let total = dims.iter().product();
        let mut data = Vec::with_capacity(total);
        let mut idx = vec![0; dims.len()];
        for _ in 0..total {
            data.push(f(&idx)?);
            for r in (0..dims.len()).rev() {
                idx[r] += 1;
                if idx[r] < dims[r] {
                    break;
                }
                idx[r] = 0;
            }
        }
        Ok(Tensor { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[Jet] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[self.offset(idx)]
    }

    pub fn value(&self, idx: &[usize]) -> Cx {
        self.get(idx).value()
    }

    /// Largest modulus over the value parts.
    pub fn max_value_norm(&self) -> f64 {
        self.data.iter().map(|j| j.value().norm()).fold(0.0, f64::max)
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor {
    type Output = Jet;
    fn index(&self, idx: [usize; R]) -> &Jet {
        self.get(&idx)
    }
}

/// First form `g_{jk} = ⟨∂_j x, ∂_k x⟩`.
pub fn first_form(x: &ImmersionJet) -> Result<SquareMat<Jet>> {
    if x.order() < 1 {
        return Err(Error::Usage("the first form needs an immersion of order ≥ 1".into()));
    }
    let d: Vec<Vec<Jet>> = (0..x.nvars()).map(|j| x.derivative(j)).collect();
    let n = x.nvars();
    let mut g = SquareMat::from_fn(n, |_, _| d[0][0].zeros_like());
    for j in 0..n {
        for k in j..n {
            let v = dot(&d[j], &d[k]);
            g.set(k, j, v.clone());
            g.set(j, k, v);
        }
    }
    Ok(g)
}

/// `Γ^l_{jk} = ½ g^{lm} (∂_k g_{jm} + ∂_j g_{km} - ∂_m g_{jk})`, indexed
/// `[l, j, k]`. Needs `g` of order ≥ 1.
pub fn christoffel(g: &SquareMat<Jet>, ginv: &SquareMat<Jet>) -> Result<Tensor> {
    let n = g.dim();
    if g.at(0, 0).order() < 1 {
        return Err(Error::Usage("Christoffel symbols need a metric of order ≥ 1".into()));
    }
    // first[j][k][m] = ½ (∂_k g_{jm} + ∂_j g_{km} - ∂_m g_{jk})
    let dg = |v: usize, a: usize, b: usize| g.at(a, b).diff(v);
    let first = Tensor::from_fn(&[n, n, n], |i| {
        let (j, k, m) = (i[0], i[1], i[2]);
        Ok((dg(k, j, m) + dg(j, k, m) - dg(m, j, k)) * 0.5)
    })?;
    Tensor::from_fn(&[n, n, n], |i| {
        let (l, j, k) = (i[0], i[1], i[2]);
        let mut acc = first[[j, k, 0]].zeros_like();
        for m in 0..n {
            acc += &(ginv.at(l, m) * &first[[j, k, m]]);
        }
        Ok(acc)
    })
}

/// Covariant Riemann tensor `R_{jmkl} = g_{mp} R^p_{jkl}` with
/// `R^p_{jkl} = ∂_l Γ^p_{jk} - ∂_k Γ^p_{jl} + Γ^q_{jk} Γ^p_{ql} - Γ^q_{jl} Γ^p_{qk}`,
/// indexed `[j, m, k, l]`. Needs `Γ` of order ≥ 1.
pub fn riemann(g: &SquareMat<Jet>, gamma: &Tensor) -> Result<Tensor> {
    let n = g.dim();
    if gamma.entries()[0].order() < 1 {
        return Err(Error::Usage("the Riemann tensor needs Christoffel symbols of order ≥ 1".into()));
    }
    let mixed = Tensor::from_fn(&[n, n, n, n], |i| {
        let (p, j, k, l) = (i[0], i[1], i[2], i[3]);
        let mut acc = gamma[[p, j, k]].diff(l) - gamma[[p, j, l]].diff(k);
        for q in 0..n {
            acc += &(&gamma[[q, j, k]] * &gamma[[p, q, l]]);
            acc -= &(&gamma[[q, j, l]] * &gamma[[p, q, k]]);
        }
        Ok(acc)
    })?;
    Tensor::from_fn(&[n, n, n, n], |i| {
        let (j, m, k, l) = (i[0], i[1], i[2], i[3]);
        let mut acc = mixed[[0, j, k, l]].zeros_like();
        for p in 0..n {
            acc += &(g.at(m, p) * &mixed[[p, j, k, l]]);
        }
        Ok(acc)
    })
}

/// Metric quantities of an immersion, as far as its order allows.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: SquareMat<Jet>,
    pub ginv: SquareMat<Jet>,
    /// `Γ^l_{jk}` at `[l, j, k]`, for immersion order ≥ 2.
    pub gamma: Option<Tensor>,
    /// `R_{jmkl}` at `[j, m, k, l]`, for immersion order ≥ 3.
    pub riemann: Option<Tensor>,
}

impl MetricData {
    pub fn new(x: &ImmersionJet) -> Result<Self> {
        let g = first_form(x)?;
        Self::from_metric(g)
    }

    /// From a metric given directly as jets.
    pub fn from_metric(g: SquareMat<Jet>) -> Result<Self> {
        let ginv = invert(&g)?;
        let gamma = if g.at(0, 0).order() >= 1 {
            Some(christoffel(&g, &ginv)?)
        } else {
            None
        };
        let riemann = match &gamma {
            Some(t) if t.entries()[0].order() >= 1 => Some(riemann(&g, t)?),
            _ => None,
        };
        Ok(MetricData { g, ginv, gamma, riemann })
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    pub fn gamma(&self) -> Result<&Tensor> {
        self.gamma
            .as_ref()
            .ok_or_else(|| Error::Usage("Christoffel symbols need immersion order ≥ 2".into()))
    }

    pub fn riemann(&self) -> Result<&Tensor> {
        self.riemann
            .as_ref()
            .ok_or_else(|| Error::Usage("the Riemann tensor needs immersion order ≥ 3".into()))
    }
}

/// Normal fields of an immersion: the raw fields as given, their bilinear
/// Gram–Schmidt orthonormalization `N` (`NᵀN = I`), the normal connection
/// `n^α_{βj} = N_αᵀ ∂_j N_β` at `[α, β, j]` and its curvature
/// `r^β_{αjk}` at `[β, α, j, k]`.
#[derive(Debug, Clone)]
pub struct NormalFrame {
    pub raw: Vec<Vec<Jet>>,
    pub unit: Vec<Vec<Jet>>,
    pub conn: Option<Tensor>,
    pub curvature: Option<Tensor>,
}

impl NormalFrame {
    pub fn from_raw(raw: Vec<Vec<Jet>>) -> Result<Self> {
        let unit = orthonormalize_bilinear(&raw)?;
        let p = unit.len();
        let n = unit[0][0].nvars();
        let conn = if unit[0][0].order() >= 1 {
            let d: Vec<Vec<Vec<Jet>>> = (0..p)
                .map(|b| (0..n).map(|j| unit[b].iter().map(|c| c.diff(j)).collect()).collect())
                .collect();
            Some(Tensor::from_fn(&[p, p, n], |i| Ok(dot(&unit[i[0]], &d[i[1]][i[2]])))?)
        } else {
            None
        };
        let curvature = match &conn {
            Some(c) if c.entries()[0].order() >= 1 => Some(Tensor::from_fn(&[p, p, n, n], |i| {
                let (beta, alpha, j, k) = (i[0], i[1], i[2], i[3]);
                let mut acc = c[[beta, alpha, j]].diff(k) - c[[beta, alpha, k]].diff(j);
                for gam in 0..p {
                    acc += &(&c[[gam, alpha, j]] * &c[[beta, gam, k]]);
                    acc -= &(&c[[gam, alpha, k]] * &c[[beta, gam, j]]);
                }
                Ok(acc)
            })?),
            _ => None,
        };
        Ok(NormalFrame {
            raw,
            unit,
            conn,
            curvature,
        })
    }

    pub fn codim(&self) -> usize {
        self.unit.len()
    }
}

fn lowered(x: &ImmersionJet) -> Result<ImmersionJet> {
    if x.order() < 1 {
        return Err(Error::Usage("normal fields need an immersion of order ≥ 1".into()));
    }
    Ok(x.truncate(x.order() - 1))
}

/// Quadric normal `N̂₀ = Σ_j x_j / a_j e_j`, i.e.
/// `C₀/√a₀ e₀ + Σ_k C_k sin(u^k)/√a_k e_k`, one order below `x`.
pub fn quadric_raw_normal(q: &QuadricSpec, x: &ImmersionJet) -> Result<Vec<Jet>> {
    let y = lowered(x)?;
    Ok(y.coords().iter().enumerate().map(|(j, c)| c / q.a(j)).collect())
}

pub fn normal_frame_quadric(q: &QuadricSpec, x: &ImmersionJet) -> Result<NormalFrame> {
    NormalFrame::from_raw(vec![quadric_raw_normal(q, x)?])
}

/// The normal fields `N_k = ∇F_k`, `F_k = x_{2k-2}² + x_{2k-1}² - C_k² f_k²`,
/// written in the parameters:
///
/// ```text
/// N_k = 2 (x_{2k-2} e_{2k-2} + x_{2k-1} e_{2k-1})
///     - 2 f_k'/(f_k g_k') (-x_{2k-1} e_{2k-2} + x_{2k-2} e_{2k-1})
///     + 2 C_k² f_k² [ Σ_{j>k} tan u^j (-x_{2j-1} e_{2j-2} + x_{2j-2} e_{2j-1}) / (C_j² f_j² g_j')
///                   + tan u^n e_{2n-2} / h' ]
/// ```
pub fn surface_raw_normals<P: Profiles + ?Sized>(p: &P, x: &ImmersionJet) -> Result<Vec<Vec<Jet>>> {
    let y = lowered(x)?;
    let (n, order) = (y.nvars(), y.order());
    if y.ambient_dim() != 2 * n - 1 {
        return Err(Error::Usage(format!(
            "expected a surface in C^{}, got C^{}",
            2 * n - 1,
            y.ambient_dim()
        )));
    }
    let u = y.u().to_vec();
    let xs = y.coords();
    let vars: Vec<Jet> = (0..n).map(|j| Jet::var_unchecked(j + 1, u[j], n, order)).collect::<Result<_>>()?;
    let tan: Vec<Jet> = vars.iter().map(Jet::tan).collect::<Result<_>>()?;
    let mut c = vec![vars[0].constant_like(ONE); n + 1];
    for k in (0..n).rev() {
        c[k] = &c[k + 1] * &vars[k].cos();
    }
    let lift = |s: Result<Jet>, k: usize| -> Result<Jet> { Jet::from_univariate(&s?, k, n, order) };
    let mut f = vec![vars[0].zeros_like(); n];
    let mut df = f.clone();
    let mut dg = f.clone();
    for k in 1..n {
        f[k] = lift(p.radius(k, u[k - 1], order), k)?;
        df[k] = lift(p.radius_rate(k, u[k - 1], order), k)?;
        dg[k] = lift(p.angle_rate(k, u[k - 1], order), k)?;
    }
    let dh = lift(p.height_rate(u[n - 1], order), n)?;
    let degenerate = |what: String| {
        move |e: Error| match e {
            Error::Domain { .. } => Error::Degenerate(format!("{what} vanishes, normal field undefined")),
            other => other,
        }
    };
    // weights w_j = C_j² f_j² g_j'
    let mut cf2 = vec![vars[0].zeros_like(); n];
    let mut inv_w = vec![vars[0].zeros_like(); n];
    for j in 1..n {
        cf2[j] = (&c[j] * &f[j]).square();
        inv_w[j] = (&cf2[j] * &dg[j]).recip().map_err(degenerate(format!("C_{j}² f_{j}² g_{j}'")))?;
    }
    let inv_dh = dh.recip().map_err(degenerate("h'".into()))?;
    let mut out = Vec::with_capacity(n - 1);
    for k in 1..n {
        let mut nk = vec![vars[0].zeros_like(); 2 * n - 1];
        let (a, b) = (2 * k - 2, 2 * k - 1);
        let rot = (&df[k] * 2.0)
            .checked_div(&(&f[k] * &dg[k]))
            .map_err(degenerate(format!("f_{k} g_{k}'")))?;
        nk[a] = &xs[a] * 2.0 + &rot * &xs[b];
        nk[b] = &xs[b] * 2.0 - &rot * &xs[a];
        let lead = &cf2[k] * 2.0;
        for j in k + 1..n {
            let s = &lead * &(&tan[j - 1] * &inv_w[j]);
            nk[2 * j - 2] = -(&s * &xs[2 * j - 1]);
            nk[2 * j - 1] = &s * &xs[2 * j - 2];
        }
        nk[2 * n - 2] = &lead * &(&tan[n - 1] * &inv_dh);
        out.push(nk);
    }
    Ok(out)
}

pub fn normal_frame_surface<P: Profiles + ?Sized>(p: &P, x: &ImmersionJet) -> Result<NormalFrame> {
    NormalFrame::from_raw(surface_raw_normals(p, x)?)
}

/// `X_z` at `u` together with its normal frame.
pub fn normal_frame_peterson(
    q: &QuadricSpec,
    params: &crate::immersions::DeformParams,
    u: &[Cx],
    order: usize,
) -> Result<(ImmersionJet, NormalFrame)> {
    let fam = crate::immersions::PetersonFamily::new(q.clone(), params)?;
    let x = crate::immersions::eval_surface(&fam, u, order)?;
    let frame = normal_frame_surface(&fam, &x)?;
    Ok((x, frame))
}

/// `N_αᵀ ∂_j ∂_k x` at `[α, j, k]` for arbitrary normal fields, one order
/// below the fields.
pub fn second_form_with(x: &ImmersionJet, normals: &[Vec<Jet>]) -> Result<Tensor> {
    if x.order() < 2 {
        return Err(Error::Usage("second forms need an immersion of order ≥ 2".into()));
    }
    let n = x.nvars();
    let target = x.order() - 2;
    let d2: Vec<Vec<Vec<Jet>>> = (0..n)
        .map(|j| {
            let dj = x.derivative(j);
            (0..n).map(|k| dj.iter().map(|c| c.diff(k)).collect()).collect()
        })
        .collect();
    let nt: Vec<Vec<Jet>> = normals.iter().map(|v| v.iter().map(|c| c.truncate(target)).collect()).collect();
    Tensor::from_fn(&[normals.len(), n, n], |i| Ok(dot(&nt[i[0]], &d2[i[1]][i[2]])))
}

/// Second fundamental forms `h^α_{jk}` with respect to the unit frame.
#[derive(Debug, Clone)]
pub struct SecondForm {
    /// `h^α_{jk}` at `[α, j, k]`
    pub h: Tensor,
}

impl SecondForm {
    pub fn codim(&self) -> usize {
        self.h.dims()[0]
    }

    pub fn n(&self) -> usize {
        self.h.dims()[1]
    }

    /// `h_j^α = h^α_{jj}`.
    pub fn diag(&self, alpha: usize, j: usize) -> &Jet {
        &self.h[[alpha, j, j]]
    }

    /// Largest `|h^α_{jk}|`, `j ≠ k`, with its `(α, j, k)`.
    pub fn max_offdiag(&self) -> (f64, [usize; 3]) {
        let mut worst = (0.0, [0, 0, 1]);
        for a in 0..self.codim() {
            for j in 0..self.n() {
                for k in 0..self.n() {
                    if j != k {
                        let v = self.h.value(&[a, j, k]).norm();
                        if v > worst.0 {
                            worst = (v, [a, j, k]);
                        }
                    }
                }
            }
        }
        worst
    }
}

pub fn second_form(x: &ImmersionJet, frame: &NormalFrame) -> Result<SecondForm> {
    Ok(SecondForm {
        h: second_form_with(x, &frame.unit)?,
    })
}

/// Joined second forms of a quadric (`h_j^0`) and a deformation
/// (`h_j^α`) with common conjugate parameters:
/// `h_j = (i h_j^0, h_j^1, …)`, `𝐚_j = √(h_jᵀh_j)`, `𝐛_j = h_j^0/𝐚_j` and
/// `γ_{jk} = Γ^k_{jj} h_k^0/h_j^0`.
#[derive(Debug, Clone)]
pub struct JoinedData {
    pub h0: Vec<Jet>,
    pub vectors: Vec<Vec<Jet>>,
    pub a: Vec<Jet>,
    pub b: Vec<Jet>,
    /// `γ_{jk}` at `[j, k]`; the diagonal is zero.
    pub gamma: Tensor,
}

pub fn joined_data(quadric: &SecondForm, deform: &SecondForm, metric: &MetricData) -> Result<JoinedData> {
    let n = quadric.n();
    if deform.n() != n || quadric.codim() != 1 {
        return Err(Error::Usage(
            "joined data needs a hypersurface form and a deformation form over the same parameters".into(),
        ));
    }
    let h0: Vec<Jet> = (0..n).map(|j| quadric.diag(0, j).clone()).collect();
    let vectors: Vec<Vec<Jet>> = (0..n)
        .map(|j| {
            let mut v = vec![&h0[j] * I];
            v.extend((0..deform.codim()).map(|a| deform.diag(a, j).clone()));
            v
        })
        .collect();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for (j, v) in vectors.iter().enumerate() {
        let norm2 = dot(v, v);
        let aj = norm2
            .sqrt_local()
            .map_err(|_| Error::Degenerate(format!("joined vector h_{} is isotropic", j + 1)))?;
        b.push(
            h0[j]
                .checked_div(&aj)
                .map_err(|_| Error::Degenerate(format!("joined vector h_{} is isotropic", j + 1)))?,
        );
        a.push(aj);
    }
    let gamma_sym = metric.gamma()?;
    let inv_h0: Vec<Jet> = h0
        .iter()
        .enumerate()
        .map(|(j, h)| h.recip().map_err(|_| Error::Degenerate(format!("h_{}^0 vanishes", j + 1))))
        .collect::<Result<_>>()?;
    let gamma = Tensor::from_fn(&[n, n], |i| {
        let (j, k) = (i[0], i[1]);
        if j == k {
            return Ok(h0[0].zeros_like());
        }
        Ok(&gamma_sym[[k, j, j]] * &(&h0[k] * &inv_h0[j]))
    })?;
    Ok(JoinedData { h0, vectors, a, b, gamma })
}

/// Everything computed at one parameter point of a quadric and one of its
/// deformations.
#[derive(Debug, Clone)]
pub struct GeometryData {
    pub quadric: ImmersionJet,
    pub deform: ImmersionJet,
    pub quadric_metric: MetricData,
    pub deform_metric: MetricData,
    pub quadric_frame: NormalFrame,
    pub deform_frame: NormalFrame,
    pub quadric_form: Option<SecondForm>,
    pub deform_form: Option<SecondForm>,
}

impl GeometryData {
    pub fn new<P: Profiles + ?Sized>(q: &QuadricSpec, family: &P, u: &[Cx], order: usize) -> Result<Self> {
        let quadric = crate::immersions::eval_quadric(q, u, order)?;
        let deform = crate::immersions::eval_surface(family, u, order)?;
        let quadric_metric = MetricData::new(&quadric)?;
        let deform_metric = MetricData::new(&deform)?;
        let quadric_frame = normal_frame_quadric(q, &quadric)?;
        let deform_frame = normal_frame_surface(family, &deform)?;
        let (quadric_form, deform_form) = if order >= 2 {
            (
                Some(second_form(&quadric, &quadric_frame)?),
                Some(second_form(&deform, &deform_frame)?),
            )
        } else {
            (None, None)
        };
        Ok(GeometryData {
            quadric,
            deform,
            quadric_metric,
            deform_metric,
            quadric_frame,
            deform_frame,
            quadric_form,
            deform_form,
        })
    }

    pub fn joined(&self) -> Result<JoinedData> {
        match (&self.quadric_form, &self.deform_form) {
            (Some(q), Some(d)) => joined_data(q, d, &self.quadric_metric),
            _ => Err(Error::Usage("joined data needs order ≥ 2".into())),
        }
    }
}

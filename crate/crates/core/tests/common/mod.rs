//! Point evaluators written directly from the defining formulas, and
//! fundamental forms by central finite differences.
#![allow(dead_code)]

use qdlab::Cx;

use qdlab::geometry::{first_form, normal_frame_peterson, normal_frame_quadric, second_form};
use qdlab::immersions::{eval_quadric, DeformParams, QuadricSpec};

pub const STEP: f64 = 1e-5;

pub fn c(re: f64) -> Cx {
    Cx::new(re, 0.0)
}

pub fn reals(xs: &[f64]) -> Vec<Cx> {
    xs.iter().map(|&x| c(x)).collect()
}

pub fn dot(x: &[Cx], y: &[Cx]) -> Cx {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Square root with the sign closest to `reference`.
pub fn sqrt_near(w: Cx, reference: Cx) -> Cx {
    let s = w.sqrt();
    if (s * reference.conj()).re < 0.0 {
        -s
    } else {
        s
    }
}

// 10-point Gauss–Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// `∫_a^b f` along the straight segment; meant for short segments only.
pub fn gauss_legendre(f: impl Fn(Cx) -> Cx, a: Cx, b: Cx) -> Cx {
    let (mid, half) = ((a + b) * 0.5, (b - a) * 0.5);
    let mut acc = Cx::new(0.0, 0.0);
    for (x, w) in GL_X.iter().zip(GL_W) {
        acc += (f(mid + half * *x) + f(mid - half * *x)) * w;
    }
    acc * half
}

/// A parametrized submanifold evaluated pointwise, with analytic raw
/// normal fields spanning its normal space.
pub trait PointMap {
    fn n(&self) -> usize;
    fn point(&self, u: &[Cx]) -> Vec<Cx>;
    fn raw_normals(&self, u: &[Cx]) -> Vec<Vec<Cx>>;
}

fn cascade(u: &[Cx], k: usize) -> Cx {
    u[k..].iter().map(|t| t.cos()).product()
}

pub struct QuadricOracle {
    pub a: Vec<Cx>,
}

impl PointMap for QuadricOracle {
    fn n(&self) -> usize {
        self.a.len() - 1
    }

    fn point(&self, u: &[Cx]) -> Vec<Cx> {
        let mut x = vec![self.a[0].sqrt() * cascade(u, 0)];
        for k in 1..=self.n() {
            x.push(self.a[k].sqrt() * cascade(u, k) * u[k - 1].sin());
        }
        x
    }

    fn raw_normals(&self, u: &[Cx]) -> Vec<Vec<Cx>> {
        let x = self.point(u);
        vec![x.iter().zip(&self.a).map(|(xj, aj)| xj / aj).collect()]
    }
}

/// `X_z` with `z_0 = 1`. Profiles are integrated from the centre `u0`, so
/// only points within a few steps of `u0` are meaningful.
pub struct PetersonOracle {
    a: Vec<Cx>,
    /// `z_0..z_{n-1}`
    z: Vec<Cx>,
    u0: Vec<Cx>,
    f0: Vec<Cx>,
    num0: Vec<Cx>,
    dh0: Cx,
}

impl PetersonOracle {
    pub fn new(a: &[Cx], z: &[Cx], u0: &[Cx]) -> Self {
        let mut zf = vec![c(1.0)];
        zf.extend_from_slice(z);
        let mut o = PetersonOracle {
            a: a.to_vec(),
            z: zf,
            u0: u0.to_vec(),
            f0: vec![],
            num0: vec![],
            dh0: c(0.0),
        };
        let n = o.n();
        o.f0 = (0..n).map(|k| if k == 0 { c(0.0) } else { o.f_sq(k, u0[k - 1]).sqrt() }).collect();
        o.num0 = (0..n).map(|k| if k == 0 { c(0.0) } else { o.num(k, u0[k - 1]).sqrt() }).collect();
        o.dh0 = o.dh_sq(u0[n - 1]).sqrt();
        o
    }

    fn f_sq(&self, k: usize, t: Cx) -> Cx {
        let (a0, ak, zp, zk) = (self.a[0], self.a[k], self.z[k - 1], self.z[k]);
        (zp - zk) * a0 + (ak - zp * a0) * t.sin().powi(2)
    }

    fn num(&self, k: usize, t: Cx) -> Cx {
        let (a0, ak, zp, zk) = (self.a[0], self.a[k], self.z[k - 1], self.z[k]);
        (zp - zk) * a0 * ak + (ak - zp * a0) * zk * a0 * t.sin().powi(2)
    }

    fn dh_sq(&self, t: Cx) -> Cx {
        let n = self.n();
        let an = self.a[n];
        an - (an - self.z[n - 1] * self.a[0]) * t.sin().powi(2)
    }

    pub fn f(&self, k: usize, t: Cx) -> Cx {
        sqrt_near(self.f_sq(k, t), self.f0[k])
    }

    pub fn df(&self, k: usize, t: Cx) -> Cx {
        let (a0, ak, zp) = (self.a[0], self.a[k], self.z[k - 1]);
        (ak - zp * a0) * t.sin() * t.cos() / self.f(k, t)
    }

    pub fn dg(&self, k: usize, t: Cx) -> Cx {
        sqrt_near(self.num(k, t), self.num0[k]) / self.f_sq(k, t)
    }

    pub fn dh(&self, t: Cx) -> Cx {
        sqrt_near(self.dh_sq(t), self.dh0)
    }

    fn g(&self, k: usize, t: Cx) -> Cx {
        gauss_legendre(|s| self.dg(k, s), self.u0[k - 1], t)
    }

    fn h(&self, t: Cx) -> Cx {
        gauss_legendre(|s| self.dh(s), self.u0[self.n() - 1], t)
    }
}

impl PointMap for PetersonOracle {
    fn n(&self) -> usize {
        self.a.len() - 1
    }

    fn point(&self, u: &[Cx]) -> Vec<Cx> {
        let n = self.n();
        let mut x = Vec::with_capacity(2 * n - 1);
        for k in 1..n {
            let r = cascade(u, k) * self.f(k, u[k - 1]);
            let g = self.g(k, u[k - 1]);
            x.push(r * g.cos());
            x.push(r * g.sin());
        }
        x.push(self.h(u[n - 1]));
        x
    }

    /// `N_k = ∇F_k`, `F_k = x_{2k-2}² + x_{2k-1}² - C_k² f_k²`.
    fn raw_normals(&self, u: &[Cx]) -> Vec<Vec<Cx>> {
        let n = self.n();
        let x = self.point(u);
        let w = |j: usize| cascade(u, j).powi(2) * self.f_sq(j, u[j - 1]) * self.dg(j, u[j - 1]);
        (1..n)
            .map(|k| {
                let t = u[k - 1];
                let (a, b) = (2 * k - 2, 2 * k - 1);
                let mut v = vec![c(0.0); 2 * n - 1];
                let rot = 2.0 * self.df(k, t) / (self.f(k, t) * self.dg(k, t));
                v[a] = 2.0 * x[a] + rot * x[b];
                v[b] = 2.0 * x[b] - rot * x[a];
                let lead = 2.0 * cascade(u, k).powi(2) * self.f_sq(k, t);
                for j in k + 1..n {
                    let s = lead * u[j - 1].tan() / w(j);
                    v[2 * j - 2] = -s * x[2 * j - 1];
                    v[2 * j - 1] = s * x[2 * j - 2];
                }
                v[2 * n - 2] = lead * u[n - 1].tan() / self.dh(u[n - 1]);
                v
            })
            .collect()
    }
}

fn shifted(u: &[Cx], j: usize, h: f64) -> Vec<Cx> {
    let mut v = u.to_vec();
    v[j] += h;
    v
}

fn central<T: Fn(&[Cx]) -> Vec<Cx>>(f: &T, u: &[Cx], j: usize) -> Vec<Cx> {
    let (p, m) = (f(&shifted(u, j, STEP)), f(&shifted(u, j, -STEP)));
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * STEP)).collect()
}

pub fn tangents<M: PointMap>(m: &M, u: &[Cx]) -> Vec<Vec<Cx>> {
    (0..m.n()).map(|j| central(&|v: &[Cx]| m.point(v), u, j)).collect()
}

pub fn fd_first_form<M: PointMap>(m: &M, u: &[Cx]) -> Vec<Vec<Cx>> {
    let t = tangents(m, u);
    t.iter().map(|a| t.iter().map(|b| dot(a, b)).collect()).collect()
}

/// Bilinear Gram–Schmidt of the raw normals; each norm takes the sign
/// nearest to the corresponding entry of `reference`.
fn unit_frame<M: PointMap>(m: &M, u: &[Cx], reference: Option<&[Cx]>) -> (Vec<Vec<Cx>>, Vec<Cx>) {
    let mut frame: Vec<Vec<Cx>> = Vec::new();
    let mut norms = Vec::new();
    for (i, raw) in m.raw_normals(u).into_iter().enumerate() {
        let mut v = raw;
        for e in &frame {
            let p = dot(&v, e);
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
        }
        let w = dot(&v, &v);
        let r = match reference {
            Some(r) => sqrt_near(w, r[i]),
            None => w.sqrt(),
        };
        norms.push(r);
        frame.push(v.into_iter().map(|x| x / r).collect());
    }
    (frame, norms)
}

/// `h^α_{jk} = -½(∂_j N_α·∂_k X + ∂_k N_α·∂_j X)` with every derivative a
/// first-order central difference, indexed `[α][j][k]`.
pub fn fd_second_form<M: PointMap>(m: &M, u: &[Cx]) -> Vec<Vec<Vec<Cx>>> {
    let n = m.n();
    let (_, norms) = unit_frame(m, u, None);
    let t = tangents(m, u);
    let dn: Vec<Vec<Vec<Cx>>> = (0..n)
        .map(|j| {
            let p = unit_frame(m, &shifted(u, j, STEP), Some(&norms)).0;
            let q = unit_frame(m, &shifted(u, j, -STEP), Some(&norms)).0;
            p.iter()
                .zip(&q)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * STEP)).collect())
                .collect()
        })
        .collect();
    (0..norms.len())
        .map(|al| {
            (0..n)
                .map(|j| (0..n).map(|k| -0.5 * (dot(&dn[j][al], &t[k]) + dot(&dn[k][al], &t[j]))).collect())
                .collect()
        })
        .collect()
}

/// `Σ_α h^α_{jk} h^α_{lm}`, flattened; independent of the choice of
/// orthonormal normal frame and of rigid motions.
pub fn second_form_gram(h: &[Vec<Vec<Cx>>]) -> Vec<Cx> {
    let n = h[0].len();
    let mut out = Vec::with_capacity(n.pow(4));
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    out.push(h.iter().map(|ha| ha[j][k] * ha[l][m]).sum());
                }
            }
        }
    }
    out
}

/// `max|x - y| / max(|x|, |y|)` over all entries.
pub fn relative_gap(x: &[Cx], y: &[Cx]) -> f64 {
    assert_eq!(x.len(), y.len());
    let scale = x.iter().chain(y).map(|v| v.norm()).fold(0.0, f64::max);
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn flatten(m: &[Vec<Cx>]) -> Vec<Cx> {
    m.iter().flatten().copied().collect()
}

/// First form and second-form Gram from the jet pipeline.
pub struct JetForms {
    pub first: Vec<Cx>,
    pub gram: Vec<Cx>,
}

fn jet_forms(x: &qdlab::geometry::ImmersionJet, frame: &qdlab::geometry::NormalFrame) -> JetForms {
    let n = x.nvars();
    let g = first_form(x).unwrap();
    let first = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| g.at(j, k).value())
        .collect();
    let sf = second_form(x, frame).unwrap();
    let h: Vec<Vec<Vec<Cx>>> = (0..sf.codim())
        .map(|al| (0..n).map(|j| (0..n).map(|k| sf.h.value(&[al, j, k])).collect()).collect())
        .collect();
    JetForms {
        first,
        gram: second_form_gram(&h),
    }
}

pub fn jet_forms_quadric(a: &[Cx], u: &[Cx]) -> JetForms {
    let q = QuadricSpec::new(a.to_vec()).unwrap();
    let x = eval_quadric(&q, u, 2).unwrap();
    let frame = normal_frame_quadric(&q, &x).unwrap();
    jet_forms(&x, &frame)
}

pub fn jet_forms_peterson(a: &[Cx], z: &[Cx], u: &[Cx]) -> JetForms {
    let q = QuadricSpec::new(a.to_vec()).unwrap();
    let (x, frame) = normal_frame_peterson(&q, &DeformParams::theorem1(z.to_vec()), u, 2).unwrap();
    jet_forms(&x, &frame)
}

/// Largest relative gap between jet and finite-difference forms.
pub fn oracle_gap<M: PointMap>(oracle: &M, jets: &JetForms, u: &[Cx]) -> f64 {
    let first = relative_gap(&jets.first, &flatten(&fd_first_form(oracle, u)));
    let gram = relative_gap(&jets.gram, &second_form_gram(&fd_second_form(oracle, u)));
    first.max(gram)
}

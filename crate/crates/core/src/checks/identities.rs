//! Scaled residuals of the identities verified by the suites.
//!
//! Every identity instance is reduced to `|lhs - rhs| / max(1, max |term|)`,
//! where the terms are the summands entering it, and a [`Measure`] keeps the
//! worst instance. Indices in a measure are 1-based parameter indices
//! (normal indices are 1-based too).

use crate::cx::{Cx, ONE};
use crate::error::Result;
use crate::geometry::{ImmersionJet, JoinedData, MetricData, NormalFrame, SecondForm};
use crate::jet::Jet;
use crate::linalg::{dot, SquareMat};

/// Worst scaled residual over the instances of one identity family.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Measure {
    pub residual: f64,
    /// Index pattern of the worst instance.
    pub index: Vec<usize>,
    pub instances: usize,
}

impl Measure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `diff` with the given terms; indices are 0-based here.
    pub fn add(&mut self, diff: Cx, terms: &[Cx], index: &[usize]) {
        let scale = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
        let mut r = diff.norm() / scale;
        if r.is_nan() {
            r = f64::INFINITY;
        }
        if self.instances == 0 || r > self.residual {
            self.residual = r;
            self.index = index.iter().map(|i| i + 1).collect();
        }
        self.instances += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.instances == 0
    }
}

fn distinct(ix: &[usize]) -> bool {
    (0..ix.len()).all(|a| (a + 1..ix.len()).all(|b| ix[a] != ix[b]))
}

/// Componentwise `g - g'`.
pub fn metric_difference(g: &SquareMat<Jet>, h: &SquareMat<Jet>) -> Measure {
    let mut m = Measure::new();
    for j in 0..g.dim() {
        for k in j..g.dim() {
            let (a, b) = (g.at(j, k).value(), h.at(j, k).value());
            m.add(a - b, &[a, b], &[j, k]);
        }
    }
    m
}

/// Mixed entries `h^α_{jk}`, `j ≠ k`, against the largest entry of the form.
pub fn off_diagonal(form: &SecondForm) -> Measure {
    let scale = [Cx::new(form.h.max_value_norm(), 0.0)];
    let mut m = Measure::new();
    for a in 0..form.codim() {
        for j in 0..form.n() {
            for k in j + 1..form.n() {
                m.add(form.h.value(&[a, j, k]), &scale, &[a, j, k]);
            }
        }
    }
    m
}

/// `∂_k ∂_j X + tan(u^j) ∂_k X = 0` for `k < j`, componentwise.
pub fn conjugate_recurrence(x: &ImmersionJet) -> Result<Measure> {
    let n = x.nvars();
    let mut m = Measure::new();
    for j in 0..n {
        let t = x.u()[j].tan();
        for k in 0..j {
            let mut alpha = vec![0u8; n];
            alpha[j] += 1;
            alpha[k] += 1;
            let d2 = x.partial(&alpha)?;
            let mut beta = vec![0u8; n];
            beta[k] = 1;
            let d1 = x.partial(&beta)?;
            for (c, (a, b)) in d2.iter().zip(&d1).enumerate() {
                m.add(a + t * b, &[*a, t * b], &[k, j, c]);
            }
        }
    }
    Ok(m)
}

/// Conjugate-system Gauss equations `R_{jkjk} = Σ_α h_j^α h_k^α = -R_{jkkj}`.
pub fn gauss(metric: &MetricData, form: &SecondForm) -> Result<Measure> {
    let r = metric.riemann()?;
    let n = metric.n();
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let terms: Vec<Cx> = (0..form.codim())
                .map(|a| form.diag(a, j).value() * form.diag(a, k).value())
                .collect();
            let s: Cx = terms.iter().sum();
            let (r1, r2) = (r.value(&[j, k, j, k]), r.value(&[j, k, k, j]));
            let mut t1 = terms.clone();
            t1.push(r1);
            m.add(r1 - s, &t1, &[j, k, j, k]);
            let mut t2 = terms;
            t2.push(r2);
            m.add(r2 + s, &t2, &[j, k, k, j]);
        }
    }
    Ok(m)
}

/// `R_{jklm} = 0` for index patterns other than `jkjk` and `jkkj`.
pub fn riemann_vanishing(metric: &MetricData) -> Result<Measure> {
    let r = metric.riemann()?;
    let n = metric.n();
    let scale = [Cx::new(r.max_value_norm(), 0.0)];
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for q in 0..n {
                    let allowed = j != k && ((l == j && q == k) || (l == k && q == j));
                    if !allowed {
                        m.add(r.value(&[j, k, l, q]), &scale, &[j, k, l, q]);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Codazzi–Mainardi equations in a conjugate system:
/// `∂_k h_j^α - Γ^j_{jk} h_j^α + Γ^k_{jj} h_k^α + h_j^β n^α_{βk} = 0` (`j ≠ k`)
/// and `Γ^l_{jk} h_l^α = Γ^k_{jl} h_k^α` (`j, k, l` distinct).
pub fn codazzi(metric: &MetricData, form: &SecondForm, frame: &NormalFrame) -> Result<Measure> {
    let gam = metric.gamma()?;
    let n = metric.n();
    let p = form.codim();
    let conn = frame
        .conn
        .as_ref()
        .ok_or_else(|| crate::error::Error::Usage("normal connection needs immersion order ≥ 2".into()))?;
    let mut m = Measure::new();
    for a in 0..p {
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let hj = form.diag(a, j);
                let mut terms = vec![
                    hj.diff(k).value(),
                    -gam.value(&[j, j, k]) * hj.value(),
                    gam.value(&[k, j, j]) * form.diag(a, k).value(),
                ];
                for b in 0..p {
                    terms.push(form.diag(b, j).value() * conn.value(&[a, b, k]));
                }
                let s: Cx = terms.iter().sum();
                m.add(s, &terms, &[a, j, k]);
                for l in 0..n {
                    if distinct(&[j, k, l]) {
                        let t1 = gam.value(&[l, j, k]) * form.diag(a, l).value();
                        let t2 = gam.value(&[k, j, l]) * form.diag(a, k).value();
                        m.add(t1 - t2, &[t1, t2], &[a, j, k, l]);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Ricci equations `r^β_{αjk} = (h_j^α h_k^β - h_j^β h_k^α) g^{jk}`.
pub fn ricci(metric: &MetricData, form: &SecondForm, frame: &NormalFrame) -> Result<Measure> {
    let n = metric.n();
    let p = form.codim();
    let curv = frame
        .curvature
        .as_ref()
        .ok_or_else(|| crate::error::Error::Usage("normal curvature needs immersion order ≥ 3".into()))?;
    let mut m = Measure::new();
    for b in 0..p {
        for a in 0..p {
            for j in 0..n {
                for k in 0..n {
                    let h = |x: usize, y: usize| form.diag(x, y).value();
                    let rhs = (h(a, j) * h(b, k) - h(b, j) * h(a, k)) * metric.ginv.at(j, k).value();
                    let lhs = curv.value(&[b, a, j, k]);
                    m.add(lhs - rhs, &[lhs, rhs], &[b, a, j, k]);
                }
            }
        }
    }
    Ok(m)
}

/// `Γ^l_{jk} = 0` for distinct `j, k, l`.
pub fn christoffel_distinct(metric: &MetricData) -> Result<Measure> {
    let gam = metric.gamma()?;
    let n = metric.n();
    let scale = [Cx::new(gam.max_value_norm(), 0.0)];
    let mut m = Measure::new();
    for l in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if distinct(&[j, k, l]) {
                    m.add(gam.value(&[l, j, k]), &scale, &[l, j, k]);
                }
            }
        }
    }
    Ok(m)
}

/// `∂_k log 𝐚_j = Γ^j_{jk}`, `j ≠ k`.
pub fn log_a(metric: &MetricData, jd: &JoinedData) -> Result<Measure> {
    let gam = metric.gamma()?;
    let n = metric.n();
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let lhs = jd.a[j].diff(k).value() / jd.a[j].value();
                let rhs = gam.value(&[j, j, k]);
                m.add(lhs - rhs, &[lhs, rhs], &[j, k]);
            }
        }
    }
    Ok(m)
}

/// `Σ_j 𝐛_j² + 1 = 0`.
pub fn b_sum(jd: &JoinedData) -> Measure {
    let mut terms: Vec<Cx> = jd.b.iter().map(|b| b.value() * b.value()).collect();
    terms.push(ONE);
    let s: Cx = terms.iter().sum();
    let mut m = Measure::new();
    m.add(s, &terms, &[]);
    m
}

/// `h_jᵀ h_k = 0` for `j ≠ k`.
pub fn joined_orthogonality(jd: &JoinedData) -> Measure {
    let n = jd.vectors.len();
    let mut m = Measure::new();
    for j in 0..n {
        for k in j + 1..n {
            let terms: Vec<Cx> = jd.vectors[j]
                .iter()
                .zip(&jd.vectors[k])
                .map(|(x, y)| x.value() * y.value())
                .collect();
            m.add(terms.iter().sum(), &terms, &[j, k]);
        }
    }
    m
}

/// `∂_k log 𝐛_j = -γ_{jk}`, `j ≠ k`.
pub fn hoj(jd: &JoinedData) -> Measure {
    let n = jd.b.len();
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let lhs = jd.b[j].diff(k).value() / jd.b[j].value();
                let g = jd.gamma.value(&[j, k]);
                m.add(lhs + g, &[lhs, g], &[j, k]);
            }
        }
    }
    m
}

/// `∂_j log 𝐛_j = 𝐛_j⁻² Σ_{l≠j} 𝐛_l² γ_{lj}`.
pub fn ajj(jd: &JoinedData) -> Measure {
    let n = jd.b.len();
    let mut m = Measure::new();
    for j in 0..n {
        let bj = jd.b[j].value();
        let lhs = jd.b[j].diff(j).value() / bj;
        let mut terms = vec![lhs];
        for l in 0..n {
            if l != j {
                let bl = jd.b[l].value();
                terms.push(-(bl * bl * jd.gamma.value(&[l, j])) / (bj * bj));
            }
        }
        m.add(terms.iter().sum(), &terms, &[j]);
    }
    m
}

/// Compatibility of the two previous equations:
/// `∂_k(γ_{kj} 𝐛_k/𝐛_j) + ∂_j(γ_{jk} 𝐛_j/𝐛_k)
///  - Σ_{l≠j,k} (γ_{lj} γ_{lk} - g^{jk} h_j^0 h_k^0) 𝐛_l²/(𝐛_j 𝐛_k) = 0`.
pub fn sym(metric: &MetricData, jd: &JoinedData) -> Result<Measure> {
    let n = jd.b.len();
    let mut m = Measure::new();
    let inv_b: Vec<Jet> = jd.b.iter().map(Jet::recip).collect::<Result<_>>()?;
    for j in 0..n {
        for k in j + 1..n {
            let t1 = (&jd.gamma[[k, j]] * &(&jd.b[k] * &inv_b[j])).diff(k).value();
            let t2 = (&jd.gamma[[j, k]] * &(&jd.b[j] * &inv_b[k])).diff(j).value();
            let mut terms = vec![t1, t2];
            let c = metric.ginv.at(j, k).value() * jd.h0[j].value() * jd.h0[k].value();
            let bjbk = jd.b[j].value() * jd.b[k].value();
            for l in 0..n {
                if l != j && l != k {
                    let bl2 = jd.b[l].value() * jd.b[l].value();
                    let gg = jd.gamma.value(&[l, j]) * jd.gamma.value(&[l, k]);
                    terms.push(-(gg - c) * bl2 / bjbk);
                }
            }
            m.add(terms.iter().sum(), &terms, &[j, k]);
        }
    }
    Ok(m)
}

/// Involutivity conditions:
/// `∂_j γ_{jk} = ∂_k γ_{kj} = -2 γ_{jk} γ_{kj}` (first measure) and
/// `∂_k γ_{lj} = 2(γ_{lj} γ_{lk} - γ_{lk} γ_{kj} - γ_{lj} γ_{jk})` for distinct
/// `j, k, l` (second measure).
pub fn comint(jd: &JoinedData) -> (Measure, Measure) {
    let n = jd.b.len();
    let g = |a: usize, b: usize| jd.gamma.value(&[a, b]);
    let dg = |a: usize, b: usize, v: usize| jd.gamma[[a, b]].diff(v).value();
    let mut diag = Measure::new();
    let mut off = Measure::new();
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let lhs = dg(j, k, j);
            let rhs = -2.0 * g(j, k) * g(k, j);
            diag.add(lhs - rhs, &[lhs, rhs], &[j, k]);
            for l in 0..n {
                if distinct(&[j, k, l]) {
                    let lhs = dg(l, j, k);
                    let terms = [2.0 * g(l, j) * g(l, k), -2.0 * g(l, k) * g(k, j), -2.0 * g(l, j) * g(j, k)];
                    let rhs: Cx = terms.iter().sum();
                    off.add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2]], &[l, j, k]);
                }
            }
        }
    }
    (diag, off)
}

/// Second Bianchi consequences:
/// `∂_l R_{jkjk} = (Γ^j_{jl} + Γ^k_{kl}) R_{jkjk} - Γ^l_{kk} R_{jljl} - Γ^l_{jj} R_{klkl}`
/// (distinct `j, k, l`) and `Γ^m_{lk} R_{jmjm} = Γ^l_{mk} R_{jljl}` (distinct
/// `j, k, l, m`).
pub fn riem1(metric: &MetricData) -> Result<(Measure, Measure)> {
    let r = metric.riemann()?;
    let gam = metric.gamma()?;
    let n = metric.n();
    let g = |l: usize, j: usize, k: usize| gam.value(&[l, j, k]);
    let rr = |j: usize, k: usize| r.value(&[j, k, j, k]);
    let mut first = Measure::new();
    let mut second = Measure::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                if !distinct(&[j, k, l]) {
                    continue;
                }
                let lhs = r[[j, k, j, k]].diff(l).value();
                let terms = [(g(j, j, l) + g(k, k, l)) * rr(j, k), -g(l, k, k) * rr(j, l), -g(l, j, j) * rr(k, l)];
                let rhs: Cx = terms.iter().sum();
                first.add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2]], &[j, k, l]);
                for q in 0..n {
                    if distinct(&[j, k, l, q]) {
                        let t1 = g(q, l, k) * rr(j, q);
                        let t2 = g(l, q, k) * rr(j, l);
                        second.add(t1 - t2, &[t1, t2], &[j, k, l, q]);
                    }
                }
            }
        }
    }
    Ok((first, second))
}

/// `∂_l Γ^k_{kj} = Γ^k_{kl} Γ^l_{lj} + Γ^k_{kj} Γ^j_{jl} - Γ^k_{kl} Γ^k_{kj}`,
/// distinct `j, k, l`.
pub fn jkla(metric: &MetricData) -> Result<Measure> {
    let gam = metric.gamma()?;
    let n = metric.n();
    let g = |l: usize, j: usize, k: usize| gam.value(&[l, j, k]);
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                if !distinct(&[j, k, l]) {
                    continue;
                }
                let lhs = gam[[k, k, j]].diff(l).value();
                let terms = [g(k, k, l) * g(l, l, j), g(k, k, j) * g(j, j, l), -g(k, k, l) * g(k, k, j)];
                let rhs: Cx = terms.iter().sum();
                m.add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2]], &[j, k, l]);
            }
        }
    }
    Ok(m)
}

/// The three curvature expressions (no summation over repeated `l`):
///
/// ```text
/// g^{pl} R_{jljl} = ∂_l Γ^p_{jj} + Γ^p_{jj}(Γ^p_{pl} - Γ^j_{jl}) + Γ^l_{jj} Γ^p_{ll}          j, l, p distinct
/// g^{jl} R_{jljl} = ∂_l Γ^j_{jj} - ∂_j Γ^j_{jl} + Γ^l_{jj} Γ^j_{ll} - Γ^l_{lj} Γ^j_{jl}      j ≠ l
/// g^{ll} R_{jljl} = ∂_l Γ^l_{jj} - ∂_j Γ^l_{lj} + Σ_q Γ^q_{jj} Γ^l_{lq}
///                   - Γ^j_{jl} Γ^l_{jj} - (Γ^l_{lj})²                                       j ≠ l
/// ```
pub fn jjl(metric: &MetricData) -> Result<[Measure; 3]> {
    let r = metric.riemann()?;
    let gam = metric.gamma()?;
    let n = metric.n();
    let g = |l: usize, j: usize, k: usize| gam.value(&[l, j, k]);
    let dg = |l: usize, j: usize, k: usize, v: usize| gam[[l, j, k]].diff(v).value();
    let gi = |a: usize, b: usize| metric.ginv.at(a, b).value();
    let mut out = [Measure::new(), Measure::new(), Measure::new()];
    for j in 0..n {
        for l in 0..n {
            if j == l {
                continue;
            }
            let rj = r.value(&[j, l, j, l]);
            for p in 0..n {
                if distinct(&[j, l, p]) {
                    let lhs = gi(p, l) * rj;
                    let terms = [dg(p, j, j, l), g(p, j, j) * (g(p, p, l) - g(j, j, l)), g(l, j, j) * g(p, l, l)];
                    let rhs: Cx = terms.iter().sum();
                    out[0].add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2]], &[j, l, p]);
                }
            }
            let lhs = gi(j, l) * rj;
            let terms = [dg(j, j, j, l), -dg(j, j, l, j), g(l, j, j) * g(j, l, l), -g(l, l, j) * g(j, j, l)];
            let rhs: Cx = terms.iter().sum();
            out[1].add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2], terms[3]], &[j, l]);

            let lhs = gi(l, l) * rj;
            let mut terms = vec![dg(l, j, j, l), -dg(l, l, j, j)];
            for q in 0..n {
                terms.push(g(q, j, j) * g(l, l, q));
            }
            terms.push(-g(j, j, l) * g(l, j, j));
            terms.push(-g(l, l, j) * g(l, l, j));
            let rhs: Cx = terms.iter().sum();
            terms.push(lhs);
            out[2].add(lhs - rhs, &terms, &[j, l]);
        }
    }
    Ok(out)
}

/// Compatibility conditions for `log 𝐚_j` and `v_j`, distinct `j, k, l`:
/// `∂_l Γ^j_{jk} = ∂_k Γ^j_{jl}` and
/// `∂_l Γ^k_{jj} + Γ^k_{jj}(Γ^k_{kl} - Γ^j_{jl}) + Γ^l_{jj} Γ^k_{ll} = g^{kl} h_j^0 h_l^0`.
pub fn com(metric: &MetricData, h0: &[Jet]) -> Result<(Measure, Measure)> {
    let gam = metric.gamma()?;
    let n = metric.n();
    let g = |l: usize, j: usize, k: usize| gam.value(&[l, j, k]);
    let dg = |l: usize, j: usize, k: usize, v: usize| gam[[l, j, k]].diff(v).value();
    let mut first = Measure::new();
    let mut second = Measure::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                if !distinct(&[j, k, l]) {
                    continue;
                }
                let (a, b) = (dg(j, j, k, l), dg(j, j, l, k));
                first.add(a - b, &[a, b], &[j, k, l]);
                let terms = [
                    dg(k, j, j, l),
                    g(k, j, j) * (g(k, k, l) - g(j, j, l)),
                    g(l, j, j) * g(k, l, l),
                    -metric.ginv.at(k, l).value() * h0[j].value() * h0[l].value(),
                ];
                second.add(terms.iter().sum(), &terms, &[j, k, l]);
            }
        }
    }
    Ok((first, second))
}

/// `∂_l γ_{jk} = γ_{jk} γ_{jl} - γ_{jl} γ_{lk} - γ_{jk} γ_{kl} + g^{kl} h_k^0 h_l^0`,
/// distinct `j, k, l`.
pub fn gaj(metric: &MetricData, jd: &JoinedData) -> Measure {
    let n = jd.b.len();
    let g = |a: usize, b: usize| jd.gamma.value(&[a, b]);
    let mut m = Measure::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                if !distinct(&[j, k, l]) {
                    continue;
                }
                let lhs = jd.gamma[[j, k]].diff(l).value();
                let terms = [
                    g(j, k) * g(j, l),
                    -g(j, l) * g(l, k),
                    -g(j, k) * g(k, l),
                    metric.ginv.at(k, l).value() * jd.h0[k].value() * jd.h0[l].value(),
                ];
                let rhs: Cx = terms.iter().sum();
                m.add(lhs - rhs, &[lhs, terms[0], terms[1], terms[2], terms[3]], &[j, k, l]);
            }
        }
    }
    m
}

/// Matrix of the quadratic form `Nᵀ d²X` for one (unnormalized) normal field.
pub fn quadratic_form(x: &ImmersionJet, normal: &[Jet]) -> Result<SquareMat<Cx>> {
    let n = x.nvars();
    let nv: Vec<Cx> = normal.iter().map(Jet::value).collect();
    let mut out = SquareMat::from_fn(n, |_, _| Cx::new(0.0, 0.0));
    for j in 0..n {
        for k in 0..n {
            let mut alpha = vec![0u8; n];
            alpha[j] += 1;
            alpha[k] += 1;
            let d2 = x.partial(&alpha)?;
            out.set(j, k, nv.iter().zip(&d2).map(|(a, b)| a * b).sum());
        }
    }
    Ok(out)
}

/// `|hᵀh|`-free bilinear norm check of a vector of jets, used for frames.
pub fn frame_orthonormality(frame: &NormalFrame) -> Measure {
    let p = frame.codim();
    let mut m = Measure::new();
    for a in 0..p {
        for b in a..p {
            let s = dot(&frame.unit[a], &frame.unit[b]).value();
            let e = if a == b { ONE } else { Cx::new(0.0, 0.0) };
            m.add(s - e, &[s, e], &[a, b]);
        }
    }
    m
}

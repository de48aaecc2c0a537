//! Per-sample record generation for every suite.

use serde_json::json;

use super::identities::{self as id, Measure};
use super::{CheckPlan, CheckRecord, SampleCtx, Suite};
use crate::cx::{Cx, ONE, ZERO};
use crate::error::Result;
use crate::geometry::{first_form, joined_data, quadric_raw_normal, surface_raw_normals, GeometryData, MetricData};
use crate::immersions::{
    cosine_cascade, embed, eval_quadric, eval_surface, peterson_closed_z1_jet, Convention, DeformParams, PetersonFamily, Profiles,
    QuadricSpec,
};
use crate::jet::Jet;
use crate::linalg::{det, hadamard_bound, rank, SquareMat};

/// Relative pivot threshold for the rank of the joined matrix.
const RANK_TOL: f64 = 1e-10;
/// Relative strength of the metric perturbation in the negative control.
const METRIC_PERTURBATION: f64 = 0.01;

/// The families at `z = 0` and `z = 1`, built once per run. Construction
/// errors surface as failed records of the suites that need them.
pub struct Corners {
    pub zero: Result<PetersonFamily>,
    pub one: Result<PetersonFamily>,
}

impl Corners {
    pub fn new(q: &QuadricSpec, rebase: bool) -> Self {
        let n = q.n();
        Corners {
            zero: PetersonFamily::new(q.clone(), &DeformParams::uniform(n, ZERO, Convention::Theorem1).with_rebase(rebase)),
            one: PetersonFamily::new(q.clone(), &DeformParams::uniform(n, ONE, Convention::Theorem1).with_rebase(rebase)),
        }
    }
}

fn measured(check_id: &str, ctx: &SampleCtx, m: &Measure, tol: f64) -> CheckRecord {
    CheckRecord::new(check_id, ctx, m.residual, tol)
        .with("index", m.index.clone())
        .with("instances", m.instances)
}

/// Record ids a suite produces per sample, with their tolerances; used to
/// report a sample whose computation failed.
fn expected_ids(suite: Suite, plan: &CheckPlan) -> Vec<(&'static str, f64)> {
    let t = &plan.tolerances;
    match suite {
        Suite::Isometry => vec![("isometry.metric", t.isometry)],
        Suite::Conjugate => vec![("conjugate.offdiagonal", t.conjugate), ("conjugate.recurrence", t.conjugate)],
        Suite::Nondegeneracy => vec![
            ("nondegeneracy.determinant", 1.0 / t.nondegeneracy),
            ("nondegeneracy.rank", 0.0),
            ("nondegeneracy.orthogonality", t.orthogonality),
            ("nondegeneracy.b_sum", t.orthogonality),
        ],
        Suite::GaussCodazziRicci => vec![
            ("gcr.gauss.quadric", t.gauss_codazzi_ricci),
            ("gcr.codazzi.quadric", t.gauss_codazzi_ricci),
            ("gcr.ricci.quadric", t.gauss_codazzi_ricci),
            ("gcr.riemann_zero.quadric", t.gauss_codazzi_ricci),
            ("gcr.gauss.deformation", t.gauss_codazzi_ricci),
            ("gcr.codazzi.deformation", t.gauss_codazzi_ricci),
            ("gcr.ricci.deformation", t.gauss_codazzi_ricci),
            ("gcr.riemann_zero.deformation", t.gauss_codazzi_ricci),
        ],
        Suite::Theorem2 => vec![
            ("theorem2.christoffel_distinct", t.theorem2),
            ("theorem2.log_a", t.theorem2),
            ("theorem2.b_sum", t.theorem2),
            ("theorem2.hoj", t.theorem2),
            ("theorem2.ajj", t.theorem2),
            ("theorem2.sym", t.theorem2),
            ("theorem2.comint_diagonal", t.theorem2),
            ("theorem2.comint_distinct", t.theorem2),
        ],
        Suite::Curvature => {
            let mut v = vec![("curvature.riem1_derivative", t.curvature)];
            if plan.quadric.n() >= 4 {
                v.push(("curvature.riem1_algebraic", t.curvature));
            }
            v.extend([
                ("curvature.jkla", t.curvature),
                ("curvature.jjl_mixed", t.curvature),
                ("curvature.jjl_jl", t.curvature),
                ("curvature.jjl_ll", t.curvature),
                ("curvature.com_log_a", t.curvature),
                ("curvature.com_v", t.curvature),
                ("curvature.gaj", t.curvature),
            ]);
            v
        }
        Suite::ClosedForms => vec![
            ("closed.embedding", t.closed_embedding),
            ("closed.fg0", t.closed_embedding),
            ("closed.radius", t.closed_radius),
            ("closed.angle", t.closed_angle),
        ],
        Suite::Remark => vec![("remark.coefficients", t.remark)],
        Suite::NegativeControl => vec![
            ("negative.perturbed_metric_hoj", t.theorem2),
            ("negative.swapped_a_isometry", t.isometry),
            ("negative.z1_without_rebase", 0.0),
        ],
    }
}

/// All records of one suite at one sample point. Never fails: errors become
/// failed records carrying the error message.
pub fn run_sample(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily, corners: &Corners) -> Vec<CheckRecord> {
    let q = &plan.quadric;
    let out = match ctx.suite {
        Suite::Isometry => isometry(ctx, plan, fam),
        Suite::Conjugate => conjugate(ctx, plan, fam),
        Suite::Nondegeneracy => nondegeneracy(ctx, plan, fam),
        Suite::GaussCodazziRicci => gauss_codazzi_ricci(ctx, plan, fam),
        Suite::Theorem2 => theorem2(ctx, plan, fam),
        Suite::Curvature => curvature(ctx, plan, fam),
        Suite::ClosedForms => closed_forms(ctx, plan, corners),
        Suite::Remark => corners
            .one
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|one| remark(ctx, plan, one))
            .map(|r| vec![r]),
        Suite::NegativeControl => negative_control(ctx, plan, fam, q),
    };
    out.unwrap_or_else(|e| {
        expected_ids(ctx.suite, plan)
            .into_iter()
            .filter(|(id, _)| ctx.suite != Suite::NegativeControl || ctx.sample == 0 || *id != "negative.z1_without_rebase")
            .map(|(id, tol)| CheckRecord::failed(id, ctx, tol, &e))
            .collect()
    })
}

fn isometry(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let x = eval_quadric(&plan.quadric, &ctx.u, 1)?;
    let y = eval_surface(fam, &ctx.u, 1)?;
    let m = id::metric_difference(&first_form(&x)?, &first_form(&y)?);
    Ok(vec![measured("isometry.metric", ctx, &m, plan.tolerances.isometry)])
}

fn worse(a: Measure, b: Measure, a_name: &str, b_name: &str) -> (Measure, String) {
    if b.residual > a.residual {
        (b, b_name.into())
    } else {
        (a, a_name.into())
    }
}

fn conjugate(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let geo = GeometryData::new(&plan.quadric, fam, &ctx.u, 2)?;
    let tol = plan.tolerances.conjugate;
    let (qf, df) = (geo.quadric_form.as_ref().unwrap(), geo.deform_form.as_ref().unwrap());
    let (off, which) = worse(id::off_diagonal(qf), id::off_diagonal(df), "quadric", "deformation");
    let (rec, which_rec) = worse(
        id::conjugate_recurrence(&geo.quadric)?,
        id::conjugate_recurrence(&geo.deform)?,
        "quadric",
        "deformation",
    );
    Ok(vec![
        measured("conjugate.offdiagonal", ctx, &off, tol).with("immersion", which),
        measured("conjugate.recurrence", ctx, &rec, tol).with("immersion", which_rec),
    ])
}

/// The determinant whose non-vanishing gives non-degenerate joined second
/// forms at `z = 1`, with `δ = a_n/(a_0 sin² u^n + a_n cos² u^n)`:
///
/// ```text
/// | C_1          C_2    …  C_{n-1}   δ⁻¹ C_n     |
/// | a_1/(a_1-a_0) 0     …  0         sin² u^1    |
/// | …                                             |
/// | 0            …   a_{n-1}/(a_{n-1}-a_0) sin² u^{n-1} |
/// ```
///
/// Returns the determinant and the product of the row norms.
pub fn cascade_determinant(q: &QuadricSpec, u: &[Cx]) -> (Cx, f64) {
    let n = q.n();
    let (a0, an) = (q.a(0), q.a(n));
    let s = |x: Cx| x.sin() * x.sin();
    let delta = an / (a0 * s(u[n - 1]) + an * u[n - 1].cos() * u[n - 1].cos());
    let m = SquareMat::from_fn(n, |r, c| {
        if r == 0 {
            let ck = cosine_cascade(u, c + 1);
            if c + 1 == n {
                ck / delta
            } else {
                ck
            }
        } else if c + 1 == n {
            s(u[r - 1])
        } else if c + 1 == r {
            q.a(r) / (q.a(r) - a0)
        } else {
            ZERO
        }
    });
    (det(&m), hadamard_bound(&m))
}

fn nondegeneracy(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let t = &plan.tolerances;
    let n = plan.quadric.n();
    let (d, scale) = cascade_determinant(&plan.quadric, &ctx.u);
    let det_rec = CheckRecord::new("nondegeneracy.determinant", ctx, scale / d.norm(), 1.0 / t.nondegeneracy)
        .with("determinant", json!([d.re, d.im]))
        .with("scale", scale);
    let geo = GeometryData::new(&plan.quadric, fam, &ctx.u, 2)?;
    let jd = geo.joined()?;
    let rows: Vec<Vec<Cx>> = jd.vectors.iter().map(|v| v.iter().map(Jet::value).collect()).collect();
    let r = rank(&rows, RANK_TOL);
    Ok(vec![
        det_rec,
        CheckRecord::new("nondegeneracy.rank", ctx, (n - r) as f64, 0.0).with("rank", r),
        measured("nondegeneracy.orthogonality", ctx, &id::joined_orthogonality(&jd), t.orthogonality),
        measured("nondegeneracy.b_sum", ctx, &id::b_sum(&jd), t.orthogonality),
    ])
}

fn gauss_codazzi_ricci(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let geo = GeometryData::new(&plan.quadric, fam, &ctx.u, 3)?;
    let tol = plan.tolerances.gauss_codazzi_ricci;
    let mut out = Vec::with_capacity(8);
    let parts = [
        (
            "quadric",
            &geo.quadric_metric,
            geo.quadric_form.as_ref().unwrap(),
            &geo.quadric_frame,
        ),
        (
            "deformation",
            &geo.deform_metric,
            geo.deform_form.as_ref().unwrap(),
            &geo.deform_frame,
        ),
    ];
    for (name, metric, form, frame) in parts {
        let ms = [
            ("gauss", id::gauss(metric, form)?),
            ("codazzi", id::codazzi(metric, form, frame)?),
            ("ricci", id::ricci(metric, form, frame)?),
            ("riemann_zero", id::riemann_vanishing(metric)?),
        ];
        for (what, m) in ms {
            out.push(measured(&format!("gcr.{what}.{name}"), ctx, &m, tol));
        }
    }
    Ok(out)
}

fn theorem2(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let geo = GeometryData::new(&plan.quadric, fam, &ctx.u, 3)?;
    let tol = plan.tolerances.theorem2;
    let jd = geo.joined()?;
    let metric = &geo.quadric_metric;
    let (cd, co) = id::comint(&jd);
    let mut out = vec![
        measured("theorem2.christoffel_distinct", ctx, &id::christoffel_distinct(metric)?, tol),
        measured("theorem2.log_a", ctx, &id::log_a(metric, &jd)?, tol),
        measured("theorem2.b_sum", ctx, &id::b_sum(&jd), tol),
        measured("theorem2.hoj", ctx, &id::hoj(&jd), tol),
        measured("theorem2.ajj", ctx, &id::ajj(&jd), tol),
        measured("theorem2.sym", ctx, &id::sym(metric, &jd)?, tol),
    ];
    for (name, m) in [("theorem2.comint_diagonal", cd), ("theorem2.comint_distinct", co)] {
        let mut r = measured(name, ctx, &m, tol);
        r.finding = !r.pass;
        out.push(r);
    }
    Ok(out)
}

fn curvature(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily) -> Result<Vec<CheckRecord>> {
    let geo = GeometryData::new(&plan.quadric, fam, &ctx.u, 4)?;
    let tol = plan.tolerances.curvature;
    let metric = &geo.deform_metric;
    let jd = geo.joined()?;
    let (r1, r2) = id::riem1(metric)?;
    let [j1, j2, j3] = id::jjl(metric)?;
    let (c1, c2) = id::com(&geo.quadric_metric, &jd.h0)?;
    let mut ms = vec![("curvature.riem1_derivative", r1)];
    if !r2.is_empty() {
        ms.push(("curvature.riem1_algebraic", r2));
    }
    ms.extend([
        ("curvature.jkla", id::jkla(metric)?),
        ("curvature.jjl_mixed", j1),
        ("curvature.jjl_jl", j2),
        ("curvature.jjl_ll", j3),
        ("curvature.com_log_a", c1),
        ("curvature.com_v", c2),
        ("curvature.gaj", id::gaj(&geo.quadric_metric, &jd)),
    ]);
    Ok(ms.into_iter().map(|(name, m)| measured(name, ctx, &m, tol)).collect())
}

fn rel(a: Cx, b: Cx) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// `min(|a - b|, |a + b|) / max(1, |a|, |b|)`.
fn rel_up_to_sign(a: Cx, b: Cx) -> f64 {
    (a - b).norm().min((a + b).norm()) / 1f64.max(a.norm()).max(b.norm())
}

fn worst<I: IntoIterator<Item = (f64, usize)>>(it: I) -> (f64, usize) {
    it.into_iter().fold((0.0, 0), |w, (r, k)| {
        if r > w.0 || r.is_nan() {
            (if r.is_nan() { f64::INFINITY } else { r }, k)
        } else {
            w
        }
    })
}

fn closed_forms(ctx: &SampleCtx, plan: &CheckPlan, corners: &Corners) -> Result<Vec<CheckRecord>> {
    let q = &plan.quadric;
    let n = q.n();
    let t = &plan.tolerances;
    let u = &ctx.u;
    let mut out = Vec::with_capacity(4);

    match &corners.zero {
        Ok(zero) => {
            let x0 = eval_surface(zero, u, 0)?.point();
            let xq = embed(&eval_quadric(q, u, 0)?.point(), ZERO);
            let (r, k) = worst(x0.iter().zip(&xq).enumerate().map(|(k, (a, b))| (rel(*a, *b), k)));
            out.push(CheckRecord::new("closed.embedding", ctx, r, t.closed_embedding).with("coordinate", k));
            let f = zero.radius(1, u[0], 0)?.value();
            let g = zero.angle(1, u[0], 0)?.value();
            let pairs = [(f * g.cos(), q.sqrt_a(0) * u[0].cos()), (f * g.sin(), q.sqrt_a(1) * u[0].sin())];
            let (r, k) = worst(pairs.iter().enumerate().map(|(k, (a, b))| (rel(*a, *b), k)));
            out.push(
                CheckRecord::new("closed.fg0", ctx, r, t.closed_embedding)
                    .with("line", if k == 0 { "cos" } else { "sin" })
                    .with("base", zero.base_for(1, u[0])),
            );
        }
        Err(e) => {
            out.push(CheckRecord::failed("closed.embedding", ctx, t.closed_embedding, e));
            out.push(CheckRecord::failed("closed.fg0", ctx, t.closed_embedding, e));
        }
    }

    match &corners.one {
        Ok(one) => {
            let x = eval_surface(one, u, 1)?;
            let closed = peterson_closed_z1_jet(q, u, 1)?;
            let xs = x.coords();
            let mut radius = Vec::with_capacity(n - 1);
            let mut angle = Vec::with_capacity(n - 1);
            for k in 1..n {
                let (xa, xb) = (&xs[2 * k - 2], &xs[2 * k - 1]);
                let r2 = xa.value() * xa.value() + xb.value() * xb.value();
                let c = closed.radius[k - 1].value();
                radius.push((rel(r2, c * c), k));
                let v = k - 1;
                let dtheta = (xa.value() * xb.d1(v) - xb.value() * xa.d1(v)) / r2;
                angle.push((rel_up_to_sign(dtheta, closed.angle[k - 1].d1(v)), k));
            }
            let (r, k) = worst(radius);
            out.push(CheckRecord::new("closed.radius", ctx, r, t.closed_radius).with("plane", k));
            let (r, k) = worst(angle);
            out.push(CheckRecord::new("closed.angle", ctx, r, t.closed_angle).with("plane", k));
        }
        Err(e) => {
            out.push(CheckRecord::failed("closed.radius", ctx, t.closed_radius, e));
            out.push(CheckRecord::failed("closed.angle", ctx, t.closed_angle, e));
        }
    }
    Ok(out)
}

/// `D = N̂_0ᵀ d²X_0 - Σ_k (1/(2a_k)) N_kᵀ d²X_1` with the unnormalized
/// normals, as a symmetric matrix of coefficients of `du^j du^k`.
pub fn remark_form(q: &QuadricSpec, one: &PetersonFamily, u: &[Cx]) -> Result<(SquareMat<Cx>, Measure)> {
    let n = q.n();
    let x0 = eval_quadric(q, u, 2)?;
    let x1 = eval_surface(one, u, 2)?;
    let base = id::quadratic_form(&x0, &quadric_raw_normal(q, &x0)?)?;
    let parts: Vec<SquareMat<Cx>> = surface_raw_normals(one, &x1)?
        .iter()
        .enumerate()
        .map(|(i, nk)| Ok(id::quadratic_form(&x1, nk)?.map(|v| v / (2.0 * q.a(i + 1)))))
        .collect::<Result<_>>()?;
    let d = SquareMat::from_fn(n, |j, k| parts.iter().fold(*base.at(j, k), |acc, p| acc - p.at(j, k)));
    let mut m = Measure::new();
    for j in 0..n {
        for k in j..n {
            if j == n - 1 && k == n - 1 {
                continue;
            }
            let mut terms = vec![*base.at(j, k)];
            terms.extend(parts.iter().map(|p| *p.at(j, k)));
            m.add(*d.at(j, k), &terms, &[j, k]);
        }
    }
    Ok((d, m))
}

fn remark(ctx: &SampleCtx, plan: &CheckPlan, one: &PetersonFamily) -> Result<CheckRecord> {
    let n = plan.quadric.n();
    let (d, m) = remark_form(&plan.quadric, one, &ctx.u)?;
    let last = *d.at(n - 1, n - 1);
    Ok(measured("remark.coefficients", ctx, &m, plan.tolerances.remark)
        .with("last_coefficient", json!([last.re, last.im]))
        .with("last_coefficient_modulus", last.norm()))
}

/// `g · (1 + ε u¹u²)` as a jet matrix of the same order.
pub fn perturbed_metric(metric: &MetricData, u: &[Cx]) -> Result<MetricData> {
    let proto = metric.g.at(0, 0);
    let (n, order) = (proto.nvars(), proto.order());
    let u1 = Jet::var_unchecked(1, u[0], n, order)?;
    let u2 = Jet::var_unchecked(2, u[1], n, order)?;
    let factor = (&u1 * &u2) * METRIC_PERTURBATION + 1.0;
    MetricData::from_metric(metric.g.map(|g| g * &factor))
}

fn negative_control(ctx: &SampleCtx, plan: &CheckPlan, fam: &PetersonFamily, q: &QuadricSpec) -> Result<Vec<CheckRecord>> {
    let t = &plan.tolerances;
    let n = q.n();
    let geo = GeometryData::new(q, fam, &ctx.u, 3)?;
    let pert = perturbed_metric(&geo.quadric_metric, &ctx.u)?;
    let jd = joined_data(geo.quadric_form.as_ref().unwrap(), geo.deform_form.as_ref().unwrap(), &pert)?;
    let mut out = vec![measured("negative.perturbed_metric_hoj", ctx, &id::hoj(&jd), t.theorem2)];

    let mut a = q.coeffs().to_vec();
    a.swap(1, 2);
    let swapped = QuadricSpec::new(a)?;
    let x = eval_quadric(&swapped, &ctx.u, 1)?;
    let y = eval_surface(fam, &ctx.u, 1)?;
    let m = id::metric_difference(&first_form(&x)?, &first_form(&y)?);
    out.push(measured("negative.swapped_a_isometry", ctx, &m, t.isometry));

    if ctx.sample == 0 {
        let params = DeformParams::uniform(n, ONE, Convention::Theorem1).with_rebase(false);
        out.push(match PetersonFamily::new(q.clone(), &params) {
            Ok(_) => CheckRecord::new("negative.z1_without_rebase", ctx, 0.0, 0.0),
            Err(e) => CheckRecord::failed("negative.z1_without_rebase", ctx, 0.0, &e),
        });
    }
    Ok(out)
}

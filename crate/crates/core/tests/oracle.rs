mod common;

use common::*;
use qdlab::checks::sampling::{random_a, sample_u, sample_z, SampleDomain};
use qdlab::geometry::{first_form, quadric_raw_normal, second_form_with, surface_raw_normals, MetricData};
use qdlab::immersions::{
    eval_peterson, eval_quadric, eval_surface, DeformParams, GeneralizedFamily, GeneralizedForm, PetersonFamily, Profiles, QuadricSpec,
};
use qdlab::jet::Jet;
use qdlab::Cx;

fn metric_values(x: &qdlab::geometry::ImmersionJet) -> Vec<Cx> {
    let g = first_form(x).unwrap();
    g.entries().iter().map(|e| e.value()).collect()
}

fn max_gap(x: &[Cx], y: &[Cx]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

#[test]
fn n2_isometry_by_finite_differences() {
    let a = reals(&[1.0, 4.0, 9.0]);
    let z = reals(&[0.5]);
    let q = QuadricOracle { a: a.clone() };
    for u in [[0.3, 0.7], [1.1, 0.4], [0.8, 1.2]] {
        let u = reals(&u);
        let p = PetersonOracle::new(&a, &z, &u);
        let g0 = flatten(&fd_first_form(&q, &u));
        let gz = flatten(&fd_first_form(&p, &u));
        assert!(max_gap(&g0, &gz) < 1e-8, "{g0:?} vs {gz:?}");
    }
}

#[test]
fn n4_random_isometry_by_finite_differences() {
    let a = random_a(3, 4);
    let z = sample_z(3, 0, 4, &a);
    let dom = SampleDomain {
        perturbation: 0.05,
        ..Default::default()
    };
    for i in 0..5 {
        let u = sample_u(3, 0, 0, i, 4, &dom);
        let p = PetersonOracle::new(&a, &z, &u);
        let g0 = flatten(&fd_first_form(&QuadricOracle { a: a.clone() }, &u));
        let gz = flatten(&fd_first_form(&p, &u));
        assert!(relative_gap(&g0, &gz) < 1e-8);
    }
}

#[test]
fn quadric_n2_metric_closed_form() {
    let (a0, a1, a2) = (2.0, 3.0, 7.0);
    let q = QuadricSpec::new(reals(&[a0, a1, a2])).unwrap();
    let (u1, u2) = (0.6, 0.9f64);
    let x = eval_quadric(&q, &reals(&[u1, u2]), 1).unwrap();
    let g = metric_values(&x);
    let (s1, c1, s2, c2) = (u1.sin(), u1.cos(), u2.sin(), u2.cos());
    let g11 = c2 * c2 * (a0 * s1 * s1 + a1 * c1 * c1);
    let g12 = (a0 - a1) * s1 * c1 * s2 * c2;
    let g22 = s2 * s2 * (a0 * c1 * c1 + a1 * s1 * s1) + a2 * c2 * c2;
    let want = reals(&[g11, g12, g12, g22]);
    assert!(max_gap(&g, &want) < 1e-13, "{g:?}");
}

#[test]
fn quadric_raw_second_form_is_minus_cascade_squares() {
    let q = QuadricSpec::new(random_a(5, 4)).unwrap();
    let u = reals(&[0.3, 0.5, 0.9, 1.2]);
    let x = eval_quadric(&q, &u, 2).unwrap();
    let h = second_form_with(&x, &[quadric_raw_normal(&q, &x).unwrap()]).unwrap();
    for j in 0..4 {
        for k in 0..4 {
            let want = if j == k {
                -u[j + 1..].iter().map(|t| t.cos().powi(2)).product::<Cx>()
            } else {
                c(0.0)
            };
            assert!((h.value(&[0, j, k]) - want).norm() < 1e-13);
        }
    }
}

#[test]
fn deformation_lies_on_its_cylinders() {
    let a = reals(&[1.0, 2.0, 3.0, 4.0]);
    let z = sample_z(11, 0, 3, &a);
    let u = reals(&[0.4, 0.8, 1.1]);
    let x = eval_peterson(&QuadricSpec::new(a.clone()).unwrap(), &DeformParams::theorem1(z.clone()), &u, 0).unwrap();
    let p = PetersonOracle::new(&a, &z, &u);
    let pt = x.point();
    for k in 1..3 {
        let ck: Cx = u[k..].iter().map(|t| t.cos()).product();
        let fk = ck * p.f(k, u[k - 1]);
        let res = pt[2 * k - 2].powi(2) + pt[2 * k - 1].powi(2) - fk * fk;
        assert!(res.norm() < 1e-12);
    }
}

#[test]
fn raw_normals_are_normal() {
    let a = random_a(8, 3);
    let q = QuadricSpec::new(a.clone()).unwrap();
    let z = sample_z(8, 1, 3, &a);
    let fam = PetersonFamily::new(q, &DeformParams::theorem1(z)).unwrap();
    let u = reals(&[0.5, 0.7, 0.6]);
    let x = eval_surface(&fam, &u, 1).unwrap();
    for nk in surface_raw_normals(&fam, &x).unwrap() {
        for j in 0..3 {
            let t = x.derivative(j);
            let v: Cx = nk.iter().zip(&t).map(|(a, b)| a.value() * b.value()).sum();
            assert!(v.norm() < 1e-11, "{v}");
        }
    }
}

#[test]
fn metric_inverse_and_riemann_symmetries() {
    let a = reals(&[1.0, 2.0, 3.0, 4.0, 5.0]);
    let z = sample_z(1, 0, 4, &a);
    let x = eval_peterson(
        &QuadricSpec::new(a).unwrap(),
        &DeformParams::theorem1(z),
        &reals(&[0.3, 0.6, 0.9, 1.2]),
        3,
    )
    .unwrap();
    let m = MetricData::new(&x).unwrap();
    let n = 4;
    for i in 0..n {
        for j in 0..n {
            let p: Cx = (0..n).map(|k| m.g.at(i, k).value() * m.ginv.at(k, j).value()).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((p - want).norm() < 1e-10);
            assert!((m.g.at(i, j).value() - m.g.at(j, i).value()).norm() < 1e-14);
        }
    }
    let r = m.riemann().unwrap();
    let scale = r.max_value_norm().max(1.0);
    let v = |i: [usize; 4]| r.value(&i);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for q in 0..n {
                    let x = v([j, k, l, q]);
                    assert!((x + v([k, j, l, q])).norm() < 1e-9 * scale);
                    assert!((x + v([j, k, q, l])).norm() < 1e-9 * scale);
                    assert!((x - v([l, q, j, k])).norm() < 1e-9 * scale);
                    let bianchi = x + v([j, l, q, k]) + v([j, q, k, l]);
                    assert!(bianchi.norm() < 1e-9 * scale);
                }
            }
        }
    }
}

#[test]
fn normal_frame_is_orthonormal_with_antisymmetric_connection() {
    let a = random_a(2, 4);
    let q = QuadricSpec::new(a.clone()).unwrap();
    let z = sample_z(2, 0, 4, &a);
    let (_, frame) = qdlab::geometry::normal_frame_peterson(&q, &DeformParams::theorem1(z), &reals(&[0.5, 0.9, 0.4, 1.0]), 2).unwrap();
    let p = frame.codim();
    let conn = frame.conn.as_ref().unwrap();
    for al in 0..p {
        for be in 0..p {
            let ip: Cx = frame.unit[al].iter().zip(&frame.unit[be]).map(|(x, y)| x.value() * y.value()).sum();
            assert!((ip - if al == be { 1.0 } else { 0.0 }).norm() < 1e-10);
            for j in 0..4 {
                assert!((conn.value(&[al, be, j]) + conn.value(&[be, al, j])).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn quadric_and_deformation_share_curvature() {
    let a = reals(&[1.0, 2.5, 3.0, 4.5]);
    let q = QuadricSpec::new(a.clone()).unwrap();
    let z = sample_z(4, 0, 3, &a);
    let u = reals(&[0.4, 0.9, 0.7]);
    let r0 = MetricData::new(&eval_quadric(&q, &u, 3).unwrap()).unwrap();
    let rz = MetricData::new(&eval_peterson(&q, &DeformParams::theorem1(z), &u, 3).unwrap()).unwrap();
    let (r0, rz) = (r0.riemann().unwrap(), rz.riemann().unwrap());
    let x: Vec<Cx> = r0.entries().iter().map(Jet::value).collect();
    let y: Vec<Cx> = rz.entries().iter().map(Jet::value).collect();
    assert!(relative_gap(&x, &y) < 1e-8);
}

#[test]
fn angle_second_derivative_matches_quadrature_differences() {
    let q = QuadricSpec::new(reals(&[1.0, 2.0, 3.0])).unwrap();
    let fam = PetersonFamily::new(q, &DeformParams::theorem1(reals(&[0.4]))).unwrap();
    let (t, h) = (c(0.8), 1e-4);
    let g = |s: f64| fam.angle(1, c(s), 0).unwrap().value();
    let fd = (g(0.8 + h) - 2.0 * g(0.8) + g(0.8 - h)) / (h * h);
    let jet = fam.angle(1, t, 2).unwrap().coeffs()[2] * 2.0;
    assert!((fd - jet).norm() < 1e-6 * jet.norm().max(1.0), "{fd} vs {jet}");
}

/// One-parameter surface family on the n = 2 quadric with `w = -a_0 z`
/// against the family with parameter `z`.
#[test]
fn one_parameter_family_reproduces_deformation() {
    let a = reals(&[1.0, 2.0, 3.0]);
    let q = QuadricSpec::new(a.clone()).unwrap();
    let base = PetersonFamily::new(q.clone(), &DeformParams::theorem1(reals(&[0.0]))).unwrap();
    for zv in [0.3, 0.55, 0.8] {
        let pet = PetersonFamily::new(q.clone(), &DeformParams::theorem1(reals(&[zv]))).unwrap();
        let gen = GeneralizedFamily::new(
            base.clone(),
            &DeformParams::generalized(reals(&[-a[0].re * zv])),
            GeneralizedForm::Bla,
        )
        .unwrap();
        for i in 0..20 {
            let t = c(0.1 + 1.3 * i as f64 / 19.0);
            let r2 = |p: &dyn Profiles| p.radius(1, t, 0).unwrap().value().powi(2);
            let dg = |p: &dyn Profiles| p.angle_rate(1, t, 0).unwrap().value();
            let dh = |p: &dyn Profiles| p.height_rate(t, 0).unwrap().value();
            assert!((r2(&pet) - r2(&gen)).norm() < 1e-10);
            assert!((dg(&pet).powi(2) - dg(&gen).powi(2)).norm() < 1e-10);
            assert!((dh(&pet).powi(2) - dh(&gen).powi(2)).norm() < 1e-10);
            let u = [t, c(0.6)];
            let gp = metric_values(&eval_surface(&pet, &u, 1).unwrap());
            let gg = metric_values(&eval_surface(&gen, &u, 1).unwrap());
            assert!(max_gap(&gp, &gg) < 1e-10);
        }
    }
}

#[test]
fn generalized_members_are_isometric() {
    let q = QuadricSpec::new(reals(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    let base = PetersonFamily::new(q, &DeformParams::theorem1(reals(&[0.0, 0.0]))).unwrap();
    let u = reals(&[0.5, 0.8, 0.6]);
    let g_base = metric_values(&eval_surface(&base, &u, 1).unwrap());
    for z in [[-0.3, -0.6], [0.2, -0.1], [-0.5, 0.3]] {
        let fam = GeneralizedFamily::new(base.clone(), &DeformParams::generalized(reals(&z)), GeneralizedForm::Fgr).unwrap();
        let g = metric_values(&eval_surface(&fam, &u, 1).unwrap());
        assert!(max_gap(&g, &g_base) < 1e-8, "z = {z:?}");
    }
}

#[test]
fn jet_forms_match_finite_differences() {
    let dom = SampleDomain {
        perturbation: 0.05,
        ..Default::default()
    };
    for n in 2..=4 {
        for a in [(1..=n + 1).map(|j| c(j as f64)).collect::<Vec<_>>(), random_a(9, n)] {
            let u = sample_u(9, 0, 0, n, n, &dom);
            let z = sample_z(9, 0, n, &a);
            let gap_q = oracle_gap(&QuadricOracle { a: a.clone() }, &jet_forms_quadric(&a, &u), &u);
            let gap_p = oracle_gap(&PetersonOracle::new(&a, &z, &u), &jet_forms_peterson(&a, &z, &u), &u);
            assert!(gap_q < 1e-6 && gap_p < 1e-6, "n = {n}: {gap_q:e} {gap_p:e}");
            let crossed = oracle_gap(&PetersonOracle::new(&a, &z, &u), &jet_forms_quadric(&a, &u), &u);
            assert!(crossed > 1e-3, "n = {n}: the comparison cannot tell the forms apart");
        }
    }
}

/// The `z_0 = 0` family on the quadric's own profiles with `w_k = -a_0 z_k`
/// against the `z_0 = 1` family with parameters `z_k`.
#[test]
fn conventions_correspond_through_scaling() {
    let a = reals(&[1.0, 2.0, 3.0, 4.0, 5.0]);
    let q = QuadricSpec::new(a.clone()).unwrap();
    let base = PetersonFamily::new(q.clone(), &DeformParams::theorem1(reals(&[0.0, 0.0, 0.0]))).unwrap();
    let z = sample_z(21, 0, 4, &a);
    let w: Vec<Cx> = z.iter().map(|zk| -a[0] * zk).collect();
    let pet = PetersonFamily::new(q, &DeformParams::theorem1(z)).unwrap();
    let gen = GeneralizedFamily::new(base, &DeformParams::generalized(w), GeneralizedForm::Fgr).unwrap();
    for i in 0..20 {
        let t = c(0.15 + 1.25 * i as f64 / 19.0);
        for k in 1..4 {
            let r2 = |p: &dyn Profiles| p.radius(k, t, 0).unwrap().value().powi(2);
            let dg2 = |p: &dyn Profiles| p.angle_rate(k, t, 0).unwrap().value().powi(2);
            assert!((r2(&pet) - r2(&gen)).norm() < 1e-10, "k = {k}");
            assert!(
                (dg2(&pet) - dg2(&gen)).norm() < 1e-9 * dg2(&pet).norm().max(1.0),
                "k = {k}: {} {}",
                dg2(&pet),
                dg2(&gen)
            );
        }
        let dh2 = |p: &dyn Profiles| p.height_rate(t, 0).unwrap().value().powi(2);
        assert!((dh2(&pet) - dh2(&gen)).norm() < 1e-10);
    }
}

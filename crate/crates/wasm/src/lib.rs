//! Browser bindings: surface meshes and two residuals, real inputs only.

use qdlab::checks::identities::metric_difference;
use qdlab::cli::mesh::export_mesh;
use qdlab::cli::MeshSpec;
use qdlab::geometry::first_form;
use qdlab::immersions::{eval_peterson, eval_quadric, peterson_closed_z1, Convention, DeformParams, PetersonFamily, Profiles, QuadricSpec};
use qdlab::Cx;
use wasm_bindgen::prelude::*;

fn complex(xs: &[f64]) -> Vec<Cx> {
    xs.iter().map(|&x| Cx::new(x, 0.0)).collect()
}

fn js(e: qdlab::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn quadric(a: &[f64]) -> Result<QuadricSpec, JsError> {
    QuadricSpec::new(complex(a)).map_err(js)
}

/// CSV mesh `u1,u2,x0,x1,x2` of `X_z` for `n = 2` over `[lo, hi]²`.
#[wasm_bindgen]
pub fn mesh(a: &[f64], z: f64, lo: f64, hi: f64, steps: usize) -> Result<String, JsError> {
    let spec = MeshSpec {
        u1: [lo, hi],
        u2: [lo, hi],
        steps,
        ..Default::default()
    };
    export_mesh(&quadric(a)?, Cx::new(z, 0.0), true, &spec).map_err(js)
}

/// Largest scaled gap between the first forms of the quadric and `X_z` at `u`.
#[wasm_bindgen]
pub fn isometry_residual(a: &[f64], z: &[f64], u: &[f64]) -> Result<f64, JsError> {
    let q = quadric(a)?;
    let u = complex(u);
    let base = first_form(&eval_quadric(&q, &u, 1).map_err(js)?).map_err(js)?;
    let deformed = first_form(&eval_peterson(&q, &DeformParams::theorem1(complex(z)), &u, 1).map_err(js)?).map_err(js)?;
    Ok(metric_difference(&base, &deformed).residual)
}

/// Largest gap between the squared plane radii of `X_1` from the profile
/// integrals and from the closed formula.
#[wasm_bindgen]
pub fn closed_form_gap(a: &[f64], u: &[f64]) -> Result<f64, JsError> {
    let q = quadric(a)?;
    let n = q.n();
    let u = complex(u);
    let fam = PetersonFamily::new(q.clone(), &DeformParams::uniform(n, Cx::new(1.0, 0.0), Convention::Theorem1)).map_err(js)?;
    let (pairs, _) = peterson_closed_z1(&q, &u).map_err(js)?;
    let mut gap = 0.0f64;
    for (k, (radius, _)) in pairs.iter().enumerate() {
        let c: Cx = u[k + 1..].iter().map(|t| t.cos()).product();
        let f = c * fam.radius(k + 1, u[k], 0).map_err(js)?.value();
        gap = gap.max((f * f - radius * radius).norm());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_are_small() {
        assert!(isometry_residual(&[1.0, 2.0, 3.0], &[0.5], &[0.4, 0.7]).unwrap() < 1e-10);
        assert!(closed_form_gap(&[1.0, 2.0, 3.0, 4.0], &[0.4, 0.7, 0.9]).unwrap() < 1e-10);
    }

    #[test]
    fn mesh_has_header() {
        let csv = mesh(&[1.0, 4.0, 9.0], 0.5, 0.2, 1.2, 3).unwrap();
        assert!(csv.starts_with("u1,u2,x0,x1,x2\n"));
        assert_eq!(csv.lines().count(), 10);
    }
}

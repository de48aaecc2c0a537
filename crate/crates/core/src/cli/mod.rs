//! Command-line plumbing: configuration, reports, meshes and point
//! evaluation.

pub mod config;
pub mod mesh;
pub mod report;

use serde_json::{json, Value};

use crate::cx::Cx;
use crate::error::Result;
use crate::geometry::GeometryData;
use crate::immersions::{DeformParams, PetersonFamily, QuadricSpec};
use crate::jet::Jet;
use crate::linalg::SquareMat;

pub use config::{parse_config, MeshSpec, RunConfig, ZSpec};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Exit code for an error raised before any record was produced.
pub fn exit_code(e: &crate::Error) -> i32 {
    if e.is_numerical() {
        exit::NUMERICAL
    } else {
        exit::USAGE
    }
}

fn pair(c: Cx) -> Value {
    json!([c.re, c.im])
}

fn matrix(m: &SquareMat<Jet>) -> Value {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| pair(m.at(i, j).value())).collect::<Vec<_>>())
        .collect()
}

/// Point, first and second fundamental forms of the quadric and of `X_z` at
/// `u`, as JSON.
pub fn eval_point(q: &QuadricSpec, z: &[Cx], rebase: bool, u: &[Cx]) -> Result<Value> {
    let fam = PetersonFamily::new(q.clone(), &DeformParams::theorem1(z.to_vec()).with_rebase(rebase))?;
    let geo = GeometryData::new(q, &fam, u, 2)?;
    let n = q.n();
    let form = |f: &crate::geometry::SecondForm| -> Value {
        (0..f.codim())
            .map(|a| {
                (0..n)
                    .map(|j| (0..n).map(|k| pair(f.h.value(&[a, j, k]))).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    Ok(json!({
        "schema_version": crate::checks::SCHEMA_VERSION,
        "n": n,
        "a": q.coeffs().iter().map(|c| pair(*c)).collect::<Vec<_>>(),
        "z": z.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
        "u": u.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
        "quadric": {
            "point": geo.quadric.point().into_iter().map(pair).collect::<Vec<_>>(),
            "first_form": matrix(&geo.quadric_metric.g),
            "second_form": form(geo.quadric_form.as_ref().unwrap()),
        },
        "deformation": {
            "point": geo.deform.point().into_iter().map(pair).collect::<Vec<_>>(),
            "first_form": matrix(&geo.deform_metric.g),
            "second_form": form(geo.deform_form.as_ref().unwrap()),
        },
    }))
}

//! CSV export of real `n = 2` surfaces.

use std::fmt::Write;

use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::immersions::{eval_surface, DeformParams, PetersonFamily, QuadricSpec};

use super::config::MeshSpec;

pub const MESH_HEADER: &str = "u1,u2,x0,x1,x2";
/// Largest imaginary part accepted in a real mesh.
pub const REALITY_TOL: f64 = 1e-10;

/// Grid values `lo + (hi - lo) i/(steps - 1)`.
pub fn grid(bounds: [f64; 2], steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| bounds[0] + (bounds[1] - bounds[0]) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Rows `u1,u2,x0,x1,x2` of `X_z` over the grid, `u1` varying slowest.
pub fn export_mesh(q: &QuadricSpec, z: Cx, rebase: bool, spec: &MeshSpec) -> Result<String> {
    if q.n() != 2 {
        return Err(Error::Config(format!("mesh export needs n = 2, got n = {}", q.n())));
    }
    let fam = PetersonFamily::new(q.clone(), &DeformParams::theorem1(vec![z]).with_rebase(rebase))?;
    let mut out = String::from(MESH_HEADER);
    out.push('\n');
    for u1 in grid(spec.u1, spec.steps) {
        for u2 in grid(spec.u2, spec.steps) {
            let x = eval_surface(&fam, &[Cx::new(u1, 0.0), Cx::new(u2, 0.0)], 0)?.point();
            if let Some(c) = x.iter().find(|c| c.im.abs() > REALITY_TOL) {
                return Err(Error::domain(
                    "mesh",
                    *c,
                    format!("surface is not real at u = ({u1}, {u2}); choose a and z so that all radicands are positive"),
                ));
            }
            write!(out, "{u1},{u2}").unwrap();
            for c in &x {
                write!(out, ",{}", c.re).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

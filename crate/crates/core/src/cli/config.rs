//! Run configuration: a flat TOML schema, validated up front.
//!
//! ```toml
//! n = 3
//! a = [[1, 0], [2, 0], [3, 0], [4, 0]]   # complex numbers as [re, im]
//! z = [[[0.3, 0], [0.7, 0]]]             # explicit z-sets, or
//! z_draws = 5                            # random z-sets (default 1)
//! seed = 42
//! samples = 50
//! suites = ["all"]
//! rebase = true
//! max_order = 4
//!
//! [domain]
//! lo = 0.15
//! hi = 1.40
//! perturbation = 0.0
//!
//! [tolerances]
//! isometry = 1e-8
//!
//! [output]
//! report = "report.json"
//! mesh = "mesh.csv"
//!
//! [mesh]
//! z = [0.5, 0]
//! u1 = [0.15, 1.4]
//! u2 = [0.15, 1.4]
//! steps = 25
//!
//! [eval]
//! u = [[0.5, 0], [0.7, 0], [0.9, 0]]
//! ```

use std::ops::Range;
use std::path::PathBuf;

use serde::Deserialize;
use toml::Spanned;

use crate::checks::{parse_suites, sampling, CheckPlan, SampleDomain, Suite, Tolerances};
use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::immersions::QuadricSpec;
use crate::jet::MAX_ORDER;

type Pair = [f64; 2];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Option<Spanned<usize>>,
    a: Option<Spanned<Vec<Pair>>>,
    z: Option<Spanned<Vec<Vec<Pair>>>>,
    z_draws: Option<Spanned<usize>>,
    seed: Option<u64>,
    samples: Option<Spanned<usize>>,
    suites: Option<Spanned<Vec<String>>>,
    rebase: Option<bool>,
    max_order: Option<Spanned<usize>>,
    domain: Option<Spanned<RawDomain>>,
    tolerances: Option<Spanned<Tolerances>>,
    output: Option<RawOutput>,
    mesh: Option<Spanned<RawMesh>>,
    eval: Option<Spanned<RawEval>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    lo: Option<f64>,
    hi: Option<f64>,
    perturbation: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    report: Option<PathBuf>,
    mesh: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    z: Option<Pair>,
    u1: Option<[f64; 2]>,
    u2: Option<[f64; 2]>,
    steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEval {
    u: Option<Vec<Pair>>,
    z: Option<Vec<Pair>>,
}

/// Deformation parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum ZSpec {
    Explicit(Vec<Vec<Cx>>),
    Random(usize),
}

/// Rectangular parameter grid of an `n = 2` mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub z: Option<Cx>,
    pub u1: [f64; 2],
    pub u2: [f64; 2],
    pub steps: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            z: None,
            u1: [0.15, 1.40],
            u2: [0.15, 1.40],
            steps: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub quadric: QuadricSpec,
    pub z: ZSpec,
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<Suite>,
    pub rebase: bool,
    pub max_order: usize,
    pub domain: SampleDomain,
    pub tolerances: Tolerances,
    pub report: Option<PathBuf>,
    pub mesh_out: Option<PathBuf>,
    pub mesh: MeshSpec,
    pub eval_u: Option<Vec<Cx>>,
    pub eval_z: Option<Vec<Cx>>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 50;

impl Default for RunConfig {
    /// `n = 3`, `a = (1, 2, 3, 4)`, one random z-draw.
    fn default() -> Self {
        let a = (1..=4).map(|j| Cx::new(j as f64, 0.0)).collect();
        RunConfig {
            quadric: QuadricSpec::new(a).expect("distinct"),
            z: ZSpec::Random(1),
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            suites: Suite::all(),
            rebase: true,
            max_order: MAX_ORDER,
            domain: SampleDomain::default(),
            tolerances: Tolerances::default(),
            report: None,
            mesh_out: None,
            mesh: MeshSpec::default(),
            eval_u: None,
            eval_z: None,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn at(text: &str, key: &str, span: Range<usize>, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("key `{key}` (line {}): {msg}", line_of(text, span.start)))
}

fn cxs(v: &[Pair]) -> Vec<Cx> {
    v.iter().map(|p| Cx::new(p[0], p[1])).collect()
}

fn finite(v: &[Pair]) -> bool {
    v.iter().flatten().all(|x| x.is_finite())
}

/// Parses and validates a configuration. Error messages name the key and
/// its line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let loc = e.span().map(|s| format!(" (line {})", line_of(text, s.start))).unwrap_or_default();
        Error::Config(format!("{}{loc}", e.message().trim()))
    })?;
    let mut cfg = RunConfig::default();

    if let Some(a) = &raw.a {
        if !finite(a.get_ref()) {
            return Err(at(text, "a", a.span(), "entries must be finite"));
        }
        if a.get_ref().len() < 3 {
            return Err(at(
                text,
                "a",
                a.span(),
                format!("needs n + 1 ≥ 3 coefficients, got {}", a.get_ref().len()),
            ));
        }
        cfg.quadric = QuadricSpec::new(cxs(a.get_ref())).map_err(|e| at(text, "a", a.span(), e))?;
    }
    match (&raw.n, &raw.a) {
        (Some(n), Some(a)) if *n.get_ref() + 1 != a.get_ref().len() => {
            return Err(at(
                text,
                "n",
                n.span(),
                format!(
                    "n = {} needs {} coefficients in `a`, got {}",
                    n.get_ref(),
                    n.get_ref() + 1,
                    a.get_ref().len()
                ),
            ));
        }
        (Some(n), None) => return Err(at(text, "n", n.span(), "`a` must be given with `n`")),
        _ => {}
    }
    let n = cfg.quadric.n();

    match (&raw.z, &raw.z_draws) {
        (Some(z), Some(_)) => return Err(at(text, "z", z.span(), "give either `z` or `z_draws`, not both")),
        (Some(z), None) => {
            if z.get_ref().is_empty() {
                return Err(at(text, "z", z.span(), "needs at least one z-set"));
            }
            for (i, set) in z.get_ref().iter().enumerate() {
                if set.len() + 1 != n {
                    return Err(at(
                        text,
                        "z",
                        z.span(),
                        format!("z-set {} has {} entries, expected n - 1 = {}", i + 1, set.len(), n - 1),
                    ));
                }
                if !finite(set) {
                    return Err(at(text, "z", z.span(), "entries must be finite"));
                }
            }
            cfg.z = ZSpec::Explicit(z.get_ref().iter().map(|s| cxs(s)).collect());
        }
        (None, Some(d)) => {
            if *d.get_ref() == 0 {
                return Err(at(text, "z_draws", d.span(), "must be at least 1"));
            }
            cfg.z = ZSpec::Random(*d.get_ref());
        }
        (None, None) => {}
    }
    if let Some(s) = raw.seed {
        cfg.seed = s;
    }
    if let Some(s) = &raw.samples {
        if *s.get_ref() == 0 {
            return Err(at(text, "samples", s.span(), "must be at least 1"));
        }
        cfg.samples = *s.get_ref();
    }
    if let Some(s) = &raw.suites {
        cfg.suites = parse_suites(&s.get_ref().join(",")).map_err(|e| at(text, "suites", s.span(), e))?;
    }
    if let Some(r) = raw.rebase {
        cfg.rebase = r;
    }
    if let Some(m) = &raw.max_order {
        if !(1..=MAX_ORDER).contains(m.get_ref()) {
            return Err(at(text, "max_order", m.span(), format!("must be in 1..={MAX_ORDER}")));
        }
        cfg.max_order = *m.get_ref();
    }
    if let Some(d) = &raw.domain {
        let r = d.get_ref();
        let dom = SampleDomain {
            lo: r.lo.unwrap_or(cfg.domain.lo),
            hi: r.hi.unwrap_or(cfg.domain.hi),
            perturbation: r.perturbation.unwrap_or(cfg.domain.perturbation),
        };
        if !(dom.lo.is_finite() && dom.hi.is_finite() && dom.lo < dom.hi) {
            return Err(at(
                text,
                "domain",
                d.span(),
                format!("need finite lo < hi, got [{}, {}]", dom.lo, dom.hi),
            ));
        }
        if !(dom.perturbation >= 0.0 && dom.perturbation.is_finite()) {
            return Err(at(text, "domain", d.span(), "perturbation must be finite and ≥ 0"));
        }
        cfg.domain = dom;
    }
    if let Some(t) = &raw.tolerances {
        let tol = *t.get_ref();
        let all = [
            tol.isometry,
            tol.conjugate,
            tol.nondegeneracy,
            tol.orthogonality,
            tol.gauss_codazzi_ricci,
            tol.theorem2,
            tol.curvature,
            tol.closed_radius,
            tol.closed_angle,
            tol.closed_embedding,
            tol.remark,
        ];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(at(text, "tolerances", t.span(), "tolerances must be finite and positive"));
        }
        cfg.tolerances = tol;
    }
    if let Some(o) = raw.output {
        cfg.report = o.report;
        cfg.mesh_out = o.mesh;
    }
    if let Some(m) = &raw.mesh {
        let r = m.get_ref();
        let spec = MeshSpec {
            z: r.z.map(|p| Cx::new(p[0], p[1])),
            u1: r.u1.unwrap_or(cfg.mesh.u1),
            u2: r.u2.unwrap_or(cfg.mesh.u2),
            steps: r.steps.unwrap_or(cfg.mesh.steps),
        };
        if spec.steps < 2 {
            return Err(at(text, "mesh", m.span(), "steps must be at least 2"));
        }
        if ![spec.u1, spec.u2].iter().flatten().all(|x| x.is_finite()) {
            return Err(at(text, "mesh", m.span(), "grid bounds must be finite"));
        }
        cfg.mesh = spec;
    }
    if let Some(e) = &raw.eval {
        let r = e.get_ref();
        if let Some(u) = &r.u {
            if u.len() != n {
                return Err(at(text, "eval", e.span(), format!("u has {} entries, expected n = {n}", u.len())));
            }
            cfg.eval_u = Some(cxs(u));
        }
        if let Some(z) = &r.z {
            if z.len() + 1 != n {
                return Err(at(
                    text,
                    "eval",
                    e.span(),
                    format!("z has {} entries, expected n - 1 = {}", z.len(), n - 1),
                ));
            }
            cfg.eval_z = Some(cxs(z));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn n(&self) -> usize {
        self.quadric.n()
    }

    pub fn z_draws(&self) -> Vec<Vec<Cx>> {
        match &self.z {
            ZSpec::Explicit(v) => v.clone(),
            ZSpec::Random(k) => (0..*k)
                .map(|d| sampling::sample_z(self.seed, d, self.n(), self.quadric.coeffs()))
                .collect(),
        }
    }

    /// The check plan; fails when a selected suite needs a higher jet order
    /// than `max_order`.
    pub fn plan(&self) -> Result<CheckPlan> {
        if let Some(s) = self.suites.iter().find(|s| s.order() > self.max_order) {
            return Err(Error::Config(format!(
                "suite {s} needs jet order {} but max_order = {}",
                s.order(),
                self.max_order
            )));
        }
        Ok(CheckPlan {
            quadric: self.quadric.clone(),
            z_draws: self.z_draws(),
            rebase: self.rebase,
            samples: self.samples,
            seed: self.seed,
            domain: self.domain,
            tolerances: self.tolerances,
            suites: self.suites.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("n = 3\na = [[1,0],[2,0],[3,0],[4,0]]\n").unwrap();
        assert_eq!((c.seed, c.samples, c.n()), (42, 50, 3));
        assert_eq!(c.suites, Suite::all());
        assert_eq!(c.z, ZSpec::Random(1));
    }

    #[test]
    fn duplicate_a_names_indices_and_line() {
        let e = parse_config("n = 2\n\na = [[1,0],[2,0],[1,0]]\n").unwrap_err().to_string();
        assert!(e.contains("`a`") && e.contains("line 3"), "{e}");
        assert!(e.contains("a_0") && e.contains("a_2"), "{e}");
    }

    #[test]
    fn wrong_z_length_is_rejected() {
        let e = parse_config("a = [[1,0],[2,0],[3,0],[4,0]]\nz = [[[0.5,0]]]\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("`z`") && e.contains("line 2") && e.contains("expected n - 1 = 2"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let e = parse_config("a = [[1,0],[2,0],[3,0]]\n\nsed = 4\n").unwrap_err().to_string();
        assert!(e.contains("sed") && e.contains("line 3"), "{e}");
        let e = parse_config("[domain]\nlo = 0.2\nwidth = 1\n").unwrap_err().to_string();
        assert!(e.contains("width") && e.contains("line 3"), "{e}");
        let e = parse_config("[tolerances]\nisometri = 1e-3\n").unwrap_err().to_string();
        assert!(e.contains("isometri") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn n_must_match_a() {
        assert!(parse_config("n = 4\na = [[1,0],[2,0],[3,0],[4,0]]\n").is_err());
        assert!(parse_config("n = 3\n").is_err());
    }

    #[test]
    fn malformed_syntax_cites_line() {
        let e = parse_config("seed = 1\nsamples = [\n").unwrap_err().to_string();
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn order_cap_is_enforced() {
        let c = parse_config("max_order = 3\n").unwrap();
        assert!(c.plan().is_err());
        let c = parse_config("max_order = 3\nsuites = [\"isometry\", \"theorem2\"]\n").unwrap();
        assert_eq!(c.plan().unwrap().suites, vec![Suite::Isometry, Suite::Theorem2]);
    }

    #[test]
    fn explicit_z_and_sections() {
        let text = r#"
a = [[1,0],[2,0],[3,0],[4,0]]
z = [[[0.3,0],[0.7,0]], [[0.5,0.01],[0.2,0]]]
seed = 7
samples = 5
rebase = false
suites = ["isometry", "gcr"]
[domain]
perturbation = 0.05
[tolerances]
isometry = 1e-6
[mesh]
steps = 4
[eval]
u = [[0.5,0],[0.7,0],[0.9,0]]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.z_draws().len(), 2);
        assert!(!c.rebase);
        assert_eq!(c.suites, vec![Suite::Isometry, Suite::GaussCodazziRicci]);
        assert_eq!(c.domain.perturbation, 0.05);
        assert_eq!(c.tolerances.isometry, 1e-6);
        assert_eq!(c.tolerances.conjugate, 1e-9);
        assert_eq!(c.mesh.steps, 4);
        assert_eq!(c.eval_u.as_ref().unwrap().len(), 3);
    }
}

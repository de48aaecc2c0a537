//! Verification suites: residual checks of the claims about the quadric and
//! its deformations, collected into a serializable report.

pub mod identities;
pub mod sampling;
pub mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::immersions::{DeformParams, PetersonFamily, QuadricSpec};
pub use sampling::SampleDomain;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Isometry,
    Conjugate,
    Nondegeneracy,
    GaussCodazziRicci,
    Theorem2,
    Curvature,
    ClosedForms,
    Remark,
    NegativeControl,
}

impl Suite {
    /// Every suite in run order. `all` on the command line means
    /// everything except the negative controls.
    pub const EVERY: [Suite; 9] = [
        Suite::Isometry,
        Suite::Conjugate,
        Suite::Nondegeneracy,
        Suite::GaussCodazziRicci,
        Suite::Theorem2,
        Suite::Curvature,
        Suite::ClosedForms,
        Suite::Remark,
        Suite::NegativeControl,
    ];

    pub fn all() -> Vec<Suite> {
        Self::EVERY[..8].to_vec()
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Isometry => "isometry",
            Suite::Conjugate => "conjugate",
            Suite::Nondegeneracy => "nondegeneracy",
            Suite::GaussCodazziRicci => "gauss_codazzi_ricci",
            Suite::Theorem2 => "theorem2",
            Suite::Curvature => "curvature",
            Suite::ClosedForms => "closed_forms",
            Suite::Remark => "remark",
            Suite::NegativeControl => "negative_control",
        }
    }

    /// Key of the suite's random stream.
    pub fn stream(self) -> u64 {
        self as u64
    }

    /// Smallest `n` the suite has anything to say about.
    pub fn min_n(self) -> usize {
        match self {
            Suite::Theorem2 | Suite::Curvature => 3,
            _ => 2,
        }
    }

    /// Jet order of the immersion needed by the suite.
    pub fn order(self) -> usize {
        match self {
            Suite::Isometry | Suite::ClosedForms => 1,
            Suite::Conjugate | Suite::Nondegeneracy | Suite::Remark | Suite::NegativeControl => 2,
            Suite::GaussCodazziRicci | Suite::Theorem2 => 3,
            Suite::Curvature => 4,
        }
    }

    /// The claim a suite verifies, in one line.
    pub fn claim(self) -> &'static str {
        match self {
            Suite::Isometry => "every X_z has the same linear element as the quadric: g(X_z) = g(X)",
            Suite::Conjugate => {
                "u is a conjugate system: no mixed terms in the joined second forms, and ∂_k∂_j X = -tan(u^j) ∂_k X for k < j"
            }
            Suite::Nondegeneracy => {
                "the joined second forms are non-degenerate almost everywhere: the cascade determinant is nonzero, the joined vectors are orthogonal with Σ b_j² + 1 = 0"
            }
            Suite::GaussCodazziRicci => {
                "Gauss, Codazzi-Mainardi and Ricci equations in a conjugate system, and R_jklm = 0 off the jkjk/jkkj patterns"
            }
            Suite::Theorem2 => {
                "the differential system of deformations: Γ^l_jk = 0 (distinct), ∂_k log a_j = Γ^j_jk, Σ b_j² + 1 = 0, ∂_k log b_j = -γ_jk, the ∂_j log b_j equation, its symmetrized compatibility and the involutivity conditions"
            }
            Suite::Curvature => {
                "curvature consequences of the system: second Bianchi forms, ∂_l Γ^k_kj, the three R_jljl expressions, the compatibility pair for log a_j and the evolution of γ"
            }
            Suite::ClosedForms => {
                "closed forms: X_0 is the embedded quadric with f cos g = √a_0 cos u, f sin g = √a_1 sin u; X_1 has radius √(a_k - a_0) C_k sin u^k and angle √a_0/√(a_k - a_0) artanh(cos u^k)"
            }
            Suite::Remark => {
                "N̂_0ᵀ d²X_0 - (Σ N_k/(2a_k))ᵀ d²X_1 only has a (du^n)² term"
            }
            Suite::NegativeControl => {
                "deliberately broken inputs (perturbed metric, swapped a_j, z = 1 without rebasing) must fail"
            }
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Suite::EVERY
            .into_iter()
            .find(|x| x.name() == norm || (norm == "gcr" && *x == Suite::GaussCodazziRicci))
            .ok_or_else(|| {
                let names: Vec<_> = Suite::EVERY.iter().map(|x| x.name()).collect();
                Error::Config(format!("unknown suite {s:?}; expected one of all, {}", names.join(", ")))
            })
    }
}

impl Serialize for Suite {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Parses a comma separated list; `all` expands to every regular suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part.eq_ignore_ascii_case("all") {
            out.extend(Suite::all());
        } else {
            out.push(part.parse()?);
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("no suites selected".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub isometry: f64,
    pub conjugate: f64,
    /// Determinant verdict: non-degenerate iff `|det| > nondegeneracy · scale`.
    pub nondegeneracy: f64,
    pub orthogonality: f64,
    pub gauss_codazzi_ricci: f64,
    pub theorem2: f64,
    pub curvature: f64,
    pub closed_radius: f64,
    pub closed_angle: f64,
    pub closed_embedding: f64,
    pub remark: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isometry: 1e-8,
            conjugate: 1e-9,
            nondegeneracy: 1e-8,
            orthogonality: 1e-8,
            gauss_codazzi_ricci: 1e-7,
            theorem2: 1e-7,
            curvature: 1e-6,
            closed_radius: 1e-9,
            closed_angle: 1e-8,
            closed_embedding: 1e-10,
            remark: 1e-8,
        }
    }
}

impl Tolerances {
    /// Sets every residual tolerance (not the determinant verdict) to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            isometry: tol,
            conjugate: tol,
            nondegeneracy: Tolerances::default().nondegeneracy,
            orthogonality: tol,
            gauss_codazzi_ricci: tol,
            theorem2: tol,
            curvature: tol,
            closed_radius: tol,
            closed_angle: tol,
            closed_embedding: tol,
            remark: tol,
        }
    }

    /// Overrides the tolerance(s) of one suite.
    pub fn set_suite(&mut self, suite: Suite, tol: f64) {
        match suite {
            Suite::Isometry => self.isometry = tol,
            Suite::Conjugate => self.conjugate = tol,
            Suite::Nondegeneracy => self.orthogonality = tol,
            Suite::GaussCodazziRicci => self.gauss_codazzi_ricci = tol,
            Suite::Theorem2 => self.theorem2 = tol,
            Suite::Curvature => self.curvature = tol,
            Suite::ClosedForms => {
                self.closed_radius = tol;
                self.closed_angle = tol;
                self.closed_embedding = tol;
            }
            Suite::Remark => self.remark = tol,
            Suite::NegativeControl => {}
        }
    }
}

fn ser_residual<S: Serializer>(r: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r.is_finite() {
        s.serialize_f64(*r)
    } else {
        s.serialize_none()
    }
}

/// One residual of one identity family at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub suite: Suite,
    pub draw: usize,
    pub sample: usize,
    pub u: Vec<Cx>,
    pub z: Vec<Cx>,
    /// `null` in JSON when the computation failed.
    #[serde(serialize_with = "ser_residual")]
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Failures that report on an open question rather than a defect.
    pub finding: bool,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl CheckRecord {
    pub fn new(check_id: impl Into<String>, ctx: &SampleCtx, residual: f64, tolerance: f64) -> Self {
        CheckRecord {
            check_id: check_id.into(),
            suite: ctx.suite,
            draw: ctx.draw,
            sample: ctx.sample,
            u: ctx.u.clone(),
            z: ctx.z.clone(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            finding: false,
            metadata: BTreeMap::new(),
        }
    }

    /// A record for a computation that did not produce a residual.
    pub fn failed(check_id: impl Into<String>, ctx: &SampleCtx, tolerance: f64, err: &Error) -> Self {
        let mut r = Self::new(check_id, ctx, f64::INFINITY, tolerance);
        r.metadata.insert("error".into(), err.to_string().into());
        r
    }

    pub fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Counts against the run: failed and not flagged as a finding.
    pub fn is_failure(&self) -> bool {
        !self.pass && !self.finding
    }
}

/// Where a record comes from.
#[derive(Debug, Clone)]
pub struct SampleCtx {
    pub suite: Suite,
    pub draw: usize,
    pub sample: usize,
    pub u: Vec<Cx>,
    pub z: Vec<Cx>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
    pub worst_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
    pub by_suite: BTreeMap<String, SuiteSummary>,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Summary {
        let mut s = Summary::default();
        for r in records {
            let e = s.by_suite.entry(r.suite.name().to_string()).or_default();
            for (records, passed, failed, findings) in [
                (&mut s.records, &mut s.passed, &mut s.failed, &mut s.findings),
                (&mut e.records, &mut e.passed, &mut e.failed, &mut e.findings),
            ] {
                *records += 1;
                if r.pass {
                    *passed += 1;
                } else if r.finding {
                    *findings += 1;
                } else {
                    *failed += 1;
                }
            }
            if r.residual.is_finite() {
                e.worst_residual = Some(e.worst_residual.map_or(r.residual, |w: f64| w.max(r.residual)));
            }
        }
        s
    }
}

/// Echo of the run parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEcho {
    pub n: usize,
    pub a: Vec<Cx>,
    pub z_draws: Vec<Vec<Cx>>,
    pub rebase: bool,
    pub samples: usize,
    pub seed: u64,
    pub domain: SampleDomain,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: &'static str,
    /// Seconds since the Unix epoch; absent for reproducible output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub config: PlanEcho,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl CheckReport {
    pub fn failures(&self) -> usize {
        self.summary.failed
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn records_of<'a>(&'a self, check_id: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.records.iter().filter(move |r| r.check_id == check_id)
    }
}

/// What to run.
#[derive(Debug, Clone)]
pub struct CheckPlan {
    pub quadric: QuadricSpec,
    /// One deformation parameter set per draw.
    pub z_draws: Vec<Vec<Cx>>,
    pub rebase: bool,
    pub samples: usize,
    pub seed: u64,
    pub domain: SampleDomain,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
}

impl CheckPlan {
    /// Default plan for a quadric: `draws` random z-draws, 50 samples, all suites.
    pub fn new(quadric: QuadricSpec, seed: u64, draws: usize) -> Self {
        let n = quadric.n();
        let z_draws = (0..draws).map(|d| sampling::sample_z(seed, d, n, quadric.coeffs())).collect();
        CheckPlan {
            quadric,
            z_draws,
            rebase: true,
            samples: 50,
            seed,
            domain: SampleDomain::default(),
            tolerances: Tolerances::default(),
            suites: Suite::all(),
        }
    }

    pub fn with_suites(mut self, suites: &[Suite]) -> Self {
        self.suites = suites.to_vec();
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    fn echo(&self) -> PlanEcho {
        PlanEcho {
            n: self.quadric.n(),
            a: self.quadric.coeffs().to_vec(),
            z_draws: self.z_draws.clone(),
            rebase: self.rebase,
            samples: self.samples,
            seed: self.seed,
            domain: self.domain,
            tolerances: self.tolerances,
            suites: self.suites.clone(),
        }
    }
}

/// Worker count: `QDLAB_THREADS` when set to a positive integer, otherwise
/// rayon's default.
pub fn thread_count() -> Result<Option<usize>> {
    match std::env::var("QDLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::Config(format!("QDLAB_THREADS must be a positive integer, got {s:?}"))),
            Ok(k) => Ok(Some(k)),
        },
    }
}

/// Runs the plan. Fails before producing any record when a deformation
/// family of the plan cannot be built (e.g. a singular profile with
/// rebasing disabled); every later problem becomes a failed record.
pub fn run(plan: &CheckPlan) -> Result<CheckReport> {
    let n = plan.quadric.n();
    let mut families = Vec::with_capacity(plan.z_draws.len());
    for z in &plan.z_draws {
        let params = DeformParams::theorem1(z.clone()).with_rebase(plan.rebase);
        families.push(PetersonFamily::new(plan.quadric.clone(), &params)?);
    }
    let corners = suites::Corners::new(&plan.quadric, plan.rebase);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_count()? {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;

    let mut jobs = Vec::new();
    for &suite in &plan.suites {
        if n < suite.min_n() {
            continue;
        }
        for (draw, z) in plan.z_draws.iter().enumerate() {
            for sample in 0..plan.samples {
                jobs.push((suite, draw, z, sample));
            }
        }
    }
    let records: Vec<CheckRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(suite, draw, z, sample)| {
                let u = sampling::sample_u(plan.seed, suite.stream(), draw, sample, n, &plan.domain);
                let ctx = SampleCtx {
                    suite,
                    draw,
                    sample,
                    u,
                    z: z.clone(),
                };
                suites::run_sample(&ctx, plan, &families[draw], &corners)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    let summary = Summary::of(&records);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        generated_at: None,
        config: plan.echo(),
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EVERY {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(parse_suites("all").unwrap(), Suite::all());
        assert!(!Suite::all().contains(&Suite::NegativeControl));
        assert_eq!(
            parse_suites("remark, isometry,remark").unwrap(),
            vec![Suite::Isometry, Suite::Remark]
        );
        assert!(parse_suites("nope").is_err());
    }

    #[test]
    fn pass_iff_residual_within_tolerance() {
        let ctx = SampleCtx {
            suite: Suite::Isometry,
            draw: 0,
            sample: 0,
            u: vec![],
            z: vec![],
        };
        assert!(CheckRecord::new("x", &ctx, 1e-9, 1e-8).pass);
        assert!(!CheckRecord::new("x", &ctx, 1e-7, 1e-8).pass);
        assert!(!CheckRecord::new("x", &ctx, f64::NAN, 1e-8).pass);
        let json = serde_json::to_string(&CheckRecord::new("x", &ctx, f64::INFINITY, 1.0)).unwrap();
        assert!(json.contains("\"residual\":null"));
    }

    #[test]
    fn summary_counts_match() {
        let ctx = SampleCtx {
            suite: Suite::Theorem2,
            draw: 0,
            sample: 0,
            u: vec![],
            z: vec![],
        };
        let mut f = CheckRecord::new("a", &ctx, 1.0, 0.0);
        f.finding = true;
        let recs = vec![CheckRecord::new("a", &ctx, 0.0, 1.0), CheckRecord::new("b", &ctx, 2.0, 1.0), f];
        let s = Summary::of(&recs);
        assert_eq!((s.records, s.passed, s.failed, s.findings), (3, 1, 1, 1));
        assert_eq!(s.by_suite["theorem2"].records, 3);
    }
}

//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use qdlab::checks::sampling::{random_a, sample_u, sample_z, SampleDomain};
use qdlab::checks::{run, CheckPlan, CheckRecord, CheckReport, Suite};
use qdlab::immersions::QuadricSpec;
use qdlab::Cx;

const SEED: u64 = 20_240_601;

fn coefficient_sets(n: usize) -> [Vec<Cx>; 2] {
    [(1..=n + 1).map(|j| c(j as f64)).collect(), random_a(SEED, n)]
}

/// Runs `suites` for both coefficient sets of every `n`.
fn grid(ns: &[usize], suites: &[Suite], draws: usize, samples: usize) -> (Vec<CheckReport>, Duration) {
    let start = Instant::now();
    let mut out = Vec::new();
    for &n in ns {
        for a in coefficient_sets(n) {
            let plan = CheckPlan::new(QuadricSpec::new(a).unwrap(), SEED, draws)
                .with_suites(suites)
                .with_samples(samples);
            out.push(run(&plan).expect("plan runs"));
        }
    }
    (out, start.elapsed())
}

fn records<'a>(reps: &'a [CheckReport], prefix: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
    reps.iter()
        .flat_map(|r| r.records.iter())
        .filter(move |r| r.check_id.starts_with(prefix))
}

/// Worst residual of the records with this prefix and whether all are within `bound`.
fn worst(reps: &[CheckReport], prefix: &str, bound: f64) -> (f64, usize, bool) {
    let mut w = 0.0f64;
    let mut count = 0;
    let mut ok = true;
    for r in records(reps, prefix) {
        count += 1;
        ok &= r.residual <= bound && r.residual <= r.tolerance;
        if r.residual.is_nan() || r.residual > w {
            w = r.residual;
        }
    }
    (w, count, ok && count > 0)
}

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn report(o: &Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {:>2}: {} ({})", o.id, o.title, o.detail);
}

fn isometry_and_conjugacy() -> [Outcome; 3] {
    let (reps, took) = grid(&[2, 3, 4, 5], &[Suite::Isometry, Suite::Conjugate, Suite::Nondegeneracy], 5, 50);
    let (iso, iso_n, iso_ok) = worst(&reps, "isometry.", 1e-8);
    let (off, off_n, off_ok) = worst(&reps, "conjugate.offdiagonal", 1e-9);
    let (rec, rec_n, rec_ok) = worst(&reps, "conjugate.recurrence", 1e-9);

    let dets: Vec<&CheckRecord> = records(&reps, "nondegeneracy.determinant").collect();
    let nondegenerate = dets.iter().filter(|r| r.pass).count();
    let share = nondegenerate as f64 / dets.len().max(1) as f64;
    let mut joined_ok = true;
    let mut joined_worst = 0.0f64;
    for d in dets.iter().filter(|r| r.pass) {
        for id in ["nondegeneracy.orthogonality", "nondegeneracy.b_sum"] {
            let r = reps
                .iter()
                .flat_map(|x| x.records.iter())
                .find(|r| r.check_id == id && r.suite == d.suite && r.draw == d.draw && r.sample == d.sample && r.u == d.u)
                .expect("paired record");
            joined_ok &= r.residual <= 1e-8;
            joined_worst = joined_worst.max(r.residual);
        }
    }
    [
        Outcome {
            id: 1,
            title: "isometry",
            pass: iso_ok && took < Duration::from_secs(30),
            detail: format!("{iso_n} records, worst {iso:.2e}, {:.1} s for three suites", took.as_secs_f64()),
        },
        Outcome {
            id: 2,
            title: "conjugate system",
            pass: off_ok && rec_ok,
            detail: format!("off-diagonal worst {off:.2e} over {off_n}, recurrence worst {rec:.2e} over {rec_n}"),
        },
        Outcome {
            id: 3,
            title: "non-degeneracy",
            pass: share >= 0.95 && joined_ok,
            detail: format!(
                "determinant nonzero on {:.1}% of {}, joined worst {joined_worst:.2e}",
                100.0 * share,
                dets.len()
            ),
        },
    ]
}

fn gauss_codazzi_ricci() -> Outcome {
    let (reps, took) = grid(&[3, 4], &[Suite::GaussCodazziRicci], 1, 30);
    let (w, count, ok) = worst(&reps, "gcr.", 1e-7);
    Outcome {
        id: 4,
        title: "Gauss, Codazzi-Mainardi, Ricci",
        pass: ok && took < Duration::from_secs(60),
        detail: format!("{count} records, worst {w:.2e}, {:.1} s", took.as_secs_f64()),
    }
}

fn theorem2() -> Outcome {
    let (reps, took) = grid(&[3, 4], &[Suite::Theorem2, Suite::NegativeControl], 1, 30);
    let (w, count, ok) = worst(&reps, "theorem2.", 1e-7);
    let findings = records(&reps, "theorem2.").filter(|r| r.finding).count();
    let controls: Vec<&CheckRecord> = records(&reps, "negative.perturbed_metric_hoj").collect();
    let caught = !controls.is_empty() && controls.iter().all(|r| !r.pass);
    Outcome {
        id: 5,
        title: "structure system of the joined forms",
        pass: ok && findings == 0 && caught,
        detail: format!(
            "{count} records, worst {w:.2e}, {findings} findings, perturbed metric rejected on {}/{}, {:.1} s",
            controls.iter().filter(|r| !r.pass).count(),
            controls.len(),
            took.as_secs_f64()
        ),
    }
}

fn closed_forms() -> Outcome {
    let (reps, _) = grid(&[2, 3, 4, 5], &[Suite::ClosedForms], 1, 50);
    let (emb, _, emb_ok) = worst(&reps, "closed.embedding", 1e-10);
    let (fg0, _, fg0_ok) = worst(&reps, "closed.fg0", 1e-10);
    let (rad, _, rad_ok) = worst(&reps, "closed.radius", 1e-8);
    let (ang, _, ang_ok) = worst(&reps, "closed.angle", 1e-8);
    Outcome {
        id: 6,
        title: "closed forms at z = 0 and z = 1",
        pass: emb_ok && fg0_ok && rad_ok && ang_ok,
        detail: format!("embedding {emb:.2e}, plane profiles {fg0:.2e}, radius {rad:.2e}, angle {ang:.2e}"),
    }
}

fn curvature() -> Outcome {
    let (reps, took) = grid(&[3, 4], &[Suite::Curvature], 1, 20);
    let (w, count, ok) = worst(&reps, "curvature.", 1e-6);
    Outcome {
        id: 7,
        title: "curvature identities",
        pass: ok && took < Duration::from_secs(120),
        detail: format!("{count} records, worst {w:.2e}, {:.1} s", took.as_secs_f64()),
    }
}

fn remark() -> Outcome {
    let (reps, _) = grid(&[2, 3, 4, 5], &[Suite::Remark], 5, 50);
    let (w, count, ok) = worst(&reps, "remark.coefficients", 1e-8);
    let nonzero = records(&reps, "remark.coefficients")
        .filter(|r| {
            r.metadata
                .get("last_coefficient_modulus")
                .and_then(|v| v.as_f64())
                .is_some_and(|m| m > r.tolerance)
        })
        .count();
    let share = nonzero as f64 / count.max(1) as f64;
    Outcome {
        id: 8,
        title: "remark on the difference form",
        pass: ok && share >= 0.9,
        detail: format!(
            "leading coefficients worst {w:.2e}, last coefficient nonzero on {:.1}% of {count}",
            100.0 * share
        ),
    }
}

fn oracle() -> Outcome {
    let dom = SampleDomain {
        perturbation: 0.05,
        ..Default::default()
    };
    let mut worst_gap = 0.0f64;
    let mut failures = 0;
    let evaluations = 200;
    for i in 0..evaluations {
        let n = 2 + i % 3;
        let a = coefficient_sets(n)[(i / 2) % 2].clone();
        let u = sample_u(SEED, 99, 0, i, n, &dom);
        let gap = if i % 2 == 0 {
            oracle_gap(&QuadricOracle { a: a.clone() }, &jet_forms_quadric(&a, &u), &u)
        } else {
            let z = sample_z(SEED, i, n, &a);
            oracle_gap(&PetersonOracle::new(&a, &z, &u), &jet_forms_peterson(&a, &z, &u), &u)
        };
        if gap.is_nan() || gap > 1e-6 {
            failures += 1;
        }
        if gap.is_nan() || gap > worst_gap {
            worst_gap = gap;
        }
    }
    Outcome {
        id: 9,
        title: "jet forms against finite differences",
        pass: failures == 0,
        detail: format!("{evaluations} evaluations, worst relative gap {worst_gap:.2e}"),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "n = 4\na = [[1,0],[2,0.3],[3,0],[4,-0.2],[5,0]]\nz_draws = 2\nsamples = 8\nseed = 11\n",
    )
    .unwrap();
    let report = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qdlab"))
            .args(["check", "--no-timestamp", "-c"])
            .arg(&cfg)
            .arg("--report")
            .arg(&path)
            .env("QDLAB_THREADS", threads)
            .stderr(std::process::Stdio::null())
            .status()
            .expect("binary runs");
        (status.code(), std::fs::read(&path).unwrap_or_default())
    };
    let (c1, r1) = report("1", "one.json");
    let (c2, r2) = report("3", "two.json");
    let same = !r1.is_empty() && r1 == r2;
    Outcome {
        id: 10,
        title: "determinism",
        pass: same && c1 == Some(0) && c2 == Some(0),
        detail: format!("{} bytes, identical: {same}, exit codes {c1:?} {c2:?}", r1.len()),
    }
}

fn main() {
    let mut all = Vec::new();
    for o in isometry_and_conjugacy() {
        report(&o);
        all.push(o.pass);
    }
    for f in [gauss_codazzi_ricci, theorem2, closed_forms, curvature, remark, oracle, determinism] {
        let o = f();
        report(&o);
        all.push(o.pass);
    }
    let passed = all.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria pass", all.len());
    if passed != all.len() {
        std::process::exit(1);
    }
}

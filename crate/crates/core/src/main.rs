use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qdlab::checks::{self, parse_suites, Suite, Tolerances};
use qdlab::cli::{self, exit, mesh, parse_config, report, RunConfig};
use qdlab::cx::Cx;
use qdlab::{Error, Result};

/// Deformations of complex quadrics: evaluation, verification suites and
/// mesh export.
///
/// Exit codes: 0 all records pass, 1 some record fails, 2 usage or
/// configuration error, 3 numerical-domain abort before any record.
/// QDLAB_THREADS caps the number of worker threads.
#[derive(Parser)]
#[command(name = "qdlab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a point and the fundamental forms at given parameters.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Parameters u^1..u^n, comma separated; complex entries as re:im.
        #[arg(long, value_parser = parse_cx_list)]
        u: Option<CxList>,
        /// Deformation parameters z_1..z_{n-1}; defaults to the config's
        /// [eval] z or its first z-set.
        #[arg(long, value_parser = parse_cx_list)]
        z: Option<CxList>,
    },
    /// Run verification suites and write a JSON report.
    Check {
        #[command(flatten)]
        common: Common,
        /// Suites to run, comma separated, or "all".
        #[arg(long)]
        suite: Option<String>,
        /// Tolerance for every suite (VALUE) or one suite (SUITE=VALUE);
        /// repeatable.
        #[arg(long)]
        tol: Vec<String>,
        /// Samples per suite and z-set.
        #[arg(long)]
        samples: Option<usize>,
        /// Report path; "-" for stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Leave out `generated_at` so identical runs give identical files.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Export the real surface X_z (n = 2) as CSV.
    Mesh {
        #[command(flatten)]
        common: Common,
        /// z_1; defaults to [mesh] z or the first z-set.
        #[arg(long, value_parser = parse_cx)]
        z: Option<Cx>,
        /// Grid points per direction.
        #[arg(long)]
        steps: Option<usize>,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the suites and the claim each one verifies.
    Explain,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Disable moving singular profile integrals to π/2.
    #[arg(long)]
    no_rebase: bool,
}

fn parse_cx(s: &str) -> std::result::Result<Cx, String> {
    let (re, im) = match s.split_once(':') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    Ok(Cx::new(p(re)?, p(im)?))
}

#[derive(Clone)]
struct CxList(Vec<Cx>);

fn parse_cx_list(s: &str) -> std::result::Result<CxList, String> {
    s.split(',').map(parse_cx).collect::<std::result::Result<_, _>>().map(CxList)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", p.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.no_rebase {
        cfg.rebase = false;
    }
    Ok(cfg)
}

fn apply_tol(t: &mut Tolerances, spec: &str) -> Result<()> {
    let value = |v: &str| -> Result<f64> {
        match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
            _ => Err(Error::Config(format!("--tol: {v:?} is not a positive number"))),
        }
    };
    match spec.split_once('=') {
        Some((suite, v)) => t.set_suite(suite.parse::<Suite>()?, value(v)?),
        None => *t = Tolerances::uniform(value(spec)?),
    }
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            emit(text);
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            emit(text);
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
    }
}

fn first_z(cfg: &RunConfig) -> Vec<Cx> {
    cfg.z_draws().into_iter().next().unwrap_or_default()
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Explain => {
            let mut text = String::new();
            for s in Suite::EVERY {
                let tag = if s == Suite::NegativeControl { " (not in all)" } else { "" };
                text.push_str(&format!(
                    "{:<22} order {}, n ≥ {}{tag}\n    {}\n",
                    s.name(),
                    s.order(),
                    s.min_n(),
                    s.claim()
                ));
            }
            emit(&text);
            Ok(exit::PASS)
        }
        Cmd::Eval { common, u, z } => {
            let cfg = load(&common)?;
            let n = cfg.n();
            let u = u
                .map(|l| l.0)
                .or_else(|| cfg.eval_u.clone())
                .ok_or_else(|| Error::Usage("give --u or [eval] u in the config".into()))?;
            if u.len() != n {
                return Err(Error::Usage(format!("--u needs n = {n} entries, got {}", u.len())));
            }
            let z = z.map(|l| l.0).or_else(|| cfg.eval_z.clone()).unwrap_or_else(|| first_z(&cfg));
            if z.len() + 1 != n {
                return Err(Error::Usage(format!("--z needs n - 1 = {} entries, got {}", n - 1, z.len())));
            }
            let v = cli::eval_point(&cfg.quadric, &z, cfg.rebase, &u)?;
            emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")));
            Ok(exit::PASS)
        }
        Cmd::Check {
            common,
            suite,
            tol,
            samples,
            report: report_path,
            no_timestamp,
        } => {
            let mut cfg = load(&common)?;
            if let Some(s) = suite {
                cfg.suites = parse_suites(&s)?;
            }
            for t in &tol {
                apply_tol(&mut cfg.tolerances, t)?;
            }
            if let Some(k) = samples {
                if k == 0 {
                    return Err(Error::Usage("--samples must be at least 1".into()));
                }
                cfg.samples = k;
            }
            if report_path.is_some() {
                cfg.report = report_path;
            }
            let plan = cfg.plan()?;
            let rep = checks::run(&plan)?;
            let json = report::to_json(&rep, !no_timestamp)?;
            write_out(cfg.report.as_deref(), &json)?;
            eprint!("{}", report::summary_text(&rep));
            Ok(if rep.all_pass() { exit::PASS } else { exit::FAIL })
        }
        Cmd::Mesh { common, z, steps, out } => {
            let mut cfg = load(&common)?;
            if let Some(s) = steps {
                if s < 2 {
                    return Err(Error::Usage("--steps must be at least 2".into()));
                }
                cfg.mesh.steps = s;
            }
            let z = z.or(cfg.mesh.z).unwrap_or_else(|| first_z(&cfg)[0]);
            let csv = mesh::export_mesh(&cfg.quadric, z, cfg.rebase, &cfg.mesh)?;
            write_out(out.as_deref().or(cfg.mesh_out.as_deref()), &csv)?;
            Ok(exit::PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qdlab: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

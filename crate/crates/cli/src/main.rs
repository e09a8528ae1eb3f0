//! `sfm`: minimization, brute force, certificates and instance tools.
//!
//! JSON reports go to stdout, prose to stderr. Exit codes: 0 success,
//! 1 semantic failure (reject, not submodular, solver error), 2 usage or
//! malformed input.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sfm_core::certify::{self, Certificate, Check, Verdict};
use sfm_core::greedy::{dual_lower_bound, greedy_base};
use sfm_core::lattice::DEFAULT_BUDGET;
use sfm_core::lpengine::Engine;
use sfm_core::minimize::{minimize, MinimizeConfig};
use sfm_core::oracle::{brute_min_par, is_submodular, is_submodular_sampled, random_submodular, CountingOracle};
use sfm_core::{Oracle, TabulatedFunction};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "sfm", version, about = "Submodular minimization over products of diamond lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance file (JSON value table).
    #[arg(long)]
    instance: PathBuf,
    /// Largest number of tuples any enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    budget: u64,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize through the separation pipeline.
    Minimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "cuttingplane")]
        engine: Engine,
        /// Include every improvement step in the report.
        #[arg(long)]
        trace: bool,
        /// Write the dual vector of the normalized instance to this file.
        #[arg(long)]
        emit_dual: Option<PathBuf>,
    },
    /// Minimize by enumeration.
    Brute {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// The greedy vector along the prefix chain.
    Greedy {
        #[command(flatten)]
        common: Common,
    },
    /// Build a certificate by enumeration.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a certificate.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Test submodularity (exhaustive within budget, sampled otherwise).
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Random submodular instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Bound on absolute values.
        #[arg(long, default_value_t = 20)]
        bound: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Semantic(anyhow::Error),
    Input(anyhow::Error),
}

type CmdResult = Result<Value, Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn semantic<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Semantic(e.into())
}

fn core_err(e: sfm_core::SfmError) -> Failure {
    use sfm_core::SfmError::*;
    match e {
        Parse(_) | KMismatch(..) | DimensionMismatch { .. } | BudgetExceeded { .. } => input(e),
        _ => semantic(e),
    }
}

fn read_instance(path: &Path) -> Result<(TabulatedFunction, String), Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(input)?;
    let f = TabulatedFunction::from_json(&v).map_err(input)?;
    let d = digest(&f);
    Ok((f, d))
}

/// SHA-256 of the canonical instance serialization.
fn digest(f: &TabulatedFunction) -> String {
    let bytes = serde_json::to_vec(&f.to_json()).expect("instance serializes");
    let hash = Sha256::digest(&bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("json serializes");
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())).map_err(semantic)
}

fn report(command: &str, digest: &str, seed: u64, calls: u64) -> Value {
    json!({ "command": command, "instance": digest, "seed": seed, "oracle_calls": calls })
}

fn cmd_minimize(common: &Common, engine: Engine, trace: bool, emit_dual: Option<&Path>) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let counted = CountingOracle::new(&f);
    let cfg = MinimizeConfig { engine, trace, emit_dual: emit_dual.is_some(), ..Default::default() };
    let res = minimize(&counted, &cfg).map_err(core_err)?;
    let mut rep = report("minimize", &dig, common.seed, counted.calls());
    rep["engine"] = json!(engine.to_string());
    rep["separations"] = json!(res.stats.separations);
    rep["optimizations"] = json!(res.stats.walk.optimizations);
    rep["steps"] = json!(res.stats.walk.steps);
    rep["min_step_gain"] = json!(res.stats.walk.min_gain.as_ref().map(|g| g.to_pq()));
    let mut out = json!({ "min": res.min, "argmin": res.argmin.to_string(), "report": rep });
    if trace {
        out["trace"] = json!(res.stats.walk.trace);
    }
    if let (Some(path), Some(z)) = (emit_dual, &res.dual) {
        write_json(path, &json!({ "offset": f.eval(&sfm_core::LatticeTuple::bottom(f.n(), f.k())), "dual": z.to_json() }))?;
    }
    eprintln!("minimum {} at {}", res.min, res.argmin);
    Ok(out)
}

fn cmd_brute(common: &Common, jobs: usize) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let counted = CountingOracle::new(&f);
    let (m, t) = brute_min_par(&counted, common.budget as u128, jobs.max(1)).map_err(core_err)?;
    eprintln!("minimum {m} at {t}");
    Ok(json!({ "min": m, "argmin": t.to_string(), "report": report("brute", &dig, common.seed, counted.calls()) }))
}

fn cmd_greedy(common: &Common) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let counted = CountingOracle::new(&f);
    let g = greedy_base(&counted);
    let lower = dual_lower_bound(&sfm_core::oracle::normalize(&f));
    Ok(json!({
        "vector": g.vector.to_json(),
        "top_atoms": g.top_atoms,
        "chain": g.chain.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "lower_bound_normalized": lower,
        "report": report("greedy", &dig, common.seed, counted.calls()),
    }))
}

fn cmd_certify(common: &Common, out: &Path) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let counted = CountingOracle::new(&f);
    let cert = certify::prove(&counted, common.budget as u128).map_err(core_err)?;
    write_json(out, &cert.to_json())?;
    eprintln!("certificate for minimum {} written to {}", cert.claimed_min, out.display());
    Ok(json!({
        "claimed_min": cert.claimed_min,
        "witness": cert.witness.to_string(),
        "vectors": cert.vectors.len(),
        "report": report("certify", &dig, common.seed, counted.calls()),
    }))
}

fn cmd_verify(common: &Common, cert_path: &Path) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let text = std::fs::read_to_string(cert_path)
        .with_context(|| format!("reading {}", cert_path.display()))
        .map_err(input)?;
    let cert = Certificate::parse(&text).map_err(input)?;
    let rep = certify::verify(&cert, &f);
    let mut r = report("verify", &dig, common.seed, rep.oracle_calls);
    match &rep.verdict {
        Verdict::Accept => {
            eprintln!("accepted: minimum {}", cert.claimed_min);
            r["verdict"] = json!("accept");
            Ok(json!({ "min": cert.claimed_min, "report": r }))
        }
        Verdict::Reject { check, reason } => {
            eprintln!("rejected at check {} ({check}): {reason}", check.number());
            let msg = anyhow!("check {} ({check}): {reason}", check.number());
            if *check == Check::Structure {
                Err(input(msg))
            } else {
                Err(semantic(msg))
            }
        }
    }
}

fn cmd_check(common: &Common) -> CmdResult {
    let (f, dig) = read_instance(&common.instance)?;
    let size = sfm_core::lattice::space_size(f.n(), f.k());
    let (rep, mode) = if size <= common.budget as u128 {
        (is_submodular(&f, common.budget as u128).map_err(core_err)?, "exhaustive")
    } else {
        (is_submodular_sampled(&f, 100_000, common.seed), "sampled")
    };
    if let Some((a, b)) = &rep.witness.as_ref().filter(|_| !rep.submodular) {
        eprintln!("not submodular at {a}, {b}");
        return Err(semantic(anyhow!("submodularity fails for the pair {a} / {b}")));
    }
    Ok(json!({
        "submodular": rep.submodular,
        "strict": rep.strict,
        "mode": mode,
        "report": report("check", &dig, common.seed, 0),
    }))
}

fn cmd_generate(n: usize, k: usize, seed: u64, bound: i64, out: Option<&Path>) -> CmdResult {
    let f = random_submodular(n, k, bound, seed).map_err(core_err)?;
    let v = f.to_json();
    match out {
        Some(p) => {
            write_json(p, &v)?;
            eprintln!("instance written to {}", p.display());
            Ok(json!({ "instance": digest(&f), "seed": seed, "out": p.display().to_string() }))
        }
        None => Ok(v),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let res = match &cli.command {
        Command::Minimize { common, engine, trace, emit_dual } => {
            cmd_minimize(common, *engine, *trace, emit_dual.as_deref())
        }
        Command::Brute { common, jobs } => cmd_brute(common, *jobs),
        Command::Greedy { common } => cmd_greedy(common),
        Command::Certify { common, out } => cmd_certify(common, out),
        Command::Verify { common, cert } => cmd_verify(common, cert),
        Command::Check { common } => cmd_check(common),
        Command::Generate { n, k, seed, bound, out } => cmd_generate(*n, *k, *seed, *bound, out.as_deref()),
    };
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    match res {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json serializes"));
            ExitCode::SUCCESS
        }
        Err(Failure::Semantic(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

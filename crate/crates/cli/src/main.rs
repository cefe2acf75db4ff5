use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tightbell::cglmp::{self, TightnessReport};
use tightbell::correlators::{self, corr_affine_dim, project};
use tightbell::facets::{enumerate_facets_until, label_facets, VRep};
use tightbell::io::{self, Point};
use tightbell::linalg::rank;
use tightbell::membership::{corr_local_decompose, local_decompose};
use tightbell::scenario::{constraint_matrix, polytope_affine_dim};
use tightbell::{Error, Scenario};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Exact geometry of the two-party, two-setting, d-outcome local polytope.
///
/// For d = 2 the outcomes 0 and 1 are read as +1 and -1 when forming
/// two-outcome correlators. Rationals are printed as "num/den" strings.
/// Exit status: 0 verified, 1 verification failure, 2 usage or input error,
/// 3 budget exhausted before a complete result.
#[derive(Parser)]
#[command(name = "tightbell", version)]
struct Cli {
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Corr,
    Behavior,
}

#[derive(Subcommand)]
enum Command {
    /// Rank of the normalization and no-signaling system, and the polytope's affine dimension.
    Dims { d: usize },
    /// Evaluate the CGLMP functional on every deterministic strategy.
    VerifyCglmp { d: usize },
    /// Rank of the strategies saturating CGLMP; optionally rebuild the staged witness.
    Tightness {
        d: usize,
        #[arg(long)]
        witness: bool,
    },
    /// Project a behavior to generalized correlators.
    Project { file: PathBuf },
    /// Facets of the local polytope.
    Enumerate {
        d: usize,
        #[arg(long, value_enum)]
        space: SpaceArg,
        /// Time budget in seconds (honored for d >= 4).
        #[arg(long)]
        budget: Option<u64>,
        /// Allow orbit minimization over very large symmetry groups.
        #[arg(long)]
        allow_large_group: bool,
    },
    /// Recompute triviality and symmetry classes of a facet list.
    Classify {
        file: PathBuf,
        #[arg(long)]
        allow_large_group: bool,
    },
    /// Decide whether a behavior or correlator vector is local.
    Membership { file: PathBuf },
    /// Print the CGLMP inequality.
    Cglmp {
        d: usize,
        #[arg(long, value_enum)]
        space: SpaceArg,
    },
}

struct Outcome {
    value: Value,
    table: String,
    code: u8,
}

impl Outcome {
    fn ok(value: Value, table: String) -> Self {
        Outcome { value, table, code: 0 }
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(v)
}

fn scenario(d: usize) -> anyhow::Result<Scenario> {
    Ok(Scenario::new(d)?)
}

fn dims(d: usize) -> anyhow::Result<Outcome> {
    let s = scenario(d)?;
    let (m, _) = constraint_matrix(s);
    let r = rank(&m);
    let dim = polytope_affine_dim(s);
    let cdim = corr_affine_dim(d)?;
    let ok = r == 4 * d && dim == s.expected_affine_dim() && cdim == 4 * (d - 1);
    let value = json!({
        "d": d,
        "constraint_rows": m.rows(),
        "constraint_rank": r,
        "expected_rank": 4 * d,
        "affine_dim": dim,
        "expected_affine_dim": s.expected_affine_dim(),
        "corr_affine_dim": cdim,
        "verified": ok,
    });
    let table = format!(
        "d = {d}\nconstraint rows      {}\nconstraint rank      {r} (expected {})\naffine dimension     {dim} (expected {})\ncorrelator dimension {cdim}\n",
        m.rows(),
        4 * d,
        s.expected_affine_dim()
    );
    Ok(Outcome { value, table, code: if ok { 0 } else { EXIT_FAILURE } })
}

fn verify_cglmp(d: usize) -> anyhow::Result<Outcome> {
    scenario(d)?;
    let report = cglmp::verify_condition1(d)?;
    let mut table = format!("d = {d}, {} strategies, max = {}\n  value  count\n", report.generators, report.max);
    for (v, c) in report.histogram.iter().rev() {
        table += &format!("  {:>5}  {c}\n", v.to_string());
    }
    Ok(Outcome::ok(io::report_to_json(&report, None, None), table))
}

fn tightness(d: usize, witness: bool) -> anyhow::Result<Outcome> {
    scenario(d)?;
    let t: TightnessReport = cglmp::tightness_rank(d)?;
    let mut value = json!({
        "d": d,
        "saturating": t.saturating,
        "rank": t.rank,
        "h": t.h,
        "tight": t.tight,
    });
    let mut table = format!("d = {d}: {} saturating strategies, rank {} of h = {}\n", t.saturating, t.rank, t.h);
    let mut ok = t.tight;
    if witness {
        match cglmp::constructive_witness(d) {
            Ok(batches) => {
                for b in &batches {
                    let p = b.params;
                    let b3 = p.b3.map(|x| format!(", {x}")).unwrap_or_default();
                    table += &format!(
                        "  step {:>2}  {:<16} ({}, {}, {}{b3})  {} vectors  rank {}\n",
                        b.step_index,
                        serde_json::to_value(b.scheme)?.as_str().unwrap_or_default(),
                        p.a,
                        p.b1,
                        p.b2,
                        b.vectors.len(),
                        b.rank_after
                    );
                }
                value["witness_steps"] = serde_json::to_value(&batches)?;
                ok &= batches.last().map(|b| b.rank_after) == Some(t.h);
            }
            Err(e) => {
                value["witness_error"] = json!(e.to_string());
                table += &format!("  witness failed: {e}\n");
                ok = false;
            }
        }
    }
    Ok(Outcome { value, table, code: if ok { 0 } else { EXIT_FAILURE } })
}

fn project_cmd(file: &Path) -> anyhow::Result<Outcome> {
    let p = io::behavior_from_json(&read_json(file)?)?;
    let c = project(&p);
    let table = block_table(c.d(), |blk, n| c.coords()[blk * c.d() + n].to_string());
    Ok(Outcome::ok(io::corr_to_json(&c), table))
}

fn block_table(d: usize, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("block  ");
    out += &(0..d).map(|n| format!("{n:>8}")).collect::<String>();
    out.push('\n');
    for (blk, name) in ["a1b1", "a1b2", "a2b1", "a2b2"].iter().enumerate() {
        out += &format!("{name}   ");
        out += &(0..d).map(|n| format!("{:>8}", cell(blk, n))).collect::<String>();
        out.push('\n');
    }
    out
}

fn facet_outcome(h: &tightbell::HRep, allow_large: bool) -> anyhow::Result<Outcome> {
    let (labels, reps) = label_facets(&h.facets, allow_large)?;
    let mut value = io::facet_list_to_json(h, &labels);
    let mut summary = Vec::new();
    let mut table = format!(
        "{} facets{} in {} classes\n  class  trivial  count  bound\n",
        h.facets.len(),
        if h.complete { "" } else { " (incomplete)" },
        reps.len()
    );
    for (id, rep) in reps.iter().enumerate() {
        let members: Vec<_> = labels.iter().filter(|l| l.class == id).collect();
        let trivial = members[0].trivial;
        table += &format!("  {id:>5}  {trivial:>7}  {:>5}  {}\n", members.len(), rep.bound);
        summary.push(json!({
            "class": id,
            "trivial": trivial,
            "count": members.len(),
            "representative": io::inequality_to_json(rep),
        }));
    }
    value["classes"] = Value::Array(summary);
    let code = if h.complete { 0 } else { EXIT_BUDGET };
    Ok(Outcome { value, table, code })
}

fn enumerate(d: usize, space: SpaceArg, budget: Option<u64>, allow_large: bool) -> anyhow::Result<Outcome> {
    scenario(d)?;
    let v = match space {
        SpaceArg::Corr => VRep::correlator(d)?,
        SpaceArg::Behavior => VRep::behavior(d)?,
    };
    let deadline = match budget {
        Some(secs) if d >= 4 => Some(Instant::now() + Duration::from_secs(secs)),
        Some(_) => {
            eprintln!("note: --budget is only honored for d >= 4");
            None
        }
        None => None,
    };
    let start = Instant::now();
    let h = enumerate_facets_until(&v, deadline)?;
    eprintln!("enumerated {} facets in {:.2?}", h.facets.len(), start.elapsed());
    facet_outcome(&h, allow_large)
}

fn classify(file: &Path, allow_large: bool) -> anyhow::Result<Outcome> {
    let h = io::facet_list_from_json(&read_json(file)?)?;
    facet_outcome(&h, allow_large)
}

fn membership(file: &Path) -> anyhow::Result<Outcome> {
    let verdict = match io::point_from_json(&read_json(file)?)? {
        Point::Behavior(p) => local_decompose(&p)?,
        Point::Correlator(c) => corr_local_decompose(&c)?,
    };
    let value = io::verdict_to_json(&verdict);
    let table = match &verdict {
        tightbell::membership::Verdict::Local { weights } => {
            let mut t = String::from("local\n  strategy   weight\n");
            for (l, w) in weights {
                t += &format!("  {l:<9}  {w}\n");
            }
            t
        }
        tightbell::membership::Verdict::Nonlocal { certificate, value, violation, class } => format!(
            "nonlocal\n  certificate class {class}\n  value {value} > bound {} (violation {violation})\n",
            certificate.bound
        ),
    };
    Ok(Outcome::ok(value, table))
}

fn cglmp_cmd(d: usize, space: SpaceArg) -> anyhow::Result<Outcome> {
    scenario(d)?;
    let ineq = match space {
        SpaceArg::Corr => correlators::cglmp_corr_inequality(d)?,
        SpaceArg::Behavior => cglmp::cglmp_inequality(d)?,
    };
    let table = match space {
        SpaceArg::Corr => block_table(d, |blk, n| ineq.coeffs[blk * d + n].to_string()) + &format!("bound {}\n", ineq.bound),
        SpaceArg::Behavior => {
            let mut t = String::new();
            for (blk, name) in ["a1b1", "a1b2", "a2b1", "a2b2"].iter().enumerate() {
                t += &format!("{name}\n");
                for k in 0..d {
                    let row: String = (0..d).map(|s| format!("{:>8}", ineq.coeffs[blk * d * d + k * d + s].to_string())).collect();
                    t += &format!("  {row}\n");
                }
            }
            t + &format!("bound {}\n", ineq.bound)
        }
    };
    Ok(Outcome::ok(io::inequality_to_json(&ineq), table))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Verification(_)) | Some(Error::Lp(_)) | Some(Error::Degenerate(_)) | Some(Error::InvalidRstu(..)) => EXIT_FAILURE,
        Some(_) => EXIT_USAGE,
        None => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Dims { d } => dims(*d),
        Command::VerifyCglmp { d } => verify_cglmp(*d),
        Command::Tightness { d, witness } => tightness(*d, *witness),
        Command::Project { file } => project_cmd(file),
        Command::Enumerate { d, space, budget, allow_large_group } => enumerate(*d, *space, *budget, *allow_large_group),
        Command::Classify { file, allow_large_group } => classify(file, *allow_large_group),
        Command::Membership { file } => membership(file),
        Command::Cglmp { d, space } => cglmp_cmd(*d, *space),
    };
    match result {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let mut stdout = std::io::stdout().lock();
            let _ = if cli.pretty { write!(stdout, "{}", out.table) } else { writeln!(stdout, "{}", out.value) };
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(std::io::stdout(), "{}", json!({ "error": format!("{e:#}"), "exit": code }));
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

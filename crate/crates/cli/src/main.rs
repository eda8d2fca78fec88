//! `expd`: decompose graphs into flow-expanding components, verify stored
//! decompositions, and benchmark against the cut-and-recurse baseline.
//!
//! Exit codes: 0 success, 2 input/parse errors, 3 invariant violations or
//! failed verification, 1 anything else. Log verbosity comes from the
//! `EXPD_LOG` environment variable only.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use expd::baseline::cut_and_recurse;
use expd::decomp::{ed_multi, Constants, Decomposition, EdConfig};
use expd::error::Error;
use expd::flow::SolverSelect;
use expd::generators::standard_corpus;
use expd::graph::Graph;
use expd::verify::{verify_decomposition, Verdict};
use expd::weighting::NodeWeighting;
use expd::{io as formats, Result};

#[derive(Parser)]
#[command(
    name = "expd",
    version,
    about = "flow-expander decompositions with certified verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose a graph; writes <stem>.cut and <stem>.audit.json.
    Decompose(DecomposeArgs),
    /// Re-verify a stored decomposition against its graph.
    Verify(VerifyArgs),
    /// Run a corpus through both algorithms and emit CSV measurements.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Exact,
    Mwu,
}

#[derive(Args)]
struct SolverOpts {
    /// Force a solver; omitted = exact up to 256 vertices, MWU beyond.
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Relative accuracy for the MWU solver.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Gate at phi/(1-epsilon) so MWU runs meet the undegraded guarantee.
    #[arg(long)]
    inflate_phi: bool,
}

impl SolverOpts {
    fn select(&self) -> SolverSelect {
        match self.solver {
            Some(SolverArg::Exact) => SolverSelect::Exact,
            Some(SolverArg::Mwu) => SolverSelect::Mwu {
                epsilon: self.epsilon,
            },
            None => SolverSelect::auto(self.epsilon),
        }
    }

    fn config(&self) -> EdConfig {
        EdConfig {
            solver: self.select(),
            inflate_phi: self.inflate_phi,
            constants: Constants::default(),
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Edge-list file: `u v [length]` per line, `#` comments.
    #[arg(long)]
    graph: PathBuf,
    /// Node weighting file: `v mass` per line; default is the degree
    /// weighting.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    phi: f64,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Cut file produced by `decompose`.
    #[arg(long)]
    cut: PathBuf,
    /// Audit file produced by `decompose`.
    #[arg(long)]
    audit: PathBuf,
    /// Treat unverified (oversized) components as failures.
    #[arg(long)]
    strict: bool,
    /// Also write <stem>.verify.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// `default` for the built-in corpus, or a directory of .el files.
    #[arg(long, default_value = "default")]
    corpus: String,
    /// Single phi; omitted = the grid 2^0 .. 2^-10.
    #[arg(long)]
    phi: Option<f64>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Skip the per-run exact verification pass.
    #[arg(long)]
    no_verify: bool,
    #[command(flatten)]
    solver: SolverOpts,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("EXPD_LOG")).init();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Decompose(args) => cmd_decompose(&args),
        Cmd::Verify(args) => cmd_verify(&args),
        Cmd::Bench(args) => cmd_bench(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } | Error::Io(_) => ExitCode::from(2),
                Error::Invariant { .. } => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_instance(graph: &Path, weights: Option<&Path>) -> Result<(Graph, NodeWeighting)> {
    let g = formats::read_edge_list(&fs::read_to_string(graph)?)?;
    let a = match weights {
        Some(path) => formats::read_node_weighting(&fs::read_to_string(path)?, g.vertex_count())?,
        None => NodeWeighting::degrees(&g),
    };
    Ok((g, a))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string())
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<ExitCode> {
    let (g, a) = load_instance(&args.graph, args.weights.as_deref())?;
    let cfg = args.solver.config();
    let d = ed_multi(&g, &a, args.phi, &cfg)?;
    fs::create_dir_all(&args.out_dir)?;
    let base = stem(&args.graph);
    let cut_path = args.out_dir.join(format!("{base}.cut"));
    let audit_path = args.out_dir.join(format!("{base}.audit.json"));
    fs::write(&cut_path, formats::write_cut(&g, &d.removed))?;
    fs::write(&audit_path, formats::write_audit(&d))?;
    println!(
        "removed {} of {} edges; {} components; wrote {} and {}",
        d.removed.len(),
        g.edge_count(),
        d.components.len(),
        cut_path.display(),
        audit_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let (g, a) = load_instance(&args.graph, args.weights.as_deref())?;
    let stored = formats::read_audit(&fs::read_to_string(&args.audit)?)?;
    let cut = formats::read_cut(&g, &fs::read_to_string(&args.cut)?)?;
    if cut != stored.removed {
        return Err(Error::invariant(
            "cut-audit-mismatch",
            format!(
                "cut file lists {} edges, audit lists {}",
                cut.len(),
                stored.removed.len()
            ),
            "cmd_verify",
        ));
    }
    let d = Decomposition {
        removed: cut,
        ..stored
    };
    let report = verify_decomposition(&g, &a, &d, &Constants::default())?;
    for r in &report.component_reports {
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Unverified => "unverified",
        };
        println!(
            "component n={} kappa={} flow_expanding_at={} [{verdict}]",
            r.component.len(),
            r.kappa_product.map_or("-".into(), |k| format!("{k:.6}")),
            r.flow_expanding_at
                .map_or("-".into(), |f| format!("{f:.6}")),
        );
    }
    println!(
        "summary: {} pass, {} fail, {} unverified; |C| = {}, realized beta = {}",
        report.passes,
        report.failures,
        report.unverified,
        report.overhead.removed_edges,
        report
            .overhead
            .realized_beta
            .map_or("-".into(), |b| format!("{b:.6}")),
    );
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.verify.json", stem(&args.cut)));
        fs::write(&path, formats::write_report(&report))?;
        println!("wrote {}", path.display());
    }
    if report.failures > 0 || (args.strict && report.unverified > 0) {
        return Ok(ExitCode::from(3));
    }
    if report.unverified > 0 {
        eprintln!(
            "warning: {} unverified oversized components",
            report.unverified
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let corpus: Vec<(String, Graph)> = if args.corpus == "default" {
        standard_corpus(args.seed)
    } else {
        let mut paths: Vec<PathBuf> = fs::read_dir(&args.corpus)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "el"))
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for p in paths {
            out.push((stem(&p), formats::read_edge_list(&fs::read_to_string(&p)?)?));
        }
        out
    };
    let phi_grid: Vec<f64> = match args.phi {
        Some(phi) => vec![phi],
        None => (0..=10).map(|k| (-(k as f64)).exp2()).collect(),
    };
    let cfg = args.solver.config();
    let solver = args.solver.select();

    // Instances run concurrently; rows come back in deterministic order.
    let jobs: Vec<(usize, f64)> = (0..corpus.len())
        .flat_map(|i| phi_grid.iter().map(move |&phi| (i, phi)))
        .collect();
    let rows: Result<Vec<String>> = jobs
        .par_iter()
        .map(|&(i, phi)| {
            let (name, g) = &corpus[i];
            let a = NodeWeighting::degrees(g);
            let total = a.total();
            let denom = phi * total as f64 * (total as f64).log2();
            let mut rows = String::new();

            let t = Instant::now();
            let d = ed_multi(g, &a, phi, &cfg)?;
            let wall = t.elapsed().as_secs_f64() * 1e3;
            let verified = if args.no_verify {
                "-".to_string()
            } else {
                verify_decomposition(g, &a, &d, &cfg.constants)?
                    .all_verified()
                    .to_string()
            };
            push_row(
                &mut rows,
                name,
                g,
                phi,
                "ed",
                d.removed.len(),
                denom,
                wall,
                d.audit.max_depth(),
                d.components.len(),
                &verified,
            );

            let t = Instant::now();
            let b = cut_and_recurse(g, &a, phi, solver)?;
            let wall = t.elapsed().as_secs_f64() * 1e3;
            let verified = if args.no_verify {
                "-".to_string()
            } else {
                baseline_components_expand(g, &a, phi, &b.components)?.to_string()
            };
            push_row(
                &mut rows,
                name,
                g,
                phi,
                "cut-and-recurse",
                b.removed.len(),
                denom,
                wall,
                b.max_depth,
                b.components.len(),
                &verified,
            );
            log::info!("bench: finished {name} at phi {phi}");
            Ok(rows)
        })
        .collect();
    let mut csv = String::from(
        "instance,n,m,phi,algorithm,cut_size,overhead_ratio,wall_ms,depth,components,verified\n",
    );
    for row in rows? {
        csv.push_str(&row);
    }
    match &args.csv {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(path, csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// The baseline carries no audit tree, so verification is the expansion
/// check alone (same 2/phi slack as the main verifier).
fn baseline_components_expand(
    g: &Graph,
    a: &NodeWeighting,
    phi: f64,
    components: &[Vec<usize>],
) -> Result<bool> {
    for comp in components {
        let (sub, map) = g.induced(comp);
        let sub_a = a.reindex(&map.vertex_to_parent);
        if sub_a.support_size() <= 1 {
            continue;
        }
        let r = expd::verify::check_flow_expansion(&sub, &sub_a, phi)?;
        let ok = match r.verdict {
            Verdict::Pass => true,
            Verdict::Fail => r.kappa_product.is_some_and(|k| k <= 2.0 / phi + 1e-6),
            Verdict::Unverified => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    csv: &mut String,
    name: &str,
    g: &Graph,
    phi: f64,
    algorithm: &str,
    cut: usize,
    denom: f64,
    wall_ms: f64,
    depth: usize,
    components: usize,
    verified: &str,
) {
    let ratio = if denom > 0.0 { cut as f64 / denom } else { 0.0 };
    csv.push_str(&format!(
        "{name},{},{},{phi},{algorithm},{cut},{ratio:.6},{wall_ms:.3},{depth},{components},{verified}\n",
        g.vertex_count(),
        g.edge_count(),
    ));
}

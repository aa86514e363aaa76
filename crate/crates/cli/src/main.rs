use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use trifree::bounds;
use trifree::cut::{self, Partition};
use trifree::extremal::{self, SolverLimits};
use trifree::harness::{self, ExperimentSpec, Format};
use trifree::lattice::{self, ProductMeasure};
use trifree::randgen::{self, RngSeed};
use trifree::{Edge, EdgeSet, Graph};

const EXIT_INVALID: u8 = 2;
const EXIT_CENSORED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "trifree",
    version,
    about = "Max-cut, triangle-free subgraph and random graph laboratory"
)]
struct Cli {
    /// Master seed for sampling and experiments.
    #[arg(long, global = true, env = "TRIFREE_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random graph and print it as an edge list.
    Sample(SampleArgs),
    /// Exact maximum cut with optional near-optimal enumeration.
    Maxcut(MaxcutArgs),
    /// Exact maximum K_l-free subgraph.
    Tfree(TfreeArgs),
    /// Evaluate the perturbation events for a partition and added edges.
    Perturb(PerturbArgs),
    /// Exhaustive correlation check of the two perturbation events.
    FkgCheck(FkgArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
    /// Run or re-emit Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "m")]
    p: Option<f64>,
    #[arg(long, short = 'm', alias = "M")]
    m: Option<usize>,
    /// Reject until the draw is triangle-free (needs --m).
    #[arg(long, requires = "m")]
    tfree: bool,
    #[arg(long, default_value_t = 1_000_000)]
    max_tries: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MaxcutArgs {
    /// Edge-list file, `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    l: usize,
    /// List every partition within this gap of the optimum.
    #[arg(long)]
    near: Option<usize>,
}

#[derive(Args)]
struct TfreeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    l: usize,
    #[arg(long, default_value_t = 10)]
    witnesses: usize,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_m: Option<usize>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    /// Parts separated by `|`, e.g. `1,2|3`.
    #[arg(long)]
    partition: String,
    /// Inside edge `u-v`; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    add: Vec<String>,
}

#[derive(Args)]
struct FkgArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    partition: String,
    /// Inside pairs `u-v`; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    s: Vec<String>,
    #[arg(long)]
    r0: usize,
    #[arg(long)]
    s0: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// One of s0, r0, s_r, threshold_m, t_i, x_i, pittel, b_bounds, balance,
    /// nonedge, sandwich, chernoff_upper, chernoff_lower, trinomial.
    #[arg(long)]
    formula: String,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    s_i: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t_i: Option<f64>,
    #[arg(long = "M")]
    big_m: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "N")]
    big_n: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run the experiment described by a JSON spec; flags override the file.
    Run(RunArgs),
    /// Convert a JSON result document to another format.
    Emit(EmitArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, conflicts_with = "m")]
    p: Option<f64>,
    #[arg(long, short = 'm', alias = "M")]
    m: Option<usize>,
    #[arg(long, default_value = "json")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    /// JSON result document, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// An error caused by the user's input rather than by the environment.
#[derive(Debug)]
struct Invalid(anyhow::Error);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Invalid(e.into()))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::parse_edge_list(&read_input(path)?).map_err(invalid)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(None, text.as_bytes())
}

fn parse_edges(items: &[String]) -> Result<EdgeSet> {
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (u, v) = s
                .trim()
                .split_once('-')
                .ok_or_else(|| invalid(anyhow!("edge `{s}` is not `u-v`")))?;
            let u: usize = u
                .trim()
                .parse()
                .map_err(|_| invalid(anyhow!("bad vertex in `{s}`")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| invalid(anyhow!("bad vertex in `{s}`")))?;
            if u == v || u == 0 || v == 0 {
                return Err(invalid(anyhow!(
                    "edge `{s}` needs two distinct positive vertices"
                )));
            }
            Ok(Edge::new(u, v))
        })
        .collect()
}

fn parts_json(p: &Partition) -> Vec<Vec<usize>> {
    p.parts().iter().map(|x| x.iter().collect()).collect()
}

fn edges_json(s: &EdgeSet) -> Vec<(usize, usize)> {
    s.iter().map(|e| e.endpoints()).collect()
}

fn sample(seed: Option<u64>, a: SampleArgs) -> Result<u8> {
    let seed = RngSeed::new(seed.unwrap_or(0), a.stream);
    let g = match (a.p, a.m, a.tfree) {
        (_, Some(m), true) => {
            randgen::sample_uniform_triangle_free(a.n, m, seed, a.max_tries)
                .map_err(invalid)?
                .graph
        }
        (Some(p), None, _) => randgen::sample_gnp(a.n, p, seed).map_err(invalid)?,
        (None, Some(m), _) => randgen::sample_gnm(a.n, m, seed).map_err(invalid)?,
        _ => return Err(invalid(anyhow!("give one of --p or --m"))),
    };
    write_output(a.output.as_deref(), g.to_edge_list().as_bytes())?;
    Ok(0)
}

fn maxcut(a: MaxcutArgs) -> Result<u8> {
    let g = read_graph(&a.input)?;
    let survey = match a.near {
        Some(gap) => cut::enumerate_near_optimal(&g, gap, a.l),
        None => cut::max_cut(&g, a.l),
    }
    .map_err(invalid)?;
    let near: Vec<_> = survey
        .near_optimal
        .iter()
        .map(|e| json!({ "parts": parts_json(&e.partition), "gap": e.gap, "dist": e.dist }))
        .collect();
    print_json(&json!({
        "l": survey.l,
        "b": survey.b_value,
        "canonical_parts": parts_json(&survey.canonical),
        "near_optimal": near,
        "max_pairwise_optimal_dist": survey.max_pairwise_optimal_dist,
    }))?;
    Ok(0)
}

fn tfree(a: TfreeArgs) -> Result<u8> {
    let g = read_graph(&a.input)?;
    let d = SolverLimits::default();
    let limits = SolverLimits {
        max_n: a.max_n.unwrap_or(d.max_n),
        max_m: a.max_m.unwrap_or(d.max_m),
        max_nodes: a.max_nodes.unwrap_or(d.max_nodes),
    };
    let sol = extremal::max_clique_free(&g, a.l, a.witnesses, limits).map_err(invalid)?;
    print_json(&json!({
        "l": sol.l,
        "t": sol.t_value,
        "optimal": sol.optimal,
        "witnesses": sol.witnesses.iter().map(edges_json).collect::<Vec<_>>(),
        "witnesses_truncated": sol.witnesses_truncated,
        "all_k_partite": sol.all_k_partite,
        "verdict_partial": sol.verdict_is_partial(),
        "non_partite_witness": sol.non_partite_witness.as_ref().map(edges_json),
        "nodes": sol.nodes,
    }))?;
    Ok(if sol.optimal { 0 } else { EXIT_CENSORED })
}

fn perturb(a: PerturbArgs) -> Result<u8> {
    let g = read_graph(&a.input)?;
    let p = Partition::parse(&a.partition, Some(g.n())).map_err(invalid)?;
    let s = parse_edges(&a.add)?;
    let event_e = extremal::perturbation_event(&g, &p, &s).map_err(invalid)?;
    let event_e2 = extremal::event_e2(&g, &p, &s).map_err(invalid)?;
    let deletions = extremal::min_cross_deletions(&g, &p, &s).map_err(invalid)?;
    print_json(&json!({
        "event_E": event_e,
        "event_E2": event_e2,
        "gap": cut::gap(&g, &p).map_err(invalid)?,
        "min_cross_deletions": deletions,
    }))?;
    Ok(0)
}

fn fkg_check(a: FkgArgs) -> Result<u8> {
    let p = Partition::parse(&a.partition, Some(a.n)).map_err(invalid)?;
    if p.len() != 2 {
        return Err(invalid(anyhow!("the partition must have two parts")));
    }
    let s = parse_edges(&a.s)?;
    if let Some(e) = s.iter().find(|e| e.v() > a.n || !p.same_part(e.u(), e.v())) {
        return Err(invalid(anyhow!("pair {e} is not inside a part")));
    }
    let mu = ProductMeasure::new(a.n, a.p).map_err(invalid)?;
    let report = lattice::fkg_check(
        &mu,
        |g| extremal::event_e1(g, &p, a.r0, a.s0).expect("small n"),
        |g| extremal::e2_indicator(g, &p, &s).expect("validated pairs"),
    )
    .map_err(invalid)?;
    print_json(&report)?;
    Ok(0)
}

fn bounds_cmd(a: BoundsArgs) -> Result<u8> {
    let pairs = [
        ("C", a.c),
        ("omega", a.omega),
        ("r", a.r),
        ("n", a.n),
        ("p", a.p),
        ("s_i", a.s_i),
        ("s", a.s),
        ("t_i", a.t_i),
        ("M", a.big_m),
        ("lambda", a.lambda),
        ("t", a.t),
        ("N", a.big_n),
        ("alpha", a.alpha),
        ("d", a.d),
    ];
    let inputs: BTreeMap<String, f64> = pairs
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect();
    let report = bounds::evaluate(&a.formula, &inputs).map_err(invalid)?;
    print_json(&report)?;
    Ok(0)
}

fn run(seed: Option<u64>, a: RunArgs) -> Result<u8> {
    let text = read_input(&a.spec)?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| invalid(anyhow!("{}: {e}", a.spec.display())))?;
    if let Some(s) = seed {
        spec.master_seed = s;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    if let Some(p) = a.p {
        spec = spec.with_p(p);
    }
    if let Some(m) = a.m {
        spec = spec.with_m(m);
    }
    let result = match harness::run_experiment(&spec) {
        Ok(r) => r,
        Err(e @ harness::HarnessError::InvalidSpec(_)) => return Err(invalid(e)),
        Err(e) => bail!(e),
    };
    write_output(a.output.as_deref(), &harness::emit(&result, a.format)?)?;
    Ok(if result.summary.partial {
        EXIT_CENSORED
    } else {
        0
    })
}

fn emit(a: EmitArgs) -> Result<u8> {
    let text = read_input(&a.input)?;
    let result = harness::parse_result(text.as_bytes()).map_err(invalid)?;
    write_output(a.output.as_deref(), &harness::emit(&result, a.format)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(a) => sample(cli.seed, a),
        Command::Maxcut(a) => maxcut(a),
        Command::Tfree(a) => tfree(a),
        Command::Perturb(a) => perturb(a),
        Command::FkgCheck(a) => fkg_check(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Experiment(ExperimentCommand::Run(a)) => run(cli.seed, a),
        Command::Experiment(ExperimentCommand::Emit(a)) => emit(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

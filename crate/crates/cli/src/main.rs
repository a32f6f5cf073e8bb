//! `hedgecut` command-line driver.
//!
//! Exit codes: 0 success or identifiable, 2 bad input or flags, 3 not
//! identifiable, 4 infeasible, 5 timed out.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hedgecut_core::exact::{rank_top_n, Bounds, ExactSolver, Solution};
use hedgecut_core::harness::{
    aggregate, generate_batch, plausibility_ratio, run_comparison, write_csv, Algorithm, GenConfig,
    RunConfig,
};
use hedgecut_core::heuristics::{best_heuristic, heid1, heid2};
use hedgecut_core::io::{Format, GraphFile, ParsedGraph};
use hedgecut_core::mcip::{t1_mcip_to_edge_id, t2_edge_id_to_mcip, Layer};
use hedgecut_core::probmodel::{score_solution, to_edge_id_weights};
use hedgecut_core::{
    Admg, Edge, Error, Objective, ProbabilisticAdmg, VertexSet, Weight, WeightedInstance,
};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_IDENTIFIABLE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_TIMEOUT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "hedgecut",
    version,
    about = "Minimum-cost edge removal for causal identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether Q[Y] is identifiable.
    Check {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        /// Treatment set; Y becomes the ancestors of the outcome set outside it.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        x: Vec<String>,
    },
    /// Find the cheapest removal set.
    Solve(SolveArgs),
    /// List the best few identifiable subgraphs.
    Rank {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::MostProbable)]
        objective: ObjectiveArg,
        #[arg(short = 'n', long = "count", default_value_t = 1)]
        count: usize,
    },
    /// Convert between edge removal and minimum-cost intervention instances.
    Transform {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum)]
        direction: Direction,
        /// How edge values are read for `to-mcip`.
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Weights)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Writes the edge/vertex correspondence as JSON.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Run the benchmark and write the results table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TargetArgs {
    /// Target vertices; falls back to the file's `target` field.
    #[arg(long = "y", num_args = 1.., value_delimiter = ',')]
    y: Vec<String>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MostProbable)]
    objective: ObjectiveArg,
    #[arg(long, group = "method")]
    exact: bool,
    #[arg(long, group = "method")]
    heid1: bool,
    #[arg(long, group = "method")]
    heid2: bool,
    #[arg(long, group = "method")]
    best_heuristic: bool,
    /// Upper bound for the exact search; defaults to the best heuristic cost.
    #[arg(long)]
    ub: Option<f64>,
    /// Stop as soon as a solution at or below this cost is found.
    #[arg(long, default_value_t = 0.0)]
    th: f64,
    /// Seconds before the exact search gives up.
    #[arg(long)]
    timeout: Option<f64>,
    /// Writes the kept graph here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = hedgecut_core::harness::DEFAULT_BATCH)]
    batch: usize,
    #[arg(long, env = "HEDGECUT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = hedgecut_core::harness::DEFAULT_TIMEOUT_SECS as f64)]
    timeout: f64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "heid1,heid2,edgeid_exact"
    )]
    algos: Vec<String>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MostProbable)]
    objective: ObjectiveArg,
    #[arg(long)]
    sparsity: Option<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Leaves the runtime column empty for reproducible output.
    #[arg(long)]
    mask_runtime: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes per-(algorithm, n) quantiles as JSON.
    #[arg(long)]
    aggregate: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MostProbable,
    MostPlausible,
    Weights,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Objective {
        match o {
            ObjectiveArg::MostProbable => Objective::MostProbable,
            ObjectiveArg::MostPlausible => Objective::MostPlausible,
            ObjectiveArg::Weights => Objective::RawWeights,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Lines,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Lines => Format::Lines,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    ToMcip,
    FromMcip,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Infeasible => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<u8, Failure>;

/// Appends one line to the stdout buffer.
macro_rules! say {
    ($out:expr, $($arg:tt)*) => {{
        $out.push_str(&format!($($arg)*));
        $out.push('\n');
    }};
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = String::new();
    let result = match cli.command {
        Command::Check { file, target, x } => cmd_check(&mut out, &file, &target, &x),
        Command::Solve(args) => cmd_solve(&mut out, &args),
        Command::Rank {
            file,
            target,
            objective,
            count,
        } => cmd_rank(&mut out, &file, &target, objective.into(), count),
        Command::Transform {
            file,
            target,
            direction,
            objective,
            format,
            map_out,
        } => cmd_transform(
            &mut out,
            &file,
            &target,
            direction,
            objective.into(),
            format.into(),
            map_out.as_deref(),
        ),
        Command::Bench(args) => cmd_bench(&mut out, &args),
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(out.as_bytes())
        .and_then(|()| stdout.flush());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> std::result::Result<ParsedGraph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let file = GraphFile::parse(&text, None)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(file.resolve()?)
}

fn target_of(parsed: &ParsedGraph, args: &TargetArgs) -> std::result::Result<VertexSet, Failure> {
    if args.y.is_empty() {
        return parsed
            .target
            .clone()
            .ok_or_else(|| input_error("no target: pass --y or add `target` to the file"));
    }
    let set = parsed.graph.set_of(&args.y)?;
    if set.is_empty() {
        return Err(Error::EmptyTarget.into());
    }
    Ok(set)
}

fn edge_list(g: &Admg, edges: &BTreeSet<Edge>) -> String {
    edges
        .iter()
        .map(|e| g.edge_label(e))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_check(out: &mut String, file: &Path, target: &TargetArgs, x: &[String]) -> CmdResult {
    let parsed = load(file)?;
    let g = &parsed.graph;
    let y = if x.is_empty() {
        target_of(&parsed, target)?
    } else {
        let outcome = target_of(&parsed, target)?;
        let x = g.set_of(x)?;
        g.general_query_to_qy(&x, &outcome)?
    };
    let identifiable = g.is_identifiable(&y)?;
    let hedge = g.maximal_hedge_vertices(&y)?;
    say!(out, "identifiable: {identifiable}");
    say!(out, "maximal hedge: {}", g.set_label(&hedge));
    if !x.is_empty() {
        say!(out, "target: {}", g.set_label(&y));
    }
    Ok(if identifiable {
        EXIT_OK
    } else {
        EXIT_NOT_IDENTIFIABLE
    })
}

/// Either the probability model or raw weights, depending on the objective.
struct Problem {
    pg: Option<ProbabilisticAdmg>,
    inst: WeightedInstance,
    objective: Objective,
}

fn problem(
    parsed: &ParsedGraph,
    target: &VertexSet,
    objective: Objective,
) -> std::result::Result<Problem, Failure> {
    Ok(match objective {
        Objective::RawWeights => Problem {
            pg: None,
            inst: parsed.weighted(target)?,
            objective,
        },
        _ => {
            let pg = parsed.probabilistic()?;
            let inst = to_edge_id_weights(&pg, objective, target)?;
            Problem {
                pg: Some(pg),
                inst,
                objective,
            }
        }
    })
}

fn kept_document(p: &Problem, sol: &Solution) -> GraphFile {
    match &p.pg {
        Some(pg) => {
            let prob = pg
                .probabilities()
                .iter()
                .filter(|(e, _)| !sol.removed.contains(*e))
                .map(|(e, p)| (*e, *p))
                .collect();
            let kept = ProbabilisticAdmg::new(sol.kept_graph.clone(), prob)
                .expect("subset of a valid model");
            GraphFile::from_probabilistic(&kept)
        }
        None => {
            let weights = p
                .inst
                .weights()
                .iter()
                .filter(|(e, _)| !sol.removed.contains(*e))
                .map(|(e, w)| (*e, *w))
                .collect();
            let kept =
                WeightedInstance::new(sol.kept_graph.clone(), weights, p.inst.target.clone())
                    .expect("subset of a valid instance");
            GraphFile::from_weighted(&kept)
        }
    }
}

fn cmd_solve(out: &mut String, args: &SolveArgs) -> CmdResult {
    let parsed = load(&args.file)?;
    let target = target_of(&parsed, &args.target)?;
    let p = problem(&parsed, &target, args.objective.into())?;
    let g = &p.inst.graph;
    let bound = |x: f64, flag: &str| {
        Weight::new(x).ok_or_else(|| input_error(format!("--{flag} must be a non-negative number")))
    };
    let threshold = bound(args.th, "th")?;

    let (method, sol) = if args.heid1 || args.heid2 || args.best_heuristic {
        let (name, h) = if args.heid1 {
            ("heid1", heid1(&p.inst))
        } else if args.heid2 {
            ("heid2", heid2(&p.inst))
        } else {
            ("best-heuristic", best_heuristic(&p.inst))
        };
        (name, h?.solution)
    } else {
        let upper = match args.ub {
            Some(ub) => bound(ub, "ub")?,
            None => best_heuristic(&p.inst)
                .map(|h| h.solution.cost)
                .unwrap_or(Weight::INFINITE),
        };
        let deadline = match args.timeout {
            Some(t) if t.is_finite() && t >= 0.0 => {
                Some(Instant::now() + Duration::from_secs_f64(t))
            }
            Some(_) => {
                return Err(input_error(
                    "--timeout must be a non-negative number of seconds",
                ))
            }
            None => None,
        };
        let sol = ExactSolver::new(&p.inst)
            .bounds(Bounds { upper, threshold })
            .deadline(deadline)
            .solve()?;
        ("exact", sol)
    };

    say!(out, "method: {method}");
    say!(out, "objective: {}", p.objective.name());
    if sol.timed_out {
        say!(out, "timed out: best so far shown");
    }
    if !sol.identifiable {
        if sol.timed_out {
            say!(out, "no solution found before the deadline");
            return Ok(EXIT_TIMEOUT);
        }
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: "no finite-cost removal makes the query identifiable".into(),
        });
    }
    if sol.removed.is_empty() {
        say!(out, "removed: nothing to remove");
    } else {
        say!(out, "removed: {}", edge_list(g, &sol.removed));
    }
    say!(out, "cost: {}", sol.cost);
    if let Some(pg) = &p.pg {
        say!(
            out,
            "score: {}",
            score_solution(pg, &sol.removed, p.objective)?
        );
        say!(out, "plausibility ratio: {}", plausibility_ratio(pg, &sol)?);
        if p.objective == Objective::MostProbable {
            let dropped: BTreeSet<Edge> = pg
                .below_half()
                .into_iter()
                .filter(|e| !sol.removed.contains(e))
                .collect();
            if !dropped.is_empty() {
                say!(out, "also absent (p < 0.5): {}", edge_list(g, &dropped));
            }
        }
    }
    let doc = kept_document(&p, &sol).render(args.format.into());
    match &args.out {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => {
            say!(out, "kept graph:");
            out.push_str(&doc);
        }
    }
    Ok(if sol.timed_out { EXIT_TIMEOUT } else { EXIT_OK })
}

fn cmd_rank(
    out: &mut String,
    file: &Path,
    target: &TargetArgs,
    objective: Objective,
    count: usize,
) -> CmdResult {
    let parsed = load(file)?;
    let target = target_of(&parsed, target)?;
    if objective == Objective::RawWeights {
        return Err(Error::UnsupportedObjective("weights").into());
    }
    let pg = parsed.probabilistic()?;
    let ranked = rank_top_n(&pg, &target, objective, count)?;
    if ranked.is_empty() {
        return Err(Error::Infeasible.into());
    }
    for (i, sol) in ranked.iter().enumerate() {
        let score = sol.score.map(|s| s.to_string()).unwrap_or_default();
        let removed = if sol.removed.is_empty() {
            "nothing to remove".to_string()
        } else {
            edge_list(&pg.graph, &sol.removed)
        };
        say!(out, "{}\t{score}\t{removed}", i + 1);
    }
    Ok(EXIT_OK)
}

fn write_map(path: &Path, value: serde_json::Value) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(&value).expect("map serializes") + "\n";
    std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn cmd_transform(
    out: &mut String,
    file: &Path,
    target: &TargetArgs,
    direction: Direction,
    objective: Objective,
    format: Format,
    map_out: Option<&Path>,
) -> CmdResult {
    let parsed = load(file)?;
    let target = target_of(&parsed, target)?;
    match direction {
        Direction::ToMcip => {
            let inst = problem(&parsed, &target, objective)?.inst;
            let (m, map) = t2_edge_id_to_mcip(&inst)?;
            out.push_str(&GraphFile::from_mcip(&m).render(format));
            if let Some(path) = map_out {
                let entries: Vec<_> = map
                    .forward
                    .iter()
                    .map(|(e, v)| {
                        serde_json::json!({
                            "edge": inst.graph.edge_label(e),
                            "vertex": m.graph.name(*v),
                            "layer": match map.layer[v.index()] { Layer::Top => "top", Layer::Bottom => "bottom" },
                            "case": map.case_tag.get(v).map(|c| c.to_string()),
                        })
                    })
                    .collect();
                write_map(path, serde_json::Value::Array(entries))?;
            }
        }
        Direction::FromMcip => {
            let m = parsed.mcip(&target)?;
            let (inst, split) = t1_mcip_to_edge_id(&m)?;
            out.push_str(&GraphFile::from_weighted(&inst).render(format));
            if let Some(path) = map_out {
                let entries: Vec<_> = split
                    .iter()
                    .map(|(v, e)| {
                        serde_json::json!({
                            "vertex": m.graph.name(*v),
                            "edge": inst.graph.edge_label(e),
                        })
                    })
                    .collect();
                write_map(path, serde_json::Value::Array(entries))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_bench(out: &mut String, args: &BenchArgs) -> CmdResult {
    let algorithms = args
        .algos
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(input_error)?;
    if args.batch == 0 || args.jobs == 0 {
        return Err(input_error("--batch and --jobs must be positive"));
    }
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(input_error(
            "--timeout must be a positive number of seconds",
        ));
    }
    let objective: Objective = args.objective.into();
    if objective == Objective::RawWeights {
        return Err(Error::UnsupportedObjective("weights").into());
    }
    let mut instances = Vec::new();
    for &n in &args.n_list {
        let cfg = GenConfig {
            edge_sparsity: args.sparsity,
            ..GenConfig::new(n, args.seed)
        };
        instances.extend(generate_batch(&cfg, args.batch)?);
    }
    let cfg = RunConfig {
        timeout: Duration::from_secs_f64(args.timeout),
        objective,
        jobs: args.jobs,
    };
    let records = run_comparison(&instances, &algorithms, &cfg);
    let mut buf = Vec::new();
    write_csv(&records, &mut buf, !args.mask_runtime)?;
    match &args.out {
        Some(path) => std::fs::write(path, &buf)
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => out.push_str(&String::from_utf8(buf).expect("csv is utf-8")),
    }
    if let Some(path) = &args.aggregate {
        let value = serde_json::to_value(aggregate(&records)).expect("aggregate serializes");
        write_map(path, value)?;
    }
    Ok(EXIT_OK)
}

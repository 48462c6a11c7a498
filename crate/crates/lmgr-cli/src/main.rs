//! `lmgr` — landmark-based goal recognition over STRIPS planning problems.
//!
//! Machine output (JSON lines or CSV) goes to `--out` when given, otherwise
//! to standard output; diagnostics go to standard error. Given identical
//! inputs and seeds, machine output is byte-identical across runs.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lmgr_core::datagen::{mutate_bundle, DatasetVariant, VariantKind};
use lmgr_core::evaluation::{evaluate, load_online_problems, plot_data, write_csv, Lambda};
use lmgr_core::landmarks::extract;
use lmgr_core::pddl::{load_bundle_with_cap, DEFAULT_GROUND_CAP};
use lmgr_core::planner::{PlannerConfig, PlannerError};
use lmgr_core::recognition::recognize;
use lmgr_core::score::to_f64;
use lmgr_core::{
    BundleError, Extractor, GroundError, GroundedProblem, Heuristic, OracleConfig, OracleError,
    PlanSpace, RecognitionConfig, State,
};
use serde_json::json;

/// Landmark-based goal recognition over STRIPS planning problems.
///
/// Exit codes: 0 on success, 1 on invalid input (bad flags, malformed
/// bundles, unsupported PDDL, failed checks), 2 when a resource cap is
/// exceeded (grounding cap, planner node cap, oracle state/step caps).
/// Set the `LMGR_LOG` environment variable (e.g. `LMGR_LOG=info`) to
/// enable diagnostic log lines on standard error.
#[derive(Parser)]
#[command(name = "lmgr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract landmarks for every candidate goal in a bundle (JSON lines).
    Extract(ExtractArgs),
    /// Score every candidate goal against an observation prefix (JSON).
    Recognize(RecognizeArgs),
    /// Run the recognition-precision benchmark over bundle suites (CSV).
    Evaluate(EvaluateArgs),
    /// Rewrite a bundle (or suite) with mutated goals and fresh observations.
    Mutate(MutateArgs),
    /// Confirm every extracted landmark against brute-force plan enumeration.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Bundle directory holding domain.pddl, template.pddl, hyps.dat,
    /// real_hyp.dat, and obs.dat.
    #[arg(long)]
    bundle: PathBuf,
    /// Landmark extractor: `ex` (exhaustive) or `rhw` (back-chaining).
    #[arg(long, default_value = "ex", value_parser = parse_extractor)]
    extractor: Extractor,
    /// Refuse to ground when the naive instantiation count exceeds this cap.
    #[arg(long, default_value_t = DEFAULT_GROUND_CAP)]
    ground_cap: u64,
    /// Write the JSON lines here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecognizeArgs {
    /// Bundle directory holding domain.pddl, template.pddl, hyps.dat,
    /// real_hyp.dat, and obs.dat.
    #[arg(long)]
    bundle: PathBuf,
    /// Landmark extractor: `ex` (exhaustive) or `rhw` (back-chaining).
    #[arg(long, default_value = "ex", value_parser = parse_extractor)]
    extractor: Extractor,
    /// Scoring heuristic: `completion` or `uniqueness`.
    #[arg(long, default_value = "completion", value_parser = parse_heuristic)]
    heuristic: Heuristic,
    /// Fraction of the observation sequence to reveal, a decimal in [0, 1];
    /// the prefix length is the floor of (observations × lambda).
    #[arg(long, default_value = "1", value_parser = parse_lambda)]
    lambda: Lambda,
    /// Drop landmarks already true in the initial state before scoring
    /// (by default every landmark counts).
    #[arg(long)]
    no_init_landmarks: bool,
    /// Refuse to ground when the naive instantiation count exceeds this cap.
    #[arg(long, default_value_t = DEFAULT_GROUND_CAP)]
    ground_cap: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Bundle directories or suite roots, comma separated. A directory
    /// containing domain.pddl is taken as one bundle; any other directory
    /// is searched recursively for bundles.
    #[arg(long, required = true, value_delimiter = ',')]
    bundles: Vec<PathBuf>,
    /// Extractors to evaluate, comma separated (`ex,rhw`).
    #[arg(long, value_delimiter = ',', default_value = "ex", value_parser = parse_extractor)]
    extractor: Vec<Extractor>,
    /// Heuristics to evaluate, comma separated (`completion,uniqueness`).
    #[arg(long, value_delimiter = ',', default_value = "completion", value_parser = parse_heuristic)]
    heuristic: Vec<Heuristic>,
    /// Whether initial-state landmarks are kept, comma separated
    /// (`true,false` evaluates both settings).
    #[arg(long, value_delimiter = ',', default_value = "false")]
    include_init: Vec<bool>,
    /// Observation fractions to evaluate, comma separated decimals in [0, 1].
    /// Defaults to the ten-step grid 0.1,0.2,...,1.0.
    #[arg(long, value_delimiter = ',', value_parser = parse_lambda)]
    lambda: Option<Vec<Lambda>>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-(variant, heuristic) precision tables (gnuplot-style
    /// whitespace-separated columns) into this directory.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Worker threads for extraction and scoring (default: all processors).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Refuse to ground when the naive instantiation count exceeds this cap.
    #[arg(long, default_value_t = DEFAULT_GROUND_CAP)]
    ground_cap: u64,
}

#[derive(Args)]
struct MutateArgs {
    /// Source bundle directory, or a suite root whose bundles are mirrored
    /// recursively.
    #[arg(long)]
    bundle: PathBuf,
    /// Destination directory for the mutated copy.
    #[arg(long)]
    out: PathBuf,
    /// True-goal selection after mutation: `random`, `longest`, or
    /// `shortest` (by goal fact count, extremes break ties canonically).
    #[arg(long, value_parser = parse_variant)]
    variant: VariantKind,
    /// Seed driving goal mutation, goal selection, and observation planning.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse after the observation planner expands this many states.
    #[arg(long, default_value_t = PlannerConfig::default().node_cap)]
    node_cap: usize,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Bundle directory holding domain.pddl, template.pddl, hyps.dat,
    /// real_hyp.dat, and obs.dat.
    #[arg(long)]
    bundle: PathBuf,
    /// Extractors to check, comma separated (`ex,rhw`).
    #[arg(long, value_delimiter = ',', default_value = "ex,rhw", value_parser = parse_extractor)]
    extractor: Vec<Extractor>,
    /// Refuse after plan-space enumeration visits this many distinct states.
    #[arg(long, default_value_t = OracleConfig::default().state_cap)]
    state_cap: usize,
    /// Refuse after plan-space enumeration takes this many search steps.
    #[arg(long, default_value_t = OracleConfig::default().step_cap)]
    step_cap: u64,
    /// Refuse to ground when the naive instantiation count exceeds this cap.
    #[arg(long, default_value_t = DEFAULT_GROUND_CAP)]
    ground_cap: u64,
}

fn parse_extractor(s: &str) -> Result<Extractor, String> {
    s.parse()
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    s.parse()
}

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    s.parse()
}

fn parse_variant(s: &str) -> Result<VariantKind, String> {
    s.parse()
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter("LMGR_LOG")).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

/// 2 for resource-cap refusals anywhere in the error chain, 1 otherwise.
fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<OracleError>() {
            if matches!(
                e,
                OracleError::StateCapExceeded { .. } | OracleError::StepCapExceeded { .. }
            ) {
                return 2;
            }
        }
        if let Some(e) = cause.downcast_ref::<PlannerError>() {
            if matches!(e, PlannerError::NodeCapExceeded { .. }) {
                return 2;
            }
        }
        if let Some(e) = cause.downcast_ref::<GroundError>() {
            if matches!(e, GroundError::TooLarge { .. }) {
                return 2;
            }
        }
        // `BundleError::Ground` is transparent, so the inner `GroundError`
        // never shows up as its own chain element.
        if let Some(e) = cause.downcast_ref::<BundleError>() {
            if matches!(e, BundleError::Ground(GroundError::TooLarge { .. })) {
                return 2;
            }
        }
    }
    1
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Extract(args) => cmd_extract(args),
        Command::Recognize(args) => cmd_recognize(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Mutate(args) => cmd_mutate(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p)
                .with_context(|| format!("creating output file {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

/// Every directory under `roots` that contains a `domain.pddl`, sorted.
/// A bundle directory is not searched further down.
fn discover_bundles(roots: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, found: &mut BTreeSet<PathBuf>) -> Result<()> {
        if dir.join("domain.pddl").is_file() {
            found.insert(dir.to_path_buf());
            return Ok(());
        }
        if !dir.is_dir() {
            bail!("{} is not a directory", dir.display());
        }
        let entries =
            fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, found)?;
            }
        }
        Ok(())
    }

    let mut found = BTreeSet::new();
    for root in roots {
        walk(root, &mut found)?;
    }
    if found.is_empty() {
        bail!(
            "no bundle directories (containing domain.pddl) under {}",
            roots
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(found.into_iter().collect())
}

fn fmt_disjuncts(problem: &GroundedProblem, disjuncts: &State) -> Vec<String> {
    disjuncts
        .iter()
        .map(|f| problem.fact(f).to_string())
        .collect()
}

fn cmd_extract(args: ExtractArgs) -> Result<i32> {
    let bundle = load_bundle_with_cap(&args.bundle, args.ground_cap)
        .with_context(|| format!("loading bundle {}", args.bundle.display()))?;
    let mut out = open_output(args.out.as_deref())?;
    for (goal_index, goal) in bundle.goals.iter().enumerate() {
        let set = extract(&bundle.problem, goal, args.extractor);
        for lm in set.iter() {
            let line = json!({
                "goal_index": goal_index,
                "disjuncts": fmt_disjuncts(&bundle.problem, lm.disjuncts()),
                "category": lm.category().as_str(),
                "extractor": args.extractor.as_str(),
            });
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(0)
}

fn cmd_recognize(args: RecognizeArgs) -> Result<i32> {
    let bundle = load_bundle_with_cap(&args.bundle, args.ground_cap)
        .with_context(|| format!("loading bundle {}", args.bundle.display()))?;
    let cfg = RecognitionConfig::new(args.extractor, args.heuristic, !args.no_init_landmarks);
    let horizon = bundle.observations.len();
    let used = args.lambda.floor_of(horizon);
    let result = recognize(&bundle.problem, &bundle.goals, &bundle.observations[..used], &cfg);
    let scores: Vec<_> = result
        .scores
        .iter()
        .map(|s| {
            json!({
                "goal_index": s.goal_index,
                "score": to_f64(&s.score),
                "exact": s.score.to_string(),
                "achieved": s.achieved_count,
                "total": s.total_count,
            })
        })
        .collect();
    let report = json!({
        "bundle": bundle.name,
        "extractor": args.extractor.as_str(),
        "heuristic": args.heuristic.as_str(),
        "include_initial_state_landmarks": !args.no_init_landmarks,
        "lambda": args.lambda.to_string(),
        "observations_total": horizon,
        "observations_used": used,
        "scores": scores,
        "recognized": result.recognized,
        "true_goal": bundle.true_goal,
        "true_goal_recognized": result.is_recognized(bundle.true_goal),
    });
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    Ok(0)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32> {
    let dirs = discover_bundles(&args.bundles)?;
    log::info!("loading {} bundles", dirs.len());
    let problems = load_online_problems(&dirs, args.ground_cap)?;

    let mut configs = Vec::new();
    for &extractor in &args.extractor {
        for &heuristic in &args.heuristic {
            for &include_init in &args.include_init {
                let cfg = RecognitionConfig::new(extractor, heuristic, include_init);
                if !configs.contains(&cfg) {
                    configs.push(cfg);
                }
            }
        }
    }
    let lambdas = match args.lambda {
        Some(mut ls) => {
            ls.sort();
            ls.dedup();
            ls
        }
        None => Lambda::grid(),
    };

    let start = Instant::now();
    let rows = run_in_pool(args.jobs, || evaluate(&problems, &configs, &lambdas))?;
    log::info!(
        "scored {} problems x {} configs x {} lambdas in {:.2?}",
        problems.len(),
        configs.len(),
        lambdas.len(),
        start.elapsed()
    );

    let mut out = open_output(args.out.as_deref())?;
    write_csv(&rows, &mut out).context("writing CSV")?;
    out.flush()?;

    if let Some(dir) = &args.plot_dir {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating plot directory {}", dir.display()))?;
        let files = plot_data(&rows);
        for (name, content) in &files {
            let path = dir.join(name);
            fs::write(&path, content)
                .with_context(|| format!("writing plot data {}", path.display()))?;
        }
        log::info!("wrote {} plot data files to {}", files.len(), dir.display());
    }
    Ok(0)
}

fn run_in_pool<T: Send>(jobs: Option<u64>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .context("building worker thread pool")?;
            Ok(pool.install(work))
        }
    }
}

fn cmd_mutate(args: MutateArgs) -> Result<i32> {
    let sources = discover_bundles(&[args.bundle.clone()])?;
    let variant = DatasetVariant {
        kind: args.variant,
        seed: args.seed,
    };
    let planner = PlannerConfig {
        seed: args.seed,
        node_cap: args.node_cap,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for src in &sources {
        let rel = src
            .strip_prefix(&args.bundle)
            .expect("discovered bundle lies under the source root");
        let dst = if rel.as_os_str().is_empty() {
            args.out.clone()
        } else {
            args.out.join(rel)
        };
        let report = mutate_bundle(src, &dst, variant, &planner)
            .with_context(|| format!("mutating bundle {}", src.display()))?;
        let line = json!({
            "bundle": report.bundle,
            "output": dst.display().to_string(),
            "variant": args.variant.as_str(),
            "seed": args.seed,
            "true_goal": report.true_goal,
            "observations": report.num_observations,
            "kept_original": report.kept_original,
        });
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<i32> {
    let bundle = load_bundle_with_cap(&args.bundle, args.ground_cap)
        .with_context(|| format!("loading bundle {}", args.bundle.display()))?;
    let config = OracleConfig {
        state_cap: args.state_cap,
        step_cap: args.step_cap,
    };
    let mut confirmed = 0usize;
    let mut violations = 0usize;
    for (goal_index, goal) in bundle.goals.iter().enumerate() {
        let scoped = bundle.problem.with_goal(goal.clone());
        let space = match PlanSpace::enumerate(&scoped, &config) {
            Ok(space) => space,
            Err(OracleError::GoalUnreachable) => {
                println!("goal {goal_index}: unreachable, no plans to contradict any landmark");
                continue;
            }
            Err(err) => {
                return Err(anyhow::Error::new(err)
                    .context(format!("enumerating the plan space of goal {goal_index}")));
            }
        };
        for &extractor in &args.extractor {
            let set = extract(&bundle.problem, goal, extractor);
            for lm in set.iter() {
                if space.is_disjunctive_landmark(lm.disjuncts()) {
                    confirmed += 1;
                } else {
                    violations += 1;
                    println!(
                        "VIOLATION goal {goal_index} extractor {} landmark {}",
                        extractor.as_str(),
                        fmt_disjuncts(&bundle.problem, lm.disjuncts()).join(" | ")
                    );
                }
            }
        }
    }
    println!(
        "{confirmed} landmarks confirmed, {violations} violations across {} goals",
        bundle.goals.len()
    );
    Ok(if violations == 0 { 0 } else { 1 })
}

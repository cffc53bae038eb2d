use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mbm::{
    brute_force_nondominated, classify_point, local_mbm_run, mbm_run, pareto_sweep,
    weighting_method_solve, Classification, Grid, RunStatus, StartStrategy,
};
use mbm_cli::config::{self, RunConfigFile};
use mbm_cli::output;
use mbm_cli::{CliResult, Failure};

/// Multiobjective barrier method solver.
///
/// Exit codes: 0 success / converged, 1 invalid configuration or input,
/// 2 iteration budget exhausted, 3 subproblem failure.
#[derive(Parser)]
#[command(name = "mbm", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured run and write its iteration trace
    Run(RunArgs),
    /// Run a scalarizer family and write the retrieved front
    Sweep(SweepArgs),
    /// Grid oracle: nondominated set extraction or candidate classification
    Oracle(OracleArgs),
    /// Weighted-sum baseline for comparison
    Weighting(WeightingArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the trace output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reserved; all current algorithms are deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML run configuration with a `[sweep]` section
    #[arg(long)]
    config: PathBuf,
    /// Override the front output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent member runs (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// Reserved; all current algorithms are deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Built-in problem name
    #[arg(long)]
    problem: String,
    /// Instance parameter as key=value (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Grid lower bounds, comma separated (default: instance bounds)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lower: Option<Vec<f64>>,
    /// Grid upper bounds, comma separated (default: instance bounds)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    upper: Option<Vec<f64>>,
    /// Points per dimension, comma separated (default: 501 in 1-D, 201 in 2-D)
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    /// Classify the points in this CSV instead of extracting the front
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Classification tolerance
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WeightingArgs {
    /// Built-in problem name
    #[arg(long)]
    problem: String,
    /// Instance parameter as key=value (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Single weight vector, comma separated (mutually exclusive with --grid)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    /// Sweep a uniform grid of this many first-weight values
    #[arg(long)]
    grid: Option<usize>,
    /// Start point, comma separated (default: instance start)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    start: Option<Vec<f64>>,
    /// Inner iteration budget per weight
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}


/// Prints without panicking if stdout is a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Weighting(args) => cmd_weighting(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}

fn load_config(path: &Path) -> CliResult<RunConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("could not read {}: {e}", path.display())))?;
    config::parse_config(&text)
}

fn cmd_run(args: RunArgs) -> CliResult<u8> {
    let file = load_config(&args.config)?;
    let built = config::build(&file)?;
    let out_path = args
        .out
        .or(file.output.trace)
        .ok_or_else(|| Failure::config("output.trace: required for the run command"))?;

    let runner = if built.mbm.local_bounds.is_some() {
        local_mbm_run
    } else {
        mbm_run
    };
    let trace = runner(
        &built.instance.problem,
        &built.barrier,
        &built.phi,
        &built.start,
        &built.mbm,
    )
    .map_err(|e| Failure::config(format!("run failed: {e}")))?;

    let csv = output::trace_csv(
        &trace,
        built.instance.problem.decision_dim(),
        built.instance.problem.objective_count(),
    );
    output::write_atomic_or_fail(&out_path, &csv)?;

    let last = trace.rows.last();
    say!(
        "{}: {} outer iterations, final x = {:?}, trace written to {}",
        output::status_label(&trace.status),
        trace.rows.len(),
        last.map(|r| r.x.clone()).unwrap_or_default(),
        out_path.display()
    );
    Ok(match trace.status {
        RunStatus::Converged => 0,
        RunStatus::OuterBudgetExhausted => 2,
        RunStatus::InnerFailure(_) => 3,
    })
}

fn cmd_sweep(args: SweepArgs) -> CliResult<u8> {
    let file = load_config(&args.config)?;
    let built = config::build(&file)?;
    let sweep = file
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::config("sweep: section required for the sweep command"))?;
    let out_path = args
        .out
        .or(file.output.front.clone())
        .ok_or_else(|| Failure::config("output.front: required for the sweep command"))?;

    let family = config::build_family(sweep, built.instance.problem.objective_count())?;
    let label_len = family[0].label.len();
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
    let entries = pareto_sweep(
        &built.instance.problem,
        &built.barrier,
        &family,
        &built.mbm,
        &StartStrategy::Fixed(built.start.clone()),
        workers,
    )
    .map_err(|e| Failure::config(format!("sweep failed: {e}")))?;

    let mut classifications: Vec<Option<Classification>> = vec![None; entries.len()];
    if sweep.classify {
        let n = built.instance.problem.decision_dim();
        let counts = config::oracle_counts(sweep, n)?;
        let grid = Grid::new(
            built.instance.grid_bounds.0.clone(),
            built.instance.grid_bounds.1.clone(),
            counts,
        )
        .map_err(|e| Failure::config(format!("sweep.oracle_points: {e}")))?;
        for (slot, entry) in classifications.iter_mut().zip(&entries) {
            if let Ok(trace) = &entry.outcome {
                if let Some(x) = trace.final_x() {
                    *slot = Some(
                        classify_point(&built.instance.problem, x, &grid, 1e-3)
                            .map_err(|e| Failure::config(format!("classification failed: {e}")))?,
                    );
                }
            }
        }
    }

    let csv = output::front_csv(&entries, &built.instance, label_len, &classifications);
    output::write_atomic_or_fail(&out_path, &csv)?;

    let converged = entries
        .iter()
        .filter(|e| matches!(&e.outcome, Ok(t) if t.status == RunStatus::Converged))
        .count();
    say!(
        "{converged}/{} members converged, front written to {}",
        entries.len(),
        out_path.display()
    );
    Ok(if converged == entries.len() { 0 } else { 2 })
}

fn parse_params(pairs: &[String]) -> CliResult<std::collections::BTreeMap<String, f64>> {
    let mut map = std::collections::BTreeMap::new();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--param {pair}: expected KEY=VALUE")))?;
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("--param {pair}: value is not a number")))?;
        map.insert(key.trim().to_string(), parsed);
    }
    Ok(map)
}

fn instance_from_flags(
    name: &str,
    params: &[String],
) -> CliResult<mbm::ProblemInstance> {
    let section = config::ProblemSection {
        name: name.to_string(),
        params: parse_params(params)?,
    };
    config::build_instance(&section)
}

fn oracle_grid(args: &OracleArgs, instance: &mbm::ProblemInstance) -> CliResult<Grid> {
    let n = instance.problem.decision_dim();
    let lower = args.lower.clone().unwrap_or_else(|| instance.grid_bounds.0.clone());
    let upper = args.upper.clone().unwrap_or_else(|| instance.grid_bounds.1.clone());
    let points = match &args.points {
        Some(p) => p.clone(),
        None => match n {
            1 => vec![501],
            2 => vec![201, 201],
            _ => {
                return Err(Failure::config(
                    "--points: required for problems with more than two variables",
                ))
            }
        },
    };
    if lower.len() != n || upper.len() != n || points.len() != n {
        return Err(Failure::config(format!(
            "grid bounds and point counts must have {n} entries per dimension"
        )));
    }
    Grid::new(lower, upper, points).map_err(|e| Failure::config(format!("grid: {e}")))
}

fn cmd_oracle(args: OracleArgs) -> CliResult<u8> {
    let instance = instance_from_flags(&args.problem, &args.params)?;
    let grid = oracle_grid(&args, &instance)?;
    match &args.candidates {
        None => {
            let front = brute_force_nondominated(&instance.problem, &grid)
                .map_err(|e| Failure::config(format!("oracle failed: {e}")))?;
            let csv = output::nondominated_csv(&front, &instance);
            output::write_atomic_or_fail(&args.out, &csv)?;
            say!(
                "{} nondominated grid points written to {}",
                front.len(),
                args.out.display()
            );
        }
        Some(path) => {
            let n = instance.problem.decision_dim();
            let candidates = output::read_candidates(path, n)?;
            let mut classes = Vec::with_capacity(candidates.len());
            for x in &candidates {
                classes.push(
                    classify_point(&instance.problem, x, &grid, args.tol)
                        .map_err(|e| Failure::config(format!("candidate {x:?}: {e}")))?,
                );
            }
            let csv = output::classification_csv(&candidates, &classes, n);
            output::write_atomic_or_fail(&args.out, &csv)?;
            say!(
                "{} candidates classified, results written to {}",
                candidates.len(),
                args.out.display()
            );
        }
    }
    Ok(0)
}

fn cmd_weighting(args: WeightingArgs) -> CliResult<u8> {
    let instance = instance_from_flags(&args.problem, &args.params)?;
    let problem = &instance.problem;
    let start = match &args.start {
        Some(point) => point.clone(),
        None => problem
            .start()
            .ok_or_else(|| Failure::config("--start: required (the instance has no built-in start)"))?
            .to_vec(),
    };
    let mut rows: Vec<(Vec<f64>, mbm::WeightingOutcome)> = Vec::new();
    match (&args.alpha, args.grid) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(Failure::config(
                "exactly one of --alpha and --grid is required",
            ));
        }
        (Some(alpha), None) => {
            let result = weighting_method_solve(problem, alpha, &start, args.budget)
                .map_err(|e| Failure::config(format!("--alpha: {e}")))?;
            rows.push((result.weights, result.outcome));
        }
        (None, Some(grid)) => {
            if grid < 2 {
                return Err(Failure::config("--grid: needs at least two points"));
            }
            if problem.objective_count() != 2 {
                return Err(Failure::config(
                    "--grid: the weight sweep needs a biobjective problem",
                ));
            }
            for i in 0..grid {
                let w1 = i as f64 / (grid - 1) as f64;
                let result =
                    weighting_method_solve(problem, &[w1, 1.0 - w1], &start, args.budget)
                        .map_err(|e| Failure::config(format!("weight {w1}: {e}")))?;
                rows.push((result.weights, result.outcome));
            }
            let unbounded = rows
                .iter()
                .filter(|(_, o)| matches!(o, mbm::WeightingOutcome::Unbounded))
                .count();
            say!("failure fraction: {:.4}", unbounded as f64 / grid as f64);
        }
    }
    let csv = output::weighting_csv(
        &rows,
        problem.objective_count(),
        problem.decision_dim(),
    );
    output::write_atomic_or_fail(&args.out, &csv)?;
    say!("{} weighting rows written to {}", rows.len(), args.out.display());
    Ok(0)
}

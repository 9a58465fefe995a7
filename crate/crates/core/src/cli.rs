//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::experiment::{compare, solve, RunFlags, RunSetup};
use crate::generate::{generate, GenParams, InstanceKind};
use crate::io::{read_descriptor, read_partition, read_points, write_points, PartitionStrategy};
use crate::metric::{MetricInstance, ValidationPolicy};
use crate::mpcsim::Partition;
use crate::solvers::{oracle_fits, Algorithm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kcenter",
    version,
    about = "Distributed metric k-center on a simulated MPC cluster"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic instance.
    Generate(GenerateArgs),
    /// Run one algorithm (or all of them) and write a report.
    Solve(SolveArgs),
    /// Run every algorithm over several partitions and check the bounds.
    Compare(CompareArgs),
    /// Check that a points file is a valid metric.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "uniform-random-euclidean")]
    pub kind: String,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 100.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 20)]
    pub max_weight: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Points file; may be omitted when --descriptor is given.
    pub instance: Option<PathBuf>,
    /// JSON run descriptor; overrides the other flags.
    #[arg(long)]
    pub descriptor: Option<PathBuf>,
    /// gonzalez, pruning, exact, alg2, baseline4 or all.
    #[arg(long, default_value = "alg2")]
    pub alg: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long = "L", visible_alias = "machines", default_value_t = 1)]
    pub machines: usize,
    /// Per-machine memory budget in points.
    #[arg(long, env = "KCENTER_MEMORY")]
    pub memory: Option<usize>,
    #[arg(long, env = "KCENTER_ROUND_LIMIT")]
    pub round_limit: Option<usize>,
    /// round-robin, random or file.
    #[arg(long, default_value = "round-robin")]
    pub partition: String,
    #[arg(long)]
    pub partition_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub compat_literal_alg1: bool,
    #[arg(long)]
    pub compat_literal_select: bool,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV summary path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long = "L", visible_alias = "machines", default_value_t = 2)]
    pub machines: usize,
    #[arg(long, env = "KCENTER_MEMORY")]
    pub memory: Option<usize>,
    /// Comma-separated partition seeds.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub instance: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError(format!("{}: {e}", path.display())))
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn parse_strategy(s: &str) -> Result<PartitionStrategy, CliError> {
    Ok(match s {
        "round-robin" => PartitionStrategy::RoundRobin,
        "random" | "seeded-random" => PartitionStrategy::Random,
        "file" | "by-file" => PartitionStrategy::File,
        other => return Err(CliError(format!("unknown partition strategy {other:?}"))),
    })
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    if s == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    s.split(',')
        .map(|a| {
            Algorithm::parse(a.trim()).ok_or_else(|| CliError(format!("unknown algorithm {a:?}")))
        })
        .collect()
}

fn run_generate(args: GenerateArgs) -> Result<i32, CliError> {
    let kind: InstanceKind = args.kind.parse()?;
    let params = GenParams {
        n: args.n,
        dim: args.dim,
        extent: args.extent,
        clusters: args.clusters,
        spread: args.spread,
        separation: args.separation,
        max_weight: args.max_weight,
    };
    let instance = generate(kind, &params, args.seed)?;
    write_points(&args.out, &instance)?;
    Ok(EXIT_OK)
}

struct SolvePlan {
    instance_path: PathBuf,
    algorithms: Vec<Algorithm>,
    /// `all` was requested, so the exact solver may be dropped.
    all: bool,
    k: usize,
    machines: usize,
    memory: Option<usize>,
    strategy: PartitionStrategy,
    partition_file: Option<PathBuf>,
    flags: RunFlags,
}

fn plan_solve(args: &SolveArgs) -> Result<SolvePlan, CliError> {
    if let Some(path) = &args.descriptor {
        let d = read_descriptor(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        return Ok(SolvePlan {
            instance_path: resolve(&d.instance),
            algorithms: parse_algorithms(&d.algorithm)?,
            all: d.algorithm == "all",
            k: d.k,
            machines: d.machines,
            memory: d.memory,
            strategy: d.partition,
            partition_file: d.partition_file.as_deref().map(resolve),
            flags: RunFlags {
                partition: d.partition,
                seed: d.seed,
                compat_literal_alg1: d.compat_literal_alg1,
                compat_literal_select: d.compat_literal_select,
            },
        });
    }
    let instance_path = args
        .instance
        .clone()
        .ok_or_else(|| CliError("an instance path or --descriptor is required".into()))?;
    let strategy = parse_strategy(&args.partition)?;
    Ok(SolvePlan {
        instance_path,
        algorithms: parse_algorithms(&args.alg)?,
        all: args.alg == "all",
        k: args.k,
        machines: args.machines,
        memory: args.memory,
        strategy,
        partition_file: args.partition_file.clone(),
        flags: RunFlags {
            partition: strategy,
            seed: args.seed,
            compat_literal_alg1: args.compat_literal_alg1,
            compat_literal_select: args.compat_literal_select,
        },
    })
}

fn build_partition(instance: &MetricInstance, plan: &SolvePlan) -> Result<Partition, CliError> {
    if plan.machines == 0 {
        return Err(CliError("--L must be at least 1".into()));
    }
    Ok(match plan.strategy {
        PartitionStrategy::RoundRobin => Partition::round_robin(instance.len(), plan.machines),
        PartitionStrategy::Random => {
            Partition::seeded_random(instance.len(), plan.machines, plan.flags.seed)
        }
        PartitionStrategy::File => {
            let path = plan
                .partition_file
                .as_ref()
                .ok_or_else(|| CliError("--partition file needs --partition-file".into()))?;
            read_partition(path, instance.len(), plan.machines)?
        }
    })
}

fn run_solve(args: SolveArgs) -> Result<i32, CliError> {
    let plan = plan_solve(&args)?;
    if plan.k == 0 {
        return Err(CliError("--k must be at least 1".into()));
    }
    let instance = read_points(&plan.instance_path, &ValidationPolicy::default())?;
    let partition = build_partition(&instance, &plan)?;
    let mut setup = RunSetup::new(plan.k, partition).with_flags(plan.flags.clone());
    if let Some(m) = plan.memory {
        setup.config.memory = m;
    }
    if let Some(limit) = args.round_limit {
        setup.config.round_limit = limit;
    }
    let mut algorithms = plan.algorithms.clone();
    let mut skipped = None;
    if plan.all && !oracle_fits(instance.len(), plan.k) {
        algorithms.retain(|&a| a != Algorithm::Exact);
        skipped = Some(format!(
            "exact solver skipped: {} points with k = {} is beyond the oracle limits",
            instance.len(),
            plan.k
        ));
    }
    let path = plan.instance_path.display().to_string();
    let mut report = solve(&instance, Some(&path), &algorithms, &setup)?;
    report.warnings.extend(skipped);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.out.as_deref(), &report.to_json_pretty())?;
    if let Some(csv) = &args.csv {
        fs::write(csv, report.csv_summary())
            .map_err(|e| CliError(format!("{}: {e}", csv.display())))?;
    }
    Ok(if report.algorithms.iter().all(|a| a.feasible) {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

fn run_compare(args: CompareArgs) -> Result<i32, CliError> {
    let instance = read_points(&args.instance, &ValidationPolicy::default())?;
    if args.k == 0 || args.machines == 0 {
        return Err(CliError("--k and --L must be at least 1".into()));
    }
    let path = args.instance.display().to_string();
    let report = compare(
        &instance,
        Some(&path),
        args.k,
        args.machines,
        args.memory,
        &args.seeds,
    )?;
    emit(
        args.out.as_deref(),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    for row in &report.aggregates {
        eprintln!(
            "{:<10} runs {:>3}  max ratio {:>8}  mean ratio {:>8}  violations {}",
            row.algorithm.name(),
            row.runs,
            row.max_ratio.map_or("-".into(), |v| format!("{v:.4}")),
            row.mean_ratio.map_or("-".into(), |v| format!("{v:.4}")),
            row.violations
        );
    }
    Ok(if report.violations == 0 {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

#[derive(Serialize)]
struct ValidationSummary {
    path: String,
    n: usize,
    metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    valid: bool,
}

fn run_validate(args: ValidateArgs) -> Result<i32, CliError> {
    let instance = read_points(&args.instance, &ValidationPolicy::default())?;
    let summary = ValidationSummary {
        path: args.instance.display().to_string(),
        n: instance.len(),
        metric: instance.kind().to_string(),
        dimension: instance.dimension(),
        valid: true,
    };
    emit(
        None,
        &serde_json::to_string(&summary).expect("summary serializes"),
    )?;
    Ok(EXIT_OK)
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Solve(a) => run_solve(a),
        Command::Compare(a) => run_compare(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

//! Command-line interface. The binary only forwards to [`run`].
//!
//! Exit codes: 0 on success, 2 for invalid input or usage, 3 when a solver
//! fails. Errors are printed to stderr as one JSON object.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::clustering::{cluster_instance, ClusterModel};
use crate::datagen::{self, GeneratorKind, GeneratorSpec, InterestSource, SlotGrid};
use crate::error::{Error, Result};
use crate::io::{self as fio, InstanceFormat};
use crate::lp::build_joint_lp;
use crate::metrics::MetricsReport;
use crate::model::{MultiRoundSchedule, Schedule, SchedulingInstance};
use crate::pipeline::{
    self, partition_by_priority, priority_report, run_priority_schedule, ClusterSpec, PriorityPlan,
    SweepConfig,
};
use crate::solvers::{
    scalarized_objective, Diagnostics, Method, ObjectiveSpec, Solver, DEFAULT_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fairconf",
    version,
    about = "Fair scheduling of virtual-conference talks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Solve an instance and write the schedule and its metrics.
    Schedule(ScheduleArgs),
    /// Score an existing schedule.
    Evaluate(EvaluateArgs),
    /// Solve over a grid of fairness weights plus baselines.
    Sweep(SweepArgs),
    /// Schedule talks in priority rounds, optionally repeating groups.
    Priority(PriorityArgs),
    /// Cluster participants and write the reduced instance.
    Cluster(ClusterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Uniform,
    Timezone,
    Partition,
    Fatrec,
    Recsys,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterestArg {
    Bernoulli,
    Normal,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub kind: Option<KindArg>,
    /// Generator description as JSON; replaces the other generator flags.
    #[arg(long, conflicts_with = "kind")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub l: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Slot length in minutes for timezone instances.
    #[arg(long, default_value_t = 30)]
    pub slot_minutes: i64,
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub interest: InterestArg,
    /// Comma-separated positive integers for the partition construction.
    #[arg(long, value_delimiter = ',')]
    pub multiset: Vec<u64>,
    /// Output file (json) or directory (csv).
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Print the instance JSON on stdout instead of writing a file.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Em,
    Iam,
    Pfair,
    Sfair,
    Mfairconf,
    Exact,
    Rrfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FairSolverArg {
    Rrfs,
    Exact,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, short)]
    pub instance: PathBuf,
    /// `json` or `csv` (a directory with slots.csv, interest.csv, availability.csv).
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct ClusterFlags {
    /// Solve on k participant clusters; metrics use all participants.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub cluster_seed: u64,
}

impl ClusterFlags {
    fn spec(&self) -> Option<ClusterSpec> {
        self.clusters.map(|k| ClusterSpec {
            k,
            seed: self.cluster_seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct WeightFlags {
    #[arg(long = "lambda1", visible_alias = "l1")]
    pub lambda1: Option<f64>,
    #[arg(long = "lambda2", visible_alias = "l2")]
    pub lambda2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub w_eff: f64,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub weights: WeightFlags,
    /// Solver used by pfair, sfair and mfairconf.
    #[arg(long, value_enum, default_value = "rrfs")]
    pub solver: FairSolverArg,
    /// Largest number of assignments the exact solver may enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[command(flatten)]
    pub cluster: ClusterFlags,
    /// Schedule JSON output.
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    /// Metrics JSON output.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Write the relaxed joint program in LP text form (debugging aid).
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    /// Print `{"schedule": ..., "result": ...}` on stdout.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, short)]
    pub schedule: PathBuf,
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethodArg {
    Exact,
    Rrfs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum)]
    pub method: SweepMethodArg,
    /// Comma-separated lambda1 grid.
    #[arg(
        long = "l1",
        visible_alias = "lambda1",
        value_delimiter = ',',
        required = true
    )]
    pub lambda1: Vec<f64>,
    /// Comma-separated lambda2 grid.
    #[arg(
        long = "l2",
        visible_alias = "lambda2",
        value_delimiter = ',',
        required = true
    )]
    pub lambda2: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub w_eff: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[command(flatten)]
    pub cluster: ClusterFlags,
    /// Concurrent grid cells.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Fill runtime_ms with wall-clock times (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
    /// CSV report (two decimals).
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    /// Full-precision JSON report.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print the CSV on stdout.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct PriorityArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    /// Number of priority groups.
    #[arg(long, default_value_t = 3)]
    pub groups: usize,
    /// Round sequence of 1-based group labels, e.g. 1231.
    #[arg(long, default_value = "123")]
    pub rounds: String,
    #[arg(long, value_enum, default_value = "rrfs")]
    pub method: MethodArg,
    #[command(flatten)]
    pub weights: WeightFlags,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    /// Report JSON with per-group NEC statistics.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reduced instance JSON.
    #[arg(long, short, required_unless_present = "stdout")]
    pub out: Option<PathBuf>,
    /// Fitted model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub stdout: bool,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("FAIRCONF_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Prints the error as JSON on stderr and maps it to an exit code.
pub fn report_error(e: &Error) -> i32 {
    let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{body}");
    exit_code(e)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_error() {
        EXIT_SOLVER
    } else {
        EXIT_INVALID
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Schedule(a) => cmd_schedule(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Priority(a) => cmd_priority(&a),
        Command::Cluster(a) => cmd_cluster(&a),
    }
}

fn load(input: &InstanceArgs) -> Result<SchedulingInstance> {
    let format: InstanceFormat = input.format.parse()?;
    fio::load_instance(&input.instance, format)
}

fn emit(stdout: bool, path: Option<&Path>, text: &str) -> Result<()> {
    if stdout {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(Path::new("<stdout>"), e))?;
    }
    if let Some(p) = path {
        fio::write(p, &format!("{text}\n"))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let instance = match (&a.spec, a.kind) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let spec: GeneratorSpec =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            datagen::generate(&spec)?
        }
        (None, Some(KindArg::Uniform)) => datagen::gen_uniform(a.m, a.n, a.l, a.seed)?,
        (None, Some(KindArg::Partition)) => datagen::generate(&GeneratorSpec {
            kind: GeneratorKind::Partition,
            multiset: Some(a.multiset.clone()),
            ..blank_spec(a)
        })?,
        (None, Some(KindArg::Timezone)) => datagen::generate(&GeneratorSpec {
            kind: GeneratorKind::Timezone,
            grid: Some(SlotGrid::new(a.l, a.slot_minutes)),
            interest: Some(match a.interest {
                InterestArg::Bernoulli => InterestSource::Bernoulli,
                InterestArg::Normal => InterestSource::Normal,
            }),
            ..blank_spec(a)
        })?,
        (None, Some(KindArg::Fatrec)) => datagen::fatrec_like(a.seed)?,
        (None, Some(KindArg::Recsys)) => datagen::recsys_like(a.seed)?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "--kind or --spec is required".into(),
            ))
        }
    };
    let format: InstanceFormat = a.format.parse()?;
    if a.stdout {
        emit(true, None, &fio::instance_to_json(&instance))?;
    }
    if let Some(out) = &a.out {
        match format {
            InstanceFormat::Json => fio::save_instance(&instance, out)?,
            InstanceFormat::CsvTriplet => fio::save_instance_csv(&instance, out)?,
        }
    }
    log::info!(
        "generated instance with m={}, n={}, l={}",
        instance.m(),
        instance.n(),
        instance.l()
    );
    Ok(())
}

fn blank_spec(a: &GenerateArgs) -> GeneratorSpec {
    GeneratorSpec {
        kind: GeneratorKind::Uniform,
        m: a.m,
        n: a.n,
        l: a.l,
        seed: a.seed,
        grid: None,
        offsets: None,
        interest: None,
        popularity: None,
        multiset: None,
    }
}

/// Solver and weights selected by a method name and its flags.
pub fn resolve_method(
    method: MethodArg,
    weights: &WeightFlags,
    fair_solver: FairSolverArg,
    budget: u128,
) -> Result<(Solver, ObjectiveSpec)> {
    let fair = match fair_solver {
        FairSolverArg::Rrfs => Solver::Rrfs,
        FairSolverArg::Exact => Solver::Exact { budget },
    };
    let lambdas = || -> Result<(f64, f64)> {
        match (weights.lambda1, weights.lambda2) {
            (Some(l1), Some(l2)) => Ok((l1, l2)),
            _ => Err(Error::InvalidArgument(format!(
                "--method {} requires --lambda1 and --lambda2",
                method_name(method)
            ))),
        }
    };
    let pick = match method {
        MethodArg::Em => (Solver::Em, ObjectiveSpec::efficiency()),
        MethodArg::Iam => (Solver::Iam, ObjectiveSpec::efficiency()),
        MethodArg::Pfair => (fair, ObjectiveSpec::pfair()),
        MethodArg::Sfair => (fair, ObjectiveSpec::sfair()),
        MethodArg::Mfairconf => {
            let (l1, l2) = lambdas()?;
            (fair, ObjectiveSpec::new(weights.w_eff, l1, l2))
        }
        MethodArg::Exact => {
            let (l1, l2) = lambdas()?;
            (
                Solver::Exact { budget },
                ObjectiveSpec::new(weights.w_eff, l1, l2),
            )
        }
        MethodArg::Rrfs => {
            let (l1, l2) = lambdas()?;
            (Solver::Rrfs, ObjectiveSpec::new(weights.w_eff, l1, l2))
        }
    };
    if !matches!(pick.0, Solver::Em | Solver::Iam) {
        pick.1.validate()?;
    }
    Ok(pick)
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Em => "em",
        MethodArg::Iam => "iam",
        MethodArg::Pfair => "pfair",
        MethodArg::Sfair => "sfair",
        MethodArg::Mfairconf => "mfairconf",
        MethodArg::Exact => "exact",
        MethodArg::Rrfs => "rrfs",
    }
}

/// Result document written next to a schedule.
#[derive(Debug, Serialize)]
pub struct ScheduleOutput {
    pub method: String,
    pub solver: Method,
    pub weights: ObjectiveSpec,
    /// Scalarized objective on the full instance.
    pub objective: f64,
    pub clusters: Option<usize>,
    pub diagnostics: Diagnostics,
    pub metrics: MetricsReport,
}

pub fn cmd_schedule(a: &ScheduleArgs) -> Result<()> {
    let instance = load(&a.input)?;
    let (solver, weights) = resolve_method(a.method, &a.weights, a.solver, a.budget)?;
    let (solve_on, clusters) = match a.cluster.spec() {
        Some(c) => (cluster_instance(&instance, c.k, c.seed)?.1, Some(c.k)),
        None => (instance.clone(), None),
    };
    if let Some(path) = &a.dump_lp {
        let joint = build_joint_lp(&solve_on, &weights)?;
        fio::write(path, &joint.lp.to_lp_text())?;
    }
    let result = solver.solve(&solve_on, &weights)?;
    let schedule = Schedule::new(&instance, result.schedule.as_slice().to_vec())?;
    let output = ScheduleOutput {
        method: method_name(a.method).into(),
        solver: result.method,
        weights,
        objective: scalarized_objective(&instance, &schedule, &weights),
        clusters,
        diagnostics: result.diagnostics,
        metrics: MetricsReport::evaluate(&instance, &schedule),
    };
    let multi = MultiRoundSchedule::from(&schedule);
    let schedule_json = fio::schedule_to_json(&instance, &multi);
    if let Some(out) = &a.out {
        fio::write(out, &format!("{schedule_json}\n"))?;
    }
    if let Some(path) = &a.metrics {
        fio::write(path, &format!("{}\n", to_json(&output)))?;
    }
    if a.stdout {
        let schedule_value: serde_json::Value =
            serde_json::from_str(&schedule_json).expect("schedule json parses");
        emit(
            true,
            None,
            &to_json(&json!({ "schedule": schedule_value, "result": output })),
        )?;
    }
    log::info!(
        "{}: TEP {:.4}, objective {:.6}",
        method_name(a.method),
        output.metrics.tep,
        output.objective
    );
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let instance = load(&a.input)?;
    let schedule = fio::load_schedule(&instance, &a.schedule)?;
    let report = MetricsReport::evaluate_multi(&instance, &schedule);
    emit(a.stdout, a.out.as_deref(), &to_json(&report))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let instance = load(&a.input)?;
    let solver = match a.method {
        SweepMethodArg::Exact => Solver::Exact { budget: a.budget },
        SweepMethodArg::Rrfs => Solver::Rrfs,
    };
    let config = SweepConfig {
        solver,
        w_eff: a.w_eff,
        lambda1: a.lambda1.clone(),
        lambda2: a.lambda2.clone(),
        clusters: a.cluster.spec(),
        jobs: a.jobs,
        timings: a.timings,
    };
    let rows = pipeline::run_sweep(&instance, &config)?;
    if let Some(path) = &a.json {
        fio::write(path, &format!("{}\n", pipeline::rows_to_json(&rows)))?;
    }
    let csv = pipeline::rows_to_csv(&rows)?;
    if a.stdout {
        print!("{csv}");
    }
    if let Some(out) = &a.out {
        fio::write(out, &csv)?;
    }
    Ok(())
}

/// `"1231"` -> `[0, 1, 2, 0]`.
pub fn parse_rounds(text: &str, groups: usize) -> Result<Vec<usize>> {
    let rounds: Vec<usize> = text
        .chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| {
            c.to_digit(10)
                .filter(|&d| d >= 1 && (d as usize) <= groups)
                .map(|d| d as usize - 1)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "round sequence `{text}` must use group labels 1..={groups}"
                    ))
                })
        })
        .collect::<Result<_>>()?;
    if rounds.is_empty() {
        return Err(Error::InvalidArgument("round sequence is empty".into()));
    }
    Ok(rounds)
}

pub fn cmd_priority(a: &PriorityArgs) -> Result<()> {
    let instance = load(&a.input)?;
    let (solver, weights) = resolve_method(a.method, &a.weights, FairSolverArg::Rrfs, a.budget)?;
    let groups = partition_by_priority(&instance, a.groups)?;
    let rounds = parse_rounds(&a.rounds, a.groups)?;
    let plan = PriorityPlan::new(&instance, groups, rounds, weights, solver)?;
    let schedule = run_priority_schedule(&instance, &plan)?;
    let report = priority_report(&instance, &plan, &schedule);
    let schedule_json = fio::schedule_to_json(&instance, &schedule);
    if let Some(out) = &a.out {
        fio::write(out, &format!("{schedule_json}\n"))?;
    }
    if let Some(path) = &a.report {
        fio::write(path, &format!("{}\n", to_json(&report)))?;
    }
    if a.stdout {
        let schedule_value: serde_json::Value =
            serde_json::from_str(&schedule_json).expect("schedule json parses");
        emit(
            true,
            None,
            &to_json(&json!({ "schedule": schedule_value, "report": report })),
        )?;
    }
    Ok(())
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let instance = load(&a.input)?;
    let (model, reduced): (ClusterModel, SchedulingInstance) =
        cluster_instance(&instance, a.k, a.seed)?;
    emit(
        a.stdout,
        a.out.as_deref(),
        fio::instance_to_json(&reduced).as_str(),
    )?;
    if let Some(path) = &a.model {
        fio::write(path, &format!("{}\n", to_json(&model)))?;
    }
    Ok(())
}

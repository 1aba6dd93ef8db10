//! Experiment orchestration: priority rounds with repetitions, weight
//! sweeps and side-by-side method comparisons.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::cluster_instance;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{Assignment, MultiRoundSchedule, Schedule, SchedulingInstance};
use crate::solvers::{ranked, ObjectiveSpec, Solver};

// ---------------------------------------------------------------------------
// priority scheduling

/// Talk groups and the order in which they are scheduled. Group indices in
/// `rounds` are 0-based; a group may appear more than once (repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityPlan {
    pub groups: Vec<Vec<usize>>,
    pub rounds: Vec<usize>,
    /// One objective per round.
    pub objectives: Vec<ObjectiveSpec>,
    pub solver: Solver,
}

impl PriorityPlan {
    /// Plan with the same objective and solver for every round.
    pub fn new(
        instance: &SchedulingInstance,
        groups: Vec<Vec<usize>>,
        rounds: Vec<usize>,
        objective: ObjectiveSpec,
        solver: Solver,
    ) -> Result<Self> {
        let plan = PriorityPlan {
            objectives: vec![objective; rounds.len()],
            groups,
            rounds,
            solver,
        };
        plan.validate(instance)?;
        Ok(plan)
    }

    /// All talks as one group, scheduled `repeats` times.
    pub fn full(
        instance: &SchedulingInstance,
        repeats: usize,
        objective: ObjectiveSpec,
        solver: Solver,
    ) -> Result<Self> {
        Self::new(
            instance,
            vec![(0..instance.n()).collect()],
            vec![0; repeats],
            objective,
            solver,
        )
    }

    pub fn validate(&self, instance: &SchedulingInstance) -> Result<()> {
        if self.rounds.is_empty() {
            return Err(Error::InvalidArgument("round sequence is empty".into()));
        }
        if self.objectives.len() != self.rounds.len() {
            return Err(Error::InvalidArgument(format!(
                "{} objectives for {} rounds",
                self.objectives.len(),
                self.rounds.len()
            )));
        }
        let mut seen = vec![false; instance.n()];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::InvalidArgument("empty priority group".into()));
            }
            for &t in group {
                if t >= instance.n() || std::mem::replace(&mut seen[t], true) {
                    return Err(Error::InvalidArgument(format!(
                        "talk index {t} is out of range or in two groups"
                    )));
                }
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "talk `{}` is in no priority group",
                instance.talks()[t].id
            )));
        }
        if let Some(&g) = self.rounds.iter().find(|&&g| g >= self.groups.len()) {
            return Err(Error::InvalidArgument(format!(
                "round refers to group {} but only {} groups exist",
                g + 1,
                self.groups.len()
            )));
        }
        for w in &self.objectives {
            if !matches!(self.solver, Solver::Em | Solver::Iam) {
                w.validate()?;
            }
        }
        Ok(())
    }
}

/// Talks by decreasing overall interest, cut into `g` contiguous groups
/// whose sizes differ by at most one (earlier groups take the remainder).
pub fn partition_by_priority(instance: &SchedulingInstance, g: usize) -> Result<Vec<Vec<usize>>> {
    let n = instance.n();
    if g == 0 || g > n {
        return Err(Error::InvalidArgument(format!(
            "group count must be in 1..={n}, got {g}"
        )));
    }
    let order = ranked(&instance.overall_interest());
    let (base, extra) = (n / g, n % g);
    let mut groups = Vec::with_capacity(g);
    let mut start = 0;
    for i in 0..g {
        let size = base + usize::from(i < extra);
        groups.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(groups)
}

/// Runs the rounds in order; each round places its group on the slots no
/// earlier round used. Each round is solved as a standalone instance over
/// the group's talks and the free slots.
pub fn run_priority_schedule(
    instance: &SchedulingInstance,
    plan: &PriorityPlan,
) -> Result<MultiRoundSchedule> {
    plan.validate(instance)?;
    let mut free: Vec<usize> = (0..instance.l()).collect();
    let mut rounds = Vec::with_capacity(plan.rounds.len());
    for (r, (&g, objective)) in plan.rounds.iter().zip(&plan.objectives).enumerate() {
        let talks = &plan.groups[g];
        if talks.len() > free.len() {
            return Err(Error::SlotsExhausted {
                round: r + 1,
                needed: talks.len(),
                available: free.len(),
            });
        }
        let sub = instance.restrict(talks, &free)?;
        let result = plan.solver.solve(&sub, objective)?;
        let round: Vec<Assignment> = result
            .schedule
            .assignments()
            .map(|a| Assignment {
                talk: talks[a.talk],
                slot: free[a.slot],
            })
            .collect();
        let used = result.schedule.used_slots();
        free = free
            .iter()
            .enumerate()
            .filter(|(i, _)| used.binary_search(i).is_err())
            .map(|(_, &s)| s)
            .collect();
        log::info!(
            "round {}: group {} placed {} talks, {} slots left",
            r + 1,
            g + 1,
            round.len(),
            free.len()
        );
        rounds.push(round);
    }
    MultiRoundSchedule::new(instance, rounds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub talks: Vec<usize>,
    pub nec_gini: f64,
    pub nec_mean: f64,
}

/// Participant-side summary plus NEC statistics per priority group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityReport {
    /// Round sequence in 1-based group labels, e.g. `"1231"`.
    pub sequence: String,
    pub ncg_gini: f64,
    pub ncg_mean: f64,
    pub groups: Vec<GroupStats>,
    pub metrics: MetricsReport,
}

pub fn priority_report(
    instance: &SchedulingInstance,
    plan: &PriorityPlan,
    schedule: &MultiRoundSchedule,
) -> PriorityReport {
    let metrics = MetricsReport::evaluate_multi(instance, schedule);
    let groups = plan
        .groups
        .iter()
        .map(|talks| {
            let (nec_gini, nec_mean) = metrics.nec_group_stats(talks);
            GroupStats {
                talks: talks.clone(),
                nec_gini,
                nec_mean,
            }
        })
        .collect();
    PriorityReport {
        sequence: plan.rounds.iter().map(|g| (g + 1).to_string()).collect(),
        ncg_gini: metrics.ncg_gini,
        ncg_mean: metrics.ncg_mean,
        groups,
        metrics,
    }
}

// ---------------------------------------------------------------------------
// report rows

/// Participant clustering applied before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub k: usize,
    pub seed: u64,
}

/// One line of a sweep or comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub w_eff: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k: Option<usize>,
    pub objective: Option<f64>,
    pub runtime_ms: u128,
    /// Absent when the solve failed.
    pub report: Option<MetricsReport>,
    pub error: Option<String>,
}

impl ReportRow {
    fn metric(&self, f: impl Fn(&MetricsReport) -> f64) -> Option<f64> {
        self.report.as_ref().map(f)
    }

    pub fn tep(&self) -> Option<f64> {
        self.metric(|r| r.tep)
    }

    pub fn ncg_gap(&self) -> Option<f64> {
        self.metric(|r| r.participant_unfairness)
    }

    pub fn nec_gap(&self) -> Option<f64> {
        self.metric(|r| r.speaker_unfairness)
    }
}

pub const CSV_HEADER: [&str; 14] = [
    "method",
    "w_eff",
    "lambda1",
    "lambda2",
    "k",
    "TEP",
    "NCG_mean",
    "NCG_gap",
    "NCG_gini",
    "NEC_mean",
    "NEC_gap",
    "NEC_gini",
    "runtime_ms",
    "error",
];

/// Flat CSV with metric values rounded to two decimals.
pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(format!("csv output: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let two = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
    for row in rows {
        let r = row.report.as_ref();
        let rec = [
            row.method.clone(),
            row.w_eff.to_string(),
            row.lambda1.to_string(),
            row.lambda2.to_string(),
            row.k.map(|k| k.to_string()).unwrap_or_default(),
            two(r.map(|r| r.tep)),
            two(r.map(|r| r.ncg_mean)),
            two(r.map(|r| r.participant_unfairness)),
            two(r.map(|r| r.ncg_gini)),
            two(r.map(|r| r.nec_mean)),
            two(r.map(|r| r.speaker_unfairness)),
            two(r.map(|r| r.nec_gini)),
            row.runtime_ms.to_string(),
            row.error.clone().unwrap_or_default(),
        ];
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_to_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Instance the solvers see: the original or its clustered reduction.
struct Prepared<'a> {
    full: &'a SchedulingInstance,
    solve_on: std::borrow::Cow<'a, SchedulingInstance>,
    k: Option<usize>,
}

impl<'a> Prepared<'a> {
    fn new(instance: &'a SchedulingInstance, clusters: Option<ClusterSpec>) -> Result<Self> {
        Ok(match clusters {
            None => Prepared {
                full: instance,
                solve_on: std::borrow::Cow::Borrowed(instance),
                k: None,
            },
            Some(c) => Prepared {
                full: instance,
                solve_on: std::borrow::Cow::Owned(cluster_instance(instance, c.k, c.seed)?.1),
                k: Some(c.k),
            },
        })
    }

    fn row(&self, label: &str, solver: Solver, weights: ObjectiveSpec, timings: bool) -> ReportRow {
        let start = Instant::now();
        let outcome = solver.solve(&self.solve_on, &weights);
        let elapsed = start.elapsed().as_millis();
        let (report, objective, error) = match outcome {
            Ok(res) => {
                let schedule = Schedule::new(self.full, res.schedule.as_slice().to_vec())
                    .expect("reduced instance keeps talks and slots");
                let objective =
                    crate::solvers::scalarized_objective(self.full, &schedule, &weights);
                (
                    Some(MetricsReport::evaluate(self.full, &schedule)),
                    Some(objective),
                    None,
                )
            }
            Err(e) => {
                log::warn!("{label} ({weights}) failed: {e}");
                (None, None, Some(format!("{}: {e}", e.kind())))
            }
        };
        ReportRow {
            method: label.to_string(),
            w_eff: weights.w_eff,
            lambda1: weights.lambda1,
            lambda2: weights.lambda2,
            k: self.k,
            objective,
            runtime_ms: if timings { elapsed } else { 0 },
            report,
            error,
        }
    }
}

/// The four reference methods. Fairness-only baselines use `fair_solver`.
fn baselines(fair_solver: Solver) -> [(&'static str, Solver, ObjectiveSpec); 4] {
    [
        ("em", Solver::Em, ObjectiveSpec::efficiency()),
        ("iam", Solver::Iam, ObjectiveSpec::efficiency()),
        ("pfair", fair_solver, ObjectiveSpec::pfair()),
        ("sfair", fair_solver, ObjectiveSpec::sfair()),
    ]
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Exact or RRFS; used for the grid and the fairness-only baselines.
    pub solver: Solver,
    pub w_eff: f64,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub clusters: Option<ClusterSpec>,
    /// Worker threads for grid cells.
    pub jobs: usize,
    /// Record wall-clock times; off by default so output is reproducible.
    pub timings: bool,
}

impl SweepConfig {
    pub fn new(solver: Solver, lambda1: Vec<f64>, lambda2: Vec<f64>) -> Self {
        SweepConfig {
            solver,
            w_eff: 1.0,
            lambda1,
            lambda2,
            clusters: None,
            jobs: 1,
            timings: false,
        }
    }
}

fn solver_label(solver: Solver) -> &'static str {
    match solver {
        Solver::Exact { .. } => "exact",
        Solver::Rrfs => "rrfs",
        Solver::Em => "em",
        Solver::Iam => "iam",
    }
}

/// One row per `(lambda1, lambda2)` grid point (lambda1 outer), followed by
/// the EM, IAM, PFair and SFair baselines. Failed cells keep their row with
/// the error recorded.
pub fn run_sweep(instance: &SchedulingInstance, config: &SweepConfig) -> Result<Vec<ReportRow>> {
    if config.lambda1.is_empty() || config.lambda2.is_empty() {
        return Err(Error::InvalidArgument(
            "lambda grids must be non-empty".into(),
        ));
    }
    if !matches!(config.solver, Solver::Exact { .. } | Solver::Rrfs) {
        return Err(Error::InvalidArgument(
            "sweeps run the exact or rrfs solver".into(),
        ));
    }
    let prepared = Prepared::new(instance, config.clusters)?;
    let label = solver_label(config.solver);
    let mut cells: Vec<(&str, Solver, ObjectiveSpec)> = Vec::new();
    for &l1 in &config.lambda1 {
        for &l2 in &config.lambda2 {
            cells.push((
                label,
                config.solver,
                ObjectiveSpec::new(config.w_eff, l1, l2),
            ));
        }
    }
    cells.extend(baselines(config.solver));

    let run = |&(label, solver, weights): &(&str, Solver, ObjectiveSpec)| {
        prepared.row(label, solver, weights, config.timings)
    };
    if config.jobs <= 1 {
        return Ok(cells.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(run).collect()))
}

// ---------------------------------------------------------------------------
// comparisons

/// EM, IAM, PFair, SFair and mFairConf under `objective`, all scored on the
/// full instance. Fairness methods use `solver`.
pub fn compare_methods(
    instance: &SchedulingInstance,
    objective: &ObjectiveSpec,
    solver: Solver,
    clusters: Option<ClusterSpec>,
) -> Result<Vec<ReportRow>> {
    objective.validate()?;
    let prepared = Prepared::new(instance, clusters)?;
    let mut rows: Vec<ReportRow> = baselines(solver)
        .iter()
        .map(|&(label, s, w)| prepared.row(label, s, w, false))
        .collect();
    rows.push(prepared.row("mfairconf", solver, *objective, false));
    Ok(rows)
}

/// Fixed-width table: gap and mean of NCG and NEC, TEP and gini columns.
pub fn comparison_table(rows: &[ReportRow]) -> String {
    let mut out = format!(
        "{:<10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8} {:>8}\n",
        "method", "NCG_gap", "NCG_mean", "NEC_gap", "NEC_mean", "TEP", "NCG_gini", "NEC_gini"
    );
    for row in rows {
        match &row.report {
            Some(r) => out.push_str(&format!(
                "{:<10} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>10.2} {:>8.2} {:>8.2}\n",
                row.method,
                r.participant_unfairness,
                r.ncg_mean,
                r.speaker_unfairness,
                r.nec_mean,
                r.tep,
                r.ncg_gini,
                r.nec_gini
            )),
            None => out.push_str(&format!(
                "{:<10} {}\n",
                row.method,
                row.error.as_deref().unwrap_or("failed")
            )),
        }
    }
    out
}

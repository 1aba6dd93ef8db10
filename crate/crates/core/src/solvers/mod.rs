//! Schedule construction.
//!
//! * [`solve_em`]: TEP-optimal schedule through min-cost bipartite matching
//! * [`solve_iam`]: rank matching of overall interest against overall availability
//! * [`solve_exact`]: exhaustive search of the scalarized objective
//! * [`solve_rrfs`]: repeated rounding of the relaxed joint program
//!
//! Participant-only and speaker-only fairness are the objective weights
//! [`ObjectiveSpec::pfair`] and [`ObjectiveSpec::sfair`] passed to the exact
//! or rounding solver.

mod exact;
pub mod hungarian;
mod rrfs;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use exact::{solve_exact, DEFAULT_BUDGET};
pub use rrfs::{solve_rrfs, solve_rrfs_with, RrfsOptions};

use crate::error::{Error, Result};
use crate::metrics::Normalizers;
use crate::model::{Matrix, Schedule, SchedulingInstance};

/// Weights of the joint objective
/// `w_eff * TEP / (W n) - l1 * Psi^P - l2 * Psi^S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub w_eff: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ObjectiveSpec {
    pub fn new(w_eff: f64, lambda1: f64, lambda2: f64) -> Self {
        ObjectiveSpec {
            w_eff,
            lambda1,
            lambda2,
        }
    }

    pub fn efficiency() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn pfair() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn sfair() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn mfairconf(lambda1: f64, lambda2: f64) -> Self {
        Self::new(1.0, lambda1, lambda2)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.w_eff, self.lambda1, self.lambda2];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "objective weights must be finite and non-negative: {self:?}"
            )));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidArgument(
                "objective weights are all zero".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "w_eff={}, lambda1={}, lambda2={}",
            self.w_eff, self.lambda1, self.lambda2
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Em,
    Iam,
    Exact,
    Rrfs,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Em => "em",
            Method::Iam => "iam",
            Method::Exact => "exact",
            Method::Rrfs => "rrfs",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Relaxations solved by RRFS.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<usize>,
    /// Total simplex pivots across all relaxations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_pivots: Option<usize>,
    /// Complete assignments evaluated by the exact solver.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub schedule: Schedule,
    /// Scalarized objective of `schedule` under `weights`.
    pub objective: f64,
    pub method: Method,
    pub weights: ObjectiveSpec,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    fn new(
        instance: &SchedulingInstance,
        schedule: Schedule,
        method: Method,
        weights: ObjectiveSpec,
        diagnostics: Diagnostics,
    ) -> Self {
        SolveResult {
            objective: scalarized_objective(instance, &schedule, &weights),
            schedule,
            method,
            weights,
            diagnostics,
        }
    }
}

/// Per-instance data shared by the objective evaluations.
pub(crate) struct ObjectiveContext {
    pub norm: Normalizers,
    pub crowd: Matrix,
    pub eff_scale: f64,
}

impl ObjectiveContext {
    pub fn new(instance: &SchedulingInstance, weights: &ObjectiveSpec) -> Self {
        ObjectiveContext {
            norm: Normalizers::of(instance),
            crowd: instance.crowd_matrix(),
            eff_scale: weights.w_eff / (instance.total_weight() * instance.n() as f64),
        }
    }

    /// Scalarized value from per-participant gains and per-talk crowds.
    pub fn value(&self, weights: &ObjectiveSpec, cg: &[f64], ec: &[f64]) -> f64 {
        let tep: f64 = ec.iter().sum();
        let mut value = self.eff_scale * tep;
        if weights.lambda1 != 0.0 {
            value -= weights.lambda1 * normalized_gap(cg, &self.norm.icg);
        }
        if weights.lambda2 != 0.0 {
            value -= weights.lambda2 * normalized_gap(ec, &self.norm.iec);
        }
        value
    }
}

fn normalized_gap(raw: &[f64], denom: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&x, &d) in raw.iter().zip(denom) {
        if d > 0.0 {
            let v = x / d;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// `w_eff * TEP / (W n) + l1 (min NCG - max NCG) + l2 (min NEC - max NEC)`,
/// with degenerate participants and talks left out of the min/max.
pub fn scalarized_objective(
    instance: &SchedulingInstance,
    schedule: &Schedule,
    weights: &ObjectiveSpec,
) -> f64 {
    let ctx = ObjectiveContext::new(instance, weights);
    let cg: Vec<f64> = (0..instance.m())
        .map(|p| crate::metrics::cumulative_gain(instance, schedule, p))
        .collect();
    let ec: Vec<f64> = (0..instance.n())
        .map(|t| ctx.crowd.get(t, schedule.slot_of(t)))
        .collect();
    ctx.value(weights, &cg, &ec)
}

/// TEP-optimal schedule. Talks are matched to slots at cost
/// `W - sum_p w_p V_p(t) A_p(s)`, padded with `l - n` dummy talks of cost `W`.
pub fn solve_em(instance: &SchedulingInstance) -> SolveResult {
    let (n, l) = (instance.n(), instance.l());
    let w = instance.total_weight();
    let crowd = instance.crowd_matrix();
    let costs = Matrix::from_fn(l, l, |t, s| if t < n { w - crowd.get(t, s) } else { w });
    let col_of = hungarian::min_cost_assignment(&costs);
    let schedule = Schedule::new(instance, col_of[..n].to_vec()).expect("matching is injective");
    SolveResult::new(
        instance,
        schedule,
        Method::Em,
        ObjectiveSpec::efficiency(),
        Diagnostics::default(),
    )
}

/// Talks by decreasing overall interest matched to slots by decreasing
/// overall availability; ties go to the lower index.
pub fn solve_iam(instance: &SchedulingInstance) -> SolveResult {
    let talks = ranked(&instance.overall_interest());
    let slots = ranked(&instance.overall_availability());
    let mut slot_of = vec![0; instance.n()];
    for (&t, &s) in talks.iter().zip(&slots) {
        slot_of[t] = s;
    }
    let schedule = Schedule::new(instance, slot_of).expect("rank matching is injective");
    SolveResult::new(
        instance,
        schedule,
        Method::Iam,
        ObjectiveSpec::efficiency(),
        Diagnostics::default(),
    )
}

/// A solver together with its settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "solver")]
pub enum Solver {
    Em,
    Iam,
    Exact { budget: u128 },
    Rrfs,
}

impl Solver {
    pub fn exact() -> Self {
        Solver::Exact {
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Solver::Em => Method::Em,
            Solver::Iam => Method::Iam,
            Solver::Exact { .. } => Method::Exact,
            Solver::Rrfs => Method::Rrfs,
        }
    }

    /// Runs the solver. `weights` is ignored by EM and IAM.
    pub fn solve(
        &self,
        instance: &SchedulingInstance,
        weights: &ObjectiveSpec,
    ) -> Result<SolveResult> {
        match *self {
            Solver::Em => Ok(solve_em(instance)),
            Solver::Iam => Ok(solve_iam(instance)),
            Solver::Exact { budget } => solve_exact(instance, weights, budget),
            Solver::Rrfs => solve_rrfs(instance, weights),
        }
    }
}

/// Indices sorted by decreasing score, stable.
pub(crate) fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_problem_1, example_problem_2};
    use crate::metrics::tep;
    use crate::model::Matrix;

    #[test]
    fn em_on_examples() {
        let ex2 = example_problem_2();
        let r = solve_em(&ex2);
        assert!((tep(&ex2, &r.schedule) - 1.4).abs() < 1e-12);
        let ex1 = example_problem_1();
        let r = solve_em(&ex1);
        assert!((tep(&ex1, &r.schedule) - 1.0).abs() < 1e-12);
        assert_ne!(r.schedule.slot_of(0), 1);
    }

    #[test]
    fn iam_on_example_2() {
        let ex2 = example_problem_2();
        let r = solve_iam(&ex2);
        assert_eq!(r.schedule.as_slice(), &[0, 2]);
        assert!((tep(&ex2, &r.schedule) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn iam_ties_follow_index_order() {
        let inst = SchedulingInstance::from_matrices(
            Matrix::from_fn(2, 3, |_, _| 0.5),
            Matrix::from_fn(2, 4, |_, _| 0.5),
            30,
        )
        .unwrap();
        assert_eq!(solve_iam(&inst).schedule.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn scalarized_objective_examples() {
        let ex1 = example_problem_1();
        let s = Schedule::new(&ex1, vec![1]).unwrap();
        let v = scalarized_objective(&ex1, &s, &ObjectiveSpec::new(1.0, 1.0, 0.0));
        assert!((v - 0.49).abs() < 1e-12);

        let inst = crate::datagen::gen_uniform(4, 3, 5, 8).unwrap();
        let s = Schedule::new(&inst, vec![4, 0, 2]).unwrap();
        let v = scalarized_objective(&inst, &s, &ObjectiveSpec::efficiency());
        assert!((v - tep(&inst, &s) / 12.0).abs() < 1e-12);
    }

    #[test]
    fn objective_ignores_participant_order() {
        let inst = crate::datagen::gen_uniform(5, 3, 4, 13).unwrap();
        let order = [3usize, 0, 4, 1, 2];
        let perm = inst
            .with_participants(
                order
                    .iter()
                    .map(|&p| inst.participants()[p].clone())
                    .collect(),
                Matrix::from_fn(5, 3, |p, t| inst.v(order[p], t)),
                Matrix::from_fn(5, 4, |p, s| inst.a(order[p], s)),
                None,
            )
            .unwrap();
        let s = Schedule::new(&inst, vec![2, 3, 0]).unwrap();
        let w = ObjectiveSpec::new(1.0, 0.6, 0.3);
        let a = scalarized_objective(&inst, &s, &w);
        let b = scalarized_objective(&perm, &s, &w);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn objective_spec_validation() {
        assert!(ObjectiveSpec::new(0.0, 0.0, 0.0).validate().is_err());
        assert!(ObjectiveSpec::new(-1.0, 0.0, 1.0).validate().is_err());
        assert!(ObjectiveSpec::pfair().validate().is_ok());
    }
}

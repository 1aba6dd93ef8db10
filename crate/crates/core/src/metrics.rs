//! Satisfaction, fairness and efficiency measures.
//!
//! Participant side: cumulative gain `CG_p = sum_t V_p(t) A_p(slot(t))`,
//! normalized by the ideal gain `ICG_p` the participant would get from the
//! schedule best for them. Speaker side: expected crowd
//! `EC_t = sum_p w_p V_p(t) A_p(slot(t))`, normalized by the best single
//! slot `IEC_t`. Efficiency is the total expected participation
//! `TEP = sum_p CG_p = sum_t EC_t` (weighted).
//!
//! A participant with `ICG_p = 0` (or a talk with `IEC_t = 0`) is
//! *degenerate*: no schedule can change its satisfaction. Its normalized
//! value is reported as 1 and it is left out of gaps, gini and means.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, MultiRoundSchedule, Schedule, SchedulingInstance};

/// `CG_p` under a complete schedule.
pub fn cumulative_gain(instance: &SchedulingInstance, schedule: &Schedule, p: usize) -> f64 {
    gain_of(instance, schedule.assignments(), p)
}

fn gain_of(
    instance: &SchedulingInstance,
    assignments: impl Iterator<Item = Assignment>,
    p: usize,
) -> f64 {
    assignments
        .map(|a| instance.v(p, a.talk) * instance.a(p, a.slot))
        .sum()
}

/// `ICG_p`: pairs the k-th largest interest with the k-th largest
/// availability over the top `n` slots.
pub fn ideal_cumulative_gain(instance: &SchedulingInstance, p: usize) -> f64 {
    let mut v: Vec<f64> = instance.interest().row(p).to_vec();
    let mut a: Vec<f64> = instance.availability().row(p).to_vec();
    v.sort_by(|x, y| y.total_cmp(x));
    a.sort_by(|x, y| y.total_cmp(x));
    v.iter().zip(&a).map(|(x, y)| x * y).sum()
}

/// `NCG_p = CG_p / ICG_p`.
pub fn ncg(instance: &SchedulingInstance, schedule: &Schedule, p: usize) -> Result<f64> {
    let icg = ideal_cumulative_gain(instance, p);
    if icg <= 0.0 {
        return Err(Error::DegenerateNormalization {
            what: "participant",
            index: p,
        });
    }
    Ok(cumulative_gain(instance, schedule, p) / icg)
}

/// `EC_t` under a complete schedule.
pub fn expected_crowd(instance: &SchedulingInstance, schedule: &Schedule, t: usize) -> f64 {
    crowd_at(instance, t, schedule.slot_of(t))
}

/// Weighted crowd talk `t` would draw in slot `s`.
pub fn crowd_at(instance: &SchedulingInstance, t: usize, s: usize) -> f64 {
    (0..instance.m())
        .map(|p| instance.weight(p) * instance.v(p, t) * instance.a(p, s))
        .sum()
}

/// `IEC_t = max_s sum_p w_p V_p(t) A_p(s)`.
pub fn ideal_expected_crowd(instance: &SchedulingInstance, t: usize) -> f64 {
    (0..instance.l())
        .map(|s| crowd_at(instance, t, s))
        .fold(0.0, f64::max)
}

/// `NEC_t = EC_t / IEC_t`.
pub fn nec(instance: &SchedulingInstance, schedule: &Schedule, t: usize) -> Result<f64> {
    let iec = ideal_expected_crowd(instance, t);
    if iec <= 0.0 {
        return Err(Error::DegenerateNormalization {
            what: "talk",
            index: t,
        });
    }
    Ok(expected_crowd(instance, schedule, t) / iec)
}

/// Multi-round `NEC_t`: crowds summed over every slot the talk occupies,
/// divided by the single-slot `IEC_t`. Exceeds 1 when repetitions pay off.
pub fn nec_multi(
    instance: &SchedulingInstance,
    schedule: &MultiRoundSchedule,
    t: usize,
) -> Result<f64> {
    let iec = ideal_expected_crowd(instance, t);
    if iec <= 0.0 {
        return Err(Error::DegenerateNormalization {
            what: "talk",
            index: t,
        });
    }
    let total: f64 = schedule
        .all_assignments()
        .filter(|a| a.talk == t)
        .map(|a| crowd_at(instance, t, a.slot))
        .sum();
    Ok(total / iec)
}

/// Total expected participation (weighted).
pub fn tep(instance: &SchedulingInstance, schedule: &Schedule) -> f64 {
    tep_of(instance, schedule.assignments())
}

fn tep_of(instance: &SchedulingInstance, assignments: impl Iterator<Item = Assignment>) -> f64 {
    let assignments: Vec<Assignment> = assignments.collect();
    (0..instance.m())
        .map(|p| instance.weight(p) * gain_of(instance, assignments.iter().copied(), p))
        .sum()
}

/// Per-participant `ICG` and per-talk `IEC` of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizers {
    pub icg: Vec<f64>,
    pub iec: Vec<f64>,
}

impl Normalizers {
    pub fn of(instance: &SchedulingInstance) -> Self {
        let icg = (0..instance.m())
            .map(|p| ideal_cumulative_gain(instance, p))
            .collect();
        let crowd = instance.crowd_matrix();
        let iec = (0..instance.n())
            .map(|t| crowd.row(t).iter().copied().fold(0.0, f64::max))
            .collect();
        Normalizers { icg, iec }
    }
}

/// Normalized values plus a degeneracy flag per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl Normalized {
    fn from_parts(raw: Vec<f64>, denominators: &[f64]) -> Self {
        let mut values = Vec::with_capacity(raw.len());
        let mut degenerate = Vec::with_capacity(raw.len());
        for (x, &d) in raw.into_iter().zip(denominators) {
            if d > 0.0 {
                values.push(x / d);
                degenerate.push(false);
            } else {
                values.push(1.0);
                degenerate.push(true);
            }
        }
        Normalized { values, degenerate }
    }

    /// Values of the non-degenerate entries.
    pub fn scored(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.degenerate)
            .filter(|(_, &d)| !d)
            .map(|(&v, _)| v)
            .collect()
    }

    /// `max - min` over non-degenerate entries, 0 if there are none.
    pub fn gap(&self) -> f64 {
        max_min_gap(&self.scored())
    }
}

/// NCG of every participant (degenerate ones set to 1).
pub fn ncg_vector(instance: &SchedulingInstance, schedule: &Schedule) -> Normalized {
    let icg: Vec<f64> = (0..instance.m())
        .map(|p| ideal_cumulative_gain(instance, p))
        .collect();
    let cg = (0..instance.m())
        .map(|p| cumulative_gain(instance, schedule, p))
        .collect();
    Normalized::from_parts(cg, &icg)
}

/// NEC of every talk (degenerate ones set to 1).
pub fn nec_vector(instance: &SchedulingInstance, schedule: &Schedule) -> Normalized {
    let norm = Normalizers::of(instance);
    let ec = (0..instance.n())
        .map(|t| expected_crowd(instance, schedule, t))
        .collect();
    Normalized::from_parts(ec, &norm.iec)
}

/// `Psi^P`: largest NCG difference between two participants.
pub fn participant_unfairness(instance: &SchedulingInstance, schedule: &Schedule) -> f64 {
    ncg_vector(instance, schedule).gap()
}

/// `Psi^S`: largest NEC difference between two talks.
pub fn speaker_unfairness(instance: &SchedulingInstance, schedule: &Schedule) -> f64 {
    nec_vector(instance, schedule).gap()
}

pub(crate) fn max_min_gap(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Gini index `sum_i sum_j |x_i - x_j| / (2 k^2 mean)`.
pub fn gini(values: &[f64]) -> Result<f64> {
    let k = values.len();
    if k == 0 {
        return Err(Error::AllZero);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if mean <= 0.0 {
        return Err(Error::AllZero);
    }
    // sorted form of the pairwise sum: sum_i (2i - k + 1) x_(i); the
    // coefficients sum to zero, so shifting by the minimum changes nothing
    // and makes constant inputs exactly 0
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0];
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * i as f64 - k as f64 + 1.0) * (x - lo))
        .sum();
    Ok(weighted / (k as f64 * k as f64 * mean))
}

/// Run length of consecutively indexed occupied slots -> number of runs.
pub fn contiguity_histogram(
    instance: &SchedulingInstance,
    used_slots: &[usize],
) -> BTreeMap<usize, usize> {
    let mut occupied = vec![false; instance.l()];
    for &s in used_slots {
        occupied[s] = true;
    }
    let mut hist = BTreeMap::new();
    let mut run = 0;
    for &o in occupied.iter().chain(std::iter::once(&false)) {
        if o {
            run += 1;
        } else if run > 0 {
            *hist.entry(run).or_insert(0) += 1;
            run = 0;
        }
    }
    hist
}

/// For each talk, hours between consecutive starts of its assigned slots.
pub fn repetition_gaps(
    instance: &SchedulingInstance,
    schedule: &MultiRoundSchedule,
) -> Vec<Vec<f64>> {
    let mut starts: Vec<Vec<i64>> = vec![Vec::new(); instance.n()];
    for a in schedule.all_assignments() {
        starts[a.talk].push(instance.slots()[a.slot].start_utc_min);
    }
    starts
        .into_iter()
        .map(|mut s| {
            s.sort_unstable();
            s.windows(2).map(|w| (w[1] - w[0]) as f64 / 60.0).collect()
        })
        .collect()
}

/// Everything reported about one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ncg: Vec<f64>,
    pub nec: Vec<f64>,
    pub degenerate_participants: Vec<usize>,
    pub degenerate_talks: Vec<usize>,
    pub tep: f64,
    pub participant_unfairness: f64,
    pub speaker_unfairness: f64,
    pub ncg_gini: f64,
    pub nec_gini: f64,
    pub ncg_mean: f64,
    pub nec_mean: f64,
    pub contiguity: BTreeMap<usize, usize>,
    pub repetition_gaps: Vec<Vec<f64>>,
}

impl MetricsReport {
    pub fn evaluate(instance: &SchedulingInstance, schedule: &Schedule) -> Self {
        Self::evaluate_multi(instance, &MultiRoundSchedule::from(schedule))
    }

    /// Gains and crowds are summed over all rounds.
    pub fn evaluate_multi(instance: &SchedulingInstance, schedule: &MultiRoundSchedule) -> Self {
        let norm = Normalizers::of(instance);
        let assignments: Vec<Assignment> = schedule.all_assignments().collect();

        let cg: Vec<f64> = (0..instance.m())
            .map(|p| gain_of(instance, assignments.iter().copied(), p))
            .collect();
        let mut ec = vec![0.0; instance.n()];
        for a in &assignments {
            ec[a.talk] += crowd_at(instance, a.talk, a.slot);
        }
        let tep = ec.iter().sum();

        let ncg = Normalized::from_parts(cg, &norm.icg);
        let nec = Normalized::from_parts(ec, &norm.iec);
        let used: Vec<usize> = assignments.iter().map(|a| a.slot).collect();

        let (ncg_scored, nec_scored) = (ncg.scored(), nec.scored());
        MetricsReport {
            degenerate_participants: flagged(&ncg.degenerate),
            degenerate_talks: flagged(&nec.degenerate),
            tep,
            participant_unfairness: max_min_gap(&ncg_scored),
            speaker_unfairness: max_min_gap(&nec_scored),
            ncg_gini: gini(&ncg_scored).unwrap_or(0.0),
            nec_gini: gini(&nec_scored).unwrap_or(0.0),
            ncg_mean: mean_or_one(&ncg_scored),
            nec_mean: mean_or_one(&nec_scored),
            contiguity: contiguity_histogram(instance, &used),
            repetition_gaps: repetition_gaps(instance, schedule),
            ncg: ncg.values,
            nec: nec.values,
        }
    }

    /// Gini and mean of NEC restricted to a subset of talks.
    pub fn nec_group_stats(&self, talks: &[usize]) -> (f64, f64) {
        let vals: Vec<f64> = talks
            .iter()
            .filter(|t| !self.degenerate_talks.contains(t))
            .map(|&t| self.nec[t])
            .collect();
        (gini(&vals).unwrap_or(0.0), mean_or_one(&vals))
    }
}

fn flagged(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter(|(_, &d)| d)
        .map(|(i, _)| i)
        .collect()
}

fn mean_or_one(values: &[f64]) -> f64 {
    if values.is_empty() {
        1.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_problem_1, example_problem_2, example_problem_3};
    use crate::model::Matrix;

    const TOL: f64 = 1e-12;

    fn sched(inst: &SchedulingInstance, slots: &[usize]) -> Schedule {
        Schedule::new(inst, slots.to_vec()).unwrap()
    }

    #[test]
    fn cumulative_gain_examples() {
        let ex2 = example_problem_2();
        assert!((cumulative_gain(&ex2, &sched(&ex2, &[0, 2]), 0) - 1.4).abs() < TOL);
        let ex3 = example_problem_3();
        assert!((cumulative_gain(&ex3, &sched(&ex3, &[1, 2]), 0) - 1.0).abs() < TOL);
    }

    #[test]
    fn zero_availability_gives_zero_gain() {
        let inst = SchedulingInstance::from_matrices(
            Matrix::from_fn(2, 2, |_, _| 0.7),
            Matrix::zeros(2, 3),
            30,
        )
        .unwrap();
        let s = sched(&inst, &[0, 1]);
        assert_eq!(cumulative_gain(&inst, &s, 1), 0.0);
        assert!(matches!(
            ncg(&inst, &s, 0),
            Err(Error::DegenerateNormalization { .. })
        ));
        let report = MetricsReport::evaluate(&inst, &s);
        assert_eq!(report.ncg, vec![1.0, 1.0]);
        assert_eq!(report.degenerate_participants, vec![0, 1]);
        assert_eq!(report.participant_unfairness, 0.0);
    }

    #[test]
    fn ideal_cumulative_gain_examples() {
        assert!((ideal_cumulative_gain(&example_problem_2(), 0) - 1.4).abs() < TOL);
        let ex3 = example_problem_3();
        assert!((ideal_cumulative_gain(&ex3, 0) - 1.7).abs() < TOL);
        assert!((ideal_cumulative_gain(&ex3, 1) - 1.7).abs() < TOL);
    }

    #[test]
    fn ncg_examples() {
        let ex1 = example_problem_1();
        let s = sched(&ex1, &[1]);
        assert!((ncg(&ex1, &s, 0).unwrap() - 0.49).abs() < TOL);
        assert!((ncg(&ex1, &s, 1).unwrap() - 0.49).abs() < TOL);
        let ex3 = example_problem_3();
        let s = sched(&ex3, &[0, 3]);
        for p in 0..2 {
            assert!((ncg(&ex3, &s, p).unwrap() - 1.14 / 1.7).abs() < TOL);
        }
    }

    #[test]
    fn crowd_examples() {
        let ex2 = example_problem_2();
        assert!((ideal_expected_crowd(&ex2, 0) - 1.0).abs() < TOL);
        assert!((ideal_expected_crowd(&ex2, 1) - 0.5).abs() < TOL);
        let ex3 = example_problem_3();
        assert!((ideal_expected_crowd(&ex3, 0) - 2.0).abs() < TOL);
        assert!((ideal_expected_crowd(&ex3, 1) - 1.4).abs() < TOL);
    }

    #[test]
    fn single_slot_crowd_is_ideal() {
        let inst = SchedulingInstance::from_matrices(
            Matrix::from_fn(3, 1, |p, _| 0.2 * p as f64),
            Matrix::from_fn(3, 1, |p, _| 1.0 - 0.3 * p as f64),
            30,
        )
        .unwrap();
        let s = sched(&inst, &[0]);
        assert!((expected_crowd(&inst, &s, 0) - ideal_expected_crowd(&inst, 0)).abs() < TOL);
    }

    #[test]
    fn nec_examples() {
        let ex2 = example_problem_2();
        let em = sched(&ex2, &[0, 2]);
        assert!((nec(&ex2, &em, 0).unwrap() - 1.0).abs() < TOL);
        assert!((nec(&ex2, &em, 1).unwrap() - 0.8).abs() < TOL);
        let ex3 = example_problem_3();
        let s = sched(&ex3, &[1, 2]);
        assert!((nec(&ex3, &s, 0).unwrap() - 0.5).abs() < TOL);
        assert!((nec(&ex3, &s, 1).unwrap() - 0.5).abs() < TOL);
    }

    #[test]
    fn tep_examples() {
        let ex1 = example_problem_1();
        assert!((tep(&ex1, &sched(&ex1, &[1])) - 0.98).abs() < TOL);
        let ex2 = example_problem_2();
        assert!((tep(&ex2, &sched(&ex2, &[2, 1])) - 1.175).abs() < TOL);
    }

    #[test]
    fn unfairness_examples() {
        let ex1 = example_problem_1();
        assert!((participant_unfairness(&ex1, &sched(&ex1, &[0])) - 1.0).abs() < TOL);
        let ex3 = example_problem_3();
        assert!((speaker_unfairness(&ex3, &sched(&ex3, &[0, 3])) - 0.8).abs() < TOL);
        let ex2 = example_problem_2();
        assert_eq!(participant_unfairness(&ex2, &sched(&ex2, &[1, 0])), 0.0);
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
        assert_eq!(gini(&[0.3; 7]).unwrap(), 0.0);
        assert_eq!(gini(&[0.1; 13]).unwrap(), 0.0);
        assert!((gini(&[0.0, 1.0]).unwrap() - 0.5).abs() < TOL);
        assert!(matches!(gini(&[0.0, 0.0]), Err(Error::AllZero)));
    }

    #[test]
    fn contiguity_examples() {
        let inst = SchedulingInstance::from_matrices(
            Matrix::from_fn(1, 6, |_, _| 0.5),
            Matrix::from_fn(1, 12, |_, _| 0.5),
            30,
        )
        .unwrap();
        let hist = contiguity_histogram(&inst, &[0, 1, 5, 7, 8, 9]);
        assert_eq!(hist, BTreeMap::from([(1, 1), (2, 1), (3, 1)]));
        assert_eq!(
            contiguity_histogram(&inst, &[0, 1, 2, 3, 4, 5]),
            BTreeMap::from([(6, 1)])
        );
        assert!(contiguity_histogram(&inst, &[]).is_empty());
    }

    #[test]
    fn repetition_gap_examples() {
        let inst = SchedulingInstance::from_matrices(
            Matrix::from_fn(1, 2, |_, _| 0.5),
            Matrix::from_fn(1, 48, |_, _| 0.5),
            30,
        )
        .unwrap();
        // half-hour slots: slot 18 starts 09:00, slot 42 starts 21:00
        let multi = MultiRoundSchedule::new(
            &inst,
            vec![
                vec![
                    Assignment { talk: 0, slot: 18 },
                    Assignment { talk: 1, slot: 0 },
                ],
                vec![Assignment { talk: 0, slot: 42 }],
            ],
        )
        .unwrap();
        let gaps = repetition_gaps(&inst, &multi);
        assert_eq!(gaps[0], vec![12.0]);
        assert!(gaps[1].is_empty());

        let multi = MultiRoundSchedule::new(
            &inst,
            vec![
                vec![Assignment { talk: 0, slot: 0 }],
                vec![Assignment { talk: 0, slot: 8 }],
                vec![Assignment { talk: 0, slot: 18 }],
            ],
        )
        .unwrap();
        assert_eq!(repetition_gaps(&inst, &multi)[0], vec![4.0, 5.0]);
    }

    #[test]
    fn repeated_talk_nec_can_exceed_one() {
        let ex3 = example_problem_3();
        let multi = MultiRoundSchedule::new(
            &ex3,
            vec![
                vec![
                    Assignment { talk: 0, slot: 0 },
                    Assignment { talk: 1, slot: 1 },
                ],
                vec![Assignment { talk: 0, slot: 2 }],
            ],
        )
        .unwrap();
        // 2 at s1 plus 1 at s3, over IEC 2
        assert!((nec_multi(&ex3, &multi, 0).unwrap() - 1.5).abs() < TOL);
        let report = MetricsReport::evaluate_multi(&ex3, &multi);
        assert!((report.nec[0] - 1.5).abs() < TOL);
    }
}

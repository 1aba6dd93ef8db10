//! Scheduling instances and schedules.
//!
//! An instance holds `m` participants, `n` talks and `l` chronologically
//! ordered, non-overlapping slots together with the interest matrix
//! (`m x n`) and the availability matrix (`m x l`). Ids are opaque strings;
//! everything downstream works on dense indices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows. `cols` is used when `rows` is empty.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize, what: &str) -> Result<Self> {
        let cols = rows.first().map_or(cols, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: format!("{what} row length"),
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Talk {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<i64>,
}

/// A time slot; times are integer minutes from 00:00 UTC of day 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub id: String,
    pub start_utc_min: i64,
    pub duration_min: i64,
}

impl Slot {
    pub fn end_utc_min(&self) -> i64 {
        self.start_utc_min + self.duration_min
    }
}

/// Serialized form of an instance, mirrors the JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawInstance {
    pub participants: Vec<Participant>,
    pub talks: Vec<Talk>,
    pub slots: Vec<Slot>,
    pub interest: Vec<Vec<f64>>,
    pub availability: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// A validated scheduling instance. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingInstance {
    participants: Vec<Participant>,
    talks: Vec<Talk>,
    slots: Vec<Slot>,
    interest: Matrix,
    availability: Matrix,
    weights: Option<Vec<f64>>,
}

impl SchedulingInstance {
    pub fn new(
        participants: Vec<Participant>,
        talks: Vec<Talk>,
        slots: Vec<Slot>,
        interest: Matrix,
        availability: Matrix,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let instance = SchedulingInstance {
            participants,
            talks,
            slots,
            interest,
            availability,
            weights,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Instance with generated ids (`p0.., t0.., s0..`) and back-to-back
    /// slots of `slot_minutes` starting at minute 0.
    pub fn from_matrices(
        interest: Matrix,
        availability: Matrix,
        slot_minutes: i64,
    ) -> Result<Self> {
        let participants = (0..interest.rows())
            .map(|p| Participant {
                id: format!("p{p}"),
            })
            .collect();
        let talks = (0..interest.cols())
            .map(|t| Talk {
                id: format!("t{t}"),
                priority: None,
            })
            .collect();
        let slots = uniform_slots(availability.cols(), 0, slot_minutes);
        SchedulingInstance::new(participants, talks, slots, interest, availability, None)
    }

    fn validate(&self) -> Result<()> {
        let m = self.participants.len();
        let n = self.talks.len();
        let l = self.slots.len();
        if m == 0 {
            return Err(Error::InvalidInstance("no participants".into()));
        }
        if n == 0 {
            return Err(Error::InvalidInstance("no talks".into()));
        }
        check_dims("interest rows", m, self.interest.rows())?;
        check_dims("interest columns", n, self.interest.cols())?;
        check_dims("availability rows", m, self.availability.rows())?;
        check_dims("availability columns", l, self.availability.cols())?;
        if n > l {
            return Err(Error::TooManyTalks { talks: n, slots: l });
        }
        check_range("interest", &self.interest)?;
        check_range("availability", &self.availability)?;
        for pair in self.slots.windows(2) {
            if pair[0].duration_min < 0 || pair[0].end_utc_min() > pair[1].start_utc_min {
                return Err(Error::SlotOverlap {
                    first: pair[0].id.clone(),
                    second: pair[1].id.clone(),
                });
            }
        }
        if let Some(last) = self.slots.last() {
            if last.duration_min < 0 {
                return Err(Error::InvalidInstance(format!(
                    "slot `{}` has negative duration",
                    last.id
                )));
            }
        }
        if let Some(w) = &self.weights {
            check_dims("weights", m, w.len())?;
            for (index, &value) in w.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::InvalidWeight { index, value });
                }
            }
        }
        unique_ids(
            "participant",
            self.participants.iter().map(|p| p.id.as_str()),
        )?;
        unique_ids("talk", self.talks.iter().map(|t| t.id.as_str()))?;
        unique_ids("slot", self.slots.iter().map(|s| s.id.as_str()))?;
        Ok(())
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.participants.len()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.talks.len()
    }

    #[inline]
    pub fn l(&self) -> usize {
        self.slots.len()
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn talks(&self) -> &[Talk] {
        &self.talks
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn interest(&self) -> &Matrix {
        &self.interest
    }

    pub fn availability(&self) -> &Matrix {
        &self.availability
    }

    /// `V_p(t)`.
    #[inline]
    pub fn v(&self, p: usize, t: usize) -> f64 {
        self.interest.get(p, t)
    }

    /// `A_p(s)`.
    #[inline]
    pub fn a(&self, p: usize, s: usize) -> f64 {
        self.availability.get(p, s)
    }

    #[inline]
    pub fn weight(&self, p: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[p])
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.m() as f64,
        }
    }

    /// `n x l` matrix of weighted expected crowd `sum_p w_p V_p(t) A_p(s)`.
    pub fn crowd_matrix(&self) -> Matrix {
        let (n, l) = (self.n(), self.l());
        let mut out = Matrix::zeros(n, l);
        for p in 0..self.m() {
            let w = self.weight(p);
            let arow = self.availability.row(p);
            for t in 0..n {
                let wv = w * self.v(p, t);
                if wv == 0.0 {
                    continue;
                }
                let base = t * l;
                for (s, &a) in arow.iter().enumerate() {
                    out.data[base + s] += wv * a;
                }
            }
        }
        out
    }

    /// Overall interest `sum_p w_p V_p(t)` per talk.
    pub fn overall_interest(&self) -> Vec<f64> {
        (0..self.n())
            .map(|t| (0..self.m()).map(|p| self.weight(p) * self.v(p, t)).sum())
            .collect()
    }

    /// Overall availability `sum_p w_p A_p(s)` per slot.
    pub fn overall_availability(&self) -> Vec<f64> {
        (0..self.l())
            .map(|s| (0..self.m()).map(|p| self.weight(p) * self.a(p, s)).sum())
            .collect()
    }

    pub fn talk_index(&self, id: &str) -> Option<usize> {
        self.talks.iter().position(|t| t.id == id)
    }

    pub fn slot_index(&self, id: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    /// Sub-instance over the given talks and slots (indices into `self`).
    /// Slot order is preserved chronologically.
    pub fn restrict(&self, talks: &[usize], slots: &[usize]) -> Result<SchedulingInstance> {
        let mut slots = slots.to_vec();
        slots.sort_unstable();
        let interest = Matrix::from_fn(self.m(), talks.len(), |p, j| self.v(p, talks[j]));
        let availability = Matrix::from_fn(self.m(), slots.len(), |p, j| self.a(p, slots[j]));
        SchedulingInstance::new(
            self.participants.clone(),
            talks.iter().map(|&t| self.talks[t].clone()).collect(),
            slots.iter().map(|&s| self.slots[s].clone()).collect(),
            interest,
            availability,
            self.weights.clone(),
        )
    }

    /// Same instance with different participant rows and weights.
    pub fn with_participants(
        &self,
        participants: Vec<Participant>,
        interest: Matrix,
        availability: Matrix,
        weights: Option<Vec<f64>>,
    ) -> Result<SchedulingInstance> {
        SchedulingInstance::new(
            participants,
            self.talks.clone(),
            self.slots.clone(),
            interest,
            availability,
            weights,
        )
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            participants: self.participants.clone(),
            talks: self.talks.clone(),
            slots: self.slots.clone(),
            interest: self.interest.to_rows(),
            availability: self.availability.to_rows(),
            weights: self.weights.clone(),
        }
    }
}

impl TryFrom<RawInstance> for SchedulingInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let interest = Matrix::from_rows(&raw.interest, raw.talks.len(), "interest")?;
        let availability = Matrix::from_rows(&raw.availability, raw.slots.len(), "availability")?;
        SchedulingInstance::new(
            raw.participants,
            raw.talks,
            raw.slots,
            interest,
            availability,
            raw.weights,
        )
    }
}

/// Validates a raw instance and returns the immutable form.
pub fn validate_instance(raw: RawInstance) -> Result<SchedulingInstance> {
    SchedulingInstance::try_from(raw)
}

/// `count` back-to-back slots of `duration` minutes starting at `start`.
pub fn uniform_slots(count: usize, start: i64, duration: i64) -> Vec<Slot> {
    (0..count)
        .map(|s| Slot {
            id: format!("s{s}"),
            start_utc_min: start + s as i64 * duration,
            duration_min: duration,
        })
        .collect()
}

fn check_dims(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

fn check_range(matrix: &'static str, mat: &Matrix) -> Result<()> {
    for r in 0..mat.rows() {
        for (c, &value) in mat.row(r).iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RangeViolation {
                    matrix,
                    row: r,
                    col: c,
                    value,
                });
            }
        }
    }
    Ok(())
}

fn unique_ids<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashMap::new();
    for (i, id) in ids.enumerate() {
        if seen.insert(id, i).is_some() {
            return Err(Error::InvalidInstance(format!(
                "duplicate {what} id `{id}`"
            )));
        }
    }
    Ok(())
}

/// A one-to-one mapping from every talk to a slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    slot_of: Vec<usize>,
}

impl Schedule {
    /// `slot_of[t]` is the slot index of talk `t`.
    pub fn new(instance: &SchedulingInstance, slot_of: Vec<usize>) -> Result<Self> {
        if slot_of.len() != instance.n() {
            return Err(Error::InvalidSchedule(format!(
                "schedule covers {} talks, instance has {}",
                slot_of.len(),
                instance.n()
            )));
        }
        let mut used = vec![false; instance.l()];
        for (t, &s) in slot_of.iter().enumerate() {
            if s >= instance.l() {
                return Err(Error::InvalidSchedule(format!(
                    "talk {t} assigned to slot index {s} >= {}",
                    instance.l()
                )));
            }
            if std::mem::replace(&mut used[s], true) {
                return Err(Error::InvalidSchedule(format!("slot index {s} used twice")));
            }
        }
        Ok(Schedule { slot_of })
    }

    #[inline]
    pub fn slot_of(&self, talk: usize) -> usize {
        self.slot_of[talk]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.slot_of
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.slot_of
            .iter()
            .enumerate()
            .map(|(talk, &slot)| Assignment { talk, slot })
    }

    /// Used slot indices in increasing order.
    pub fn used_slots(&self) -> Vec<usize> {
        let mut s = self.slot_of.clone();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub talk: usize,
    pub slot: usize,
}

/// Ordered rounds of partial assignments. A talk may appear in several
/// rounds; a slot is used at most once overall.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiRoundSchedule {
    rounds: Vec<Vec<Assignment>>,
}

impl MultiRoundSchedule {
    pub fn new(instance: &SchedulingInstance, rounds: Vec<Vec<Assignment>>) -> Result<Self> {
        let mut used = vec![false; instance.l()];
        for (r, round) in rounds.iter().enumerate() {
            let mut seen = vec![false; instance.n()];
            for a in round {
                if a.talk >= instance.n() {
                    return Err(Error::InvalidSchedule(format!(
                        "round {r}: talk index {} out of range",
                        a.talk
                    )));
                }
                if a.slot >= instance.l() {
                    return Err(Error::InvalidSchedule(format!(
                        "round {r}: slot index {} out of range",
                        a.slot
                    )));
                }
                if std::mem::replace(&mut seen[a.talk], true) {
                    return Err(Error::InvalidSchedule(format!(
                        "round {r}: talk {} appears twice",
                        a.talk
                    )));
                }
                if std::mem::replace(&mut used[a.slot], true) {
                    return Err(Error::InvalidSchedule(format!(
                        "slot {} used more than once",
                        a.slot
                    )));
                }
            }
        }
        let rounds = rounds
            .into_iter()
            .map(|mut round| {
                round.sort_unstable();
                round
            })
            .collect();
        Ok(MultiRoundSchedule { rounds })
    }

    pub fn rounds(&self) -> &[Vec<Assignment>] {
        &self.rounds
    }

    pub fn all_assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rounds.iter().flatten().copied()
    }

    pub fn used_slot_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// Collapses the rounds into a [`Schedule`] when every talk is placed
    /// exactly once overall.
    pub fn to_single(&self, instance: &SchedulingInstance) -> Result<Schedule> {
        let mut slot_of = vec![usize::MAX; instance.n()];
        for a in self.all_assignments() {
            if slot_of[a.talk] != usize::MAX {
                return Err(Error::InvalidSchedule(format!(
                    "talk `{}` is scheduled more than once",
                    instance.talks()[a.talk].id
                )));
            }
            slot_of[a.talk] = a.slot;
        }
        if let Some(t) = slot_of.iter().position(|&s| s == usize::MAX) {
            return Err(Error::InvalidSchedule(format!(
                "talk `{}` is not scheduled",
                instance.talks()[t].id
            )));
        }
        Schedule::new(instance, slot_of)
    }
}

impl From<&Schedule> for MultiRoundSchedule {
    fn from(schedule: &Schedule) -> Self {
        MultiRoundSchedule {
            rounds: vec![schedule.assignments().collect()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn example_problem_1_is_valid() {
        let inst = fixtures::example_problem_1();
        assert_eq!((inst.m(), inst.n(), inst.l()), (2, 1, 3));
        assert_eq!(inst.a(1, 1), 0.49);
    }

    #[test]
    fn interest_out_of_range_is_rejected() {
        let mut raw = fixtures::example_problem_2().to_raw();
        raw.interest[0][1] = 1.2;
        match validate_instance(raw) {
            Err(Error::RangeViolation { matrix, value, .. }) => {
                assert_eq!(matrix, "interest");
                assert_eq!(value, 1.2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn more_talks_than_slots_is_rejected() {
        let interest = Matrix::from_fn(1, 4, |_, _| 0.5);
        let availability = Matrix::from_fn(1, 3, |_, _| 0.5);
        assert!(matches!(
            SchedulingInstance::from_matrices(interest, availability, 30),
            Err(Error::TooManyTalks { talks: 4, slots: 3 })
        ));
    }

    #[test]
    fn wrong_availability_shape_is_rejected() {
        let mut raw = fixtures::example_problem_3().to_raw();
        raw.availability.pop();
        assert!(matches!(
            validate_instance(raw),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overlapping_slots_are_rejected() {
        let mut raw = fixtures::example_problem_1().to_raw();
        raw.slots[1].start_utc_min = raw.slots[0].start_utc_min + 10;
        assert!(matches!(
            validate_instance(raw),
            Err(Error::SlotOverlap { .. })
        ));
    }

    #[test]
    fn non_positive_weight_is_rejected() {
        let mut raw = fixtures::example_problem_1().to_raw();
        raw.weights = Some(vec![1.0, 0.0]);
        assert!(matches!(
            validate_instance(raw),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
    }

    #[test]
    fn schedule_must_be_injective_and_in_range() {
        let inst = fixtures::example_problem_3();
        assert!(Schedule::new(&inst, vec![1, 1]).is_err());
        assert!(Schedule::new(&inst, vec![0, 4]).is_err());
        assert!(Schedule::new(&inst, vec![0]).is_err());
        let s = Schedule::new(&inst, vec![3, 0]).unwrap();
        assert_eq!(s.used_slots(), vec![0, 3]);
    }

    #[test]
    fn multi_round_rejects_slot_reuse_but_allows_repeats() {
        let inst = fixtures::example_problem_3();
        let ok = MultiRoundSchedule::new(
            &inst,
            vec![
                vec![Assignment { talk: 0, slot: 0 }],
                vec![Assignment { talk: 0, slot: 2 }],
            ],
        );
        assert!(ok.is_ok());
        let bad = MultiRoundSchedule::new(
            &inst,
            vec![
                vec![Assignment { talk: 0, slot: 0 }],
                vec![Assignment { talk: 1, slot: 0 }],
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn restrict_keeps_selected_rows_and_columns() {
        let inst = fixtures::example_problem_3();
        let sub = inst.restrict(&[1], &[3, 1]).unwrap();
        assert_eq!((sub.n(), sub.l()), (1, 2));
        assert_eq!(sub.slots()[0].id, "s2");
        assert_eq!(sub.a(1, 1), 0.2);
        assert_eq!(sub.v(0, 0), 0.7);
    }

    #[test]
    fn crowd_matrix_uses_weights() {
        let mut raw = fixtures::example_problem_3().to_raw();
        raw.weights = Some(vec![2.0, 1.0]);
        let inst = validate_instance(raw).unwrap();
        let g = inst.crowd_matrix();
        assert!((g.get(0, 0) - 3.0).abs() < 1e-12);
        assert!((g.get(1, 3) - 0.7 * 0.2 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn double_transpose_is_identity() {
        let inst = crate::datagen::gen_uniform(5, 4, 7, 3).unwrap();
        assert_eq!(inst.interest().transpose().transpose(), *inst.interest());
        assert_eq!(
            inst.availability().transpose().transpose(),
            *inst.availability()
        );
    }
}

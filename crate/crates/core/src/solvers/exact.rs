//! Exhaustive search over injective assignments.
//!
//! Slots whose availability columns are identical are interchangeable, so
//! a slot is only offered once every lower-index slot of its class is taken.
//! The surviving assignment of each class is the lexicographically smallest
//! member, which keeps the "first lexicographic maximum" rule intact.

use rayon::prelude::*;

use super::{Diagnostics, Method, ObjectiveContext, ObjectiveSpec, SolveResult};
use crate::error::{Error, Result};
use crate::model::{Schedule, SchedulingInstance};

/// Default cap on `l! / (l - n)!`.
pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// Improvements smaller than this do not displace an earlier assignment.
const TIE_EPS: f64 = 1e-12;

/// Branches below this size are searched on the calling thread.
const PARALLEL_THRESHOLD: u128 = 50_000;

/// Number of injective assignments `l! / (l - n)!`, saturating.
pub(crate) fn assignment_count(n: usize, l: usize) -> u128 {
    let mut total: u128 = 1;
    for k in 0..n {
        total = total.saturating_mul((l - k) as u128);
    }
    total
}

/// Schedule maximizing the scalarized objective; ties go to the
/// lexicographically smallest slot vector.
pub fn solve_exact(
    instance: &SchedulingInstance,
    objective: &ObjectiveSpec,
    budget: u128,
) -> Result<SolveResult> {
    objective.validate()?;
    let (m, n, l) = (instance.m(), instance.n(), instance.l());
    let required = assignment_count(n, l);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let ctx = ObjectiveContext::new(instance, objective);
    let mut gain = vec![0.0; n * l * m];
    for t in 0..n {
        for s in 0..l {
            let base = (t * l + s) * m;
            for p in 0..m {
                gain[base + p] = instance.v(p, t) * instance.a(p, s);
            }
        }
    }
    let prev_same: Vec<Option<usize>> = (0..l)
        .map(|s| (0..s).rev().find(|&r| same_column(instance, r, s)))
        .collect();
    let shared = Shared {
        ctx: &ctx,
        weights: objective,
        gain: &gain,
        prev_same: &prev_same,
        m,
        n,
        l,
    };

    // the first talk's slot choice splits the search; branches are combined
    // in slot order so the answer does not depend on scheduling
    let roots: Vec<usize> = (0..l).filter(|&s| prev_same[s].is_none()).collect();
    let run = |&s: &usize| shared.branch(s);
    let branches: Vec<Branch> = if required >= PARALLEL_THRESHOLD {
        roots.par_iter().map(run).collect()
    } else {
        roots.iter().map(run).collect()
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut enumerated = 0u64;
    for b in branches {
        enumerated += b.count;
        if let Some((v, a)) = b.best {
            if best.as_ref().is_none_or(|(bv, _)| v > bv + TIE_EPS) {
                best = Some((v, a));
            }
        }
    }
    let (_, slot_of) = best.expect("at least one assignment exists when n <= l");
    log::debug!("exact search evaluated {enumerated} of {required} assignments");
    let schedule = Schedule::new(instance, slot_of)?;
    Ok(SolveResult::new(
        instance,
        schedule,
        Method::Exact,
        *objective,
        Diagnostics {
            enumerated: Some(enumerated),
            ..Diagnostics::default()
        },
    ))
}

fn same_column(instance: &SchedulingInstance, a: usize, b: usize) -> bool {
    (0..instance.m()).all(|p| instance.a(p, a) == instance.a(p, b))
}

struct Shared<'a> {
    ctx: &'a ObjectiveContext,
    weights: &'a ObjectiveSpec,
    gain: &'a [f64],
    prev_same: &'a [Option<usize>],
    m: usize,
    n: usize,
    l: usize,
}

struct Branch {
    best: Option<(f64, Vec<usize>)>,
    count: u64,
}

struct State {
    // cg[d] holds the gains after talks 0..d are placed
    cg: Vec<Vec<f64>>,
    ec: Vec<f64>,
    used: Vec<bool>,
    slot_of: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    count: u64,
}

impl Shared<'_> {
    fn branch(&self, first: usize) -> Branch {
        let mut st = State {
            cg: vec![vec![0.0; self.m]; self.n + 1],
            ec: vec![0.0; self.n],
            used: vec![false; self.l],
            slot_of: vec![0; self.n],
            best: None,
            count: 0,
        };
        self.place(&mut st, 0, first);
        Branch {
            best: st.best,
            count: st.count,
        }
    }

    fn place(&self, st: &mut State, t: usize, s: usize) {
        let base = (t * self.l + s) * self.m;
        let (done, rest) = st.cg.split_at_mut(t + 1);
        for ((next, &prev), &g) in rest[0]
            .iter_mut()
            .zip(&done[t])
            .zip(&self.gain[base..base + self.m])
        {
            *next = prev + g;
        }
        st.ec[t] = self.ctx.crowd.get(t, s);
        st.slot_of[t] = s;
        st.used[s] = true;
        self.descend(st, t + 1);
        st.used[s] = false;
    }

    fn descend(&self, st: &mut State, t: usize) {
        if t == self.n {
            st.count += 1;
            let v = self.ctx.value(self.weights, &st.cg[self.n], &st.ec);
            if st.best.as_ref().is_none_or(|(bv, _)| v > bv + TIE_EPS) {
                st.best = Some((v, st.slot_of.clone()));
            }
            return;
        }
        for s in 0..self.l {
            if st.used[s] {
                continue;
            }
            if let Some(r) = self.prev_same[s] {
                if !st.used[r] {
                    continue;
                }
            }
            self.place(st, t, s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_partition_instance, gen_uniform};
    use crate::fixtures::{example_problem_1, example_problem_3};
    use crate::metrics::{participant_unfairness, speaker_unfairness, tep};
    use crate::solvers::{scalarized_objective, solve_em};

    /// Plain enumeration without symmetry reduction.
    fn brute(inst: &SchedulingInstance, w: &ObjectiveSpec) -> (f64, Vec<usize>) {
        fn go(
            inst: &SchedulingInstance,
            w: &ObjectiveSpec,
            cur: &mut Vec<usize>,
            used: &mut Vec<bool>,
            best: &mut Option<(f64, Vec<usize>)>,
        ) {
            if cur.len() == inst.n() {
                let s = Schedule::new(inst, cur.clone()).unwrap();
                let v = scalarized_objective(inst, &s, w);
                if best.as_ref().is_none_or(|(bv, _)| v > bv + TIE_EPS) {
                    *best = Some((v, cur.clone()));
                }
                return;
            }
            for s in 0..inst.l() {
                if !used[s] {
                    used[s] = true;
                    cur.push(s);
                    go(inst, w, cur, used, best);
                    cur.pop();
                    used[s] = false;
                }
            }
        }
        let mut best = None;
        go(
            inst,
            w,
            &mut Vec::new(),
            &mut vec![false; inst.l()],
            &mut best,
        );
        best.unwrap()
    }

    #[test]
    fn example_1_prefers_the_fair_slot() {
        let ex1 = example_problem_1();
        let r = solve_exact(&ex1, &ObjectiveSpec::new(1.0, 1.0, 0.0), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.schedule.as_slice(), &[1]);
        assert!((r.objective - 0.49).abs() < 1e-12);
    }

    #[test]
    fn example_3_speaker_fair_optimum() {
        let ex3 = example_problem_3();
        let r = solve_exact(&ex3, &ObjectiveSpec::sfair(), DEFAULT_BUDGET).unwrap();
        assert!(speaker_unfairness(&ex3, &r.schedule).abs() < 1e-12);
        assert!(r.objective.abs() < 1e-12);
    }

    #[test]
    fn efficiency_matches_em() {
        for seed in 0..10 {
            let inst = gen_uniform(5, 4, 6, seed).unwrap();
            let r = solve_exact(&inst, &ObjectiveSpec::efficiency(), DEFAULT_BUDGET).unwrap();
            let em = solve_em(&inst);
            assert!((tep(&inst, &r.schedule) - tep(&inst, &em.schedule)).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetry_reduction_keeps_first_maximum() {
        for seed in 0..6 {
            let inst = gen_partition_instance(&[1 + seed, 2, 3, 2]).unwrap();
            let w = ObjectiveSpec::new(0.5, 1.0, 0.3);
            let r = solve_exact(&inst, &w, DEFAULT_BUDGET).unwrap();
            let (bv, ba) = brute(&inst, &w);
            assert!((r.objective - bv).abs() < 1e-12);
            assert_eq!(r.schedule.as_slice(), ba.as_slice());
            assert!(r.diagnostics.enumerated.unwrap() < assignment_count(4, 8) as u64);
        }
        for seed in 0..6 {
            let inst = gen_uniform(3, 3, 5, seed).unwrap();
            let w = ObjectiveSpec::new(1.0, 0.5, 0.5);
            let r = solve_exact(&inst, &w, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.schedule.as_slice(), brute(&inst, &w).1.as_slice());
        }
    }

    #[test]
    fn partition_instance_closes_gap() {
        let inst = gen_partition_instance(&[1, 1]).unwrap();
        let r = solve_exact(&inst, &ObjectiveSpec::pfair(), DEFAULT_BUDGET).unwrap();
        assert!(participant_unfairness(&inst, &r.schedule) < 1e-12);
        let inst = gen_partition_instance(&[1, 2]).unwrap();
        let r = solve_exact(&inst, &ObjectiveSpec::pfair(), DEFAULT_BUDGET).unwrap();
        assert!(participant_unfairness(&inst, &r.schedule) > 1e-9);
    }

    #[test]
    fn parallel_and_serial_agree() {
        // 7 talks over 8 slots is above the parallel threshold
        let inst = gen_uniform(4, 7, 8, 3).unwrap();
        let w = ObjectiveSpec::new(1.0, 0.5, 0.5);
        let a = solve_exact(&inst, &w, DEFAULT_BUDGET).unwrap();
        let b = solve_exact(&inst, &w, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.schedule, b.schedule);
        assert_eq!(
            a.diagnostics.enumerated,
            Some(assignment_count(7, 8) as u64)
        );
    }

    #[test]
    fn budget_guard() {
        let inst = gen_uniform(12, 12, 30, 1).unwrap();
        match solve_exact(&inst, &ObjectiveSpec::efficiency(), DEFAULT_BUDGET) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(budget, DEFAULT_BUDGET);
                assert!(required > budget);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
        assert_eq!(assignment_count(3, 5), 60);
    }
}

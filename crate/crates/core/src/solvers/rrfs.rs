//! Repeated rounding of fractional solutions.
//!
//! Each outer iteration solves the relaxed joint program on the talks and
//! slots still open, then rounds greedily: take the largest entry of `X`,
//! fix that talk to that slot, clear its row and column, repeat until
//! nothing above [`RrfsOptions::zero_threshold`] is left. Residual programs
//! use `IEC` over the remaining slots and `ICG` from the full instance.

use std::collections::HashMap;

use super::{Diagnostics, Method, ObjectiveSpec, SolveResult};
use crate::error::{Error, Result};
use crate::lp::build_joint_lp_with;
use crate::metrics::Normalizers;
use crate::model::{Matrix, Participant, Schedule, SchedulingInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrfsOptions {
    /// Simplex feasibility and optimality tolerance.
    pub tolerance: f64,
    /// Entries below this are treated as zero when rounding.
    pub zero_threshold: f64,
    /// Entries within this of the maximum count as tied.
    pub tie_tolerance: f64,
    /// Collapse participants with identical residual rows into one weighted
    /// row before building the program. Does not change the optimum.
    pub merge_duplicates: bool,
}

impl Default for RrfsOptions {
    fn default() -> Self {
        RrfsOptions {
            tolerance: 1e-8,
            zero_threshold: 1e-9,
            tie_tolerance: 1e-12,
            merge_duplicates: true,
        }
    }
}

pub fn solve_rrfs(instance: &SchedulingInstance, objective: &ObjectiveSpec) -> Result<SolveResult> {
    solve_rrfs_with(instance, objective, &RrfsOptions::default())
}

pub fn solve_rrfs_with(
    instance: &SchedulingInstance,
    objective: &ObjectiveSpec,
    options: &RrfsOptions,
) -> Result<SolveResult> {
    objective.validate()?;
    let n = instance.n();
    let full_icg = Normalizers::of(instance).icg;
    let mut open_talks: Vec<usize> = (0..n).collect();
    let mut open_slots: Vec<usize> = (0..instance.l()).collect();
    let mut slot_of = vec![usize::MAX; n];
    let mut iterations = 0usize;
    let mut pivots = 0usize;

    while !open_talks.is_empty() {
        iterations += 1;
        if iterations > n {
            return Err(Error::NumericalFailure(
                "rounding made no progress within n relaxations".into(),
            ));
        }
        let residual = instance.restrict(&open_talks, &open_slots)?;
        let iec = Normalizers::of(&residual).iec;
        let (program_instance, icg) = if options.merge_duplicates {
            merge_duplicates(&residual, &full_icg)?
        } else {
            (residual, full_icg.clone())
        };
        let normalizers = Normalizers { icg, iec };
        let joint = build_joint_lp_with(&program_instance, objective, &normalizers)?;
        let solution = joint.solve(options.tolerance)?;
        pivots += solution.certificate.iterations;
        log::debug!(
            "relaxation {iterations}: {} talks, {} slots, objective {:.6}",
            open_talks.len(),
            open_slots.len(),
            solution.objective
        );

        let picks = round(solution.x, options);
        if picks.is_empty() {
            return Err(Error::NumericalFailure(
                "relaxed solution has no entry above the zero threshold".into(),
            ));
        }
        for &(t, s) in &picks {
            slot_of[open_talks[t]] = open_slots[s];
        }
        let mut taken_t = vec![false; open_talks.len()];
        let mut taken_s = vec![false; open_slots.len()];
        for &(t, s) in &picks {
            taken_t[t] = true;
            taken_s[s] = true;
        }
        open_talks = keep_untaken(&open_talks, &taken_t);
        open_slots = keep_untaken(&open_slots, &taken_s);
    }

    let schedule = Schedule::new(instance, slot_of)?;
    Ok(SolveResult::new(
        instance,
        schedule,
        Method::Rrfs,
        *objective,
        Diagnostics {
            outer_iterations: Some(iterations),
            lp_pivots: Some(pivots),
            ..Diagnostics::default()
        },
    ))
}

fn keep_untaken(items: &[usize], taken: &[bool]) -> Vec<usize> {
    items
        .iter()
        .zip(taken)
        .filter(|(_, &t)| !t)
        .map(|(&i, _)| i)
        .collect()
}

/// Greedy rounding of a fractional `n x l` matrix into (talk, slot) pairs.
pub(crate) fn round(mut x: Matrix, options: &RrfsOptions) -> Vec<(usize, usize)> {
    let (n, l) = (x.rows(), x.cols());
    let mut picks = Vec::new();
    loop {
        let max = x.as_slice().iter().copied().fold(0.0, f64::max);
        if max < options.zero_threshold {
            break;
        }
        let cut = max - options.tie_tolerance;
        let idx = x
            .as_slice()
            .iter()
            .position(|&v| v >= cut)
            .expect("maximum is present");
        let (t, s) = (idx / l, idx % l);
        picks.push((t, s));
        for j in 0..l {
            x.set(t, j, 0.0);
        }
        for i in 0..n {
            x.set(i, s, 0.0);
        }
    }
    picks
}

/// Participants with identical interest rows, availability rows and `ICG`
/// become one row carrying their summed weight.
fn merge_duplicates(
    instance: &SchedulingInstance,
    icg: &[f64],
) -> Result<(SchedulingInstance, Vec<f64>)> {
    let m = instance.m();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for p in 0..m {
        let key: Vec<u64> = instance
            .interest()
            .row(p)
            .iter()
            .chain(instance.availability().row(p))
            .chain(std::iter::once(&icg[p]))
            .map(|v| v.to_bits())
            .collect();
        match index.get(&key) {
            Some(&g) => weights[g] += instance.weight(p),
            None => {
                index.insert(key, reps.len());
                reps.push(p);
                weights.push(instance.weight(p));
            }
        }
    }
    if reps.len() == m {
        return Ok((instance.clone(), icg.to_vec()));
    }
    log::debug!("merged {m} participants into {} distinct rows", reps.len());
    let participants: Vec<Participant> = reps
        .iter()
        .map(|&p| instance.participants()[p].clone())
        .collect();
    let interest = Matrix::from_fn(reps.len(), instance.n(), |g, t| instance.v(reps[g], t));
    let availability = Matrix::from_fn(reps.len(), instance.l(), |g, s| instance.a(reps[g], s));
    let merged = instance.with_participants(participants, interest, availability, Some(weights))?;
    Ok((merged, reps.iter().map(|&p| icg[p]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::gen_uniform;
    use crate::fixtures::{example_problem_1, example_problem_2, example_problem_3};
    use crate::metrics::tep;
    use crate::solvers::{solve_em, solve_exact, DEFAULT_BUDGET};

    #[test]
    fn efficiency_objective_reproduces_em() {
        for seed in 0..15 {
            let inst = gen_uniform(6, 4, 7, seed).unwrap();
            let r = solve_rrfs(&inst, &ObjectiveSpec::efficiency()).unwrap();
            let em = solve_em(&inst);
            assert!((tep(&inst, &r.schedule) - tep(&inst, &em.schedule)).abs() < 1e-6);
        }
        let ex2 = example_problem_2();
        let r = solve_rrfs(&ex2, &ObjectiveSpec::efficiency()).unwrap();
        assert!((tep(&ex2, &r.schedule) - 1.4).abs() < 1e-9);
    }

    #[test]
    fn example_1_rounds_the_split_relaxation_to_the_first_slot() {
        // The relaxation splits the talk evenly over s1 and s3 (objective
        // 0.5); rounding keeps s1 and lands on a Psi^P = 1 schedule, while
        // the integral optimum is s2 with 0.49.
        let ex1 = example_problem_1();
        let w = ObjectiveSpec::new(1.0, 1.0, 0.0);
        let r = solve_rrfs(&ex1, &w).unwrap();
        assert_eq!(r.schedule.as_slice(), &[0]);
        assert!((r.objective - (0.5 - 1.0)).abs() < 1e-9);
        let exact = solve_exact(&ex1, &w, DEFAULT_BUDGET).unwrap();
        assert!((exact.objective - 0.49).abs() < 1e-12);
        assert_eq!(r.diagnostics.outer_iterations, Some(1));
    }

    #[test]
    fn example_3_speaker_fairness() {
        let ex3 = example_problem_3();
        let r = solve_rrfs(&ex3, &ObjectiveSpec::sfair()).unwrap();
        let exact = solve_exact(&ex3, &ObjectiveSpec::sfair(), DEFAULT_BUDGET).unwrap();
        assert!(r.objective <= exact.objective + 1e-12);
        assert_eq!(r.schedule.len(), 2);
    }

    #[test]
    fn outer_iterations_bounded_by_talk_count() {
        for seed in 0..10 {
            let inst = gen_uniform(5, 5, 6, seed).unwrap();
            let r = solve_rrfs(&inst, &ObjectiveSpec::new(1.0, 0.5, 0.5)).unwrap();
            assert!(r.diagnostics.outer_iterations.unwrap() <= 5);
        }
    }

    #[test]
    fn merging_duplicates_does_not_change_the_result() {
        let base = gen_uniform(3, 4, 6, 4).unwrap();
        let rows = [0usize, 1, 0, 2, 1, 0];
        let inst = base
            .with_participants(
                (0..rows.len())
                    .map(|i| Participant {
                        id: format!("q{i}"),
                    })
                    .collect(),
                Matrix::from_fn(rows.len(), 4, |p, t| base.v(rows[p], t)),
                Matrix::from_fn(rows.len(), 6, |p, s| base.a(rows[p], s)),
                None,
            )
            .unwrap();
        let w = ObjectiveSpec::new(1.0, 0.5, 0.5);
        let merged = solve_rrfs(&inst, &w).unwrap();
        let plain = solve_rrfs_with(
            &inst,
            &w,
            &RrfsOptions {
                merge_duplicates: false,
                ..RrfsOptions::default()
            },
        )
        .unwrap();
        assert!((merged.objective - plain.objective).abs() < 1e-9);
    }

    #[test]
    fn rounding_breaks_ties_by_index() {
        let x = Matrix::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5]], 3, "x").unwrap();
        assert_eq!(round(x, &RrfsOptions::default()), vec![(0, 0), (1, 2)]);
        let x = Matrix::from_rows(&[vec![1e-10, 0.0]], 2, "x").unwrap();
        assert!(round(x, &RrfsOptions::default()).is_empty());
    }
}

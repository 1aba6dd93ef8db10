//! The three small worked instances used throughout the docs and tests.
//!
//! Ids follow one-based naming (`p1`, `t1`, `s1`, ...); slots are one hour
//! long and start at midnight UTC.

use crate::model::{Matrix, Participant, SchedulingInstance, Slot, Talk};

fn build(talk_ids: &[&str], interest: &[&[f64]], availability: &[&[f64]]) -> SchedulingInstance {
    let m = interest.len();
    let participants = if m == 1 {
        vec![Participant { id: "p".into() }]
    } else {
        (1..=m)
            .map(|p| Participant {
                id: format!("p{p}"),
            })
            .collect()
    };
    let talks = talk_ids
        .iter()
        .map(|id| Talk {
            id: (*id).to_string(),
            priority: None,
        })
        .collect();
    let l = availability[0].len();
    let slots = (0..l)
        .map(|s| Slot {
            id: format!("s{}", s + 1),
            start_utc_min: 60 * s as i64,
            duration_min: 60,
        })
        .collect();
    let v = Matrix::from_fn(m, talk_ids.len(), |p, t| interest[p][t]);
    let a = Matrix::from_fn(m, l, |p, s| availability[p][s]);
    SchedulingInstance::new(participants, talks, slots, v, a, None).expect("fixture is valid")
}

/// Two participants, one talk, three slots; the middle slot is a
/// compromise both can partly attend.
pub fn example_problem_1() -> SchedulingInstance {
    build(
        &["t"],
        &[&[1.0], &[1.0]],
        &[&[1.0, 0.49, 0.0], &[0.0, 0.49, 1.0]],
    )
}

/// One participant, two talks, three slots.
pub fn example_problem_2() -> SchedulingInstance {
    build(&["t1", "t2"], &[&[1.0, 0.5]], &[&[1.0, 0.75, 0.8]])
}

/// Two participants with identical interests and partly disjoint
/// availability over four slots.
pub fn example_problem_3() -> SchedulingInstance {
    build(
        &["t1", "t2"],
        &[&[1.0, 0.7], &[1.0, 0.7]],
        &[&[1.0, 1.0, 0.0, 0.2], &[1.0, 0.0, 1.0, 0.2]],
    )
}

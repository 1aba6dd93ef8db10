//! The three hand-sized instances: efficiency versus fairness on each.
use fairconf::fixtures::{example_problem_1, example_problem_2, example_problem_3};
use fairconf::solvers::{solve_em, solve_exact, ObjectiveSpec, DEFAULT_BUDGET};
use fairconf::MetricsReport;

fn main() -> fairconf::Result<()> {
    let cases = [
        ("example 1", example_problem_1(), ObjectiveSpec::pfair()),
        ("example 2", example_problem_2(), ObjectiveSpec::sfair()),
        ("example 3", example_problem_3(), ObjectiveSpec::sfair()),
    ];
    for (name, inst, fair) in cases {
        let em = solve_em(&inst);
        let fair = solve_exact(&inst, &fair, DEFAULT_BUDGET)?;
        for (label, r) in [("em", &em), ("fair", &fair)] {
            let m = MetricsReport::evaluate(&inst, &r.schedule);
            println!(
                "{name:<10} {label:<5} slots {:?}  TEP {:.3}  Psi^P {:.3}  Psi^S {:.3}",
                r.schedule.as_slice(),
                m.tep,
                m.participant_unfairness,
                m.speaker_unfairness
            );
        }
    }
    Ok(())
}

//! Priority groups scheduled in rounds, with the top group repeated at the end.
use fairconf::datagen::recsys_like;
use fairconf::pipeline::{
    partition_by_priority, priority_report, run_priority_schedule, PriorityPlan,
};
use fairconf::solvers::{ObjectiveSpec, Solver};

fn main() -> fairconf::Result<()> {
    let inst = recsys_like(0)?;
    let groups = partition_by_priority(&inst, 3)?;
    let w = ObjectiveSpec::mfairconf(0.5, 0.5);
    for rounds in [vec![0, 1, 2], vec![0, 1, 2, 0]] {
        // IAM keeps this quick; swap in Solver::Rrfs for the fair variant.
        let plan = PriorityPlan::new(&inst, groups.clone(), rounds, w, Solver::Iam)?;
        let schedule = run_priority_schedule(&inst, &plan)?;
        let report = priority_report(&inst, &plan, &schedule);
        println!(
            "{}: TEP {:.2}  NCG mean {:.3}  NCG gini {:.3}  max NEC {:.3}",
            report.sequence,
            report.metrics.tep,
            report.ncg_mean,
            report.ncg_gini,
            report.metrics.nec.iter().cloned().fold(0.0, f64::max)
        );
    }
    Ok(())
}

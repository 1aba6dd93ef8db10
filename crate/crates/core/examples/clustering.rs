//! Shrinks a large audience to k weighted profiles, solves, scores on everyone.
use fairconf::clustering::{cluster_instance, evaluate_on_full};
use fairconf::datagen::fatrec_like;
use fairconf::solvers::{solve_rrfs, ObjectiveSpec};

fn main() -> fairconf::Result<()> {
    let inst = fatrec_like(0)?;
    let w = ObjectiveSpec::mfairconf(0.5, 0.5);
    println!(
        "participants {}, talks {}, slots {}",
        inst.m(),
        inst.n(),
        inst.l()
    );
    for k in [5, 10, 20, 40] {
        let (model, reduced) = cluster_instance(&inst, k, 0)?;
        let r = solve_rrfs(&reduced, &w)?;
        let m = evaluate_on_full(&inst, &r.schedule);
        println!(
            "k {k:>3}: lloyd iterations {:>3}  inertia {:>8.3}  TEP {:>8.3}  NCG gap {:.3}",
            model.iterations,
            model.inertia(),
            m.tep,
            m.participant_unfairness
        );
    }
    Ok(())
}

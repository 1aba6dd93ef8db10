//! EM, IAM and the fairness objectives side by side on a timezone instance.
use fairconf::datagen::{generate, GeneratorKind, GeneratorSpec, SlotGrid};
use fairconf::pipeline::{compare_methods, comparison_table};
use fairconf::solvers::{ObjectiveSpec, Solver};

fn main() -> fairconf::Result<()> {
    let inst = generate(&GeneratorSpec {
        kind: GeneratorKind::Timezone,
        m: 40,
        n: 6,
        l: 24,
        seed: 11,
        grid: Some(SlotGrid::new(24, 60)),
        offsets: None,
        interest: None,
        popularity: None,
        multiset: None,
    })?;
    let rows = compare_methods(
        &inst,
        &ObjectiveSpec::mfairconf(0.5, 0.5),
        Solver::Rrfs,
        None,
    )?;
    print!("{}", comparison_table(&rows));
    Ok(())
}

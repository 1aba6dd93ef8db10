//! A lambda grid plus baselines, printed as CSV.
use fairconf::datagen::gen_uniform;
use fairconf::pipeline::{rows_to_csv, run_sweep, SweepConfig};
use fairconf::solvers::Solver;

fn main() -> fairconf::Result<()> {
    let inst = gen_uniform(10, 6, 8, 3)?;
    let mut config = SweepConfig::new(
        Solver::exact(),
        vec![0.0, 0.25, 0.5, 1.0],
        vec![0.0, 0.5, 1.0],
    );
    config.jobs = 4;
    print!("{}", rows_to_csv(&run_sweep(&inst, &config)?)?);
    Ok(())
}

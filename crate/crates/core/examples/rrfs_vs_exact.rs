//! Relax-and-round against exhaustive search on small random instances.
use fairconf::datagen::gen_uniform;
use fairconf::solvers::{solve_exact, solve_rrfs, ObjectiveSpec, DEFAULT_BUDGET};

fn main() -> fairconf::Result<()> {
    let w = ObjectiveSpec::mfairconf(0.5, 0.5);
    println!("seed   exact     rrfs   outer  pivots");
    for seed in 0..8 {
        let inst = gen_uniform(8, 5, 7, seed)?;
        let exact = solve_exact(&inst, &w, DEFAULT_BUDGET)?;
        let rrfs = solve_rrfs(&inst, &w)?;
        println!(
            "{seed:>4} {:>8.4} {:>8.4} {:>7} {:>7}",
            exact.objective,
            rrfs.objective,
            rrfs.diagnostics.outer_iterations.unwrap_or(0),
            rrfs.diagnostics.lp_pivots.unwrap_or(0)
        );
    }
    Ok(())
}

// Solve -Δu = f with Dirichlet data on a refined pentagon and on the cube,
// and report the discrete errors.

use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::fields::Problem;
use dec_lab::meshgen::{generate, FamilySpec};
use dec_lab::ops::Operators;
use dec_lab::poisson::{assemble, error_report, solve, SolverConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (family, level, problem) in [("pentagon", 4, Problem::trig2d()), ("cube", 1, Problem::trig3d())] {
        let c = generate(&FamilySpec::new(family.parse()?, level))?;
        let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c))?));
        let system = assemble(&ops, &problem)?;
        let solved = solve(&ops, &system, &SolverConfig::default())?;
        let e = error_report(&ops, &solved.solution, &problem)?;
        println!(
            "{family} level {level}, {}: {} unknowns, {} CG iterations, max {:.3e}, H1 {:.3e}, L2 {:.3e}",
            problem.name(),
            solved.interior_unknowns,
            solved.iterations,
            e.max,
            e.h1,
            e.l2
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

// Discrete Poincaré constant and stability of the solver across levels.

use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::fields::Problem;
use dec_lab::meshgen::{generate, FamilySpec};
use dec_lab::ops::Operators;
use dec_lab::poisson::{assemble, poincare_eigenvalue, solve, SolverConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::trig2d();
    for level in 1..=5 {
        let c = generate(&FamilySpec::new("pentagon".parse()?, level))?;
        let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c))?));
        let system = assemble(&ops, &problem)?;
        let lambda = poincare_eigenvalue(&ops, &system, 200)?;
        let solved = solve(&ops, &system, &SolverConfig::default())?;
        println!(
            "level {level}: smallest eigenvalue {lambda:.6}, stability ratio {:.6}",
            solved.stability_constant
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

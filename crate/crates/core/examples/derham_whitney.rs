// De Rham maps of smooth forms onto primal and dual cells, and Whitney
// interpolation back to piecewise polynomial forms.

use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::fields::{derham_dual, derham_primal, whitney_l2_norm, Problem, WhitneyField, DEFAULT_DEGREE};
use dec_lab::meshgen::{generate, FamilySpec};
use dec_lab::ops::{Operators, Side};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&FamilySpec::new("pentagon".parse()?, 3))?;
    let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c))?));
    let dual = ops.dual();
    let p = Problem::trig2d();

    // d R u = R du, up to quadrature
    let ru = derham_primal(&p.u_field(), dual.primal(), DEFAULT_DEGREE);
    let rdu = derham_primal(&p.du_field(), dual.primal(), DEFAULT_DEGREE);
    let gap = ops.exterior_derivative(0, Side::Primal)?.apply(&ru)?.sub(&rdu)?.max_norm();
    println!("|d R u - R du| = {gap:.2e}");

    // flux of grad u through dual edges
    let flux = derham_dual(&p.du_field().hodge(), dual, DEFAULT_DEGREE);
    println!("{} dual edge fluxes, largest {:.6}", flux.len(), flux.max_norm());

    // Whitney interpolation and its L2 norm
    let w = WhitneyField::new(dual.primal(), &rdu)?;
    let x = [0.1, 0.2];
    println!("W(R du) at {x:?} = {:?}, exact {:?}", w.eval(&x)?, p.grad(&x));
    let ratio = whitney_l2_norm(dual.primal(), &rdu)? / ops.discrete_l2(&rdu)?;
    println!("|W w|_L2 / |w|_h = {ratio:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

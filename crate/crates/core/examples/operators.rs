// Exterior derivatives, Hodge stars, codifferentials and Laplacians on a
// well-centered mesh, with the identities that tie them together.

use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::meshgen::{generate, FamilySpec};
use dec_lab::ops::{Cochain, Operators, Side, Space};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&FamilySpec::new("pentagon".parse()?, 2))?;
    let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c))?));
    let n = ops.dim();

    // dd = 0 on both sides
    for side in [Side::Primal, Side::Dual] {
        let dd = ops.exterior_derivative(1, side)?.compose(ops.exterior_derivative(0, side)?)?;
        let worst = dd.to_dense().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        println!("{side} d1 d0: largest entry {worst}");
    }

    // ★★ = (-1)^{k(n-k)}
    for k in 0..=n {
        let w = Cochain::new(Space::primal(k), (0..ops.len(Space::primal(k))).map(|i| (i as f64).sin()).collect());
        let back = ops.hodge_star_dual(n - k)?.apply(&ops.hodge_star(k)?.apply(&w)?)?;
        let sign = if (k * (n - k)).is_multiple_of(2) { 1.0 } else { -1.0 };
        let err = back.values.iter().zip(&w.values).map(|(a, b)| (a - sign * b).abs()).fold(0.0, f64::max);
        println!("star star on {k}-cochains: sign {sign:+}, deviation {err:.1e}");
    }

    // (dω, η) = (ω, δη)
    let omega = Cochain::new(Space::primal(0), (0..ops.len(Space::primal(0))).map(|i| (0.3 * i as f64).cos()).collect());
    let eta = Cochain::new(Space::primal(1), (0..ops.len(Space::primal(1))).map(|i| (0.7 * i as f64).sin()).collect());
    let lhs = ops.inner_product(&ops.exterior_derivative(0, Side::Primal)?.apply(&omega)?, &eta)?;
    let rhs = ops.inner_product(&omega, &ops.codifferential(1)?.apply(&eta)?)?;
    println!("(d w, e) = {lhs:.12}, (w, delta e) = {rhs:.12}");

    let lap = ops.laplace(0)?;
    println!("{}", lap.export().lines().next().unwrap_or_default());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

// Circumcentric dual of a small mesh: dual volumes, the fragments making up
// one dual cell, and the signed dual boundary map.

use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::meshgen::{generate, FamilySpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&FamilySpec::new("pentagon".parse()?, 1))?;
    let dual = DualComplex::new(Arc::new(c))?;
    let primal = dual.primal();

    // dual cells of the vertices tile the domain
    let tiled: f64 = dual.dual_volumes(0).iter().sum();
    println!("area {:.12}, sum of dual cell areas {:.12}", primal.total_volume(), tiled);

    let hub = dual.cell(0, 0);
    println!("dual of the hub: area {:.6}, {} fragments, boundary {}", hub.volume, hub.fragments.len(), hub.is_boundary);
    for f in hub.fragments.iter().take(3) {
        println!("  flag {:?} orientation {:+} volume {:.6}", f.flag, f.orientation, f.signed_volume);
    }

    let b = dual.dual_boundary_matrix(0)?;
    let col: Vec<(usize, i32)> = b.outer_view(0).map(|v| v.iter().map(|(r, &x)| (r, x)).collect()).unwrap_or_default();
    println!("boundary of the hub's dual cell in terms of dual edges: {col:?}");
    println!("{}", dual.diagnostic_dump().lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

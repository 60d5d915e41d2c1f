#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use dec_lab::dual::DualComplex;
use dec_lab::mesh::SimplicialComplex;
use dec_lab::meshgen::{generate, jitter_interior, FamilySpec};
use dec_lab::ops::{Cochain, Operators, Space};

pub fn mesh(family: &str, level: usize) -> SimplicialComplex {
    generate(&FamilySpec::new(family.parse().unwrap(), level)).unwrap()
}

pub fn ops_of(c: SimplicialComplex) -> Operators {
    Operators::new(Arc::new(DualComplex::new(Arc::new(c)).unwrap()))
}

pub fn ops(family: &str, level: usize) -> Operators {
    ops_of(mesh(family, level))
}

pub fn jittered(family: &str, level: usize, seed: u64) -> SimplicialComplex {
    jitter_interior(&mesh(family, level), 0.4, 0.02, seed).unwrap()
}

/// Deterministic pseudo-random cochain.
pub fn wiggle(space: Space, len: usize, phase: f64) -> Cochain {
    Cochain::new(space, (0..len).map(|i| (1.3 * i as f64 + phase).sin() + 0.25 * (0.7 * i as f64).cos()).collect())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Stiffness from cotangent weights `½ (cot α + cot β)` per edge.
pub fn cotan_stiffness(c: &SimplicialComplex) -> HashMap<(usize, usize), f64> {
    let mut k: HashMap<(usize, usize), f64> = HashMap::new();
    for t in 0..c.num_simplices(2) {
        let v = c.simplex_vertices(2, t);
        for i in 0..3 {
            let (a, b, o) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
            let (pa, pb, po) = (c.vertex(a), c.vertex(b), c.vertex(o));
            let u = [pa[0] - po[0], pa[1] - po[1]];
            let w = [pb[0] - po[0], pb[1] - po[1]];
            let cot = (u[0] * w[0] + u[1] * w[1]) / (u[0] * w[1] - u[1] * w[0]).abs();
            for (r, s, x) in [(a, a, 0.5 * cot), (b, b, 0.5 * cot), (a, b, -0.5 * cot), (b, a, -0.5 * cot)] {
                *k.entry((r, s)).or_default() += x;
            }
        }
    }
    k
}

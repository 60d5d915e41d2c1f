//! Whitney interpolation of primal cochains.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::{barycentric_coordinates, factorial};
use crate::mesh::{combinations, SimplicialComplex};
use crate::ops::{Cochain, Side};

use super::{basis, covector_norm_sq, wedge_covectors, QuadratureRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhitneyError {
    #[error("point {0:?} lies outside the mesh")]
    OutsideMesh(Vec<f64>),
    #[error("Whitney forms interpolate primal cochains only")]
    DualCochain,
}

/// Piecewise polynomial form `W ω = sum_t ω(t) φ_t`,
/// `φ_[v_0..v_k] = k! sum_i (-1)^i λ_i dλ_0 ∧ .. ^i .. ∧ dλ_k`.
#[derive(Debug, Clone)]
pub struct WhitneyField<'a> {
    complex: &'a SimplicialComplex,
    cochain: &'a Cochain,
    /// Gradients of the barycentric coordinates, per top cell and local vertex.
    gradients: Vec<Vec<Vec<f64>>>,
}

impl<'a> WhitneyField<'a> {
    pub fn new(complex: &'a SimplicialComplex, cochain: &'a Cochain) -> Result<Self, WhitneyError> {
        if cochain.space.side != Side::Primal {
            return Err(WhitneyError::DualCochain);
        }
        let n = complex.dim();
        let gradients = (0..complex.num_simplices(n))
            .map(|t| {
                let pts = complex.points(n, t);
                let m = DMatrix::from_fn(n, n, |i, j| pts[j + 1][i] - pts[0][i]);
                let inv = m.try_inverse().expect("cells are non-degenerate");
                let mut g: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
                let rows: Vec<Vec<f64>> = (0..n).map(|r| inv.row(r).iter().copied().collect()).collect();
                g.push((0..n).map(|c| -rows.iter().map(|r| r[c]).sum::<f64>()).collect());
                g.extend(rows);
                g
            })
            .collect();
        Ok(Self { complex, cochain, gradients })
    }

    pub fn degree(&self) -> usize {
        self.cochain.space.degree
    }

    /// Value inside top cell `t` at barycentric coordinates `bary` (in sorted
    /// vertex order).
    pub fn eval_in_cell(&self, t: usize, bary: &[f64]) -> Vec<f64> {
        let n = self.complex.dim();
        let k = self.degree();
        let cell = self.complex.simplex_vertices(n, t);
        let grads = &self.gradients[t];
        let mut out = vec![0.0; basis(n, k).len()];
        for local in combinations(n + 1, k + 1) {
            let global: Vec<usize> = local.iter().map(|&i| cell[i]).collect();
            let (idx, sign) = self.complex.find(&global).expect("faces of a cell are stored");
            let value = sign as f64 * self.cochain.values[idx];
            if value == 0.0 {
                continue;
            }
            for i in 0..=k {
                let rest: Vec<&[f64]> = local
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &l)| grads[l].as_slice())
                    .collect();
                let w = wedge_covectors(&rest, n);
                let s = if i % 2 == 0 { 1.0 } else { -1.0 } * factorial(k) * bary[local[i]] * value;
                for (o, c) in out.iter_mut().zip(w) {
                    *o += s * c;
                }
            }
        }
        out
    }

    /// `d W ω` inside cell `t`: `dφ_[v_0..v_k] = (k+1)! dλ_0 ∧ ... ∧ dλ_k`.
    pub fn derivative_in_cell(&self, t: usize) -> Vec<f64> {
        let n = self.complex.dim();
        let k = self.degree();
        let cell = self.complex.simplex_vertices(n, t);
        let mut out = vec![0.0; basis(n, k + 1).len()];
        if k == n {
            return out;
        }
        for local in combinations(n + 1, k + 1) {
            let global: Vec<usize> = local.iter().map(|&i| cell[i]).collect();
            let (idx, sign) = self.complex.find(&global).unwrap();
            let value = sign as f64 * self.cochain.values[idx];
            let g: Vec<&[f64]> = local.iter().map(|&l| self.gradients[t][l].as_slice()).collect();
            for (o, c) in out.iter_mut().zip(wedge_covectors(&g, n)) {
                *o += factorial(k + 1) * value * c;
            }
        }
        out
    }

    /// Value at a physical point, locating the containing cell by search.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, WhitneyError> {
        let n = self.complex.dim();
        for t in 0..self.complex.num_simplices(n) {
            let pts = self.complex.points(n, t);
            if let Some(b) = barycentric_coordinates(&pts, x) {
                if b.iter().all(|&l| l >= -1e-12) {
                    return Ok(self.eval_in_cell(t, &b));
                }
            }
        }
        Err(WhitneyError::OutsideMesh(x.to_vec()))
    }
}

/// `‖W ω‖_{L²}` by cellwise quadrature, exact for the polynomial integrand.
pub fn whitney_l2_norm(complex: &SimplicialComplex, cochain: &Cochain) -> Result<f64, WhitneyError> {
    let field = WhitneyField::new(complex, cochain)?;
    let n = complex.dim();
    let rule = QuadratureRule::new(n, 2);
    let mut total = 0.0;
    for t in 0..complex.num_simplices(n) {
        let s: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(b, w)| w * covector_norm_sq(&field.eval_in_cell(t, b)))
            .sum();
        total += s * complex.volume(n, t);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::Space;

    fn right_triangle() -> SimplicialComplex {
        SimplicialComplex::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn hat_function_is_one_at_its_vertex() {
        let c = right_triangle();
        let hat = Cochain::new(Space::primal(0), vec![0.0, 1.0, 0.0]);
        let w = WhitneyField::new(&c, &hat).unwrap();
        assert!((w.eval(&[1.0, 0.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(w.eval(&[0.0, 0.0]).unwrap()[0].abs() < 1e-15);
        assert!((w.eval(&[0.5, 0.25]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!(w.eval(&[2.0, 2.0]).is_err());
    }

    #[test]
    fn hat_norm_matches_mass_matrix() {
        // ∫ λ_i² = 2|σ| / ((n+1)(n+2)) = |σ|/6 in the plane
        let c = right_triangle();
        let hat = Cochain::new(Space::primal(0), vec![1.0, 0.0, 0.0]);
        let norm = whitney_l2_norm(&c, &hat).unwrap();
        assert!((norm * norm - 0.5 / 6.0).abs() < 1e-15);
        let one = Cochain::new(Space::primal(0), vec![1.0; 3]);
        assert!((whitney_l2_norm(&c, &one).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn edge_form_integrates_to_one_on_its_edge() {
        let c = right_triangle();
        for e in 0..3 {
            let mut values = vec![0.0; 3];
            values[e] = 1.0;
            let cochain = Cochain::new(Space::primal(1), values);
            let w = WhitneyField::new(&c, &cochain).unwrap();
            let rule = QuadratureRule::new(1, 4);
            for f in 0..3 {
                let v = c.simplex_vertices(1, f);
                let pts = [c.vertex(v[0]), c.vertex(v[1])];
                // brute force: point location, then the form applied to the edge vector
                let t = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
                let integral: f64 = rule
                    .map(&pts)
                    .map(|(x, wq)| {
                        let a = w.eval(&x).unwrap();
                        wq * (a[0] * t[0] + a[1] * t[1])
                    })
                    .sum();
                let expected = if f == e { 1.0 } else { 0.0 };
                assert!((integral - expected).abs() < 1e-14, "edge {e} on {f}: {integral}");
            }
        }
    }
}

use crate::dual::DualComplex;
use crate::geometry::{factorial, sub};
use crate::mesh::SimplicialComplex;
use crate::ops::{Cochain, OpsError, Operators, Side, Space};

use super::{minors, FormField, Problem, QuadratureRule};

/// Quadrature degree for right-hand sides and general integration.
pub const DEFAULT_DEGREE: usize = 4;
/// Quadrature degree used when measuring consistency errors.
pub const PROBE_DEGREE: usize = 6;

/// Integral of a k-form over the oriented simplex `[p_0, ..., p_k]`:
/// `(1/k!) sum_q w_q field(x_q)(p_1 - p_0, ..., p_k - p_0)`.
pub fn integrate_simplex(field: &FormField, points: &[&[f64]], rule: &QuadratureRule) -> f64 {
    let k = points.len() - 1;
    assert_eq!(field.degree(), k, "form degree must match simplex dimension");
    let n = field.dim();
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let m = minors(n, &edges);
    let sum: f64 = rule
        .map(points)
        .map(|(x, w)| w * field.eval(&x).iter().zip(&m).map(|(c, d)| c * d).sum::<f64>())
        .sum();
    sum / factorial(k)
}

/// `<R ω, s> = ∫_s ω` on every k-simplex in its stored orientation.
pub fn derham_primal(field: &FormField, complex: &SimplicialComplex, degree: usize) -> Cochain {
    let k = field.degree();
    let rule = QuadratureRule::new(k, degree);
    let values = (0..complex.num_simplices(k))
        .map(|i| {
            let verts = complex.oriented_vertices(k, i);
            let pts: Vec<&[f64]> = verts.iter().map(|&v| complex.vertex(v)).collect();
            integrate_simplex(field, &pts, &rule)
        })
        .collect();
    Cochain::new(Space::primal(k), values)
}

/// `<R η, *t> = sum over fragments of ± ∫ η` for a p-form η, giving a dual
/// p-cochain indexed by the (n-p)-simplices.
pub fn derham_dual(field: &FormField, dual: &DualComplex, degree: usize) -> Cochain {
    let p = field.degree();
    let n = dual.dim();
    let k = n - p;
    let rule = QuadratureRule::new(p, degree);
    let mut values = vec![0.0; dual.primal().num_simplices(k)];
    dual.for_each_fragment_of_dim(k, |f| {
        let pts = f.points(dual);
        values[f.base] += f.orientation as f64 * integrate_simplex(field, &pts, &rule);
    });
    Cochain::new(Space::dual(p), values)
}

/// Errors of the discrete Hodge star on exact data, for a k-form ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRecord {
    /// `‖★_h R ω - R ★ω‖_∞` over dual (n-k)-cells.
    pub err_max: f64,
    /// Same cochain in the discrete L2 norm of dual cochains.
    pub err_l2_primal_side: f64,
    /// `‖★_h R (★ω) - R ★★ω‖_∞` over primal k-simplices.
    pub err_max_dual_side: f64,
    /// Same cochain in the discrete L2 norm of primal cochains.
    pub err_l2_dual_side: f64,
}

pub fn consistency_probe(field: &FormField, ops: &Operators, degree: usize) -> Result<ConsistencyRecord, OpsError> {
    let k = field.degree();
    let n = ops.dim();
    let dual = ops.dual();
    let star_field = field.hodge();

    let r = derham_primal(field, dual.primal(), degree);
    let r_star = derham_dual(&star_field, dual, degree);
    let primal_side = ops.hodge_star(k)?.apply(&r)?.sub(&r_star)?;

    let back = ops.hodge_star_dual(n - k)?.apply(&r_star)?;
    let r_star_star = derham_primal(&star_field.hodge(), dual.primal(), degree);
    let dual_side = back.sub(&r_star_star)?;

    Ok(ConsistencyRecord {
        err_max: primal_side.max_norm(),
        err_l2_primal_side: ops.discrete_l2(&primal_side)?,
        err_max_dual_side: dual_side.max_norm(),
        err_l2_dual_side: ops.discrete_l2(&dual_side)?,
    })
}

/// Pieces of `Δ_h R u - R Δu` for a 0-form `u`, restricted to interior vertices
/// (boundary dual cells are truncated, so Stokes does not apply there).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianDecomposition {
    pub interior: Vec<usize>,
    /// `Δ_h R u - R f` with `f = Δu`.
    pub consistency: Vec<f64>,
    /// `★_h d_h (★_h R du - R ★du)`, driven by the Hodge star error on 1-forms.
    pub first: Vec<f64>,
    /// `★_h R (d★du) - R (★d★du)`, a cell average against a point value.
    pub second: Vec<f64>,
}

impl LaplacianDecomposition {
    /// Largest deviation from `consistency = -(first + second)`.
    pub fn identity_residual(&self) -> f64 {
        self.consistency
            .iter()
            .zip(&self.first)
            .zip(&self.second)
            .map(|((c, a), b)| (c + a + b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_norms(&self) -> (f64, f64, f64) {
        let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (max(&self.consistency), max(&self.first), max(&self.second))
    }
}

pub fn laplacian_decomposition(
    problem: &Problem,
    ops: &Operators,
    degree: usize,
) -> Result<LaplacianDecomposition, OpsError> {
    let n = ops.dim();
    let dual = ops.dual();
    let primal = dual.primal();
    let interior: Vec<usize> = primal
        .boundary_vertices()
        .iter()
        .enumerate()
        .filter(|(_, &b)| !b)
        .map(|(v, _)| v)
        .collect();

    let u = Cochain::new(Space::primal(0), primal.vertices().map(|x| problem.u(x)).collect());
    let lap = ops.laplace(0)?.apply(&u)?;

    // d R u = R du holds exactly, so the 1-form cochain is taken from point values
    let du = ops.exterior_derivative(0, Side::Primal)?.apply(&u)?;
    let star_du = derham_dual(&problem.du_field().hodge(), dual, degree);
    let e1 = ops.hodge_star(1)?.apply(&du)?.sub(&star_du)?;
    let to_vertices = ops.hodge_star_dual(n)?;
    let first = to_vertices.apply(&ops.exterior_derivative(n - 1, Side::Dual)?.apply(&e1)?)?;

    let averaged = to_vertices.apply(&derham_dual(&problem.d_star_du(), dual, degree))?;

    let pick = |v: &[f64], f: &dyn Fn(usize, f64) -> f64| interior.iter().map(|&i| f(i, v[i])).collect::<Vec<_>>();
    // ★d★du = -f as a 0-form, and R Δu = R f at the vertices
    let f_at = |i: usize| problem.f(primal.vertex(i));
    Ok(LaplacianDecomposition {
        consistency: pick(&lap.values, &|i, x| x - f_at(i)),
        first: pick(&first.values, &|_, x| x),
        second: pick(&averaged.values, &|i, x| x + f_at(i)),
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn triangle_mesh() -> SimplicialComplex {
        let s = 3f64.sqrt() / 2.0;
        SimplicialComplex::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, s], vec![1.5, s]],
            &[vec![0, 1, 2], vec![1, 3, 2]],
        )
        .unwrap()
    }

    #[test]
    fn dx_over_an_edge_is_the_increment() {
        let c = triangle_mesh();
        let dx = FormField::constant(2, 1, vec![1.0, 0.0]);
        let r = derham_primal(&dx, &c, 4);
        for e in 0..c.num_simplices(1) {
            let v = c.simplex_vertices(1, e);
            let expected = c.vertex(v[1])[0] - c.vertex(v[0])[0];
            assert!((r.values[e] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_area_form_gives_area() {
        let c = triangle_mesh();
        let area = FormField::constant(2, 2, vec![3.0]);
        let r = derham_primal(&area, &c, 4);
        for t in 0..2 {
            assert!((r.values[t] - 3.0 * c.volume(2, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_density_on_dual_cells() {
        let c = Arc::new(triangle_mesh());
        let dual = DualComplex::new(c).unwrap();
        let r = derham_dual(&FormField::constant(2, 2, vec![2.0]), &dual, 4);
        for v in 0..4 {
            assert!((r.values[v] - 2.0 * dual.dual_volume(0, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn one_dimensional_dual_integral() {
        let c = SimplicialComplex::new(1, &[vec![0.0], vec![1.0], vec![3.0]], &[vec![0, 1], vec![1, 2]]).unwrap();
        let dual = DualComplex::new(Arc::new(c)).unwrap();
        // ∫ x^2 dx over [0.5, 2] = (8 - 0.125) / 3
        let f = FormField::volume_form(1, |x| x[0] * x[0]);
        let r = derham_dual(&f, &dual, 4);
        assert!((r.values[1] - 7.875 / 3.0).abs() < 1e-14);
        assert!((r.values[0] - 0.125 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn decomposition_identity_on_a_refined_pentagon() {
        use crate::meshgen::{generate, FamilySpec};
        let c = generate(&FamilySpec::new("pentagon".parse().unwrap(), 2)).unwrap();
        let ops = Operators::new(Arc::new(DualComplex::new(Arc::new(c)).unwrap()));
        let d = laplacian_decomposition(&Problem::trig2d(), &ops, 10).unwrap();
        assert!(d.identity_residual() < 1e-9, "{}", d.identity_residual());
        let (lap, first, second) = d.max_norms();
        assert!(lap > 0.0 && first > 0.0 && second > 0.0);
    }
}

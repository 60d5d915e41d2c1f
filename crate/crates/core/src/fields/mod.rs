//! Smooth differential forms and their discrete counterparts: quadrature,
//! deRham maps onto primal and dual cells, Whitney interpolation and the
//! analytic test problems.

mod derham;
mod problems;
mod quadrature;
mod whitney;

use std::fmt;
use std::sync::Arc;

pub use derham::{
    consistency_probe, derham_dual, derham_primal, integrate_simplex, laplacian_decomposition, ConsistencyRecord,
    LaplacianDecomposition, DEFAULT_DEGREE, PROBE_DEGREE,
};
pub use problems::{Problem, ProblemError};
pub use quadrature::QuadratureRule;
pub use whitney::{whitney_l2_norm, WhitneyError, WhitneyField};

use crate::geometry::det_columns;
use crate::mesh::{combinations, sort_parity};

type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Increasing index tuples labelling the coefficients of a k-covector in R^n.
pub fn basis(n: usize, k: usize) -> Vec<Vec<usize>> {
    combinations(n, k)
}

/// `a(v_1, ..., v_k)` for a k-covector given by its coefficients on `dx^I`.
pub fn evaluate_covector(coeffs: &[f64], n: usize, vectors: &[Vec<f64>]) -> f64 {
    coeffs.iter().zip(minors(n, vectors)).map(|(c, m)| c * m).sum()
}

/// `dx^I(v_1, ..., v_k)` for every basis index `I`, so that evaluating many
/// covectors on the same vectors is a dot product.
pub fn minors(n: usize, vectors: &[Vec<f64>]) -> Vec<f64> {
    let k = vectors.len();
    if k == 0 {
        return vec![1.0];
    }
    basis(n, k)
        .iter()
        .map(|idx| {
            let minor: Vec<Vec<f64>> = vectors.iter().map(|v| idx.iter().map(|&i| v[i]).collect()).collect();
            det_columns(&minor)
        })
        .collect()
}

/// Euclidean Hodge star of a k-covector: `*dx^I = sign(I, J) dx^J`, J the complement.
pub fn hodge_covector(coeffs: &[f64], n: usize, k: usize) -> Vec<f64> {
    apply_hodge_table(&hodge_table(n, k), coeffs)
}

/// For each basis k-covector, the position and sign of its star.
fn hodge_table(n: usize, k: usize) -> Vec<(usize, f64)> {
    let target = basis(n, n - k);
    basis(n, k)
        .iter()
        .map(|idx| {
            let complement: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
            let pos = target.iter().position(|t| *t == complement).unwrap();
            let mut perm: Vec<usize> = idx.iter().chain(&complement).copied().collect();
            (pos, sort_parity(&mut perm) as f64)
        })
        .collect()
}

fn apply_hodge_table(table: &[(usize, f64)], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; table.len()];
    for (&(pos, sign), c) in table.iter().zip(coeffs) {
        out[pos] = sign * c;
    }
    out
}

/// Coefficients of `a_1 ∧ ... ∧ a_k` for covectors given as component slices.
pub fn wedge_covectors(covectors: &[&[f64]], n: usize) -> Vec<f64> {
    let k = covectors.len();
    if k == 0 {
        return vec![1.0];
    }
    basis(n, k)
        .iter()
        .map(|idx| {
            let minor: Vec<Vec<f64>> = covectors.iter().map(|a| idx.iter().map(|&i| a[i]).collect()).collect();
            det_columns(&minor)
        })
        .collect()
}

/// Pointwise norm of a covector in the orthonormal basis `dx^I`.
pub fn covector_norm_sq(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum()
}

/// Smooth k-form on (a neighbourhood of) the mesh, given by its coefficient
/// functions on the basis `dx^I`. An exact exterior derivative can be attached.
#[derive(Clone)]
pub struct FormField {
    dim: usize,
    degree: usize,
    eval: Evaluator,
    derivative: Option<Arc<FormField>>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormField")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl FormField {
    pub fn new(dim: usize, degree: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        assert!(degree <= dim, "degree {degree} exceeds dimension {dim}");
        Self { dim, degree, eval: Arc::new(eval), derivative: None }
    }

    /// 0-form from a function.
    pub fn scalar(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(dim, 0, move |x| vec![f(x)])
    }

    /// n-form `f dx^1 ∧ ... ∧ dx^n`.
    pub fn volume_form(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(dim, dim, move |x| vec![f(x)])
    }

    pub fn constant(dim: usize, degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis(dim, degree).len());
        Self::new(dim, degree, move |_| coeffs.clone())
    }

    pub fn with_derivative(mut self, d: FormField) -> Self {
        assert_eq!(d.degree, self.degree + 1);
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn derivative(&self) -> Option<&FormField> {
        self.derivative.as_deref()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    /// Pointwise Euclidean Hodge star.
    pub fn hodge(&self) -> FormField {
        let inner = self.eval.clone();
        let (n, k) = (self.dim, self.degree);
        let table = hodge_table(n, k);
        FormField::new(n, n - k, move |x| apply_hodge_table(&table, &inner(x)))
    }

    pub fn scaled(&self, s: f64) -> FormField {
        let inner = self.eval.clone();
        let mut f = FormField::new(self.dim, self.degree, move |x| inner(x).into_iter().map(|c| s * c).collect());
        if let Some(d) = &self.derivative {
            f.derivative = Some(Arc::new(d.scaled(s)));
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hodge_in_two_and_three_dimensions() {
        // *dx = dy, *dy = -dx in the plane
        assert_eq!(hodge_covector(&[1.0, 0.0], 2, 1), vec![0.0, 1.0]);
        assert_eq!(hodge_covector(&[0.0, 1.0], 2, 1), vec![-1.0, 0.0]);
        // *1 = vol, *(dx∧dy∧dz) = 1
        assert_eq!(hodge_covector(&[2.0], 3, 0), vec![2.0]);
        assert_eq!(hodge_covector(&[2.0], 3, 3), vec![2.0]);
        // *dy = dz∧dx = -dx∧dz
        assert_eq!(hodge_covector(&[0.0, 1.0, 0.0], 3, 1), vec![0.0, -1.0, 0.0]);
        // ** = (-1)^{k(n-k)}
        let a = [0.3, -1.2, 0.7];
        for k in 1..=2 {
            let twice = hodge_covector(&hodge_covector(&a, 3, k), 3, 3 - k);
            assert_eq!(twice, a.to_vec());
        }
        let b = [0.3, -1.2];
        let twice = hodge_covector(&hodge_covector(&b, 2, 1), 2, 1);
        assert_eq!(twice, vec![-0.3, 1.2]);
    }

    #[test]
    fn covector_evaluation_is_a_determinant() {
        // dx∧dy on (e1, e2) = 1, on (e2, e1) = -1
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        assert_eq!(evaluate_covector(&[1.0], 2, &[e1.clone(), e2.clone()]), 1.0);
        assert_eq!(evaluate_covector(&[1.0], 2, &[e2, e1]), -1.0);
        assert_eq!(evaluate_covector(&[2.0, 3.0], 2, &[vec![1.0, 1.0]]), 5.0);
        let w = wedge_covectors(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]], 3);
        assert_eq!(w, vec![0.0, 1.0, 0.0]);
    }
}

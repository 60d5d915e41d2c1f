//! Discrete Dirichlet problem `δ d ω = R f` on 0-cochains.
//!
//! Boundary values are eliminated: the unknowns are the interior vertex
//! values, the system is the interior block of `S = d₀ᵀ ★₁ d₀` with the load
//! `★₀ R f - S_IB g`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use sprs::{CsMat, TriMat};
use thiserror::Error;

use crate::fields::Problem;
use crate::ops::{Cochain, OpsError, Operators, Side, Space};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoissonError {
    #[error("mesh has no interior vertices")]
    NoInteriorVertices,
    #[error("problem is {problem}-dimensional but the mesh is {mesh}-dimensional")]
    DimensionMismatch { problem: usize, mesh: usize },
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {:e}", residual_history.last().copied().unwrap_or(f64::NAN))]
    NotConverged { iterations: usize, residual_history: Vec<f64> },
    #[error("interior system is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Ops(#[from] OpsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual target.
    pub tol: f64,
    pub max_iterations: usize,
    /// Systems with fewer unknowns are factorised densely.
    pub dense_below: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iterations: 100_000, dense_below: 0 }
    }
}

/// Reduced symmetric positive definite system on the interior vertices.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    /// Interior vertex ids, in unknown order.
    pub interior: Vec<usize>,
    /// Unknown index of each vertex, `None` on the boundary.
    pub unknown: Vec<Option<usize>>,
    /// Boundary values on every vertex (zero at interior vertices).
    pub boundary_values: Vec<f64>,
    /// `R f` at every vertex.
    pub source: Vec<f64>,
    /// Interior block of the stiffness matrix, compressed rows.
    pub matrix: CsMat<f64>,
    pub rhs: Vec<f64>,
    /// Number of edges with zero dual volume (weakly well-centered meshes).
    pub zero_weight_edges: usize,
}

/// `S = d₀ᵀ ★₁ d₀` on all vertices, compressed rows.
pub fn stiffness_matrix(ops: &Operators) -> Result<CsMat<f64>, OpsError> {
    let primal = ops.dual().primal();
    let w = ops.star_weights(1)?;
    let nv = primal.num_vertices();
    let mut tri = TriMat::with_capacity((nv, nv), 4 * w.len());
    for (e, &we) in w.iter().enumerate() {
        let v = primal.simplex_vertices(1, e);
        let (a, b) = (v[0], v[1]);
        tri.add_triplet(a, a, we);
        tri.add_triplet(b, b, we);
        tri.add_triplet(a, b, -we);
        tri.add_triplet(b, a, -we);
    }
    Ok(tri.to_csr())
}

pub fn assemble(ops: &Operators, problem: &Problem) -> Result<DirichletProblem, PoissonError> {
    let primal = ops.dual().primal();
    if problem.dim() != primal.dim() {
        return Err(PoissonError::DimensionMismatch { problem: problem.dim(), mesh: primal.dim() });
    }
    let on_boundary = primal.boundary_vertices();
    let mut unknown = vec![None; primal.num_vertices()];
    let mut interior = Vec::new();
    for (v, &b) in on_boundary.iter().enumerate() {
        if !b {
            unknown[v] = Some(interior.len());
            interior.push(v);
        }
    }
    if interior.is_empty() {
        return Err(PoissonError::NoInteriorVertices);
    }
    let boundary_values: Vec<f64> = (0..primal.num_vertices())
        .map(|v| if on_boundary[v] { problem.u(primal.vertex(v)) } else { 0.0 })
        .collect();
    let source: Vec<f64> = primal.vertices().map(|x| problem.f(x)).collect();
    let mass = ops.star_weights(0)?;
    let full = stiffness_matrix(ops)?;

    let m = interior.len();
    let mut tri = TriMat::with_capacity((m, m), full.nnz());
    let mut rhs: Vec<f64> = interior.iter().map(|&v| mass[v] * source[v]).collect();
    for (i, &v) in interior.iter().enumerate() {
        for (c, &val) in full.outer_view(v).unwrap().iter() {
            match unknown[c] {
                Some(j) => tri.add_triplet(i, j, val),
                None => rhs[i] -= val * boundary_values[c],
            }
        }
    }
    let zero_weight_edges = ops.star_weights(1)?.iter().filter(|&&w| w == 0.0).count();
    Ok(DirichletProblem {
        interior,
        unknown,
        boundary_values,
        source,
        matrix: tri.to_csr(),
        rhs,
        zero_weight_edges,
    })
}

pub(crate) fn matvec(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    for (r, row) in a.outer_iterator().enumerate() {
        y[r] = row.iter().map(|(c, v)| v * x[c]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of an iterative or direct solve of the reduced system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from the initial guess `x`.
pub fn pcg(a: &CsMat<f64>, b: &[f64], mut x: Vec<f64>, tol: f64, max_iterations: usize) -> Result<LinearSolve, PoissonError> {
    let n = b.len();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).copied().unwrap_or(0.0)).collect();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(PoissonError::NotPositiveDefinite);
    }
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(LinearSolve { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let mut ax = vec![0.0; n];
    matvec(a, &x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iterations {
        if rel <= tol {
            return Ok(LinearSolve { x, iterations: it, residual: rel });
        }
        matvec(a, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(PoissonError::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        history.push(rel);
    }
    if rel <= tol {
        return Ok(LinearSolve { x, iterations: max_iterations, residual: rel });
    }
    Err(PoissonError::NotConverged { iterations: max_iterations, residual_history: history })
}

/// Dense Cholesky solve, for small systems.
pub fn dense_solve(a: &CsMat<f64>, b: &[f64]) -> Result<LinearSolve, PoissonError> {
    let n = b.len();
    let mut m = DMatrix::zeros(n, n);
    for (v, (r, c)) in a.iter() {
        m[(r, c)] += *v;
    }
    let chol = m.cholesky().ok_or(PoissonError::NotPositiveDefinite)?;
    let x: Vec<f64> = chol.solve(&DVector::from_column_slice(b)).iter().copied().collect();
    let mut ax = vec![0.0; n];
    matvec(a, &x, &mut ax);
    let bnorm = dot(b, b).sqrt();
    let rnorm = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
    Ok(LinearSolve { x, iterations: 0, residual: if bnorm > 0.0 { rnorm / bnorm } else { rnorm } })
}

/// Discrete errors of `e = R u - ω`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub max: f64,
    pub l2: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Cochain,
    pub iterations: usize,
    pub residual: f64,
    /// `½ (dω, dω) - (R f, ω)`.
    pub energy: f64,
    /// `‖ω‖ / (‖R f‖ + ‖d g‖)`.
    pub stability_constant: f64,
    pub interior_unknowns: usize,
}

fn expand(problem: &DirichletProblem, x: &[f64]) -> Vec<f64> {
    let mut values = problem.boundary_values.clone();
    for (&v, &xi) in problem.interior.iter().zip(x) {
        values[v] = xi;
    }
    values
}

pub fn solve(ops: &Operators, problem: &DirichletProblem, config: &SolverConfig) -> Result<SolveReport, PoissonError> {
    let m = problem.interior.len();
    let lin = if m < config.dense_below {
        dense_solve(&problem.matrix, &problem.rhs)?
    } else {
        pcg(&problem.matrix, &problem.rhs, vec![0.0; m], config.tol, config.max_iterations)?
    };
    let solution = Cochain::new(Space::primal(0), expand(problem, &lin.x));
    let energy = energy(ops, problem, &solution.values)?;
    let source = Cochain::new(Space::primal(0), problem.source.clone());
    let g = Cochain::new(Space::primal(0), problem.boundary_values.clone());
    let data = ops.discrete_l2(&source)? + ops.h1_seminorm(&g)?;
    let stability_constant = if data > 0.0 { ops.discrete_l2(&solution)? / data } else { 0.0 };
    Ok(SolveReport {
        solution,
        iterations: lin.iterations,
        residual: lin.residual,
        energy,
        stability_constant,
        interior_unknowns: m,
    })
}

/// `E(ω) = ½ (dω, dω)_h - (R f, ω)_h` for a full vertex cochain.
pub fn energy(ops: &Operators, problem: &DirichletProblem, values: &[f64]) -> Result<f64, OpsError> {
    let w = Cochain::new(Space::primal(0), values.to_vec());
    let dw = ops.exterior_derivative(0, Side::Primal)?.apply(&w)?;
    let source = Cochain::new(Space::primal(0), problem.source.clone());
    Ok(0.5 * ops.inner_product(&dw, &dw)? - ops.inner_product(&source, &w)?)
}

pub fn error_report(ops: &Operators, solution: &Cochain, problem: &Problem) -> Result<ErrorReport, OpsError> {
    let primal = ops.dual().primal();
    let e: Vec<f64> = primal.vertices().zip(&solution.values).map(|(x, w)| problem.u(x) - w).collect();
    let e = Cochain::new(Space::primal(0), e);
    Ok(ErrorReport { max: e.max_norm(), l2: ops.discrete_l2(&e)?, h1: ops.h1_seminorm(&e)? })
}

/// Smallest generalized eigenvalue of `(S_II, ★₀)` by inverse iteration.
pub fn poincare_eigenvalue(ops: &Operators, problem: &DirichletProblem, iterations: usize) -> Result<f64, PoissonError> {
    let mass_all = ops.star_weights(0)?;
    let mass: Vec<f64> = problem.interior.iter().map(|&v| mass_all[v]).collect();
    let n = mass.len();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut lambda = f64::NAN;
    let mut solve_guess = vec![0.0; n];
    for _ in 0..iterations {
        let mx: Vec<f64> = x.iter().zip(&mass).map(|(a, m)| a * m).collect();
        let lin = pcg(&problem.matrix, &mx, solve_guess.clone(), 1e-10, 100_000)?;
        solve_guess = lin.x.clone();
        let xnorm = lin.x.iter().zip(&mass).map(|(a, m)| a * a * m).sum::<f64>().sqrt();
        x = lin.x.iter().map(|a| a / xnorm).collect();
        solve_guess.iter_mut().for_each(|g| *g /= xnorm);
        matvec(&problem.matrix, &x, &mut y);
        let next = dot(&x, &y);
        if (next - lambda).abs() <= 1e-10 * next {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}

/// Text dump: header naming mesh, problem and level, then `vertex value`.
pub fn solution_dump(solution: &Cochain, mesh: &str, problem: &str, level: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# mesh {mesh} problem {problem} level {level}");
    for (v, x) in solution.values.iter().enumerate() {
        let _ = writeln!(out, "{v} {x:e}");
    }
    out
}

//! Cochains and the discrete operators acting on them.
//!
//! Dual cochains of degree `p` are indexed by the primal `(n-p)`-simplices
//! whose dual cells they live on.

use std::fmt::{self, Write as _};
use std::sync::{Arc, OnceLock};

use sprs::{CsMat, TriMat};
use thiserror::Error;

use crate::dual::DualComplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Primal => "primal",
            Side::Dual => "dual",
        })
    }
}

/// Cochain space: degree of the forms and the complex they live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    pub degree: usize,
    pub side: Side,
}

impl Space {
    pub fn primal(degree: usize) -> Self {
        Self { degree, side: Side::Primal }
    }

    pub fn dual(degree: usize) -> Self {
        Self { degree, side: Side::Dual }
    }

    /// Dimension of the primal simplices indexing this space.
    pub fn simplex_dim(&self, n: usize) -> usize {
        match self.side {
            Side::Primal => self.degree,
            Side::Dual => n - self.degree,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side, self.degree)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpsError {
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: Space, found: Space },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("degree {degree} out of range for {side} operator in dimension {n}")]
    DegreeOutOfRange { degree: usize, side: Side, n: usize },
    #[error("Hodge star is singular: dual cell of simplex ({k}, {index}) has zero volume")]
    SingularStar { k: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub space: Space,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(space: Space, values: Vec<f64>) -> Self {
        Self { space, values }
    }

    pub fn zeros(space: Space, len: usize) -> Self {
        Self::new(space, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`, spaces must agree.
    pub fn sub(&self, other: &Cochain) -> Result<Cochain, OpsError> {
        if self.space != other.space {
            return Err(OpsError::SpaceMismatch { expected: self.space, found: other.space });
        }
        Ok(Cochain::new(
            self.space,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Diagonal(Vec<f64>),
    /// Compressed rows.
    Sparse(CsMat<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub name: String,
    pub domain: Space,
    pub codomain: Space,
    storage: Storage,
    shape: (usize, usize),
}

impl LinearOperator {
    pub fn diagonal(name: impl Into<String>, domain: Space, codomain: Space, diag: Vec<f64>) -> Self {
        let n = diag.len();
        Self { name: name.into(), domain, codomain, storage: Storage::Diagonal(diag), shape: (n, n) }
    }

    pub fn sparse(name: impl Into<String>, domain: Space, codomain: Space, matrix: CsMat<f64>) -> Self {
        let shape = matrix.shape();
        Self { name: name.into(), domain, codomain, storage: Storage::Sparse(matrix.to_csr()), shape }
    }

    /// Integer incidence matrix scaled by `sign`.
    pub fn from_incidence(name: impl Into<String>, domain: Space, codomain: Space, m: &CsMat<i32>, sign: f64) -> Self {
        let mut tri = TriMat::with_capacity(m.shape(), m.nnz());
        for (v, (r, c)) in m.iter() {
            tri.add_triplet(r, c, sign * *v as f64);
        }
        Self::sparse(name, domain, codomain, tri.to_csr())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn diagonal_values(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Diagonal(d) => Some(d),
            Storage::Sparse(_) => None,
        }
    }

    /// Matrix in compressed-row form.
    pub fn to_csr(&self) -> CsMat<f64> {
        match &self.storage {
            Storage::Sparse(m) => m.clone(),
            Storage::Diagonal(d) => diag_matrix(d),
        }
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.shape.1, "operator {} applied to wrong length", self.name);
        match &self.storage {
            Storage::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            Storage::Sparse(m) => {
                let mut y = vec![0.0; self.shape.0];
                for (r, row) in m.outer_iterator().enumerate() {
                    y[r] = row.iter().map(|(c, v)| v * x[c]).sum();
                }
                y
            }
        }
    }

    pub fn apply(&self, c: &Cochain) -> Result<Cochain, OpsError> {
        if c.space != self.domain {
            return Err(OpsError::SpaceMismatch { expected: self.domain, found: c.space });
        }
        if c.len() != self.shape.1 {
            return Err(OpsError::LengthMismatch { expected: self.shape.1, found: c.len() });
        }
        Ok(Cochain::new(self.codomain, self.apply_slice(&c.values)))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearOperator) -> Result<LinearOperator, OpsError> {
        if inner.codomain != self.domain {
            return Err(OpsError::SpaceMismatch { expected: self.domain, found: inner.codomain });
        }
        let name = format!("{}*{}", self.name, inner.name);
        Ok(match (&self.storage, &inner.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => LinearOperator::diagonal(
                name,
                inner.domain,
                self.codomain,
                a.iter().zip(b).map(|(x, y)| x * y).collect(),
            ),
            _ => {
                let a = self.to_csr();
                let b = inner.to_csr();
                LinearOperator::sparse(name, inner.domain, self.codomain, &a * &b)
            }
        })
    }

    pub fn scaled(&self, s: f64) -> LinearOperator {
        let storage = match &self.storage {
            Storage::Diagonal(d) => Storage::Diagonal(d.iter().map(|v| v * s).collect()),
            Storage::Sparse(m) => Storage::Sparse(m.map(|v| v * s)),
        };
        LinearOperator { storage, ..self.clone() }
    }

    /// Sum of two operators between the same spaces.
    pub fn add(&self, other: &LinearOperator) -> Result<LinearOperator, OpsError> {
        if other.domain != self.domain {
            return Err(OpsError::SpaceMismatch { expected: self.domain, found: other.domain });
        }
        if other.codomain != self.codomain {
            return Err(OpsError::SpaceMismatch { expected: self.codomain, found: other.codomain });
        }
        let sum = &self.to_csr() + &other.to_csr();
        Ok(LinearOperator::sparse(format!("{}+{}", self.name, other.name), self.domain, self.codomain, sum))
    }

    /// Dense copy, row-major. Intended for tests and small meshes.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.shape.1]; self.shape.0];
        for (v, (r, c)) in self.to_csr().iter() {
            d[r][c] += *v;
        }
        d
    }

    /// Triplet text: header `op <name> k=<k> side=<side> rows cols` then
    /// `row col value` lines, zeros skipped.
    pub fn export(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "op {} k={} side={} {} {}",
            self.name, self.domain.degree, self.domain.side, self.shape.0, self.shape.1
        );
        let m = self.to_csr();
        for (r, row) in m.outer_iterator().enumerate() {
            for (c, v) in row.iter() {
                if *v != 0.0 {
                    let _ = writeln!(out, "{r} {c} {v:e}");
                }
            }
        }
        out
    }
}

fn diag_matrix(d: &[f64]) -> CsMat<f64> {
    let n = d.len();
    CsMat::new((n, n), (0..=n).collect(), (0..n).collect(), d.to_vec())
}

fn cells<T>(m: usize) -> Vec<OnceLock<T>> {
    (0..m).map(|_| OnceLock::new()).collect()
}

fn sign(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Operators of one mesh, assembled lazily and cached.
#[derive(Debug)]
pub struct Operators {
    dual: Arc<DualComplex>,
    star: Vec<OnceLock<LinearOperator>>,
    d_primal: Vec<OnceLock<LinearOperator>>,
    d_dual: Vec<OnceLock<LinearOperator>>,
    delta: Vec<OnceLock<Result<LinearOperator, OpsError>>>,
    laplace: Vec<OnceLock<Result<LinearOperator, OpsError>>>,
}

impl Operators {
    pub fn new(dual: Arc<DualComplex>) -> Self {
        let n = dual.dim();
        Self {
            star: cells(n + 1),
            d_primal: cells(n),
            d_dual: cells(n),
            delta: cells(n + 1),
            laplace: cells(n + 1),
            dual,
        }
    }

    pub fn dual(&self) -> &DualComplex {
        &self.dual
    }

    pub fn dim(&self) -> usize {
        self.dual.dim()
    }

    pub fn len(&self, space: Space) -> usize {
        self.dual.primal().num_simplices(space.simplex_dim(self.dim()))
    }

    fn check(&self, degree: usize, side: Side, max: usize) -> Result<(), OpsError> {
        if degree > max {
            Err(OpsError::DegreeOutOfRange { degree, side, n: self.dim() })
        } else {
            Ok(())
        }
    }

    /// Primal k-cochains to dual (n-k)-cochains: `|*s| / |s|`.
    pub fn hodge_star(&self, k: usize) -> Result<&LinearOperator, OpsError> {
        let n = self.dim();
        self.check(k, Side::Primal, n)?;
        Ok(self.star[k].get_or_init(|| {
            let diag = (0..self.dual.primal().num_simplices(k)).map(|i| self.dual.volume_ratio(k, i)).collect();
            LinearOperator::diagonal(format!("star{k}"), Space::primal(k), Space::dual(n - k), diag)
        }))
    }

    /// Dual p-cochains back to primal (n-p)-cochains:
    /// `(-1)^{p(n-p)} |s| / |*s|`, so that the two stars compose to `(-1)^{k(n-k)}`.
    pub fn hodge_star_dual(&self, p: usize) -> Result<LinearOperator, OpsError> {
        let n = self.dim();
        self.check(p, Side::Dual, n)?;
        let k = n - p;
        let inv = self.inverse_star(k)?;
        Ok(LinearOperator::diagonal(
            format!("dstar{p}"),
            Space::dual(p),
            Space::primal(k),
            inv.into_iter().map(|v| sign(p * k) * v).collect(),
        ))
    }

    /// Entries `|s| / |*s|` of the inverse primal star, refusing empty dual cells.
    fn inverse_star(&self, k: usize) -> Result<Vec<f64>, OpsError> {
        let star = self.hodge_star(k)?;
        star.diagonal_values()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, &r)| if r == 0.0 { Err(OpsError::SingularStar { k, index: i }) } else { Ok(1.0 / r) })
            .collect()
    }

    /// Inverse of the primal star, as a map from dual (n-k) to primal k cochains.
    pub fn hodge_star_inverse(&self, k: usize) -> Result<LinearOperator, OpsError> {
        let n = self.dim();
        let inv = self.inverse_star(k)?;
        Ok(LinearOperator::diagonal(format!("star{k}^-1"), Space::dual(n - k), Space::primal(k), inv))
    }

    /// Exterior derivative on either complex. Primal: transpose of the boundary
    /// matrix. Dual: transpose of the dual boundary operator.
    pub fn exterior_derivative(&self, degree: usize, side: Side) -> Result<&LinearOperator, OpsError> {
        let n = self.dim();
        if n == 0 || degree >= n {
            return Err(OpsError::DegreeOutOfRange { degree, side, n });
        }
        let primal = self.dual.primal();
        Ok(match side {
            Side::Primal => self.d_primal[degree].get_or_init(|| {
                let b = primal.boundary_matrix(degree + 1).expect("degree checked");
                let bt = b.transpose_view().to_owned();
                LinearOperator::from_incidence(format!("d{degree}"), Space::primal(degree), Space::primal(degree + 1), &bt, 1.0)
            }),
            Side::Dual => self.d_dual[degree].get_or_init(|| {
                // dual p-cells sit on (n-p)-simplices; their boundary pairs with dual (p+1)-cells
                let k = n - degree - 1;
                let db = self.dual.dual_boundary_matrix(k).expect("degree checked");
                let dbt = db.transpose_view().to_owned();
                LinearOperator::from_incidence(format!("dd{degree}"), Space::dual(degree), Space::dual(degree + 1), &dbt, 1.0)
            }),
        })
    }

    /// Codifferential on primal k-cochains, `(-1)^k ★⁻¹ d ★`.
    pub fn codifferential(&self, k: usize) -> Result<&LinearOperator, OpsError> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(OpsError::DegreeOutOfRange { degree: k, side: Side::Primal, n });
        }
        self.delta[k]
            .get_or_init(|| {
                let star = self.hodge_star(k)?;
                let d = self.exterior_derivative(n - k, Side::Dual)?;
                let inv = self.hodge_star_inverse(k - 1)?;
                let mut op = inv.compose(&d.compose(star)?)?.scaled(sign(k));
                op.name = format!("delta{k}");
                Ok(op)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `★ δ` on primal k-cochains, landing on dual (n-k+1)-cochains.
    /// Never inverts a star, so it exists on weakly well-centered meshes
    /// where [`Operators::codifferential`] is singular. Pairing a primal
    /// (k-1)-cochain with its output gives `(ω, δη)_h`.
    pub fn weighted_codifferential(&self, k: usize) -> Result<LinearOperator, OpsError> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(OpsError::DegreeOutOfRange { degree: k, side: Side::Primal, n });
        }
        let d = self.exterior_derivative(n - k, Side::Dual)?;
        let mut op = d.compose(self.hodge_star(k)?)?.scaled(sign(k));
        op.name = format!("star_delta{k}");
        Ok(op)
    }

    /// `(ω, δη)_h` without forming `δ`; see [`Operators::weighted_codifferential`].
    pub fn pair_with_codifferential(&self, omega: &Cochain, eta: &Cochain) -> Result<f64, OpsError> {
        let k = omega.space.degree + 1;
        let expected = Space::primal(k);
        if omega.space.side != Side::Primal || eta.space != expected {
            return Err(OpsError::SpaceMismatch { expected, found: eta.space });
        }
        let weighted = self.weighted_codifferential(k)?.apply(eta)?;
        if weighted.len() != omega.len() {
            return Err(OpsError::LengthMismatch { expected: weighted.len(), found: omega.len() });
        }
        Ok(omega.values.iter().zip(&weighted.values).map(|(x, y)| x * y).sum())
    }

    /// Codifferential through the signed dual star, `(-1)^{n(k-1)+1} ★ d ★`.
    /// Agrees with [`Operators::codifferential`]; kept as a cross-check.
    pub fn codifferential_star_form(&self, k: usize) -> Result<LinearOperator, OpsError> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(OpsError::DegreeOutOfRange { degree: k, side: Side::Primal, n });
        }
        let star = self.hodge_star(k)?;
        let d = self.exterior_derivative(n - k, Side::Dual)?;
        let back = self.hodge_star_dual(n - k + 1)?;
        Ok(back.compose(&d.compose(star)?)?.scaled(sign(n * (k - 1) + 1)))
    }

    /// Hodge-Laplace operator `δd + dδ` on primal k-cochains.
    pub fn laplace(&self, k: usize) -> Result<&LinearOperator, OpsError> {
        let n = self.dim();
        self.check(k, Side::Primal, n)?;
        self.laplace[k]
            .get_or_init(|| {
                let mut op: Option<LinearOperator> = None;
                if k < n {
                    let dd = self.codifferential(k + 1)?.compose(self.exterior_derivative(k, Side::Primal)?)?;
                    op = Some(dd);
                }
                if k > 0 {
                    let dd = self.exterior_derivative(k - 1, Side::Primal)?.compose(self.codifferential(k)?)?;
                    op = Some(match op {
                        Some(a) => a.add(&dd)?,
                        None => dd,
                    });
                }
                let mut op = op.expect("n >= 1");
                op.name = format!("laplace{k}");
                Ok(op)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `(a, b)_h`: primal cochains weighted by `|*s|/|s|`, dual cochains by `|s|/|*s|`.
    pub fn inner_product(&self, a: &Cochain, b: &Cochain) -> Result<f64, OpsError> {
        if a.space != b.space {
            return Err(OpsError::SpaceMismatch { expected: a.space, found: b.space });
        }
        let expected = self.len(a.space);
        for c in [a, b] {
            if c.len() != expected {
                return Err(OpsError::LengthMismatch { expected, found: c.len() });
            }
        }
        let k = a.space.simplex_dim(self.dim());
        let w = |i: usize| match a.space.side {
            Side::Primal => self.dual.volume_ratio(k, i),
            Side::Dual => 1.0 / self.dual.volume_ratio(k, i),
        };
        Ok(a.values.iter().zip(&b.values).enumerate().map(|(i, (x, y))| x * w(i) * y).sum())
    }

    pub fn discrete_l2(&self, c: &Cochain) -> Result<f64, OpsError> {
        self.inner_product(c, c).map(f64::sqrt)
    }

    /// Dual-cochain norm; rejects primal input.
    pub fn discrete_l2_dual(&self, c: &Cochain) -> Result<f64, OpsError> {
        if c.space.side != Side::Dual {
            return Err(OpsError::SpaceMismatch { expected: Space::dual(c.space.degree), found: c.space });
        }
        self.discrete_l2(c)
    }

    /// `‖d c‖_h` for a primal cochain of degree below n.
    pub fn h1_seminorm(&self, c: &Cochain) -> Result<f64, OpsError> {
        let dc = self.exterior_derivative(c.space.degree, c.space.side)?.apply(c)?;
        self.discrete_l2(&dc)
    }

    /// Primal star as a map on raw slices: `out[i] = |*s_i|/|s_i| x[i]`.
    pub fn star_weights(&self, k: usize) -> Result<&[f64], OpsError> {
        Ok(self.hodge_star(k)?.diagonal_values().unwrap())
    }
}

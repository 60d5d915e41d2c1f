//! Oriented circumcentric dual of a well-centered complex.
//!
//! The dual cell of a k-simplex `t` is the signed sum of elementary simplices
//! `[c(t), c(t_{k+1}), ..., c(s)]`, one per flag `t < t_{k+1} < ... < s` ending
//! at a top cell. Fragments are not stored: they are regenerated from the
//! primal incidence on demand, only circumcenters and volumes are kept.

use std::fmt::Write as _;
use std::sync::Arc;

use sprs::{CsMat, TriMat};
use thiserror::Error;

use crate::geometry::{self, Degenerate};
use crate::mesh::{sort_parity, MeshError, Simplex, SimplicialComplex, WellCentered, WELL_CENTERED_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("circumcenter of {simplex:?} lies outside it (barycentric coordinate {barycentric:e})")]
    NotWellCentered { simplex: Simplex, barycentric: f64 },
    #[error("simplex {simplex:?} is degenerate (condition {condition:e})")]
    Degenerate { simplex: Simplex, condition: f64 },
    #[error("degree {k} is out of range 0..{n}")]
    DegreeOutOfRange { k: usize, n: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One elementary dual simplex of a dual cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    /// Dimension of the primal simplex whose dual this fragment belongs to.
    pub dim: usize,
    /// Index of that primal simplex.
    pub base: usize,
    /// Primal simplex indices of the flag, for dimensions `dim, dim+1, ..., n`.
    pub flag: Vec<usize>,
    /// Orientation of `[c(t), ..., c(s)]` inside the dual cell, from the
    /// combinatorics of the flag.
    pub orientation: i8,
    /// Measure of the fragment, negative when the flag folds back
    /// (circumcenter outside a simplex); zero on degenerate flags.
    pub signed_volume: f64,
}

impl Fragment {
    /// Circumcenters along the flag, in fragment vertex order.
    pub fn points<'a>(&self, dual: &'a DualComplex) -> Vec<&'a [f64]> {
        self.flag
            .iter()
            .enumerate()
            .map(|(j, &idx)| dual.circumcenter(self.dim + j, idx))
            .collect()
    }
}

/// View of a single dual cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCell {
    pub base: Simplex,
    pub fragments: Vec<Fragment>,
    pub volume: f64,
    pub is_boundary: bool,
}

#[derive(Debug, Clone)]
pub struct DualComplex {
    primal: Arc<SimplicialComplex>,
    circumcenters: Vec<Vec<f64>>,
    primal_volumes: Vec<Vec<f64>>,
    dual_volumes: Vec<Vec<f64>>,
    fragment_counts: Vec<Vec<u32>>,
    boundary: Vec<Vec<bool>>,
    well_centered: WellCentered,
}

impl DualComplex {
    /// Build the circumcentric dual. Refuses complexes with a circumcenter
    /// outside its simplex.
    pub fn new(primal: Arc<SimplicialComplex>) -> Result<Self, DualError> {
        let n = primal.dim();
        let mut circumcenters = Vec::with_capacity(n + 1);
        let mut primal_volumes = Vec::with_capacity(n + 1);
        let mut well_centered = WellCentered::Strict;
        for k in 0..=n {
            let count = primal.num_simplices(k);
            let mut centers = Vec::with_capacity(count * n);
            let mut vols = Vec::with_capacity(count);
            for i in 0..count {
                let pts = primal.points(k, i);
                let sphere = geometry::circumsphere(&pts).map_err(|Degenerate { condition }| {
                    DualError::Degenerate {
                        simplex: Simplex::new(k, i),
                        condition,
                    }
                })?;
                let b = sphere.barycentric.iter().cloned().fold(f64::INFINITY, f64::min);
                if b < -WELL_CENTERED_TOL {
                    return Err(DualError::NotWellCentered {
                        simplex: Simplex::new(k, i),
                        barycentric: b,
                    });
                }
                if b <= WELL_CENTERED_TOL {
                    well_centered = WellCentered::Weak;
                }
                centers.extend_from_slice(&sphere.center);
                vols.push(geometry::simplex_volume(&pts));
            }
            circumcenters.push(centers);
            primal_volumes.push(vols);
        }
        let boundary = primal.boundary_flags();
        let mut dual = Self {
            dual_volumes: (0..=n).map(|k| vec![0.0; primal.num_simplices(k)]).collect(),
            fragment_counts: (0..=n).map(|k| vec![0; primal.num_simplices(k)]).collect(),
            primal,
            circumcenters,
            primal_volumes,
            boundary,
            well_centered,
        };
        let mut volumes = std::mem::take(&mut dual.dual_volumes);
        let mut counts = std::mem::take(&mut dual.fragment_counts);
        dual.for_each_fragment(|f| {
            volumes[f.dim][f.base] += f.signed_volume;
            counts[f.dim][f.base] += 1;
        });
        dual.dual_volumes = volumes;
        dual.fragment_counts = counts;
        Ok(dual)
    }

    pub fn primal(&self) -> &SimplicialComplex {
        &self.primal
    }

    pub fn primal_arc(&self) -> Arc<SimplicialComplex> {
        Arc::clone(&self.primal)
    }

    pub fn dim(&self) -> usize {
        self.primal.dim()
    }

    pub fn well_centered(&self) -> WellCentered {
        self.well_centered
    }

    pub fn circumcenter(&self, k: usize, i: usize) -> &[f64] {
        let n = self.dim();
        &self.circumcenters[k][i * n..(i + 1) * n]
    }

    /// |t|, with |vertex| = 1.
    pub fn primal_volume(&self, k: usize, i: usize) -> f64 {
        self.primal_volumes[k][i]
    }

    /// |*t|, with |*top cell| = 1.
    pub fn dual_volume(&self, k: usize, i: usize) -> f64 {
        self.dual_volumes[k][i]
    }

    pub fn primal_volumes(&self, k: usize) -> &[f64] {
        &self.primal_volumes[k]
    }

    pub fn dual_volumes(&self, k: usize) -> &[f64] {
        &self.dual_volumes[k]
    }

    /// Hodge star entry |*t| / |t|.
    pub fn volume_ratio(&self, k: usize, i: usize) -> f64 {
        self.dual_volumes[k][i] / self.primal_volumes[k][i]
    }

    pub fn is_boundary(&self, k: usize, i: usize) -> bool {
        self.boundary[k][i]
    }

    pub fn fragment_count(&self, k: usize, i: usize) -> usize {
        self.fragment_counts[k][i] as usize
    }

    /// Dual cells of dimension n-k with zero total volume (possible on weakly
    /// well-centered meshes).
    pub fn zero_volume_cells(&self, k: usize) -> Vec<usize> {
        self.dual_volumes[k]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= 1e-14 * self.primal.mesh_size().powi((self.dim() - k) as i32))
            .map(|(i, _)| i)
            .collect()
    }

    /// `(-1)^{k(n-k)}`: sign picked up by taking the dual of the dual of a k-simplex.
    pub fn double_dual_sign(&self, k: usize) -> i32 {
        if (k * (self.dim() - k)).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn cell(&self, k: usize, i: usize) -> DualCell {
        DualCell {
            base: Simplex::new(k, i),
            fragments: self.fragments(k, i),
            volume: self.dual_volume(k, i),
            is_boundary: self.is_boundary(k, i),
        }
    }

    /// Fragments of the dual of one k-simplex, one per flag.
    pub fn fragments(&self, k: usize, i: usize) -> Vec<Fragment> {
        let mut out = Vec::new();
        let mut path = vec![i];
        self.walk_up(k, i, &mut path, &mut out);
        out
    }

    fn walk_up(&self, k: usize, i: usize, path: &mut Vec<usize>, out: &mut Vec<Fragment>) {
        let n = self.dim();
        if k == n {
            let base_dim = n + 1 - path.len();
            out.push(self.fragment(base_dim, path));
            return;
        }
        for &c in self.primal.cofaces(k, i) {
            path.push(c);
            self.walk_up(k + 1, c, path, out);
            path.pop();
        }
    }

    /// Visit every fragment of every dual cell, walking the flags of each top
    /// cell downwards.
    pub fn for_each_fragment(&self, mut f: impl FnMut(&Fragment)) {
        let n = self.dim();
        let mut down = Vec::with_capacity(n + 1);
        for top in 0..self.primal.num_simplices(n) {
            down.clear();
            down.push(top);
            self.walk_down(n, top, &mut down, &mut f);
        }
    }

    /// Like [`Self::for_each_fragment`], restricted to fragments of the duals
    /// of k-simplices.
    pub fn for_each_fragment_of_dim(&self, k: usize, mut f: impl FnMut(&Fragment)) {
        let n = self.dim();
        let mut down = Vec::with_capacity(n + 1);
        for top in 0..self.primal.num_simplices(n) {
            down.clear();
            down.push(top);
            self.walk_down_to(n, top, Some(k), &mut down, &mut f);
        }
    }

    fn walk_down(&self, k: usize, i: usize, down: &mut Vec<usize>, f: &mut impl FnMut(&Fragment)) {
        self.walk_down_to(k, i, None, down, f)
    }

    fn walk_down_to(
        &self,
        k: usize,
        i: usize,
        only: Option<usize>,
        down: &mut Vec<usize>,
        f: &mut impl FnMut(&Fragment),
    ) {
        if only.is_none_or(|d| d == k) {
            let flag: Vec<usize> = down.iter().rev().copied().collect();
            f(&self.fragment(k, &flag));
        }
        if k == 0 || only.is_some_and(|d| d == k) {
            return;
        }
        for &face in self.primal.face_ids(k, i) {
            down.push(face);
            self.walk_down_to(k - 1, face, only, down, f);
            down.pop();
        }
    }

    /// Orientation and signed volume of the fragment along `flag`
    /// (simplex indices for dimensions k..=n).
    fn fragment(&self, k: usize, flag: &[usize]) -> Fragment {
        let n = self.dim();
        let p = &self.primal;
        let tau = flag[0];
        let top = flag[n - k];
        let tau_vertices = p.simplex_vertices(k, tau);

        // vertex list: sorted vertices of tau followed by the vertex added at each step
        let mut order: Vec<usize> = tau_vertices.to_vec();
        for j in 1..flag.len() {
            let prev = p.simplex_vertices(k + j - 1, flag[j - 1]);
            let added = p
                .simplex_vertices(k + j, flag[j])
                .iter()
                .copied()
                .find(|v| !prev.contains(v))
                .expect("flag steps add one vertex");
            order.push(added);
        }
        let perm = sort_parity(&mut order);
        let s_top = p.orientation(n, top);
        let s_tau = p.orientation(k, tau);

        // det[tau edge vectors, c(t_{k+j}) - c(t)] = k! |t| (n-k)! |fragment| (up to sign)
        let base = p.vertex(tau_vertices[0]);
        let mut cols: Vec<Vec<f64>> = tau_vertices[1..]
            .iter()
            .map(|&v| geometry::sub(p.vertex(v), base))
            .collect();
        let c0 = self.circumcenter(k, tau);
        for (j, &idx) in flag.iter().enumerate().skip(1) {
            cols.push(geometry::sub(self.circumcenter(k + j, idx), c0));
        }
        let det = geometry::det_columns(&cols);
        let scale = geometry::factorial(k) * geometry::factorial(n - k) * self.primal_volumes[k][tau];
        let signed_volume = (s_top * perm) as f64 * det / scale;
        Fragment {
            dim: k,
            base: tau,
            flag: flag.to_vec(),
            orientation: s_tau * s_top * perm,
            signed_volume,
        }
    }

    /// Boundary map on dual chains, C_{n-k}(*K) -> C_{n-k-1}(*K):
    /// `d(*t) = (-1)^{k+1} sum_{e > t} *e`, with each (k+1)-simplex `e` taken in
    /// the orientation that induces the orientation of `t`.
    pub fn dual_boundary_matrix(&self, k: usize) -> Result<CsMat<i32>, DualError> {
        let n = self.dim();
        if k >= n {
            return Err(DualError::DegreeOutOfRange { k, n });
        }
        let sign = if (k + 1).is_multiple_of(2) { 1 } else { -1 };
        let rows = self.primal.num_simplices(k + 1);
        let cols = self.primal.num_simplices(k);
        let mut tri = TriMat::with_capacity((rows, cols), rows * (k + 2));
        for e in 0..rows {
            for (t, s) in self.primal.faces(k + 1, e) {
                tri.add_triplet(e, t, sign * s as i32);
            }
        }
        Ok(tri.to_csc())
    }

    /// Text dump: one line per primal simplex with dual volume and fragment count.
    pub fn diagnostic_dump(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        let _ = writeln!(out, "dual dim={n}");
        for k in 0..=n {
            let _ = writeln!(out, "k={k} cells={}", self.primal.num_simplices(k));
            for i in 0..self.primal.num_simplices(k) {
                let _ = writeln!(
                    out,
                    "{k} {i} {:.12e} {}",
                    self.dual_volume(k, i),
                    self.fragment_count(k, i)
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> DualComplex {
        let c = SimplicialComplex::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        DualComplex::new(Arc::new(c)).unwrap()
    }

    #[test]
    fn right_triangle_dual_volumes() {
        let d = triangle();
        assert_eq!(d.well_centered(), WellCentered::Weak);
        assert!((d.dual_volume(0, 0) - 0.25).abs() < 1e-15);
        assert!((d.dual_volume(0, 1) - 0.125).abs() < 1e-15);
        assert!((d.dual_volume(0, 2) - 0.125).abs() < 1e-15);
        assert_eq!(d.dual_volume(2, 0), 1.0);
        // the hypotenuse dual is a point pair collapsed to its midpoint
        let (hyp, _) = d.primal().find(&[1, 2]).unwrap();
        assert!(d.dual_volume(1, hyp).abs() < 1e-15);
        assert_eq!(d.zero_volume_cells(1), vec![hyp]);
    }

    #[test]
    fn fragment_counts_per_flag() {
        let d = triangle();
        for v in 0..3 {
            assert_eq!(d.fragment_count(0, v), 2);
            assert_eq!(d.fragments(0, v).len(), 2);
        }
        for e in 0..3 {
            assert_eq!(d.fragment_count(1, e), 1);
        }
    }

    #[test]
    fn obtuse_triangle_is_refused() {
        let c = SimplicialComplex::new(
            2,
            &[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.2]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        let err = DualComplex::new(Arc::new(c)).unwrap_err();
        assert!(matches!(err, DualError::NotWellCentered { simplex, .. } if simplex.dim == 2));
    }

    #[test]
    fn dual_boundary_range() {
        let d = triangle();
        assert!(d.dual_boundary_matrix(2).is_err());
        assert_eq!(d.dual_boundary_matrix(1).unwrap().shape(), (1, 3));
    }
}

//! Oriented simplicial complexes in R^n.
//!
//! Simplices of every dimension are stored by their sorted vertex tuple.
//! Orientation is a separate `+1/-1` sign per simplex: top cells carry the
//! sign that makes them positively oriented in the ambient space, every lower
//! dimensional simplex is oriented by its sorted vertex order. Relative
//! orientations (boundary matrix entries) are therefore parity checks and stay
//! in integer arithmetic.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use sprs::{CsMat, TriMat};
use thiserror::Error;

use crate::geometry::{self, Degenerate};

/// Tolerance on barycentric coordinates of circumcenters when classifying
/// well-centeredness.
pub const WELL_CENTERED_TOL: f64 = 1e-12;

/// Relative volume below which a top cell counts as degenerate.
const DEGENERATE_VOLUME: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("dimension {0} is not supported (expected 1..=3 vertex coordinates per point)")]
    UnsupportedDimension(usize),
    #[error("vertex {vertex} has {found} coordinates, expected {expected}")]
    CoordinateCount {
        vertex: usize,
        found: usize,
        expected: usize,
    },
    #[error("cell {cell} has {found} vertices, expected {expected}")]
    CellArity {
        cell: usize,
        found: usize,
        expected: usize,
    },
    #[error("cell {cell} references vertex {vertex} but only {count} vertices exist")]
    VertexOutOfRange {
        cell: usize,
        vertex: usize,
        count: usize,
    },
    #[error("cell {cell} is degenerate (relative volume {relative_volume:e})")]
    DegenerateCell { cell: usize, relative_volume: f64 },
    #[error("cells {first} and {second} do not intersect in a common face ({reason})")]
    NonConforming {
        first: usize,
        second: usize,
        reason: &'static str,
    },
    #[error("vertex {0} is not used by any cell")]
    UnusedVertex(usize),
    #[error("complex has no cells")]
    Empty,
    #[error("simplex of dimension {dim} with index {index} does not exist")]
    UnknownSimplex { dim: usize, index: usize },
    #[error("no simplex with vertices {0:?}")]
    UnknownVertices(Vec<usize>),
    #[error("degree {k} is out of range 1..={max}")]
    DegreeOutOfRange { k: usize, max: usize },
    #[error("simplex {simplex:?} is degenerate (condition {condition:e})")]
    DegenerateSimplex { simplex: Simplex, condition: f64 },
}

/// Handle to a stored simplex: its dimension and index among simplices of that
/// dimension. Always refers to the stored orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex {
    pub dim: usize,
    pub index: usize,
}

impl Simplex {
    pub fn new(dim: usize, index: usize) -> Self {
        Self { dim, index }
    }
}

/// Integer chain: formal sum of stored k-simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub degree: usize,
    terms: BTreeMap<usize, i64>,
}

impl Chain {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_simplex(s: Simplex) -> Self {
        let mut c = Self::zero(s.dim);
        c.add(s.index, 1);
        c
    }

    pub fn add(&mut self, index: usize, coefficient: i64) {
        let entry = self.terms.entry(index).or_insert(0);
        *entry += coefficient;
        if *entry == 0 {
            self.terms.remove(&index);
        }
    }

    pub fn coefficient(&self, index: usize) -> i64 {
        self.terms.get(&index).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.terms.iter().map(|(i, c)| (*i, *c))
    }

    /// Boundary of the chain. The boundary of a 0-chain is the empty 0-chain.
    pub fn boundary(&self, complex: &SimplicialComplex) -> Chain {
        if self.degree == 0 {
            return Chain::zero(0);
        }
        let mut out = Chain::zero(self.degree - 1);
        for (i, c) in self.iter() {
            for (face, sign) in complex.faces(self.degree, i) {
                out.add(face, c * sign as i64);
            }
        }
        out
    }
}

/// Subcomplex given by the stored simplices it contains, per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubComplex {
    pub simplices: Vec<BTreeSet<usize>>,
}

impl SubComplex {
    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, |s| s.len())
    }

    pub fn contains(&self, s: Simplex) -> bool {
        self.simplices.get(s.dim).is_some_and(|set| set.contains(&s.index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WellCentered {
    /// Every circumcenter strictly inside its simplex.
    Strict,
    /// Some circumcenter lies on a face (within tolerance), none outside.
    Weak,
    Violated,
}

/// Shape regularity audit of a complex.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    /// Longest simplex diameter (= longest edge).
    pub h: f64,
    /// Smallest inradius over simplices of dimension >= 1.
    pub gamma_min: f64,
    /// Largest ratio diam / inradius.
    pub c_reg: f64,
    /// Largest number of top cells in the closed star of a simplex.
    pub star_bound: usize,
    pub well_centered: WellCentered,
    /// Smallest barycentric coordinate of any circumcenter.
    pub min_circumcenter_barycentric: f64,
    /// Simplex attaining the smallest barycentric coordinate.
    pub worst_simplex: Option<Simplex>,
}

#[derive(Debug, Clone, Default)]
struct Level {
    arity: usize,
    vertices: Vec<usize>,
    signs: Vec<i8>,
    face_ids: Vec<usize>,
    face_signs: Vec<i8>,
    coface_offsets: Vec<usize>,
    coface_ids: Vec<usize>,
}

impl Level {
    fn len(&self) -> usize {
        self.signs.len()
    }

    fn simplex(&self, i: usize) -> &[usize] {
        &self.vertices[i * self.arity..(i + 1) * self.arity]
    }
}

/// A simplicial n-complex in R^n. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    dim: usize,
    coords: Vec<f64>,
    levels: Vec<Level>,
    lookup: Vec<HashMap<Box<[usize]>, usize>>,
    labels: BTreeMap<Vec<usize>, String>,
}

impl SimplicialComplex {
    /// Build a complex from vertex coordinates and top cells (n+1 vertex
    /// indices each). Top cells are reoriented to positive signed volume and
    /// all faces are enumerated once.
    pub fn new(dim: usize, vertices: &[Vec<f64>], cells: &[Vec<usize>]) -> Result<Self, MeshError> {
        if !(1..=3).contains(&dim) {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(MeshError::CoordinateCount {
                    vertex: i,
                    found: v.len(),
                    expected: dim,
                });
            }
            coords.extend_from_slice(v);
        }
        let nv = vertices.len();

        let mut levels: Vec<Level> = (0..=dim)
            .map(|k| Level {
                arity: k + 1,
                ..Default::default()
            })
            .collect();
        let mut lookup: Vec<HashMap<Box<[usize]>, usize>> = vec![HashMap::new(); dim + 1];

        // top cells: sorted storage plus orientation sign from the signed volume
        let mut used = vec![false; nv];
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(MeshError::CellArity {
                    cell: c,
                    found: cell.len(),
                    expected: dim + 1,
                });
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::VertexOutOfRange {
                    cell: c,
                    vertex: v,
                    count: nv,
                });
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::DegenerateCell {
                    cell: c,
                    relative_volume: 0.0,
                });
            }
            let pts: Vec<&[f64]> = sorted.iter().map(|&v| &coords[v * dim..(v + 1) * dim]).collect();
            let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| geometry::sub(p, pts[0])).collect();
            let det = geometry::det_columns(&edges);
            let scale = geometry::diameter(&pts).powi(dim as i32);
            let rel = det / scale;
            if rel.is_nan() || rel.abs() <= DEGENERATE_VOLUME {
                return Err(MeshError::DegenerateCell {
                    cell: c,
                    relative_volume: rel,
                });
            }
            let key: Box<[usize]> = sorted.clone().into_boxed_slice();
            if let Some(&prev) = lookup[dim].get(&key) {
                return Err(MeshError::NonConforming {
                    first: prev,
                    second: c,
                    reason: "duplicate cell",
                });
            }
            lookup[dim].insert(key, c);
            for &v in &sorted {
                used[v] = true;
            }
            levels[dim].vertices.extend_from_slice(&sorted);
            levels[dim].signs.push(if det > 0.0 { 1 } else { -1 });
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::UnusedVertex(v));
        }

        // vertices keep their own index
        for v in 0..nv {
            levels[0].vertices.push(v);
            levels[0].signs.push(1);
            lookup[0].insert(vec![v].into_boxed_slice(), v);
        }

        // intermediate dimensions, in order of first appearance in the top cells
        for k in 1..dim {
            let mut faces_k: Vec<usize> = Vec::new();
            let mut count = 0usize;
            let top_len = levels[dim].len();
            for t in 0..top_len {
                let cell: Vec<usize> = levels[dim].simplex(t).to_vec();
                for combo in combinations(dim + 1, k + 1) {
                    let face: Vec<usize> = combo.iter().map(|&i| cell[i]).collect();
                    let key: Box<[usize]> = face.clone().into_boxed_slice();
                    if let Entry::Vacant(slot) = lookup[k].entry(key) {
                        slot.insert(count);
                        count += 1;
                        faces_k.extend_from_slice(&face);
                    }
                }
            }
            levels[k].signs = vec![1; count];
            levels[k].vertices = faces_k;
        }

        // faces with relative orientation: entry of the boundary matrix
        for k in 1..=dim {
            let n_k = levels[k].len();
            let mut ids = Vec::with_capacity(n_k * (k + 1));
            let mut signs = Vec::with_capacity(n_k * (k + 1));
            for s in 0..n_k {
                let simplex = levels[k].simplex(s).to_vec();
                let own = levels[k].signs[s];
                for skip in 0..=k {
                    let face: Vec<usize> = simplex
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    let f = lookup[k - 1][face.as_slice()];
                    let parity: i8 = if skip % 2 == 0 { 1 } else { -1 };
                    ids.push(f);
                    signs.push(parity * own * levels[k - 1].signs[f]);
                }
            }
            levels[k].face_ids = ids;
            levels[k].face_signs = signs;
        }

        // cofaces in CSR form
        for k in 0..dim {
            let n_k = levels[k].len();
            let mut counts = vec![0usize; n_k + 1];
            for &f in &levels[k + 1].face_ids {
                counts[f + 1] += 1;
            }
            for i in 0..n_k {
                counts[i + 1] += counts[i];
            }
            let mut fill = counts.clone();
            let mut ids = vec![0usize; levels[k + 1].face_ids.len()];
            for (pos, &f) in levels[k + 1].face_ids.iter().enumerate() {
                ids[fill[f]] = pos / (k + 2);
                fill[f] += 1;
            }
            levels[k].coface_offsets = counts;
            levels[k].coface_ids = ids;
        }
        levels[dim].coface_offsets = vec![0; levels[dim].len() + 1];

        let complex = Self {
            dim,
            coords,
            levels,
            lookup,
            labels: BTreeMap::new(),
        };
        complex.check_conformity()?;
        Ok(complex)
    }

    /// Facets shared by more than two cells, or by two cells lying on the same
    /// side of it, mean the cells overlap.
    fn check_conformity(&self) -> Result<(), MeshError> {
        let n = self.dim;
        let facets = &self.levels[n - 1];
        for f in 0..facets.len() {
            let cof = self.cofaces(n - 1, f);
            match cof.len() {
                1 => {}
                2 => {
                    let s0 = self.relative_sign(n, cof[0], f);
                    let s1 = self.relative_sign(n, cof[1], f);
                    if s0 == s1 {
                        return Err(MeshError::NonConforming {
                            first: cof[0],
                            second: cof[1],
                            reason: "cells overlap across a shared facet",
                        });
                    }
                }
                _ => {
                    return Err(MeshError::NonConforming {
                        first: cof[0],
                        second: cof[2],
                        reason: "facet shared by more than two cells",
                    })
                }
            }
        }
        self.check_hanging_vertices()
    }

    /// A vertex lying on a facet that has a single cell is a hanging node: the
    /// cells on its other side meet that cell in part of a face only. Such a
    /// vertex sits on single-cell facets itself, so only those are searched,
    /// bucketed on a grid about one facet wide.
    fn check_hanging_vertices(&self) -> Result<(), MeshError> {
        let n = self.dim;
        let open: Vec<usize> = (0..self.num_simplices(n - 1)).filter(|&f| self.cofaces(n - 1, f).len() == 1).collect();
        if open.is_empty() {
            return Ok(());
        }
        let size = open.iter().map(|&f| geometry::diameter(&self.points(n - 1, f))).sum::<f64>() / open.len() as f64;
        let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / size).floor() as i64).collect() };
        let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let candidates: BTreeSet<usize> = open.iter().flat_map(|&f| self.simplex_vertices(n - 1, f).iter().copied()).collect();
        for &v in &candidates {
            grid.entry(key(self.vertex(v))).or_default().push(v);
        }
        for &f in &open {
            let cell = self.cofaces(n - 1, f)[0];
            let facet = self.simplex_vertices(n - 1, f);
            let pts = self.points(n - 1, f);
            let slack = WELL_CENTERED_TOL * geometry::diameter(&pts);
            let lo: Vec<f64> = (0..n).map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min) - slack).collect();
            let hi: Vec<f64> = (0..n).map(|i| pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max) + slack).collect();
            let (klo, khi) = (key(&lo), key(&hi));
            let cell_vertices = self.simplex_vertices(n, cell);
            let opposite = cell_vertices.iter().position(|v| !facet.contains(v)).expect("facet of its cell");
            let cell_points = self.points(n, cell);
            let mut bucket = klo.clone();
            loop {
                for &v in grid.get(&bucket).map_or(&[][..], Vec::as_slice) {
                    let p = self.vertex(v);
                    if cell_vertices.contains(&v) || (0..n).any(|i| p[i] < lo[i] || p[i] > hi[i]) {
                        continue;
                    }
                    let Some(b) = geometry::barycentric_coordinates(&cell_points, p) else {
                        continue;
                    };
                    let on_facet = b[opposite].abs() <= WELL_CENTERED_TOL
                        && b.iter().enumerate().all(|(i, &x)| i == opposite || x >= -WELL_CENTERED_TOL);
                    if on_facet {
                        let mut second = v;
                        for k in 0..n {
                            second = self.cofaces(k, second)[0];
                        }
                        return Err(MeshError::NonConforming { first: cell, second, reason: "hanging vertex on a facet" });
                    }
                }
                // Odometer over the buckets covering the facet's box.
                let mut axis = 0;
                while axis < n && bucket[axis] == khi[axis] {
                    bucket[axis] = klo[axis];
                    axis += 1;
                }
                if axis == n {
                    break;
                }
                bucket[axis] += 1;
            }
        }
        Ok(())
    }

    fn relative_sign(&self, k: usize, simplex: usize, face: usize) -> i8 {
        self.faces(k, simplex)
            .iter()
            .find(|(f, _)| *f == face)
            .map_or(0, |(_, s)| *s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.levels[0].len()
    }

    pub fn num_simplices(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, Level::len)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Sorted vertex tuple of a stored simplex.
    pub fn simplex_vertices(&self, k: usize, i: usize) -> &[usize] {
        self.levels[k].simplex(i)
    }

    /// Orientation sign of the stored simplex relative to its sorted vertex order.
    pub fn orientation(&self, k: usize, i: usize) -> i8 {
        self.levels[k].signs[i]
    }

    /// Vertex tuple in the stored orientation (sorted, last two swapped when the sign is negative).
    pub fn oriented_vertices(&self, k: usize, i: usize) -> Vec<usize> {
        let mut v = self.simplex_vertices(k, i).to_vec();
        if self.orientation(k, i) < 0 {
            let l = v.len();
            v.swap(l - 2, l - 1);
        }
        v
    }

    pub fn points(&self, k: usize, i: usize) -> Vec<&[f64]> {
        self.simplex_vertices(k, i).iter().map(|&v| self.vertex(v)).collect()
    }

    /// (face index, relative orientation) for each (k-1)-face, in the order
    /// obtained by dropping sorted vertex 0, 1, ..., k.
    pub fn faces(&self, k: usize, i: usize) -> Vec<(usize, i8)> {
        if k == 0 {
            return Vec::new();
        }
        let l = &self.levels[k];
        let r = i * (k + 1)..(i + 1) * (k + 1);
        l.face_ids[r.clone()]
            .iter()
            .copied()
            .zip(l.face_signs[r].iter().copied())
            .collect()
    }

    pub fn face_ids(&self, k: usize, i: usize) -> &[usize] {
        &self.levels[k].face_ids[i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn face_signs(&self, k: usize, i: usize) -> &[i8] {
        &self.levels[k].face_signs[i * (k + 1)..(i + 1) * (k + 1)]
    }

    /// (k+1)-simplices having the given k-simplex as a face.
    pub fn cofaces(&self, k: usize, i: usize) -> &[usize] {
        if k >= self.dim {
            return &[];
        }
        let l = &self.levels[k];
        &l.coface_ids[l.coface_offsets[i]..l.coface_offsets[i + 1]]
    }

    /// Look up an oriented vertex tuple. Returns the stored index and the sign
    /// of the given ordering relative to the stored orientation.
    pub fn find(&self, vertices: &[usize]) -> Option<(usize, i8)> {
        let k = vertices.len().checked_sub(1)?;
        let mut sorted = vertices.to_vec();
        let parity = sort_parity(&mut sorted);
        let idx = *self.lookup.get(k)?.get(sorted.as_slice())?;
        Some((idx, parity * self.orientation(k, idx)))
    }

    fn check(&self, s: Simplex) -> Result<(), MeshError> {
        if s.dim <= self.dim && s.index < self.num_simplices(s.dim) {
            Ok(())
        } else {
            Err(MeshError::UnknownSimplex {
                dim: s.dim,
                index: s.index,
            })
        }
    }

    /// Boundary of a stored simplex as a signed chain of (k-1)-simplices.
    pub fn boundary_chain(&self, s: Simplex) -> Result<Chain, MeshError> {
        self.check(s)?;
        Ok(Chain::from_simplex(s).boundary(self))
    }

    /// Boundary of an arbitrary oriented vertex tuple `[v_0, ..., v_k]`,
    /// expressed in stored simplices: `sum_i (-1)^i [v_0, .., ^v_i, .., v_k]`.
    pub fn boundary_of(&self, vertices: &[usize]) -> Result<Chain, MeshError> {
        self.find(vertices)
            .ok_or_else(|| MeshError::UnknownVertices(vertices.to_vec()))?;
        let k = vertices.len() - 1;
        let mut chain = Chain::zero(k.saturating_sub(1));
        if k == 0 {
            return Ok(chain);
        }
        for i in 0..=k {
            let face: Vec<usize> = vertices
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| *v)
                .collect();
            let (idx, sign) = self
                .find(&face)
                .ok_or_else(|| MeshError::UnknownVertices(face.clone()))?;
            let parity = if i % 2 == 0 { 1 } else { -1 };
            chain.add(idx, parity * sign as i64);
        }
        Ok(chain)
    }

    /// Signed incidence matrix of the boundary map C_k -> C_{k-1}.
    pub fn boundary_matrix(&self, k: usize) -> Result<CsMat<i32>, MeshError> {
        if k == 0 || k > self.dim {
            return Err(MeshError::DegreeOutOfRange { k, max: self.dim });
        }
        let rows = self.num_simplices(k - 1);
        let cols = self.num_simplices(k);
        let mut tri = TriMat::with_capacity((rows, cols), cols * (k + 1));
        for s in 0..cols {
            for (f, sign) in self.faces(k, s) {
                tri.add_triplet(f, s, sign as i32);
            }
        }
        Ok(tri.to_csc())
    }

    /// Top cells containing the simplex.
    pub fn top_cofaces(&self, s: Simplex) -> Vec<usize> {
        let mut current: BTreeSet<usize> = [s.index].into_iter().collect();
        for k in s.dim..self.dim {
            current = current
                .iter()
                .flat_map(|&i| self.cofaces(k, i).iter().copied())
                .collect();
        }
        current.into_iter().collect()
    }

    /// Smallest subcomplex containing every simplex that has `s` as a face.
    pub fn closed_star(&self, s: Simplex) -> Result<SubComplex, MeshError> {
        self.check(s)?;
        let mut simplices = vec![BTreeSet::new(); self.dim + 1];
        let mut frontier: BTreeSet<usize> = self.top_cofaces(s).into_iter().collect();
        for k in (0..=self.dim).rev() {
            let mut next = BTreeSet::new();
            for &i in &frontier {
                if k > 0 {
                    next.extend(self.face_ids(k, i).iter().copied());
                }
            }
            simplices[k] = std::mem::take(&mut frontier);
            frontier = next;
        }
        Ok(SubComplex { simplices })
    }

    /// Facets (n-1 simplices) with exactly one coface.
    pub fn boundary_facets(&self) -> Vec<usize> {
        let k = self.dim - 1;
        (0..self.num_simplices(k))
            .filter(|&f| self.cofaces(k, f).len() == 1)
            .collect()
    }

    /// Flags per dimension: simplex lies in the boundary complex of the mesh.
    pub fn boundary_flags(&self) -> Vec<Vec<bool>> {
        let mut flags: Vec<Vec<bool>> = (0..=self.dim).map(|k| vec![false; self.num_simplices(k)]).collect();
        let mut frontier: BTreeSet<usize> = self.boundary_facets().into_iter().collect();
        for k in (0..self.dim).rev() {
            let mut next = BTreeSet::new();
            for &i in &frontier {
                flags[k][i] = true;
                if k > 0 {
                    next.extend(self.face_ids(k, i).iter().copied());
                }
            }
            frontier = next;
        }
        flags
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        self.boundary_flags().swap_remove(0)
    }

    /// Unsigned k-volume (1 for vertices).
    pub fn volume(&self, k: usize, i: usize) -> f64 {
        geometry::simplex_volume(&self.points(k, i))
    }

    pub fn circumcenter(&self, s: Simplex) -> Result<Vec<f64>, MeshError> {
        self.check(s)?;
        geometry::circumsphere(&self.points(s.dim, s.index))
            .map(|c| c.center)
            .map_err(|Degenerate { condition }| MeshError::DegenerateSimplex { simplex: s, condition })
    }

    /// Longest edge length.
    pub fn mesh_size(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        (0..self.num_simplices(1))
            .map(|e| self.volume(1, e))
            .fold(0.0, f64::max)
    }

    /// Total n-volume of the domain.
    pub fn total_volume(&self) -> f64 {
        (0..self.num_simplices(self.dim)).map(|t| self.volume(self.dim, t)).sum()
    }

    pub fn shape_report(&self) -> ShapeReport {
        let mut h: f64 = 0.0;
        let mut gamma_min = f64::INFINITY;
        let mut c_reg: f64 = 0.0;
        let mut min_bary = f64::INFINITY;
        let mut worst = None;
        for k in 1..=self.dim {
            for i in 0..self.num_simplices(k) {
                let pts = self.points(k, i);
                let diam = geometry::diameter(&pts);
                let gamma = geometry::inradius(&pts);
                h = h.max(diam);
                gamma_min = gamma_min.min(gamma);
                c_reg = c_reg.max(diam / gamma);
                let b = match geometry::circumsphere(&pts) {
                    Ok(c) => c.barycentric.iter().cloned().fold(f64::INFINITY, f64::min),
                    Err(_) => f64::NEG_INFINITY,
                };
                if b < min_bary {
                    min_bary = b;
                    worst = Some(Simplex::new(k, i));
                }
            }
        }
        let mut vertex_degree = vec![0usize; self.num_vertices()];
        for t in 0..self.num_simplices(self.dim) {
            for &v in self.simplex_vertices(self.dim, t) {
                vertex_degree[v] += 1;
            }
        }
        let star_bound = vertex_degree.into_iter().max().unwrap_or(0);
        let well_centered = if min_bary > WELL_CENTERED_TOL {
            WellCentered::Strict
        } else if min_bary >= -WELL_CENTERED_TOL {
            WellCentered::Weak
        } else {
            WellCentered::Violated
        };
        ShapeReport {
            h,
            gamma_min,
            c_reg,
            star_bound,
            well_centered,
            min_circumcenter_barycentric: min_bary,
            worst_simplex: worst,
        }
    }

    /// Labels attached to boundary facets, keyed by sorted vertex tuple.
    pub fn boundary_labels(&self) -> &BTreeMap<Vec<usize>, String> {
        &self.labels
    }

    pub fn with_boundary_labels(mut self, labels: BTreeMap<Vec<usize>, String>) -> Self {
        self.labels = labels;
        self
    }

    /// Vertices lying on a facet carrying the given label.
    pub fn labelled_vertices(&self, label: &str) -> BTreeSet<usize> {
        self.labels
            .iter()
            .filter(|(_, l)| l.as_str() == label)
            .flat_map(|(f, _)| f.iter().copied())
            .collect()
    }
}

/// Sort in place and return the parity of the sorting permutation.
pub(crate) fn sort_parity(v: &mut [usize]) -> i8 {
    let mut parity = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            parity = -parity;
            j -= 1;
        }
    }
    parity
}

/// All increasing index tuples of length `k` drawn from `0..n`, lexicographic.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

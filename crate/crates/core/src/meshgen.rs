//! Mesh families used in the experiments, medial refinement and `decmesh 1` I/O.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{circumsphere, det_columns, sub};
use crate::mesh::{combinations, MeshError, Simplex, SimplicialComplex};

/// Label given to the boundary pieces where the corner solution vanishes.
pub const GAMMA: &str = "gamma";

#[derive(Debug, Error)]
pub enum MeshGenError {
    #[error("corner angle {0} must lie strictly between pi and 2 pi")]
    InvalidAlpha(f64),
    #[error("polygon needs at least 5 sides for well-centered wheels, got {0}")]
    InvalidPolygon(usize),
    #[error("square pattern must be 1, 2 or 3, got {0}")]
    InvalidPattern(u8),
    #[error("cannot parse family `{0}`")]
    UnknownFamily(String),
    #[error("family {0} cannot be refined")]
    Unrefinable(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Wheel on a regular polygon with unit spokes.
    PentagonWheel { sides: usize },
    /// Unit square split into right triangles with pattern 1, 2 or 3.
    Square { pattern: u8 },
    /// Wheel with a reentrant corner of angle `alpha` at the hub.
    Corner { alpha: f64 },
    /// Unit cube, six tetrahedra per grid cell sharing the main diagonal.
    CubeKuhn,
    FromFile(PathBuf),
}

impl Family {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Family::PentagonWheel { .. } | Family::Square { .. } | Family::Corner { .. } => Some(2),
            Family::CubeKuhn => Some(3),
            Family::FromFile(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), MeshGenError> {
        match *self {
            Family::PentagonWheel { sides } if sides < 5 => Err(MeshGenError::InvalidPolygon(sides)),
            Family::Square { pattern } if !(1..=3).contains(&pattern) => Err(MeshGenError::InvalidPattern(pattern)),
            Family::Corner { alpha } if !(alpha > PI && alpha < 2.0 * PI) => Err(MeshGenError::InvalidAlpha(alpha)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PentagonWheel { sides: 5 } => write!(f, "pentagon"),
            Family::PentagonWheel { sides } => write!(f, "pentagon:{sides}"),
            Family::Square { pattern } => write!(f, "square:{pattern}"),
            Family::Corner { alpha } => write!(f, "corner:{}pi", alpha / PI),
            Family::CubeKuhn => write!(f, "cube"),
            Family::FromFile(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Angle syntax: plain radians, or `a*pi/b`, `api/b`, `pi`.
fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*');
    let c = if coeff.is_empty() { 1.0 } else { coeff.parse::<f64>().ok()? };
    Some(c * PI / den)
}

impl FromStr for Family {
    type Err = MeshGenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let bad = || MeshGenError::UnknownFamily(s.to_string());
        let family = match (name, arg) {
            ("pentagon", None) => Family::PentagonWheel { sides: 5 },
            ("pentagon" | "ngon" | "wheel", Some(a)) => Family::PentagonWheel { sides: a.parse().map_err(|_| bad())? },
            ("square", None) => Family::Square { pattern: 1 },
            ("square", Some(a)) => Family::Square { pattern: a.parse().map_err(|_| bad())? },
            ("corner", None) => Family::Corner { alpha: 8.0 * PI / 5.0 },
            ("corner", Some(a)) => Family::Corner { alpha: parse_angle(a).ok_or_else(bad)? },
            ("cube", None) => Family::CubeKuhn,
            ("file", Some(p)) => Family::FromFile(PathBuf::from(p)),
            _ => return Err(bad()),
        };
        family.validate()?;
        Ok(family)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub level: usize,
}

impl FamilySpec {
    pub fn new(family: Family, level: usize) -> Self {
        Self { family, level }
    }
}

/// Mesh at the requested level of a family.
pub fn generate(spec: &FamilySpec) -> Result<SimplicialComplex, MeshGenError> {
    spec.family.validate()?;
    match &spec.family {
        Family::PentagonWheel { sides } => {
            refine_times(wheel(*sides, 2.0 * PI, *sides, false)?, spec.level)
        }
        Family::Corner { alpha } => {
            let m = (alpha / (2.0 * PI / 5.0)).ceil() as usize;
            refine_times(wheel(m, *alpha, m + 1, true)?, spec.level)
        }
        Family::Square { pattern } => square(*pattern, 1 << spec.level),
        Family::CubeKuhn => cube(2 << spec.level),
        Family::FromFile(path) => refine_times(load(path)?, spec.level),
    }
}

/// Next level of the family.
pub fn refine(complex: &SimplicialComplex, spec: &FamilySpec) -> Result<SimplicialComplex, MeshGenError> {
    match &spec.family {
        Family::Square { .. } | Family::CubeKuhn => generate(&FamilySpec::new(spec.family.clone(), spec.level + 1)),
        _ if complex.dim() == 2 => Ok(medial_refine(complex)?),
        other => Err(MeshGenError::Unrefinable(other.to_string())),
    }
}

fn refine_times(mut c: SimplicialComplex, times: usize) -> Result<SimplicialComplex, MeshGenError> {
    for _ in 0..times {
        c = medial_refine(&c)?;
    }
    Ok(c)
}

/// Hub at the origin and `cells` triangles of angle `span / cells` with unit
/// spokes, first spoke along +x. `rim` rim vertices: equal to `cells` for a
/// closed wheel, `cells + 1` for an open fan. Open fans get both spokes labelled.
fn wheel(cells: usize, span: f64, rim: usize, open: bool) -> Result<SimplicialComplex, MeshGenError> {
    let mut v = vec![vec![0.0, 0.0]];
    for j in 0..rim {
        let a = span * j as f64 / cells as f64;
        // exact axis for the first spoke so polar angles start at 0
        v.push(if j == 0 { vec![1.0, 0.0] } else { vec![a.cos(), a.sin()] });
    }
    let tris: Vec<Vec<usize>> = (0..cells).map(|j| vec![0, j + 1, (j + 1) % rim + 1]).collect();
    let mut c = SimplicialComplex::new(2, &v, &tris)?;
    if open {
        let labels: BTreeMap<Vec<usize>, String> =
            [(vec![0, 1], GAMMA.to_string()), (vec![0, rim], GAMMA.to_string())].into_iter().collect();
        c = c.with_boundary_labels(labels);
    }
    Ok(c)
}

/// Split every triangle along its medial triangle; midpoints are appended
/// after the existing vertices in edge order.
pub fn medial_refine(c: &SimplicialComplex) -> Result<SimplicialComplex, MeshError> {
    assert_eq!(c.dim(), 2, "medial refinement is planar");
    let nv = c.num_vertices();
    let mut verts: Vec<Vec<f64>> = c.vertices().map(|p| p.to_vec()).collect();
    for e in 0..c.num_simplices(1) {
        let s = c.simplex_vertices(1, e);
        let (a, b) = (c.vertex(s[0]), c.vertex(s[1]));
        verts.push(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect());
    }
    let mid = |a: usize, b: usize| nv + c.find(&[a, b]).expect("edge of a cell").0;
    let mut cells = Vec::with_capacity(4 * c.num_simplices(2));
    for t in 0..c.num_simplices(2) {
        let o = c.oriented_vertices(2, t);
        let (a, b, d) = (o[0], o[1], o[2]);
        let (ab, bd, da) = (mid(a, b), mid(b, d), mid(d, a));
        cells.push(vec![a, ab, da]);
        cells.push(vec![ab, b, bd]);
        cells.push(vec![da, bd, d]);
        cells.push(vec![ab, bd, da]);
    }
    let mut labels = BTreeMap::new();
    for (facet, label) in c.boundary_labels() {
        let m = mid(facet[0], facet[1]);
        for half in [[facet[0], m], [facet[1], m]] {
            let mut h = half.to_vec();
            h.sort_unstable();
            labels.insert(h, label.clone());
        }
    }
    Ok(SimplicialComplex::new(2, &verts, &cells)?.with_boundary_labels(labels))
}

/// `n x n` grid of the unit square, two right triangles per cell.
/// Pattern 1: every diagonal from lower left to upper right. Pattern 2:
/// diagonals alternate like a checkerboard. Pattern 3: diagonals alternate by row.
fn square(pattern: u8, n: usize) -> Result<SimplicialComplex, MeshGenError> {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(vec![i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let flip = match pattern {
                1 => false,
                2 => (i + j) % 2 == 1,
                _ => j % 2 == 1,
            };
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            if flip {
                cells.push(vec![p00, p10, p01]);
                cells.push(vec![p10, p11, p01]);
            } else {
                cells.push(vec![p00, p10, p11]);
                cells.push(vec![p00, p11, p01]);
            }
        }
    }
    Ok(SimplicialComplex::new(2, &v, &cells)?)
}

/// `n^3` grid of the unit cube, each cell cut into the six tetrahedra
/// `x0 -> x0 + e_a -> x0 + e_a + e_b -> x0 + 1`.
fn cube(n: usize) -> Result<SimplicialComplex, MeshGenError> {
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut v = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                v.push(vec![i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in PERMS {
                    let mut x = [i, j, k];
                    let mut tet = vec![id(x[0], x[1], x[2])];
                    for axis in p {
                        x[axis] += 1;
                        tet.push(id(x[0], x[1], x[2]));
                    }
                    cells.push(tet);
                }
            }
        }
    }
    Ok(SimplicialComplex::new(3, &v, &cells)?)
}

/// Moves every interior vertex by a uniform random offset of length at most
/// `amplitude` times its shortest incident edge. Offsets that would leave an
/// incident simplex with a circumcenter within `margin` (in barycentric terms)
/// of its boundary are redrawn, and after a few failures the vertex stays put.
/// Boundary vertices never move, so the domain and its labels are unchanged.
pub fn jitter_interior(
    c: &SimplicialComplex,
    amplitude: f64,
    margin: f64,
    seed: u64,
) -> Result<SimplicialComplex, MeshError> {
    const ATTEMPTS: usize = 16;
    let n = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed = c.boundary_vertices();
    let mut verts: Vec<Vec<f64>> = c.vertices().map(|p| p.to_vec()).collect();
    let cells: Vec<Vec<usize>> = (0..c.num_simplices(n)).map(|t| c.oriented_vertices(n, t)).collect();
    for v in 0..verts.len() {
        if fixed[v] {
            continue;
        }
        let shortest = c
            .cofaces(0, v)
            .iter()
            .map(|&e| c.volume(1, e))
            .fold(f64::INFINITY, f64::min);
        let star = c.top_cofaces(Simplex::new(0, v));
        let home = verts[v].clone();
        for _ in 0..ATTEMPTS {
            // rejection sampling keeps the offset uniform in the ball
            let offset: Vec<f64> = loop {
                let o: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if o.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break o;
                }
            };
            verts[v] = home.iter().zip(&offset).map(|(x, o)| x + amplitude * shortest * o).collect();
            if star.iter().all(|&t| well_centered_around(&verts, &cells[t], v, margin)) {
                break;
            }
            verts[v] = home.clone();
        }
    }
    Ok(SimplicialComplex::new(n, &verts, &cells)?.with_boundary_labels(c.boundary_labels().clone()))
}

/// Every face of `cell` through `v` keeps its circumcenter at least `margin`
/// inside, and the cell keeps its orientation.
fn well_centered_around(verts: &[Vec<f64>], cell: &[usize], v: usize, margin: f64) -> bool {
    let others: Vec<usize> = cell.iter().copied().filter(|&w| w != v).collect();
    let pts: Vec<&[f64]> = cell.iter().map(|&w| verts[w].as_slice()).collect();
    let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    if det_columns(&edges) <= 0.0 {
        return false;
    }
    (1..=others.len()).all(|size| {
        combinations(others.len(), size).into_iter().all(|pick| {
            let mut face: Vec<&[f64]> = vec![&verts[v]];
            face.extend(pick.iter().map(|&i| verts[others[i]].as_slice()));
            face.len() < 3
                || circumsphere(&face).is_ok_and(|s| s.barycentric.iter().all(|&b| b > margin))
        })
    })
}

/// Text serialisation; cells are written positively oriented, labelled
/// boundary facets are listed in an optional trailing section.
pub fn to_decmesh(c: &SimplicialComplex) -> String {
    let n = c.dim();
    let mut out = String::new();
    let _ = writeln!(out, "decmesh 1");
    let _ = writeln!(out, "dim {n}");
    let _ = writeln!(out, "vertices {}", c.num_vertices());
    for p in c.vertices() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "cells {}", c.num_simplices(n));
    for t in 0..c.num_simplices(n) {
        let line: Vec<String> = c.oriented_vertices(n, t).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let labels = c.boundary_labels();
    if !labels.is_empty() {
        let _ = writeln!(out, "boundary {}", labels.len());
        for (facet, label) in labels {
            let line: Vec<String> = facet.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{} {label}", line.join(" "));
        }
    }
    out
}

pub fn from_decmesh(text: &str, source: &str) -> Result<SimplicialComplex, MeshGenError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, message: String| MeshGenError::Parse { path: source.to_string(), line, message };
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")));

    let (ln, header) = next("header")?;
    if header != "decmesh 1" {
        return Err(err(ln, format!("expected header `decmesh 1`, found `{header}`")));
    }
    let keyed = |key: &str, (ln, l): (usize, &str)| -> Result<usize, MeshGenError> {
        l.strip_prefix(key)
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| err(ln, format!("expected `{key} <count>`, found `{l}`")))
    };
    let dim = keyed("dim", next("dim")?)?;
    let nv = keyed("vertices", next("vertices")?)?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let p: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
        let p = p.map_err(|e| err(ln, format!("bad coordinate: {e}")))?;
        if p.len() != dim {
            return Err(err(ln, format!("expected {dim} coordinates, found {}", p.len())));
        }
        verts.push(p);
    }
    let nc = keyed("cells", next("cells")?)?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = next("cell")?;
        let c: Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
        cells.push(c.map_err(|e| err(ln, format!("bad vertex index: {e}")))?);
    }
    let mut labels = BTreeMap::new();
    if let Ok((ln, l)) = next("boundary") {
        let nb = keyed("boundary", (ln, l))?;
        for _ in 0..nb {
            let (ln, l) = next("boundary facet")?;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(err(ln, format!("expected {dim} indices and a label")));
            }
            let facet: Result<Vec<usize>, _> = fields[..dim].iter().map(|s| s.parse()).collect();
            let mut facet = facet.map_err(|e| err(ln, format!("bad vertex index: {e}")))?;
            facet.sort_unstable();
            labels.insert(facet, fields[dim].to_string());
        }
    }
    if let Ok((ln, l)) = next("end of file") {
        return Err(err(ln, format!("trailing content `{l}`")));
    }
    Ok(SimplicialComplex::new(dim, &verts, &cells)?.with_boundary_labels(labels))
}

pub fn save(c: &SimplicialComplex, path: &Path) -> Result<(), MeshGenError> {
    std::fs::write(path, to_decmesh(c))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SimplicialComplex, MeshGenError> {
    let text = std::fs::read_to_string(path)?;
    from_decmesh(&text, &path.display().to_string())
}

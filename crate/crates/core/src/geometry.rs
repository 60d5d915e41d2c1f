//! Small dense geometry kernels on points stored as `&[f64]` slices.

use nalgebra::{DMatrix, DVector};

/// Condition number above which a circumcenter system is treated as degenerate.
pub const MAX_CONDITION: f64 = 1e12;

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Determinant of the square matrix whose columns are `cols`.
pub(crate) fn det_columns(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    if n == 0 {
        return 1.0;
    }
    match n {
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        3 => {
            let (a, b, c) = (&cols[0], &cols[1], &cols[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1])
                + c[0] * (a[1] * b[2] - a[2] * b[1])
        }
        _ => DMatrix::from_fn(n, n, |i, j| cols[j][i]).determinant(),
    }
}

/// Gram matrix of edge vectors `p_i - p_0`.
fn edge_gram(points: &[&[f64]]) -> (Vec<Vec<f64>>, DMatrix<f64>) {
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let k = edges.len();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&edges[i], &edges[j]));
    (edges, gram)
}

/// Unsigned k-volume of the simplex spanned by `points` (k = points.len() - 1).
/// A single point has volume 1.
pub fn simplex_volume(points: &[&[f64]]) -> f64 {
    let k = points.len() - 1;
    match k {
        0 => 1.0,
        1 => distance(points[0], points[1]),
        _ => {
            let (_, gram) = edge_gram(points);
            gram.determinant().max(0.0).sqrt() / factorial(k)
        }
    }
}

pub fn diameter(points: &[&[f64]]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(distance(points[i], points[j]));
        }
    }
    d
}

/// Circumcenter of a simplex and the barycentric coordinates of that point.
#[derive(Clone, Debug, PartialEq)]
pub struct Circumsphere {
    pub center: Vec<f64>,
    pub barycentric: Vec<f64>,
}

/// Failure of the equidistance solve for a (near) degenerate simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Degenerate {
    pub condition: f64,
}

/// Circumcenter inside the plane of the simplex, from the normal equations
/// `G a = diag(G) / 2` with `G` the Gram matrix of the edge vectors at `p_0`.
pub fn circumsphere(points: &[&[f64]]) -> Result<Circumsphere, Degenerate> {
    let k = points.len() - 1;
    if k == 0 {
        return Ok(Circumsphere {
            center: points[0].to_vec(),
            barycentric: vec![1.0],
        });
    }
    let (edges, gram) = edge_gram(points);
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition >= MAX_CONDITION {
        return Err(Degenerate { condition });
    }
    let rhs = DVector::from_fn(k, |i, _| 0.5 * gram[(i, i)]);
    let coeffs = gram
        .cholesky()
        .ok_or(Degenerate { condition })?
        .solve(&rhs);
    let mut center = points[0].to_vec();
    for (a, e) in coeffs.iter().zip(&edges) {
        for (c, x) in center.iter_mut().zip(e) {
            *c += a * x;
        }
    }
    let mut barycentric = Vec::with_capacity(k + 1);
    barycentric.push(1.0 - coeffs.iter().sum::<f64>());
    barycentric.extend(coeffs.iter());
    Ok(Circumsphere {
        center,
        barycentric,
    })
}

/// Radius of the largest k-ball inscribed in a k-simplex: `k |s| / sum |facets|`.
pub fn inradius(points: &[&[f64]]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 0.0;
    }
    let facets: f64 = (0..=k)
        .map(|skip| {
            let f: Vec<&[f64]> = points
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, p)| *p)
                .collect();
            simplex_volume(&f)
        })
        .sum();
    k as f64 * simplex_volume(points) / facets
}

/// Barycentric coordinates of `x` with respect to an n-simplex in R^n.
pub fn barycentric_coordinates(points: &[&[f64]], x: &[f64]) -> Option<Vec<f64>> {
    let n = points.len() - 1;
    let m = DMatrix::from_fn(n, n, |i, j| points[j + 1][i] - points[0][i]);
    let rhs = DVector::from_fn(n, |i, _| x[i] - points[0][i]);
    let sol = m.lu().solve(&rhs)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0 - sol.iter().sum::<f64>());
    out.extend(sol.iter());
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_circumcenter_on_hypotenuse() {
        let p: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        let c = circumsphere(&p).unwrap();
        assert!((c.center[0] - 0.5).abs() < 1e-15 && (c.center[1] - 0.5).abs() < 1e-15);
        assert!(c.barycentric[0].abs() < 1e-15);
    }

    #[test]
    fn equilateral_circumcenter() {
        let s = 3f64.sqrt();
        let p: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.5, s / 2.0]];
        let c = circumsphere(&p).unwrap();
        assert!((c.center[0] - 0.5).abs() < 1e-15);
        assert!((c.center[1] - s / 6.0).abs() < 1e-15);
        // all barycentric weights equal
        for b in &c.barycentric {
            assert!((b - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn corner_tetrahedron_circumcenter_matches_least_squares() {
        let p: [&[f64]; 4] = [
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ];
        let c = circumsphere(&p).unwrap();
        // brute force: minimise the spread of squared distances over a grid refinement
        let mut best = (f64::INFINITY, [0.0; 3]);
        let mut center = [0.0, 0.0, 0.0];
        let mut step = 0.25;
        for _ in 0..40 {
            for dx in -2..=2 {
                for dy in -2..=2 {
                    for dz in -2..=2 {
                        let q = [
                            center[0] + dx as f64 * step,
                            center[1] + dy as f64 * step,
                            center[2] + dz as f64 * step,
                        ];
                        let d: Vec<f64> = p.iter().map(|v| distance(v, &q).powi(2)).collect();
                        let mean = d.iter().sum::<f64>() / 4.0;
                        let spread: f64 = d.iter().map(|x| (x - mean).powi(2)).sum();
                        if spread < best.0 {
                            best = (spread, q);
                        }
                    }
                }
            }
            center = best.1;
            step *= 0.5;
        }
        for (exact, searched) in c.center.iter().zip(center) {
            assert!((exact - searched).abs() < 1e-9);
            assert!((exact - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_simplex_is_reported() {
        let p: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[2.0, 1e-14]];
        let err = circumsphere(&p).unwrap_err();
        assert!(err.condition > MAX_CONDITION);
    }

    #[test]
    fn volumes_and_inradius() {
        let p: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        assert!((simplex_volume(&p) - 0.5).abs() < 1e-15);
        let r = inradius(&p);
        assert!((r - (2.0 - 2f64.sqrt()) / 2.0).abs() < 1e-14);
        let e: [&[f64]; 2] = [&[0.0, 0.0], &[3.0, 4.0]];
        assert_eq!(simplex_volume(&e), 5.0);
        assert_eq!(inradius(&e), 2.5);
    }
}

//! Quadrature on the reference m-simplex with positive weights summing to 1.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Barycentric coordinates of the nodes, `dim + 1` entries each.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Polynomials up to this total degree are integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Rule on an m-simplex exact to at least `degree`. Planar rules of degree
    /// up to 6 are symmetric Dunavant rules, everything else is a collapsed
    /// Gauss product.
    pub fn new(dim: usize, degree: usize) -> Self {
        match dim {
            0 => Self { dim, points: vec![vec![1.0]], weights: vec![1.0], degree: usize::MAX },
            1 => {
                let (x, w) = gauss_legendre(degree / 2 + 1);
                Self {
                    dim,
                    points: x.iter().map(|&t| vec![1.0 - t, t]).collect(),
                    weights: w,
                    degree: 2 * (degree / 2) + 1,
                }
            }
            2 if degree <= 4 => dunavant4(),
            2 if degree <= 6 => dunavant6(),
            _ => collapsed(dim, degree),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical node positions for a simplex with the given vertices.
    pub fn map<'a>(&'a self, vertices: &'a [&'a [f64]]) -> impl Iterator<Item = (Vec<f64>, f64)> + 'a {
        let n = vertices[0].len();
        self.points.iter().zip(&self.weights).map(move |(b, &w)| {
            let mut x = vec![0.0; n];
            for (l, v) in b.iter().zip(vertices) {
                for (xi, vi) in x.iter_mut().zip(v.iter()) {
                    *xi += l * vi;
                }
            }
            (x, w)
        })
    }
}

/// Gauss-Legendre nodes mapped to [0, 1] with weights summing to 1.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * d * d));
    }
    (x, w)
}

/// P_m(t) and P_m'(t) by the three-term recurrence.
fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (t * p1 - p0) / (t * t - 1.0))
}

fn orbit3(weight: f64, a: f64, b: f64, out: &mut QuadratureRule) {
    for p in [[a, b, b], [b, a, b], [b, b, a]] {
        out.points.push(p.to_vec());
        out.weights.push(weight);
    }
}

fn orbit6(weight: f64, a: f64, b: f64, c: f64, out: &mut QuadratureRule) {
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.points.push(p.to_vec());
        out.weights.push(weight);
    }
}

fn dunavant4() -> QuadratureRule {
    let mut r = QuadratureRule { dim: 2, points: vec![], weights: vec![], degree: 4 };
    orbit3(0.223381589678011, 0.108103018168070, 0.445948490915965, &mut r);
    orbit3(0.109951743655322, 0.816847572980459, 0.091576213509771, &mut r);
    r
}

fn dunavant6() -> QuadratureRule {
    let mut r = QuadratureRule { dim: 2, points: vec![], weights: vec![], degree: 6 };
    orbit3(0.116786275726379, 0.501426509658179, 0.249286745170910, &mut r);
    orbit3(0.050844906370207, 0.873821971016996, 0.063089014491502, &mut r);
    orbit6(0.082851075618374, 0.053145049844817, 0.310352451033784, 0.636502499121399, &mut r);
    r
}

/// Conical product rule: cube [0,1]^m mapped onto the simplex by
/// `x_1 = u_1, x_2 = (1-u_1) u_2, ...`, Gauss in every direction with enough
/// points to absorb the Jacobian `prod (1-u_j)^{m-j}`.
fn collapsed(dim: usize, degree: usize) -> QuadratureRule {
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|j| gauss_legendre((degree + dim - 1 - j) / 2 + 1))
        .collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim];
    let factorial: f64 = (1..=dim).map(|i| i as f64).product();
    loop {
        let mut remaining = 1.0;
        let mut bary = Vec::with_capacity(dim + 1);
        let mut w = factorial;
        for j in 0..dim {
            let (x, wt) = (&rules[j].0[idx[j]], &rules[j].1[idx[j]]);
            w *= wt * remaining;
            bary.push(remaining * x);
            remaining *= 1.0 - x;
        }
        bary.push(remaining);
        points.push(bary);
        weights.push(w);
        let mut j = dim;
        loop {
            if j == 0 {
                return QuadratureRule { dim, points, weights, degree };
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < rules[j].0.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

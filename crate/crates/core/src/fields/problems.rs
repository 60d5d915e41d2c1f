//! Manufactured solutions. Each problem carries u, du and f = δdu = -Δu.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use super::FormField;

type Scalar = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Vector = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem `{0}` (expected trig2d, trig3d, corner[:mu], linear2d, linear3d, zero2d)")]
    Unknown(String),
    #[error("corner exponent {0} must lie in (0, 1]")]
    InvalidExponent(f64),
}

#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    u: Scalar,
    grad: Vector,
    f: Scalar,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        u: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim, u: Arc::new(u), grad: Arc::new(grad), f: Arc::new(f) }
    }

    /// u = x² sin y.
    pub fn trig2d() -> Self {
        Self::new(
            "trig2d",
            2,
            |x| x[0] * x[0] * x[1].sin(),
            |x| vec![2.0 * x[0] * x[1].sin(), x[0] * x[0] * x[1].cos()],
            |x| (x[0] * x[0] - 2.0) * x[1].sin(),
        )
    }

    /// u = x² sin y + cos z.
    pub fn trig3d() -> Self {
        Self::new(
            "trig3d",
            3,
            |x| x[0] * x[0] * x[1].sin() + x[2].cos(),
            |x| vec![2.0 * x[0] * x[1].sin(), x[0] * x[0] * x[1].cos(), -x[2].sin()],
            |x| (x[0] * x[0] - 2.0) * x[1].sin() + x[2].cos(),
        )
    }

    /// Harmonic u = r^μ sin(μθ), θ in [0, 2π), vanishing on the positive x axis
    /// and on the ray θ = π/μ.
    pub fn corner(mu: f64) -> Result<Self, ProblemError> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(ProblemError::InvalidExponent(mu));
        }
        Ok(Self::new(
            format!("corner:{mu}"),
            2,
            move |x| {
                let (r, t) = polar(x);
                r.powf(mu) * (mu * t).sin()
            },
            move |x| {
                let (r, t) = polar(x);
                if r == 0.0 {
                    return vec![0.0, 0.0];
                }
                let a = mu * r.powf(mu - 1.0);
                vec![a * ((mu - 1.0) * t).sin(), a * ((mu - 1.0) * t).cos()]
            },
            |_| 0.0,
        ))
    }

    /// Affine u = 1 + 2x - 3y (+ 0.5z in 3D).
    pub fn linear(dim: usize) -> Self {
        const C: [f64; 3] = [2.0, -3.0, 0.5];
        Self::new(
            format!("linear{dim}d"),
            dim,
            |x| 1.0 + x.iter().zip(C).map(|(a, c)| a * c).sum::<f64>(),
            move |_| C[..dim].to_vec(),
            |_| 0.0,
        )
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(format!("zero{dim}d"), dim, |_| 0.0, move |_| vec![0.0; dim], |_| 0.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u(&self, x: &[f64]) -> f64 {
        (self.u)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// u as a 0-form with du attached.
    pub fn u_field(&self) -> FormField {
        let u = self.u.clone();
        FormField::scalar(self.dim, move |x| u(x)).with_derivative(self.du_field())
    }

    /// du = Σ ∂_i u dx^i, closed.
    pub fn du_field(&self) -> FormField {
        let g = self.grad.clone();
        let n = self.dim;
        let zero = FormField::new(n, 2.min(n), move |_| vec![0.0; super::basis(n, 2.min(n)).len()]);
        let field = FormField::new(n, 1, move |x| g(x));
        if n >= 2 {
            field.with_derivative(zero)
        } else {
            field
        }
    }

    pub fn f_field(&self) -> FormField {
        let f = self.f.clone();
        FormField::scalar(self.dim, move |x| f(x))
    }

    /// d★du = Δu vol = -f vol.
    pub fn d_star_du(&self) -> FormField {
        let f = self.f.clone();
        FormField::volume_form(self.dim, move |x| -f(x))
    }
}

fn polar(x: &[f64]) -> (f64, f64) {
    let r = x[0].hypot(x[1]);
    let mut t = x[1].atan2(x[0]);
    if t < 0.0 {
        t += 2.0 * PI;
    }
    (r, t)
}

impl FromStr for Problem {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None => match s {
                "trig2d" => Ok(Self::trig2d()),
                "trig3d" => Ok(Self::trig3d()),
                "corner" => Self::corner(0.625),
                "linear2d" => Ok(Self::linear(2)),
                "linear3d" => Ok(Self::linear(3)),
                "zero2d" => Ok(Self::zero(2)),
                "zero3d" => Ok(Self::zero(3)),
                _ => Err(ProblemError::Unknown(s.to_string())),
            },
            Some(("corner", mu)) => {
                let value = match mu.split_once('/') {
                    Some((a, b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()).map(|(a, b)| a / b),
                    None => mu.parse().ok(),
                };
                Self::corner(value.ok_or_else(|| ProblemError::Unknown(s.to_string()))?)
            }
            _ => Err(ProblemError::Unknown(s.to_string())),
        }
    }
}

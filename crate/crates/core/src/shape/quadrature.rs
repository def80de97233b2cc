//! Gauss rules on the unit interval, the reference triangle and the reference
//! tetrahedron.
//!
//! Simplex rules are collapsed (Duffy) tensor products of Gauss-Jacobi rules,
//! so every degree up to [`MAX_DEGREE`] is available with positive weights.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Highest polynomial degree integrated exactly by the tabulated rules.
pub const MAX_DEGREE: usize = 24;

/// A quadrature rule on a reference simplex.
///
/// Points are stored in reference Cartesian coordinates; `barycentric`
/// converts them. Weights sum to the reference measure (1 on the interval,
/// 1/2 on the triangle, 1/6 on the tetrahedron).
#[derive(Debug, Clone)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of point `i`, first coordinate belonging to
    /// the origin vertex.
    pub fn barycentric(&self, i: usize) -> Vec<f64> {
        let x = &self.points[i];
        let mut out = Vec::with_capacity(D + 1);
        out.push(1.0 - x.iter().sum::<f64>());
        out.extend_from_slice(x);
        out
    }

    pub fn integrate(&self, f: impl Fn(&[f64; D]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

pub type LineRule = QuadratureRule<1>;
pub type TriangleRule = QuadratureRule<2>;
pub type TetRule = QuadratureRule<3>;

/// Nodes and weights of the Gauss-Jacobi rule with `n` points for the weight
/// `(1-t)^a (1+t)^b` on `[-1, 1]` (Golub-Welsch).
fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jac = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a + b;
            let num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
    let evd = jac
        .self_adjoint_eigen(Side::Lower)
        .expect("tridiagonal Jacobi matrix eigendecomposition");
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        nodes.push(s[i]);
        weights.push(mu0 * u[(0, i)] * u[(0, i)]);
    }
    // Newton polish on the Legendre case keeps nodes at full precision.
    if a == 0.0 && b == 0.0 {
        for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
            for _ in 0..3 {
                let (p, dp) = legendre_with_derivative(n, *x);
                *x -= p / dp;
            }
            let (_, dp) = legendre_with_derivative(n, *x);
            *w = 2.0 / ((1.0 - *x * *x) * dp * dp);
        }
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gamma(x: f64) -> f64 {
    // Only integer and half-integer arguments below 10 occur here.
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut y = 0.5;
        while y < x - 1e-12 {
            g *= y;
            y += 1.0;
        }
        g
    }
}

/// Rule on `[0, 1]` for the weight `(1-u)^a`, exact up to degree `2n - 1`.
fn collapsed_factor(n: usize, a: u32) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_jacobi(n, a as f64, 0.0);
    let scale = 0.5f64.powi(a as i32 + 1);
    let u = t.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let w = w.iter().map(|w| w * scale).collect();
    (u, w)
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::QuadratureDegree(degree, MAX_DEGREE));
    }
    Ok(())
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn line(degree: usize) -> Result<LineRule> {
    check_degree(degree)?;
    let (u, w) = collapsed_factor(points_for(degree), 0);
    Ok(LineRule {
        points: u.into_iter().map(|u| [u]).collect(),
        weights: w,
        degree,
    })
}

/// Rule on the triangle `{s, t >= 0, s + t <= 1}`.
pub fn triangle(degree: usize) -> Result<TriangleRule> {
    check_degree(degree)?;
    let n = points_for(degree);
    let (u, wu) = collapsed_factor(n, 1);
    let (v, wv) = collapsed_factor(n, 0);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (ui, wi) in u.iter().zip(&wu) {
        for (vj, wj) in v.iter().zip(&wv) {
            points.push([*ui, (1.0 - ui) * vj]);
            weights.push(wi * wj);
        }
    }
    Ok(TriangleRule { points, weights, degree })
}

fn build_tet(degree: usize) -> TetRule {
    let n = points_for(degree);
    let (u, wu) = collapsed_factor(n, 2);
    let (v, wv) = collapsed_factor(n, 1);
    let (w, ww) = collapsed_factor(n, 0);
    let mut points = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for (ui, wi) in u.iter().zip(&wu) {
        for (vj, wj) in v.iter().zip(&wv) {
            for (wk, wwk) in w.iter().zip(&ww) {
                let x = *ui;
                let y = (1.0 - ui) * vj;
                let z = (1.0 - ui) * (1.0 - vj) * wk;
                points.push([x, y, z]);
                weights.push(wi * wj * wwk);
            }
        }
    }
    TetRule { points, weights, degree }
}

/// Rule on the reference tetrahedron with vertices `0, e1, e2, e3`, exact for
/// all polynomials of total degree `<= degree`. Rules are cached.
pub fn tetrahedron(degree: usize) -> Result<Arc<TetRule>> {
    check_degree(degree)?;
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TetRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    Ok(guard
        .entry(degree)
        .or_insert_with(|| Arc::new(build_tet(degree)))
        .clone())
}

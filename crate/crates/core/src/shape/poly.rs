//! Dense polynomials in three variables over a graded monomial basis.
//!
//! Monomials are taken in the shifted variable `y = x - c` where `c` is the
//! barycenter of the reference tetrahedron; this keeps the prime bases of the
//! reference elements reasonably conditioned up to degree 11.

use std::collections::HashMap;

/// Barycenter of the reference tetrahedron.
pub const CENTER: [f64; 3] = [0.25, 0.25, 0.25];

/// All monomials `y1^a y2^b y3^c` with `a + b + c <= degree`, graded by total
/// degree.
#[derive(Debug, Clone)]
pub struct MonomialSet {
    degree: usize,
    exponents: Vec<[usize; 3]>,
    index: HashMap<[usize; 3], usize>,
}

impl MonomialSet {
    pub fn new(degree: usize) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            for a in (0..=total).rev() {
                for b in (0..=total - a).rev() {
                    exponents.push([a, b, total - a - b]);
                }
            }
        }
        let index = exponents.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        Self { degree, exponents, index }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[[usize; 3]] {
        &self.exponents
    }

    pub fn index_of(&self, e: [usize; 3]) -> Option<usize> {
        self.index.get(&e).copied()
    }

    /// Number of monomials of total degree `<= d` in three variables.
    pub fn count(d: usize) -> usize {
        (d + 1) * (d + 2) * (d + 3) / 6
    }

    /// Values of every monomial at the reference point `x`.
    pub fn eval(&self, x: &[f64; 3]) -> Vec<f64> {
        let y = [x[0] - CENTER[0], x[1] - CENTER[1], x[2] - CENTER[2]];
        let mut pows = [[1.0; 32]; 3];
        for (axis, p) in pows.iter_mut().enumerate() {
            for k in 1..=self.degree {
                p[k] = p[k - 1] * y[axis];
            }
        }
        self.exponents
            .iter()
            .map(|e| pows[0][e[0]] * pows[1][e[1]] * pows[2][e[2]])
            .collect()
    }

    /// Coefficients of `d/dy_axis` applied to a scalar polynomial.
    pub fn derivative(&self, coeffs: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (k, e) in self.exponents.iter().enumerate() {
            if e[axis] == 0 || coeffs[k] == 0.0 {
                continue;
            }
            let mut lower = *e;
            lower[axis] -= 1;
            let j = self.index[&lower];
            out[j] += coeffs[k] * e[axis] as f64;
        }
        out
    }

    /// Coefficients of `y_axis * q` for a scalar polynomial `q` of degree
    /// below `self.degree()`.
    pub fn times_coordinate(&self, coeffs: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (k, e) in self.exponents.iter().enumerate() {
            if coeffs[k] == 0.0 {
                continue;
            }
            let mut higher = *e;
            higher[axis] += 1;
            let j = *self
                .index
                .get(&higher)
                .expect("product exceeds the degree of the monomial set");
            out[j] += coeffs[k];
        }
        out
    }
}

/// A vector polynomial stored component-wise over a [`MonomialSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct VecPoly(pub [Vec<f64>; 3]);

impl VecPoly {
    pub fn zeros(n: usize) -> Self {
        Self([vec![0.0; n], vec![0.0; n], vec![0.0; n]])
    }

    pub fn axis(n: usize, axis: usize, monomial: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[axis][monomial] = 1.0;
        v
    }

    pub fn axpy(&mut self, alpha: f64, other: &VecPoly) {
        for c in 0..3 {
            for (a, b) in self.0[c].iter_mut().zip(&other.0[c]) {
                *a += alpha * b;
            }
        }
    }

    pub fn curl(&self, set: &MonomialSet) -> VecPoly {
        let d = |c: usize, axis: usize| set.derivative(&self.0[c], axis);
        let sub = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x - y).collect();
        VecPoly([sub(d(2, 1), d(1, 2)), sub(d(0, 2), d(2, 0)), sub(d(1, 0), d(0, 1))])
    }

    pub fn div(&self, set: &MonomialSet) -> Vec<f64> {
        let mut out = set.derivative(&self.0[0], 0);
        for c in 1..3 {
            for (o, v) in out.iter_mut().zip(set.derivative(&self.0[c], c)) {
                *o += v;
            }
        }
        out
    }

    pub fn eval_with(&self, monomials: &[f64]) -> [f64; 3] {
        let dot = |c: &Vec<f64>| c.iter().zip(monomials).map(|(a, b)| a * b).sum::<f64>();
        [dot(&self.0[0]), dot(&self.0[1]), dot(&self.0[2])]
    }
}

/// Scalar polynomial evaluation against precomputed monomial values.
pub fn eval_scalar(coeffs: &[f64], monomials: &[f64]) -> f64 {
    coeffs.iter().zip(monomials).map(|(a, b)| a * b).sum()
}

/// Gradient of a scalar polynomial.
pub fn gradient(set: &MonomialSet, coeffs: &[f64]) -> VecPoly {
    VecPoly([
        set.derivative(coeffs, 0),
        set.derivative(coeffs, 1),
        set.derivative(coeffs, 2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_formula() {
        for d in 0..8 {
            assert_eq!(MonomialSet::new(d).len(), MonomialSet::count(d));
        }
    }

    #[test]
    fn derivative_of_product() {
        let set = MonomialSet::new(3);
        // q = y1^2 y3
        let mut q = vec![0.0; set.len()];
        q[set.index_of([2, 0, 1]).unwrap()] = 1.0;
        let dq = set.derivative(&q, 0);
        assert_eq!(dq[set.index_of([1, 0, 1]).unwrap()], 2.0);
        let x = [0.7, 0.1, 0.4];
        let m = set.eval(&x);
        let y = [x[0] - 0.25, x[1] - 0.25, x[2] - 0.25];
        assert!((eval_scalar(&dq, &m) - 2.0 * y[0] * y[2]).abs() < 1e-15);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let set = MonomialSet::new(4);
        let q: Vec<f64> = (0..set.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let g = gradient(&set, &q);
        let c = g.curl(&set);
        assert!(c.0.iter().flatten().all(|v| v.abs() < 1e-12));
    }
}

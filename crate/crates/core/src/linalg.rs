//! Dense linear algebra for the small patch and element problems.

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_TOL: f64 = 1e-11;

pub fn zeros(rows: usize, cols: usize) -> Mat<f64> {
    Mat::zeros(rows, cols)
}

pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub fn mat_t_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)] * x[i]).sum())
        .collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_abs(a: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

fn column(x: &[f64]) -> Mat<f64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

/// Relative residual `|Ax - b| / (|A| |x| + |b|)` with `|A|` the largest entry.
pub fn relative_residual(a: &Mat<f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = mat_vec(a, x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let scale = max_abs(a) * norm(x) + norm(b);
    if scale == 0.0 {
        0.0
    } else {
        norm(&r) / scale
    }
}

/// Solution of a square system together with diagnostics.
#[derive(Debug, Clone)]
pub struct SquareSolve {
    pub x: Vec<f64>,
    pub residual: f64,
    /// Numerical rank deficiency; nonzero means the minimum-norm solution was
    /// taken.
    pub deficiency: usize,
}

/// Solve `Ax = b` by LU with partial pivoting; if that fails to produce a
/// small residual (singular `A`, e.g. a multiplier with a nullspace), fall
/// back to the minimum-norm least-squares solution from an SVD.
pub fn solve_square(a: &Mat<f64>, b: &[f64], tol: f64) -> Result<SquareSolve> {
    let n = a.nrows();
    if n == 0 {
        return Ok(SquareSolve { x: Vec::new(), residual: 0.0, deficiency: 0 });
    }
    let lu = a.partial_piv_lu();
    let sol = lu.solve(column(b));
    let x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    if x.iter().all(|v| v.is_finite()) {
        let residual = relative_residual(a, &x, b);
        if residual <= tol {
            return Ok(SquareSolve { x, residual, deficiency: 0 });
        }
    }
    let (x, rank) = pseudo_solve(a, b)?;
    let residual = relative_residual(a, &x, b);
    if residual > tol {
        return Err(Error::Singular(format!(
            "system of size {n} has relative residual {residual:.3e} (rank {rank})"
        )));
    }
    Ok(SquareSolve { x, residual, deficiency: n - rank })
}

/// Minimum-norm least-squares solution and numerical rank.
pub fn pseudo_solve(a: &Mat<f64>, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Singular(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let k = s.nrows();
    let smax = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let mut x = vec![0.0; a.ncols()];
    let mut rank = 0;
    for i in 0..k {
        if s[i] <= RANK_TOL * smax || s[i] == 0.0 {
            continue;
        }
        rank += 1;
        let c: f64 = (0..a.nrows()).map(|r| u[(r, i)] * b[r]).sum::<f64>() / s[i];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += c * v[(j, i)];
        }
    }
    Ok((x, rank))
}

/// Result of [`constrained_min`].
#[derive(Debug, Clone)]
pub struct ConstrainedMin {
    pub x: Vec<f64>,
    /// Rank of the constraint matrix.
    pub rank: usize,
    /// Dimension of the constraint nullspace (free directions of the
    /// minimization).
    pub nullity: usize,
    /// Relative violation `|Ex - f| / (|E| |x| + |f|)`.
    pub constraint_residual: f64,
}

/// Minimize `x^T M x / 2 - g^T x` subject to `E x = f` with `M` symmetric
/// positive definite on the constraint nullspace, by the nullspace method:
/// `x = x_0 + N y` with `x_0` the minimum-norm solution of the constraints
/// and `N` an orthonormal nullspace basis from a full SVD of `E`.
pub fn constrained_min(m: &Mat<f64>, g: &[f64], e: &Mat<f64>, f: &[f64]) -> Result<ConstrainedMin> {
    let n = m.nrows();
    if e.nrows() == 0 {
        let sol = solve_square(m, g, 1e-8)?;
        return Ok(ConstrainedMin { x: sol.x, rank: 0, nullity: n, constraint_residual: 0.0 });
    }
    let svd = e
        .svd()
        .map_err(|err| Error::Singular(format!("SVD did not converge: {err:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let k = s.nrows();
    let smax = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let rank = (0..k).filter(|&i| s[i] > RANK_TOL * smax && s[i] > 0.0).count();
    let mut x0 = vec![0.0; n];
    for i in 0..rank {
        let c: f64 = (0..e.nrows()).map(|r| u[(r, i)] * f[r]).sum::<f64>() / s[i];
        for (j, xj) in x0.iter_mut().enumerate() {
            *xj += c * v[(j, i)];
        }
    }
    let nullity = n - rank;
    let mut x = x0.clone();
    if nullity > 0 {
        let basis = Mat::from_fn(n, nullity, |i, j| v[(i, rank + j)]);
        let mb = m * &basis;
        let reduced = basis.transpose() * &mb;
        let mx0 = mat_vec(m, &x0);
        let rhs: Vec<f64> = g.iter().zip(&mx0).map(|(a, b)| a - b).collect();
        let rhs = mat_t_vec(&basis, &rhs);
        let y = solve_square(&reduced, &rhs, 1e-8)?.x;
        let dx = mat_vec(&basis, &y);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    let constraint_residual = relative_residual(e, &x, f);
    Ok(ConstrainedMin { x, rank, nullity, constraint_residual })
}

/// `x^T A y`.
pub fn bilinear(a: &Mat<f64>, x: &[f64], y: &[f64]) -> f64 {
    let ay = mat_vec(a, y);
    x.iter().zip(&ay).map(|(p, q)| p * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_and_fallback() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
        let s = solve_square(&a, &[1.0, 2.0, 3.0], 1e-12).unwrap();
        assert_eq!(s.deficiency, 0);
        assert!(s.residual < 1e-14);
        // singular but consistent
        let b = Mat::from_fn(3, 3, |i, j| if i < 2 && j < 2 { if i == j { 1.0 } else { 0.0 } } else { 0.0 });
        let s = solve_square(&b, &[1.0, 2.0, 0.0], 1e-12).unwrap();
        assert_eq!(s.deficiency, 1);
        assert!((s.x[0] - 1.0).abs() < 1e-14 && s.x[2].abs() < 1e-14);
        // inconsistent
        assert!(solve_square(&b, &[1.0, 2.0, 1.0], 1e-12).is_err());
    }

    #[test]
    fn constrained_minimum_matches_kkt() {
        // min |x - c|^2 subject to x0 + x1 + x2 = 1
        let m = Mat::<f64>::identity(3, 3);
        let c = [0.3, -0.2, 0.5];
        let e = Mat::from_fn(1, 3, |_, _| 1.0);
        let r = constrained_min(&m, &c, &e, &[1.0]).unwrap();
        let shift = (1.0 - c.iter().sum::<f64>()) / 3.0;
        for i in 0..3 {
            assert!((r.x[i] - c[i] - shift).abs() < 1e-14);
        }
        assert_eq!((r.rank, r.nullity), (1, 2));
        assert!(r.constraint_residual < 1e-15);
    }
}

//! The global Nédélec discretization of the curl–curl problem.
//!
//! Find `A_h` in the Nédélec space with zero tangential trace on `Gamma_D` and
//! a multiplier `phi_h` in the continuous `P_{p+1}` space vanishing on
//! `Gamma_D` such that
//!
//! ```text
//! (curl A_h, curl v) + (grad phi_h, v) = (j, v)
//! (A_h, grad q)                        = 0
//! ```
//!
//! for all test functions. When `Gamma_D` is empty one multiplier vertex is
//! anchored to remove the constants.

use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::shape::assembly::{gram, load_field, CellBasis};
use crate::shape::field::{l2_norm_squared, Difference};
use crate::shape::{CellwiseField, Constraints, DiscreteField, DofSpace, Family, PiecewiseField};

/// Quadrature degree for the bilinear forms.
pub fn assembly_degree(p: usize) -> usize {
    2 * p + 2
}

/// Quadrature degree for non-polynomial data and error norms.
pub fn data_degree(p: usize) -> usize {
    2 * p + 6
}

#[derive(Debug, Clone)]
pub struct GlobalSolution {
    pub degree: usize,
    pub potential: DiscreteField,
    pub multiplier: DiscreteField,
    /// Relative residual of the factorized saddle-point system.
    pub residual: f64,
    /// `max_i |(curl A_h, curl v_i) - (j, v_i)|` relative to `|(j, v_i)|`,
    /// i.e. the Galerkin orthogonality defect without the multiplier term.
    pub galerkin_defect: f64,
    /// `max_a |(A_h, grad q_a)|` relative to `|A_h| |grad q_a|` sizes.
    pub gauge_defect: f64,
}

impl GlobalSolution {
    /// Number of unknowns of the potential.
    pub fn ndofs(&self) -> usize {
        self.potential.space.ndofs()
    }

    pub fn cellwise(&self) -> CellwiseField {
        self.potential.cellwise()
    }
}

fn dirichlet_faces(mesh: &Mesh) -> Vec<usize> {
    mesh.boundary_faces()
        .filter(|&f| mesh.face_tag(f) == Some(BoundaryTag::Dirichlet))
        .collect()
}

struct CellContribution {
    k: Vec<(usize, usize, f64)>,
    m: Vec<(usize, usize, f64)>,
    g: Vec<(usize, usize, f64)>,
    l: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

type Entries = Vec<(usize, usize, f64)>;

fn sparse(n: usize, entries: &[(usize, usize, f64)]) -> Result<SparseColMat<usize, f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> =
        entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Singular(format!("sparse assembly failed: {e:?}")))
}

fn spmv(entries: &[(usize, usize, f64)], x: &[f64], out: &mut [f64]) {
    for &(i, j, v) in entries {
        out[i] += v * x[j];
    }
}

fn cholesky_solve(llt: &faer::sparse::linalg::solvers::Llt<usize, f64>, b: &[f64]) -> Vec<f64> {
    let x = llt.solve(Mat::from_fn(b.len(), 1, |i, _| b[i]));
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Assemble and solve the saddle-point system.
///
/// The system is solved exactly by block elimination with two sparse
/// Cholesky factorizations. Testing the first equation with gradients gives
/// the multiplier from a Laplace problem, `(grad phi, grad q) = (j, grad q)`.
/// The potential then solves `K a = b - G phi` with `G^T a = 0`; it is the
/// limit of the iteration `(K + eps M) d = b - G phi - K a`, which converges
/// geometrically and keeps `a` orthogonal to the gradients. The residual of
/// the full saddle-point system is reported.
pub fn solve(mesh: &Mesh, degree: usize, source: &dyn PiecewiseField) -> Result<GlobalSolution> {
    let dir = dirichlet_faces(mesh);
    let v_space = Arc::new(DofSpace::global(mesh, Family::Nedelec, degree, &Constraints::faces(dir.clone()))?);
    let mut s_constraints = Constraints::faces(dir.clone());
    if dir.is_empty() {
        s_constraints.anchor_vertex = Some(0);
    }
    let s_space = Arc::new(DofSpace::global(mesh, Family::Lagrange, degree + 1, &s_constraints)?);
    let (nv, ns) = (v_space.ndofs(), s_space.ndofs());
    if nv == 0 {
        return Err(Error::Config("the discrete space has no unknowns".into()));
    }

    let qa = assembly_degree(degree);
    let qd = data_degree(degree);
    let parts: Vec<CellContribution> = (0..mesh.num_tets())
        .into_par_iter()
        .map(|t| -> Result<CellContribution> {
            let nb = CellBasis::new(mesh, t, Family::Nedelec, degree, qa)?;
            let lb = CellBasis::new(mesh, t, Family::Lagrange, degree + 1, qa)?;
            let kc = gram(&nb, true, &nb, true);
            let mc = gram(&nb, false, &nb, false);
            let gc = gram(&nb, false, &lb, true);
            let lc = gram(&lb, true, &lb, true);
            let nd = CellBasis::new(mesh, t, Family::Nedelec, degree, qd)?;
            let rc = load_field(mesh, t, &nd, false, source);
            let vd = v_space.cell_dofs(t);
            let sd = s_space.cell_dofs(t);
            let mut out = CellContribution { k: Vec::new(), m: Vec::new(), g: Vec::new(), l: Vec::new(), rhs: Vec::new() };
            for (i, di) in vd.iter().enumerate() {
                let Some(gi) = di else { continue };
                out.rhs.push((*gi, rc[i]));
                for (j, dj) in vd.iter().enumerate() {
                    if let Some(gj) = dj {
                        out.k.push((*gi, *gj, kc[(i, j)]));
                        out.m.push((*gi, *gj, mc[(i, j)]));
                    }
                }
                for (a, da) in sd.iter().enumerate() {
                    if let Some(ga) = da {
                        out.g.push((*gi, *ga, gc[(i, a)]));
                    }
                }
            }
            for (a, da) in sd.iter().enumerate() {
                let Some(ga) = da else { continue };
                for (c, dc) in sd.iter().enumerate() {
                    if let Some(gc2) = dc {
                        out.l.push((*ga, *gc2, lc[(a, c)]));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let (mut k, mut m, mut g, mut l): (Entries, Entries, Entries, Entries) = Default::default();
    let mut b = vec![0.0; nv];
    for part in parts {
        k.extend(part.k);
        m.extend(part.m);
        g.extend(part.g);
        l.extend(part.l);
        for (i, v) in part.rhs {
            b[i] += v;
        }
    }
    // G^T as (S row, V col) entries
    let gt: Entries = g.iter().map(|&(i, a, v)| (a, i, v)).collect();

    // multiplier: gradients of S_h lie in V_h, so testing with them gives
    // (grad phi, grad q) = (j, grad q)
    let mut phi = vec![0.0; ns];
    let mut lap = None;
    if ns > 0 {
        let chol = sparse(ns, &l)?
            .sp_cholesky(faer::Side::Lower)
            .map_err(|e| Error::Singular(format!("multiplier Laplacian is singular: {e:?}")))?;
        let grad_load = gradient_load(mesh, &s_space, degree, source)?;
        phi = cholesky_solve(&chol, &grad_load);
        lap = Some(chol);
    }
    let mut r0 = b.clone();
    let mut g_phi = vec![0.0; nv];
    spmv(&g, &phi, &mut g_phi);
    for (r, v) in r0.iter_mut().zip(&g_phi) {
        *r -= v;
    }

    // potential by shifted iteration
    let trace = |e: &Entries| e.iter().filter(|(i, j, _)| i == j).map(|t| t.2).sum::<f64>();
    let eps = 1e-8 * trace(&k) / trace(&m);
    let mut shifted = k.clone();
    shifted.extend(m.iter().map(|&(i, j, v)| (i, j, eps * v)));
    let chol = sparse(nv, &shifted)?
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::Singular(format!("shifted curl-curl matrix is not definite: {e:?}")))?;
    let mut a = vec![0.0; nv];
    let r0_norm = norm(&r0).max(f64::MIN_POSITIVE);
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let mut ka = vec![0.0; nv];
        spmv(&k, &a, &mut ka);
        let r: Vec<f64> = r0.iter().zip(&ka).map(|(p, q)| p - q).collect();
        let rel = norm(&r) / r0_norm;
        if rel < 1e-14 || rel >= 0.5 * last {
            break;
        }
        last = rel;
        let d = cholesky_solve(&chol, &r);
        for (x, y) in a.iter_mut().zip(&d) {
            *x += y;
        }
    }

    // remove the gradient component picked up by rounding: a -= D psi with
    // L psi = G^T a, where D maps multiplier dofs to the Nédélec dofs of
    // their gradients
    if let Some(lap) = &lap {
        let mut gta = vec![0.0; ns];
        spmv(&gt, &a, &mut gta);
        let psi = cholesky_solve(lap, &gta);
        let d = discrete_gradient(mesh, &v_space, &s_space)?;
        let mut dpsi = vec![0.0; nv];
        spmv(&d, &psi, &mut dpsi);
        for (x, y) in a.iter_mut().zip(&dpsi) {
            *x -= y;
        }
    }

    // diagnostics on the full saddle-point system
    let mut ka = vec![0.0; nv];
    spmv(&k, &a, &mut ka);
    let mut gta = vec![0.0; ns];
    let mut gta_abs = vec![0.0; ns];
    spmv(&gt, &a, &mut gta);
    for &(r, c, v) in &gt {
        gta_abs[r] += (v * a[c]).abs();
    }
    let first: Vec<f64> = (0..nv).map(|i| ka[i] + g_phi[i] - b[i]).collect();
    let amax = k.iter().chain(&g).fold(0.0f64, |mx, t| mx.max(t.2.abs()));
    let sol_norm = (norm(&a).powi(2) + norm(&phi).powi(2)).sqrt();
    let residual = (norm(&first).powi(2) + norm(&gta).powi(2)).sqrt()
        / (amax * sol_norm + norm(&b)).max(f64::MIN_POSITIVE);
    let bmax = b.iter().fold(0.0f64, |mx, v| mx.max(v.abs())).max(f64::MIN_POSITIVE);
    let galerkin_defect = (0..nv).map(|i| (ka[i] - b[i]).abs()).fold(0.0, f64::max) / bmax;
    let gauge_defect = gta
        .iter()
        .zip(&gta_abs)
        .map(|(v, s)| if *s > 0.0 { v.abs() / s } else { 0.0 })
        .fold(0.0, f64::max);
    log::debug!("global solve: {nv} + {ns} unknowns, residual {residual:.2e}");

    Ok(GlobalSolution {
        degree,
        potential: DiscreteField::new(v_space, a),
        multiplier: DiscreteField::new(s_space, phi),
        residual,
        galerkin_defect,
        gauge_defect,
    })
}

/// Entries `(i, a, d)` of the matrix expressing the gradient of multiplier
/// basis function `a` in the Nédélec basis. Gradients map covariantly, so the
/// local matrix is the same on every cell.
fn discrete_gradient(mesh: &Mesh, v_space: &DofSpace, s_space: &DofSpace) -> Result<Entries> {
    let ned = v_space.element();
    let lag = s_space.element();
    let local: Vec<Vec<f64>> = (0..lag.dim())
        .map(|a| ned.interpolate(|x| lag.derived[a].eval_with(&lag.monomials.eval(x))))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for t in 0..mesh.num_tets() {
        let vd = v_space.cell_dofs(t);
        for (a, da) in s_space.cell_dofs(t).iter().enumerate() {
            let Some(ga) = da else { continue };
            for (i, di) in vd.iter().enumerate() {
                let Some(gi) = di else { continue };
                let v = local[a][i];
                if v.abs() > 1e-14 && seen.insert((*gi, *ga)) {
                    out.push((*gi, *ga, v));
                }
            }
        }
    }
    Ok(out)
}

/// `(j, grad q_a)` for every multiplier basis function.
fn gradient_load(mesh: &Mesh, s_space: &DofSpace, degree: usize, source: &dyn PiecewiseField) -> Result<Vec<f64>> {
    let qd = data_degree(degree);
    let parts: Vec<Vec<(usize, f64)>> = (0..mesh.num_tets())
        .into_par_iter()
        .map(|t| -> Result<Vec<(usize, f64)>> {
            let lb = CellBasis::new(mesh, t, Family::Lagrange, degree + 1, qd)?;
            let lc = load_field(mesh, t, &lb, true, source);
            Ok(s_space
                .cell_dofs(t)
                .iter()
                .enumerate()
                .filter_map(|(a, d)| d.map(|g| (g, lc[a])))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; s_space.ndofs()];
    for (g, v) in parts.into_iter().flatten() {
        out[g] += v;
    }
    Ok(out)
}

/// `|curl(A - A_h)|` per cell (squared) and globally.
#[derive(Debug, Clone)]
pub struct EnergyError {
    pub per_cell: Vec<f64>,
    pub global: f64,
}

impl EnergyError {
    /// `|curl(A - A_h)|_{omega_e}` for every edge.
    pub fn patch_norms(&self, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.num_edges())
            .map(|e| mesh.edge_tets(e).iter().map(|&t| self.per_cell[t]).sum::<f64>().sqrt())
            .collect()
    }
}

/// Energy error of a discrete potential against an exact curl, with
/// quadrature of degree `quad_degree`.
pub fn energy_error(
    mesh: &Mesh,
    potential: &CellwiseField,
    exact_curl: &dyn PiecewiseField,
    quad_degree: usize,
) -> Result<EnergyError> {
    let discrete = potential.derived();
    let diff = Difference(exact_curl, &discrete);
    let cells: Vec<usize> = (0..mesh.num_tets()).collect();
    let per_cell: Vec<f64> = cells
        .par_chunks(64)
        .map(|chunk| l2_norm_squared(mesh, chunk, &diff, quad_degree))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let global = per_cell.iter().sum::<f64>().sqrt();
    Ok(EnergyError { per_cell, global })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{polynomial_mixed, unit_cube, unit_cube_tagged};
    use crate::shape::Analytic;

    #[test]
    fn zero_source_gives_zero() {
        let mesh = unit_cube(1, BoundaryTag::Dirichlet);
        let sol = solve(&mesh, 1, &Analytic::zero()).unwrap();
        assert!(sol.potential.coeffs.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn reproduces_contained_solution() {
        let (tags, exact) = polynomial_mixed();
        let mesh = unit_cube_tagged(2, tags);
        let sol = solve(&mesh, 2, &Analytic(exact.source.clone())).unwrap();
        let err = energy_error(&mesh, &sol.cellwise(), &Analytic(exact.curl.clone()), 8).unwrap();
        assert!(err.global < 1e-10, "{}", err.global);
        assert!(
            sol.residual < 1e-12 && sol.gauge_defect < 1e-9 && sol.galerkin_defect < 1e-9,
            "{} {} {}",
            sol.residual,
            sol.gauge_defect,
            sol.galerkin_defect
        );
        let patches: f64 = err.patch_norms(&mesh).iter().map(|v| v * v).sum();
        assert!((patches - 6.0 * err.global * err.global).abs() <= 1e-10 * patches.max(1e-300));
    }
}

//! Sequential elementwise equilibration around an edge.
//!
//! The patch cells are visited in their rotational order. On each cell the
//! field minimizing `|h - chi|_K` among Nédélec fields with `curl h = j_h`
//! is computed, with the tangential trace fixed on faces shared with cells
//! visited before and set to zero on `Gamma_N^e`. The trace dofs are the same
//! functionals seen from both sides of a face, so fixing a trace amounts to
//! copying dof values.

use super::PatchContext;
use crate::error::{Error, Result};
use crate::linalg::{constrained_min, mat_vec, relative_residual};
use crate::shape::assembly::{gram, load_field};
use crate::shape::{CellwiseField, PiecewiseField};

/// Diagnostics of one element problem of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepStep {
    pub tet: usize,
    /// Local dofs not fixed by traces.
    pub free: usize,
    /// Rank of the curl constraint restricted to the free dofs.
    pub rank: usize,
    /// Dimension of the remaining minimization space.
    pub nullity: usize,
}

#[derive(Debug, Clone)]
pub struct SweepFlux {
    pub flux: CellwiseField,
    pub eta: f64,
    pub equilibration_defect: f64,
    /// Largest relative violation of an element curl constraint.
    pub constraint_residual: f64,
    pub steps: Vec<SweepStep>,
}

/// Relative constraint violation above which an element problem is declared
/// infeasible.
const FEASIBILITY_TOL: f64 = 1e-8;

pub fn sweep_equilibrate(ctx: &PatchContext, j_h: &dyn PiecewiseField, chi: &dyn PiecewiseField) -> Result<SweepFlux> {
    let mut assigned: Vec<Option<f64>> = vec![None; ctx.ned.ndofs()];
    let mut steps = Vec::with_capacity(ctx.patch.len());
    let mut worst = 0.0f64;
    for (pos, &t) in ctx.cells().iter().enumerate() {
        let (nb, rb) = (&ctx.ned_basis[pos], &ctx.rt_basis[pos]);
        let dofs = ctx.ned.cell_dofs(pos);
        let m = gram(nb, false, nb, false);
        let g = load_field(ctx.mesh, t, nb, false, chi);
        let e = gram(rb, false, nb, true);
        let f = load_field(ctx.mesh, t, rb, false, j_h);

        // fixed values: eliminated dofs are zero, visited dofs are copied
        let mut fixed = vec![None; dofs.len()];
        for (k, d) in dofs.iter().enumerate() {
            fixed[k] = match d {
                None => Some(0.0),
                Some(g) => assigned[*g],
            };
        }
        let free: Vec<usize> = (0..dofs.len()).filter(|&k| fixed[k].is_none()).collect();
        let xf: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let m_xf = mat_vec(&m, &xf);
        let e_xf = mat_vec(&e, &xf);
        let nf = free.len();
        let m_ff = faer::Mat::from_fn(nf, nf, |i, j| m[(free[i], free[j])]);
        let g_f: Vec<f64> = free.iter().map(|&k| g[k] - m_xf[k]).collect();
        let e_f = faer::Mat::from_fn(e.nrows(), nf, |i, j| e[(i, free[j])]);
        let f_f: Vec<f64> = (0..e.nrows()).map(|i| f[i] - e_xf[i]).collect();
        let sol = constrained_min(&m_ff, &g_f, &e_f, &f_f)?;

        let mut local = xf;
        for (i, &k) in free.iter().enumerate() {
            local[k] = sol.x[i];
        }
        // feasibility of the full element constraint
        let rel = relative_residual(&e, &local, &f);
        if !(rel <= FEASIBILITY_TOL) {
            return Err(Error::Infeasible { tet: t, residual: rel });
        }
        worst = worst.max(rel);
        for &k in &free {
            if let Some(gk) = dofs[k] {
                debug_assert!(assigned[gk].is_none());
                assigned[gk] = Some(local[k]);
            }
        }
        steps.push(SweepStep { tet: t, free: nf, rank: sol.rank, nullity: sol.nullity });
    }
    let coeffs: Vec<f64> = assigned.iter().map(|v| v.unwrap_or(0.0)).collect();
    let flux = ctx.cellwise(&ctx.ned, &coeffs);
    let eta = ctx.distance_squared(&flux, chi).sqrt();
    let equilibration_defect = ctx.distance_squared(&flux.derived(), j_h).sqrt();
    Ok(SweepFlux { flux, eta, equilibration_defect, constraint_residual: worst, steps })
}

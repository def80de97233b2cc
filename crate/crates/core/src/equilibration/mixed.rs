//! The mixed patch problem: the Euler–Lagrange system of
//! `min |h - chi|` over conforming Nédélec fields on the patch with zero
//! tangential trace on `Gamma_N^e` and `curl h = j_h`.

use faer::Mat;

use super::{scatter, scatter_vec, PatchContext};
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::shape::assembly::{gram, load_field};
use crate::shape::{CellwiseField, PiecewiseField};

#[derive(Debug, Clone)]
pub struct PatchFlux {
    /// `h_h^e` in the local Nédélec bases of the patch cells.
    pub flux: CellwiseField,
    /// `|h - chi|_{omega_e}`.
    pub eta: f64,
    /// `|curl h - j_h|_{omega_e}`.
    pub equilibration_defect: f64,
    /// Relative residual of the saddle-point system.
    pub residual: f64,
    /// Rank deficiency of the saddle-point matrix (nonzero only if the
    /// multiplier is not unique).
    pub deficiency: usize,
}

/// Solve
///
/// ```text
/// (h, v)       + (sigma, curl v)                 = (chi, v)
/// (curl h, w)                   + (zeta, div w)  = (j_h, w)
///                (div sigma, q)                  = 0
/// ```
///
/// with `h` conforming Nédélec, `sigma` conforming Raviart–Thomas (both with
/// the `Gamma_N^e` conditions) and `zeta` broken `P_p`.
pub fn patch_equilibrate(ctx: &PatchContext, j_h: &dyn PiecewiseField, chi: &dyn PiecewiseField) -> Result<PatchFlux> {
    let (nn, nr, nl) = (ctx.ned.ndofs(), ctx.rt.ndofs(), ctx.lag.ndofs());
    let n = nn + nr + nl;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = vec![0.0; n];
    for (pos, &t) in ctx.cells().iter().enumerate() {
        let (nb, rb, lb) = (&ctx.ned_basis[pos], &ctx.rt_basis[pos], &ctx.lag_basis[pos]);
        let (nd, rd, ld) = (ctx.ned.cell_dofs(pos), ctx.rt.cell_dofs(pos), ctx.lag.cell_dofs(pos));
        scatter(&mut a, 0, 0, nd, nd, &gram(nb, false, nb, false));
        // C[w][v] = (curl v, w)
        let c = gram(rb, false, nb, true);
        scatter(&mut a, nn, 0, rd, nd, &c);
        scatter(&mut a, 0, nn, nd, rd, &c.transpose().to_owned());
        // D[q][w] = (div w, q)
        let d = gram(lb, false, rb, true);
        scatter(&mut a, nn + nr, nn, ld, rd, &d);
        scatter(&mut a, nn, nn + nr, rd, ld, &d.transpose().to_owned());
        scatter_vec(&mut b, 0, nd, &load_field(ctx.mesh, t, nb, false, chi));
        scatter_vec(&mut b, nn, rd, &load_field(ctx.mesh, t, rb, false, j_h));
    }
    let sol = solve_square(&a, &b, 1e-8).map_err(|e| {
        Error::Singular(format!("mixed patch problem on edge {}: {e}", ctx.patch.edge))
    })?;
    let flux = ctx.cellwise(&ctx.ned, &sol.x[..nn]);
    let eta = ctx.distance_squared(&flux, chi).sqrt();
    let equilibration_defect = ctx.distance_squared(&flux.derived(), j_h).sqrt();
    Ok(PatchFlux { flux, eta, equilibration_defect, residual: sol.residual, deficiency: sol.deficiency })
}

//! Projection of the source onto divergence-free Raviart–Thomas fields of an
//! edge patch.

use faer::Mat;

use super::{scatter, scatter_vec, PatchContext};
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::shape::assembly::{gram, load_field};
use crate::shape::{CellBasis, CellwiseField, Family, PiecewiseField};

#[derive(Debug, Clone)]
pub struct ProjectedSource {
    /// `j_h^e` in the local Raviart–Thomas bases of the patch cells.
    pub field: CellwiseField,
    /// Relative residual of the projection saddle-point system.
    pub residual: f64,
}

/// L2 projection of `j` onto `{v in RT_p(T^e) with zero normal trace on
/// Gamma_N^e : div v = 0}`, computed with a broken `P_p` multiplier for the
/// divergence. `quad_degree` is used for the load `(j, w)`.
pub fn project_source(ctx: &PatchContext, j: &dyn PiecewiseField, quad_degree: usize) -> Result<ProjectedSource> {
    let (nr, nl) = (ctx.rt.ndofs(), ctx.lag.ndofs());
    let n = nr + nl;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = vec![0.0; n];
    for (pos, &t) in ctx.cells().iter().enumerate() {
        let rb = &ctx.rt_basis[pos];
        let lb = &ctx.lag_basis[pos];
        let rd = ctx.rt.cell_dofs(pos);
        let ld = ctx.lag.cell_dofs(pos);
        scatter(&mut a, 0, 0, rd, rd, &gram(rb, false, rb, false));
        let d = gram(lb, false, rb, true);
        scatter(&mut a, nr, 0, ld, rd, &d);
        scatter(&mut a, 0, nr, rd, ld, &d.transpose().to_owned());
        let data = if quad_degree == ctx.quad {
            load_field(ctx.mesh, t, rb, false, j)
        } else {
            let rq = CellBasis::new(ctx.mesh, t, Family::RaviartThomas, ctx.degree, quad_degree)?;
            load_field(ctx.mesh, t, &rq, false, j)
        };
        scatter_vec(&mut b, 0, rd, &data);
    }
    let sol = solve_square(&a, &b, 1e-9).map_err(|e| {
        Error::Singular(format!("source projection on edge {}: {e}", ctx.patch.edge))
    })?;
    Ok(ProjectedSource { field: ctx.cellwise(&ctx.rt, &sol.x[..nr]), residual: sol.residual })
}

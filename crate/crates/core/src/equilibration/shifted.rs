//! Minimal-norm broken Nédélec extension of compatible data on an edge patch.

use std::collections::HashMap;

use faer::Mat;

use super::compatibility::{face_cells, face_sign, FaceDatum};
use super::PatchContext;
use crate::error::{Error, Result};
use crate::linalg::constrained_min;
use crate::shape::assembly::{gram, load_field};
use crate::shape::{reference, CellwiseField, Constraints, DofSpace, Family, PiecewiseField};

/// Minimize `|v|_{omega_e}` over broken `N_p` fields with `curl v = r_T` on
/// every cell and tangential jumps `r_F` on the constrained faces.
///
/// Tangential traces are determined by the closure dofs of a face, and these
/// are the same functionals from both sides, so a jump condition is a linear
/// condition on matching dofs.
pub fn solve_shifted(ctx: &PatchContext, r_t: &dyn PiecewiseField, r_f: &[FaceDatum]) -> Result<CellwiseField> {
    let mesh = ctx.mesh;
    let ned = reference(Family::Nedelec, ctx.degree)?;
    let dim = ned.dim();
    let cells = ctx.cells();
    let n = cells.len() * dim;
    let keys = DofSpace::new(mesh, Family::Nedelec, ctx.degree, cells, false, &Constraints::none())?;
    // local index of each global key per cell
    let local_of: Vec<HashMap<usize, usize>> = (0..cells.len())
        .map(|p| keys.cell_dofs(p).iter().enumerate().map(|(k, g)| (g.unwrap(), k)).collect())
        .collect();

    let mut m = Mat::<f64>::zeros(n, n);
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for (pos, &t) in cells.iter().enumerate() {
        let (nb, rb) = (&ctx.ned_basis[pos], &ctx.rt_basis[pos]);
        let mass = gram(nb, false, nb, false);
        let c = gram(rb, false, nb, true);
        let f = load_field(mesh, t, rb, false, r_t);
        for i in 0..dim {
            for j in 0..dim {
                m[(pos * dim + i, pos * dim + j)] = mass[(i, j)];
            }
        }
        for (i, fi) in f.iter().enumerate() {
            rows.push(((0..dim).map(|j| (pos * dim + j, c[(i, j)])).collect(), *fi));
        }
    }
    for datum in r_f {
        let f = datum.face;
        let t0 = face_cells(ctx, f)[0];
        let lf = crate::shape::trace::local_face(mesh, t0, f).unwrap();
        let p0 = ctx.patch.position(t0).unwrap();
        for k0 in ned.face_closure_dofs(lf) {
            let key = keys.cell_dofs(p0)[k0].unwrap();
            let mut row = Vec::new();
            for t in face_cells(ctx, f) {
                let p = ctx.patch.position(t).unwrap();
                row.push((p * dim + local_of[p][&key], face_sign(ctx, t, f)));
            }
            let mut rhs = 0.0;
            for term in &datum.terms {
                let p = keys.position(term.tet).ok_or_else(|| {
                    Error::Config(format!("face datum refers to cell {} outside the patch", term.tet))
                })?;
                rhs += term.sign * term.coeffs[local_of[p][&key]];
            }
            rows.push((row, rhs));
        }
    }
    let e = Mat::from_fn(rows.len(), n, |i, j| {
        rows[i].0.iter().filter(|(c, _)| *c == j).map(|(_, v)| v).sum()
    });
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let sol = constrained_min(&m, &vec![0.0; n], &e, &rhs)?;
    if sol.constraint_residual > 1e-8 {
        return Err(Error::Infeasible { tet: cells[0], residual: sol.constraint_residual });
    }
    let coeffs = (0..cells.len()).map(|p| sol.x[p * dim..(p + 1) * dim].to_vec()).collect();
    Ok(CellwiseField::new(ned, cells.to_vec(), coeffs))
}

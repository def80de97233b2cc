//! Compatible data for the broken extension problem on an edge patch: an
//! elementwise Raviart–Thomas field `r_T` and tangential traces `r_F` on the
//! constrained faces.

use nalgebra::Vector3;

use super::PatchContext;
use crate::error::Result;
use crate::mesh::PatchKind;
use crate::shape::field::{interpolate_cell, Difference};
use crate::shape::trace::{edge_quadrature, face_quadrature, local_face};
use crate::shape::{reference, CellwiseField, Family, PiecewiseField};

/// One Nédélec contribution `sign * v` to a face datum, with `v` given by its
/// local coefficients on a patch cell.
#[derive(Debug, Clone)]
pub struct FaceTerm {
    pub tet: usize,
    pub sign: f64,
    pub coeffs: Vec<f64>,
}

/// The tangential trace `r_F = sum sign * pi_F(v)` on one face.
#[derive(Debug, Clone)]
pub struct FaceDatum {
    pub face: usize,
    pub terms: Vec<FaceTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    /// Largest `|div r_T|` at cell quadrature points.
    pub divergence: f64,
    /// Largest `|[r_T].n_F - curl_F r_F|` at face quadrature points.
    pub normal_jump: f64,
    /// Largest violation of the circulation condition along the edge (zero
    /// for patch types without one).
    pub edge_circulation: f64,
    /// Largest data value the violations are compared against.
    pub scale: f64,
    pub compatible: bool,
}

const TOL: f64 = 1e-10;

/// `(n_t . n_F)` for a patch cell containing patch face `f`.
pub(crate) fn face_sign(ctx: &PatchContext, t: usize, f: usize) -> f64 {
    let i = local_face(ctx.mesh, t, f).expect("cell contains face");
    let n = ctx.patch.normal(f).expect("patch face");
    ctx.mesh.outward_normal(t, i).dot(&n).signum()
}

/// Patch cells containing face `f`.
pub(crate) fn face_cells(ctx: &PatchContext, f: usize) -> Vec<usize> {
    ctx.cells().iter().copied().filter(|&t| ctx.mesh.tet_faces(t).contains(&f)).collect()
}

/// Data obtained by shifting with `chi`: `r_T = j_h - curl chi` and
/// `r_F = -pi_F([chi]_F)` on the constrained faces. Both fields are
/// interpolated cellwise, which is exact for `j_h` in `RT_p` and `chi` in
/// `N_p`.
pub fn shifted_data(
    ctx: &PatchContext,
    j_h: &dyn PiecewiseField,
    chi: &dyn PiecewiseField,
) -> Result<(CellwiseField, Vec<FaceDatum>)> {
    let rt = reference(Family::RaviartThomas, ctx.degree)?;
    let ned = reference(Family::Nedelec, ctx.degree)?;
    let chi_local: Vec<Vec<f64>> =
        ctx.cells().iter().map(|&t| interpolate_cell(&ned, ctx.mesh, t, chi)).collect();
    let chi_field = CellwiseField::new(ned.clone(), ctx.cells().to_vec(), chi_local.clone());
    let curl = chi_field.derived();
    let diff = Difference(j_h, &curl);
    let r_t_coeffs = ctx.cells().iter().map(|&t| interpolate_cell(&rt, ctx.mesh, t, &diff)).collect();
    let r_t = CellwiseField::new(rt, ctx.cells().to_vec(), r_t_coeffs);
    let r_f = ctx
        .patch
        .face_set
        .iter()
        .map(|&f| FaceDatum {
            face: f,
            terms: face_cells(ctx, f)
                .into_iter()
                .map(|t| FaceTerm {
                    tet: t,
                    sign: -face_sign(ctx, t, f),
                    coeffs: chi_local[ctx.patch.position(t).unwrap()].clone(),
                })
                .collect(),
        })
        .collect();
    Ok((r_t, r_f))
}

/// Values of a face datum (as a full vector, whose tangential part is the
/// trace) and of its surface curl at physical points of the face.
fn face_datum_values(
    ctx: &PatchContext,
    datum: &FaceDatum,
    points: &[crate::piola::Point],
) -> Result<(Vec<Vector3<f64>>, Vec<f64>)> {
    let ned = reference(Family::Nedelec, ctx.degree)?;
    let n = ctx.patch.normal(datum.face).expect("patch face");
    let mut values = vec![Vector3::zeros(); points.len()];
    let mut curls = vec![0.0; points.len()];
    for term in &datum.terms {
        let v = CellwiseField::new(ned.clone(), vec![term.tet], vec![term.coeffs.clone()]);
        for (q, (x, c)) in v
            .eval(ctx.mesh, term.tet, points)
            .iter()
            .zip(v.derived().eval(ctx.mesh, term.tet, points))
            .enumerate()
        {
            values[q] += term.sign * (x - n * x.dot(&n));
            curls[q] += term.sign * c.dot(&n);
        }
    }
    Ok((values, curls))
}

/// Check `div r_T = 0`, `[r_T].n_F = curl_F r_F` on every constrained face
/// and, for interior and Neumann patches, the circulation condition of the
/// traces along the edge.
pub fn compatibility_check(
    ctx: &PatchContext,
    r_t: &dyn PiecewiseField,
    r_f: &[FaceDatum],
) -> Result<CompatibilityReport> {
    let mesh = ctx.mesh;
    let quad = ctx.quad + 2;
    let h = ctx.patch.metrics.h;
    let mut scale = 0.0f64;
    let mut divergence = 0.0f64;
    let rt = reference(Family::RaviartThomas, ctx.degree)?;
    for &t in ctx.cells() {
        let local = interpolate_cell(&rt, mesh, t, r_t);
        let field = CellwiseField::new(rt.clone(), vec![t], vec![local]);
        let (x, _) = crate::shape::field::cell_quadrature(mesh, t, quad)?;
        for (v, d) in field.eval(mesh, t, &x).iter().zip(field.derived().eval(mesh, t, &x)) {
            scale = scale.max(v.norm());
            // divergence has units of field / length
            divergence = divergence.max(d[0].abs() * h);
        }
    }

    let mut normal_jump = 0.0f64;
    for datum in r_f {
        let f = datum.face;
        let n = ctx.patch.normal(f).expect("patch face");
        let (x, _) = face_quadrature(mesh, f, quad)?;
        let mut jump = vec![0.0; x.len()];
        for t in face_cells(ctx, f) {
            let s = face_sign(ctx, t, f);
            for (q, v) in r_t.eval(mesh, t, &x).iter().enumerate() {
                jump[q] += s * v.dot(&n);
            }
        }
        let (values, curls) = face_datum_values(ctx, datum, &x)?;
        for q in 0..x.len() {
            scale = scale.max(values[q].norm()).max(curls[q].abs() * h);
            normal_jump = normal_jump.max((jump[q] - curls[q]).abs() * h);
        }
    }

    let e = ctx.patch.edge;
    let tau = mesh.edge_tangent(e);
    let faces = &ctx.patch.faces;
    let n = ctx.patch.len();
    // signed face list of the circulation condition
    let signed: Vec<(usize, f64)> = match ctx.patch.kind {
        PatchKind::Interior => faces[1..=n].iter().map(|&f| (f, 1.0)).collect(),
        PatchKind::NeumannBoundary => faces[0..n]
            .iter()
            .map(|&f| (f, 1.0))
            .chain(std::iter::once((faces[n], -1.0)))
            .collect(),
        _ => Vec::new(),
    };
    let mut edge_circulation = 0.0f64;
    if !signed.is_empty() {
        let (x, _) = edge_quadrature(mesh, e, quad)?;
        let mut sum = vec![0.0; x.len()];
        for (f, s) in signed {
            if let Some(datum) = r_f.iter().find(|d| d.face == f) {
                let (values, _) = face_datum_values(ctx, datum, &x)?;
                for q in 0..x.len() {
                    sum[q] += s * values[q].dot(&tau);
                }
            }
        }
        edge_circulation = sum.iter().fold(0.0, |m, v| m.max(v.abs()));
    }

    let bound = TOL * scale.max(f64::MIN_POSITIVE);
    let compatible = divergence <= bound && normal_jump <= bound && edge_circulation <= bound;
    Ok(CompatibilityReport { divergence, normal_jump, edge_circulation, scale, compatible })
}

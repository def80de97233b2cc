//! The cut-off function `psi_e` of an edge and the constants built from it.

use nalgebra::Vector3;

use crate::mesh::{EdgePatch, Mesh, PatchKind};
use crate::piola::Point;
use crate::shape::PiecewiseField;

/// `psi_e = |e| (lambda_a grad lambda_b - lambda_b grad lambda_a)` for the
/// edge `e = (a, b)`: the lowest-order Nédélec function with
/// `int_{e'} psi_e . tau_{e'} = delta_{e e'} |e|`, supported on the patch.
#[derive(Debug, Clone, Copy)]
pub struct EdgeFunction {
    pub edge: usize,
    a: usize,
    b: usize,
    length: f64,
}

/// The cut-off function of edge `e`.
pub fn edge_function(mesh: &Mesh, e: usize) -> EdgeFunction {
    let [a, b] = mesh.edges()[e];
    EdgeFunction { edge: e, a, b, length: mesh.edge_length(e) }
}

/// Gradients of the barycentric coordinates of cell `t`.
pub fn barycentric_gradients(mesh: &Mesh, t: usize) -> [Vector3<f64>; 4] {
    let map = mesh.map(t);
    let g = |v: [f64; 3]| map.covariant(&Vector3::from(v));
    [g([-1.0, -1.0, -1.0]), g([1.0, 0.0, 0.0]), g([0.0, 1.0, 0.0]), g([0.0, 0.0, 1.0])]
}

fn barycentric(mesh: &Mesh, t: usize, x: &Point) -> [f64; 4] {
    let r = mesh.map(t).apply_inverse(x);
    [1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]]
}

impl EdgeFunction {
    /// Local vertex indices of the edge in cell `t`, if it contains it.
    fn local(&self, mesh: &Mesh, t: usize) -> Option<(usize, usize)> {
        let verts = mesh.tets()[t];
        let i = verts.iter().position(|&v| v == self.a)?;
        let j = verts.iter().position(|&v| v == self.b)?;
        Some((i, j))
    }

    /// `curl psi_e` on cell `t` (constant).
    pub fn curl(&self, mesh: &Mesh, t: usize) -> Vector3<f64> {
        match self.local(mesh, t) {
            Some((i, j)) => {
                let g = barycentric_gradients(mesh, t);
                g[i].cross(&g[j]) * (2.0 * self.length)
            }
            None => Vector3::zeros(),
        }
    }

    /// `|psi_e|_{infty, K}`; the field is affine, so the maximum is attained
    /// at a vertex, and it vanishes at the vertices off the edge.
    pub fn sup_norm(&self, mesh: &Mesh, t: usize) -> f64 {
        match self.local(mesh, t) {
            Some((i, j)) => {
                let g = barycentric_gradients(mesh, t);
                self.length * g[i].norm().max(g[j].norm())
            }
            None => 0.0,
        }
    }
}

impl PiecewiseField for EdgeFunction {
    fn eval(&self, mesh: &Mesh, t: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        let Some((i, j)) = self.local(mesh, t) else {
            return vec![Vector3::zeros(); points.len()];
        };
        let g = barycentric_gradients(mesh, t);
        points
            .iter()
            .map(|x| {
                let l = barycentric(mesh, t, x);
                (g[j] * l[i] - g[i] * l[j]) * self.length
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffConstants {
    /// Poincaré constant of the patch.
    pub c_p: f64,
    /// `|psi_e|_inf + C_P h |curl psi_e|_inf`.
    pub c_cont: f64,
    /// The shape-regularity bound `2|e|/rho (1 + C_P kappa)` on `c_cont`.
    pub c_kappa: f64,
    pub psi_sup: f64,
    pub curl_psi_sup: f64,
}

/// Poincaré constant of a patch: `1/pi` for convex interior patches, `1` for
/// Dirichlet boundary patches and `fallback` otherwise.
pub fn poincare_constant(mesh: &Mesh, patch: &EdgePatch, fallback: f64) -> f64 {
    match patch.kind {
        PatchKind::Interior if patch.is_convex(mesh) => std::f64::consts::FRAC_1_PI,
        PatchKind::DirichletBoundary => 1.0,
        _ => fallback,
    }
}

pub fn cutoff_constants(mesh: &Mesh, patch: &EdgePatch, c_p_fallback: f64) -> CutoffConstants {
    let c_p = poincare_constant(mesh, patch, c_p_fallback);
    let psi = edge_function(mesh, patch.edge);
    let psi_sup = patch.tets.iter().map(|&t| psi.sup_norm(mesh, t)).fold(0.0, f64::max);
    let curl_psi_sup = patch.tets.iter().map(|&t| psi.curl(mesh, t).norm()).fold(0.0, f64::max);
    let m = patch.metrics;
    let c_cont = psi_sup + c_p * m.h * curl_psi_sup;
    let c_kappa = 2.0 * mesh.edge_length(patch.edge) / m.rho * (1.0 + c_p * m.kappa);
    CutoffConstants { c_p, c_cont, c_kappa, psi_sup, curl_psi_sup }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::unit_cube;
    use crate::mesh::BoundaryTag;
    use crate::shape::field::cell_quadrature;
    use crate::shape::trace::edge_quadrature;
    use nalgebra::Matrix3;

    #[test]
    fn partition_of_unity() {
        let mesh = unit_cube(2, BoundaryTag::Dirichlet);
        let psis: Vec<EdgeFunction> = (0..mesh.num_edges()).map(|e| edge_function(&mesh, e)).collect();
        for t in 0..mesh.num_tets() {
            let (x, _) = cell_quadrature(&mesh, t, 4).unwrap();
            let mut sum = vec![Matrix3::zeros(); x.len()];
            for &e in mesh.tet_edges(t) {
                let tau = mesh.edge_tangent(e);
                for (q, v) in psis[e].eval(&mesh, t, &x).iter().enumerate() {
                    sum[q] += tau * v.transpose();
                }
            }
            for s in sum {
                assert!((s - Matrix3::identity()).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_moments() {
        let mesh = unit_cube(1, BoundaryTag::Neumann);
        for e in 0..mesh.num_edges() {
            let psi = edge_function(&mesh, e);
            for &t in mesh.edge_tets(e) {
                for &e2 in mesh.tet_edges(t) {
                    let (x, w) = edge_quadrature(&mesh, e2, 2).unwrap();
                    let tau = mesh.edge_tangent(e2);
                    let m: f64 = psi.eval(&mesh, t, &x).iter().zip(&w).map(|(v, w)| w * v.dot(&tau)).sum();
                    let expect = if e2 == e { mesh.edge_length(e) } else { 0.0 };
                    assert!((m - expect).abs() < 1e-12, "{e} {e2} {m}");
                }
            }
        }
    }

    #[test]
    fn continuity_bound_holds() {
        let mesh = unit_cube(2, BoundaryTag::Dirichlet);
        for e in 0..mesh.num_edges() {
            let patch = mesh.edge_patch(e).unwrap();
            let c = cutoff_constants(&mesh, &patch, 1.0);
            assert!(c.c_cont <= c.c_kappa, "{e}: {c:?}");
            match patch.kind {
                PatchKind::DirichletBoundary => assert_eq!(c.c_p, 1.0),
                PatchKind::Interior if patch.is_convex(&mesh) => {
                    assert!((c.c_p - 0.318309886).abs() < 1e-8)
                }
                _ => {}
            }
        }
    }
}

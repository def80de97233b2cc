//! Traces on faces and edges: tangential components, surface curls and
//! quadrature on lower-dimensional entities.

use nalgebra::Vector3;

use super::field::PiecewiseField;
use super::quadrature;
use crate::mesh::Mesh;
use crate::piola::Point;
use crate::Result;

/// `w - (w . n) n` for a unit normal `n`.
pub fn tangential_component(w: &Vector3<f64>, n: &Vector3<f64>) -> Vector3<f64> {
    w - n * w.dot(n)
}

/// Physical quadrature on mesh face `f`.
pub fn face_quadrature(mesh: &Mesh, f: usize, degree: usize) -> Result<(Vec<Point>, Vec<f64>)> {
    let rule = quadrature::triangle(degree)?;
    let [a, b, c] = mesh.faces()[f].map(|v| mesh.vertices()[v]);
    let area2 = (b - a).cross(&(c - a)).norm();
    let points = rule.points.iter().map(|st| a + (b - a) * st[0] + (c - a) * st[1]).collect();
    let weights = rule.weights.iter().map(|w| w * area2).collect();
    Ok((points, weights))
}

/// Physical quadrature on mesh edge `e`.
pub fn edge_quadrature(mesh: &Mesh, e: usize, degree: usize) -> Result<(Vec<Point>, Vec<f64>)> {
    let rule = quadrature::line(degree)?;
    let [a, b] = mesh.edges()[e].map(|v| mesh.vertices()[v]);
    let len = (b - a).norm();
    let points = rule.points.iter().map(|s| a + (b - a) * s[0]).collect();
    let weights = rule.weights.iter().map(|w| w * len).collect();
    Ok((points, weights))
}

/// Local index of mesh face `f` in cell `t`.
pub fn local_face(mesh: &Mesh, t: usize, f: usize) -> Option<usize> {
    mesh.tet_faces(t).iter().position(|&g| g == f)
}

/// Surface curl `curl_F(v) = (curl v)|_F . n` of the tangential trace of a
/// field, given the field's curl as a piecewise field on cell `t`.
pub fn surface_curl(
    mesh: &Mesh,
    curl: &dyn PiecewiseField,
    t: usize,
    normal: &Vector3<f64>,
    points: &[Point],
) -> Vec<f64> {
    curl.eval(mesh, t, points).iter().map(|c| c.dot(normal)).collect()
}

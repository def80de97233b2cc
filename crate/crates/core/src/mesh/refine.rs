//! Red refinement (Bey's ordering), which reproduces the Kuhn subdivision of
//! a cube grid when applied to Kuhn tetrahedra.

use super::{BoundaryTag, Mesh};
use crate::piola::Point;

pub(super) fn uniform_refine(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    for [a, b] in mesh.edges() {
        vertices.push((mesh.vertices()[*a] + mesh.vertices()[*b]) * 0.5);
    }
    let mid = |a: usize, b: usize| nv + mesh.edge_id(a, b).expect("edge of a mesh cell");
    let mut tets = Vec::with_capacity(8 * mesh.num_tets());
    for &[x0, x1, x2, x3] in mesh.input_tets() {
        let (x01, x02, x03) = (mid(x0, x1), mid(x0, x2), mid(x0, x3));
        let (x12, x13, x23) = (mid(x1, x2), mid(x1, x3), mid(x2, x3));
        tets.extend_from_slice(&[
            [x0, x01, x02, x03],
            [x01, x1, x12, x13],
            [x02, x12, x2, x23],
            [x03, x13, x23, x3],
            [x01, x02, x03, x13],
            [x01, x02, x12, x13],
            [x02, x03, x13, x23],
            [x02, x12, x13, x23],
        ]);
    }
    let mut tags: Vec<([usize; 3], BoundaryTag)> = Vec::new();
    for ([a, b, c], tag) in mesh.boundary_tags() {
        let (ab, ac, bc) = (mid(a, b), mid(a, c), mid(b, c));
        for tri in [[a, ab, ac], [b, ab, bc], [c, ac, bc], [ab, ac, bc]] {
            tags.push((tri, tag));
        }
    }
    Mesh::new(vertices, tets, &tags).expect("red refinement of a valid mesh is valid")
}

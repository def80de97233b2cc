//! Oriented tetrahedral meshes.
//!
//! Tetrahedra are stored with ascending global vertex indices. With this
//! convention every local edge `(i, j)`, `i < j`, is traversed in the global
//! direction of its edge and every local face lists its vertices in the
//! global order, so no orientation flips are needed when gathering local
//! degrees of freedom. The vertex order given on input is kept separately
//! because red refinement depends on it.

mod io;
mod marking;
mod patch;
mod refine;

use std::collections::HashMap;

use nalgebra::Vector3;

pub use io::{read_mesh, read_mesh_file, write_mesh};
pub use marking::dorfler_mark;
pub use patch::{EdgePatch, PatchKind, PatchMetrics};

use crate::error::MeshError;
use crate::piola::{AffineMap, Point};
use crate::shape::element::{LOCAL_EDGES, LOCAL_FACES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    tets: Vec<[usize; 4]>,
    input_tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    tet_edges: Vec<[usize; 6]>,
    tet_faces: Vec<[usize; 4]>,
    /// `+1` when the face normal points out of the tetrahedron.
    tet_face_signs: Vec<[f64; 4]>,
    face_tets: Vec<Vec<usize>>,
    edge_tets: Vec<Vec<usize>>,
    face_tags: Vec<Option<BoundaryTag>>,
    maps: Vec<AffineMap>,
    edge_index: HashMap<[usize; 2], usize>,
    face_index: HashMap<[usize; 3], usize>,
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

impl Mesh {
    /// Build and validate a mesh. `boundary` must tag every boundary face
    /// exactly once; vertex order inside each tag triple is irrelevant.
    pub fn new(
        vertices: Vec<Point>,
        tets: Vec<[usize; 4]>,
        boundary: &[([usize; 3], BoundaryTag)],
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        let mut sorted_tets = Vec::with_capacity(tets.len());
        let mut maps = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            for &v in tet {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { tet: t, vertex: v, count: nv });
                }
            }
            let mut s = *tet;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::RepeatedVertex(t));
            }
            let x = s.map(|v| vertices[v]);
            let h = LOCAL_EDGES
                .iter()
                .map(|[a, b]| (x[*b] - x[*a]).norm())
                .fold(0.0, f64::max);
            let jac = nalgebra::Matrix3::from_columns(&[x[1] - x[0], x[2] - x[0], x[3] - x[0]]);
            let det = jac.determinant();
            let threshold = 1e-12 * h.powi(3);
            if !(det.abs() >= threshold) || h == 0.0 {
                return Err(MeshError::Degenerate { tet: t, det, threshold });
            }
            maps.push(AffineMap::from_reference(&x).map_err(|_| MeshError::Degenerate {
                tet: t,
                det,
                threshold,
            })?);
            sorted_tets.push(s);
        }

        let mut edges = Vec::new();
        let mut faces = Vec::new();
        let mut edge_index = HashMap::new();
        let mut face_index = HashMap::new();
        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut face_tets: Vec<Vec<usize>> = Vec::new();
        let mut edge_tets: Vec<Vec<usize>> = Vec::new();
        for (t, s) in sorted_tets.iter().enumerate() {
            let mut te = [0; 6];
            for (i, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let key = [s[*a], s[*b]];
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tets.push(Vec::new());
                    edges.len() - 1
                });
                edge_tets[id].push(t);
                te[i] = id;
            }
            let mut tf = [0; 4];
            for (i, [a, b, c]) in LOCAL_FACES.iter().enumerate() {
                let key = [s[*a], s[*b], s[*c]];
                let id = *face_index.entry(key).or_insert_with(|| {
                    faces.push(key);
                    face_tets.push(Vec::new());
                    faces.len() - 1
                });
                face_tets[id].push(t);
                if face_tets[id].len() > 2 {
                    return Err(MeshError::NonMatching(format!(
                        "face {key:?} is shared by more than two tetrahedra"
                    )));
                }
                tf[i] = id;
            }
            tet_edges.push(te);
            tet_faces.push(tf);
        }

        let mut face_tags = vec![None; faces.len()];
        for (tri, tag) in boundary {
            let key = sorted3(*tri);
            let id = match face_index.get(&key) {
                Some(&id) if face_tets[id].len() == 1 => id,
                _ => return Err(MeshError::TagOnNonBoundaryFace(key)),
            };
            if face_tags[id].is_some() {
                return Err(MeshError::DuplicateTag(key));
            }
            face_tags[id] = Some(*tag);
        }
        for (id, f) in faces.iter().enumerate() {
            if face_tets[id].len() == 1 && face_tags[id].is_none() {
                return Err(MeshError::UntaggedBoundaryFace(*f));
            }
        }

        let mut mesh = Self {
            vertices,
            tets: sorted_tets,
            input_tets: tets,
            edges,
            faces,
            tet_edges,
            tet_faces,
            tet_face_signs: Vec::new(),
            face_tets,
            edge_tets,
            face_tags,
            maps,
            edge_index,
            face_index,
        };
        mesh.tet_face_signs = (0..mesh.tets.len())
            .map(|t| {
                let mut s = [0.0; 4];
                for i in 0..4 {
                    let f = mesh.tet_faces[t][i];
                    let n = mesh.face_normal(f);
                    let a = mesh.vertices[mesh.faces[f][0]];
                    let d = mesh.vertices[mesh.tets[t][i]];
                    s[i] = if (d - a).dot(&n) < 0.0 { 1.0 } else { -1.0 };
                }
                s
            })
            .collect();
        mesh.check_matching()?;
        Ok(mesh)
    }

    /// Rejects hanging vertices on the boundary and overlapping cells, the
    /// two ways a face-conforming tet soup can still fail to be matching.
    fn check_matching(&self) -> Result<(), MeshError> {
        let boundary: Vec<usize> = (0..self.faces.len())
            .filter(|&f| self.face_tets[f].len() == 1)
            .collect();
        let scale = self.diameter();
        let tol = 1e-10 * scale;
        for &f in &boundary {
            let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
            let lo = a.inf(&b).inf(&c).add_scalar(-tol);
            let hi = a.sup(&b).sup(&c).add_scalar(tol);
            let n = (b - a).cross(&(c - a));
            let area2 = n.norm();
            let n = n / area2;
            for (v, x) in self.vertices.iter().enumerate() {
                if self.faces[f].contains(&v) {
                    continue;
                }
                if (0..3).any(|i| x[i] < lo[i] || x[i] > hi[i]) {
                    continue;
                }
                if (x - a).dot(&n).abs() > tol {
                    continue;
                }
                // barycentric coordinates within the face plane
                let l1 = (c - x).cross(&(a - x)).dot(&n) / area2;
                let l2 = (a - x).cross(&(b - x)).dot(&n) / area2;
                let l0 = 1.0 - l1 - l2;
                if l0 >= -1e-10 && l1 >= -1e-10 && l2 >= -1e-10 {
                    return Err(MeshError::NonMatching(format!(
                        "vertex {v} lies on boundary face {:?}",
                        self.faces[f]
                    )));
                }
            }
        }
        // Enclosed volume from the boundary surface must equal the sum of
        // cell volumes; overlapping cells make the latter too large.
        let mut enclosed = 0.0;
        for &f in &boundary {
            let t = self.face_tets[f][0];
            let i = self.tet_faces[t].iter().position(|&g| g == f).unwrap();
            let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
            let n = (b - a).cross(&(c - a)) * self.tet_face_signs[t][i];
            enclosed += a.dot(&n) / 6.0;
        }
        let total: f64 = (0..self.tets.len()).map(|t| self.volume(t)).sum();
        if (enclosed - total).abs() > 1e-9 * total {
            return Err(MeshError::NonMatching(format!(
                "cell volumes sum to {total}, boundary encloses {enclosed}"
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Tetrahedra with ascending vertex indices.
    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    /// Tetrahedra in the vertex order they were given.
    pub fn input_tets(&self) -> &[[usize; 4]] {
        &self.input_tets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn tet_edges(&self, t: usize) -> &[usize; 6] {
        &self.tet_edges[t]
    }

    pub fn tet_faces(&self, t: usize) -> &[usize; 4] {
        &self.tet_faces[t]
    }

    /// Orientation of local face `i` of `t` relative to the face normal:
    /// `+1` when `n_F` points out of `t`.
    pub fn face_sign(&self, t: usize, i: usize) -> f64 {
        self.tet_face_signs[t][i]
    }

    /// Local edges are always traversed in their global direction.
    pub fn edge_sign(&self, _t: usize, _i: usize) -> f64 {
        1.0
    }

    pub fn face_tets(&self, f: usize) -> &[usize] {
        &self.face_tets[f]
    }

    pub fn edge_tets(&self, e: usize) -> &[usize] {
        &self.edge_tets[e]
    }

    pub fn face_tag(&self, f: usize) -> Option<BoundaryTag> {
        self.face_tags[f]
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_tets[f].len() == 1
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.is_boundary_face(f))
    }

    /// Boundary tags as given to [`Mesh::new`], with sorted vertex triples.
    pub fn boundary_tags(&self) -> Vec<([usize; 3], BoundaryTag)> {
        self.boundary_faces()
            .map(|f| (self.faces[f], self.face_tags[f].unwrap()))
            .collect()
    }

    pub fn map(&self, t: usize) -> &AffineMap {
        &self.maps[t]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn face_id(&self, tri: [usize; 3]) -> Option<usize> {
        self.face_index.get(&sorted3(tri)).copied()
    }

    pub fn tet_vertices(&self, t: usize) -> [Point; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn volume(&self, t: usize) -> f64 {
        self.maps[t].det.abs() / 6.0
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Unit tangent, from the lower to the higher vertex index.
    pub fn edge_tangent(&self, e: usize) -> Vector3<f64> {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).normalize()
    }

    /// Unit normal by the right-hand rule on ascending vertex indices.
    pub fn face_normal(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Outward unit normal of local face `i` of `t`.
    pub fn outward_normal(&self, t: usize, i: usize) -> Vector3<f64> {
        self.face_normal(self.tet_faces[t][i]) * self.tet_face_signs[t][i]
    }

    /// Diameter `h_K` (longest edge).
    pub fn tet_diameter(&self, t: usize) -> f64 {
        self.tet_edges[t]
            .iter()
            .map(|&e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Inscribed-ball diameter `rho_K = 6|K| / (sum of face areas)`.
    pub fn tet_inball_diameter(&self, t: usize) -> f64 {
        let area: f64 = self.tet_faces[t].iter().map(|&f| self.face_area(f)).sum();
        6.0 * self.volume(t) / area
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.tets.len())
            .map(|t| self.tet_diameter(t))
            .fold(0.0, f64::max)
    }

    /// Diameter of the vertex cloud's bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for x in &self.vertices {
            lo = lo.inf(x);
            hi = hi.sup(x);
        }
        (hi - lo).norm()
    }

    /// Boundary edges lie on a boundary face; all others are interior, even
    /// if an endpoint touches the boundary.
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        let [a, b] = self.edges[e];
        self.edge_tets[e].iter().any(|&t| {
            self.tet_faces[t].iter().any(|&f| {
                self.is_boundary_face(f) && self.faces[f].contains(&a) && self.faces[f].contains(&b)
            })
        })
    }

    /// Edge patch around `e`.
    pub fn edge_patch(&self, e: usize) -> Result<EdgePatch, MeshError> {
        EdgePatch::new(self, e)
    }

    /// Red refinement of every cell into eight children.
    pub fn uniform_refine(&self) -> Mesh {
        refine::uniform_refine(self)
    }

    /// Apply a map to every vertex; used for invariance tests.
    pub fn transformed(&self, f: impl Fn(&Point) -> Point) -> Result<Mesh, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        Mesh::new(vertices, self.input_tets.clone(), &self.boundary_tags())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn reference_tet(tag: BoundaryTag) -> Mesh {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        let tags = LOCAL_FACES.iter().map(|f| (*f, tag)).collect::<Vec<_>>();
        Mesh::new(v, vec![[0, 1, 2, 3]], &tags).unwrap()
    }

    #[test]
    fn single_tet_counts() {
        let m = reference_tet(BoundaryTag::Dirichlet);
        assert_eq!((m.num_tets(), m.num_edges(), m.num_faces()), (1, 6, 4));
        for i in 0..4 {
            let n = m.outward_normal(0, i);
            let centroid = Point::new(0.25, 0.25, 0.25);
            let a = m.vertices()[m.faces()[m.tet_faces(0)[i]][0]];
            assert!((a - centroid).dot(&n) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
            Point::new(1.0, 1.0, 0.0),
        ];
        let all = |t: [usize; 4]| {
            LOCAL_FACES
                .iter()
                .map(|f| ([t[f[0]], t[f[1]], t[f[2]]], BoundaryTag::Neumann))
                .collect::<Vec<_>>()
        };
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 2, 7]], &[]),
            Err(MeshError::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 1, 3]], &[]),
            Err(MeshError::RepeatedVertex(0))
        ));
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 2, 4]], &all([0, 1, 2, 4])),
            Err(MeshError::Degenerate { .. })
        ));
        let mut tags = all([0, 1, 2, 3]);
        tags.pop();
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 2, 3]], &tags),
            Err(MeshError::UntaggedBoundaryFace(_))
        ));
        let mut tags = all([0, 1, 2, 3]);
        tags.push(tags[0]);
        assert!(matches!(
            Mesh::new(v, vec![[0, 1, 2, 3]], &tags),
            Err(MeshError::DuplicateTag(_))
        ));
    }

    #[test]
    fn rejects_hanging_vertex() {
        // Two tets glued along half of a face: vertex 5 hangs on the big face.
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(0.0, 2.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
            Point::new(0.0, 0.0, -1.0),
            Point::new(1.0, 0.0, 0.0),
        ];
        let tets = vec![[0, 1, 2, 3], [0, 5, 2, 4]];
        let mut tags = Vec::new();
        for t in &tets {
            for f in LOCAL_FACES {
                tags.push(([t[f[0]], t[f[1]], t[f[2]]], BoundaryTag::Dirichlet));
            }
        }
        assert!(matches!(Mesh::new(v, tets, &tags), Err(MeshError::NonMatching(_))));
    }
}

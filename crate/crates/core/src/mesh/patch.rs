//! Edge patches: the tetrahedra sharing one edge, enumerated around it.
//!
//! Writing `a_d, a_u` for the vertices of the edge and `a_0, ..., a_n` for the
//! remaining vertices in rotational order, tetrahedron `K_j` is
//! `conv(a_{j-1}, a_j, a_d, a_u)` and `F_j = conv(a_j, a_d, a_u)` is the face
//! between `K_j` and `K_{j+1}`. For interior patches `F_0 = F_n`.

use std::collections::HashMap;

use nalgebra::Vector3;

use super::{BoundaryTag, Mesh};
use crate::error::MeshError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    Interior,
    DirichletBoundary,
    MixedBoundary,
    NeumannBoundary,
}

impl PatchKind {
    pub fn name(&self) -> &'static str {
        match self {
            PatchKind::Interior => "interior",
            PatchKind::DirichletBoundary => "dirichlet",
            PatchKind::MixedBoundary => "mixed",
            PatchKind::NeumannBoundary => "neumann",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchMetrics {
    /// Diameter of the patch domain.
    pub h: f64,
    /// Smallest inscribed-ball diameter over the patch cells.
    pub rho: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub struct EdgePatch {
    pub edge: usize,
    pub kind: PatchKind,
    /// `K_1, ..., K_n`.
    pub tets: Vec<usize>,
    /// `F_0, ..., F_n`; for interior patches the first and last coincide.
    pub faces: Vec<usize>,
    /// `a_0, ..., a_n`.
    pub ring: Vec<usize>,
    pub internal_faces: Vec<usize>,
    /// Faces containing the edge that lie on the Neumann boundary.
    pub gamma_n: Vec<usize>,
    /// The rest of the patch boundary.
    pub gamma_d: Vec<usize>,
    /// Faces carrying constraints in the minimization problems.
    pub face_set: Vec<usize>,
    pub metrics: PatchMetrics,
    normals: HashMap<usize, Vector3<f64>>,
}

impl EdgePatch {
    pub fn new(mesh: &Mesh, e: usize) -> Result<Self, MeshError> {
        if e >= mesh.num_edges() {
            return Err(MeshError::EdgeOutOfRange(e));
        }
        let invalid = |reason: String| MeshError::InvalidPatch { edge: e, reason };
        let [ad, au] = mesh.edges()[e];
        let cells = mesh.edge_tets(e).to_vec();
        // faces of each cell that contain the edge
        let edge_faces = |t: usize| -> [usize; 2] {
            let mut out = [usize::MAX; 2];
            let mut k = 0;
            for &f in mesh.tet_faces(t) {
                let tri = mesh.faces()[f];
                if tri.contains(&ad) && tri.contains(&au) {
                    out[k] = f;
                    k += 1;
                }
            }
            out
        };
        let mut face_cells: HashMap<usize, Vec<usize>> = HashMap::new();
        for &t in &cells {
            for f in edge_faces(t) {
                face_cells.entry(f).or_default().push(t);
            }
        }
        let mut external: Vec<usize> = face_cells
            .iter()
            .filter(|(_, ts)| ts.len() == 1)
            .map(|(f, _)| *f)
            .collect();
        external.sort_unstable();
        let interior = match external.len() {
            0 => true,
            2 => false,
            k => return Err(invalid(format!("{k} patch faces on the boundary, expected 0 or 2"))),
        };
        for f in &external {
            if !mesh.is_boundary_face(*f) {
                return Err(invalid(format!("face {f} bounds the patch but not the domain")));
            }
        }

        let (start, first_face) = if interior {
            let start = *cells.iter().min().unwrap();
            let [f1, f2] = edge_faces(start);
            let other = |f: usize| face_cells[&f].iter().copied().find(|&t| t != start).unwrap();
            // leave through the face towards the smaller-index neighbour
            let first = if other(f1) <= other(f2) { f2 } else { f1 };
            (start, first)
        } else {
            let owner = |f: usize| face_cells[&f][0];
            let tag = |f: usize| mesh.face_tag(f).unwrap();
            let (fa, fb) = (external[0], external[1]);
            let pick = match (tag(fa), tag(fb)) {
                (BoundaryTag::Neumann, BoundaryTag::Dirichlet) => fa,
                (BoundaryTag::Dirichlet, BoundaryTag::Neumann) => fb,
                _ => {
                    if owner(fa) <= owner(fb) {
                        fa
                    } else {
                        fb
                    }
                }
            };
            (owner(pick), pick)
        };

        let mut tets = vec![start];
        let mut faces = vec![first_face];
        let mut current = start;
        let mut entry = first_face;
        loop {
            let [f1, f2] = edge_faces(current);
            let exit = if f1 == entry { f2 } else { f1 };
            faces.push(exit);
            let next = face_cells[&exit].iter().copied().find(|&t| t != current);
            match next {
                Some(t) if t == start => break,
                Some(t) => {
                    if tets.contains(&t) {
                        return Err(invalid("cells around the edge do not form a loop".into()));
                    }
                    tets.push(t);
                    current = t;
                    entry = exit;
                }
                None => break,
            }
        }
        if tets.len() != cells.len() {
            return Err(invalid(format!(
                "walk around the edge reached {} of {} cells",
                tets.len(),
                cells.len()
            )));
        }
        let n = tets.len();
        let kind = if interior {
            PatchKind::Interior
        } else {
            match (mesh.face_tag(faces[0]).unwrap(), mesh.face_tag(faces[n]).unwrap()) {
                (BoundaryTag::Dirichlet, BoundaryTag::Dirichlet) => PatchKind::DirichletBoundary,
                (BoundaryTag::Neumann, BoundaryTag::Neumann) => PatchKind::NeumannBoundary,
                _ => PatchKind::MixedBoundary,
            }
        };
        let ring: Vec<usize> = faces
            .iter()
            .map(|&f| *mesh.faces()[f].iter().find(|&&v| v != ad && v != au).unwrap())
            .collect();
        let internal_faces: Vec<usize> = if interior {
            faces[1..=n].to_vec()
        } else {
            faces[1..n].to_vec()
        };
        let gamma_n: Vec<usize> = if interior {
            Vec::new()
        } else {
            [faces[0], faces[n]]
                .into_iter()
                .filter(|&f| mesh.face_tag(f) == Some(BoundaryTag::Neumann))
                .collect()
        };
        let face_set = match kind {
            PatchKind::Interior => faces[1..=n].to_vec(),
            PatchKind::DirichletBoundary => faces[1..n].to_vec(),
            PatchKind::MixedBoundary => faces[0..n].to_vec(),
            PatchKind::NeumannBoundary => faces.clone(),
        };

        // normals: internal F_j points out of K_{j+1}, external out of the patch
        let mut normals = HashMap::new();
        let mut gamma_d = Vec::new();
        for (pos, &t) in tets.iter().enumerate() {
            for (i, &f) in mesh.tet_faces(t).iter().enumerate() {
                let outward = mesh.outward_normal(t, i);
                if internal_faces.contains(&f) {
                    // F_j is entered by K_{j+1}: the face preceding it in the walk
                    let j = faces.iter().position(|&g| g == f).unwrap();
                    let entered_by = if j == 0 || (interior && j == n) { 0 } else { j };
                    if pos == entered_by {
                        normals.insert(f, outward);
                    }
                } else {
                    normals.insert(f, outward);
                    if !gamma_n.contains(&f) {
                        gamma_d.push(f);
                    }
                }
            }
        }

        let mut verts: Vec<usize> = tets.iter().flat_map(|&t| mesh.tets()[t]).collect();
        verts.sort_unstable();
        verts.dedup();
        let mut h = 0.0f64;
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                h = h.max((mesh.vertices()[a] - mesh.vertices()[b]).norm());
            }
        }
        let rho = tets
            .iter()
            .map(|&t| mesh.tet_inball_diameter(t))
            .fold(f64::INFINITY, f64::min);
        let metrics = PatchMetrics { h, rho, kappa: h / rho };

        Ok(Self {
            edge: e,
            kind,
            tets,
            faces,
            ring,
            internal_faces,
            gamma_n,
            gamma_d,
            face_set,
            metrics,
            normals,
        })
    }

    pub fn len(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    /// Position of a mesh cell inside the patch enumeration.
    pub fn position(&self, t: usize) -> Option<usize> {
        self.tets.iter().position(|&s| s == t)
    }

    /// Patch normal of a patch face: internal `F_j` uses the outward normal of
    /// `K_{j+1}`, external faces the outward normal of the patch.
    pub fn normal(&self, f: usize) -> Option<Vector3<f64>> {
        self.normals.get(&f).copied()
    }

    /// All faces of all patch cells, each once.
    pub fn all_faces(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.normals.keys().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn is_internal(&self, f: usize) -> bool {
        self.internal_faces.contains(&f)
    }

    /// Mesh vertices of the patch.
    pub fn vertices(&self, mesh: &Mesh) -> Vec<usize> {
        let mut v: Vec<usize> = self.tets.iter().flat_map(|&t| mesh.tets()[t]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// True when no patch vertex lies outside the plane of any boundary face
    /// of the patch, i.e. the patch domain is convex.
    pub fn is_convex(&self, mesh: &Mesh) -> bool {
        let verts = self.vertices(mesh);
        let tol = 1e-10 * self.metrics.h;
        self.all_faces()
            .into_iter()
            .filter(|&f| !self.is_internal(f))
            .all(|f| {
                let n = self.normals[&f];
                let a = mesh.vertices()[mesh.faces()[f][0]];
                verts.iter().all(|&v| (mesh.vertices()[v] - a).dot(&n) <= tol)
            })
    }

    /// Total volume of the patch cells.
    pub fn volume(&self, mesh: &Mesh) -> f64 {
        self.tets.iter().map(|&t| mesh.volume(t)).sum()
    }
}

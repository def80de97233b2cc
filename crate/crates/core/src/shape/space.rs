//! Finite element spaces over a set of mesh cells.
//!
//! A [`DofSpace`] numbers the local degrees of freedom of its cells. Dofs on
//! shared vertices, edges and faces are identified unless the space is broken;
//! dofs on constrained faces (and on the edges and vertices bounding them, as
//! far as the family has any) are eliminated, which imposes a zero tangential
//! trace (Nédélec), zero normal trace (Raviart–Thomas) or zero trace
//! (Lagrange).

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::element::{reference, EntityKind, Family, ReferenceElement};
use crate::error::Result;
use crate::mesh::Mesh;

/// Faces on which the trace vanishes, plus an optional vertex whose dof is
/// removed to fix an additive constant.
#[derive(Debug, Clone, Default)]
pub struct Constraints {
    pub faces: Vec<usize>,
    pub anchor_vertex: Option<usize>,
}

impl Constraints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn faces(faces: impl IntoIterator<Item = usize>) -> Self {
        Self { faces: faces.into_iter().collect(), anchor_vertex: None }
    }
}

type DofKey = (EntityKind, usize, usize);

#[derive(Debug, Clone)]
pub struct DofSpace {
    pub family: Family,
    pub degree: usize,
    pub broken: bool,
    element: Arc<ReferenceElement>,
    support: Vec<usize>,
    position: HashMap<usize, usize>,
    cell_dofs: Vec<Vec<Option<usize>>>,
    ndofs: usize,
}

impl DofSpace {
    pub fn new(
        mesh: &Mesh,
        family: Family,
        degree: usize,
        support: &[usize],
        broken: bool,
        constraints: &Constraints,
    ) -> Result<Self> {
        let element = reference(family, degree)?;
        let mut blocked: HashSet<(EntityKind, usize)> = HashSet::new();
        for &f in &constraints.faces {
            blocked.insert((EntityKind::Face, f));
            let [a, b, c] = mesh.faces()[f];
            for (u, v) in [(a, b), (a, c), (b, c)] {
                if let Some(e) = mesh.edge_id(u, v) {
                    blocked.insert((EntityKind::Edge, e));
                }
            }
            for v in [a, b, c] {
                blocked.insert((EntityKind::Vertex, v));
            }
        }
        if let Some(v) = constraints.anchor_vertex {
            blocked.insert((EntityKind::Vertex, v));
        }

        let mut numbering: HashMap<(usize, DofKey), usize> = HashMap::new();
        let mut cell_dofs = Vec::with_capacity(support.len());
        let mut position = HashMap::with_capacity(support.len());
        for (pos, &t) in support.iter().enumerate() {
            position.insert(t, pos);
            let mut dofs = Vec::with_capacity(element.dim());
            for label in &element.labels {
                let entity = match label.kind {
                    EntityKind::Vertex => mesh.tets()[t][label.entity],
                    EntityKind::Edge => mesh.tet_edges(t)[label.entity],
                    EntityKind::Face => mesh.tet_faces(t)[label.entity],
                    EntityKind::Cell => t,
                };
                if blocked.contains(&(label.kind, entity)) {
                    dofs.push(None);
                    continue;
                }
                let owner = if broken || label.kind == EntityKind::Cell { t } else { usize::MAX };
                let key = (owner, (label.kind, entity, label.index));
                let next = numbering.len();
                dofs.push(Some(*numbering.entry(key).or_insert(next)));
            }
            cell_dofs.push(dofs);
        }
        Ok(Self {
            family,
            degree,
            broken,
            element,
            support: support.to_vec(),
            position,
            cell_dofs,
            ndofs: numbering.len(),
        })
    }

    /// Space over every cell of the mesh.
    pub fn global(mesh: &Mesh, family: Family, degree: usize, constraints: &Constraints) -> Result<Self> {
        let all: Vec<usize> = (0..mesh.num_tets()).collect();
        Self::new(mesh, family, degree, &all, false, constraints)
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn element(&self) -> &Arc<ReferenceElement> {
        &self.element
    }

    pub fn local_dim(&self) -> usize {
        self.element.dim()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Index of a mesh cell in the support.
    pub fn position(&self, t: usize) -> Option<usize> {
        self.position.get(&t).copied()
    }

    /// Global dof of each local dof of the `pos`-th support cell.
    pub fn cell_dofs(&self, pos: usize) -> &[Option<usize>] {
        &self.cell_dofs[pos]
    }

    /// Gather local coefficients of the `pos`-th support cell.
    pub fn gather(&self, coeffs: &[f64], pos: usize) -> Vec<f64> {
        self.cell_dofs[pos]
            .iter()
            .map(|d| d.map_or(0.0, |i| coeffs[i]))
            .collect()
    }
}

//! Physical basis tabulations on one cell and the local matrices built from
//! them.

use faer::Mat;
use nalgebra::Vector3;

use super::element::{tabulation, Family};
use super::field::{cell_quadrature, physical_tabulation, PiecewiseField};
use crate::mesh::Mesh;
use crate::piola::Point;
use crate::Result;

/// Basis values and derived quantities (curl, divergence in the first
/// component, or gradient) of one family on one cell at the points of a
/// tetrahedral rule.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub family: Family,
    pub ndofs: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    values: Vec<Vector3<f64>>,
    derived: Vec<Vector3<f64>>,
}

impl CellBasis {
    pub fn new(mesh: &Mesh, t: usize, family: Family, degree: usize, quad_degree: usize) -> Result<Self> {
        let tab = tabulation(family, degree, quad_degree)?;
        let (points, weights) = cell_quadrature(mesh, t, quad_degree)?;
        let (values, derived) = physical_tabulation(family, mesh.map(t), &tab);
        Ok(Self { family, ndofs: tab.ndofs, points, weights, values, derived })
    }

    pub fn npoints(&self) -> usize {
        self.weights.len()
    }

    pub fn value(&self, q: usize, k: usize) -> &Vector3<f64> {
        &self.values[q * self.ndofs + k]
    }

    pub fn derived(&self, q: usize, k: usize) -> &Vector3<f64> {
        &self.derived[q * self.ndofs + k]
    }

    fn get(&self, q: usize, k: usize, derived: bool) -> &Vector3<f64> {
        if derived {
            self.derived(q, k)
        } else {
            self.value(q, k)
        }
    }

    /// Value (or derived quantity) of the local combination `coeffs` at every
    /// quadrature point.
    pub fn combine(&self, coeffs: &[f64], derived: bool) -> Vec<Vector3<f64>> {
        (0..self.npoints())
            .map(|q| {
                coeffs
                    .iter()
                    .enumerate()
                    .fold(Vector3::zeros(), |acc, (k, c)| acc + self.get(q, k, derived) * *c)
            })
            .collect()
    }
}

/// `G[i][j] = (a_i, b_j)` where each side is the value or the derived
/// quantity. Lagrange values and Raviart–Thomas divergences live in the first
/// component, so mixed scalar pairings work unchanged.
pub fn gram(a: &CellBasis, a_derived: bool, b: &CellBasis, b_derived: bool) -> Mat<f64> {
    assert_eq!(a.npoints(), b.npoints(), "bases must share the quadrature rule");
    let mut g = Mat::zeros(a.ndofs, b.ndofs);
    for q in 0..a.npoints() {
        let w = a.weights[q];
        for i in 0..a.ndofs {
            let ai = a.get(q, i, a_derived) * w;
            for j in 0..b.ndofs {
                g[(i, j)] += ai.dot(b.get(q, j, b_derived));
            }
        }
    }
    g
}

/// `l[i] = (f, a_i)` for field values `f` at the quadrature points.
pub fn load(a: &CellBasis, derived: bool, f: &[Vector3<f64>]) -> Vec<f64> {
    (0..a.ndofs)
        .map(|i| {
            (0..a.npoints())
                .map(|q| a.weights[q] * f[q].dot(a.get(q, i, derived)))
                .sum()
        })
        .collect()
}

/// `l[i] = (f, a_i)` for a field evaluated on cell `t`.
pub fn load_field(mesh: &Mesh, t: usize, a: &CellBasis, derived: bool, f: &dyn PiecewiseField) -> Vec<f64> {
    load(a, derived, &f.eval(mesh, t, &a.points))
}

//! Broken patchwise equilibration.
//!
//! For every edge `e` the source is projected onto divergence-free
//! Raviart–Thomas fields on the patch, and a Nédélec field `h` with
//! `curl h = j_h` and the patch boundary conditions is computed, either by
//! the mixed patch problem or by a sweep of element problems around `e`.
//! The estimator is `eta_e = |h - curl A_h|_{omega_e}`.

pub mod compatibility;
pub mod constants;
pub mod mixed;
pub mod projection;
pub mod report;
pub mod shifted;
pub mod sweep;

pub use compatibility::{compatibility_check, shifted_data, CompatibilityReport, FaceDatum};
pub use constants::{cutoff_constants, edge_function, CutoffConstants};
pub use mixed::{patch_equilibrate, PatchFlux};
pub use projection::{project_source, ProjectedSource};
pub use report::{aggregate, estimate, estimate_edge, EstimatorConfig, EstimatorReport, Method, PatchEstimate};
pub use shifted::solve_shifted;
pub use sweep::{sweep_equilibrate, SweepFlux, SweepStep};

use nalgebra::Vector3;

use crate::error::Result;
use crate::mesh::{EdgePatch, Mesh};
use crate::piola::Point;
use crate::shape::{CellBasis, CellwiseField, Constraints, DofSpace, Family, PiecewiseField};

/// The finite element spaces of one edge patch at one degree, with basis
/// tabulations on every patch cell.
pub struct PatchContext<'a> {
    pub mesh: &'a Mesh,
    pub patch: &'a EdgePatch,
    pub degree: usize,
    /// Quadrature degree of the polynomial forms.
    pub quad: usize,
    /// Conforming Nédélec space with zero tangential trace on `Gamma_N^e`.
    pub ned: DofSpace,
    /// Conforming Raviart–Thomas space with zero normal trace on `Gamma_N^e`.
    pub rt: DofSpace,
    /// Broken `P_p`.
    pub lag: DofSpace,
    pub ned_basis: Vec<CellBasis>,
    pub rt_basis: Vec<CellBasis>,
    pub lag_basis: Vec<CellBasis>,
}

impl<'a> PatchContext<'a> {
    pub fn new(mesh: &'a Mesh, patch: &'a EdgePatch, degree: usize) -> Result<Self> {
        let quad = 2 * degree + 2;
        let bc = Constraints::faces(patch.gamma_n.iter().copied());
        let ned = DofSpace::new(mesh, Family::Nedelec, degree, &patch.tets, false, &bc)?;
        let rt = DofSpace::new(mesh, Family::RaviartThomas, degree, &patch.tets, false, &bc)?;
        let lag = DofSpace::new(mesh, Family::Lagrange, degree, &patch.tets, true, &Constraints::none())?;
        let bases = |family| -> Result<Vec<CellBasis>> {
            patch.tets.iter().map(|&t| CellBasis::new(mesh, t, family, degree, quad)).collect()
        };
        Ok(Self {
            mesh,
            patch,
            degree,
            quad,
            ned_basis: bases(Family::Nedelec)?,
            rt_basis: bases(Family::RaviartThomas)?,
            lag_basis: bases(Family::Lagrange)?,
            ned,
            rt,
            lag,
        })
    }

    pub fn cells(&self) -> &[usize] {
        &self.patch.tets
    }

    /// Cellwise field on the patch from a coefficient vector of `space`.
    pub fn cellwise(&self, space: &DofSpace, coeffs: &[f64]) -> CellwiseField {
        let local = (0..self.patch.len()).map(|p| space.gather(coeffs, p)).collect();
        CellwiseField::new(space.element().clone(), self.patch.tets.clone(), local)
    }

    /// `sum_K |f - g|_K^2` over the patch at the context quadrature.
    pub fn distance_squared(&self, f: &dyn PiecewiseField, g: &dyn PiecewiseField) -> f64 {
        self.patch
            .tets
            .iter()
            .zip(&self.ned_basis)
            .map(|(&t, b)| {
                let fv = f.eval(self.mesh, t, &b.points);
                let gv = g.eval(self.mesh, t, &b.points);
                fv.iter()
                    .zip(&gv)
                    .zip(&b.weights)
                    .map(|((x, y), w)| w * (x - y).norm_squared())
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Scatter local cell matrices into a dense patch matrix using the global
/// dof maps of the row and column spaces.
pub(crate) fn scatter(
    target: &mut faer::Mat<f64>,
    row_offset: usize,
    col_offset: usize,
    rows: &[Option<usize>],
    cols: &[Option<usize>],
    local: &faer::Mat<f64>,
) {
    for (i, ri) in rows.iter().enumerate() {
        let Some(r) = ri else { continue };
        for (j, cj) in cols.iter().enumerate() {
            if let Some(c) = cj {
                target[(row_offset + r, col_offset + c)] += local[(i, j)];
            }
        }
    }
}

pub(crate) fn scatter_vec(target: &mut [f64], offset: usize, rows: &[Option<usize>], local: &[f64]) {
    for (i, ri) in rows.iter().enumerate() {
        if let Some(r) = ri {
            target[offset + r] += local[i];
        }
    }
}

/// A field that is zero everywhere.
pub(crate) struct Zero;

impl PiecewiseField for Zero {
    fn eval(&self, _mesh: &Mesh, _tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        vec![Vector3::zeros(); points.len()]
    }
}

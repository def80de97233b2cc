//! Reference computations for checking the estimator: enriched-degree
//! approximations of the local residual dual norms, measured stability
//! ratios, and checks of the guaranteed bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibration::{
    patch_equilibrate, project_source, sweep_equilibrate, EstimatorReport, PatchContext,
};
use crate::error::Result;
use crate::mesh::{EdgePatch, Mesh, PatchKind};
use crate::shape::field::interpolate;
use crate::shape::{reference, CellwiseField, Family, PiecewiseField};

/// Minimum of `|h - chi|_{omega_e}` over conforming `N_{p+delta}` fields with
/// `curl h = j_h` and zero tangential trace on `Gamma_N^e`. It decreases in
/// `delta` towards the local residual dual norm.
pub fn residual_dual_norm(
    mesh: &Mesh,
    patch: &EdgePatch,
    degree: usize,
    delta: usize,
    j_h: &dyn PiecewiseField,
    chi: &dyn PiecewiseField,
) -> Result<f64> {
    let ctx = PatchContext::new(mesh, patch, degree + delta)?;
    Ok(patch_equilibrate(&ctx, j_h, chi)?.eta)
}

/// Data used to probe the stability of the patch problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFamily {
    /// Random broken `N_p` field `chi` and the projection of a random broken
    /// `RT_p` field as `j_h`.
    Random,
    /// Broken gradient of a random `P_{p+1}` field as `chi`, with `j_h = 0`.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub degree: usize,
    pub eta_patch: f64,
    pub eta_sweep: f64,
    pub dual_norm: f64,
}

impl StabilityRow {
    pub fn ratio_patch(&self) -> f64 {
        self.eta_patch / self.dual_norm
    }

    pub fn ratio_sweep(&self) -> f64 {
        self.eta_sweep / self.dual_norm
    }
}

#[derive(Debug, Clone)]
pub struct StabilityExperiment {
    pub edge: usize,
    pub kind: PatchKind,
    pub kappa: f64,
    pub delta: usize,
    pub rows: Vec<StabilityRow>,
}

impl StabilityExperiment {
    /// `max / min` of a ratio over the degrees.
    pub fn spread(&self, ratio: impl Fn(&StabilityRow) -> f64) -> f64 {
        let r: Vec<f64> = self.rows.iter().map(ratio).collect();
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

fn random_cellwise(family: Family, degree: usize, cells: &[usize], rng: &mut ChaCha8Rng) -> Result<CellwiseField> {
    let element = reference(family, degree)?;
    let coeffs = cells.iter().map(|_| (0..element.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    Ok(CellwiseField::new(element, cells.to_vec(), coeffs))
}

/// Test data of one family at one degree; deterministic in `seed`.
pub fn test_data(ctx: &PatchContext, family: TestFamily, seed: u64) -> Result<(CellwiseField, CellwiseField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ctx.degree;
    let cells = ctx.cells();
    match family {
        TestFamily::Random => {
            let chi = random_cellwise(Family::Nedelec, p, cells, &mut rng)?;
            let j = random_cellwise(Family::RaviartThomas, p, cells, &mut rng)?;
            let j_h = project_source(ctx, &j, ctx.quad)?.field;
            Ok((j_h, chi))
        }
        TestFamily::Gradient => {
            let q = random_cellwise(Family::Lagrange, p + 1, cells, &mut rng)?;
            let chi = interpolate(reference(Family::Nedelec, p)?, ctx.mesh, cells, &q.derived());
            let j_h = project_source(ctx, &crate::shape::Analytic::zero(), ctx.quad)?.field;
            Ok((j_h, chi))
        }
    }
}

/// Seed of the data for one edge and degree.
pub fn pair_seed(seed: u64, edge: usize, degree: usize) -> u64 {
    seed ^ ((edge as u64) << 20) ^ (degree as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// For every degree, draw test data, compute the patch and sweep estimators
/// and the enriched dual-norm approximation, and record their ratios.
pub fn stability_ratio(
    mesh: &Mesh,
    edge: usize,
    degrees: &[usize],
    delta: usize,
    family: TestFamily,
    seed: u64,
) -> Result<StabilityExperiment> {
    let patch = mesh.edge_patch(edge)?;
    let mut rows = Vec::with_capacity(degrees.len());
    for &p in degrees {
        let ctx = PatchContext::new(mesh, &patch, p)?;
        let (j_h, chi) = test_data(&ctx, family, pair_seed(seed, edge, p))?;
        let eta_patch = patch_equilibrate(&ctx, &j_h, &chi)?.eta;
        let eta_sweep = sweep_equilibrate(&ctx, &j_h, &chi)?.eta;
        let dual_norm = residual_dual_norm(mesh, &patch, p, delta, &j_h, &chi)?;
        log::debug!("edge {edge} p {p}: patch {eta_patch:e} sweep {eta_sweep:e} dual {dual_norm:e}");
        rows.push(StabilityRow { degree: p, eta_patch, eta_sweep, dual_norm });
    }
    Ok(StabilityExperiment { edge, kind: patch.kind, kappa: patch.metrics.kappa, delta, rows })
}

/// Outcome of checking an estimator report against the exact error.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub error: f64,
    pub upper_bound: f64,
    /// `1 - error / upper_bound`.
    pub margin: f64,
    pub upper_holds: bool,
    /// `eta_e / (error_e + osc_e)` per edge.
    pub local_constants: Vec<f64>,
    pub max_local_constant: f64,
}

/// Check `error <= upper_bound` and tabulate the measured local lower-bound
/// constants. Returns `None` without an exact error in the report.
pub fn bound_check(report: &EstimatorReport) -> Option<BoundCheck> {
    let error = report.error?;
    let local_constants: Vec<f64> = report
        .estimates
        .iter()
        .map(|e| {
            let denom = e.error.unwrap_or(0.0) + e.osc;
            if denom > 0.0 {
                e.eta / denom
            } else if e.eta == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let max_local_constant = local_constants.iter().copied().fold(0.0, f64::max);
    let upper_holds = error <= report.upper_bound;
    let margin = if report.upper_bound > 0.0 { 1.0 - error / report.upper_bound } else { 0.0 };
    Some(BoundCheck { error, upper_bound: report.upper_bound, margin, upper_holds, local_constants, max_local_constant })
}

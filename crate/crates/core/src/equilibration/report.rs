//! Per-edge estimates and their aggregation into global estimators and the
//! guaranteed upper bound.

use rayon::prelude::*;

use super::{cutoff_constants, patch_equilibrate, project_source, sweep_equilibrate, PatchContext};
use crate::error::{Error, Result};
use crate::global::{data_degree, EnergyError, GlobalSolution};
use crate::mesh::{Mesh, PatchKind};
use crate::shape::field::{l2_norm_squared, Difference};
use crate::shape::PiecewiseField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// The mixed problem on the whole patch.
    Patch,
    /// The sequential sweep of element problems.
    Sweep,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Patch => "patch",
            Method::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    /// Global lifting constant.
    pub c_l: f64,
    /// Patch Poincaré–Friedrichs–Weber constant; `None` uses 1 and flags the
    /// report.
    pub c_pfw: Option<f64>,
    /// Poincaré constant for patches that are neither convex interior nor
    /// Dirichlet patches.
    pub c_p_fallback: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { method: Method::Patch, c_l: 1.0, c_pfw: None, c_p_fallback: 1.0 }
    }
}

impl EstimatorConfig {
    pub fn c_pfw_value(&self) -> f64 {
        self.c_pfw.unwrap_or(1.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.c_l) || !ok(self.c_pfw_value()) || !ok(self.c_p_fallback) {
            return Err(Error::Config(format!("constants must be finite and nonnegative: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchEstimate {
    pub edge: usize,
    pub kind: PatchKind,
    pub method: Method,
    pub eta: f64,
    pub osc: f64,
    pub c_p: f64,
    pub c_cont: f64,
    pub c_kappa: f64,
    /// `|curl h - j_h|_{omega_e}`.
    pub equilibration_defect: f64,
    /// `|j_h|_{omega_e}`.
    pub source_norm: f64,
    /// `|curl(A - A_h)|_{omega_e}` when the exact solution is known.
    pub error: Option<f64>,
}

impl PatchEstimate {
    pub fn efficiency(&self) -> Option<f64> {
        self.error.map(|err| self.eta / err)
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub estimates: Vec<PatchEstimate>,
    pub eta_ofree: f64,
    pub eta_cofree: f64,
    pub upper_bound: f64,
    pub c_l: f64,
    pub c_pfw: f64,
    /// The default `C_PFW = 1` was used instead of a configured value.
    pub c_pfw_defaulted: bool,
    /// `|curl(A - A_h)|` when the exact solution is known.
    pub error: Option<f64>,
}

impl EstimatorReport {
    /// Largest per-edge efficiency `eta_e / |curl(A - A_h)|_{omega_e}`.
    pub fn max_efficiency(&self) -> Option<f64> {
        self.estimates.iter().map(|e| e.efficiency()).try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
    }

    pub fn indicators(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.eta).collect()
    }
}

/// Estimate on the patch of edge `e`: project the source, equilibrate and
/// evaluate the constants.
pub fn estimate_edge(
    mesh: &Mesh,
    e: usize,
    degree: usize,
    source: &dyn PiecewiseField,
    chi: &dyn PiecewiseField,
    config: &EstimatorConfig,
) -> Result<PatchEstimate> {
    let patch = mesh.edge_patch(e)?;
    let ctx = PatchContext::new(mesh, &patch, degree)?;
    let quad = data_degree(degree);
    let j_h = project_source(&ctx, source, quad)?.field;
    let (eta, equilibration_defect) = match config.method {
        Method::Patch => {
            let f = patch_equilibrate(&ctx, &j_h, chi)?;
            (f.eta, f.equilibration_defect)
        }
        Method::Sweep => {
            let f = sweep_equilibrate(&ctx, &j_h, chi)?;
            (f.eta, f.equilibration_defect)
        }
    };
    let data_error: f64 = l2_norm_squared(mesh, &patch.tets, &Difference(source, &j_h), quad)?.iter().sum();
    let osc = config.c_pfw_value() * patch.metrics.h * data_error.sqrt();
    let source_norm = ctx.distance_squared(&j_h, &super::Zero).sqrt();
    let constants = cutoff_constants(mesh, &patch, config.c_p_fallback);
    Ok(PatchEstimate {
        edge: e,
        kind: patch.kind,
        method: config.method,
        eta,
        osc,
        c_p: constants.c_p,
        c_cont: constants.c_cont,
        c_kappa: constants.c_kappa,
        equilibration_defect,
        source_norm,
        error: None,
    })
}

/// Estimates on all edge patches, in parallel.
pub fn estimate(
    mesh: &Mesh,
    solution: &GlobalSolution,
    source: &dyn PiecewiseField,
    config: &EstimatorConfig,
    error: Option<&EnergyError>,
) -> Result<EstimatorReport> {
    config.validate()?;
    let potential = solution.cellwise();
    let chi = potential.derived();
    let estimates = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| estimate_edge(mesh, e, solution.degree, source, &chi, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(mesh, estimates, config, error))
}

/// Global estimators from per-edge estimates:
/// `eta_ofree^2 = 6 sum (C_cont eta)^2`, `eta_cofree^2 = sum eta^2` and the
/// bound `sqrt(6) C_L (sum C_cont^2 (eta + osc)^2)^(1/2)`.
pub fn aggregate(
    mesh: &Mesh,
    mut estimates: Vec<PatchEstimate>,
    config: &EstimatorConfig,
    error: Option<&EnergyError>,
) -> EstimatorReport {
    if let Some(err) = error {
        let local = err.patch_norms(mesh);
        for est in &mut estimates {
            est.error = Some(local[est.edge]);
        }
    }
    let eta_ofree = (6.0 * estimates.iter().map(|e| (e.c_cont * e.eta).powi(2)).sum::<f64>()).sqrt();
    let eta_cofree = estimates.iter().map(|e| e.eta * e.eta).sum::<f64>().sqrt();
    let upper_bound = 6f64.sqrt()
        * config.c_l
        * estimates.iter().map(|e| (e.c_cont * (e.eta + e.osc)).powi(2)).sum::<f64>().sqrt();
    EstimatorReport {
        estimates,
        eta_ofree,
        eta_cofree,
        upper_bound,
        c_l: config.c_l,
        c_pfw: config.c_pfw_value(),
        c_pfw_defaulted: config.c_pfw.is_none(),
        error: error.map(|e| e.global),
    }
}

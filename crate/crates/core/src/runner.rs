//! Experiment drivers behind the command-line interface: convergence runs
//! with estimator reports, patch stability experiments and mesh summaries.
//! Every table is written as CSV with a fixed header.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cases::{self, Solution};
use crate::equilibration::{estimate, EstimatorConfig, EstimatorReport, Method};
use crate::error::{Error, Result};
use crate::global::{data_degree, energy_error, solve};
use crate::mesh::{dorfler_mark, read_mesh_file, BoundaryTag, Mesh, PatchKind};
use crate::oracles::{stability_ratio, StabilityExperiment, TestFamily};
use crate::shape::Analytic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    CubeSmooth,
    LshapeSingular,
    /// A mesh read from disk, with the smooth cube source and no exact
    /// solution.
    File,
}

impl CaseKind {
    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::CubeSmooth => "cube-smooth",
            CaseKind::LshapeSingular => "lshape-singular",
            CaseKind::File => "file",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub case: CaseKind,
    pub mesh: Option<PathBuf>,
    /// Subdivisions per direction of the initial cube mesh.
    pub n: usize,
    pub degree: usize,
    /// Number of meshes: the initial one and `levels - 1` uniform refinements.
    pub levels: usize,
    pub estimator: EstimatorConfig,
    /// Dörfler fraction for the marked-edge output.
    pub theta: f64,
    /// Singularity exponent of the L-shape solution.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::CubeSmooth,
            mesh: None,
            n: 2,
            degree: 0,
            levels: 1,
            estimator: EstimatorConfig::default(),
            theta: 0.5,
            alpha: 2.0 / 3.0,
            seed: 0,
        }
    }
}

impl CaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if self.n < 1 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta = {} outside (0, 1]", self.theta)));
        }
        if self.case == CaseKind::File && self.mesh.is_none() {
            return Err(Error::Config("the file case needs a mesh path".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha = {} must be positive", self.alpha)));
        }
        Ok(())
    }

    /// Initial mesh and, when known, the exact solution.
    pub fn setup(&self) -> Result<(Mesh, Solution, bool)> {
        match self.case {
            CaseKind::CubeSmooth => Ok((cases::unit_cube(self.n, BoundaryTag::Neumann), cases::cube_smooth(), true)),
            CaseKind::LshapeSingular => Ok((cases::lshape(0), cases::lshape_singular(self.alpha), true)),
            CaseKind::File => {
                let path = self.mesh.as_ref().expect("validated");
                Ok((read_mesh_file(path)?, cases::cube_smooth(), false))
            }
        }
    }
}

/// One row of the convergence table.
#[derive(Debug, Clone)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub ndofs: usize,
    pub error: Option<f64>,
    pub eta_cofree: f64,
    pub eta_ofree: f64,
    pub upper_bound: f64,
    pub max_efficiency: Option<f64>,
    pub solve_seconds: f64,
    pub estimate_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<LevelRow>,
    /// `(level, edge, eta_e)` of the Dörfler-marked edges.
    pub marked: Vec<(usize, usize, f64)>,
    pub reports: Vec<EstimatorReport>,
    pub meshes: Vec<Mesh>,
}

/// Solve and estimate on every level.
pub fn run_case(config: &CaseConfig) -> Result<RunOutput> {
    config.validate()?;
    let (mut mesh, exact, known) = config.setup()?;
    let source = Analytic(exact.source.clone());
    let curl = Analytic(exact.curl.clone());
    let p = config.degree;
    let mut out = RunOutput { rows: Vec::new(), marked: Vec::new(), reports: Vec::new(), meshes: Vec::new() };
    for level in 0..config.levels {
        if level > 0 {
            mesh = mesh.uniform_refine();
        }
        let start = Instant::now();
        let solution = solve(&mesh, p, &source)?;
        let solve_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let error = if known { Some(energy_error(&mesh, &solution.cellwise(), &curl, data_degree(p))?) } else { None };
        let report = estimate(&mesh, &solution, &source, &config.estimator, error.as_ref())?;
        let estimate_seconds = start.elapsed().as_secs_f64();
        let indicators = report.indicators();
        for e in dorfler_mark(&indicators, config.theta)? {
            out.marked.push((level, e, indicators[e]));
        }
        log::info!(
            "level {level}: {} dofs, error {:?}, eta_cofree {:e}",
            solution.ndofs(),
            report.error,
            report.eta_cofree
        );
        out.rows.push(LevelRow {
            level,
            h: mesh.h_max(),
            ndofs: solution.ndofs(),
            error: report.error,
            eta_cofree: report.eta_cofree,
            eta_ofree: report.eta_ofree,
            upper_bound: report.upper_bound,
            max_efficiency: report.max_efficiency(),
            solve_seconds,
            estimate_seconds,
        });
        out.reports.push(report);
        out.meshes.push(mesh.clone());
    }
    Ok(out)
}

/// Scientific notation with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

pub const RUN_HEADER: [&str; 15] = [
    "case",
    "estimator",
    "degree",
    "level",
    "h",
    "ndofs",
    "error",
    "eta_cofree",
    "eta_ofree",
    "upper_bound",
    "efficiency_cofree",
    "efficiency_ofree",
    "max_edge_efficiency",
    "c_pfw",
    "c_pfw_defaulted",
];

pub const TIMING_HEADER: [&str; 3] = ["level", "solve_seconds", "estimate_seconds"];
pub const MARKED_HEADER: [&str; 3] = ["level", "edge", "eta"];

/// Side-file paths next to the main report.
pub fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(format!(".{suffix}.csv"));
    PathBuf::from(s)
}

/// Write the convergence table; timings and marked edges go to side files
/// so the main table is reproducible byte for byte.
pub fn write_run(config: &CaseConfig, output: &RunOutput, out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(RUN_HEADER)?;
    for (row, report) in output.rows.iter().zip(&output.reports) {
        let eff = |v: f64| row.error.map(|e| v / e);
        w.write_record([
            config.case.name().to_string(),
            config.estimator.method.name().to_string(),
            config.degree.to_string(),
            row.level.to_string(),
            fmt_real(row.h),
            row.ndofs.to_string(),
            fmt_opt(row.error),
            fmt_real(row.eta_cofree),
            fmt_real(row.eta_ofree),
            fmt_real(row.upper_bound),
            fmt_opt(eff(row.eta_cofree)),
            fmt_opt(eff(row.eta_ofree)),
            fmt_opt(row.max_efficiency),
            fmt_real(report.c_pfw),
            report.c_pfw_defaulted.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(side_path(out, "timings"))?;
    w.write_record(TIMING_HEADER)?;
    for row in &output.rows {
        w.write_record([row.level.to_string(), fmt_real(row.solve_seconds), fmt_real(row.estimate_seconds)])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(side_path(out, "marked"))?;
    w.write_record(MARKED_HEADER)?;
    for (level, edge, eta) in &output.marked {
        w.write_record([level.to_string(), edge.to_string(), fmt_real(*eta)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub case: CaseKind,
    pub mesh: Option<PathBuf>,
    pub n: usize,
    pub degrees: Vec<usize>,
    pub delta: usize,
    /// Patch edge; the first interior edge when absent.
    pub edge: Option<usize>,
    pub family: TestFamily,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::CubeSmooth,
            mesh: None,
            n: 2,
            degrees: (0..=4).collect(),
            delta: 3,
            edge: None,
            family: TestFamily::Random,
            seed: 0,
        }
    }
}

/// Measure stability ratios on one patch.
pub fn run_patch_experiment(config: &ExperimentConfig) -> Result<StabilityExperiment> {
    let mesh = match config.case {
        CaseKind::File => {
            let path = config.mesh.as_ref().ok_or_else(|| Error::Config("the file case needs a mesh path".into()))?;
            read_mesh_file(path)?
        }
        CaseKind::CubeSmooth => cases::unit_cube(config.n, BoundaryTag::Neumann),
        CaseKind::LshapeSingular => cases::lshape(0),
    };
    if config.degrees.is_empty() {
        return Err(Error::Config("no degrees given".into()));
    }
    let edge = match config.edge {
        Some(e) => e,
        None => first_interior_edge(&mesh)
            .ok_or_else(|| Error::Config("mesh has no interior edge".into()))?,
    };
    stability_ratio(&mesh, edge, &config.degrees, config.delta, config.family, config.seed)
}

pub fn first_interior_edge(mesh: &Mesh) -> Option<usize> {
    (0..mesh.num_edges()).find(|&e| mesh.edge_patch(e).map(|p| p.kind == PatchKind::Interior).unwrap_or(false))
}

pub const EXPERIMENT_HEADER: [&str; 10] = [
    "edge",
    "patch_type",
    "kappa",
    "degree",
    "delta",
    "eta_patch",
    "eta_sweep",
    "dual_norm",
    "ratio_patch",
    "ratio_sweep",
];

pub fn write_experiment(exp: &StabilityExperiment, out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(EXPERIMENT_HEADER)?;
    for r in &exp.rows {
        w.write_record([
            exp.edge.to_string(),
            exp.kind.name().to_string(),
            fmt_real(exp.kappa),
            r.degree.to_string(),
            exp.delta.to_string(),
            fmt_real(r.eta_patch),
            fmt_real(r.eta_sweep),
            fmt_real(r.dual_norm),
            fmt_real(r.ratio_patch()),
            fmt_real(r.ratio_sweep()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Counts and shape statistics of a mesh.
#[derive(Debug, Clone)]
pub struct MeshSummary {
    pub vertices: usize,
    pub tets: usize,
    pub edges: usize,
    pub faces: usize,
    pub dirichlet_faces: usize,
    pub neumann_faces: usize,
    pub patch_kinds: BTreeMap<&'static str, usize>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub volume: f64,
}

/// Extract every edge patch and collect statistics; fails on the first
/// invalid patch.
pub fn mesh_summary(mesh: &Mesh) -> Result<MeshSummary> {
    let mut patch_kinds = BTreeMap::new();
    let (mut kappa_min, mut kappa_max) = (f64::INFINITY, 0.0f64);
    for e in 0..mesh.num_edges() {
        let patch = mesh.edge_patch(e)?;
        *patch_kinds.entry(patch.kind.name()).or_insert(0) += 1;
        kappa_min = kappa_min.min(patch.metrics.kappa);
        kappa_max = kappa_max.max(patch.metrics.kappa);
    }
    let count = |tag| mesh.boundary_faces().filter(|&f| mesh.face_tag(f) == Some(tag)).count();
    Ok(MeshSummary {
        vertices: mesh.num_vertices(),
        tets: mesh.num_tets(),
        edges: mesh.num_edges(),
        faces: mesh.num_faces(),
        dirichlet_faces: count(BoundaryTag::Dirichlet),
        neumann_faces: count(BoundaryTag::Neumann),
        patch_kinds,
        kappa_min,
        kappa_max,
        volume: (0..mesh.num_tets()).map(|t| mesh.volume(t)).sum(),
    })
}

impl MeshSummary {
    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "vertices {}", self.vertices)?;
        writeln!(out, "tets {}", self.tets)?;
        writeln!(out, "edges {}", self.edges)?;
        writeln!(out, "faces {}", self.faces)?;
        writeln!(out, "boundary faces: {} dirichlet, {} neumann", self.dirichlet_faces, self.neumann_faces)?;
        for (kind, n) in &self.patch_kinds {
            writeln!(out, "{kind} patches {n}")?;
        }
        writeln!(out, "kappa {} .. {}", fmt_real(self.kappa_min), fmt_real(self.kappa_max))?;
        writeln!(out, "volume {}", fmt_real(self.volume))
    }
}

/// Parse an estimator name.
pub fn parse_method(s: &str) -> Result<Method> {
    match s {
        "patch" => Ok(Method::Patch),
        "sweep" => Ok(Method::Sweep),
        _ => Err(Error::Config(format!("unknown estimator '{s}'"))),
    }
}

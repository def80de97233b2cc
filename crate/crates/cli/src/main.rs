//! `curlcurl`: convergence runs with a posteriori estimates, patch stability
//! experiments and mesh checks.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid configuration, 4 invalid mesh
//! or mesh file, 5 numerical failure, 1 anything else (I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use curlcurl_core::equilibration::{EstimatorConfig, Method};
use curlcurl_core::mesh::read_mesh_file;
use curlcurl_core::oracles::TestFamily;
use curlcurl_core::runner::{
    mesh_summary, run_case, run_patch_experiment, write_experiment, write_run, CaseConfig, CaseKind,
    ExperimentConfig,
};
use curlcurl_core::Error;

#[derive(Parser, Debug)]
#[command(name = "curlcurl", version, about = "Degree-robust error estimates for curl-curl problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Case {
    CubeSmooth,
    LshapeSingular,
    File,
}

impl From<Case> for CaseKind {
    fn from(c: Case) -> Self {
        match c {
            Case::CubeSmooth => CaseKind::CubeSmooth,
            Case::LshapeSingular => CaseKind::LshapeSingular,
            Case::File => CaseKind::File,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Estimator {
    Patch,
    Sweep,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Family {
    Random,
    Gradient,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve on a sequence of uniformly refined meshes and estimate the error.
    Run {
        #[arg(long, value_enum)]
        case: Case,
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Subdivisions per direction of the cube.
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, value_enum, default_value = "patch")]
        estimator: Estimator,
        /// Dörfler fraction for the marked-edge output.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long = "c-l", default_value_t = 1.0)]
        c_l: f64,
        /// Defaults to 1, flagged in the report.
        #[arg(long = "c-pfw")]
        c_pfw: Option<f64>,
        /// Poincaré constant for patches without a known value.
        #[arg(long = "c-p-fallback", default_value_t = 1.0)]
        c_p_fallback: f64,
        /// Singularity exponent of the L-shape solution.
        #[arg(long, default_value_t = 2.0 / 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the ratio of patch estimators to enriched dual norms.
    PatchExperiment {
        #[arg(long, value_enum, default_value = "cube-smooth")]
        case: Case,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        /// Degree range `a..b` (inclusive) or comma-separated list.
        #[arg(long, default_value = "0..4")]
        degrees: String,
        #[arg(long, default_value_t = 3)]
        enrich: usize,
        /// Patch edge; defaults to the first interior edge.
        #[arg(long)]
        edge: Option<usize>,
        #[arg(long, value_enum, default_value = "random")]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a mesh file and print statistics.
    CheckMesh { path: PathBuf },
}

fn parse_degrees(s: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid degree list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad().into());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad().into())).collect()
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CURLCURL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("CURLCURL_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Config("CURLCURL_THREADS must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run {
            case,
            mesh,
            n,
            degree,
            levels,
            estimator,
            theta,
            c_l,
            c_pfw,
            c_p_fallback,
            alpha,
            seed,
            out,
        } => {
            let method = match estimator {
                Estimator::Patch => Method::Patch,
                Estimator::Sweep => Method::Sweep,
            };
            let config = CaseConfig {
                case: case.into(),
                mesh,
                n,
                degree,
                levels,
                estimator: EstimatorConfig { method, c_l, c_pfw, c_p_fallback },
                theta,
                alpha,
                seed,
            };
            let output = run_case(&config)?;
            write_run(&config, &output, &out).with_context(|| format!("writing {}", out.display()))?;
            if output.reports.iter().any(|r| r.c_pfw_defaulted) {
                log::warn!("C_PFW not given; the oscillation term uses the default 1");
            }
        }
        Command::PatchExperiment { case, mesh, n, degrees, enrich, edge, family, seed, out } => {
            let config = ExperimentConfig {
                case: case.into(),
                mesh,
                n,
                degrees: parse_degrees(&degrees)?,
                delta: enrich,
                edge,
                family: match family {
                    Family::Random => TestFamily::Random,
                    Family::Gradient => TestFamily::Gradient,
                },
                seed,
            };
            let exp = run_patch_experiment(&config)?;
            write_experiment(&exp, &out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::CheckMesh { path } => {
            let mesh = read_mesh_file(&path)?;
            let summary = mesh_summary(&mesh)?;
            summary.write(std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 3,
        Some(Error::Mesh(_)) => 4,
        Some(Error::Singular(_) | Error::Infeasible { .. } | Error::QuadratureDegree(..) | Error::UnsupportedDegree(..)) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

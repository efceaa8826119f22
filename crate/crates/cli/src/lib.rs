//! The `gpls` command-line tool.
//!
//! Every command reads and writes plain files: point clouds as XYZ, XYZN or
//! ASCII PLY, fitted surfaces as JSON, curvature reports as CSV, fields as
//! legacy VTK. Randomness is always driven by `--seed`, and outputs are
//! written atomically.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use gpls::geom::{
    curvature_report, distance_stats, project_to_surface, Point3, ProjectOptions, SurfaceJet,
};
use gpls::io::{
    format_ply, format_vtk_structured_points, format_xyz, grid_point, read_points, PointCloud,
};
use gpls::sdfit::{build_band, estimate_normals, fit_sdf, SdfOptions, DEFAULT_NORMAL_NEIGHBOURS};
use gpls::surfaces::{catalog_lookup, oracle, parse_params, sample_surface};
use gpls::variety::{GplsSurfaceRecord, DEFAULT_RANK_TOL};
use gpls::{build_gpls, build_index_set, FitMode, FitOptions, GplsSurface, LpDegree};

pub mod bench;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};
use output::{write_atomic, write_json};

#[derive(Debug, Parser)]
#[command(name = "gpls", version, about = "Global polynomial level sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample points and normals on a catalogue surface.
    Sample(SampleArgs),
    /// Fit the polynomial vanishing on a point cloud.
    FitVariety(FitVarietyArgs),
    /// Fit a signed-distance polynomial to points with normals.
    FitSdf(FitSdfArgs),
    /// Mean and Gauss curvature (and optionally its Laplacian) of a fit.
    Curvature(CurvatureArgs),
    /// Distances from points to a fitted zero set.
    Eval(EvalArgs),
    /// Values of a fit on a regular grid over its domain.
    GridExport(GridExportArgs),
    /// Reproduce the benchmark tables.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub surface: String,
    /// Comma-separated `key=value` parameters, e.g. `R=0.5,r=0.3`.
    #[arg(long, default_value = "")]
    pub params: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.ply` selects PLY, anything else XYZN.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitVarietyArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub degree: usize,
    /// 1, 2 or inf.
    #[arg(long, default_value = "2")]
    pub lp: LpDegree,
    /// kernel-corank1 or lagrange-sum.
    #[arg(long, default_value = "kernel-corank1")]
    pub mode: FitMode,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitSdfArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// Comma-separated band offsets in domain units; may be empty.
    #[arg(long, default_value = "0.005,0.01,0.035")]
    pub offsets: String,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, default_value = "2")]
    pub lp: LpDegree,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// Estimate normals from this many nearest neighbours when the input
    /// has none.
    #[arg(long, num_args = 0..=1, default_missing_value = "16")]
    pub estimate_normals: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    /// Fitted surface JSON.
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub points: PathBuf,
    /// Catalogue surface to compare against.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Parameters of the oracle surface.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Also compute the Laplace–Beltrami operator of mean curvature.
    #[arg(long)]
    pub laplacian: bool,
    /// Per-point CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridExportArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub res: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample(a) => cmd_sample(&a),
        Command::FitVariety(a) => cmd_fit_variety(&a),
        Command::FitSdf(a) => cmd_fit_sdf(&a),
        Command::Curvature(a) => cmd_curvature(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::GridExport(a) => cmd_grid_export(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
    }
}

fn is_ply(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"))
}

fn write_cloud(path: &Path, cloud: &PointCloud) -> CliResult<()> {
    let text = if is_ply(path) {
        format_ply(cloud)
    } else {
        format_xyz(cloud)
    };
    write_atomic(path, text.as_bytes())
}

fn read_cloud(path: &Path) -> CliResult<PointCloud> {
    let cloud =
        read_points(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    if cloud.is_empty() {
        return Err(CliError::usage(format!("{}: no points", path.display())));
    }
    Ok(cloud)
}

pub fn read_surface(path: &Path) -> CliResult<GplsSurface> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let record: GplsSurfaceRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    GplsSurface::from_record(&record)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_surface(path: &Path, surface: &GplsSurface) -> CliResult<()> {
    for w in &surface.fit_report.warnings {
        eprintln!("warning: {w}");
    }
    write_json(path, &surface.to_record())
}

fn index_set(degree: usize, lp: LpDegree) -> CliResult<Arc<gpls::MultiIndexSet>> {
    Ok(Arc::new(build_index_set(3, degree, lp)?))
}

fn parse_offsets(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::usage(format!("invalid offset '{s}'")))
        })
        .collect()
}

fn cmd_sample(a: &SampleArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let def = catalog_lookup(&a.surface, &parse_params(&a.params)?)?;
    let sample = sample_surface(&def, a.n, a.seed)?;
    if !sample.flagged.is_empty() {
        eprintln!(
            "warning: {} points have a vanishing gradient; their normals are NaN",
            sample.flagged.len()
        );
    }
    write_cloud(&a.out, &sample.into_cloud())
}

fn cmd_fit_variety(a: &FitVarietyArgs) -> CliResult<()> {
    let cloud = read_cloud(&a.points)?;
    let opts = FitOptions {
        mode: a.mode,
        rank_tol: a.rank_tol,
        transform: None,
    };
    let surface = build_gpls(&cloud.points, index_set(a.degree, a.lp)?, &opts)?;
    write_surface(&a.out, &surface)
}

fn cmd_fit_sdf(a: &FitSdfArgs) -> CliResult<()> {
    let cloud = read_cloud(&a.points)?;
    let offsets = parse_offsets(&a.offsets)?;
    let (normals, estimated) = match (&cloud.normals, a.estimate_normals) {
        (Some(n), _) => (n.clone(), false),
        (None, Some(k)) => (estimate_normals(&cloud.points, k.max(3))?, true),
        (None, None) => return Err(CliError::usage(format!(
            "{} has no normals; supply XYZN or PLY normals, or pass --estimate-normals (k = {})",
            a.points.display(),
            DEFAULT_NORMAL_NEIGHBOURS
        ))),
    };
    let band = build_band(&cloud.points, &normals, &offsets, None)?;
    let mut surface = fit_sdf(
        &band,
        index_set(a.degree, a.lp)?,
        &SdfOptions { ridge: a.ridge },
    )?;
    surface.fit_report.normals_estimated = estimated;
    if estimated {
        surface
            .fit_report
            .warnings
            .push("normals were estimated from nearest neighbours".into());
    }
    eprintln!(
        "fit-sdf: {} band points ({} dropped), max residual {:e}",
        band.len(),
        band.dropped,
        surface.fit_report.max_residual
    );
    write_surface(&a.out, &surface)
}

#[derive(Debug, Serialize)]
struct CurvatureSummaryFile<'a> {
    surface: String,
    oracle: Option<String>,
    #[serde(flatten)]
    summary: &'a gpls::geom::CurvatureSummary,
    degenerate_points: &'a [usize],
}

/// Projects every point onto the fit's zero set; points where projection
/// fails are kept as given and reported as degenerate downstream.
fn project_points(jet: &SurfaceJet, points: &[Point3]) -> Vec<Point3> {
    points
        .par_iter()
        .map(|p| {
            project_to_surface(jet, p, ProjectOptions::default())
                .map(|r| r.point)
                .unwrap_or(*p)
        })
        .collect()
}

fn cmd_curvature(a: &CurvatureArgs) -> CliResult<()> {
    let surface = read_surface(&a.surface)?;
    let jet = SurfaceJet::from_surface(&surface)?;
    let cloud = read_cloud(&a.points)?;
    let orc = match &a.oracle {
        Some(name) => {
            let def = catalog_lookup(name, &parse_params(&a.params)?)?;
            Some((def.to_string(), oracle(&def, a.laplacian)?))
        }
        None => None,
    };
    let points = project_points(&jet, &cloud.points);
    let report = curvature_report(
        &jet,
        &points,
        orc.as_ref().map(|(_, o)| &**o as &gpls::geom::Oracle<'_>),
        a.laplacian,
    )?;
    if !report.degenerate_points.is_empty() {
        eprintln!(
            "warning: {} points skipped (vanishing gradient)",
            report.degenerate_points.len()
        );
    }
    write_atomic(&a.out, report.to_csv().as_bytes())?;
    let summary_path = a
        .summary
        .clone()
        .unwrap_or_else(|| a.out.with_extension("json"));
    write_json(
        &summary_path,
        &CurvatureSummaryFile {
            surface: a.surface.display().to_string(),
            oracle: orc.map(|(name, _)| name),
            summary: &report.summary,
            degenerate_points: &report.degenerate_points,
        },
    )
}

#[derive(Debug, Serialize)]
struct EvalReport {
    count: usize,
    e_inf: f64,
    e_mean: f64,
    resolution: f64,
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let surface = read_surface(&a.surface)?;
    let cloud = read_cloud(&a.points)?;
    let jet = SurfaceJet::from_surface(&surface)?;
    let stats = distance_stats(&jet, &cloud.points)?;
    println!("E_inf / E_mean = {:e} / {:e}", stats.e_inf, stats.e_mean);
    write_json(
        &a.out,
        &EvalReport {
            count: stats.count,
            e_inf: stats.e_inf,
            e_mean: stats.e_mean,
            resolution: stats.resolution,
        },
    )
}

fn cmd_grid_export(a: &GridExportArgs) -> CliResult<()> {
    if a.res < 2 {
        return Err(CliError::usage("--res must be at least 2"));
    }
    let surface = read_surface(&a.surface)?;
    let res = a.res;
    let values: Vec<f64> = (0..res * res * res)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx % res, (idx / res) % res, idx / (res * res));
            surface
                .q
                .eval(&grid_point(res, i, j, k))
                .expect("three coordinates")
        })
        .collect();
    let text = format_vtk_structured_points(res, &values, "q")?;
    write_atomic(&a.out, text.as_bytes())
}

/// Caps the global thread pool at `GPLS_THREADS` when set.
pub fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("GPLS_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            CliError::usage(format!(
                "GPLS_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

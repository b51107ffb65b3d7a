use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hodgetrack_core::analysis::{hgc_from_spectrum, EigenMode};
use hodgetrack_core::persistence::{link_spectra, step_spectrum};
use hodgetrack_core::spectral::spectrum_of;
use hodgetrack_core::synthetic::{self, Preset};
use hodgetrack_core::{
    boundary_matrix, delaunay_2d, filtration_values, hodge_operators, hodge_spectral_clustering,
    node_clustering, sublevel, ComplexSlice, EigenCount, FilteredComplex, FiltrationGrid,
    PersistenceError, PointCloud, Tolerances, TrackOptions, TrajectorySet, TypedSpectrum,
};

use crate::error::CliError;
use crate::formats::{self, ComplexDocument, SpectrumDocument, TrajectoryDocument};
use crate::manifest::ManifestBuilder;
use crate::output::{sibling, write_atomic};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "hodgetrack", version, about = "Typed Hodge Laplacian spectra of alpha-complex filtrations")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic point cloud.
    Generate(GenerateArgs),
    /// Delaunay-triangulate a 2D point CSV into a filtered complex.
    Triangulate(TriangulateArgs),
    /// Smallest typed eigenpairs of the Hodge Laplacian at one threshold.
    Spectrum(SpectrumArgs),
    /// Eigenvalue trajectories across the filtration.
    Track(TrackArgs),
    /// Hodge spectral clustering of the simplices of one slice.
    Cluster(ClusterArgs),
    /// Harmonic/gradient/curl relevance of every simplex of one slice.
    Hgc(HgcArgs),
    /// Boundary matrix of one slice as row,col,sign triplets.
    Boundary(BoundaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    FourDisks,
    Annulus,
    TwoClusters,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::FourDisks => Preset::FourDisks,
            PresetArg::Annulus => Preset::Annulus,
            PresetArg::TwoClusters => Preset::TwoClusters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Gradient,
    Harmonic,
    Curl,
    Total,
}

impl From<ModeArg> for EigenMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Gradient => EigenMode::Gradient,
            ModeArg::Harmonic => EigenMode::Harmonic,
            ModeArg::Curl => EigenMode::Curl,
            ModeArg::Total => EigenMode::Total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    /// Distinct filtration values, thinned by index.
    Values,
    /// Evenly spaced thresholds from 0 to the largest filtration value.
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub preset: PresetArg,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write the component each point was drawn from.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TriangulateArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    /// Complex JSON.
    pub input: PathBuf,
    /// Filtration threshold; defaults to the whole complex.
    #[arg(long)]
    pub t: Option<f64>,
    /// Simplex dimension.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    /// Number of smallest eigenpairs; all of them when omitted.
    #[arg(long)]
    pub num: Option<usize>,
    /// Include eigenvectors in the output.
    #[arg(long)]
    pub vectors: bool,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Complex JSON.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Eigenpairs per step.
    #[arg(long, default_value_t = 40)]
    pub num: usize,
    /// Number of grid steps; every distinct value when omitted with
    /// `--grid values`, 30 with `--grid uniform`.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = GridArg::Values)]
    pub grid: GridArg,
    /// Minimum similarity of matched eigenvectors.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Worker threads for the per-step eigensolves.
    #[arg(long)]
    pub threads: Option<NonZeroUsize>,
    /// Trajectory CSV.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Trajectory chart; defaults to the CSV path with an .svg extension.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Also write the trajectories as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Total)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 4)]
    pub num_eigvecs: usize,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write majority labels of the vertices to this CSV.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Label CSV.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Drawing of the clustering; defaults to the CSV path with an .svg
    /// extension when the complex has 2D coordinates.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HgcArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    /// Number of smallest eigenpairs the values are taken over.
    #[arg(long, default_value_t = 40)]
    pub num: usize,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[arg(short, long)]
    pub out: PathBuf,
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Triangulate(a) => triangulate(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Track(a) => track(a),
        Command::Cluster(a) => cluster(a),
        Command::Hgc(a) => hgc(a),
        Command::Boundary(a) => boundary(a),
    }
}

/// Clamps a user threshold to the complex; `None` means the whole complex.
pub fn resolve_threshold(fc: &FilteredComplex, t: Option<f64>) -> Result<f64, CliError> {
    let top = fc.max_value();
    match t {
        None => Ok(top),
        Some(t) if t.is_nan() || t < 0.0 => Err(CliError::Usage(format!("threshold must be ≥ 0, got {t}"))),
        Some(t) => Ok(t.min(top)),
    }
}

fn slice_params(m: &mut ManifestBuilder, a: &SliceArgs, t: f64) {
    m.param("t", t).param("dim", a.dim);
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("generate");
    let preset: Preset = a.preset.into();
    m.param("preset", preset.name()).param("n", a.n).param("seed", a.seed);
    m.param("generator", "chacha8");
    let sample = synthetic::generate(preset, a.n, a.seed)?;
    write_atomic(&a.out, &formats::points_csv(&sample.cloud))?;
    m.output(&a.out);
    if let Some(path) = &a.labels {
        write_atomic(path, &formats::generator_labels_csv(&sample.labels)?)?;
        m.output(path);
    }
    m.write(&a.out)?;
    Ok(())
}

pub fn triangulate(a: &TriangulateArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("triangulate");
    m.input(&a.input)?;
    let cloud = formats::read_points(&a.input)?;
    let tri = delaunay_2d(&cloud)?;
    let fc = filtration_values(&tri)?;
    log::info!(
        "{} vertices, {} edges, {} triangles",
        tri.vertex_count(),
        tri.edges.len(),
        tri.triangles.len()
    );
    let doc = ComplexDocument::from_triangulation(&tri, &fc);
    write_atomic(&a.out, &formats::complex_json(&doc)?)?;
    m.output(&a.out).write(&a.out)?;
    Ok(())
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("spectrum");
    m.input(&a.slice.input)?;
    let loaded = formats::read_complex(&a.slice.input)?;
    let t = resolve_threshold(&loaded.complex, a.slice.t)?;
    slice_params(&mut m, &a.slice, t);
    m.param("num", a.num).param("vectors", a.vectors);
    let slice = sublevel(&loaded.complex, t);
    let ops = hodge_operators(&slice, a.slice.dim)?;
    let count = a.num.map_or(EigenCount::All, EigenCount::Smallest);
    let spectrum = spectrum_of(&ops, count, &Tolerances::default())?;
    let doc = SpectrumDocument::new(&spectrum, ops.size(), a.vectors);
    write_atomic(&a.out, &formats::json_bytes(&doc)?)?;
    m.output(&a.out).write(&a.out)?;
    Ok(())
}

/// Grid, options and worker count of a track run, resolved from arguments.
pub fn track_grid(fc: &FilteredComplex, grid: GridArg, steps: Option<usize>) -> Result<FiltrationGrid, CliError> {
    Ok(match grid {
        GridArg::Values => FiltrationGrid::from_complex(fc, steps)?,
        GridArg::Uniform => FiltrationGrid::uniform(0.0, fc.max_value(), steps.unwrap_or(30))?,
    })
}

/// [`hodgetrack_core::track`] with the per-step eigensolves spread over
/// `threads` workers. Results do not depend on the thread count.
pub fn track_parallel(
    fc: &FilteredComplex,
    grid: &FiltrationGrid,
    opts: &TrackOptions,
    threads: usize,
) -> Result<TrajectorySet, PersistenceError> {
    let ts = grid.thresholds();
    let threads = threads.clamp(1, ts.len().max(1));
    let mut slots: Vec<Option<Result<TypedSpectrum, PersistenceError>>> = (0..ts.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let workers: Vec<_> = (0..threads)
            .map(|w| {
                scope.spawn(move || {
                    (w..ts.len())
                        .step_by(threads)
                        .map(|step| {
                            let t = ts[step];
                            let r = step_spectrum(fc, t, opts).map_err(|source| PersistenceError::Step { step, t, source });
                            (step, r)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for worker in workers {
            for (step, r) in worker.join().expect("spectrum worker panicked") {
                slots[step] = Some(r);
            }
        }
    });
    let spectra = slots
        .into_iter()
        .map(|s| s.expect("every step is assigned to a worker"))
        .collect::<Result<Vec<_>, _>>()?;
    link_spectra(fc, grid, &spectra, opts.theta)
}

pub fn track(a: &TrackArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("track");
    m.input(&a.input)?;
    if !(0.0..=1.0).contains(&a.theta) {
        return Err(CliError::Usage(format!("--theta must lie in [0, 1], got {}", a.theta)));
    }
    let loaded = formats::read_complex(&a.input)?;
    let fc = &loaded.complex;
    let grid = track_grid(fc, a.grid, a.steps)?;
    let opts = TrackOptions {
        degree: a.dim,
        budget: a.num,
        theta: a.theta,
        tolerances: Tolerances::default(),
    };
    let threads = a
        .threads
        .or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get);
    m.param("dim", a.dim)
        .param("num", a.num)
        .param("theta", a.theta)
        .param("grid", format!("{:?}", a.grid).to_lowercase())
        .param("steps", grid.len())
        .param("thresholds", grid.thresholds().to_vec());
    let set = track_parallel(fc, &grid, &opts, threads)?;
    write_atomic(&a.out, &formats::trajectory_csv(&set)?)?;
    m.output(&a.out);
    let svg_path = a.svg.clone().unwrap_or_else(|| sibling(&a.out, "svg"));
    write_atomic(&svg_path, svg::trajectory_svg(&set).as_bytes())?;
    m.output(&svg_path);
    if let Some(path) = &a.json {
        write_atomic(path, &formats::json_bytes(&TrajectoryDocument::new(&set))?)?;
        m.output(path);
    }
    m.write(&a.out)?;
    Ok(())
}

// Writes the slice drawing when coordinates allow it. An explicitly requested
// SVG that cannot be drawn is an error; the implicit default is skipped.
fn maybe_svg(
    m: &mut ManifestBuilder,
    requested: Option<&Path>,
    out: &Path,
    slice: &ComplexSlice<'_>,
    points: Option<&PointCloud>,
    degree: usize,
    colors: &[String],
) -> Result<(), CliError> {
    match svg::complex_svg(slice, points, degree, colors) {
        Ok(text) => {
            let path = requested.map_or_else(|| sibling(out, "svg"), Path::to_path_buf);
            write_atomic(&path, text.as_bytes())?;
            m.output(&path);
            Ok(())
        }
        Err(e) if requested.is_none() => {
            log::warn!("no SVG written: {e}");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

pub fn cluster(a: &ClusterArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("cluster");
    m.input(&a.slice.input)?;
    let loaded = formats::read_complex(&a.slice.input)?;
    let t = resolve_threshold(&loaded.complex, a.slice.t)?;
    slice_params(&mut m, &a.slice, t);
    let mode: EigenMode = a.mode.into();
    m.param("mode", mode.as_str())
        .param("num_eigvecs", a.num_eigvecs)
        .param("clusters", a.clusters)
        .param("seed", a.seed)
        .param("kmeans_restarts", 10);
    let slice = sublevel(&loaded.complex, t);
    let assignment = hodge_spectral_clustering(&slice, a.slice.dim, a.num_eigvecs, a.clusters, mode, a.seed)?;
    if assignment.degenerate {
        log::warn!("k-means left a cluster empty or tied; labels are still deterministic");
    }
    write_atomic(&a.out, &formats::labels_csv(&slice, a.slice.dim, &assignment.labels)?)?;
    m.output(&a.out);
    if let Some(path) = &a.nodes {
        let labels = node_clustering(&assignment, &slice);
        write_atomic(path, &formats::node_labels_csv(&slice.vertex_ids(), &labels)?)?;
        m.output(path);
    }
    let colors: Vec<String> = assignment.labels.iter().map(|&l| svg::cluster_color(l).to_owned()).collect();
    let svg_result = maybe_svg(&mut m, a.svg.as_deref(), &a.out, &slice, loaded.points.as_ref(), a.slice.dim, &colors);
    m.write(&a.out)?;
    svg_result
}

pub fn hgc(a: &HgcArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("hgc");
    m.input(&a.slice.input)?;
    if a.num == 0 {
        return Err(CliError::Usage("--num must be at least 1".into()));
    }
    let loaded = formats::read_complex(&a.slice.input)?;
    let t = resolve_threshold(&loaded.complex, a.slice.t)?;
    slice_params(&mut m, &a.slice, t);
    m.param("num", a.num);
    let slice = sublevel(&loaded.complex, t);
    let ops = hodge_operators(&slice, a.slice.dim)?;
    let spectrum = spectrum_of(&ops, EigenCount::Smallest(a.num), &Tolerances::default())?;
    let triples = hgc_from_spectrum(&spectrum, ops.size());
    write_atomic(&a.out, &formats::hgc_csv(&slice, a.slice.dim, &triples)?)?;
    m.output(&a.out);
    let colors: Vec<String> = triples.iter().map(svg::hgc_color).collect();
    let svg_result = maybe_svg(&mut m, a.svg.as_deref(), &a.out, &slice, loaded.points.as_ref(), a.slice.dim, &colors);
    m.write(&a.out)?;
    svg_result
}

pub fn boundary(a: &BoundaryArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::new("boundary");
    m.input(&a.slice.input)?;
    let loaded = formats::read_complex(&a.slice.input)?;
    let t = resolve_threshold(&loaded.complex, a.slice.t)?;
    slice_params(&mut m, &a.slice, t);
    let slice = sublevel(&loaded.complex, t);
    let b = boundary_matrix(&slice, a.slice.dim)?;
    write_atomic(&a.out, &formats::boundary_csv(&b)?)?;
    m.output(&a.out).write(&a.out)?;
    Ok(())
}

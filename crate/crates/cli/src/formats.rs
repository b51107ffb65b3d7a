//! Readers and writers for every file the command line touches.
//!
//! Writers render to bytes; [`crate::output::write_atomic`] puts them on
//! disk. Floats go through Rust's shortest round-trip formatting, so reading
//! a file back reproduces the values bit for bit.

use std::fs;
use std::path::Path;

use hodgetrack_core::analysis::HgcTriple;
use hodgetrack_core::{
    ComplexSlice, EigenKind, FilteredComplex, PointCloud, Simplex, SparseSignMatrix,
    TrajectorySet, Triangulation, TypedSpectrum,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    fill(&mut w).map_err(|e| CliError::Serialize(e.to_string()))?;
    w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        kind => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

// ---------------------------------------------------------------- points

/// Reads a headerless CSV with one `x,y` or `x,y,z` point per line.
pub fn read_points(path: &Path) -> Result<PointCloud, CliError> {
    let bytes = read_bytes(path)?;
    parse_points(path, &bytes)
}

pub fn parse_points(path: &Path, bytes: &[u8]) -> Result<PointCloud, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if let Some(first) = rows.first() {
            if record.len() != first.len() {
                return Err(parse_err(format!(
                    "expected {} coordinates, found {}",
                    first.len(),
                    record.len()
                )));
            }
        }
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(format!("not a number: {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(PointCloud::from_rows(&rows)?)
}

pub fn points_csv(cloud: &PointCloud) -> Vec<u8> {
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// `vertex,component` rows for generated clouds.
pub fn generator_labels_csv(labels: &[usize]) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        w.write_record(["vertex", "component"])?;
        for (v, l) in labels.iter().enumerate() {
            w.write_record([v.to_string(), l.to_string()])?;
        }
        Ok(())
    })
}

// --------------------------------------------------------------- complex

/// On-disk form of a filtered complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub simplices: Vec<Vec<u32>>,
    pub values: Vec<f64>,
    /// Vertex coordinates, when the complex came from a point cloud.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

/// A validated complex plus the coordinates it was built from, if known.
#[derive(Debug, Clone)]
pub struct LoadedComplex {
    pub complex: FilteredComplex,
    pub points: Option<PointCloud>,
}

impl ComplexDocument {
    pub fn from_complex(fc: &FilteredComplex, points: Option<&PointCloud>) -> Self {
        let (simplices, values) = fc.iter().map(|(s, v)| (s.vertices().to_vec(), v)).unzip();
        Self {
            simplices,
            values,
            points: points.map(|c| c.points().map(<[f64]>::to_vec).collect()),
        }
    }

    pub fn from_triangulation(tri: &Triangulation, fc: &FilteredComplex) -> Self {
        Self::from_complex(fc, Some(&tri.points))
    }

    /// Validates closure and monotonicity; vertices may be left out entirely,
    /// in which case they enter at 0.
    pub fn into_complex(self, path: &Path) -> Result<LoadedComplex, CliError> {
        let format = |message: String| CliError::Format {
            path: path.to_path_buf(),
            message,
        };
        if self.simplices.len() != self.values.len() {
            return Err(format(format!(
                "{} simplices but {} values",
                self.simplices.len(),
                self.values.len()
            )));
        }
        let entries = self
            .simplices
            .into_iter()
            .zip(self.values)
            .map(|(s, v)| Ok((Simplex::new(s)?, v)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let complex = FilteredComplex::with_implied_vertices(entries)?;
        let points = match self.points {
            None => None,
            Some(rows) => {
                let cloud = PointCloud::from_rows(&rows)?;
                if let Some(v) = complex.simplices(0).last() {
                    if v.vertices()[0] as usize >= cloud.len() {
                        return Err(format(format!(
                            "vertex {} has no coordinates ({} points given)",
                            v.vertices()[0],
                            cloud.len()
                        )));
                    }
                }
                Some(cloud)
            }
        };
        Ok(LoadedComplex { complex, points })
    }
}

pub fn read_complex(path: &Path) -> Result<LoadedComplex, CliError> {
    let bytes = read_bytes(path)?;
    let doc: ComplexDocument = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    doc.into_complex(path)
}

pub fn complex_json(doc: &ComplexDocument) -> Result<Vec<u8>, CliError> {
    json_bytes(doc)
}

pub(crate) fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// -------------------------------------------------------------- spectrum

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub degree: usize,
    pub threshold: f64,
    pub size: usize,
    pub lambda_max: f64,
    pub counts: KindCounts,
    pub pairs: Vec<PairDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub harmonic: usize,
    pub gradient: usize,
    pub curl: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDocument {
    pub lambda: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub residual_up: f64,
    pub residual_down: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

impl SpectrumDocument {
    pub fn new(spectrum: &TypedSpectrum, size: usize, vectors: bool) -> Self {
        Self {
            degree: spectrum.degree,
            threshold: spectrum.threshold,
            size,
            lambda_max: spectrum.lambda_max,
            counts: KindCounts {
                harmonic: spectrum.count(EigenKind::Harmonic),
                gradient: spectrum.count(EigenKind::Gradient),
                curl: spectrum.count(EigenKind::Curl),
            },
            pairs: spectrum
                .pairs
                .iter()
                .map(|p| PairDocument {
                    lambda: p.lambda,
                    kind: p.kind.as_str().to_owned(),
                    residual_up: p.residual_up,
                    residual_down: p.residual_down,
                    vector: vectors.then(|| p.vector.clone()),
                })
                .collect(),
        }
    }
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumDocument, CliError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

// -------------------------------------------------------------- boundary

/// `row,col,sign` triplets sorted by column.
pub fn boundary_csv(b: &SparseSignMatrix) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        w.write_record(["row", "col", "sign"])?;
        for (r, c, s) in b.triplets() {
            w.write_record([r.to_string(), c.to_string(), s.to_string()])?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------- trajectories

/// One row of the trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub trajectory_id: usize,
    pub step: usize,
    pub t: f64,
    pub lambda: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub pes_prev: Option<f64>,
}

pub fn trajectory_rows(set: &TrajectorySet) -> Vec<TrajectoryRow> {
    set.trajectories
        .iter()
        .flat_map(|tr| {
            tr.points.iter().map(move |p| TrajectoryRow {
                trajectory_id: tr.id,
                step: p.step,
                t: set.thresholds[p.step],
                lambda: p.lambda,
                kind: p.kind.as_str().to_owned(),
                pes_prev: p.pes_prev,
            })
        })
        .collect()
}

pub fn trajectory_csv(set: &TrajectorySet) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        if set.is_empty() {
            w.write_record(["trajectory_id", "step", "t", "lambda", "type", "pes_prev"])?;
        }
        for row in trajectory_rows(set) {
            w.serialize(row)?;
        }
        Ok(())
    })
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let bytes = read_bytes(path)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    reader.deserialize().map(|r| r.map_err(|e| csv_error(path, e))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub degree: usize,
    pub thresholds: Vec<f64>,
    pub trajectories: Vec<TrajectoryEntry>,
    /// Argmax ties resolved by index, per consecutive step pair.
    pub matching_ties: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub id: usize,
    pub birth: usize,
    /// Last step reached; `null` when the trajectory is open at the end.
    pub death: Option<usize>,
    pub dominant_type: String,
    pub type_changes: Vec<usize>,
    pub points: Vec<TrajectoryRow>,
}

impl TrajectoryDocument {
    pub fn new(set: &TrajectorySet) -> Self {
        let rows = trajectory_rows(set);
        let mut rows = rows.into_iter().peekable();
        let trajectories = set
            .trajectories
            .iter()
            .map(|tr| {
                let mut points = Vec::with_capacity(tr.points.len());
                while let Some(r) = rows.next_if(|r| r.trajectory_id == tr.id) {
                    points.push(r);
                }
                TrajectoryEntry {
                    id: tr.id,
                    birth: tr.birth(),
                    death: tr.death,
                    dominant_type: tr.dominant_kind().as_str().to_owned(),
                    type_changes: tr.type_changes(),
                    points,
                }
            })
            .collect();
        Self {
            degree: set.degree,
            thresholds: set.thresholds.clone(),
            trajectories,
            matching_ties: set.matchings.iter().map(|m| m.ties).collect(),
        }
    }
}

// ---------------------------------------------------------------- labels

fn vertex_header(degree: usize) -> Vec<String> {
    (0..=degree).map(|i| format!("v{i}")).collect()
}

/// `v0,…,vn,label` per n-simplex of the slice.
pub fn labels_csv(slice: &ComplexSlice<'_>, degree: usize, labels: &[usize]) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        let mut header = vertex_header(degree);
        header.push("label".into());
        w.write_record(&header)?;
        for (s, l) in slice.simplices(degree).zip(labels) {
            let mut row: Vec<String> = s.vertices().iter().map(u32::to_string).collect();
            row.push(l.to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// `vertex,label` with an empty label for vertices outside every n-simplex.
pub fn node_labels_csv(vertices: &[u32], labels: &[Option<usize>]) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        w.write_record(["vertex", "label"])?;
        for (v, l) in vertices.iter().zip(labels) {
            w.write_record([v.to_string(), l.map(|l| l.to_string()).unwrap_or_default()])?;
        }
        Ok(())
    })
}

/// `v0,…,vn,harmonic,gradient,curl` per n-simplex.
pub fn hgc_csv(slice: &ComplexSlice<'_>, degree: usize, triples: &[HgcTriple]) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        let mut header = vertex_header(degree);
        header.extend(["harmonic", "gradient", "curl"].map(String::from));
        w.write_record(&header)?;
        for (s, t) in slice.simplices(degree).zip(triples) {
            let mut row: Vec<String> = s.vertices().iter().map(u32::to_string).collect();
            row.extend([t.harmonic, t.gradient, t.curl].map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Reads an HGC CSV back into (vertices, triple) pairs.
pub fn read_hgc_csv(path: &Path) -> Result<Vec<(Vec<u32>, HgcTriple)>, CliError> {
    let bytes = read_bytes(path)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() < 4 {
            return Err(bad(format!("expected at least 4 fields, found {}", record.len())));
        }
        let split = record.len() - 3;
        let vertices = record
            .iter()
            .take(split)
            .map(|f| f.parse::<u32>().map_err(|_| bad(format!("bad vertex id {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let x = record
            .iter()
            .skip(split)
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("not a number: {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((
            vertices,
            HgcTriple {
                harmonic: x[0],
                gradient: x[1],
                curl: x[2],
            },
        ));
    }
    Ok(out)
}

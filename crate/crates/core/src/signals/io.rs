//! Recording and feature-matrix files.
//!
//! A matrix is stored as raw little-endian `f32`, row-major, in `name.bin`
//! with a TOML sidecar `name.toml` describing its shape and provenance.
//! Recordings have one row per channel; feature matrices one row per example.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learn::{Dataset, ExampleMeta, LabeledExample};
use crate::scalar::Scalar;

use super::{SourceTag, TimeSeries};

pub const MATRIX_FORMAT: &str = "f32le";

/// Row-major `f32` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::Schema(format!("{} values do not form a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Recording,
    Features,
}

/// Sidecar contents. Fields unused by a kind are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<String>,
    /// SHA-256 of the binary file, hex encoded; checked on read when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub row_labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schema: Vec<String>,
    /// Affect ratings such as `valence = 6.2`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub row_meta: Vec<ExampleMeta>,
}

impl Sidecar {
    pub fn blank(kind: MatrixKind, rows: usize, cols: usize) -> Self {
        Self {
            format: MATRIX_FORMAT.into(),
            kind,
            rows,
            cols,
            rate_hz: None,
            subject: None,
            trial: None,
            digest: None,
            channels: Vec::new(),
            class_names: Vec::new(),
            row_labels: Vec::new(),
            schema: Vec::new(),
            labels: BTreeMap::new(),
            row_meta: Vec::new(),
        }
    }
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("toml")
}

fn io_ctx(e: std::io::Error, path: &Path) -> Error {
    Error::Io(e).context(path.display().to_string())
}

/// Writes `m` to `bin` and `sidecar` (with the digest filled in) next to it.
pub fn write_matrix(bin: &Path, m: &Matrix, mut sidecar: Sidecar) -> Result<()> {
    let mut bytes = Vec::with_capacity(m.data.len() * 4);
    for &v in &m.data {
        bytes.write_f32::<LE>(v)?;
    }
    sidecar.rows = m.rows;
    sidecar.cols = m.cols;
    sidecar.format = MATRIX_FORMAT.into();
    sidecar.digest = Some(hex::encode(Sha256::digest(&bytes)));
    let text = toml::to_string(&sidecar).map_err(|e| Error::Format(format!("sidecar encoding: {e}")))?;
    let mut f = BufWriter::new(fs::File::create(bin).map_err(|e| io_ctx(e, bin))?);
    f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| io_ctx(e, bin))?;
    let sc = sidecar_path(bin);
    fs::write(&sc, text).map_err(|e| io_ctx(e, &sc))
}

pub fn read_sidecar(bin: &Path) -> Result<Sidecar> {
    let sc = sidecar_path(bin);
    let text = fs::read_to_string(&sc).map_err(|e| io_ctx(e, &sc))?;
    let s: Sidecar = toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", sc.display())))?;
    if s.format != MATRIX_FORMAT {
        return Err(Error::Format(format!("{}: unsupported format {:?}", sc.display(), s.format)));
    }
    Ok(s)
}

pub fn read_matrix(bin: &Path) -> Result<(Matrix, Sidecar)> {
    let s = read_sidecar(bin)?;
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(bin).map_err(|e| io_ctx(e, bin))?)
        .read_to_end(&mut bytes)
        .map_err(|e| io_ctx(e, bin))?;
    let expected = s.rows.checked_mul(s.cols).and_then(|n| n.checked_mul(4));
    if expected != Some(bytes.len()) {
        return Err(Error::Format(format!(
            "{}: {} bytes, sidecar declares {}x{} f32",
            bin.display(),
            bytes.len(),
            s.rows,
            s.cols
        )));
    }
    if let Some(d) = &s.digest {
        if *d != hex::encode(Sha256::digest(&bytes)) {
            return Err(Error::Format(format!("{}: digest mismatch", bin.display())));
        }
    }
    let mut rd = bytes.as_slice();
    let data = (0..s.rows * s.cols).map(|_| rd.read_f32::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
    Ok((Matrix::new(s.rows, s.cols, data)?, s))
}

/// Multichannel recording of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub channels: Vec<String>,
    pub rate_hz: f64,
    pub subject: String,
    pub trial: String,
    pub labels: BTreeMap<String, f64>,
    /// One row per channel.
    pub data: Matrix,
}

impl Recording {
    pub fn new(
        channels: Vec<String>,
        rate_hz: f64,
        subject: impl Into<String>,
        trial: impl Into<String>,
        data: Matrix,
    ) -> Result<Self> {
        if channels.len() != data.rows {
            return Err(Error::Schema(format!("{} channel names for {} rows", channels.len(), data.rows)));
        }
        if !(rate_hz > 0.0) || !rate_hz.is_finite() {
            return Err(Error::param(format!("sampling rate {rate_hz} must be positive")));
        }
        Ok(Self { channels, rate_hz, subject: subject.into(), trial: trial.into(), labels: BTreeMap::new(), data })
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels.iter().position(|c| c == name).ok_or_else(|| {
            Error::Schema(format!("subject {}, trial {}: missing channel {name}", self.subject, self.trial))
        })
    }

    pub fn series<T: Scalar>(&self, row: usize) -> Result<TimeSeries<T>> {
        let tag = SourceTag::new(&self.subject, &self.trial, &self.channels[row]);
        let samples = self.data.row(row).iter().map(|&v| T::of(f64::from(v))).collect();
        TimeSeries::new(samples, T::of(self.rate_hz), tag.clone()).map_err(|e| e.context(tag.to_string()))
    }
}

pub fn write_recording(bin: &Path, rec: &Recording) -> Result<()> {
    let mut s = Sidecar::blank(MatrixKind::Recording, rec.data.rows, rec.data.cols);
    s.rate_hz = Some(rec.rate_hz);
    s.subject = Some(rec.subject.clone());
    s.trial = Some(rec.trial.clone());
    s.channels = rec.channels.clone();
    s.labels = rec.labels.clone();
    write_matrix(bin, &rec.data, s)
}

pub fn read_recording(bin: &Path) -> Result<Recording> {
    let (m, s) = read_matrix(bin)?;
    if s.kind != MatrixKind::Recording {
        return Err(Error::Format(format!("{}: not a recording", bin.display())));
    }
    let rate = s.rate_hz.ok_or_else(|| Error::Format(format!("{}: sidecar lacks rate_hz", bin.display())))?;
    let mut rec = Recording::new(
        s.channels,
        rate,
        s.subject.unwrap_or_default(),
        s.trial.unwrap_or_default(),
        m,
    )
    .map_err(|e| e.context(bin.display().to_string()))?;
    rec.labels = s.labels;
    Ok(rec)
}

/// CSV with a header row; the first column is the sample index, the rest
/// are channels.
pub fn read_csv(path: &Path, rate_hz: f64, subject: &str, trial: &str) -> Result<Recording> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let header = rd.headers().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?.clone();
    if header.len() < 2 {
        return Err(Error::Format(format!("{}: need an index column and at least one channel", path.display())));
    }
    let channels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut cols: Vec<Vec<f32>> = vec![Vec::new(); channels.len()];
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if rec.len() != header.len() {
            return Err(Error::Format(format!("{}: row {} has {} fields", path.display(), line + 2, rec.len())));
        }
        for (c, field) in rec.iter().skip(1).enumerate() {
            let v: f32 = field
                .parse()
                .map_err(|_| Error::Format(format!("{}: row {}: bad value {field:?}", path.display(), line + 2)))?;
            cols[c].push(v);
        }
    }
    let n = cols[0].len();
    let m = Matrix::new(channels.len(), n, cols.concat())?;
    Recording::new(channels, rate_hz, subject, trial, m)
}

/// Writes a recording as CSV readable by [`read_csv`]; values round-trip exactly.
pub fn write_csv(path: &Path, rec: &Recording) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(std::iter::once("index".to_string()).chain(rec.channels.iter().cloned())).map_err(err)?;
    for t in 0..rec.data.cols {
        let row = std::iter::once(t.to_string()).chain((0..rec.data.rows).map(|c| rec.data.row(c)[t].to_string()));
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|e| io_ctx(e, path))
}

/// Stores a dataset as a feature matrix; values are narrowed to f32.
pub fn write_features<T: Scalar>(bin: &Path, data: &Dataset<T>, schema: &[String]) -> Result<()> {
    let width = data.width();
    if !schema.is_empty() && schema.len() != width {
        return Err(Error::Schema(format!("{} schema labels for {width} features", schema.len())));
    }
    let values = data.examples.iter().flat_map(|e| e.features.iter().map(|v| v.as_f64() as f32)).collect();
    let m = Matrix::new(data.len(), width, values)?;
    let mut s = Sidecar::blank(MatrixKind::Features, m.rows, m.cols);
    s.class_names = data.class_names.clone();
    s.row_labels = data.examples.iter().map(|e| e.label).collect();
    s.row_meta = data.examples.iter().map(|e| e.meta.clone()).collect();
    s.schema = schema.to_vec();
    write_matrix(bin, &m, s)
}

pub fn read_features<T: Scalar>(bin: &Path) -> Result<(Dataset<T>, Vec<String>)> {
    let (m, s) = read_matrix(bin)?;
    if s.kind != MatrixKind::Features {
        return Err(Error::Format(format!("{}: not a feature matrix", bin.display())));
    }
    if s.row_labels.len() != m.rows || (!s.row_meta.is_empty() && s.row_meta.len() != m.rows) {
        return Err(Error::Format(format!("{}: row annotations do not match {} rows", bin.display(), m.rows)));
    }
    let examples = (0..m.rows)
        .map(|r| LabeledExample {
            features: m.row(r).iter().map(|&v| T::of(f64::from(v))).collect(),
            label: s.row_labels[r],
            meta: s.row_meta.get(r).cloned().unwrap_or_default(),
        })
        .collect();
    let d = Dataset::new(examples, s.class_names).map_err(|e| e.context(bin.display().to_string()))?;
    Ok((d, s.schema))
}

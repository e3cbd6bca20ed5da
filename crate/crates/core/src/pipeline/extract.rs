use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{descriptor_values, Descriptor};
use crate::embedding::delay_embed;
use crate::error::{Error, Result};
use crate::homology::{rips_persistence, PersistenceDiagram};
use crate::landscapes::{band_features, global_t_max, stack_features, RangeMode};
use crate::learn::{composite_class, split_indices, Dataset, ExampleMeta, LabeledExample};
use crate::signals::io::{read_matrix, read_recording, write_matrix, Matrix, MatrixKind, Recording, Sidecar};
use crate::signals::{band_decompose, segment, zscore, Band, Segment};

use super::config::{DataSource, ExperimentConfig, Task};
use super::synthetic::synthetic_recordings;
use super::subject_seed;

const SYNTH_STREAM: u64 = u64::MAX - 1;

/// Recordings named by the config, in config order.
pub fn load_recordings(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Recording>> {
    match &cfg.data.source {
        DataSource::Synthetic(spec) => synthetic_recordings(spec, crate::learn::derive_seed(seed, SYNTH_STREAM)),
        DataSource::Recordings { paths } => paths
            .iter()
            .map(|p| read_recording(p).map_err(|e| e.context(p.display().to_string())))
            .collect(),
    }
}

/// Configured channel order, or every channel of the first recording.
pub fn resolve_channels(cfg: &ExperimentConfig, recs: &[Recording]) -> Result<Vec<String>> {
    if !cfg.data.channels.is_empty() {
        return Ok(cfg.data.channels.clone());
    }
    recs.first()
        .map(|r| r.channels.clone())
        .ok_or_else(|| Error::EmptyResult("no recordings".into()))
}

/// Class of a recording under `task`; a missing rating is a schema error.
pub fn task_label(rec: &Recording, task: Task, threshold: f64) -> Result<usize> {
    let scores = task
        .keys()
        .iter()
        .map(|&k| {
            rec.labels.get(k).copied().ok_or_else(|| {
                Error::Schema(format!("subject {}, trial {}: no `{k}` rating", rec.subject, rec.trial))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    composite_class(&scores, threshold)
}

/// Per-segment results for every recording, channel and band, indexed
/// `[recording][channel][band][segment]`.
pub type SegmentGrid<R> = Vec<Vec<Vec<Vec<R>>>>;

/// Band-decomposes and segments every (recording, channel) and applies `f`
/// to each segment. Units run in parallel; results keep input order.
pub fn map_segments<R, F>(
    recs: &[Recording],
    channels: &[String],
    cfg: &ExperimentConfig,
    window_s: f64,
    f: F,
) -> Result<SegmentGrid<R>>
where
    R: Send,
    F: Fn(&Segment<f64>) -> Result<R> + Sync,
{
    let units: Vec<(usize, usize)> = (0..recs.len()).flat_map(|r| (0..channels.len()).map(move |c| (r, c))).collect();
    let done: Vec<Result<Vec<Vec<R>>>> = units
        .par_iter()
        .map(|&(r, c)| {
            let rec = &recs[r];
            let row = rec.channel_index(&channels[c])?;
            let ts = rec.series::<f64>(row)?;
            let tag = ts.meta().to_string();
            let bands = band_decompose(&ts, &cfg.signal.bands).map_err(|e| e.context(tag.clone()))?;
            Band::ALL
                .iter()
                .map(|&band| {
                    let segs = segment(bands.get(band), window_s, cfg.signal.overlap)
                        .map_err(|e| e.context(format!("{tag}, band {band}")))?;
                    segs.into_par_iter()
                        .enumerate()
                        .map(|(i, mut seg)| {
                            seg.band = Some(band);
                            if cfg.signal.zscore {
                                zscore(&mut seg);
                            }
                            f(&seg).map_err(|e| e.context(format!("{tag}, band {band}, segment {i}")))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut grid: SegmentGrid<R> = Vec::with_capacity(recs.len());
    let mut it = done.into_iter();
    for _ in recs {
        grid.push((0..channels.len()).map(|_| it.next().expect("one result per unit")).collect::<Result<_>>()?);
    }
    Ok(grid)
}

/// Rows of one subject with their origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFeatures {
    pub subject: String,
    pub rows: Vec<Vec<f64>>,
    pub meta: Vec<ExampleMeta>,
}

/// Full feature matrices (every channel, every band) per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: Vec<String>,
    pub subjects: Vec<SubjectFeatures>,
}

impl FeatureTable {
    /// Columns whose label satisfies `keep`.
    pub fn columns(&self, keep: impl Fn(&str) -> bool) -> Vec<usize> {
        self.schema.iter().enumerate().filter(|(_, s)| keep(s)).map(|(i, _)| i).collect()
    }

    /// Labelled dataset of subject `s` restricted to `cols`.
    pub fn dataset(&self, s: usize, cols: &[usize], recs: &[Recording], task: Task, threshold: f64) -> Result<Dataset<f64>> {
        let sub = &self.subjects[s];
        let labels: Vec<usize> = recs.iter().map(|r| task_label(r, task, threshold)).collect::<Result<_>>()?;
        let examples = sub
            .rows
            .iter()
            .zip(&sub.meta)
            .map(|(row, meta)| LabeledExample {
                features: cols.iter().map(|&c| row[c]).collect(),
                label: labels[meta.trial],
                meta: meta.clone(),
            })
            .collect();
        Dataset::new(examples, task.class_names())
    }
}

/// Recording indices per subject, subjects sorted by name.
pub fn subjects(recs: &[Recording]) -> Vec<(String, Vec<usize>)> {
    let mut by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in recs.iter().enumerate() {
        by.entry(r.subject.as_str()).or_default().push(i);
    }
    by.into_iter().map(|(s, v)| (s.to_string(), v)).collect()
}

/// Which per-segment computation fills the feature table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Landscape,
    Descriptors,
}

/// Schema label of a descriptor column.
pub fn descriptor_label(channel: &str, band: Band, value: &str) -> String {
    format!("{channel}/{band}/{value}")
}

/// Builds the full feature table for one window length, reusing a cached
/// copy under `cache_dir` when the inputs match.
pub fn feature_table(
    cfg: &ExperimentConfig,
    recs: &[Recording],
    channels: &[String],
    window_s: f64,
    kind: FeatureKind,
    seed: u64,
    cache_dir: Option<&Path>,
) -> Result<FeatureTable> {
    let key = cache_key(cfg, channels, window_s, kind, seed)?;
    let subs = subjects(recs);
    if let Some(dir) = cache_dir {
        if let Some(t) = read_cache(dir, &key, &subs)? {
            return Ok(t);
        }
    }
    let table = match kind {
        FeatureKind::Landscape => landscape_table(cfg, recs, channels, window_s, seed, &subs)?,
        FeatureKind::Descriptors => descriptor_table(cfg, recs, channels, window_s, &subs)?,
    };
    if let Some(dir) = cache_dir {
        write_cache(dir, &key, &table)?;
    }
    Ok(table)
}

fn landscape_table(
    cfg: &ExperimentConfig,
    recs: &[Recording],
    channels: &[String],
    window_s: f64,
    seed: u64,
    subs: &[(String, Vec<usize>)],
) -> Result<FeatureTable> {
    let p = cfg.embedding.for_window(window_s);
    let cap = cfg.features.simplex_cap;
    let diagrams: SegmentGrid<PersistenceDiagram<f64>> = map_segments(recs, channels, cfg, window_s, |seg| {
        let pc = delay_embed(seg, p)?;
        rips_persistence(&pc, &[0, 1, 2], None, cap)
    })?;
    let grid = cfg.features.grid;
    let mut schema = Vec::new();
    let mut out = Vec::with_capacity(subs.len());
    for (s, (subject, trials)) in subs.iter().enumerate() {
        let keys: Vec<(usize, usize)> = trials
            .iter()
            .flat_map(|&r| (0..diagrams[r][0][0].len()).map(move |i| (r, i)))
            .collect();
        let t_max: [Option<f64>; 4] = match cfg.features.range {
            RangeMode::PerSegment => [None; 4],
            RangeMode::Global => {
                let (train, _) = split_indices(keys.len(), &cfg.protocol, subject_seed(seed, s))?;
                let mut t = [None; 4];
                for band in Band::ALL {
                    let th: Vec<f64> = train
                        .iter()
                        .flat_map(|&k| {
                            let (r, i) = keys[k];
                            diagrams[r].iter().map(move |ch| ch[band.index()][i].threshold())
                        })
                        .collect();
                    t[band.index()] = Some(global_t_max(&th).map_err(|e| e.context(format!("subject {subject}")))?);
                }
                t
            }
        };
        let rows: Vec<(Vec<f64>, Vec<String>)> = keys
            .par_iter()
            .map(|&(r, i)| {
                let mut cells = HashMap::new();
                for (c, name) in channels.iter().enumerate() {
                    for band in Band::ALL {
                        let d = &diagrams[r][c][band.index()][i];
                        let tm = t_max[band.index()].unwrap_or_else(|| d.threshold());
                        // A segment collapsed to one point has only zero-length bars.
                        let v = if tm > 0.0 { band_features(d, grid, tm)? } else { vec![0.0; grid] };
                        cells.insert((name.clone(), band), v.into_iter().map(|x| f64::from(x as f32)).collect());
                    }
                }
                let fv = stack_features(&cells, channels, &Band::ALL)?;
                Ok((fv.values, fv.schema.iter().map(|l| l.to_string()).collect()))
            })
            .collect::<Result<_>>()?;
        if schema.is_empty() {
            if let Some((_, s)) = rows.first() {
                schema = s.clone();
            }
        }
        out.push(SubjectFeatures {
            subject: subject.clone(),
            meta: keys.iter().map(|&(r, i)| ExampleMeta { subject: subject.clone(), trial: r, segment: i }).collect(),
            rows: rows.into_iter().map(|(v, _)| v).collect(),
        });
    }
    Ok(FeatureTable { schema, subjects: out })
}

fn descriptor_table(
    cfg: &ExperimentConfig,
    recs: &[Recording],
    channels: &[String],
    window_s: f64,
    subs: &[(String, Vec<usize>)],
) -> Result<FeatureTable> {
    let set = &cfg.baselines.descriptors;
    let params = &cfg.baselines.params;
    let values: SegmentGrid<Vec<f64>> =
        map_segments(recs, channels, cfg, window_s, |seg| descriptor_values(&seg.samples, set, params))?;
    let value_labels: Vec<&str> = set.iter().flat_map(|d| d.labels().iter().copied()).collect();
    let mut schema = Vec::new();
    for ch in channels {
        for band in Band::ALL {
            schema.extend(value_labels.iter().map(|v| descriptor_label(ch, band, v)));
        }
    }
    let subjects = subs
        .iter()
        .map(|(subject, trials)| {
            let mut rows = Vec::new();
            let mut meta = Vec::new();
            for &r in trials {
                for i in 0..values[r][0][0].len() {
                    let row: Vec<f64> = values[r]
                        .iter()
                        .flat_map(|ch| ch.iter().flat_map(|band| band[i].iter().map(|&x| f64::from(x as f32))))
                        .collect();
                    rows.push(row);
                    meta.push(ExampleMeta { subject: subject.clone(), trial: r, segment: i });
                }
            }
            SubjectFeatures { subject: subject.clone(), rows, meta }
        })
        .collect();
    Ok(FeatureTable { schema, subjects })
}

/// Columns of a descriptor.
pub fn descriptor_columns(table: &FeatureTable, d: Descriptor) -> Vec<usize> {
    table.columns(|s| s.rsplit('/').next().is_some_and(|v| d.labels().contains(&v)))
}

#[derive(Serialize)]
struct CacheKey<'a> {
    kind: FeatureKind,
    data: &'a super::config::DataConfig,
    signal: &'a super::config::SignalConfig,
    window_s: f64,
    embedding: crate::embedding::EmbeddingParams,
    features: &'a super::config::FeatureConfig,
    baselines: &'a super::config::BaselineConfig,
    protocol: &'a crate::learn::Protocol,
    channels: &'a [String],
    seed: u64,
}

/// Hex SHA-256 of everything the feature table depends on.
pub fn cache_key(cfg: &ExperimentConfig, channels: &[String], window_s: f64, kind: FeatureKind, seed: u64) -> Result<String> {
    let key = CacheKey {
        kind,
        data: &cfg.data,
        signal: &cfg.signal,
        window_s,
        embedding: cfg.embedding.for_window(window_s),
        features: &cfg.features,
        baselines: &cfg.baselines,
        protocol: &cfg.protocol,
        channels,
        seed,
    };
    let json = serde_json::to_vec(&key).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&json)))
}

fn cache_file(dir: &Path, key: &str, s: usize) -> PathBuf {
    dir.join(format!("{key}-{s:03}.bin"))
}

fn read_cache(dir: &Path, key: &str, subs: &[(String, Vec<usize>)]) -> Result<Option<FeatureTable>> {
    let mut schema = Vec::new();
    let mut out = Vec::with_capacity(subs.len());
    for (s, (subject, _)) in subs.iter().enumerate() {
        let path = cache_file(dir, key, s);
        if !path.is_file() {
            return Ok(None);
        }
        let (m, side) = read_matrix(&path)?;
        if side.kind != MatrixKind::Features || side.row_meta.len() != m.rows || side.subject.as_deref() != Some(subject) {
            return Err(Error::Format(format!("{}: cached features do not match this run", path.display())));
        }
        schema = side.schema;
        out.push(SubjectFeatures {
            subject: subject.clone(),
            rows: (0..m.rows).map(|r| m.row(r).iter().map(|&v| f64::from(v)).collect()).collect(),
            meta: side.row_meta,
        });
    }
    Ok(Some(FeatureTable { schema, subjects: out }))
}

fn write_cache(dir: &Path, key: &str, t: &FeatureTable) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(e).context(dir.display().to_string()))?;
    for (s, sub) in t.subjects.iter().enumerate() {
        let data: Vec<f32> = sub.rows.iter().flat_map(|r| r.iter().map(|&v| v as f32)).collect();
        let m = Matrix::new(sub.rows.len(), t.schema.len(), data)?;
        let mut side = Sidecar::blank(MatrixKind::Features, m.rows, m.cols);
        side.subject = Some(sub.subject.clone());
        side.schema = t.schema.clone();
        side.row_meta = sub.meta.clone();
        write_matrix(&cache_file(dir, key, s), &m, side)?;
    }
    Ok(())
}

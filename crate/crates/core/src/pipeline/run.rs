use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learn::{evaluate, ClassifierSpec, EvalReport};
use crate::signals::io::Recording;
use crate::signals::Band;

use super::config::{ExperimentConfig, ExperimentKind, Task};
use super::extract::{descriptor_columns, feature_table, load_recordings, resolve_channels, FeatureKind, FeatureTable};
use super::subject_seed;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where feature matrices are cached between runs.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectResult {
    pub subject: String,
    pub eval: EvalReport,
}

/// Mean and population standard deviation over subjects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
        Self { mean, std }
    }

    /// `mean/std` in percent, two decimals.
    pub fn cell(&self) -> String {
        format!("{:.2}/{:.2}", self.mean * 100.0, self.std * 100.0)
    }
}

/// Over subjects: CV accuracy and macro scores pooled over each subject's folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub holdout_accuracy: Option<MeanStd>,
}

impl Aggregate {
    pub fn of(subjects: &[SubjectResult]) -> Self {
        let col = |f: &dyn Fn(&EvalReport) -> f64| MeanStd::of(&subjects.iter().map(|s| f(&s.eval)).collect::<Vec<_>>());
        let holdout: Option<Vec<f64>> = subjects.iter().map(|s| s.eval.holdout_accuracy()).collect();
        Self {
            accuracy: col(&|e| e.mean_accuracy),
            precision: col(&|e| e.cv.macro_precision),
            recall: col(&|e| e.cv.macro_recall),
            f1: col(&|e| e.cv.macro_f1),
            holdout_accuracy: holdout.filter(|h| !h.is_empty()).map(|h| MeanStd::of(&h)),
        }
    }
}

/// One (variant, task) evaluation over all subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub variant: String,
    pub task: Task,
    pub classifier: ClassifierSpec,
    pub window_s: f64,
    pub feature_length: usize,
    pub subjects: Vec<SubjectResult>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<String>,
}

/// Rows and columns laid out like the published tables; cells are
/// `mean/std` accuracy in percent unless the column says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    /// Fully resolved config; running it again reproduces this report.
    pub config: ExperimentConfig,
    pub table: Table,
    pub entries: Vec<RunEntry>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Wall clock per stage. Kept apart from the report so reports stay
/// byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<StageTiming>,
    pub total_seconds: f64,
}

struct Stopwatch {
    start: Instant,
    last: Instant,
    stages: Vec<StageTiming>,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Self { start: now, last: now, stages: Vec::new() }
    }

    /// Charges the time since the previous lap to `stage`.
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let dt = (now - self.last).as_secs_f64();
        self.last = now;
        match self.stages.iter_mut().find(|s| s.stage == stage) {
            Some(s) => s.seconds += dt,
            None => self.stages.push(StageTiming { stage: stage.into(), seconds: dt }),
        }
    }

    fn finish(self) -> Timings {
        Timings { total_seconds: self.start.elapsed().as_secs_f64(), stages: self.stages }
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub timings: Timings,
}

fn band_set_name(set: &[Band]) -> String {
    if set.len() == Band::ALL.len() && Band::ALL.iter().all(|b| set.contains(b)) {
        "all".into()
    } else {
        set.iter().map(|b| b.name()).collect::<Vec<_>>().join("+")
    }
}

fn window_name(w: f64) -> String {
    format!("{w}s")
}

/// Columns of `table` for the given channels and bands.
fn landscape_columns(table: &FeatureTable, channels: &[String], bands: &[Band]) -> Vec<usize> {
    table.columns(|label| {
        let mut parts = label.rsplitn(3, '/');
        let (_, band, ch) = (parts.next(), parts.next(), parts.next());
        ch.is_some_and(|c| channels.iter().any(|x| x == c)) && band.is_some_and(|b| bands.iter().any(|x| x.name() == b))
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    recs: &'a [Recording],
    seed: u64,
}

impl Ctx<'_> {
    fn entry(&self, table: &FeatureTable, cols: &[usize], task: Task, spec: &ClassifierSpec, variant: &str, window_s: f64) -> Result<RunEntry> {
        let subjects = (0..table.subjects.len())
            .map(|s| {
                let data = table.dataset(s, cols, self.recs, task, self.cfg.data.label_threshold)?;
                let eval = evaluate(&data, &self.cfg.protocol, spec, subject_seed(self.seed, s))
                    .map_err(|e| e.context(format!("subject {}, task {}", table.subjects[s].subject, task.name())))?;
                Ok(SubjectResult { subject: table.subjects[s].subject.clone(), eval })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RunEntry {
            variant: variant.into(),
            task,
            classifier: *spec,
            window_s,
            feature_length: cols.len(),
            aggregate: Aggregate::of(&subjects),
            subjects,
        })
    }
}

/// Loads data, extracts features, evaluates every variant of the
/// experiment per subject and lays the results out as a table.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let mut sw = Stopwatch::new();
    let recs = load_recordings(cfg, seed)?;
    let channels = resolve_channels(cfg, &recs)?;
    sw.lap("load");

    let ctx = Ctx { cfg, recs: &recs, seed };
    let cache = opts.cache_dir.as_deref();
    let window = cfg.signal.window_s;
    let bands = &cfg.features.bands;
    let tasks = &cfg.data.tasks;
    let mut entries = Vec::new();
    let features = |w: f64, kind: FeatureKind, sw: &mut Stopwatch| {
        let t = feature_table(cfg, &recs, &channels, w, kind, seed, cache);
        sw.lap("features");
        t
    };

    let table = match cfg.experiment {
        ExperimentKind::Exp1 => {
            let ft = features(window, FeatureKind::Landscape, &mut sw)?;
            let cols = landscape_columns(&ft, &channels, bands);
            for spec in &cfg.sweep.classifiers {
                for &task in tasks {
                    entries.push(ctx.entry(&ft, &cols, task, spec, spec.name(), window)?);
                }
            }
            sw.lap("evaluate");
            let variants = cfg.sweep.classifiers.iter().map(|s| s.name().to_string()).collect();
            task_rows("Model evaluation with different classifiers", variants, tasks, &entries)
        }
        ExperimentKind::Exp2 => {
            let ft = features(window, FeatureKind::Landscape, &mut sw)?;
            for set in &cfg.sweep.band_sets {
                let cols = landscape_columns(&ft, &channels, set);
                for &task in tasks {
                    entries.push(ctx.entry(&ft, &cols, task, &cfg.classifier, &band_set_name(set), window)?);
                }
            }
            sw.lap("evaluate");
            let variants = cfg.sweep.band_sets.iter().map(|s| band_set_name(s)).collect();
            task_rows("Performance with different rhythm bands", variants, tasks, &entries)
        }
        ExperimentKind::Exp3 => {
            for &w in &cfg.sweep.windows_s {
                let ft = features(w, FeatureKind::Landscape, &mut sw)?;
                let cols = landscape_columns(&ft, &channels, bands);
                for &task in tasks {
                    entries.push(ctx.entry(&ft, &cols, task, &cfg.classifier, &window_name(w), w)?);
                }
                sw.lap("evaluate");
            }
            let variants = cfg.sweep.windows_s.iter().map(|&w| window_name(w)).collect();
            task_rows("Performance with different temporal windows", variants, tasks, &entries)
        }
        ExperimentKind::Exp4 => {
            let ft = features(window, FeatureKind::Landscape, &mut sw)?;
            let singles = if cfg.sweep.channels.is_empty() { channels.clone() } else { cfg.sweep.channels.clone() };
            for ch in &singles {
                if !channels.contains(ch) {
                    return Err(crate::error::Error::Config(format!("sweep channel {ch} is not among the configured channels")));
                }
                let cols = landscape_columns(&ft, std::slice::from_ref(ch), bands);
                for &task in tasks {
                    entries.push(ctx.entry(&ft, &cols, task, &cfg.classifier, ch, window)?);
                }
            }
            sw.lap("evaluate");
            let mut t = variant_rows("Single channel performance", "channel", &singles, tasks, &entries);
            t.rows.push(TableRow {
                label: "mean".into(),
                cells: tasks
                    .iter()
                    .map(|&task| {
                        let accs: Vec<f64> =
                            entries.iter().filter(|e| e.task == task).map(|e| e.aggregate.accuracy.mean).collect();
                        MeanStd::of(&accs).cell()
                    })
                    .collect(),
            });
            t
        }
        ExperimentKind::Exp5 => {
            let ft = features(window, FeatureKind::Landscape, &mut sw)?;
            let cols = landscape_columns(&ft, &channels, bands);
            for &task in &cfg.sweep.multiclass_tasks {
                entries.push(ctx.entry(&ft, &cols, task, &cfg.classifier, cfg.classifier.name(), window)?);
            }
            sw.lap("evaluate");
            Table {
                title: "Multi-class performance".into(),
                corner: "task".into(),
                columns: ["accuracy", "precision", "recall", "f1"].map(String::from).to_vec(),
                rows: entries
                    .iter()
                    .map(|e| {
                        let a = &e.aggregate;
                        TableRow {
                            label: e.task.name().into(),
                            cells: vec![a.accuracy.cell(), a.precision.cell(), a.recall.cell(), a.f1.cell()],
                        }
                    })
                    .collect(),
            }
        }
        ExperimentKind::Baselines => {
            let dt = features(window, FeatureKind::Descriptors, &mut sw)?;
            let ft = features(window, FeatureKind::Landscape, &mut sw)?;
            let mut variants = Vec::new();
            for &d in &cfg.baselines.descriptors {
                let band_cols = landscape_columns(&dt, &channels, bands);
                let cols: Vec<usize> = descriptor_columns(&dt, d).into_iter().filter(|c| band_cols.contains(c)).collect();
                for &task in tasks {
                    entries.push(ctx.entry(&dt, &cols, task, &cfg.classifier, d.name(), window)?);
                }
                variants.push(d.name().to_string());
            }
            let cols = landscape_columns(&ft, &channels, bands);
            for &task in tasks {
                entries.push(ctx.entry(&ft, &cols, task, &cfg.classifier, "topological", window)?);
            }
            variants.push("topological".into());
            sw.lap("evaluate");
            variant_rows("Comparison with nonlinear dynamics descriptors", "descriptor", &variants, tasks, &entries)
        }
    };

    let mut resolved = cfg.clone();
    resolved.seed = Some(seed);
    let report = RunReport { experiment: cfg.experiment, config: resolved, table, entries };
    sw.lap("report");
    Ok(RunOutput { report, timings: sw.finish() })
}

fn cell_for(entries: &[RunEntry], variant: &str, task: Task) -> String {
    entries
        .iter()
        .find(|e| e.variant == variant && e.task == task)
        .map(|e| e.aggregate.accuracy.cell())
        .unwrap_or_default()
}

/// Tasks down, variants across.
fn task_rows(title: &str, variants: Vec<String>, tasks: &[Task], entries: &[RunEntry]) -> Table {
    Table {
        title: title.into(),
        corner: "task".into(),
        rows: tasks
            .iter()
            .map(|&t| TableRow { label: t.name().into(), cells: variants.iter().map(|v| cell_for(entries, v, t)).collect() })
            .collect(),
        columns: variants,
    }
}

/// Variants down, tasks across.
fn variant_rows(title: &str, corner: &str, variants: &[String], tasks: &[Task], entries: &[RunEntry]) -> Table {
    Table {
        title: title.into(),
        corner: corner.into(),
        columns: tasks.iter().map(|t| t.name().to_string()).collect(),
        rows: variants
            .iter()
            .map(|v| TableRow { label: v.clone(), cells: tasks.iter().map(|&t| cell_for(entries, v, t)).collect() })
            .collect(),
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineParams, Descriptor};
use crate::embedding::EmbeddingParams;
use crate::error::{Error, Result};
use crate::homology::DEFAULT_SIMPLEX_CAP;
use crate::landscapes::{RangeMode, DEFAULT_GRID};
use crate::learn::{ClassifierSpec, Protocol, RfParams};
use crate::signals::{Band, BandTable};

/// Reads a TOML file into a generic table.
pub fn read_toml(path: &Path) -> Result<toml::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Classifier sweep.
    Exp1,
    /// Rhythm band ablation.
    Exp2,
    /// Window length sweep.
    Exp3,
    /// One channel at a time.
    Exp4,
    /// Four and eight class tasks.
    Exp5,
    /// Nonlinear descriptors against the topological features.
    Baselines,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.to_string())
            .try_into()
            .map_err(|_| Error::Config(format!("unknown experiment `{s}` (exp1..exp5, baselines)")))
    }
}

/// What a segment's label is derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Valence,
    Arousal,
    Dominance,
    /// Valence and arousal, four classes.
    Quad,
    /// Valence, arousal and dominance, eight classes.
    Octant,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Valence => "valence",
            Task::Arousal => "arousal",
            Task::Dominance => "dominance",
            Task::Quad => "quad",
            Task::Octant => "octant",
        }
    }

    /// Label keys read from a recording, in bit order.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Task::Valence => &["valence"],
            Task::Arousal => &["arousal"],
            Task::Dominance => &["dominance"],
            Task::Quad => &["valence", "arousal"],
            Task::Octant => &["valence", "arousal", "dominance"],
        }
    }

    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::Valence => vec!["LV".into(), "HV".into()],
            Task::Arousal => vec!["LA".into(), "HA".into()],
            Task::Dominance => vec!["LD".into(), "HD".into()],
            Task::Quad => (0..4).map(|c| crate::learn::class_name(c, 2)).collect(),
            Task::Octant => (0..8).map(|c| crate::learn::class_name(c, 3)).collect(),
        }
    }
}

/// Synthetic stand-in data. Each class is a bit pattern: bit 0 swaps the
/// noisy sine for a phase-randomized surrogate of one, bit 1 switches to
/// `alt_freq_hz`, bit 2 doubles the amplitude. Label scores are 8 for a set
/// bit and 2 otherwise, in the order valence, arousal, dominance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub subjects: usize,
    pub channels: usize,
    pub classes: usize,
    pub trials_per_class: usize,
    pub rate_hz: f64,
    pub trial_s: f64,
    pub freq_hz: f64,
    pub alt_freq_hz: f64,
    pub amplitude: f64,
    pub noise_std: f64,
    /// Half-width of the spectral smoothing applied to surrogates.
    pub smooth_hz: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        // 19 s trials give 25 one-second windows at 25% overlap, so eight
        // trials make 200 segments per class.
        Self {
            subjects: 1,
            channels: 1,
            classes: 2,
            trials_per_class: 8,
            rate_hz: 128.0,
            trial_s: 19.0,
            freq_hz: 10.0,
            alt_freq_hz: 20.0,
            amplitude: 1.0,
            noise_std: 0.5,
            smooth_hz: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    /// Recording files (binary matrix plus sidecar).
    Recordings { paths: Vec<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// Channel selection and order; empty means all channels of the first
    /// recording.
    #[serde(default)]
    pub channels: Vec<String>,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    /// Scores strictly above this are "high".
    #[serde(default = "default_label_threshold")]
    pub label_threshold: f64,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Valence]
}

fn default_label_threshold() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalConfig {
    pub bands: BandTable,
    pub window_s: f64,
    /// Fraction of a window shared with the next one.
    pub overlap: f64,
    /// Standardize each segment before embedding.
    pub zscore: bool,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self { bands: BandTable::default(), window_s: 1.0, overlap: 0.25, zscore: false }
    }
}

/// Embedding parameters by window length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingConfig {
    pub long: EmbeddingParams,
    pub short: EmbeddingParams,
    /// Windows shorter than this use `short`.
    pub short_below_s: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            long: EmbeddingParams { dim: 8, lag: 10 },
            short: EmbeddingParams { dim: 3, lag: 5 },
            short_below_s: 1.0,
        }
    }
}

impl EmbeddingConfig {
    pub fn for_window(&self, window_s: f64) -> EmbeddingParams {
        if window_s < self.short_below_s {
            self.short
        } else {
            self.long
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub grid: usize,
    pub range: RangeMode,
    pub simplex_cap: usize,
    /// Bands stacked into the feature vector, in canonical order.
    pub bands: Vec<Band>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, range: RangeMode::Global, simplex_cap: DEFAULT_SIMPLEX_CAP, bands: Band::ALL.to_vec() }
    }
}

/// Lists the sweeping experiments iterate over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub classifiers: Vec<ClassifierSpec>,
    pub band_sets: Vec<Vec<Band>>,
    pub windows_s: Vec<f64>,
    /// Channels tried alone; empty means every configured channel.
    pub channels: Vec<String>,
    pub multiclass_tasks: Vec<Task>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            classifiers: vec![ClassifierSpec::Gnb, ClassifierSpec::Knn { k: 5 }, ClassifierSpec::RandomForest(RfParams::default())],
            band_sets: vec![vec![Band::Theta], vec![Band::Alpha], vec![Band::Beta], vec![Band::Gamma], Band::ALL.to_vec()],
            windows_s: vec![0.5, 1.0, 2.0, 3.0, 4.0],
            channels: Vec::new(),
            multiclass_tasks: vec![Task::Quad, Task::Octant],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub params: BaselineParams,
    pub descriptors: Vec<Descriptor>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { params: BaselineParams::default(), descriptors: Descriptor::ALL.to_vec() }
    }
}

/// Everything a run depends on. Serializing a parsed config gives the fully
/// resolved form, with every default written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    pub data: DataConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses and validates a TOML file; relative recording paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_value(read_toml(path)?, path.parent().unwrap_or(Path::new(".")))
            .map_err(|e| e.context(path.display().to_string()))
    }

    /// Builds and validates a config from an already parsed (and possibly
    /// edited) TOML table. Relative recording paths resolve against `base`.
    pub fn from_toml_value(value: toml::Value, base: &Path) -> Result<Self> {
        let mut cfg: Self = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let DataSource::Recordings { paths } = &mut cfg.data.source {
            for p in paths.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("no seed given".into()))
    }

    /// Range and existence checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.data.source {
            DataSource::Synthetic(s) => {
                if s.subjects == 0 || s.channels == 0 || s.trials_per_class == 0 {
                    return bad("synthetic subjects, channels and trials_per_class must be positive".into());
                }
                if !(1..=8).contains(&s.classes) {
                    return bad(format!("synthetic classes {} outside 1..=8", s.classes));
                }
                if !(s.rate_hz > 0.0) || !(s.trial_s > 0.0) || !(s.noise_std >= 0.0) || !(s.smooth_hz >= 0.0) {
                    return bad("synthetic rate, trial length, noise and smoothing must be positive".into());
                }
                for f in [s.freq_hz, s.alt_freq_hz] {
                    if !(f > 0.0 && f < s.rate_hz / 2.0) {
                        return bad(format!("synthetic frequency {f} Hz outside (0, {})", s.rate_hz / 2.0));
                    }
                }
            }
            DataSource::Recordings { paths } => {
                if paths.is_empty() {
                    return bad("no recording paths".into());
                }
                if let Some(p) = paths.iter().find(|p| !p.is_file()) {
                    return bad(format!("recording {} does not exist", p.display()));
                }
            }
        }
        if self.data.tasks.is_empty() {
            return bad("no tasks".into());
        }
        if !self.data.label_threshold.is_finite() {
            return bad("label threshold must be finite".into());
        }
        for band in Band::ALL {
            let (lo, hi) = self.signal.bands.edges(band);
            if !(lo > 0.0 && lo < hi) {
                return bad(format!("band {} edges ({lo}, {hi}) must satisfy 0 < lo < hi", band.name()));
            }
        }
        let windows: Vec<f64> = if self.experiment == ExperimentKind::Exp3 {
            self.sweep.windows_s.clone()
        } else {
            vec![self.signal.window_s]
        };
        if windows.is_empty() {
            return bad("window sweep is empty".into());
        }
        if let Some(w) = windows.iter().find(|w| !(**w > 0.0)) {
            return bad(format!("window length {w} s must be positive"));
        }
        if !(0.0..1.0).contains(&self.signal.overlap) {
            return bad(format!("overlap {} outside [0, 1)", self.signal.overlap));
        }
        for p in [self.embedding.long, self.embedding.short] {
            EmbeddingParams::new(p.dim, p.lag).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.features.grid < 2 {
            return bad(format!("landscape grid {} must be at least 2", self.features.grid));
        }
        if self.features.bands.is_empty() {
            return bad("no feature bands".into());
        }
        match self.protocol {
            Protocol::SplitThenCv { train_fraction, folds } => {
                if !(train_fraction > 0.0 && train_fraction < 1.0) || folds < 2 {
                    return bad("protocol needs train_fraction in (0, 1) and folds >= 2".into());
                }
            }
            Protocol::Cv { folds } => {
                if folds < 2 {
                    return bad("protocol needs folds >= 2".into());
                }
            }
        }
        for spec in std::iter::once(&self.classifier).chain(&self.sweep.classifiers) {
            match *spec {
                ClassifierSpec::Knn { k } if k == 0 => return bad("kNN needs k >= 1".into()),
                ClassifierSpec::RandomForest(p) if p.trees == 0 || p.min_leaf == 0 => {
                    return bad("random forest needs trees >= 1 and min_leaf >= 1".into())
                }
                _ => {}
            }
        }
        match self.experiment {
            ExperimentKind::Exp1 if self.sweep.classifiers.is_empty() => bad("classifier sweep is empty".into()),
            ExperimentKind::Exp2 if self.sweep.band_sets.iter().any(|s| s.is_empty()) || self.sweep.band_sets.is_empty() => {
                bad("band sweep is empty or has an empty set".into())
            }
            ExperimentKind::Exp5 if self.sweep.multiclass_tasks.is_empty() => bad("multiclass task list is empty".into()),
            ExperimentKind::Baselines if self.baselines.descriptors.is_empty() => bad("no baseline descriptors".into()),
            _ => Ok(()),
        }
    }
}

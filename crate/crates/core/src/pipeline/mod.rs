//! Configuration, synthetic data, feature extraction, experiment
//! orchestration and plot data.

pub mod config;
pub mod extract;
pub mod plot;
pub mod run;
pub mod synthetic;

pub use config::{
    read_toml, BaselineConfig, DataConfig, DataSource, EmbeddingConfig, ExperimentConfig, ExperimentKind, FeatureConfig,
    SignalConfig, SweepConfig, SyntheticSpec, Task,
};
pub use extract::{feature_table, load_recordings, FeatureKind, FeatureTable};
pub use plot::{emit_plotdata, plot_tsv, PlotInput, PlotKind};
pub use run::{run_experiment, Aggregate, MeanStd, RunEntry, RunOptions, RunOutput, RunReport, Table, TableRow, Timings};
pub use synthetic::synthetic_recordings;

/// Seed for everything done on subject `s`: its split, folds and models.
pub fn subject_seed(seed: u64, s: usize) -> u64 {
    crate::learn::derive_seed(seed, s as u64)
}

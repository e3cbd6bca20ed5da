use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use topoeeg::baselines::Descriptor;
use topoeeg::embedding::{ami_curve, fnn_dim, FnnThresholds, DEFAULT_AMI_BINS};
use topoeeg::homology::{rips_persistence, DEFAULT_SIMPLEX_CAP};
use topoeeg::landscapes::landscape;
use topoeeg::learn::{evaluate, load_model, save_model, train, ClassifierSpec, Metrics, Model, Protocol, RfParams};
use topoeeg::pipeline::extract::resolve_channels;
use topoeeg::pipeline::{
    emit_plotdata, feature_table, load_recordings, plot_tsv, read_toml, run_experiment, synthetic_recordings,
    DataSource, ExperimentConfig, FeatureKind, PlotInput, PlotKind, RunOptions, SyntheticSpec, Task,
};
use topoeeg::signals::io::{read_csv, read_features, write_csv, write_features, write_recording};
use topoeeg::Error;

mod input;

#[derive(Parser)]
#[command(name = "topoeeg", version, about = "Topological features and classification for multichannel time series")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write synthetic recordings (binary matrix plus TOML sidecar).
    Synth(SynthArgs),
    /// Convert a CSV recording to the binary format.
    Ingest(IngestArgs),
    /// AMI and FNN curves of one channel, as TSV.
    EmbedDiag(EmbedDiagArgs),
    /// Rips persistence of a point cloud CSV, as TSV.
    Ph(PhArgs),
    /// Persistence landscape of a point cloud CSV, as TSV.
    Landscape(LandscapeArgs),
    /// Extract per-subject feature matrices for a config.
    Extract(ExtractArgs),
    /// Train a classifier on a feature matrix.
    Train(TrainArgs),
    /// Evaluate a classifier on a feature matrix, or score a saved model.
    Eval(EvalArgs),
    /// Run an experiment and write its report as JSON.
    Run(RunArgs),
    /// Dump plot data as TSV.
    EmitPlotdata(PlotArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set signal.window_s=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn load(&self, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut value = read_toml(&self.config)?;
        for s in &self.sets {
            apply_set(&mut value, s)?;
        }
        if let Some(seed) = seed {
            set_path(&mut value, "seed", toml::Value::Integer(seed_as_toml(seed)?))?;
        }
        let base = self.config.parent().unwrap_or(Path::new("."));
        Ok(ExperimentConfig::from_toml_value(value, base).map_err(|e| e.context(self.config.display().to_string()))?)
    }
}

fn seed_as_toml(seed: u64) -> Result<i64> {
    i64::try_from(seed).map_err(|_| Error::Config(format!("seed {seed} does not fit a TOML integer")).into())
}

fn apply_set(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    set_path(root, key.trim(), value)
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| Error::Config(format!("`{key}`: {part} is not a table")))?;
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| Error::Config(format!("`{key}` does not name a table entry")))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[derive(Args)]
struct SynthArgs {
    /// Take the synthetic spec from this config instead of the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    subjects: usize,
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 19.0)]
    trial_s: f64,
    /// Also write each recording as CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    subject: String,
    #[arg(long)]
    trial: String,
    /// Rating such as `valence=6.5`; repeatable.
    #[arg(long = "label", value_name = "KEY=VALUE")]
    labels: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedDiagArgs {
    /// Recording (.bin) or CSV (needs --rate).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
    #[arg(long, default_value_t = DEFAULT_AMI_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 10)]
    max_dim: usize,
    /// Lag for the FNN curve; defaults to the AMI choice.
    #[arg(long)]
    lag: Option<usize>,
    #[arg(long)]
    ami_out: Option<PathBuf>,
    #[arg(long)]
    fnn_out: Option<PathBuf>,
}

#[derive(Args)]
struct PhArgs {
    /// Point cloud CSV, one point per row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Filtration threshold; defaults to the enclosing radius.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// Right end of the grid; defaults to the filtration threshold.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Landscape,
    Descriptors,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "landscape")]
    kind: KindArg,
    /// Comma-separated descriptor names (sampen, apen, fuzzyen, rr, poincare, lyapunov).
    #[arg(long, value_delimiter = ',')]
    descriptors: Vec<String>,
    /// Task whose labels are stored; defaults to the config's first task.
    #[arg(long)]
    task: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Rf,
    Knn,
    Gnb,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value = "rf")]
    classifier: ClassifierArg,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
}

impl ClassifierArgs {
    fn spec(&self) -> ClassifierSpec {
        match self.classifier {
            ClassifierArg::Rf => ClassifierSpec::RandomForest(RfParams {
                trees: self.trees,
                max_depth: self.max_depth,
                min_leaf: self.min_leaf,
                ..RfParams::default()
            }),
            ClassifierArg::Knn => ClassifierSpec::Knn { k: self.k },
            ClassifierArg::Gnb => ClassifierSpec::Gnb,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Split,
    Cv,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    features: PathBuf,
    /// Score this saved model on all rows instead of running a protocol.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "split")]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    seed: u64,
    /// Experiment kind, overriding the config.
    #[arg(long)]
    experiment: Option<String>,
    /// Cache directory for feature matrices.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stage timings (JSON); defaults to `<out>.timings.json` when --out is given.
    #[arg(long)]
    timings: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Barcode,
    Diagram,
    Landscape,
    Ami,
    Fnn,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotArg,
    /// Point cloud CSV for barcode/diagram/landscape; recording or CSV series for ami/fnn.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    grid: usize,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
    #[arg(long, default_value_t = 10)]
    max_dim: usize,
    #[arg(long, default_value_t = 1)]
    lag: usize,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(e).context(p.display().to_string()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = output(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn parse_pair(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("`{s}` is not KEY=VALUE")))?;
    let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("`{s}`: value is not a number")))?;
    Ok((k.trim().to_string(), v))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let spec = match &a.config {
        Some(p) => match ExperimentConfig::load(p)?.data.source {
            DataSource::Synthetic(s) => s,
            DataSource::Recordings { .. } => return Err(Error::Config(format!("{}: data source is not synthetic", p.display())).into()),
        },
        None => SyntheticSpec {
            subjects: a.subjects,
            channels: a.channels,
            classes: a.classes,
            trials_per_class: a.trials,
            trial_s: a.trial_s,
            ..SyntheticSpec::default()
        },
    };
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for rec in synthetic_recordings(&spec, a.seed)? {
        let stem = format!("{}-{}", rec.subject, rec.trial);
        let bin = a.out_dir.join(format!("{stem}.bin"));
        write_recording(&bin, &rec)?;
        if a.csv {
            write_csv(&a.out_dir.join(format!("{stem}.csv")), &rec)?;
        }
        writeln!(std::io::stdout(), "{}", bin.display())?;
    }
    Ok(())
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let mut rec = read_csv(&a.csv, a.rate, &a.subject, &a.trial)?;
    rec.labels = a.labels.iter().map(|s| parse_pair(s)).collect::<Result<BTreeMap<_, _>>>()?;
    write_recording(&a.out, &rec)?;
    eprintln!("{}: {} channels x {} samples", a.out.display(), rec.data.rows, rec.data.cols);
    Ok(())
}

fn embed_diag(a: &EmbedDiagArgs) -> Result<()> {
    let ts = input::read_series(&a.input, a.channel.as_deref(), a.rate)?;
    let ami = ami_curve(ts.samples(), a.max_lag, a.bins)?;
    let lag = a.lag.unwrap_or_else(|| first_local_min(&ami));
    let (dim, fnn) = fnn_dim(&ts, lag, a.max_dim, FnnThresholds::default())?;
    let ami_tsv = plot_tsv(PlotKind::Ami, &PlotInput::Curve(&ami))?;
    let fnn_tsv = plot_tsv(PlotKind::Fnn, &PlotInput::Curve(&fnn))?;
    match (&a.ami_out, &a.fnn_out) {
        (None, None) => write_text(None, &format!("{ami_tsv}\n{fnn_tsv}"))?,
        (ami_out, fnn_out) => {
            if let Some(p) = ami_out {
                write_text(Some(p), &ami_tsv)?;
            }
            if let Some(p) = fnn_out {
                write_text(Some(p), &fnn_tsv)?;
            }
        }
    }
    eprintln!("lag {lag}, dimension {dim}");
    Ok(())
}

/// Lag (1-based) of the first local minimum of an AMI curve, else its last lag.
fn first_local_min(ami: &[f64]) -> usize {
    (1..ami.len().saturating_sub(1)).find(|&i| ami[i] < ami[i - 1] && ami[i] <= ami[i + 1]).map_or(ami.len(), |i| i + 1)
}

fn ph(a: &PhArgs) -> Result<()> {
    let pc = input::read_cloud(&a.input)?;
    let dims: Vec<usize> = (0..=a.max_dim).collect();
    let d = rips_persistence(&pc, &dims, a.threshold, a.cap)?;
    write_text(a.out.as_deref(), &plot_tsv(PlotKind::Diagram, &PlotInput::Diagram(&d))?)
}

fn landscape_cmd(a: &LandscapeArgs) -> Result<()> {
    let pc = input::read_cloud(&a.input)?;
    let d = rips_persistence(&pc, &[0, 1, 2], None, DEFAULT_SIMPLEX_CAP)?;
    let l = landscape(&d, a.dim, a.k, a.grid, a.t_max.unwrap_or(d.threshold()))?;
    write_text(a.out.as_deref(), &plot_tsv(PlotKind::Landscape, &PlotInput::Landscape(&l))?)
}

fn parse_task(s: &str) -> Result<Task> {
    Ok(toml::Value::String(s.to_string())
        .try_into()
        .map_err(|_| Error::Config(format!("unknown task `{s}` (valence, arousal, dominance, quad, octant)")))?)
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let mut cfg = a.config.load(Some(a.seed))?;
    if !a.descriptors.is_empty() {
        cfg.baselines.descriptors = a.descriptors.iter().map(|s| Descriptor::parse(s)).collect::<Result<_, _>>()?;
    }
    let task = match &a.task {
        Some(t) => parse_task(t)?,
        None => cfg.data.tasks[0],
    };
    let kind = match a.kind {
        KindArg::Landscape => FeatureKind::Landscape,
        KindArg::Descriptors => FeatureKind::Descriptors,
    };
    let recs = load_recordings(&cfg, a.seed)?;
    let channels = resolve_channels(&cfg, &recs)?;
    let table = feature_table(&cfg, &recs, &channels, cfg.signal.window_s, kind, a.seed, None)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let all: Vec<usize> = (0..table.schema.len()).collect();
    for (s, sub) in table.subjects.iter().enumerate() {
        let data = table.dataset(s, &all, &recs, task, cfg.data.label_threshold)?;
        let path = a.out_dir.join(format!("{}.bin", sub.subject));
        write_features(&path, &data, &table.schema)?;
        writeln!(std::io::stdout(), "{}\t{} rows\t{} features", path.display(), data.len(), data.width())?;
    }
    Ok(())
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let (data, _) = read_features::<f64>(&a.features)?;
    let model: Model<f64> = train(&a.classifier.spec(), &data, a.seed)?;
    let mut w = BufWriter::new(File::create(&a.out).map_err(|e| Error::Io(e).context(a.out.display().to_string()))?);
    save_model(&model, &mut w)?;
    w.flush()?;
    eprintln!("{}: {} classes, {} features", a.out.display(), model.n_classes(), model.width());
    Ok(())
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    let (data, _) = read_features::<f64>(&a.features)?;
    let json = match &a.model {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::Io(e).context(p.display().to_string()))?;
            let model: Model<f64> = load_model(&mut BufReader::new(f))?;
            let pred = data.examples.iter().map(|e| model.predict(&e.features)).collect::<Result<Vec<_>, _>>()?;
            let truth: Vec<usize> = data.examples.iter().map(|e| e.label).collect();
            serde_json::to_string_pretty(&Metrics::from_predictions(&truth, &pred, data.n_classes()))?
        }
        None => {
            let protocol = match a.protocol {
                ProtocolArg::Split => Protocol::SplitThenCv { train_fraction: a.train_fraction, folds: a.folds },
                ProtocolArg::Cv => Protocol::Cv { folds: a.folds },
            };
            serde_json::to_string_pretty(&evaluate(&data, &protocol, &a.classifier.spec(), a.seed)?)?
        }
    };
    write_text(a.out.as_deref(), &(json + "\n"))
}

fn run_cmd(a: &RunArgs) -> Result<()> {
    let mut cfg = a.config.load(Some(a.seed))?;
    if let Some(e) = &a.experiment {
        cfg.experiment = topoeeg::pipeline::ExperimentKind::parse(e)?;
        cfg.validate()?;
    }
    let out = run_experiment(&cfg, &RunOptions { cache_dir: a.cache.clone() })?;
    write_text(a.out.as_deref(), &out.report.to_json())?;
    let timings_path = a.timings.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("timings.json")));
    let timings = serde_json::to_string_pretty(&out.timings)? + "\n";
    match timings_path {
        Some(p) => write_text(Some(&p), &timings)?,
        None => eprint!("{timings}"),
    }
    Ok(())
}

fn plot_cmd(a: &PlotArgs) -> Result<()> {
    let kind = match a.kind {
        PlotArg::Barcode => PlotKind::Barcode,
        PlotArg::Diagram => PlotKind::Diagram,
        PlotArg::Landscape => PlotKind::Landscape,
        PlotArg::Ami => PlotKind::Ami,
        PlotArg::Fnn => PlotKind::Fnn,
    };
    match kind {
        PlotKind::Barcode | PlotKind::Diagram | PlotKind::Landscape => {
            let pc = input::read_cloud(&a.input)?;
            let d = rips_persistence(&pc, &[0, 1, 2], None, DEFAULT_SIMPLEX_CAP)?;
            if kind == PlotKind::Landscape {
                let l = landscape(&d, a.dim, a.k, a.grid, d.threshold())?;
                emit_plotdata(kind, &PlotInput::Landscape(&l), &a.out)?;
            } else {
                emit_plotdata(kind, &PlotInput::Diagram(&d), &a.out)?;
            }
        }
        PlotKind::Ami => {
            let ts = input::read_series(&a.input, a.channel.as_deref(), a.rate)?;
            emit_plotdata(kind, &PlotInput::Curve(&ami_curve(ts.samples(), a.max_lag, DEFAULT_AMI_BINS)?), &a.out)?;
        }
        PlotKind::Fnn => {
            let ts = input::read_series(&a.input, a.channel.as_deref(), a.rate)?;
            let (_, fnn) = fnn_dim(&ts, a.lag, a.max_dim, FnnThresholds::default())?;
            emit_plotdata(kind, &PlotInput::Curve(&fnn), &a.out)?;
        }
    }
    Ok(())
}

/// 2 for configuration and parameter errors, 3 for data errors, 4 for
/// resource caps, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return if err.chain().any(|c| c.is::<std::io::Error>() || c.is::<serde_json::Error>()) { 3 } else { 1 };
    };
    match e.root() {
        Error::Config(_) | Error::Parameter(_) => 2,
        Error::Resource { .. } => 4,
        Error::Internal(_) => 1,
        _ => 3,
    }
}

/// The error chain joined by `: `, skipping causes whose text the previous
/// message already ends with.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Synth(a) => synth(a),
        Cmd::Ingest(a) => ingest(a),
        Cmd::EmbedDiag(a) => embed_diag(a),
        Cmd::Ph(a) => ph(a),
        Cmd::Landscape(a) => landscape_cmd(a),
        Cmd::Extract(a) => extract(a),
        Cmd::Train(a) => train_cmd(a),
        Cmd::Eval(a) => eval_cmd(a),
        Cmd::Run(a) => run_cmd(a),
        Cmd::EmitPlotdata(a) => plot_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

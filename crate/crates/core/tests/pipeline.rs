use std::path::PathBuf;

use topoeeg::embedding::PointCloud;
use topoeeg::homology::{rips_persistence, PersistenceDiagram, DEFAULT_SIMPLEX_CAP};
use topoeeg::landscapes::landscape;
use topoeeg::pipeline::*;
use topoeeg::signals::io::write_recording;
use topoeeg::Error;

fn small(experiment: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"
experiment = "{experiment}"
seed = 11
[data]
tasks = ["valence"]
[data.source]
kind = "synthetic"
channels = 2
trials_per_class = 3
trial_s = 4.0
{extra}
"#
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

fn rf10() -> &'static str {
    "[classifier]\nkind = \"random_forest\"\ntrees = 10\n"
}

#[test]
fn parsed_config_round_trips_with_defaults_filled() {
    let cfg = small("exp1", "");
    assert_eq!(cfg.embedding.long.dim, 8);
    assert_eq!(cfg.embedding.long.lag, 10);
    assert_eq!(cfg.features.grid, 50);
    let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(again, cfg);
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), cfg);
}

#[test]
fn bad_configs_are_rejected() {
    let unknown = "experiment = \"exp1\"\n[data]\nbogus = 1\n[data.source]\nkind = \"synthetic\"\n";
    assert!(matches!(ExperimentConfig::from_toml_str(unknown), Err(Error::Config(_))));
    assert!(matches!(ExperimentKind::parse("exp9"), Err(Error::Config(_))));

    let mut cfg = small("exp1", "");
    cfg.signal.window_s = 0.0;
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    let mut cfg = small("exp1", "");
    cfg.data.source = DataSource::Recordings { paths: vec![PathBuf::from("/nonexistent/rec.bin")] };
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    let mut cfg = small("exp1", "");
    cfg.seed = None;
    assert!(matches!(run_experiment(&cfg, &RunOptions::default()), Err(Error::Config(_))));
}

#[test]
fn synthetic_recordings_follow_the_spec() {
    let spec = SyntheticSpec { subjects: 2, channels: 3, classes: 8, trials_per_class: 2, trial_s: 2.0, ..Default::default() };
    let recs = synthetic_recordings(&spec, 5).unwrap();
    assert_eq!(recs.len(), 2 * 8 * 2);
    assert!(recs.iter().all(|r| r.data.rows == 3 && r.data.cols == 256));
    let r = &recs[2 * 5]; // subject 1, class 5 = valence and dominance high
    assert_eq!((r.labels["valence"], r.labels["arousal"], r.labels["dominance"]), (8.0, 2.0, 8.0));
    assert_eq!(r.subject, "s01");
    assert_eq!(recs[16].subject, "s02");
    assert_eq!(recs, synthetic_recordings(&spec, 5).unwrap());
    assert_ne!(recs[0].data, synthetic_recordings(&spec, 6).unwrap()[0].data);
}

#[test]
fn feature_lengths_follow_channel_and_band_selection() {
    let cfg = small("exp2", &format!("{}[sweep]\nband_sets = [[\"alpha\"], [\"theta\", \"gamma\"]]\n", rf10()));
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let lens: Vec<usize> = out.report.entries.iter().map(|e| e.feature_length).collect();
    assert_eq!(lens, vec![50 * 2, 100 * 2]);
    assert_eq!(out.report.table.columns, vec!["alpha", "theta+gamma"]);

    let cfg = small("exp4", rf10());
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert!(out.report.entries.iter().all(|e| e.feature_length == 200));
    let labels: Vec<&str> = out.report.table.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, vec!["ch01", "ch02", "mean"]);
}

#[test]
fn reports_are_deterministic_and_replayable() {
    let cfg = small("exp1", "[sweep]\nclassifiers = [{ kind = \"gnb\" }, { kind = \"random_forest\", trees = 10 }]\n");
    let a = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let b = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());

    let replay: RunReport = serde_json::from_str(&a.report.to_json()).unwrap();
    let c = run_experiment(&replay.config, &RunOptions::default()).unwrap();
    assert_eq!(c.report.to_json(), a.report.to_json());

    let t = &a.timings;
    let sum: f64 = t.stages.iter().map(|s| s.seconds).sum();
    assert!((t.total_seconds - sum).abs() <= 0.05 * t.total_seconds, "{t:?}");
    let names: Vec<&str> = t.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(names, vec!["load", "features", "evaluate", "report"]);
}

#[test]
fn cached_features_reproduce_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { cache_dir: Some(dir.path().to_path_buf()) };
    let cfg = small("exp1", "[sweep]\nclassifiers = [{ kind = \"knn\", k = 3 }]\n");
    let fresh = run_experiment(&cfg, &opts).unwrap();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 2, "one matrix and one sidecar");
    let cached = run_experiment(&cfg, &opts).unwrap();
    assert_eq!(fresh.report.to_json(), cached.report.to_json());
    assert_eq!(fresh.report.to_json(), run_experiment(&cfg, &RunOptions::default()).unwrap().report.to_json());
}

#[test]
fn recordings_on_disk_match_in_memory_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("exp1", "[sweep]\nclassifiers = [{ kind = \"gnb\" }]\n");
    let recs = load_recordings(&cfg, cfg.seed.unwrap()).unwrap();
    let mut paths = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let p = dir.path().join(format!("rec{i:02}.bin"));
        write_recording(&p, r).unwrap();
        paths.push(p);
    }
    let mut disk = cfg.clone();
    disk.data.source = DataSource::Recordings { paths };
    let a = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let b = run_experiment(&disk, &RunOptions::default()).unwrap();
    assert_eq!(a.report.entries, b.report.entries);
}

#[test]
fn data_errors_name_their_source() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("exp1", "");
    let mut recs = load_recordings(&cfg, 1).unwrap();
    recs.truncate(2);
    recs[1].labels.remove("valence");
    let mut paths = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let p = dir.path().join(format!("r{i}.bin"));
        write_recording(&p, r).unwrap();
        paths.push(p);
    }
    let mut bad = cfg.clone();
    bad.data.source = DataSource::Recordings { paths: paths.clone() };
    bad.data.channels = vec!["ch01".into(), "Fz".into()];
    let msg = run_experiment(&bad, &RunOptions::default()).err().unwrap().to_string();
    assert!(msg.contains("subject s01") && msg.contains("missing channel Fz"), "{msg}");

    bad.data.channels.clear();
    let err = run_experiment(&bad, &RunOptions::default()).err().unwrap();
    assert!(matches!(err.root(), Error::Schema(_)), "{err}");
    assert!(err.to_string().contains(&recs[1].trial), "{err}");
}

#[test]
fn plot_data_layout() {
    let two = PointCloud::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let d = rips_persistence(&two, &[0, 1], None, DEFAULT_SIMPLEX_CAP).unwrap();
    let text = plot_tsv(PlotKind::Barcode, &PlotInput::Diagram(&d)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dim\tbar\tbirth\tdeath\tessential");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.starts_with("0\t")));

    let empty = PersistenceDiagram::<f64>::empty(1.0);
    assert_eq!(plot_tsv(PlotKind::Diagram, &PlotInput::Diagram(&empty)).unwrap(), "dim\tbirth\tdeath\tessential\n");

    let l = landscape(&d, 0, 1, 50, 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("l.tsv");
    emit_plotdata(PlotKind::Landscape, &PlotInput::Landscape(&l), &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 51);

    let ami = plot_tsv(PlotKind::Ami, &PlotInput::Curve(&[0.5, 0.25])).unwrap();
    assert_eq!(ami, "lag\tami\n1\t0.5\n2\t0.25\n");
    assert!(plot_tsv(PlotKind::Fnn, &PlotInput::Diagram(&d)).is_err());
}

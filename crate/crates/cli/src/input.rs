use std::path::Path;

use anyhow::{bail, Context, Result};
use topoeeg::embedding::PointCloud;
use topoeeg::signals::io::{read_csv, read_recording, Recording};
use topoeeg::TimeSeriesF64;

/// Point cloud from CSV, one point per row. A first row that does not parse
/// as numbers is taken as a header.
pub fn read_cloud(path: &Path) -> Result<PointCloud<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| topoeeg::Error::Io(e).context(path.display().to_string()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split([',', '\t', ' ']).filter(|s| !s.is_empty()).map(str::parse).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(e) => {
                return Err(topoeeg::Error::Format(format!("{}: line {}: {e}", path.display(), i + 1)).into());
            }
        }
    }
    Ok(PointCloud::from_rows(rows).map_err(|e| e.context(path.display().to_string()))?)
}

/// A recording from its binary form, or from CSV when `rate_hz` is given.
pub fn read_any_recording(path: &Path, rate_hz: Option<f64>) -> Result<Recording> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let Some(rate) = rate_hz else {
            return Err(topoeeg::Error::Config("CSV input needs --rate".into()).into());
        };
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(read_csv(path, rate, "", &stem)?)
    } else {
        Ok(read_recording(path)?)
    }
}

/// One channel of a recording; the first channel when `channel` is `None`.
pub fn read_series(path: &Path, channel: Option<&str>, rate_hz: Option<f64>) -> Result<TimeSeriesF64> {
    let rec = read_any_recording(path, rate_hz)?;
    let row = match channel {
        Some(c) => rec.channel_index(c)?,
        None => 0,
    };
    if rec.channels.is_empty() {
        bail!(topoeeg::Error::Schema(format!("{}: no channels", path.display())));
    }
    rec.series::<f64>(row).with_context(|| format!("reading {}", path.display()))
}

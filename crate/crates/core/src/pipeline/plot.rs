use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{PersistenceDiagram, PersistencePair};
use crate::landscapes::Landscape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Barcode,
    Diagram,
    Landscape,
    Ami,
    Fnn,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "barcode" => Ok(PlotKind::Barcode),
            "diagram" => Ok(PlotKind::Diagram),
            "landscape" => Ok(PlotKind::Landscape),
            "ami" => Ok(PlotKind::Ami),
            "fnn" => Ok(PlotKind::Fnn),
            _ => Err(Error::Config(format!("unknown plot kind `{s}` (barcode, diagram, landscape, ami, fnn)"))),
        }
    }

    /// Column header line, without the newline.
    pub fn header(self) -> &'static str {
        match self {
            PlotKind::Barcode => "dim\tbar\tbirth\tdeath\tessential",
            PlotKind::Diagram => "dim\tbirth\tdeath\tessential",
            PlotKind::Landscape => "t\tvalue",
            PlotKind::Ami => "lag\tami",
            PlotKind::Fnn => "dim\tfnn_fraction",
        }
    }
}

pub enum PlotInput<'a> {
    Diagram(&'a PersistenceDiagram<f64>),
    Landscape(&'a Landscape<f64>),
    /// AMI for lags 1, 2, ... or FNN fractions for dimensions 1, 2, ...
    Curve(&'a [f64]),
}

fn sorted_pairs(d: &PersistenceDiagram<f64>) -> Vec<PersistencePair<f64>> {
    let mut v: Vec<_> = d.iter().copied().collect();
    v.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
    v
}

/// TSV text for `kind`: the header line, then rows in a stable order
/// (pairs by dimension, birth, death; curves by index).
pub fn plot_tsv(kind: PlotKind, input: &PlotInput) -> Result<String> {
    let mut out = format!("{}\n", kind.header());
    match (kind, input) {
        (PlotKind::Barcode, PlotInput::Diagram(d)) => {
            let mut bar = 0;
            let mut prev = None;
            for p in sorted_pairs(d) {
                if prev != Some(p.dim) {
                    bar = 0;
                    prev = Some(p.dim);
                }
                let _ = writeln!(out, "{}\t{bar}\t{}\t{}\t{}", p.dim, p.birth, p.death, u8::from(p.essential));
                bar += 1;
            }
        }
        (PlotKind::Diagram, PlotInput::Diagram(d)) => {
            for p in sorted_pairs(d) {
                let _ = writeln!(out, "{}\t{}\t{}\t{}", p.dim, p.birth, p.death, u8::from(p.essential));
            }
        }
        (PlotKind::Landscape, PlotInput::Landscape(l)) => {
            for (t, v) in l.grid.iter().zip(&l.values) {
                let _ = writeln!(out, "{t}\t{v}");
            }
        }
        (PlotKind::Ami | PlotKind::Fnn, PlotInput::Curve(c)) => {
            for (i, v) in c.iter().enumerate() {
                let _ = writeln!(out, "{}\t{v}", i + 1);
            }
        }
        _ => return Err(Error::param(format!("{kind:?} plot data needs a different input"))),
    }
    Ok(out)
}

pub fn emit_plotdata(kind: PlotKind, input: &PlotInput, out: &Path) -> Result<()> {
    let text = plot_tsv(kind, input)?;
    std::fs::write(out, text).map_err(|e| Error::Io(e).context(out.display().to_string()))
}

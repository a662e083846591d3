//! CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};

use sfs_placement::placement::FieldPrior;
use sfs_placement::wavefield::{CircularRegion, ExpansionConfig, Point2};

use crate::pipeline::{FieldGrid, Placement, SdrRecord};

#[derive(Debug, Serialize, Deserialize)]
struct PlacementRow {
    rank: usize,
    index: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
struct CostRow {
    step: usize,
    cost: f64,
}

#[derive(Debug, Serialize)]
struct SdrRow<'a> {
    angle_deg: f64,
    freq_hz: f64,
    sdr_db: f64,
    method: &'a str,
}

#[derive(Debug, Serialize)]
struct GridRow {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

/// Sidecar describing a grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub quantity: String,
    pub method: String,
    pub freq_hz: f64,
    pub angle_deg: f64,
    pub grid_spacing: f64,
    pub region: CircularRegion,
    pub points: usize,
    pub sdr_db: f64,
    /// Error grids are divided by this RMS of the desired field.
    pub normalization: Option<f64>,
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_placement(path: &Path, placement: &Placement, candidates: &[Point2]) -> Result<()> {
    let mut w = writer(path)?;
    for (rank, &index) in placement.indices.iter().enumerate() {
        let p = candidates[index];
        w.serialize(PlacementRow {
            rank,
            index,
            x: p.x,
            y: p.y,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a placement file; rows are taken in rank order.
pub fn read_placement(path: &Path, label: &str) -> Result<Placement> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<PlacementRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    rows.sort_by_key(|row| row.rank);
    for (i, row) in rows.iter().enumerate() {
        ensure!(row.rank == i, "{}: ranks must run 0..{}", path.display(), rows.len());
    }
    Ok(Placement {
        label: label.to_string(),
        indices: rows.iter().map(|r| r.index).collect(),
        cost_trace: Vec::new(),
    })
}

pub fn write_cost_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    for (step, &cost) in trace.iter().enumerate() {
        w.serialize(CostRow { step, cost })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sdr(path: &Path, records: &[SdrRecord]) -> Result<()> {
    let mut w = writer(path)?;
    if records.is_empty() {
        w.write_record(["angle_deg", "freq_hz", "sdr_db", "method"])?;
    }
    for r in records {
        w.serialize(SdrRow {
            angle_deg: r.angle_deg,
            freq_hz: r.freq_hz,
            sdr_db: r.sdr_db,
            method: &r.method,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn grid_stem(grid: &FieldGrid) -> String {
    format!("{}_{}hz_{}deg", grid.label, grid.freq_hz, grid.angle_deg)
}

/// Writes `field_<stem>.csv`, `error_<stem>.csv` and a `.json` sidecar for
/// each; returns the CSV paths.
pub fn write_grid(dir: &Path, grid: &FieldGrid, region: &CircularRegion) -> Result<Vec<PathBuf>> {
    let stem = grid_stem(grid);
    let rms = (grid.desired.iter().map(|u| u.norm_sqr()).sum::<f64>() / grid.desired.len().max(1) as f64).sqrt();
    let mut out = Vec::new();
    for quantity in ["field", "error"] {
        let path = dir.join(format!("{quantity}_{stem}.csv"));
        let mut w = writer(&path)?;
        for ((p, s), d) in grid.points.iter().zip(&grid.synthesized).zip(&grid.desired) {
            let v = if quantity == "field" { *s } else { (s - d) / rms };
            w.serialize(GridRow {
                x: p.x,
                y: p.y,
                re: v.re,
                im: v.im,
            })?;
        }
        w.flush()?;
        let meta = GridMetadata {
            quantity: quantity.to_string(),
            method: grid.label.clone(),
            freq_hz: grid.freq_hz,
            angle_deg: grid.angle_deg,
            grid_spacing: grid.spacing,
            region: *region,
            points: grid.points.len(),
            sdr_db: grid.sdr_db,
            normalization: (quantity == "error").then_some(rms),
        };
        write_json(&path.with_extension("json"), &meta)?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `mu_<f>hz.csv` with `(m, re, im)` and `sigma_<f>hz.csv` with
/// `(m, n, re, im)`.
pub fn write_prior(dir: &Path, freq_hz: f64, prior: &FieldPrior, cfg: &ExpansionConfig) -> Result<()> {
    let orders: Vec<i32> = cfg.orders().collect();
    let mut w = writer(&dir.join(format!("mu_{freq_hz}hz.csv")))?;
    w.write_record(["m", "re", "im"])?;
    for (i, m) in orders.iter().enumerate() {
        let v = prior.mean()[i];
        w.write_record([m.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    w.flush()?;
    let mut w = writer(&dir.join(format!("sigma_{freq_hz}hz.csv")))?;
    w.write_record(["m", "n", "re", "im"])?;
    for (i, m) in orders.iter().enumerate() {
        for (j, n) in orders.iter().enumerate() {
            let v = prior.covariance()[(i, j)];
            w.write_record([m.to_string(), n.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

//! Plot-ready aggregation of sweep results: per dimension, a
//! fidelity-vs-steps series for every condition number, with mean and
//! min/max band over trials, plus a generated matplotlib script.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adialin::{Error, Result};

use crate::sweep::{parse_csv, BenchmarkRecord};

/// One aggregated (steps, kappa) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub kappa: f64,
    pub steps: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub trials: usize,
}

/// Aggregate records into per-dim series keyed by (kappa, steps).
pub fn aggregate(records: &[BenchmarkRecord]) -> BTreeMap<usize, Vec<SeriesPoint>> {
    let mut cells: BTreeMap<(usize, u64, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        if r.fidelity.is_nan() {
            continue;
        }
        cells
            .entry((r.dim, r.kappa.to_bits(), r.steps))
            .or_default()
            .push(r.fidelity);
    }
    let mut out: BTreeMap<usize, Vec<SeriesPoint>> = BTreeMap::new();
    for ((dim, kappa_bits, steps), fids) in cells {
        let mean = fids.iter().sum::<f64>() / fids.len() as f64;
        let min = fids.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = fids.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.entry(dim).or_default().push(SeriesPoint {
            kappa: f64::from_bits(kappa_bits),
            steps,
            mean,
            min,
            max,
            trials: fids.len(),
        });
    }
    out
}

const PLOT_SCRIPT: &str = r##"#!/usr/bin/env python3
"""Render fidelity-vs-steps figures from the .dat files in this directory."""
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "fidelity_dim*.dat"))):
    dim = path.split("dim")[-1].split(".")[0]
    series = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            kappa, steps, mean, lo, hi, trials = line.split()
            series.setdefault(float(kappa), []).append(
                (int(steps), float(mean), float(lo), float(hi))
            )
    fig, ax = plt.subplots(figsize=(6, 4))
    for kappa in sorted(series):
        pts = sorted(series[kappa])
        steps = [p[0] for p in pts]
        mean = [p[1] for p in pts]
        lo = [p[2] for p in pts]
        hi = [p[3] for p in pts]
        ax.plot(steps, mean, marker="o", label=f"$\\kappa$ = {kappa:g}")
        ax.fill_between(steps, lo, hi, alpha=0.2)
    ax.set_xlabel("evolution steps")
    ax.set_ylabel("fidelity")
    ax.set_title(f"{dim}x{dim} system")
    ax.set_ylim(0.0, 1.02)
    ax.legend()
    fig.tight_layout()
    out = os.path.join(here, f"fidelity_dim{dim}.png")
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
"##;

/// Write one .dat file per dimension plus the plotting script; returns
/// the paths written.
pub fn emit_plots(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(csv_path)?;
    let records = parse_csv(&text)?;
    if records.is_empty() {
        return Err(Error::InvalidConfig("CSV contains no data rows".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (dim, mut points) in aggregate(&records) {
        points.sort_by(|a, b| (a.kappa.to_bits(), a.steps).cmp(&(b.kappa.to_bits(), b.steps)));
        let mut data = String::from("# kappa steps mean min max trials\n");
        for p in &points {
            let _ = writeln!(
                data,
                "{:.16e} {} {:.16e} {:.16e} {:.16e} {}",
                p.kappa, p.steps, p.mean, p.min, p.max, p.trials
            );
        }
        let path = out_dir.join(format!("fidelity_dim{dim}.dat"));
        std::fs::write(&path, data)?;
        written.push(path);
    }
    let script = out_dir.join("plot_fidelity.py");
    std::fs::write(&script, PLOT_SCRIPT)?;
    written.push(script);
    Ok(written)
}

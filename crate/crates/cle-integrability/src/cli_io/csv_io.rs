use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::levy::WeightedJumpHistogram;

/// One row of the histogram CSV, `bin_lo,bin_hi,mass,target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mass: f64,
    pub target: f64,
}

pub fn write_histogram_csv(h: &WeightedJumpHistogram, path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for k in 0..h.weighted_mass.len() {
        w.serialize(HistogramRow {
            bin_lo: h.bin_edges[k],
            bin_hi: h.bin_edges[k + 1],
            mass: h.weighted_mass[k],
            target: h.target[k],
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_histogram_csv(path: &Path) -> csv::Result<Vec<HistogramRow>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

/// Writes polygon vertices as `x,y` rows.
pub fn write_curve_csv(curve: &[Complex64], path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for z in curve {
        w.serialize((z.re, z.im))?;
    }
    w.flush()?;
    Ok(())
}

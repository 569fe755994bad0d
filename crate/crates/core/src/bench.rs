//! Timing harness comparing the linear resolver with the iterative baseline
//! on square flats, plus a log-log fit of run time against cell count.

use crate::error::{Error, Result};
use crate::flats::resolve_flats;
use crate::flow::{d8_flow_directions, d8_masked_flow_directions, EdgePolicy, FlowDirGrid};
use crate::gm::{gm_resolve_flats, GmConfig};
use crate::raster::Grid;
use crate::synthetic::square_flat_dem;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

pub const CSV_HEADER: &str = "algorithm,side,cells,seconds,visits";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Improved,
    GarbrechtMartz,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Improved => "improved",
            Algorithm::GarbrechtMartz => "gm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "improved" => Ok(Algorithm::Improved),
            "gm" | "garbrecht-martz" => Ok(Algorithm::GarbrechtMartz),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub side: usize,
    pub cells: usize,
    /// Mean wall time over the repetitions.
    pub seconds: f64,
    pub visits: usize,
    /// Set when the iterative baseline failed to converge.
    pub failed: bool,
}

impl BenchRecord {
    /// One CSV row; a failed run writes `nan` for its time.
    pub fn csv_row(&self) -> String {
        let seconds = if self.failed {
            "nan".to_string()
        } else {
            format!("{:.9}", self.seconds)
        };
        format!(
            "{},{},{},{},{}",
            self.algorithm, self.side, self.cells, seconds, self.visits
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Fitted slope of log(seconds) against log(cells) per algorithm.
    pub exponents: Vec<(Algorithm, f64)>,
}

impl BenchReport {
    pub fn exponent(&self, algorithm: Algorithm) -> Option<f64> {
        self.exponents
            .iter()
            .find(|(a, _)| *a == algorithm)
            .map(|&(_, e)| e)
    }

    pub fn seconds(&self, algorithm: Algorithm, side: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.algorithm == algorithm && r.side == side && !r.failed)
            .map(|r| r.seconds)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn write_exponents<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "algorithm,exponent")?;
        for (a, e) in &self.exponents {
            writeln!(w, "{a},{e:.4}")?;
        }
        Ok(())
    }
}

/// Least-squares slope of `ln(y)` against `ln(x)`. Needs two distinct x values.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Flow directions, flat resolution and masked directions in one go.
/// Returns the final directions and the number of cell visits.
pub fn run_improved(dem: &Grid<f64>) -> Result<(FlowDirGrid, usize)> {
    let dirs = d8_flow_directions(dem, EdgePolicy::EdgesDrainOutward);
    let res = resolve_flats(dem, &dirs)?;
    let out = d8_masked_flow_directions(&res.flatmask, &res.labels, &dirs)?;
    Ok((out, res.report.visits.total()))
}

/// Flow directions followed by the iterative baseline.
pub fn run_gm(dem: &Grid<f64>, cfg: &GmConfig) -> Result<(FlowDirGrid, usize)> {
    let dirs = d8_flow_directions(dem, EdgePolicy::EdgesDrainOutward);
    let res = gm_resolve_flats(dem, &dirs, cfg)?;
    Ok((res.flowdirs, res.visits))
}

fn time_one(algorithm: Algorithm, dem: &Grid<f64>, cfg: &GmConfig) -> Result<(f64, usize)> {
    let start = Instant::now();
    let (_, visits) = match algorithm {
        Algorithm::Improved => run_improved(dem)?,
        Algorithm::GarbrechtMartz => run_gm(dem, cfg)?,
    };
    Ok((start.elapsed().as_secs_f64().max(1e-9), visits))
}

/// Times each algorithm on a square flat of every side length and fits a
/// scaling exponent per algorithm.
pub fn run_benchmark(
    sides: &[usize],
    algorithms: &[Algorithm],
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::InvalidArgument(format!(
            "at least 3 repetitions are required, got {repetitions}"
        )));
    }
    if sides.is_empty() || algorithms.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one side and one algorithm".into(),
        ));
    }
    let cfg = GmConfig::default();
    let mut records = Vec::new();
    for &side in sides {
        let dem = square_flat_dem(side)?;
        for &algorithm in algorithms {
            let mut total = 0.0;
            let mut visits = 0;
            let mut failed = false;
            for _ in 0..repetitions {
                match time_one(algorithm, &dem, &cfg) {
                    Ok((s, v)) => {
                        total += s;
                        visits = v;
                    }
                    Err(Error::NonConvergence { .. }) => {
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            records.push(BenchRecord {
                algorithm,
                side,
                cells: dem.len(),
                seconds: if failed {
                    f64::NAN
                } else {
                    total / repetitions as f64
                },
                visits,
                failed,
            });
        }
    }
    let exponents = algorithms
        .iter()
        .filter_map(|&a| {
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.algorithm == a && !r.failed)
                .map(|r| (r.cells as f64, r.seconds))
                .collect();
            fit_exponent(&pts).map(|e| (a, e))
        })
        .collect();
    Ok(BenchReport { records, exponents })
}

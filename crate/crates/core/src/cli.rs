//! Command-line front end: `flowdirs`, `resolve`, `gen` and `bench`.

use crate::bench::{run_benchmark, Algorithm};
use crate::error::Error;
use crate::flats::{alter_dem, resolve_flats, with_dem_nodata, Outcome, FLATMASK_NODATA};
use crate::flow::{d8_flow_directions, d8_masked_flow_directions, EdgePolicy, FlowDirGrid};
use crate::raster::{read_ascii_grid, write_ascii_grid, AsciiCell, Grid};
use crate::synthetic::{paper_example_dem, random_terrain_dem, square_flat_dem};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SOME_UNDRAINABLE: i32 = 4;
pub const EXIT_NONE_DRAINABLE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "flatdrain",
    version,
    about = "Drainage directions over flats in ESRI ASCII DEMs"
)]
pub struct Cli {
    /// Print timings and extra detail to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgePolicyArg {
    /// Boundary cells without a lower neighbour drain off the grid.
    Outward,
    /// Boundary cells are treated like interior cells.
    Pseudocode,
}

impl From<EdgePolicyArg> for EdgePolicy {
    fn from(p: EdgePolicyArg) -> Self {
        match p {
            EdgePolicyArg::Outward => EdgePolicy::EdgesDrainOutward,
            EdgePolicyArg::Pseudocode => EdgePolicy::AsPseudocode,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write D8 flow directions computed from raw elevations.
    Flowdirs {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "outward")]
        edge_policy: EdgePolicyArg,
    },
    /// Resolve flats and write the requested rasters.
    Resolve {
        input: PathBuf,
        #[arg(long)]
        flatmask: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Final flow directions, with flats resolved.
        #[arg(long)]
        flowdirs: Option<PathBuf>,
        /// Write a copy of the DEM raised by the smallest representable increments.
        #[arg(long)]
        alter: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "outward")]
        edge_policy: EdgePolicyArg,
    },
    /// Generate a synthetic DEM.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Time the linear resolver against the iterative baseline on square flats.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        sides: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "improved,gm")]
        algorithms: Vec<String>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// The 7x7 worked example.
    PaperExample {
        #[arg(long)]
        out: PathBuf,
    },
    /// A square flat with a single outlet.
    SquareFlat {
        #[arg(long)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random terrain with plateaus.
    Random {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.25)]
        flat_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn read_dem(path: &Path) -> Result<Grid<f64>, Failure> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    read_ascii_grid(BufReader::new(file)).map_err(|e| match e {
        Error::Io(e) => io_failure(path, e),
        other => Failure {
            code: EXIT_USAGE,
            message: format!("{}: {other}", path.display()),
        },
    })
}

fn write_raster<T: AsciiCell>(grid: &Grid<T>, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    write_ascii_grid(grid, file).map_err(|e| io_failure(path, e))
}

fn check_distinct(input: &Path, outputs: &[&Option<PathBuf>]) -> Result<(), Failure> {
    let mut seen: Vec<&Path> = vec![input];
    for p in outputs.iter().filter_map(|p| p.as_deref()) {
        if seen.contains(&p) {
            return Err(Failure {
                code: EXIT_USAGE,
                message: format!("output path {} collides with another path", p.display()),
            });
        }
        seen.push(p);
    }
    Ok(())
}

fn direction_raster(dirs: &FlowDirGrid) -> Grid<i32> {
    dirs.map(-1, |d| d.code())
}

fn cmd_flowdirs(input: &Path, output: &Path, policy: EdgePolicy) -> Result<i32, Failure> {
    check_distinct(input, &[&Some(output.to_path_buf())])?;
    let dem = read_dem(input)?;
    let dirs = d8_flow_directions(&dem, policy);
    write_raster(&direction_raster(&dirs), output)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_resolve(
    input: &Path,
    flatmask: &Option<PathBuf>,
    labels: &Option<PathBuf>,
    flowdirs: &Option<PathBuf>,
    alter: &Option<PathBuf>,
    policy: EdgePolicy,
    verbose: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    check_distinct(input, &[flatmask, labels, flowdirs, alter])?;
    let dem = read_dem(input)?;
    let start = Instant::now();
    let initial = d8_flow_directions(&dem, policy);
    let res = resolve_flats(&dem, &initial)?;
    let resolved = d8_masked_flow_directions(&res.flatmask, &res.labels, &initial)?;
    if verbose {
        let _ = writeln!(
            err,
            "resolved {} cells in {:.3?}",
            dem.len(),
            start.elapsed()
        );
    }

    if let Some(p) = flatmask {
        write_raster(&with_dem_nodata(&res.flatmask, &dem, FLATMASK_NODATA), p)?;
    }
    if let Some(p) = labels {
        let as_int = Grid::from_vec(
            dem.rows(),
            dem.cols(),
            res.labels.as_slice().iter().map(|&l| l as i64).collect(),
            -1i64,
        )?;
        write_raster(&with_dem_nodata(&as_int, &dem, -1), p)?;
    }
    if let Some(p) = flowdirs {
        write_raster(&direction_raster(&resolved), p)?;
    }
    let report_io = |e: std::io::Error| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    };
    writeln!(out, "{}", res.report).map_err(report_io)?;
    if let Some(p) = alter {
        let (altered, violations) = alter_dem(&dem, &res.flatmask, &res.labels)?;
        write_raster(&altered, p)?;
        writeln!(out, "significance_violations={}", violations.len()).map_err(report_io)?;
        for c in violations {
            writeln!(out, "violation row={} col={}", c.row, c.col).map_err(report_io)?;
        }
    }
    Ok(match res.report.outcome {
        Outcome::NoFlats | Outcome::AllDrainable => EXIT_OK,
        Outcome::SomeUndrainable => EXIT_SOME_UNDRAINABLE,
        Outcome::NoneDrainable => EXIT_NONE_DRAINABLE,
    })
}

fn cmd_gen(kind: &GenKind) -> Result<i32, Failure> {
    let (dem, out) = match kind {
        GenKind::PaperExample { out } => (paper_example_dem(), out),
        GenKind::SquareFlat { side, out } => (square_flat_dem(*side)?, out),
        GenKind::Random {
            rows,
            cols,
            seed,
            flat_fraction,
            out,
        } => (
            random_terrain_dem(*rows, *cols, *seed, *flat_fraction)?,
            out,
        ),
    };
    write_raster(&dem, out)?;
    Ok(EXIT_OK)
}

fn cmd_bench(
    sides: &[usize],
    algorithms: &[String],
    reps: usize,
    csv: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let algorithms = algorithms
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_benchmark(sides, &algorithms, reps)?;
    let report_io = |e: std::io::Error| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    };
    match csv {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(p, e))?;
            report.write_csv(file).map_err(|e| io_failure(p, e))?;
        }
        None => {
            report.write_csv(&mut *out).map_err(report_io)?;
            writeln!(out).map_err(report_io)?;
        }
    }
    report.write_exponents(&mut *out).map_err(report_io)?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the chosen subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Flowdirs {
            input,
            output,
            edge_policy,
        } => cmd_flowdirs(input, output, (*edge_policy).into()),
        Command::Resolve {
            input,
            flatmask,
            labels,
            flowdirs,
            alter,
            edge_policy,
        } => cmd_resolve(
            input,
            flatmask,
            labels,
            flowdirs,
            alter,
            (*edge_policy).into(),
            cli.verbose,
            out,
            err,
        ),
        Command::Gen { kind } => cmd_gen(kind),
        Command::Bench {
            sides,
            algorithms,
            reps,
            out: csv,
        } => cmd_bench(sides, algorithms, *reps, csv, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

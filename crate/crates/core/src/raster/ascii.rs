//! ESRI ASCII grid (`.asc`) reading and writing.

use super::{GeoRef, Grid};
use crate::error::{Error, Result};
use std::fmt::Display;
use std::io::{BufWriter, Read, Write};

const DEFAULT_NODATA: f64 = -9999.0;

/// Cell types that can be written to an ASCII grid.
///
/// Floats are written with Rust's shortest round-trip formatting, so reading
/// the file back reproduces every value bit for bit.
pub trait AsciiCell: Copy + PartialEq + Display {}

impl AsciiCell for f64 {}
impl AsciiCell for f32 {}
impl AsciiCell for i32 {}
impl AsciiCell for i64 {}
impl AsciiCell for u32 {}
impl AsciiCell for u8 {}

#[derive(Default)]
struct Header {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<f64>,
    yll: Option<f64>,
    centered: bool,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

fn parse_number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token.parse().map_err(|_| {
        Error::parse(
            line,
            format!("expected a number for {what}, found {token:?}"),
        )
    })
}

/// Reads an ESRI ASCII grid. Header keys are case-insensitive; `NODATA_value`
/// defaults to -9999 when absent.
pub fn read_ascii_grid<R: Read>(mut reader: R) -> Result<Grid<f64>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;

    let mut header = Header::default();
    let mut lines = text.lines().enumerate().peekable();

    while let Some(&(i, line)) = lines.peek() {
        let lineno = i + 1;
        let mut tokens = line.split_whitespace();
        let Some(key) = tokens.next() else {
            lines.next();
            continue;
        };
        let key = key.to_ascii_lowercase();
        let is_header = matches!(
            key.as_str(),
            "ncols"
                | "nrows"
                | "xllcorner"
                | "yllcorner"
                | "xllcenter"
                | "yllcenter"
                | "cellsize"
                | "nodata_value"
        );
        if !is_header {
            break;
        }
        let value = tokens
            .next()
            .ok_or_else(|| Error::parse(lineno, format!("header {key} has no value")))?;
        match key.as_str() {
            "ncols" => header.ncols = Some(parse_number(value, lineno, "ncols")?),
            "nrows" => header.nrows = Some(parse_number(value, lineno, "nrows")?),
            "xllcorner" | "xllcenter" => {
                header.centered = key == "xllcenter";
                header.xll = Some(parse_number(value, lineno, &key)?);
            }
            "yllcorner" | "yllcenter" => header.yll = Some(parse_number(value, lineno, &key)?),
            "cellsize" => header.cellsize = Some(parse_number(value, lineno, "cellsize")?),
            _ => header.nodata = Some(parse_number(value, lineno, "NODATA_value")?),
        }
        lines.next();
    }

    let first_data_line = lines
        .peek()
        .map_or(text.lines().count() + 1, |&(i, _)| i + 1);
    let ncols = header
        .ncols
        .ok_or_else(|| Error::parse(first_data_line, "missing ncols header"))?;
    let nrows = header
        .nrows
        .ok_or_else(|| Error::parse(first_data_line, "missing nrows header"))?;
    if ncols == 0 || nrows == 0 {
        return Err(Error::parse(
            first_data_line,
            "ncols and nrows must be positive",
        ));
    }

    let expected = nrows * ncols;
    let mut cells = Vec::with_capacity(expected);
    let mut last_line = first_data_line;
    for (i, line) in lines {
        last_line = i + 1;
        for (pos, token) in line.split_whitespace().enumerate() {
            if cells.len() == expected {
                return Err(Error::parse(
                    last_line,
                    format!("more than {expected} values (extra token {token:?})"),
                ));
            }
            let v: f64 = token.parse().map_err(|_| {
                Error::parse(
                    last_line,
                    format!("non-numeric token {token:?} at position {}", pos + 1),
                )
            })?;
            cells.push(v);
        }
    }
    if cells.len() != expected {
        return Err(Error::parse(
            last_line,
            format!("expected {expected} values, found {}", cells.len()),
        ));
    }

    let georef = match (header.xll, header.yll, header.cellsize) {
        (Some(xll), Some(yll), Some(cellsize)) => Some(GeoRef {
            xll,
            yll,
            cellsize,
            centered: header.centered,
        }),
        (None, None, None) => None,
        _ => {
            return Err(Error::parse(
                first_data_line,
                "georeference needs all of xll, yll and cellsize",
            ))
        }
    };

    Ok(
        Grid::from_vec(nrows, ncols, cells, header.nodata.unwrap_or(DEFAULT_NODATA))?
            .with_georef(georef),
    )
}

/// Writes `grid` as an ESRI ASCII grid.
pub fn write_ascii_grid<T: AsciiCell, W: Write>(grid: &Grid<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "ncols {}", grid.cols())?;
    writeln!(w, "nrows {}", grid.rows())?;
    if let Some(g) = grid.georef() {
        let suffix = if g.centered { "center" } else { "corner" };
        writeln!(w, "xll{suffix} {}", g.xll)?;
        writeln!(w, "yll{suffix} {}", g.yll)?;
        writeln!(w, "cellsize {}", g.cellsize)?;
    }
    writeln!(w, "NODATA_value {}", grid.nodata())?;
    for row in grid.as_slice().chunks(grid.cols()) {
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

//! Rectangular grids, D8 neighbourhood geometry and flow-direction codes.
//!
//! Cells are stored row-major with row 0 at the top (north) of the raster,
//! matching the line order of an ESRI ASCII grid.

mod ascii;

pub use ascii::{read_ascii_grid, write_ascii_grid, AsciiCell};

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

/// 0-based (row, col) position of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        CellIndex { row, col }
    }
}

impl From<(usize, usize)> for CellIndex {
    fn from((row, col): (usize, usize)) -> Self {
        CellIndex { row, col }
    }
}

/// D8 flow direction with its external integer code.
///
/// Compass codes run counterclockwise from east: E=1, NE=2, N=3, NW=4,
/// W=5, SW=6, S=7, SE=8. `NoFlow` (0) marks a cell without a strictly lower
/// neighbour and `NoData` (-1) a cell outside the DEM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Direction {
    NoData = -1,
    NoFlow = 0,
    E = 1,
    NE = 2,
    N = 3,
    NW = 4,
    W = 5,
    SW = 6,
    S = 7,
    SE = 8,
}

impl Direction {
    /// The eight compass directions in neighbour iteration order.
    pub const COMPASS: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    pub fn code(self) -> i32 {
        self as i8 as i32
    }

    pub fn from_code(code: i32) -> Option<Direction> {
        match code {
            -1 => Some(Direction::NoData),
            0 => Some(Direction::NoFlow),
            1..=8 => Some(Direction::COMPASS[(code - 1) as usize]),
            _ => None,
        }
    }

    /// (Δrow, Δcol) of the neighbour this direction points at.
    pub fn offset(self) -> Option<(isize, isize)> {
        match self {
            Direction::E => Some((0, 1)),
            Direction::NE => Some((-1, 1)),
            Direction::N => Some((-1, 0)),
            Direction::NW => Some((-1, -1)),
            Direction::W => Some((0, -1)),
            Direction::SW => Some((1, -1)),
            Direction::S => Some((1, 0)),
            Direction::SE => Some((1, 1)),
            Direction::NoFlow | Direction::NoData => None,
        }
    }

    pub fn is_compass(self) -> bool {
        self.code() > 0
    }

    pub fn is_cardinal(self) -> bool {
        matches!(
            self,
            Direction::E | Direction::N | Direction::W | Direction::S
        )
    }
}

const OFFSETS: [(isize, isize); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Grid extent, used for bounds checks and neighbour enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl Dims {
    pub fn new(rows: usize, cols: usize) -> Self {
        Dims { rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        c.row < self.rows && c.col < self.cols
    }

    pub fn check(&self, c: CellIndex) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: c.row,
                col: c.col,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// The cell `dir` points at from `c`, if it lies inside the grid.
    pub fn step(&self, c: CellIndex, dir: Direction) -> Option<CellIndex> {
        let (dr, dc) = dir.offset()?;
        let r = c.row.checked_add_signed(dr)?;
        let k = c.col.checked_add_signed(dc)?;
        (r < self.rows && k < self.cols).then_some(CellIndex::new(r, k))
    }

    /// In-bounds D8 neighbours of `c` in the fixed order E, NE, N, NW, W, SW, S, SE.
    pub fn neighbors(&self, c: CellIndex) -> Result<Neighbors> {
        self.check(c)?;
        Ok(self.neighbors_unchecked(c))
    }

    pub(crate) fn neighbors_unchecked(&self, c: CellIndex) -> Neighbors {
        Neighbors {
            dims: *self,
            center: c,
            next: 0,
        }
    }

    pub(crate) fn index_of(&self, c: CellIndex) -> usize {
        c.row * self.cols + c.col
    }

    /// Iterates every cell in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = CellIndex> {
        let cols = self.cols;
        (0..self.rows).flat_map(move |r| (0..cols).map(move |c| CellIndex::new(r, c)))
    }

    pub fn is_border(&self, c: CellIndex) -> bool {
        c.row == 0 || c.col == 0 || c.row + 1 == self.rows || c.col + 1 == self.cols
    }
}

/// Iterator over the in-bounds neighbours of a cell.
#[derive(Debug, Clone)]
pub struct Neighbors {
    dims: Dims,
    center: CellIndex,
    next: usize,
}

impl Iterator for Neighbors {
    type Item = (Direction, CellIndex);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        while self.next < 8 {
            let k = self.next;
            self.next += 1;
            let (dr, dc) = OFFSETS[k];
            let r = self.center.row as isize + dr;
            let c = self.center.col as isize + dc;
            if r >= 0 && c >= 0 && (r as usize) < self.dims.rows && (c as usize) < self.dims.cols {
                return Some((
                    Direction::COMPASS[k],
                    CellIndex::new(r as usize, c as usize),
                ));
            }
        }
        None
    }
}

/// Georeference carried through ASCII I/O unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoRef {
    pub xll: f64,
    pub yll: f64,
    pub cellsize: f64,
    /// `true` when the origin refers to the lower-left cell centre
    /// (`xllcenter`) rather than its corner (`xllcorner`).
    pub centered: bool,
}

/// Row-major raster with a NoData sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dims: Dims,
    cells: Vec<T>,
    nodata: T,
    georef: Option<GeoRef>,
}

impl<T: Copy + PartialEq> Grid<T> {
    pub fn new(rows: usize, cols: usize, fill: T, nodata: T) -> Result<Self> {
        Self::from_vec(rows, cols, vec![fill; rows * cols], nodata)
    }

    pub fn from_vec(rows: usize, cols: usize, cells: Vec<T>, nodata: T) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} cells supplied for a {rows}x{cols} grid",
                cells.len()
            )));
        }
        Ok(Grid {
            dims: Dims::new(rows, cols),
            cells,
            nodata,
            georef: None,
        })
    }

    /// Builds a grid from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>], nodata: T) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat(), nodata)
    }

    pub fn with_georef(mut self, georef: Option<GeoRef>) -> Self {
        self.georef = georef;
        self
    }

    pub fn rows(&self) -> usize {
        self.dims.rows
    }

    pub fn cols(&self) -> usize {
        self.dims.cols
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nodata(&self) -> T {
        self.nodata
    }

    pub fn georef(&self) -> Option<GeoRef> {
        self.georef
    }

    pub fn get(&self, c: CellIndex) -> Option<T> {
        self.dims
            .contains(c)
            .then(|| self.cells[self.dims.index_of(c)])
    }

    pub fn set(&mut self, c: CellIndex, value: T) -> Result<()> {
        self.dims.check(c)?;
        let i = self.dims.index_of(c);
        self.cells[i] = value;
        Ok(())
    }

    pub fn is_nodata(&self, c: CellIndex) -> bool {
        self[c] == self.nodata
    }

    pub fn as_slice(&self) -> &[T] {
        &self.cells
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.cells
    }

    pub fn into_vec(self) -> Vec<T> {
        self.cells
    }

    /// Cells as nested rows, mostly useful in tests and diagnostics.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.cells
            .chunks(self.dims.cols)
            .map(<[T]>::to_vec)
            .collect()
    }

    /// Applies `f` to every cell, mapping the sentinel to `nodata`.
    pub fn map<U: Copy + PartialEq>(&self, nodata: U, mut f: impl FnMut(T) -> U) -> Grid<U> {
        let cells = self
            .cells
            .iter()
            .map(|&v| if v == self.nodata { nodata } else { f(v) })
            .collect();
        Grid {
            dims: self.dims,
            cells,
            nodata,
            georef: self.georef,
        }
    }

    /// Fails unless `other` has the same rows and columns.
    pub fn ensure_same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: (self.rows(), self.cols()),
                found: (other.dims.rows, other.dims.cols),
            })
        }
    }
}

impl<T> Index<CellIndex> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, c: CellIndex) -> &T {
        assert!(
            c.row < self.dims.rows && c.col < self.dims.cols,
            "cell {c:?} out of bounds"
        );
        &self.cells[c.row * self.dims.cols + c.col]
    }
}

impl<T> IndexMut<CellIndex> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, c: CellIndex) -> &mut T {
        assert!(
            c.row < self.dims.rows && c.col < self.dims.cols,
            "cell {c:?} out of bounds"
        );
        &mut self.cells[c.row * self.dims.cols + c.col]
    }
}

//! Deterministic DEM generators used by tests, benchmarks and the CLI.
//!
//! All generators work in integers and convert to `f64` at the end, so a
//! given set of arguments yields bit-identical grids on every platform.

use crate::error::{Error, Result};
use crate::raster::{CellIndex, Grid};
use std::collections::VecDeque;

pub const NODATA: f64 = -9999.0;

/// 64-bit linear congruential generator (Knuth's MMIX constants):
/// `state = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`,
/// returning the high 32 bits of the new state.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 32) as u32
    }

    /// Uniform integer in `0..n` (by modulo; the bias is irrelevant here).
    pub fn below(&mut self, n: u32) -> u32 {
        self.next_u32() % n
    }
}

/// The 7x7 worked example: a 5x5 flat at 1.0 inside a ring at 2.0, drained by
/// a single 0.0 outlet below the middle of the flat's three bottom-left cells.
///
/// This yields 13 high-edge cells and 3 low-edge cells.
pub fn paper_example_dem() -> Grid<f64> {
    let mut g = Grid::new(7, 7, 2.0, NODATA).expect("fixed size");
    for r in 1..6 {
        for c in 1..6 {
            g[CellIndex::new(r, c)] = 1.0;
        }
    }
    g[CellIndex::new(6, 2)] = 0.0;
    g
}

/// A `side x side` flat at 1.0 inside a ring at 2.0, with a single 0.0 outlet
/// in the bottom ring three cells in from the left edge.
pub fn square_flat_dem(side: usize) -> Result<Grid<f64>> {
    if side < 5 {
        return Err(Error::InvalidArgument(format!(
            "square flat side must be >= 5, got {side}"
        )));
    }
    let n = side + 2;
    let mut cells = vec![1.0; n * n];
    for r in 0..n {
        for c in 0..n {
            if r == 0 || c == 0 || r == n - 1 || c == n - 1 {
                cells[r * n + c] = 2.0;
            }
        }
    }
    cells[(n - 1) * n + 3] = 0.0;
    Grid::from_vec(n, n, cells, NODATA)
}

/// Pseudo-random terrain in which roughly `flat_fraction` of the cells are
/// flattened into plateaus.
///
/// The base surface rises with D8 distance from a random set of border
/// outlets, plus per-cell jitter smaller than one distance step, so every
/// non-outlet cell has a strictly lower neighbour. Random rectangles are then
/// levelled to their minimum until the requested share of cells is covered.
pub fn random_terrain_dem(
    rows: usize,
    cols: usize,
    seed: u64,
    flat_fraction: f64,
) -> Result<Grid<f64>> {
    if rows < 8 || cols < 8 {
        return Err(Error::InvalidArgument(format!(
            "random terrain needs at least 8x8 cells, got {rows}x{cols}"
        )));
    }
    if !(0.0..=1.0).contains(&flat_fraction) {
        return Err(Error::InvalidArgument(format!(
            "flat_fraction must lie in [0, 1], got {flat_fraction}"
        )));
    }
    const STEP: i64 = 16;
    let mut rng = Lcg64::new(seed);
    let dims = crate::raster::Dims::new(rows, cols);

    let mut dist = vec![-1i64; rows * cols];
    let mut queue = VecDeque::new();
    for c in dims.cells().filter(|&c| dims.is_border(c)) {
        if rng.below(12) == 0 {
            dist[dims.index_of(c)] = 0;
            queue.push_back(c);
        }
    }
    if queue.is_empty() {
        let c = CellIndex::new(0, rng.below(cols as u32) as usize);
        dist[dims.index_of(c)] = 0;
        queue.push_back(c);
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[dims.index_of(c)];
        for (_, n) in dims.neighbors_unchecked(c) {
            let i = dims.index_of(n);
            if dist[i] < 0 {
                dist[i] = d + 1;
                queue.push_back(n);
            }
        }
    }
    let mut elev: Vec<i64> = dist
        .iter()
        .map(|&d| STEP * d + i64::from(rng.below(STEP as u32)))
        .collect();

    let target = (flat_fraction * (rows * cols) as f64).round() as usize;
    let mut covered = vec![false; rows * cols];
    let mut covered_count = 0;
    let mut attempts = 0;
    while covered_count < target && attempts < 100 * rows * cols {
        attempts += 1;
        let h = 2 + rng.below(rows.min(9) as u32 - 1) as usize;
        let w = 2 + rng.below(cols.min(9) as u32 - 1) as usize;
        let r0 = rng.below((rows - h + 1) as u32) as usize;
        let c0 = rng.below((cols - w + 1) as u32) as usize;
        let idx = |r: usize, c: usize| r * cols + c;
        let low = (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| (r, c)))
            .map(|(r, c)| elev[idx(r, c)])
            .min()
            .expect("non-empty rectangle");
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                elev[idx(r, c)] = low;
                if !covered[idx(r, c)] {
                    covered[idx(r, c)] = true;
                    covered_count += 1;
                }
            }
        }
    }

    Grid::from_vec(
        rows,
        cols,
        elev.into_iter().map(|e| e as f64).collect(),
        NODATA,
    )
}

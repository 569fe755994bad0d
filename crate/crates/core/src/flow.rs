//! D8 flow directions from raw elevations and from a resolved flat mask.

use crate::error::Result;
use crate::flats::{FlatMaskGrid, LabelGrid};
use crate::raster::{CellIndex, Dims, Direction, Grid};

pub type FlowDirGrid = Grid<Direction>;

/// How boundary cells without a lower neighbour are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgePolicy {
    /// Boundary cells are handled like any other cell and may be NoFlow.
    AsPseudocode,
    /// Boundary cells left NoFlow drain off the grid along the outward normal.
    #[default]
    EdgesDrainOutward,
}

/// Direction pointing off-grid from a boundary cell; corners use the diagonal.
fn outward(dims: Dims, c: CellIndex) -> Direction {
    let top = c.row == 0;
    let bottom = c.row + 1 == dims.rows;
    let left = c.col == 0;
    let right = c.col + 1 == dims.cols;
    match (top, bottom, left, right) {
        (true, _, true, _) => Direction::NW,
        (true, _, _, true) => Direction::NE,
        (_, true, true, _) => Direction::SW,
        (_, true, _, true) => Direction::SE,
        (true, _, _, _) => Direction::N,
        (_, true, _, _) => Direction::S,
        (_, _, true, _) => Direction::W,
        _ => Direction::E,
    }
}

/// Assigns each cell the direction of its strictly lowest neighbour.
///
/// Neighbours are scanned in the fixed E..SE order with a strict `<`, so the
/// first of several equal minima wins. Cells with no strictly lower neighbour
/// are NoFlow; NoData cells stay NoData.
pub fn d8_flow_directions(dem: &Grid<f64>, policy: EdgePolicy) -> FlowDirGrid {
    let dims = dem.dims();
    let nodata = dem.nodata();
    let mut dirs = Vec::with_capacity(dem.len());
    for c in dims.cells() {
        let e = dem[c];
        if e == nodata {
            dirs.push(Direction::NoData);
            continue;
        }
        let mut emin = e;
        let mut dmin = Direction::NoFlow;
        for (d, n) in dims.neighbors_unchecked(c) {
            let en = dem[n];
            if en == nodata {
                continue;
            }
            if en < emin {
                emin = en;
                dmin = d;
            }
        }
        if dmin == Direction::NoFlow && policy == EdgePolicy::EdgesDrainOutward && dims.is_border(c)
        {
            dmin = outward(dims, c);
        }
        dirs.push(dmin);
    }
    Grid::from_vec(dims.rows, dims.cols, dirs, Direction::NoData)
        .expect("dimensions copied from a valid grid")
        .with_georef(dem.georef())
}

/// Picks the neighbour with the smallest key strictly below `own`.
///
/// Among tied minima a cardinal neighbour is preferred over a diagonal one,
/// then the fixed E..SE order decides.
pub(crate) fn lowest_neighbor<I>(own: i64, candidates: I) -> Direction
where
    I: IntoIterator<Item = (Direction, i64)>,
{
    let mut best = Direction::NoFlow;
    let mut best_key = own;
    for (d, key) in candidates {
        if key < best_key
            || (key == best_key
                && best != Direction::NoFlow
                && d.is_cardinal()
                && !best.is_cardinal())
        {
            best_key = key;
            best = d;
        }
    }
    best
}

/// Resolves NoFlow cells inside labelled flats using the flat mask.
///
/// Each such cell flows to the same-label neighbour with the smallest mask
/// value strictly below its own. Cells in undrainable flats (label 0) and all
/// cells that already had a direction are left as they were.
pub fn d8_masked_flow_directions(
    flatmask: &FlatMaskGrid,
    labels: &LabelGrid,
    flowdirs: &FlowDirGrid,
) -> Result<FlowDirGrid> {
    flowdirs.ensure_same_dims(flatmask)?;
    flowdirs.ensure_same_dims(labels)?;
    let dims = flowdirs.dims();
    let mut out = flowdirs.clone();
    for c in dims.cells() {
        if flowdirs[c] != Direction::NoFlow {
            continue;
        }
        let label = labels[c];
        if label == 0 {
            continue;
        }
        let candidates = dims
            .neighbors_unchecked(c)
            .filter(|&(_, n)| labels[n] == label)
            .map(|(d, n)| (d, i64::from(flatmask[n])));
        out[c] = lowest_neighbor(i64::from(flatmask[c]), candidates);
    }
    Ok(out)
}

/// Follows directions from `start` until the walk leaves the set `inside`,
/// runs off-grid, or stops. Returns the number of steps taken when it leaves,
/// `None` when it stalls on a NoFlow cell inside the set or exceeds `budget`.
pub fn steps_to_exit(
    flowdirs: &FlowDirGrid,
    start: CellIndex,
    budget: usize,
    inside: impl Fn(CellIndex) -> bool,
) -> Option<usize> {
    let dims = flowdirs.dims();
    let mut c = start;
    for steps in 0..=budget {
        if !inside(c) {
            return Some(steps);
        }
        let d = flowdirs[c];
        if !d.is_compass() {
            return None;
        }
        match dims.step(c, d) {
            Some(n) => c = n,
            None => return Some(steps + 1),
        }
    }
    None
}

//! Flat identification, labelling and the two superimposed gradients.
//!
//! A flat is a D8-connected patch of equal elevation whose interior has no
//! local downhill gradient. Resolution never touches elevations: it produces
//! an integer increment mask (`FlatMaskGrid`) that, together with the flat
//! labels, determines flow directions across each drainable flat.
//!
//! The gradient away from higher terrain and the gradient towards lower
//! terrain are both built by multi-source breadth-first search. A sentinel
//! [`MARKER`] sits in the FIFO between successive BFS levels, so a single
//! counter tracks the level of every cell popped.

use crate::error::Result;
use crate::flow::FlowDirGrid;
use crate::raster::{CellIndex, Direction, Grid};
use std::collections::VecDeque;
use std::fmt;

/// Per-cell increment count. Zero outside drainable flats.
pub type FlatMaskGrid = Grid<i32>;
/// Per-cell flat label; 0 means the cell is in no drainable flat.
pub type LabelGrid = Grid<u32>;

pub const NO_LABEL: u32 = 0;
pub const FLATMASK_NODATA: i32 = -1;

/// Out-of-band queue element separating BFS levels.
pub const MARKER: CellIndex = CellIndex::new(usize::MAX, usize::MAX);

/// Largest away-from-higher increment reached in each flat, indexed by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatHeights(Vec<i32>);

impl FlatHeights {
    /// Table for labels `1..=max_label`, all zero.
    pub fn new(max_label: u32) -> Self {
        FlatHeights(vec![0; max_label as usize + 1])
    }

    pub fn get(&self, label: u32) -> i32 {
        self.0[label as usize]
    }

    pub fn max_label(&self) -> u32 {
        (self.0.len() - 1) as u32
    }

    fn set(&mut self, label: u32, height: i32) {
        self.0[label as usize] = height;
    }
}

/// Flat cells bordering higher and lower terrain, in raster-scan order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeQueues {
    pub high: VecDeque<CellIndex>,
    pub low: VecDeque<CellIndex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    NoFlats,
    AllDrainable,
    SomeUndrainable,
    NoneDrainable,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::NoFlats => "NoFlats",
            Outcome::AllDrainable => "AllDrainable",
            Outcome::SomeUndrainable => "SomeUndrainable",
            Outcome::NoneDrainable => "NoneDrainable",
        })
    }
}

/// Cells processed by each linear pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VisitCounts {
    pub labeling: usize,
    pub away: usize,
    pub towards: usize,
}

impl VisitCounts {
    pub fn total(&self) -> usize {
        self.labeling + self.away + self.towards
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolveReport {
    pub flat_count: usize,
    pub drainable_flat_count: usize,
    pub high_edge_cells: usize,
    pub low_edge_cells: usize,
    pub pruned_high_edges: usize,
    pub outcome: Outcome,
    pub visits: VisitCounts,
}

impl fmt::Display for ResolveReport {
    /// Single line of `key=value` pairs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "flat_count={} drainable_flat_count={} high_edge_cells={} low_edge_cells={} pruned_high_edges={} outcome={} visits={}",
            self.flat_count,
            self.drainable_flat_count,
            self.high_edge_cells,
            self.low_edge_cells,
            self.pruned_high_edges,
            self.outcome,
            self.visits.total()
        )
    }
}

/// Everything [`resolve_flats`] produces.
#[derive(Debug, Clone)]
pub struct FlatResolution {
    pub flatmask: FlatMaskGrid,
    pub labels: LabelGrid,
    pub flat_heights: FlatHeights,
    /// High edges that survived pruning, in queue order.
    pub high_edges: Vec<CellIndex>,
    pub low_edges: Vec<CellIndex>,
    pub report: ResolveReport,
}

/// Finds the high-edge and low-edge cells of every flat.
///
/// A cell with a defined direction beside a same-elevation NoFlow cell is a
/// low edge. A NoFlow cell beside strictly higher terrain is a high edge. The
/// low-edge test runs first, so a cell is never in both queues.
pub fn flat_edges<T: PartialOrd + Copy>(
    dem: &Grid<T>,
    flowdirs: &FlowDirGrid,
) -> Result<EdgeQueues> {
    dem.ensure_same_dims(flowdirs)?;
    let dims = dem.dims();
    let mut edges = EdgeQueues::default();
    for c in dims.cells() {
        let dc = flowdirs[c];
        if dc == Direction::NoData || dem.is_nodata(c) {
            continue;
        }
        for (_, n) in dims.neighbors_unchecked(c) {
            let dn = flowdirs[n];
            if dn == Direction::NoData || dem.is_nodata(n) {
                continue;
            }
            if dc != Direction::NoFlow && dn == Direction::NoFlow && dem[c] == dem[n] {
                edges.low.push_back(c);
                break;
            } else if dc == Direction::NoFlow && dem[c] < dem[n] {
                edges.high.push_back(c);
                break;
            }
        }
    }
    Ok(edges)
}

/// Flood-fills `label` over every cell reachable from `seed` through cells of
/// exactly the seed's elevation. Returns the number of cells labelled.
pub fn label_flats<T: PartialEq + Copy>(
    dem: &Grid<T>,
    labels: &mut LabelGrid,
    seed: CellIndex,
    label: u32,
) -> usize {
    let dims = dem.dims();
    if !dims.contains(seed) || labels[seed] != NO_LABEL {
        return 0;
    }
    let elevation = dem[seed];
    let mut to_fill = VecDeque::new();
    labels[seed] = label;
    to_fill.push_back(seed);
    let mut count = 0;
    while let Some(c) = to_fill.pop_front() {
        count += 1;
        for (_, n) in dims.neighbors_unchecked(c) {
            if labels[n] == NO_LABEL && dem[n] == elevation {
                labels[n] = label;
                to_fill.push_back(n);
            }
        }
    }
    count
}

/// Shared Marker-driven BFS over the NoFlow cells of each labelled flat.
/// `visit` receives each newly popped cell and the current level.
fn marker_bfs(
    labels: &LabelGrid,
    flowdirs: &FlowDirGrid,
    seeds: impl IntoIterator<Item = CellIndex>,
    flatmask: &mut FlatMaskGrid,
    mut visit: impl FnMut(&mut FlatMaskGrid, CellIndex, i32),
) -> usize {
    let dims = labels.dims();
    let mut queued = vec![false; dims.len()];
    let mut queue: VecDeque<CellIndex> = VecDeque::new();
    for s in seeds {
        let i = dims.index_of(s);
        if !queued[i] {
            queued[i] = true;
            queue.push_back(s);
        }
    }
    queue.push_back(MARKER);

    let mut visits = 0;
    let mut loops = 1i32;
    while queue.len() > 1 {
        let c = queue.pop_front().expect("queue holds more than the marker");
        if c == MARKER {
            loops += 1;
            queue.push_back(MARKER);
            continue;
        }
        if flatmask[c] > 0 {
            continue;
        }
        visit(flatmask, c, loops);
        visits += 1;
        let label = labels[c];
        for (_, n) in dims.neighbors_unchecked(c) {
            let i = dims.index_of(n);
            if !queued[i] && labels[n] == label && flowdirs[n] == Direction::NoFlow {
                queued[i] = true;
                queue.push_back(n);
            }
        }
    }
    visits
}

/// Builds the gradient away from higher terrain.
///
/// Each cell reached gets its BFS level (1 for the seeds) in `flatmask`, and
/// its flat's entry in `flat_heights` tracks the largest level seen. Returns
/// the number of cells assigned.
pub fn away_from_higher(
    labels: &LabelGrid,
    flatmask: &mut FlatMaskGrid,
    flowdirs: &FlowDirGrid,
    high_edges: impl IntoIterator<Item = CellIndex>,
    flat_heights: &mut FlatHeights,
) -> usize {
    marker_bfs(labels, flowdirs, high_edges, flatmask, |mask, c, loops| {
        mask[c] = loops;
        flat_heights.set(labels[c], loops);
    })
}

/// Builds the gradient towards lower terrain and superimposes it on the
/// inverted away-from-higher gradient already held in `flatmask`.
///
/// The lower gradient carries twice the weight of the higher one, so every
/// cell of a drainable flat ends with a same-flat neighbour of strictly
/// smaller mask, or is itself a low edge. Returns the number of cells assigned.
pub fn towards_lower(
    labels: &LabelGrid,
    flatmask: &mut FlatMaskGrid,
    flowdirs: &FlowDirGrid,
    low_edges: impl IntoIterator<Item = CellIndex>,
    flat_heights: &FlatHeights,
) -> usize {
    for v in flatmask.as_mut_slice() {
        *v = -*v;
    }
    marker_bfs(labels, flowdirs, low_edges, flatmask, |mask, c, loops| {
        let m = mask[c];
        mask[c] = if m < 0 {
            flat_heights.get(labels[c]) + m + 2 * loops
        } else {
            2 * loops
        };
    })
}

/// Counts the flats reachable from unlabelled high-edge cells.
fn count_undrainable<T: PartialEq + Copy>(dem: &Grid<T>, pruned: &[CellIndex]) -> (usize, usize) {
    let dims = dem.dims();
    let mut seen = vec![false; dims.len()];
    let mut flats = 0;
    let mut visits = 0;
    let mut queue = VecDeque::new();
    for &s in pruned {
        if seen[dims.index_of(s)] {
            continue;
        }
        flats += 1;
        let e = dem[s];
        seen[dims.index_of(s)] = true;
        queue.push_back(s);
        while let Some(c) = queue.pop_front() {
            visits += 1;
            for (_, n) in dims.neighbors_unchecked(c) {
                let i = dims.index_of(n);
                if !seen[i] && dem[n] == e {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    (flats, visits)
}

/// Labels every drainable flat and builds its increment mask.
///
/// `flowdirs` may come from any flow metric whose undefined cells are NoFlow.
/// Undrainable flats are not an error: their cells keep label 0 and mask 0,
/// and the report says so.
pub fn resolve_flats(dem: &Grid<f64>, flowdirs: &FlowDirGrid) -> Result<FlatResolution> {
    resolve_flats_generic(dem, flowdirs)
}

pub(crate) fn resolve_flats_generic<T: PartialOrd + Copy>(
    dem: &Grid<T>,
    flowdirs: &FlowDirGrid,
) -> Result<FlatResolution> {
    let edges = flat_edges(dem, flowdirs)?;
    let (rows, cols) = (dem.rows(), dem.cols());
    let mut flatmask = Grid::new(rows, cols, 0i32, FLATMASK_NODATA)?;
    let mut labels = Grid::new(rows, cols, NO_LABEL, u32::MAX)?;

    let mut report = ResolveReport {
        flat_count: 0,
        drainable_flat_count: 0,
        high_edge_cells: edges.high.len(),
        low_edge_cells: edges.low.len(),
        pruned_high_edges: 0,
        outcome: Outcome::NoFlats,
        visits: VisitCounts::default(),
    };

    if edges.low.is_empty() {
        if !edges.high.is_empty() {
            let high: Vec<_> = edges.high.iter().copied().collect();
            let (flats, visits) = count_undrainable(dem, &high);
            report.outcome = Outcome::NoneDrainable;
            report.flat_count = flats;
            report.pruned_high_edges = high.len();
            report.visits.labeling = visits;
        }
        return Ok(FlatResolution {
            flatmask,
            labels,
            flat_heights: FlatHeights::new(0),
            high_edges: Vec::new(),
            low_edges: Vec::new(),
            report,
        });
    }

    let mut next_label = 1u32;
    for &c in &edges.low {
        if labels[c] == NO_LABEL {
            report.visits.labeling += label_flats(dem, &mut labels, c, next_label);
            next_label += 1;
        }
    }
    let max_label = next_label - 1;

    let (high_edges, pruned): (Vec<_>, Vec<_>) = edges
        .high
        .iter()
        .copied()
        .partition(|&c| labels[c] != NO_LABEL);
    let (undrainable, undrainable_visits) = count_undrainable(dem, &pruned);
    report.visits.labeling += undrainable_visits;
    report.pruned_high_edges = pruned.len();
    report.drainable_flat_count = max_label as usize;
    report.flat_count = max_label as usize + undrainable;
    report.outcome = if pruned.is_empty() {
        Outcome::AllDrainable
    } else {
        Outcome::SomeUndrainable
    };

    let mut flat_heights = FlatHeights::new(max_label);
    report.visits.away = away_from_higher(
        &labels,
        &mut flatmask,
        flowdirs,
        high_edges.iter().copied(),
        &mut flat_heights,
    );
    let low_edges: Vec<_> = edges.low.into_iter().collect();
    report.visits.towards = towards_lower(
        &labels,
        &mut flatmask,
        flowdirs,
        low_edges.iter().copied(),
        &flat_heights,
    );

    Ok(FlatResolution {
        flatmask,
        labels,
        flat_heights,
        high_edges,
        low_edges,
        report,
    })
}

/// Raises every cell of each drainable flat by `FlatMask(c)` of the smallest
/// representable increments, on a copy of `dem`.
///
/// Returns the altered DEM and every cell that now exceeds a neighbour from a
/// different flat which it did not exceed before.
pub fn alter_dem(
    dem: &Grid<f64>,
    flatmask: &FlatMaskGrid,
    labels: &LabelGrid,
) -> Result<(Grid<f64>, Vec<CellIndex>)> {
    dem.ensure_same_dims(flatmask)?;
    dem.ensure_same_dims(labels)?;
    let dims = dem.dims();
    let nodata = dem.nodata();
    let mut out = dem.clone();
    let mut violations = Vec::new();
    let mut higher = [false; 8];
    for c in dims.cells() {
        if out[c] == nodata || labels[c] == NO_LABEL || flatmask[c] <= 0 {
            continue;
        }
        for (k, (_, n)) in dims.neighbors_unchecked(c).enumerate() {
            higher[k] = out[c] > out[n];
        }
        let mut e = out[c];
        for _ in 0..flatmask[c] {
            e = e.next_up();
        }
        out[c] = e;
        for (k, (_, n)) in dims.neighbors_unchecked(c).enumerate() {
            if labels[n] == labels[c] || out[n] == nodata || out[c] <= out[n] {
                continue;
            }
            if !higher[k] {
                violations.push(c);
                break;
            }
        }
    }
    Ok((out, violations))
}

/// Copies an integer raster, writing `nodata` wherever the DEM has no data.
pub fn with_dem_nodata<T: Copy + PartialEq>(grid: &Grid<T>, dem: &Grid<f64>, nodata: T) -> Grid<T> {
    let cells = grid
        .as_slice()
        .iter()
        .zip(dem.as_slice())
        .map(|(&v, &e)| if e == dem.nodata() { nodata } else { v })
        .collect();
    Grid::from_vec(grid.rows(), grid.cols(), cells, nodata)
        .expect("same shape as input")
        .with_georef(dem.georef())
}

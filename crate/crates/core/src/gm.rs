//! Iterative reference resolver in the style of Garbrecht & Martz (1997).
//!
//! Both gradients are grown by repeated sweeps over every cell of a flat,
//! one sweep per distance level, and are superimposed at equal weight. Equal
//! weighting can leave cells with no strictly lower neighbour; those cells
//! form new sub-flats which are resolved by another round on a refined
//! surface. Each refinement stands for "another, smaller increment": the
//! surface is compared lexicographically as (elevation, accumulated mask).
//!
//! This module is an oracle and a benchmark baseline. Its sweeps cost
//! O(cells x flat diameter), against the single linear pass in
//! [`crate::flats`].

use crate::error::{Error, Result};
use crate::flats::{flat_edges, label_flats, FlatMaskGrid, LabelGrid, FLATMASK_NODATA, NO_LABEL};
use crate::flow::{lowest_neighbor, FlowDirGrid};
use crate::raster::{CellIndex, Direction, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmConfig {
    /// Elevation step used by [`increment_elevations_f32`].
    pub increment: f64,
    /// Refinement rounds allowed before giving up.
    pub max_iterations: usize,
}

impl Default for GmConfig {
    fn default() -> Self {
        GmConfig {
            increment: 1e-5,
            max_iterations: 1000,
        }
    }
}

impl GmConfig {
    pub fn new(increment: f64, max_iterations: usize) -> Result<Self> {
        if increment.is_nan() || increment <= 0.0 || max_iterations == 0 {
            return Err(Error::InvalidArgument(format!(
                "increment must be > 0 and max_iterations >= 1 (got {increment}, {max_iterations})"
            )));
        }
        Ok(GmConfig {
            increment,
            max_iterations,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GmResolution {
    pub flowdirs: FlowDirGrid,
    pub iterations: usize,
    /// Cell checks performed by all sweeps.
    pub visits: usize,
}

/// Elevation refined by the masks of earlier rounds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Level {
    elevation: f64,
    fine: u128,
}

struct EqualWeightPass {
    mask: FlatMaskGrid,
    labels: LabelGrid,
    visits: usize,
}

/// Grows a distance field from `seeds` by whole-flat sweeps. A cell joins at
/// level `k` when it is NoFlow and touches a same-flat cell of level `k - 1`.
fn sweep_distances(
    members: &[CellIndex],
    seeds: &[CellIndex],
    labels: &LabelGrid,
    flowdirs: &FlowDirGrid,
    level: &mut Grid<i32>,
) -> (i32, usize) {
    if seeds.is_empty() {
        return (0, 0);
    }
    let dims = labels.dims();
    for &s in seeds {
        level[s] = 1;
    }
    let mut top = 1;
    let mut visits = 0;
    loop {
        let next = top + 1;
        let mut grew = false;
        for &c in members {
            visits += 1;
            if level[c] != 0 || flowdirs[c] != Direction::NoFlow {
                continue;
            }
            let label = labels[c];
            if dims
                .neighbors_unchecked(c)
                .any(|(_, n)| labels[n] == label && level[n] == top)
            {
                level[c] = next;
                grew = true;
            }
        }
        if !grew {
            break;
        }
        top = next;
    }
    (top, visits)
}

fn equal_weight_pass<T: PartialOrd + Copy>(
    surface: &Grid<T>,
    flowdirs: &FlowDirGrid,
) -> Result<Option<EqualWeightPass>> {
    let edges = flat_edges(surface, flowdirs)?;
    if edges.low.is_empty() {
        return Ok(None);
    }
    let (rows, cols) = (surface.rows(), surface.cols());
    let mut labels = Grid::new(rows, cols, NO_LABEL, u32::MAX)?;
    let mut next = 1u32;
    for &c in &edges.low {
        if labels[c] == NO_LABEL {
            label_flats(surface, &mut labels, c, next);
            next += 1;
        }
    }
    let flats = next as usize;
    let mut members: Vec<Vec<CellIndex>> = vec![Vec::new(); flats];
    for c in labels.dims().cells() {
        if labels[c] != NO_LABEL {
            members[labels[c] as usize].push(c);
        }
    }
    let mut high: Vec<Vec<CellIndex>> = vec![Vec::new(); flats];
    for &c in &edges.high {
        if labels[c] != NO_LABEL {
            high[labels[c] as usize].push(c);
        }
    }
    let mut low: Vec<Vec<CellIndex>> = vec![Vec::new(); flats];
    for &c in &edges.low {
        low[labels[c] as usize].push(c);
    }

    let mut away = Grid::new(rows, cols, 0i32, 0)?;
    let mut lower = Grid::new(rows, cols, 0i32, 0)?;
    let mut mask = Grid::new(rows, cols, 0i32, FLATMASK_NODATA)?;
    let mut visits = 0;
    for label in 1..flats {
        let cells = &members[label];
        let (height, v_away) = sweep_distances(cells, &high[label], &labels, flowdirs, &mut away);
        let (_, v_lower) = sweep_distances(cells, &low[label], &labels, flowdirs, &mut lower);
        visits += v_away + v_lower;
        for &c in cells {
            mask[c] = match (away[c], lower[c]) {
                (_, 0) => 0,
                (0, l) => l,
                (a, l) => height - a + l,
            };
        }
    }
    Ok(Some(EqualWeightPass {
        mask,
        labels,
        visits,
    }))
}

/// Equal-weight superposition of the away-from-higher and towards-lower
/// gradients: `(FlatHeight - away) + lower`, or `lower` alone for cells the
/// away gradient never reaches (such as low edges).
pub fn gm_combined_mask(dem: &Grid<f64>, flowdirs: &FlowDirGrid) -> Result<FlatMaskGrid> {
    match equal_weight_pass(dem, flowdirs)? {
        Some(pass) => Ok(pass.mask),
        None => Grid::new(dem.rows(), dem.cols(), 0, FLATMASK_NODATA),
    }
}

fn refine(surface: &mut Grid<Level>, mask: &FlatMaskGrid) {
    let scale = mask.as_slice().iter().copied().max().unwrap_or(0).max(0) as u128 + 1;
    let fits = surface.as_slice().iter().all(|l| {
        l.fine
            .checked_mul(scale)
            .and_then(|f| f.checked_add(scale))
            .is_some()
    });
    if !fits {
        // Re-rank the refinements; only their order matters.
        let mut distinct: Vec<u128> = surface.as_slice().iter().map(|l| l.fine).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for l in surface.as_mut_slice() {
            l.fine = distinct.binary_search(&l.fine).expect("value present") as u128;
        }
    }
    for (l, &m) in surface.as_mut_slice().iter_mut().zip(mask.as_slice()) {
        l.fine = l.fine * scale + m.max(0) as u128;
    }
}

/// Resolves drainable flats by repeated equal-weight rounds until no NoFlow
/// cell is left in them.
pub fn gm_resolve_flats(
    dem: &Grid<f64>,
    flowdirs: &FlowDirGrid,
    cfg: &GmConfig,
) -> Result<GmResolution> {
    dem.ensure_same_dims(flowdirs)?;
    let nodata = Level {
        elevation: dem.nodata(),
        fine: 0,
    };
    let mut surface = dem.map(nodata, |elevation| Level { elevation, fine: 0 });
    let mut dirs = flowdirs.clone();
    let mut drainable: Option<LabelGrid> = None;
    let mut iterations = 0;
    let mut visits = 0;

    let remaining = |dirs: &FlowDirGrid, drainable: &Option<LabelGrid>| {
        drainable.as_ref().map_or(0, |labels| {
            dirs.as_slice()
                .iter()
                .zip(labels.as_slice())
                .filter(|&(&d, &l)| d == Direction::NoFlow && l != NO_LABEL)
                .count()
        })
    };

    while let Some(pass) = equal_weight_pass(&surface, &dirs)? {
        if iterations == cfg.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                remaining: remaining(&dirs, &drainable),
            });
        }
        iterations += 1;
        visits += pass.visits;

        let dims = dirs.dims();
        let mut next = dirs.clone();
        for c in dims.cells() {
            let label = pass.labels[c];
            if label == NO_LABEL || dirs[c] != Direction::NoFlow {
                continue;
            }
            let candidates = dims
                .neighbors_unchecked(c)
                .filter(|&(_, n)| pass.labels[n] == label)
                .map(|(d, n)| (d, i64::from(pass.mask[n])));
            next[c] = lowest_neighbor(i64::from(pass.mask[c]), candidates);
        }
        dirs = next;
        refine(&mut surface, &pass.mask);
        drainable.get_or_insert(pass.labels);
    }

    let left = remaining(&dirs, &drainable);
    if left > 0 {
        return Err(Error::NonConvergence {
            iterations,
            remaining: left,
        });
    }
    Ok(GmResolution {
        flowdirs: dirs,
        iterations,
        visits,
    })
}

/// Adds `FlatMask(c) * cfg.increment` to every drainable flat cell in single
/// precision, the way the original scheme alters the DEM in place.
///
/// When the increment is below the spacing of representable values at the
/// flat's elevation, the additions are lost and the flat stays flat.
pub fn increment_elevations_f32(
    dem: &Grid<f32>,
    flatmask: &FlatMaskGrid,
    labels: &LabelGrid,
    cfg: &GmConfig,
) -> Result<Grid<f32>> {
    dem.ensure_same_dims(flatmask)?;
    dem.ensure_same_dims(labels)?;
    let step = cfg.increment as f32;
    let mut out = dem.clone();
    for c in dem.dims().cells() {
        if dem.is_nodata(c) || labels[c] == NO_LABEL {
            continue;
        }
        for _ in 0..flatmask[c] {
            out[c] += step;
        }
    }
    Ok(out)
}

//! Fixtures and independent oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the crate's neighbour iterator, queues and
//! labelling code: they re-derive edges, flats and distances with plain
//! vectors and a stack-based fill.

#![allow(dead_code)]

use flatdrain::flats::resolve_flats;
use flatdrain::flats::{
    away_from_higher, flat_edges, towards_lower, FlatHeights, FlatMaskGrid, LabelGrid,
};
use flatdrain::flow::{
    d8_flow_directions, d8_masked_flow_directions, steps_to_exit, EdgePolicy, FlowDirGrid,
};
use flatdrain::{CellIndex, Direction, Grid};
use std::collections::VecDeque;

pub const NODATA: f64 = -9999.0;

const OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

pub fn grid_f64(rows: &[&[f64]]) -> Grid<f64> {
    Grid::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), NODATA).unwrap()
}

/// Expands a 5x5 block (top row first) into a 7x7 grid with zeros around it.
pub fn embed_7x7(block: [[i32; 5]; 5]) -> Vec<Vec<i32>> {
    let mut out = vec![vec![0; 7]; 7];
    for (r, row) in block.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            out[r + 1][c + 1] = v;
        }
    }
    out
}

pub const AWAY_PASS: [[i32; 5]; 5] = [
    [1, 1, 1, 1, 1],
    [1, 2, 2, 2, 1],
    [1, 2, 3, 2, 1],
    [1, 2, 2, 2, 1],
    [0, 0, 0, 1, 1],
];

pub const TOWARDS_PASS: [[i32; 5]; 5] = [
    [5, 5, 5, 5, 5],
    [4, 4, 4, 4, 4],
    [3, 3, 3, 3, 3],
    [2, 2, 2, 2, 3],
    [1, 1, 1, 2, 3],
];

pub const COMBINED_MASK: [[i32; 5]; 5] = [
    [12, 12, 12, 12, 12],
    [10, 9, 9, 9, 10],
    [8, 7, 6, 7, 8],
    [6, 5, 5, 5, 8],
    [2, 2, 2, 6, 8],
];

pub const EQUAL_WEIGHT_MASK: [[i32; 5]; 5] = [
    [7, 7, 7, 7, 7],
    [6, 5, 5, 5, 6],
    [5, 4, 3, 4, 5],
    [4, 3, 3, 3, 5],
    [1, 1, 1, 4, 5],
];

/// Final directions over the 5x5 flat after resolution.
pub fn resolved_directions() -> [[Direction; 5]; 5] {
    use Direction::*;
    [
        [SE, S, S, S, SW],
        [SE, SE, S, SW, SW],
        [SE, S, S, S, SW],
        [S, S, S, SW, W],
        [SE, S, SW, W, NW],
    ]
}

/// A 5x5 bowl: a 3x3 flat at 1.0 enclosed by 2.0.
pub fn bowl_dem() -> Grid<f64> {
    let mut g = Grid::new(5, 5, 2.0, NODATA).unwrap();
    for r in 1..4 {
        for c in 1..4 {
            g[CellIndex::new(r, c)] = 1.0;
        }
    }
    g
}

/// The worked example on the left and a 3x3 bowl at 1.5 on the right,
/// sharing one grid at base elevation 2.0.
pub fn composite_dem() -> Grid<f64> {
    let mut g = Grid::new(7, 13, 2.0, NODATA).unwrap();
    for r in 1..6 {
        for c in 1..6 {
            g[CellIndex::new(r, c)] = 1.0;
        }
    }
    g[CellIndex::new(6, 2)] = 0.0;
    for r in 2..5 {
        for c in 8..11 {
            g[CellIndex::new(r, c)] = 1.5;
        }
    }
    g
}

pub fn is_bowl_cell(c: CellIndex) -> bool {
    (2..5).contains(&c.row) && (8..11).contains(&c.col)
}

/// Directions, resolution and masked directions, as the CLI runs them.
pub struct Pipeline {
    pub initial: FlowDirGrid,
    pub flatmask: FlatMaskGrid,
    pub labels: LabelGrid,
    pub resolved: FlowDirGrid,
    pub visits: usize,
}

pub fn pipeline(dem: &Grid<f64>, policy: EdgePolicy) -> Pipeline {
    let initial = d8_flow_directions(dem, policy);
    let res = resolve_flats(dem, &initial).unwrap();
    let resolved = d8_masked_flow_directions(&res.flatmask, &res.labels, &initial).unwrap();
    Pipeline {
        initial,
        flatmask: res.flatmask,
        labels: res.labels,
        resolved,
        visits: res.report.visits.total(),
    }
}

/// Cells of drainable flats whose flow path never leaves the flat within
/// `rows * cols` steps.
pub fn drainage_failures(p: &Pipeline) -> Vec<CellIndex> {
    let budget = p.labels.len();
    p.labels
        .dims()
        .cells()
        .filter(|&c| p.labels[c] != 0)
        .filter(|&c| {
            let l = p.labels[c];
            steps_to_exit(&p.resolved, c, budget, |x| p.labels[x] == l).is_none()
        })
        .collect()
}

/// Raw increments of the two linear passes, run on their own.
pub struct PassFields {
    pub away: Vec<i32>,
    pub towards: Vec<i32>,
}

pub fn pass_fields(dem: &Grid<f64>, dirs: &FlowDirGrid, labels: &LabelGrid) -> PassFields {
    let edges = flat_edges(dem, dirs).unwrap();
    let max_label = labels.as_slice().iter().copied().max().unwrap_or(0);
    let high: Vec<_> = edges
        .high
        .iter()
        .copied()
        .filter(|&c| labels[c] != 0)
        .collect();

    let mut away = Grid::new(dem.rows(), dem.cols(), 0i32, -1).unwrap();
    let mut heights = FlatHeights::new(max_label);
    away_from_higher(labels, &mut away, dirs, high, &mut heights);

    let mut towards = Grid::new(dem.rows(), dem.cols(), 0i32, -1).unwrap();
    towards_lower(
        labels,
        &mut towards,
        dirs,
        edges.low.iter().copied(),
        &FlatHeights::new(max_label),
    );
    PassFields {
        away: away.into_vec(),
        towards: towards.into_vec().into_iter().map(|v| v / 2).collect(),
    }
}

/// What the oracle derives from a DEM and its initial directions.
pub struct Oracle {
    pub rows: usize,
    pub cols: usize,
    pub labels: Vec<u32>,
    /// 1 + distance from the nearest high edge, 0 if unreached.
    pub away: Vec<i32>,
    /// 1 + distance from the nearest low edge, 0 if unreached.
    pub towards: Vec<i32>,
    pub flat_height: Vec<i32>,
}

impl Oracle {
    pub fn new(dem: &Grid<f64>, dirs: &FlowDirGrid) -> Oracle {
        let (rows, cols) = (dem.rows(), dem.cols());
        let z = dem.as_slice();
        let noflow: Vec<bool> = dirs
            .as_slice()
            .iter()
            .map(|&d| d == Direction::NoFlow)
            .collect();
        let nbrs = |i: usize| {
            let (r, c) = ((i / cols) as isize, (i % cols) as isize);
            OFFSETS.iter().filter_map(move |&(dr, dc)| {
                let (nr, nc) = (r + dr, c + dc);
                (nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols)
                    .then(|| nr as usize * cols + nc as usize)
            })
        };

        let n = rows * cols;
        let mut low = Vec::new();
        let mut high = Vec::new();
        for i in 0..n {
            if z[i] == dem.nodata() {
                continue;
            }
            if !noflow[i] {
                if nbrs(i).any(|j| noflow[j] && z[j] == z[i]) {
                    low.push(i);
                }
            } else if nbrs(i).any(|j| z[j] != dem.nodata() && z[j] > z[i]) {
                high.push(i);
            }
        }

        let mut labels = vec![0u32; n];
        let mut next = 0u32;
        for &s in &low {
            if labels[s] != 0 {
                continue;
            }
            next += 1;
            let mut stack = vec![s];
            labels[s] = next;
            while let Some(i) = stack.pop() {
                for j in nbrs(i) {
                    if labels[j] == 0 && z[j] == z[s] {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
        }

        let bfs = |sources: &[usize]| {
            let mut dist = vec![-1i32; n];
            let mut q = VecDeque::new();
            for &s in sources {
                if labels[s] != 0 && dist[s] < 0 {
                    dist[s] = 0;
                    q.push_back(s);
                }
            }
            while let Some(i) = q.pop_front() {
                for j in nbrs(i) {
                    if dist[j] < 0 && noflow[j] && labels[j] == labels[i] {
                        dist[j] = dist[i] + 1;
                        q.push_back(j);
                    }
                }
            }
            dist.into_iter().map(|d| d + 1).collect::<Vec<i32>>()
        };
        let away = bfs(&high);
        let towards = bfs(&low);

        let mut flat_height = vec![0i32; next as usize + 1];
        for i in 0..n {
            let l = labels[i] as usize;
            flat_height[l] = flat_height[l].max(away[i]);
        }
        Oracle {
            rows,
            cols,
            labels,
            away,
            towards,
            flat_height,
        }
    }

    /// `(FlatHeight - away) + weight * towards`, with `weight * towards` alone
    /// where the away gradient never reached.
    pub fn superposition(&self, weight: i32) -> Vec<i32> {
        (0..self.rows * self.cols)
            .map(|i| {
                let (a, t) = (self.away[i], self.towards[i]);
                match (a, t) {
                    (_, 0) => 0,
                    (0, t) => weight * t,
                    (a, t) => self.flat_height[self.labels[i] as usize] - a + weight * t,
                }
            })
            .collect()
    }
}

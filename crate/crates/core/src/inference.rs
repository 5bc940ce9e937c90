//! Interventional stability prediction and next-best placement.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{Action, BlockSpec, NoiseModel, Offset, TowerState};
use crate::scm::do_sample;
use crate::seed::derive_sample_seed;

pub const PREDICT_STREAM: &str = "predict";
pub const HEATMAP_STREAM: &str = "heatmap";
pub const SELECT_STREAM: &str = "select";

pub const DEFAULT_GRID: (usize, usize) = (9, 9);
pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_SAMPLES_PER_CELL: usize = 2000;

/// Monte-Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub p: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_count(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Estimate { p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n }
    }
}

/// `P(stable | belief, do(A = action))`.
pub fn predict_stability(
    belief: &TowerState,
    action: &Action,
    noise: &NoiseModel,
    n_samples: usize,
    seed: u64,
    exec: &Executor,
) -> Result<Estimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    noise.validate()?;
    let hits = exec.try_count(n_samples, |i| {
        do_sample(belief, action, noise, derive_sample_seed(seed, PREDICT_STREAM, i as u64))
    })?;
    Ok(Estimate::from_count(hits, n_samples))
}

/// Uniform `nx * ny` grid of placement offsets spanning `[-half, +half]` on
/// each axis, endpoints included. A single point per axis sits at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateGrid {
    pub nx: usize,
    pub ny: usize,
    pub half_x: f64,
    pub half_y: f64,
}

/// Offset of node `i` among `n` nodes on `[-half, half]`.
///
/// Written as `half * (2i - (n-1)) / (n-1)` so that mirrored nodes are exact
/// negations of each other.
fn axis_node(half: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let k = 2 * i as i64 - (n as i64 - 1);
    half * k as f64 / (n - 1) as f64
}

impl CandidateGrid {
    pub fn new(nx: usize, ny: usize, half_x: f64, half_y: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!("grid must be at least 1x1, got {nx}x{ny}")));
        }
        Ok(CandidateGrid { nx, ny, half_x, half_y })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offset(&self, i: usize, j: usize) -> Offset {
        (axis_node(self.half_x, self.nx, i), axis_node(self.half_y, self.ny, j))
    }

    /// Row-major: `y` index outer, `x` index inner.
    pub fn offsets(&self) -> Vec<Offset> {
        (0..self.ny).flat_map(|j| (0..self.nx).map(move |i| self.offset(i, j))).collect()
    }
}

/// Candidates over the top block's footprint, or over the table when the
/// tower is empty.
pub fn candidate_grid(belief: &TowerState, nx: usize, ny: usize) -> Result<CandidateGrid> {
    let (hx, hy) = belief
        .top()
        .map_or(belief.support_half_extents, |b| b.spec.half_extents());
    CandidateGrid::new(nx, ny, hx, hy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityHeatmap {
    /// Offset of cell `(0, 0)` relative to the anchor.
    pub origin: Offset,
    pub spacing: Offset,
    pub dims: (usize, usize),
    /// Row-major, `dims.0` values per row.
    pub probabilities: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_per_cell: usize,
}

impl StabilityHeatmap {
    pub fn grid(&self) -> CandidateGrid {
        CandidateGrid {
            nx: self.dims.0,
            ny: self.dims.1,
            half_x: -self.origin.0,
            half_y: -self.origin.1,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.dims.0 + i
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probabilities[self.index(i, j)]
    }

    pub fn cell_stderr(&self, i: usize, j: usize) -> f64 {
        self.stderr[self.index(i, j)]
    }

    pub fn offset(&self, i: usize, j: usize) -> Offset {
        self.grid().offset(i, j)
    }

    /// `offset_x,offset_y,p_stable,stderr`, six fractional digits, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("offset_x,offset_y,p_stable,stderr\n");
        for j in 0..self.dims.1 {
            for i in 0..self.dims.0 {
                let (x, y) = self.offset(i, j);
                let _ = writeln!(out, "{:.6},{:.6},{:.6},{:.6}", x, y, self.p(i, j), self.cell_stderr(i, j));
            }
        }
        out
    }

    /// Plain PGM (P2), probabilities quantised to 0..=255; `ny` rows of `nx`.
    pub fn to_pgm(&self) -> String {
        let (nx, ny) = self.dims;
        let mut out = format!("P2\n{nx} {ny}\n255\n");
        for j in 0..ny {
            let row: Vec<String> = (0..nx)
                .map(|i| ((self.p(i, j) * 255.0).round() as u8).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Estimates every cell of `grid`; cell `c` uses master seed
/// `derive_sample_seed(seed, "heatmap", c)`.
pub fn stability_heatmap(
    belief: &TowerState,
    new_block: &BlockSpec,
    grid: &CandidateGrid,
    noise: &NoiseModel,
    n_per_cell: usize,
    seed: u64,
    exec: &Executor,
) -> Result<StabilityHeatmap> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty candidate grid".into()));
    }
    if n_per_cell == 0 {
        return Err(Error::InvalidArgument("n_per_cell must be at least 1".into()));
    }
    noise.validate()?;
    let offsets = grid.offsets();
    let cells = exec.map(offsets.len(), |c| {
        let (dx, dy) = offsets[c];
        let action = Action::place(new_block.clone(), dx, dy);
        let cell_seed = derive_sample_seed(seed, HEATMAP_STREAM, c as u64);
        predict_stability(belief, &action, noise, n_per_cell, cell_seed, &Executor::sequential())
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let spacing = |half: f64, n: usize| if n > 1 { 2.0 * half / (n - 1) as f64 } else { 0.0 };
    let origin = |half: f64, n: usize| if n > 1 { -half } else { 0.0 };
    Ok(StabilityHeatmap {
        origin: (origin(grid.half_x, grid.nx), origin(grid.half_y, grid.ny)),
        spacing: (spacing(grid.half_x, grid.nx), spacing(grid.half_y, grid.ny)),
        dims: (grid.nx, grid.ny),
        probabilities: cells.iter().map(|e| e.p).collect(),
        stderr: cells.iter().map(|e| e.stderr).collect(),
        n_per_cell,
    })
}

/// How the admissible cells are combined into one placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidRule {
    /// Component-wise arithmetic mean.
    #[default]
    Arithmetic,
    /// Component-wise geometric mean after shifting every coordinate by
    /// `2 * half` so that it is positive, then shifting back.
    ShiftedGeometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub threshold: f64,
    pub rule: CentroidRule,
    /// Samples for re-estimating the chosen placement.
    pub n_samples: usize,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(threshold: f64, n_samples: usize, seed: u64) -> Self {
        SelectionConfig { threshold, rule: CentroidRule::Arithmetic, n_samples, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub action: Action,
    pub offset: Offset,
    pub expected: Estimate,
    /// Cells with `p >= threshold`.
    pub admissible: usize,
    /// True when no cell met the threshold and the argmax cell was taken.
    pub fallback: bool,
}

/// Index-space mean over `count` nodes with summed index `sum`, mapped back
/// onto the axis without rounding a symmetric set away from zero.
fn axis_centroid(half: f64, n: usize, sum: usize, count: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let num = 2 * sum as i128 - (count as i128) * (n as i128 - 1);
    half * num as f64 / (count as f64 * (n - 1) as f64)
}

fn shifted_geometric(values: impl Iterator<Item = f64>, shift: f64) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + (v + shift).ln(), c + 1));
    (sum / count as f64).exp() - shift
}

/// Placement offset chosen from `heatmap` under `rule` (without the
/// re-estimate). Returns `(offset, admissible, fallback)`.
pub fn choose_offset(heatmap: &StabilityHeatmap, threshold: f64, rule: CentroidRule) -> (Offset, usize, bool) {
    let (nx, ny) = heatmap.dims;
    let grid = heatmap.grid();
    let cells: Vec<(usize, usize)> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .filter(|&(i, j)| heatmap.p(i, j) >= threshold)
        .collect();
    if cells.is_empty() {
        let mut best = (0, 0);
        for j in 0..ny {
            for i in 0..nx {
                let (p, q) = (heatmap.p(i, j), heatmap.p(best.0, best.1));
                let better = p > q
                    || (p == q && {
                        let (a, b) = (grid.offset(i, j), grid.offset(best.0, best.1));
                        a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
                    });
                if better {
                    best = (i, j);
                }
            }
        }
        return (grid.offset(best.0, best.1), 0, true);
    }
    let offset = match rule {
        CentroidRule::Arithmetic => {
            let sx: usize = cells.iter().map(|c| c.0).sum();
            let sy: usize = cells.iter().map(|c| c.1).sum();
            (
                axis_centroid(grid.half_x, nx, sx, cells.len()),
                axis_centroid(grid.half_y, ny, sy, cells.len()),
            )
        }
        CentroidRule::ShiftedGeometric => (
            shifted_geometric(cells.iter().map(|c| grid.offset(c.0, c.1).0), 2.0 * grid.half_x.max(1e-9)),
            shifted_geometric(cells.iter().map(|c| grid.offset(c.0, c.1).1), 2.0 * grid.half_y.max(1e-9)),
        ),
    };
    (offset, cells.len(), false)
}

/// Next-best placement: the centroid of cells whose probability meets the
/// threshold, re-estimated at that offset with a fresh seed. With no
/// admissible cell the highest-probability cell is taken (ties to the
/// lexicographically smallest offset) and its own estimate is reported.
pub fn select_action(
    belief: &TowerState,
    new_block: &BlockSpec,
    heatmap: &StabilityHeatmap,
    noise: &NoiseModel,
    config: &SelectionConfig,
    exec: &Executor,
) -> Result<Selection> {
    if heatmap.probabilities.is_empty() {
        return Err(Error::InvalidArgument("empty heatmap".into()));
    }
    let (offset, admissible, fallback) = choose_offset(heatmap, config.threshold, config.rule);
    let action = Action::place(new_block.clone(), offset.0, offset.1);
    let expected = if fallback {
        let grid = heatmap.grid();
        let (i, j) = (0..heatmap.dims.1)
            .flat_map(|j| (0..heatmap.dims.0).map(move |i| (i, j)))
            .find(|&(i, j)| grid.offset(i, j) == offset)
            .expect("fallback offset is a grid node");
        Estimate { p: heatmap.p(i, j), stderr: heatmap.cell_stderr(i, j), n: heatmap.n_per_cell }
    } else {
        let seed = derive_sample_seed(config.seed, SELECT_STREAM, 0);
        predict_stability(belief, &action, noise, config.n_samples, seed, exec)?
    };
    Ok(Selection { action, offset, expected, admissible, fallback })
}

//! Domain types: blocks, towers, actions, noise and episode traces.
//!
//! Blocks are axis-aligned cuboids. A tower is a single column, bottom block
//! first; block heights determine z so only planar centres are stored.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar displacement `(dx, dy)` in meters.
pub type Offset = (f64, f64);

/// Axis-aligned rectangle in the table plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn centered(center: Offset, half: Offset) -> Self {
        Rect {
            min_x: center.0 - half.0,
            min_y: center.1 - half.1,
            max_x: center.0 + half.0,
            max_y: center.1 + half.1,
        }
    }

    /// May be degenerate (`min > max`) when the inputs are disjoint.
    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            min_x: self.min_x.max(other.min_x),
            min_y: self.min_y.max(other.min_y),
            max_x: self.max_x.min(other.max_x),
            max_y: self.max_y.min(other.max_y),
        }
    }

    /// True when the rectangle has strictly positive area.
    pub fn has_area(&self) -> bool {
        self.max_x > self.min_x && self.max_y > self.min_y
    }

    pub fn area(&self) -> f64 {
        if self.has_area() {
            (self.max_x - self.min_x) * (self.max_y - self.min_y)
        } else {
            0.0
        }
    }

    /// Signed distance from `p` to the boundary, positive strictly inside.
    ///
    /// Inside (or on the boundary) this is the distance to the nearest edge;
    /// outside it is minus the Euclidean distance to the rectangle. For a
    /// rectangle without area the result is never positive.
    pub fn signed_margin(&self, p: Offset) -> f64 {
        let edge = (p.0 - self.min_x)
            .min(self.max_x - p.0)
            .min(p.1 - self.min_y)
            .min(self.max_y - p.1);
        if !self.has_area() || edge >= 0.0 {
            return edge;
        }
        let dx = (self.min_x - p.0).max(0.0).max(p.0 - self.max_x);
        let dy = (self.min_y - p.1).max(0.0).max(p.1 - self.max_y);
        -(dx * dx + dy * dy).sqrt()
    }

    pub fn contains_strict(&self, p: Offset) -> bool {
        p.0 > self.min_x && p.0 < self.max_x && p.1 > self.min_y && p.1 < self.max_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub id: String,
    /// x-extent, meters.
    pub width: f64,
    /// y-extent, meters.
    pub depth: f64,
    /// z-extent, meters.
    pub height: f64,
    /// kilograms.
    pub mass: f64,
    pub color: String,
}

impl BlockSpec {
    pub fn cube(id: impl Into<String>, side: f64, mass: f64) -> Self {
        BlockSpec {
            id: id.into(),
            width: side,
            depth: side,
            height: side,
            mass,
            color: "grey".into(),
        }
    }

    pub fn half_extents(&self) -> Offset {
        (self.width / 2.0, self.depth / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidBlock { id: self.id.clone(), reason: reason.into() })
        };
        for (name, v) in [
            ("width", self.width),
            ("depth", self.depth),
            ("height", self.height),
            ("mass", self.mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.id.is_empty() {
            return bad("id must be non-empty");
        }
        Ok(())
    }
}

/// Flat on-disk form of a placed block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    id: String,
    width: f64,
    depth: f64,
    height: f64,
    mass: f64,
    color: String,
    center_x: f64,
    center_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "BlockRecord", into = "BlockRecord")]
pub struct PlacedBlock {
    pub spec: BlockSpec,
    pub center_x: f64,
    pub center_y: f64,
}

impl From<BlockRecord> for PlacedBlock {
    fn from(r: BlockRecord) -> Self {
        PlacedBlock {
            spec: BlockSpec {
                id: r.id,
                width: r.width,
                depth: r.depth,
                height: r.height,
                mass: r.mass,
                color: r.color,
            },
            center_x: r.center_x,
            center_y: r.center_y,
        }
    }
}

impl From<PlacedBlock> for BlockRecord {
    fn from(b: PlacedBlock) -> Self {
        BlockRecord {
            id: b.spec.id,
            width: b.spec.width,
            depth: b.spec.depth,
            height: b.spec.height,
            mass: b.spec.mass,
            color: b.spec.color,
            center_x: b.center_x,
            center_y: b.center_y,
        }
    }
}

impl PlacedBlock {
    pub fn new(spec: BlockSpec, center_x: f64, center_y: f64) -> Self {
        PlacedBlock { spec, center_x, center_y }
    }

    pub fn center(&self) -> Offset {
        (self.center_x, self.center_y)
    }

    pub fn footprint(&self) -> Rect {
        Rect::centered(self.center(), self.spec.half_extents())
    }

    pub fn translated(&self, d: Offset) -> Self {
        PlacedBlock {
            spec: self.spec.clone(),
            center_x: self.center_x + d.0,
            center_y: self.center_y + d.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerState {
    /// Bottom block first.
    pub blocks: Vec<PlacedBlock>,
    /// Half extents of the table surface, centred at the origin.
    pub support_half_extents: Offset,
    #[serde(default)]
    pub collapsed: bool,
}

impl TowerState {
    pub fn new(blocks: Vec<PlacedBlock>, support_half_extents: Offset) -> Self {
        TowerState { blocks, support_half_extents, collapsed: false }
    }

    /// A tower on a table large enough to never matter.
    pub fn on_wide_table(blocks: Vec<PlacedBlock>) -> Self {
        TowerState::new(blocks, (10.0, 10.0))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn top(&self) -> Option<&PlacedBlock> {
        self.blocks.last()
    }

    pub fn support_rect(&self) -> Rect {
        Rect::centered((0.0, 0.0), self.support_half_extents)
    }

    pub fn has_support(&self) -> bool {
        self.support_rect().has_area()
    }

    /// Placement anchor: the top block centre, or the table origin.
    pub fn anchor(&self) -> Offset {
        self.top().map_or((0.0, 0.0), PlacedBlock::center)
    }

    /// z of block `i`'s centre.
    pub fn z_center(&self, i: usize) -> f64 {
        let below: f64 = self.blocks[..i].iter().map(|b| b.spec.height).sum();
        below + self.blocks[i].spec.height / 2.0
    }

    pub fn height(&self) -> f64 {
        self.blocks.iter().map(|b| b.spec.height).sum()
    }

    /// Footprint of whatever supports block `i` (the table for `i == 0`).
    pub fn support_below(&self, i: usize) -> Rect {
        if i == 0 {
            self.support_rect()
        } else {
            self.blocks[i - 1].footprint()
        }
    }

    /// Per-block translation; `offsets.len()` must equal the block count.
    pub fn translated(&self, offsets: &[Offset], sign: f64) -> Result<Self> {
        if offsets.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                actual: offsets.len(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .zip(offsets)
            .map(|(b, d)| b.translated((sign * d.0, sign * d.1)))
            .collect();
        Ok(TowerState { blocks, ..self.clone() })
    }

    pub fn mirrored_x(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| PlacedBlock::new(b.spec.clone(), -b.center_x, b.center_y))
            .collect();
        TowerState { blocks, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let (hx, hy) = self.support_half_extents;
        if !(hx.is_finite() && hy.is_finite() && hx >= 0.0 && hy >= 0.0) {
            return Err(Error::InvalidState(format!(
                "support half extents must be finite and non-negative, got ({hx}, {hy})"
            )));
        }
        let mut ids = std::collections::HashSet::new();
        for b in &self.blocks {
            b.spec.validate()?;
            if !(b.center_x.is_finite() && b.center_y.is_finite()) {
                return Err(Error::InvalidState(format!("block `{}` has a non-finite centre", b.spec.id)));
            }
            if !ids.insert(b.spec.id.as_str()) {
                return Err(Error::InvalidState(format!("duplicate block id `{}`", b.spec.id)));
            }
        }
        if self.collapsed {
            return Ok(());
        }
        for i in 0..self.blocks.len() {
            let contact = self.support_below(i).intersect(&self.blocks[i].footprint());
            if !contact.has_area() {
                let what = if i == 0 {
                    "the support surface".to_string()
                } else {
                    format!("block `{}`", self.blocks[i - 1].spec.id)
                };
                return Err(Error::InvalidState(format!(
                    "block `{}` has no contact area with {what}",
                    self.blocks[i].spec.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Null,
    /// New block centred at the current top block's believed centre plus
    /// `(offset_x, offset_y)`; relative to the table origin on an empty tower.
    Place { spec: BlockSpec, offset_x: f64, offset_y: f64 },
}

impl Action {
    pub fn place(spec: BlockSpec, offset_x: f64, offset_y: f64) -> Self {
        Action::Place { spec, offset_x, offset_y }
    }

    pub fn offset(&self) -> Option<Offset> {
        match self {
            Action::Null => None,
            Action::Place { offset_x, offset_y, .. } => Some((*offset_x, *offset_y)),
        }
    }

    pub fn mirrored_x(&self) -> Self {
        match self {
            Action::Null => Action::Null,
            Action::Place { spec, offset_x, offset_y } => {
                Action::place(spec.clone(), -offset_x, *offset_y)
            }
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Null => write!(f, "null"),
            Action::Place { spec, offset_x, offset_y } => {
                write!(f, "place {} {} {}", spec.id, offset_x, offset_y)
            }
        }
    }
}

/// Which planar axes the noise acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseAxes {
    #[default]
    Planar,
    /// y components are identically zero.
    XOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// Uniform over the five points `{-2, -1, 0, 1, 2} * sigma`, so that
    /// probabilities can be enumerated exactly.
    Lattice5,
}

/// Lattice nodes of [`NoiseFamily::Lattice5`] in units of sigma.
pub const LATTICE5: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis std of sensor noise, i.i.d. across blocks and axes (m).
    pub sigma_s: f64,
    /// Per-axis std of actuation noise (m).
    pub sigma_a: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub axes: NoiseAxes,
    #[serde(default, skip_serializing_if = "is_default")]
    pub family: NoiseFamily,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl NoiseModel {
    pub fn gaussian(sigma_s: f64, sigma_a: f64) -> Self {
        NoiseModel { sigma_s, sigma_a, axes: NoiseAxes::Planar, family: NoiseFamily::Gaussian }
    }

    pub fn noiseless() -> Self {
        NoiseModel::gaussian(0.0, 0.0)
    }

    pub fn with_axes(self, axes: NoiseAxes) -> Self {
        NoiseModel { axes, ..self }
    }

    pub fn with_family(self, family: NoiseFamily) -> Self {
        NoiseModel { family, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_s", self.sigma_s), ("sigma_a", self.sigma_a)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidNoise(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn draw_scalar<R: Rng + ?Sized>(&self, rng: &mut R, sigma: f64) -> f64 {
        let unit = match self.family {
            NoiseFamily::Gaussian => rng.sample::<f64, _>(StandardNormal),
            NoiseFamily::Lattice5 => LATTICE5[rng.random_range(0..LATTICE5.len())],
        };
        if sigma == 0.0 {
            0.0
        } else {
            sigma * unit
        }
    }

    fn draw_planar<R: Rng + ?Sized>(&self, rng: &mut R, sigma: f64) -> Offset {
        let x = self.draw_scalar(rng, sigma);
        let y = match self.axes {
            NoiseAxes::Planar => self.draw_scalar(rng, sigma),
            NoiseAxes::XOnly => 0.0,
        };
        (x, y)
    }

    /// Draws `ws` for `n_blocks` blocks (bottom first, x before y), then `wa`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n_blocks: usize) -> ExogenousSample {
        let ws = (0..n_blocks).map(|_| self.draw_planar(rng, self.sigma_s)).collect();
        let wa = self.draw_planar(rng, self.sigma_a);
        ExogenousSample { ws, wa }
    }
}

/// One realisation of the exogenous noise variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousSample {
    /// Sensor noise, one entry per observed block.
    pub ws: Vec<Offset>,
    /// Actuation noise.
    pub wa: Offset,
}

impl ExogenousSample {
    pub fn zero(n_blocks: usize) -> Self {
        ExogenousSample { ws: vec![(0.0, 0.0); n_blocks], wa: (0.0, 0.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub s0: TowerState,
    pub exo: ExogenousSample,
    pub s1: TowerState,
}

/// One pass through the model: what the robot saw and did, what happened,
/// and for simulated episodes the hidden ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeTrace {
    pub scenario_id: String,
    pub z0: TowerState,
    pub belief: TowerState,
    pub action: Action,
    /// `true` when the tower stood.
    pub outcome: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl EpisodeTrace {
    pub fn from_json(s: &str) -> Result<Self> {
        let trace: EpisodeTrace = serde_json::from_str(s)?;
        trace.z0.validate()?;
        Ok(trace)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

//! Quasi-static stability of single-column cuboid towers, and the transition
//! function that places a block.
//!
//! Interface `k` is the contact between block `k` and whatever is below it
//! (`k == 0` is the table). The tower stands iff, at every interface, the
//! combined centre of mass of blocks `k..` lies strictly inside the contact
//! rectangle (the intersection of the two footprints).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Action, BlockSpec, Offset, PlacedBlock, Rect, TowerState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceCheck {
    /// 0 = support surface under block 0.
    pub interface_index: usize,
    pub com_above: Offset,
    pub support_polygon: Rect,
    /// Signed distance of `com_above` to the polygon boundary, positive inside.
    pub margin: f64,
}

impl InterfaceCheck {
    pub fn holds(&self) -> bool {
        self.margin > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub checks: Vec<InterfaceCheck>,
}

impl StabilityReport {
    /// Lowest interface whose check fails.
    pub fn first_violation(&self) -> Option<usize> {
        self.checks.iter().find(|c| !c.holds()).map(|c| c.interface_index)
    }
}

/// Mass-weighted centroid of `blocks` in the table plane.
pub fn stack_com(blocks: &[PlacedBlock]) -> Result<Offset> {
    if blocks.is_empty() {
        return Err(Error::EmptyStack);
    }
    let (m, mx, my) = blocks.iter().fold((0.0, 0.0, 0.0), |(m, mx, my), b| {
        (m + b.spec.mass, mx + b.spec.mass * b.center_x, my + b.spec.mass * b.center_y)
    });
    Ok((mx / m, my / m))
}

/// Evaluates every interface. A tower flagged `collapsed` is never stable; a
/// pair without contact area shows up as a failing check, not an error.
pub fn is_stable(state: &TowerState) -> StabilityReport {
    let n = state.blocks.len();
    // Suffix sums of mass and mass moments, top down.
    let mut checks = Vec::with_capacity(n);
    let (mut m, mut mx, mut my) = (0.0, 0.0, 0.0);
    for k in (0..n).rev() {
        let b = &state.blocks[k];
        m += b.spec.mass;
        mx += b.spec.mass * b.center_x;
        my += b.spec.mass * b.center_y;
        let com = (mx / m, my / m);
        let polygon = state.support_below(k).intersect(&b.footprint());
        checks.push(InterfaceCheck {
            interface_index: k,
            com_above: com,
            support_polygon: polygon,
            margin: polygon.signed_margin(com),
        });
    }
    checks.reverse();
    let stable = !state.collapsed && checks.iter().all(InterfaceCheck::holds);
    StabilityReport { stable, checks }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s1: TowerState,
    pub outcome: bool,
}

/// Adds `spec` centred at `center` on top of `state`.
///
/// No contact area with the block (or table) below flags the result as
/// collapsed. Otherwise the outcome is the stability verdict and
/// `collapsed = !outcome`.
pub fn place_block(state: &TowerState, spec: &BlockSpec, center: Offset) -> Result<Transition> {
    if state.is_empty() && !state.has_support() {
        return Err(Error::NoSupport);
    }
    let mut s1 = state.clone();
    s1.blocks.push(PlacedBlock::new(spec.clone(), center.0, center.1));
    if state.collapsed {
        s1.collapsed = true;
        return Ok(Transition { s1, outcome: false });
    }
    let top = s1.blocks.len() - 1;
    if !s1.support_below(top).intersect(&s1.blocks[top].footprint()).has_area() {
        s1.collapsed = true;
        return Ok(Transition { s1, outcome: false });
    }
    let outcome = is_stable(&s1).stable;
    s1.collapsed = !outcome;
    Ok(Transition { s1, outcome })
}

/// Transition using `state`'s own top block as the placement anchor.
pub fn transition(state: &TowerState, action: &Action, wa: Offset) -> Result<Transition> {
    transition_from_anchor(state, action, state.anchor(), wa)
}

/// Transition where the intended centre is `anchor + offset`, perturbed by
/// `wa`. `Null` leaves the state untouched.
pub fn transition_from_anchor(
    state: &TowerState,
    action: &Action,
    anchor: Offset,
    wa: Offset,
) -> Result<Transition> {
    match action {
        Action::Null => Ok(Transition { s1: state.clone(), outcome: is_stable(state).stable }),
        Action::Place { spec, offset_x, offset_y } => {
            let center = (anchor.0 + offset_x + wa.0, anchor.1 + offset_y + wa.1);
            place_block(state, spec, center)
        }
    }
}

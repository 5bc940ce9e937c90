//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into `towercause::physics`; stability is re-derived
//! from plain coordinate tuples.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use towercause::{Action, BlockSpec, PlacedBlock, TowerState};

/// `(center_x, center_y, width, depth, mass)`.
pub type Cuboid = (f64, f64, f64, f64, f64);

pub fn cuboids(t: &TowerState) -> Vec<Cuboid> {
    t.blocks
        .iter()
        .map(|b| (b.center_x, b.center_y, b.spec.width, b.spec.depth, b.spec.mass))
        .collect()
}

/// Brute-force quasi-static check. For every interface it recomputes the mass
/// and moment of everything above from scratch and tests
/// `M * lo < sum(m x) < M * hi` on each axis of the contact overlap.
pub fn oracle_stable(blocks: &[Cuboid], support_half: (f64, f64)) -> bool {
    violated_interface(blocks, support_half).is_none()
}

pub fn violated_interface(blocks: &[Cuboid], support_half: (f64, f64)) -> Option<usize> {
    for k in 0..blocks.len() {
        let (bx, by, bw, bd) = if k == 0 {
            (0.0, 0.0, 2.0 * support_half.0, 2.0 * support_half.1)
        } else {
            let b = blocks[k - 1];
            (b.0, b.1, b.2, b.3)
        };
        let u = blocks[k];
        let lo_x = f64::max(bx - bw / 2.0, u.0 - u.2 / 2.0);
        let hi_x = f64::min(bx + bw / 2.0, u.0 + u.2 / 2.0);
        let lo_y = f64::max(by - bd / 2.0, u.1 - u.3 / 2.0);
        let hi_y = f64::min(by + bd / 2.0, u.1 + u.3 / 2.0);
        if !(hi_x > lo_x && hi_y > lo_y) {
            return Some(k);
        }
        let mut mass = 0.0;
        let mut sx = 0.0;
        let mut sy = 0.0;
        for b in &blocks[k..] {
            mass += b.4;
            sx += b.4 * b.0;
            sy += b.4 * b.1;
        }
        let inside = sx > mass * lo_x && sx < mass * hi_x && sy > mass * lo_y && sy < mass * hi_y;
        if !inside {
            return Some(k);
        }
    }
    None
}

/// Oracle replay of one world: the new block lands at
/// `belief_top + offset + wa` on top of the true blocks.
pub fn oracle_outcome(
    truth: &[Cuboid],
    support_half: (f64, f64),
    belief_top: (f64, f64),
    placement: Option<((f64, f64), f64, f64, f64)>,
    wa: (f64, f64),
) -> bool {
    match placement {
        None => oracle_stable(truth, support_half),
        Some((offset, w, d, m)) => {
            let mut all = truth.to_vec();
            all.push((belief_top.0 + offset.0 + wa.0, belief_top.1 + offset.1 + wa.1, w, d, m));
            oracle_stable(&all, support_half)
        }
    }
}

pub fn placement_of(a: &Action) -> Option<((f64, f64), f64, f64, f64)> {
    match a {
        Action::Null => None,
        Action::Place { spec, offset_x, offset_y } => {
            Some(((*offset_x, *offset_y), spec.width, spec.depth, spec.mass))
        }
    }
}

pub fn phi(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// P(|N(0, sd^2)| < half) on one axis.
pub fn inside_prob(half: f64, sd: f64, shift: f64) -> f64 {
    phi((half - shift) / sd) - phi((-half - shift) / sd)
}

pub fn cube(id: &str, side: f64) -> BlockSpec {
    BlockSpec::cube(id, side, 1.0)
}

pub fn column(xs: &[(f64, f64)], side: f64) -> TowerState {
    TowerState::on_wide_table(
        xs.iter()
            .enumerate()
            .map(|(i, &(x, y))| PlacedBlock::new(cube(&format!("b{}", i + 1), side), x, y))
            .collect(),
    )
}

pub fn one_centered_cube() -> TowerState {
    column(&[(0.0, 0.0)], 0.1)
}

pub fn new_cube() -> BlockSpec {
    cube("new", 0.1)
}

/// Random valid (non-collapsed, all contacts with area) towers of 1..=4
/// blocks with varied sizes and masses.
pub fn generated_towers(n: usize, seed: u64) -> Vec<TowerState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let count = rng.random_range(1..=4);
        let mut blocks: Vec<PlacedBlock> = Vec::new();
        for i in 0..count {
            let w = rng.random_range(0.05..0.15);
            let d = rng.random_range(0.05..0.15);
            let spec = BlockSpec {
                id: format!("g{i}"),
                width: w,
                depth: d,
                height: rng.random_range(0.03..0.12),
                mass: rng.random_range(0.2..3.0),
                color: "x".into(),
            };
            let (px, py) = blocks.last().map_or((0.0, 0.0), |b| b.center());
            let x = px + rng.random_range(-0.06..0.06);
            let y = py + rng.random_range(-0.06..0.06);
            blocks.push(PlacedBlock::new(spec, x, y));
        }
        let t = TowerState::new(blocks, (0.4, 0.4));
        if t.validate().is_ok() {
            out.push(t);
        }
    }
    out
}

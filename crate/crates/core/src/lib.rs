//! Causal inference for a robot block-stacking task.
//!
//! A structural causal model links the hidden tower state, the robot's noisy
//! observation of it, the chosen placement, actuation noise and the final
//! outcome. On top of that model this crate provides:
//!
//! - interventional stability prediction, `P(stable | belief, do(action))`,
//!   estimated by Monte-Carlo sampling ([`inference::predict_stability`]);
//! - next-best placement selection over a grid of candidate offsets
//!   ([`inference::stability_heatmap`], [`inference::select_action`]);
//! - post-hoc twin-world counterfactual explanations of an observed episode
//!   ([`explain::explain`]).
//!
//! Physics is an analytic quasi-static check (centre of mass strictly inside
//! each contact rectangle), see [`physics`].
//!
//! All randomness is driven by [`seed::derive_sample_seed`], so every estimate
//! is bit-reproducible for a given master seed regardless of how many worker
//! threads the [`exec::Executor`] uses.

pub mod cli;
pub mod error;
pub mod exec;
pub mod explain;
pub mod inference;
pub mod model;
pub mod physics;
pub mod scenario;
pub mod scm;
pub mod seed;

pub use error::{Error, Result};
pub use exec::Executor;
pub use model::{
    Action, BlockSpec, EpisodeTrace, ExogenousSample, GroundTruth, NoiseAxes, NoiseFamily,
    NoiseModel, PlacedBlock, Rect, TowerState,
};
pub use scenario::Scenario;

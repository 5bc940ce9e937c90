//! Structural equations of the stacking model.
//!
//! ```text
//!   S0 (hidden) ──► Z0 ◄── Ws          Z0  = S0 + Ws   (per block, per axis)
//!                   │                  S0' = Z0
//!                   ▼
//!                  S0' ──┐   A   Wa    S1' = T(S0, S0'.top + offset(A) + Wa)
//!                        ▼   ▼   ▼     Y   = IsStable(S1')
//!                          S1' ──► Y
//! ```
//!
//! The robot aims relative to what it believes (`S0'`), physics runs on the
//! true state `S0`. Forward sampling, `do(A = a)` queries and the twin-world
//! counterfactual (abduction, action, prediction) all go through
//! [`replay`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{Action, EpisodeTrace, ExogenousSample, GroundTruth, NoiseModel, Offset, TowerState};
use crate::physics::{self, Transition};
use crate::seed::sample_rng;

pub const DO_STREAM: &str = "do";
pub const EPISODE_STREAM: &str = "episode";
pub const ABDUCT_STREAM: &str = "abduct";

/// Evaluates the downstream equations given the true state, the belief the
/// robot acts on, the action and the actuation noise.
pub fn replay(s0: &TowerState, belief: &TowerState, action: &Action, wa: Offset) -> Result<Transition> {
    physics::transition_from_anchor(s0, action, belief.anchor(), wa)
}

/// Forward-samples one episode from the true state `s0`.
pub fn sample_episode(
    scenario_id: &str,
    s0: &TowerState,
    action: &Action,
    noise: &NoiseModel,
    seed: u64,
) -> Result<EpisodeTrace> {
    noise.validate()?;
    let mut rng = sample_rng(seed, EPISODE_STREAM, 0);
    let exo = noise.draw(&mut rng, s0.len());
    episode_from_exogenous(scenario_id, s0, action, exo)
}

/// Deterministic episode for a given noise realisation.
pub fn episode_from_exogenous(
    scenario_id: &str,
    s0: &TowerState,
    action: &Action,
    exo: ExogenousSample,
) -> Result<EpisodeTrace> {
    let z0 = s0.translated(&exo.ws, 1.0)?;
    let belief = z0.clone();
    let Transition { s1, outcome } = replay(s0, &belief, action, exo.wa)?;
    Ok(EpisodeTrace {
        scenario_id: scenario_id.to_string(),
        z0,
        belief,
        action: action.clone(),
        outcome,
        ground_truth: Some(GroundTruth { s0: s0.clone(), exo, s1 }),
    })
}

/// One draw of `Y` under `do(A = action)` given the robot's belief.
///
/// The true state is hypothesised as `belief - ws`.
pub fn do_sample(belief: &TowerState, action: &Action, noise: &NoiseModel, seed: u64) -> Result<bool> {
    let mut rng = sample_rng(seed, DO_STREAM, 0);
    let exo = noise.draw(&mut rng, belief.len());
    let s0 = belief.translated(&exo.ws, -1.0)?;
    Ok(replay(&s0, belief, action, exo.wa)?.outcome)
}

/// An exogenous realisation consistent with the evidence, with the true
/// state it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbductedWorld {
    pub exo: ExogenousSample,
    pub s0: TowerState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbductionResult {
    pub samples: Vec<AbductedWorld>,
    pub acceptance_rate: f64,
    pub requested: usize,
    pub accepted: usize,
    pub attempts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbductionConfig {
    pub n_requested: usize,
    /// Defaults to `max(100 * n_requested, 10_000)`.
    pub attempt_budget: Option<usize>,
    pub seed: u64,
}

impl AbductionConfig {
    pub fn new(n_requested: usize, seed: u64) -> Self {
        AbductionConfig { n_requested, attempt_budget: None, seed }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        AbductionConfig { attempt_budget: Some(budget), ..self }
    }

    pub fn budget(&self) -> usize {
        self.attempt_budget
            .unwrap_or_else(|| self.n_requested.saturating_mul(100).max(10_000))
    }
}

const ABDUCT_CHUNK: usize = 4096;

/// Rejection sampler for the exogenous variables given the trace.
///
/// The observation `z0` is matched exactly by construction: each attempt
/// draws `ws` and sets `s0 = z0 - ws` (flat prior on `S0`). The attempt is
/// accepted iff replaying the trace's action with the drawn `wa` reproduces
/// the observed outcome. Attempts are indexed and scanned in order, so the
/// accepted set does not depend on the worker count.
pub fn abduct(
    trace: &EpisodeTrace,
    noise: &NoiseModel,
    config: AbductionConfig,
    exec: &Executor,
) -> Result<AbductionResult> {
    noise.validate()?;
    if config.n_requested == 0 {
        return Err(Error::InvalidArgument("abduction needs n_requested > 0".into()));
    }
    let budget = config.budget();
    let attempt = |i: usize| -> Result<Option<AbductedWorld>> {
        let mut rng = sample_rng(config.seed, ABDUCT_STREAM, i as u64);
        let exo = noise.draw(&mut rng, trace.z0.len());
        let s0 = trace.z0.translated(&exo.ws, -1.0)?;
        let replayed = replay(&s0, &trace.z0, &trace.action, exo.wa)?.outcome;
        Ok((replayed == trace.outcome).then_some(AbductedWorld { exo, s0 }))
    };

    let mut samples = Vec::with_capacity(config.n_requested.min(budget));
    let mut attempts = 0;
    'outer: while attempts < budget {
        let chunk = ABDUCT_CHUNK.min(budget - attempts);
        let start = attempts;
        let results = exec.map(chunk, |j| attempt(start + j));
        for r in results {
            attempts += 1;
            if let Some(world) = r? {
                samples.push(world);
                if samples.len() == config.n_requested {
                    break 'outer;
                }
            }
        }
    }
    let accepted = samples.len();
    if accepted == 0 {
        return Err(Error::AbductionFailed { requested: config.n_requested, attempts, accepted });
    }
    Ok(AbductionResult {
        samples,
        acceptance_rate: accepted as f64 / attempts as f64,
        requested: config.n_requested,
        accepted,
        attempts,
    })
}

/// The variable overridden in a counterfactual world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variable", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterventionTarget {
    Action { a: Action },
    SensorNoise { ws: Vec<Offset> },
    ActuationNoise { wa: Offset },
    InitialState { s0: TowerState },
}

impl InterventionTarget {
    fn check_dims(&self, n_blocks: usize) -> Result<()> {
        let actual = match self {
            InterventionTarget::SensorNoise { ws } => ws.len(),
            InterventionTarget::InitialState { s0 } => s0.len(),
            _ => return Ok(()),
        };
        if actual != n_blocks {
            return Err(Error::DimensionMismatch { expected: n_blocks, actual });
        }
        Ok(())
    }
}

/// Outcome of one abducted world with `target` overridden and every other
/// exogenous value kept.
pub fn counterfactual_outcome(
    trace: &EpisodeTrace,
    target: &InterventionTarget,
    world: &AbductedWorld,
) -> Result<bool> {
    let AbductedWorld { exo, s0 } = world;
    let t = match target {
        InterventionTarget::Action { a } => replay(s0, &trace.z0, a, exo.wa)?,
        InterventionTarget::ActuationNoise { wa } => replay(s0, &trace.z0, &trace.action, *wa)?,
        InterventionTarget::SensorNoise { ws } => {
            let belief = s0.translated(ws, 1.0)?;
            replay(s0, &belief, &trace.action, exo.wa)?
        }
        InterventionTarget::InitialState { s0: alt } => {
            let belief = alt.translated(&exo.ws, 1.0)?;
            replay(alt, &belief, &trace.action, exo.wa)?
        }
    };
    Ok(t.outcome)
}

pub fn counterfactual_outcomes(
    trace: &EpisodeTrace,
    target: &InterventionTarget,
    abduction: &AbductionResult,
    exec: &Executor,
) -> Result<Vec<bool>> {
    if abduction.samples.is_empty() {
        return Err(Error::InvalidArgument("counterfactuals need at least one abducted sample".into()));
    }
    target.check_dims(trace.z0.len())?;
    exec.map(abduction.samples.len(), |i| counterfactual_outcome(trace, target, &abduction.samples[i]))
        .into_iter()
        .collect()
}

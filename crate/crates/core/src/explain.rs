//! Post-hoc counterfactual explanations.
//!
//! Each candidate cause is a single variable set to a nominal value (exact
//! actuation, exact sensing, an alternative action, the world as believed).
//! All candidates are scored on one shared set of abducted worlds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{Action, EpisodeTrace, NoiseModel};
use crate::scm::{
    abduct, counterfactual_outcome, AbductionConfig, AbductionResult, InterventionTarget,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub target: InterventionTarget,
    pub factual_summary: String,
    pub observed_outcome: bool,
    /// Fraction of abducted worlds whose outcome flips under `target`.
    pub pn: f64,
    /// Fraction where the factual replay reproduces the observation and the
    /// counterfactual flips it.
    pub pns: f64,
    pub n_samples: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationReport {
    pub scenario_id: String,
    pub acceptance_rate: f64,
    pub abduction_attempts: usize,
    pub explanations: Vec<Explanation>,
}

fn centered(action: &Action) -> Option<Action> {
    match action {
        Action::Null => None,
        Action::Place { spec, .. } => Some(Action::place(spec.clone(), 0.0, 0.0)),
    }
}

/// Default candidate set, in order: perfect actuation, perfect sensing, an
/// alternative action, the world as believed. Candidates equal to the
/// known factual value are dropped; noise and initial-state values are only
/// known for traces carrying ground truth.
pub fn enumerate_candidates(trace: &EpisodeTrace, heatmap_best: Option<&Action>) -> Vec<InterventionTarget> {
    let truth = trace.ground_truth.as_ref();
    let n = trace.z0.len();
    let mut out = Vec::with_capacity(4);

    let wa = (0.0, 0.0);
    if truth.is_none_or(|g| g.exo.wa != wa) {
        out.push(InterventionTarget::ActuationNoise { wa });
    }

    let ws = vec![(0.0, 0.0); n];
    if truth.is_none_or(|g| g.exo.ws != ws) {
        out.push(InterventionTarget::SensorNoise { ws });
    }

    let alternative = heatmap_best
        .filter(|a| **a != trace.action)
        .cloned()
        .or_else(|| centered(&trace.action).filter(|a| *a != trace.action));
    if let Some(a) = alternative {
        out.push(InterventionTarget::Action { a });
    }

    if truth.is_none_or(|g| g.s0 != trace.belief) {
        out.push(InterventionTarget::InitialState { s0: trace.belief.clone() });
    }
    out
}

fn percent(x: f64) -> String {
    format!("{:.0}%", 100.0 * x)
}

fn describe_action(a: &Action) -> String {
    match a {
        Action::Null => "no block been placed".to_string(),
        Action::Place { spec, offset_x, offset_y } => format!(
            "{} been placed at offset ({:.1} cm, {:.1} cm)",
            spec.id,
            100.0 * offset_x,
            100.0 * offset_y
        ),
    }
}

pub fn factual_summary(trace: &EpisodeTrace) -> String {
    let outcome = if trace.outcome { "stood" } else { "collapsed" };
    let action = match &trace.action {
        Action::Null => "no action".to_string(),
        Action::Place { spec, offset_x, offset_y } => format!(
            "placing {} at offset ({:.1} cm, {:.1} cm)",
            spec.id,
            100.0 * offset_x,
            100.0 * offset_y
        ),
    };
    format!("the tower {outcome} after {action}")
}

/// Fixed template per target variant; numbers to two decimals.
pub fn render_explanation(e: &Explanation) -> String {
    let premise = match &e.target {
        InterventionTarget::ActuationNoise { .. } => "Had actuation been exact".to_string(),
        InterventionTarget::SensorNoise { .. } => "Had sensing been exact".to_string(),
        InterventionTarget::Action { a } => format!("Had {}", describe_action(a)),
        InterventionTarget::InitialState { .. } => "Had the tower been exactly as believed".to_string(),
    };
    let flipped = if e.observed_outcome { "fallen" } else { "stood" };
    if e.pn > 0.0 {
        format!(
            "{premise}, the tower would have {flipped} in {} of consistent worlds (PN={:.2}, PNS={:.2}, N={}).",
            percent(e.pn),
            e.pn,
            e.pns,
            e.n_samples
        )
    } else {
        format!(
            "{premise}, the outcome would likely have been the same (PN={:.2}, PNS={:.2}, N={}).",
            e.pn, e.pns, e.n_samples
        )
    }
}

/// Scores `candidates` on the shared abduction and ranks them by PNS, then
/// PN, then candidate order.
pub fn score_candidates(
    trace: &EpisodeTrace,
    abduction: &AbductionResult,
    candidates: &[InterventionTarget],
    exec: &Executor,
) -> Result<Vec<Explanation>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let samples = &abduction.samples;
    let n = samples.len();
    let y = trace.outcome;
    let summary = factual_summary(trace);

    let factual = exec.map(n, |i| {
        counterfactual_outcome(trace, &InterventionTarget::Action { a: trace.action.clone() }, &samples[i])
    });
    let factual = factual.into_iter().collect::<Result<Vec<bool>>>()?;

    let mut out = Vec::with_capacity(candidates.len());
    for target in candidates {
        let cf = crate::scm::counterfactual_outcomes(trace, target, abduction, exec)?;
        let flips = cf.iter().filter(|&&c| c != y).count();
        let joint = cf.iter().zip(&factual).filter(|(&c, &f)| f == y && c != y).count();
        let mut e = Explanation {
            target: target.clone(),
            factual_summary: summary.clone(),
            observed_outcome: y,
            pn: flips as f64 / n as f64,
            pns: joint as f64 / n as f64,
            n_samples: n,
            text: String::new(),
        };
        e.text = render_explanation(&e);
        out.push(e);
    }
    out.sort_by(|a, b| b.pns.total_cmp(&a.pns).then(b.pn.total_cmp(&a.pn)));
    Ok(out)
}

/// Abducts once, then scores the default candidates.
pub fn explain(
    trace: &EpisodeTrace,
    noise: &NoiseModel,
    n_samples: usize,
    seed: u64,
    heatmap_best: Option<&Action>,
    exec: &Executor,
) -> Result<ExplanationReport> {
    let candidates = enumerate_candidates(trace, heatmap_best);
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let abduction = abduct(trace, noise, AbductionConfig::new(n_samples, seed), exec)?;
    let explanations = score_candidates(trace, &abduction, &candidates, exec)?;
    Ok(ExplanationReport {
        scenario_id: trace.scenario_id.clone(),
        acceptance_rate: abduction.acceptance_rate,
        abduction_attempts: abduction.attempts,
        explanations,
    })
}

impl ExplanationReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "explanations for {} ({}; abduction acceptance {:.2})\n",
            self.scenario_id,
            self.explanations.first().map_or("", |e| e.factual_summary.as_str()),
            self.acceptance_rate
        );
        for (rank, e) in self.explanations.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", rank + 1, e.text));
        }
        out
    }
}

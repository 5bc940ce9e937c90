//! Command-line front end. Each command parses its inputs, calls one library
//! operation and formats the result.
//!
//! Exit codes: 0 success, 2 usage or schema error, 3 abduction failure,
//! 4 internal invariant violation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exec::Executor;
use crate::explain::explain;
use crate::inference::{
    self, candidate_grid, predict_stability, select_action, stability_heatmap, CentroidRule,
    SelectionConfig,
};
use crate::model::{Action, EpisodeTrace};
use crate::physics::is_stable;
use crate::scenario::Scenario;
use crate::scm::sample_episode;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ABDUCTION: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "towercause", version, about = "Causal stability prediction, placement selection and counterfactual explanations for block towers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward-simulate one episode from the scenario's true state.
    Simulate(SimulateArgs),
    /// Estimate P(stable | belief, do(action)).
    Predict(PredictArgs),
    /// Stability heatmap over candidate placements of a pending block.
    Heatmap(HeatmapArgs),
    /// Choose the next-best placement of a pending block.
    Select(SelectArgs),
    /// Rank counterfactual explanations of a recorded episode.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// `null` or `place <block_id> <dx> <dy>` (meters).
    #[arg(long, allow_hyphen_values = true)]
    pub action: String,
    /// Trace JSON output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub action: String,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Pending block to place.
    #[arg(long)]
    pub block: String,
    /// Candidate grid as `NXxNY`.
    #[arg(long, default_value = "9x9", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// Samples per grid cell.
    #[arg(long, default_value_t = inference::DEFAULT_SAMPLES_PER_CELL)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    /// CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional PGM (P2) output.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Centroid,
    Geometric,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = inference::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Centroid)]
    pub rule: RuleArg,
    /// Optional heatmap CSV dump.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Scenario supplying the noise model.
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trace: PathBuf,
    /// Abducted worlds to request.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Alternative action to test instead of the centred placement.
    #[arg(long, allow_hyphen_values = true)]
    pub action: Option<String>,
    /// Report JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
    let nx: usize = a.trim().parse().map_err(|e| format!("bad NX `{a}`: {e}"))?;
    let ny: usize = b.trim().parse().map_err(|e| format!("bad NY `{b}`: {e}"))?;
    if nx == 0 || ny == 0 {
        return Err(format!("grid dimensions must be at least 1, got {nx}x{ny}"));
    }
    Ok((nx, ny))
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AbductionFailed { .. } => EXIT_ABDUCTION,
            Error::Pool(_) => EXIT_INVARIANT,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_USAGE, message: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn invariant(message: String) -> CliError {
    CliError { code: EXIT_INVARIANT, message }
}

/// Parses `null` or `place <block_id> <dx> <dy>`; the block must be pending.
pub fn parse_action(spec: &str, scenario: &Scenario) -> Result<Action, Error> {
    let parts: Vec<&str> = spec.split_whitespace().collect();
    match parts.as_slice() {
        [kw] if kw.eq_ignore_ascii_case("null") => Ok(Action::Null),
        [kw, id, dx, dy] if kw.eq_ignore_ascii_case("place") => {
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad offset `{s}` in action `{spec}`")))
            };
            Ok(Action::place(scenario.pending(id)?.clone(), num(dx)?, num(dy)?))
        }
        _ => Err(Error::InvalidArgument(format!(
            "action must be `null` or `place <block_id> <dx> <dy>`, got `{spec}`"
        ))),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents)
        .map_err(|e| CliError { code: EXIT_USAGE, message: format!("cannot write {}: {e}", path.display()) })
}

fn executor(workers: Option<usize>) -> CliResult<Executor> {
    Ok(Executor::with_workers(workers)?)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let scenario = Scenario::load(&args.common.scenario)?;
    let action = parse_action(&args.action, &scenario)?;
    let trace = sample_episode(&scenario.scenario_id, &scenario.tower(), &action, &scenario.noise, args.common.seed)?;
    write_file(&args.out, &(trace.to_json()? + "\n"))?;
    if trace.outcome {
        writeln!(out, "outcome: stable")?;
    } else {
        let s1 = &trace.ground_truth.as_ref().ok_or_else(|| invariant("simulated trace without ground truth".into()))?.s1;
        match is_stable(s1).first_violation() {
            Some(k) => writeln!(out, "outcome: collapsed (interface {k})")?,
            None => writeln!(out, "outcome: collapsed")?,
        }
    }
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let scenario = Scenario::load(&args.common.scenario)?;
    let action = parse_action(&args.action, &scenario)?;
    let exec = executor(args.common.workers)?;
    let e = predict_stability(&scenario.tower(), &action, &scenario.noise, args.n, args.common.seed, &exec)?;
    if args.n < 30 {
        writeln!(err, "warning: only {} sample(s); the standard error is not meaningful", args.n)?;
    }
    writeln!(out, "p={:.6} stderr={:.6}", e.p, e.stderr)?;
    Ok(())
}

fn build_heatmap(
    scenario: &Scenario,
    grid: &GridArgs,
    seed: u64,
    exec: &Executor,
) -> CliResult<inference::StabilityHeatmap> {
    let block = scenario.pending(&grid.block)?;
    let belief = scenario.tower();
    let cands = candidate_grid(&belief, grid.grid.0, grid.grid.1)?;
    Ok(stability_heatmap(&belief, block, &cands, &scenario.noise, grid.n, seed, exec)?)
}

pub fn cmd_heatmap(args: &HeatmapArgs, out: &mut dyn Write) -> CliResult {
    let scenario = Scenario::load(&args.common.scenario)?;
    let exec = executor(args.common.workers)?;
    let h = build_heatmap(&scenario, &args.grid, args.common.seed, &exec)?;
    write_file(&args.out, &h.to_csv())?;
    if let Some(pgm) = &args.pgm {
        write_file(pgm, &h.to_pgm())?;
    }
    writeln!(out, "wrote {}x{} heatmap to {}", h.dims.0, h.dims.1, args.out.display())?;
    Ok(())
}

pub fn cmd_select(args: &SelectArgs, out: &mut dyn Write) -> CliResult {
    let scenario = Scenario::load(&args.common.scenario)?;
    let exec = executor(args.common.workers)?;
    let h = build_heatmap(&scenario, &args.grid, args.common.seed, &exec)?;
    if let Some(path) = &args.out {
        write_file(path, &h.to_csv())?;
    }
    if let Some(path) = &args.pgm {
        write_file(path, &h.to_pgm())?;
    }
    let block = scenario.pending(&args.grid.block)?;
    let config = SelectionConfig {
        threshold: args.threshold,
        rule: match args.rule {
            RuleArg::Centroid => CentroidRule::Arithmetic,
            RuleArg::Geometric => CentroidRule::ShiftedGeometric,
        },
        n_samples: args.grid.n,
        seed: args.common.seed,
    };
    let s = select_action(&scenario.tower(), block, &h, &scenario.noise, &config, &exec)?;
    if s.fallback {
        writeln!(out, "fallback: no cell reached threshold {}; using the argmax cell", args.threshold)?;
    }
    writeln!(out, "place {} @ ({:.4}, {:.4})", block.id, s.offset.0, s.offset.1)?;
    writeln!(
        out,
        "expected_p={:.6} stderr={:.6} admissible={}/{}",
        s.expected.p,
        s.expected.stderr,
        s.admissible,
        h.probabilities.len()
    )?;
    Ok(())
}

pub fn cmd_explain(args: &ExplainArgs, out: &mut dyn Write) -> CliResult {
    let scenario = Scenario::load(&args.common.scenario)?;
    let text = std::fs::read_to_string(&args.trace)
        .map_err(|e| CliError { code: EXIT_USAGE, message: format!("cannot read {}: {e}", args.trace.display()) })?;
    let trace = EpisodeTrace::from_json(&text)?;
    let alternative = args.action.as_deref().map(|a| parse_action(a, &scenario)).transpose()?;
    let exec = executor(args.common.workers)?;
    let report = explain(&trace, &scenario.noise, args.n, args.common.seed, alternative.as_ref(), &exec)?;
    if let Some(e) = report.explanations.iter().find(|e| e.pns > e.pn) {
        return Err(invariant(format!("PNS {} exceeds PN {} for {:?}", e.pns, e.pn, e.target)));
    }
    if let Some(path) = &args.out {
        write_file(path, &(serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n"))?;
    }
    write!(out, "{}", report.to_text())?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Predict(a) => cmd_predict(a, out, err),
        Command::Heatmap(a) => cmd_heatmap(a, out),
        Command::Select(a) => cmd_select(a, out),
        Command::Explain(a) => cmd_explain(a, out),
    }
}

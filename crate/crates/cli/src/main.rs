use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(
    name = "asmplan",
    version,
    about = "Plan optimal assembly sequences by disassembly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an optimal disassembly and its reversed assembly order.
    Plan(PlanArgs),
    /// Sample uniform random disassemblies and write their totals as CSV.
    Baseline(BaselineArgs),
    /// Report state-space size, optionally dump the graph and growth table.
    Stats(StatsArgs),
    /// Re-plan around blocked transitions.
    Replan(ReplanArgs),
    /// Check and score an externally produced sequence.
    Validate(ValidateArgs),
    /// Write the environment spec used by external trainers.
    ExportEnv(ExportEnvArgs),
    /// Write a preset structure as JSON.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Structure JSON file.
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Built-in structure (4brick, 2x3, lattice, table, hubble, iss, jwst).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Seed for presets and random sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reward model: a kind name, inline JSON, or a JSON file.
    #[arg(long, default_value = "min_time")]
    reward: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Planner {
    Vi,
    Dijkstra,
    BellmanFord,
    Orasp,
    Oracle,
}

impl Planner {
    pub fn name(self) -> &'static str {
        match self {
            Planner::Vi => "vi",
            Planner::Dijkstra => "dijkstra",
            Planner::BellmanFord => "bellman-ford",
            Planner::Orasp => "orasp",
            Planner::Oracle => "oracle",
        }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Planner::Dijkstra)]
    planner: Planner,
    /// Also write the consolidated graph (graph planners only).
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Report runtime_ms as 0 so repeated runs are byte-identical.
    #[arg(long)]
    no_runtime: bool,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Also plan with this planner and write a comparison report.
    #[arg(long, value_enum)]
    planner: Option<Planner>,
    /// Where the comparison report goes; standard output when omitted.
    #[arg(long, requires = "planner")]
    report: Option<PathBuf>,
    #[arg(long)]
    no_runtime: bool,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    /// Write the consolidated graph dump here.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Write the growth table for E = 1..=N here.
    #[arg(long)]
    growth: Option<PathBuf>,
    #[arg(long, default_value_t = 20, requires = "growth")]
    growth_max: usize,
}

#[derive(Args, Debug)]
struct ReplanArgs {
    #[command(flatten)]
    common: Common,
    /// Graph dump from `stats --dump` or `plan --dump`; expanded afresh when
    /// omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Blocked transition as HEXSTATE:ACTION; repeatable.
    #[arg(long = "block")]
    blocks: Vec<String>,
    #[arg(long)]
    no_runtime: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// JSON with "disassembly" and/or "assembly" arrays (a plan file works).
    #[arg(long)]
    sequence: PathBuf,
}

#[derive(Args, Debug)]
struct ExportEnvArgs {
    #[command(flatten)]
    common: Common,
    /// Training budget the default schedules are sized for.
    #[arg(long, default_value_t = 5000)]
    episodes: usize,
    #[arg(long)]
    k_start: Option<usize>,
    #[arg(long)]
    k_step: Option<usize>,
    #[arg(long)]
    episodes_per_level: Option<usize>,
    #[arg(long)]
    eps_start: Option<f64>,
    #[arg(long)]
    eps_end: Option<f64>,
    #[arg(long)]
    eps_decay: Option<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Preset name.
    #[arg(long)]
    preset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), single_line(&e.to_string()));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn single_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn exit_code(e: &asmplan::Error) -> u8 {
    use asmplan::Error::*;
    match e {
        Io { .. } => 5,
        Infeasible(_) | InvalidTrajectory(_) | MaskedAction { .. } | ActionNotPresent { .. } => 3,
        CapExceeded { .. } => 4,
        _ => 2,
    }
}

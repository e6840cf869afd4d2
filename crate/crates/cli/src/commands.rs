use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use asmplan::planners::{
    bellman_ford_all, bellman_ford_plan, brute_force_oracle_counted, dijkstra_plan, orasp_search,
    replan_blocked, value_iteration, RolloutOutcome,
};
use asmplan::rl::{Curriculum, EnvSpec, EpsilonSchedule};
use asmplan::statespace::{growth_csv, growth_stats};
use asmplan::{
    baseline, expand_consolidated, generate_preset, validate_sequence, AssemblyGraph,
    ConsolidatedGraph, Error, Result, RewardModel, StateKey, Trajectory,
};

use crate::report::{Comparison, Plan, ReplanInfo, RunReport, SequenceDoc, ValidationOutput};
use crate::{
    BaselineArgs, Command, Common, ExportEnvArgs, GenArgs, PlanArgs, Planner, ReplanArgs,
    StatsArgs, ValidateArgs,
};

const VI_EPSILON: f64 = 1e-12;
const VI_MAX_ITER: usize = 1000;

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Plan(a) => plan(a),
        Command::Baseline(a) => baseline_cmd(a),
        Command::Stats(a) => stats(a),
        Command::Replan(a) => replan(a),
        Command::Validate(a) => validate(a),
        Command::ExportEnv(a) => export_env(a),
        Command::Gen(a) => gen(a),
    }
}

fn load_structure(common: &Common) -> Result<AssemblyGraph> {
    match (&common.source.structure, &common.source.preset) {
        (Some(path), None) => AssemblyGraph::load(path),
        (None, Some(name)) => generate_preset(name, common.seed),
        _ => Err(Error::InvalidArgument(
            "exactly one of --structure and --preset is required".into(),
        )),
    }
}

fn load_reward(common: &Common, graph: &AssemblyGraph) -> Result<RewardModel> {
    let text = common.reward.trim();
    let model = if text.starts_with('{') {
        RewardModel::parse(text)?
    } else {
        match RewardModel::from_kind_name(text) {
            Err(_) if Path::new(text).is_file() => RewardModel::load(text)?,
            parsed => parsed?,
        }
    };
    model.check(graph)?;
    Ok(model)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

struct Planned {
    trajectory: Trajectory,
    expanded: usize,
    graph: Option<ConsolidatedGraph>,
}

fn run_planner(
    planner: Planner,
    graph: &AssemblyGraph,
    reward: &RewardModel,
    seed: u64,
) -> Result<Planned> {
    let with_graph = |f: &dyn Fn(&ConsolidatedGraph) -> Result<Trajectory>| -> Result<Planned> {
        let h = expand_consolidated(graph, reward)?;
        let trajectory = f(&h)?;
        Ok(Planned {
            trajectory,
            expanded: h.node_count(),
            graph: Some(h),
        })
    };
    match planner {
        Planner::Vi => with_graph(&|h| value_iteration(h, VI_EPSILON, VI_MAX_ITER).map(|(_, t)| t)),
        Planner::Dijkstra => with_graph(&|h| dijkstra_plan(h)),
        Planner::BellmanFord => with_graph(&|h| bellman_ford_plan(h)),
        Planner::Orasp => {
            let (trajectory, stats) = orasp_search(graph, reward, seed)?;
            Ok(Planned {
                trajectory,
                expanded: stats.expanded,
                graph: None,
            })
        }
        Planner::Oracle => {
            let (trajectory, expanded) = brute_force_oracle_counted(graph, reward)?;
            Ok(Planned {
                trajectory,
                expanded,
                graph: None,
            })
        }
    }
}

fn make_plan(
    planner: Planner,
    graph: &AssemblyGraph,
    reward: &RewardModel,
    seed: u64,
    no_runtime: bool,
) -> Result<(Plan, Option<ConsolidatedGraph>)> {
    let start = Instant::now();
    let planned = run_planner(planner, graph, reward, seed)?;
    let runtime_ms = if no_runtime {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    };
    let plan = Plan::new(
        graph.name(),
        *reward,
        planner.name(),
        &planned.trajectory,
        planned.expanded,
        runtime_ms,
    );
    Ok((plan, planned.graph))
}

fn plan(args: PlanArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let (plan, h) = make_plan(
        args.planner,
        &graph,
        &reward,
        args.common.seed,
        args.no_runtime,
    )?;
    if let Some(path) = &args.dump {
        let h = match h {
            Some(h) => h,
            None => expand_consolidated(&graph, &reward)?,
        };
        h.write_dump(path)?;
    }
    emit(args.common.out.as_ref(), &to_json(&plan))?;
    Ok(ExitCode::SUCCESS)
}

fn baseline_cmd(args: BaselineArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let rollouts = baseline(&graph, &reward, args.samples, args.common.seed);
    let mut csv = String::from("sample,total\n");
    for (i, r) in rollouts.iter().enumerate() {
        match r {
            RolloutOutcome::Complete(t) => csv.push_str(&format!("{i},{}\n", t.total())),
            RolloutOutcome::DeadEnd { .. } => csv.push_str(&format!("{i},\n")),
        }
    }
    emit(args.common.out.as_ref(), &csv)?;

    if let Some(planner) = args.planner {
        let (plan, _) = make_plan(planner, &graph, &reward, args.common.seed, args.no_runtime)?;
        let totals: Vec<f64> = rollouts.iter().filter_map(RolloutOutcome::total).collect();
        let comparison = (!totals.is_empty()).then(|| Comparison {
            optimal_total: plan.total_reward,
            baseline_mean: totals.iter().sum::<f64>() / totals.len() as f64,
            baseline_min: totals.iter().copied().fold(f64::INFINITY, f64::min),
            baseline_max: totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        let report = RunReport {
            plan,
            baseline: totals,
            comparison,
        };
        emit(args.report.as_ref(), &to_json(&report))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let h = expand_consolidated(&graph, &reward)?;
    if let Some(path) = &args.dump {
        h.write_dump(path)?;
    }
    if let Some(path) = &args.growth {
        let rows = growth_stats(args.growth_max)?;
        emit(Some(path), &growth_csv(&rows))?;
    }
    let summary = serde_json::json!({
        "structure": graph.name(),
        "parts": graph.part_count(),
        "connections": graph.connection_count(),
        "nodes": h.node_count(),
        "edges": h.edge_count(),
        "sink_reachable": h.sink().is_some(),
    });
    emit(args.common.out.as_ref(), &to_json(&summary))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_block(text: &str, width: usize) -> Result<(StateKey, usize)> {
    let bad = || Error::InvalidArgument(format!("--block expects HEXSTATE:ACTION, got {text:?}"));
    let (hex, action) = text.rsplit_once(':').ok_or_else(bad)?;
    let state = StateKey::from_hex(width, hex)?;
    let action = action.trim().parse::<usize>().map_err(|_| bad())?;
    Ok((state, action))
}

fn replan(args: ReplanArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let width = graph.connection_count();
    let blocked: Vec<(StateKey, usize)> = args
        .blocks
        .iter()
        .map(|b| parse_block(b, width))
        .collect::<Result<_>>()?;
    let start = Instant::now();
    let h = match &args.graph {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            ConsolidatedGraph::from_dump(&text, width)?
        }
        None => expand_consolidated(&graph, &reward)?,
    };
    let distances = bellman_ford_all(&h);
    let outcome = replan_blocked(&h, &distances, &blocked)?;
    let runtime_ms = if args.no_runtime {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    };
    let mut plan = Plan::new(
        graph.name(),
        reward,
        "replan",
        &outcome.trajectory,
        h.node_count(),
        runtime_ms,
    );
    plan.replan = Some(ReplanInfo {
        blocked: blocked
            .iter()
            .map(|(s, a)| format!("{}:{a}", s.to_hex()))
            .collect(),
        repaired: outcome.repaired,
    });
    emit(args.common.out.as_ref(), &to_json(&plan))?;
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let path = &args.sequence;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let doc: SequenceDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    let disassembly = match (doc.disassembly, doc.assembly) {
        (Some(d), Some(a)) => {
            if d.iter().rev().ne(a.iter()) {
                return Err(Error::InvalidArgument(format!(
                    "{}: assembly is not the reverse of disassembly",
                    path.display()
                )));
            }
            d
        }
        (Some(d), None) => d,
        (None, Some(mut a)) => {
            a.reverse();
            a
        }
        (None, None) => {
            return Err(Error::Parse {
                location: path.display().to_string(),
                message: "expected a \"disassembly\" or \"assembly\" array".into(),
            })
        }
    };
    let report = validate_sequence(&graph, &disassembly);
    let total_reward = if report.valid {
        Some(Trajectory::simulate(&graph, &reward, &disassembly)?.total())
    } else {
        None
    };
    let out = ValidationOutput {
        structure: graph.name().to_string(),
        reward,
        disassembly,
        valid: report.valid,
        violation: report.violation,
        total_reward,
    };
    emit(args.common.out.as_ref(), &to_json(&out))?;
    Ok(if out.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn export_env(args: ExportEnvArgs) -> Result<ExitCode> {
    let graph = load_structure(&args.common)?;
    let reward = load_reward(&args.common, &graph)?;
    let e = graph.connection_count();
    let c = Curriculum::for_budget(e, args.episodes);
    let curriculum = Curriculum {
        k_start: args.k_start.unwrap_or(c.k_start),
        k_step: args.k_step.unwrap_or(c.k_step),
        episodes_per_level: args.episodes_per_level.unwrap_or(c.episodes_per_level),
    };
    let eps = EpsilonSchedule::for_budget(args.episodes);
    let epsilon = EpsilonSchedule {
        start: args.eps_start.unwrap_or(eps.start),
        end: args.eps_end.unwrap_or(eps.end),
        decay: args.eps_decay.unwrap_or(eps.decay),
    };
    let spec = EnvSpec::new(graph, reward, curriculum, epsilon, args.common.seed)?;
    emit(args.common.out.as_ref(), &(spec.to_json_pretty() + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let graph = generate_preset(&args.preset, args.seed)?;
    emit(args.out.as_ref(), &(graph.to_json_pretty() + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

//! Command-line front end: solve single instances, run benchmark sweeps,
//! validate solution files, and generate random roadmaps.
//!
//! Exit codes: 0 solved/valid, 1 unsolved/timeout/invalid, 2 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccbs::emit::{emit_solution, parse_solution};
use ccbs::roadmap::generate_roadmap;
use ccbs::search::{solve, SolveOutcome, SolverConfig, SplitMode};
use ccbs::sweep::{aggregate_success, records_to_csv, run_sweep, SweepInput, SweepSpec};
use ccbs::validate::validate;
use ccbs::world::{
    build_grid_graph, neighborhood, parse_map, parse_scen, serialize_roadmap, GridGraph, Instance,
};
use ccbs::{Graph, DEFAULT_RADIUS};

#[derive(Parser)]
#[command(name = "ccbs", about = "Continuous-time conflict-based search for multi-agent pathfinding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance built from a map and scenario file.
    Solve(SolveArgs),
    /// Run a benchmark sweep over every map/scenario pair in a directory.
    Sweep(SweepArgs),
    /// Validate a solution file against its instance.
    Validate(ValidateArgs),
    /// Generate a random roadmap graph file.
    Genroadmap(GenArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Grid map file (MovingAI .map format).
    #[arg(long)]
    map: PathBuf,
    /// Scenario file (MovingAI .scen format).
    #[arg(long)]
    scen: PathBuf,
    /// Number of agents, drawn from the first usable scenario entries.
    #[arg(long)]
    agents: usize,
    /// Grid neighborhood size: 4, 8, 16 or 32.
    #[arg(long, default_value_t = 8)]
    neighborhood: usize,
    /// Agent disc radius.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Split rule: plain, ds, bc, db, or dk.
    #[arg(long, default_value = "plain")]
    mode: String,
    /// Enable the bypass enhancement.
    #[arg(long)]
    bypass: bool,
    /// Prefer cardinal conflicts when choosing what to split on.
    #[arg(long)]
    prioritize: bool,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    /// Where to write the solution JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory scanned for `<name>.map` plus `<name>.scen` (or
    /// `<name>.map.scen`) pairs.
    #[arg(long)]
    maps: PathBuf,
    /// Configurations, comma separated: split rule optionally suffixed with
    /// `+bp` and/or `+pc`, e.g. `plain,dk+bp`.
    #[arg(long, default_value = "plain")]
    configs: String,
    #[arg(long, default_value_t = 5)]
    start_agents: usize,
    #[arg(long, default_value_t = 2)]
    increment: usize,
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    /// Instances taken per map.
    #[arg(long, default_value_t = 25)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    neighborhood: usize,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: f64,
    /// Where to write the CSV of per-attempt records.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Solution JSON produced by `solve`.
    #[arg(long)]
    sol: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Number of sampled vertices (the kept component may be smaller).
    #[arg(long)]
    n: usize,
    /// Target mean vertex degree.
    #[arg(long)]
    degree: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the roadmap graph file.
    #[arg(long)]
    out: PathBuf,
}

fn input_err(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn parse_mode(s: &str) -> Option<SplitMode> {
    Some(match s {
        "plain" => SplitMode::Plain,
        "ds" => SplitMode::Ds,
        "bc" => SplitMode::Bc,
        "db" => SplitMode::Db,
        "dk" => SplitMode::Dk,
        _ => return None,
    })
}

fn parse_config(token: &str) -> Option<SolverConfig> {
    let mut parts = token.split('+');
    let mut cfg = SolverConfig {
        split_mode: parse_mode(parts.next()?)?,
        ..SolverConfig::default()
    };
    for p in parts {
        match p {
            "bp" => cfg.bypass = true,
            "pc" => cfg.prioritize_conflicts = true,
            _ => return None,
        }
    }
    Some(cfg)
}

fn k_exponent(neighborhood: usize) -> Result<u32, String> {
    match neighborhood {
        4 => Ok(2),
        8 => Ok(3),
        16 => Ok(4),
        32 => Ok(5),
        other => Err(format!("neighborhood must be 4, 8, 16 or 32, got {other}")),
    }
}

/// Loads a map + scenario into a grid graph and the scenario's endpoint
/// pairs as vertex indices, skipping entries whose cells are blocked or
/// missing from the graph.
fn load_grid_input(
    map_path: &Path,
    scen_path: &Path,
    neighborhood_size: usize,
    radius: f64,
) -> Result<(GridGraph, Vec<(usize, usize)>), String> {
    let map_text =
        std::fs::read_to_string(map_path).map_err(|e| format!("{}: {e}", map_path.display()))?;
    let scen_text =
        std::fs::read_to_string(scen_path).map_err(|e| format!("{}: {e}", scen_path.display()))?;
    let map = parse_map(&map_text).map_err(|e| format!("{}: {e}", map_path.display()))?;
    let scen = parse_scen(&scen_text).map_err(|e| format!("{}: {e}", scen_path.display()))?;
    let spec = neighborhood(k_exponent(neighborhood_size)?).map_err(|e| e.to_string())?;
    let grid = build_grid_graph(&map, &spec, radius);
    let endpoints: Vec<(usize, usize)> = scen
        .iter()
        .filter_map(|&((sx, sy), (gx, gy))| {
            Some((grid.vertex_at(sx, sy)?, grid.vertex_at(gx, gy)?))
        })
        .collect();
    if endpoints.is_empty() {
        return Err(format!("{}: no usable scenario entries", scen_path.display()));
    }
    Ok((grid, endpoints))
}

fn build_cli_instance(args: &InstanceArgs) -> Result<(Graph, Instance), String> {
    let (grid, endpoints) =
        load_grid_input(&args.map, &args.scen, args.neighborhood, args.radius)?;
    let mut starts = Vec::new();
    let mut goals = Vec::new();
    for (s, g) in endpoints {
        if starts.len() == args.agents {
            break;
        }
        if s != g && !starts.contains(&s) && !goals.contains(&g) {
            starts.push(s);
            goals.push(g);
        }
    }
    if starts.len() < args.agents {
        return Err(format!(
            "scenario provides only {} distinct endpoint pairs, need {}",
            starts.len(),
            args.agents
        ));
    }
    let instance = Instance::new(grid.graph.clone(), starts, goals, args.radius)
        .map_err(|e| e.to_string())?;
    Ok((grid.graph, instance))
}

fn cmd_solve(args: &SolveArgs) -> ExitCode {
    let Some(mode) = parse_mode(&args.mode) else {
        return input_err(format!("unknown mode `{}`", args.mode));
    };
    let (graph, instance) = match build_cli_instance(&args.instance) {
        Ok(v) => v,
        Err(e) => return input_err(e),
    };
    let config = SolverConfig {
        split_mode: mode,
        bypass: args.bypass,
        prioritize_conflicts: args.prioritize,
        time_limit: args.time_limit,
        ..SolverConfig::default()
    };
    match solve(&instance, &config) {
        SolveOutcome::Solved(sol) => {
            let report = validate(&sol.paths, &instance);
            if !report.is_valid() {
                eprintln!("internal error: solution failed validation\n{report}");
                return ExitCode::from(1);
            }
            println!(
                "solved: cost {:.6}, {} CT expansions, {} low-level calls, {} ms",
                sol.cost, sol.stats.ct_expanded, sol.stats.lowlevel_calls, sol.stats.wall_ms
            );
            if let Some(out) = &args.out {
                if let Err(e) = std::fs::write(out, emit_solution(&sol, &graph)) {
                    return input_err(format!("{}: {e}", out.display()));
                }
            }
            ExitCode::SUCCESS
        }
        SolveOutcome::Timeout(stats) => {
            println!("timeout after {} ms ({} CT expansions)", stats.wall_ms, stats.ct_expanded);
            ExitCode::from(1)
        }
        SolveOutcome::Unsolvable(stats) => {
            println!("unsolvable ({} CT expansions)", stats.ct_expanded);
            ExitCode::from(1)
        }
    }
}

/// Finds `<stem>.map` files with a sibling `<stem>.scen` or
/// `<stem>.map.scen`, sorted by name for determinism.
fn discover_pairs(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>, String> {
    let mut maps: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "map"))
        .collect();
    maps.sort();
    let mut pairs = Vec::new();
    for map in maps {
        let with_map_ext = map.with_extension("map.scen");
        let plain = map.with_extension("scen");
        if with_map_ext.is_file() {
            pairs.push((map, with_map_ext));
        } else if plain.is_file() {
            pairs.push((map, plain));
        } else {
            eprintln!("warning: no scenario for {}", map.display());
        }
    }
    Ok(pairs)
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let mut configs = Vec::new();
    for token in args.configs.split(',') {
        match parse_config(token.trim()) {
            Some(c) => configs.push(c),
            None => return input_err(format!("bad config token `{token}`")),
        }
    }
    let pairs = match discover_pairs(&args.maps) {
        Ok(p) => p,
        Err(e) => return input_err(e),
    };
    let mut inputs = Vec::new();
    for (map, scen) in pairs {
        match load_grid_input(&map, &scen, args.neighborhood, args.radius) {
            Ok((grid, endpoints)) => inputs.push(SweepInput {
                map_id: map
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| map.display().to_string()),
                graph: grid.graph,
                endpoints,
                radius: args.radius,
            }),
            // Per-file problems are reported and the sweep continues.
            Err(e) => eprintln!("warning: skipping {}: {e}", map.display()),
        }
    }
    let spec = SweepSpec {
        start_agents: args.start_agents,
        increment: args.increment,
        time_limit: args.time_limit,
        instance_count: args.instances,
    };
    let records = run_sweep(&inputs, &spec, &configs);
    if let Err(e) = std::fs::write(&args.out, records_to_csv(&records)) {
        return input_err(format!("{}: {e}", args.out.display()));
    }
    println!("{} records -> {}", records.len(), args.out.display());
    for row in aggregate_success(&records) {
        println!(
            "{} {} agents={}: {}/{} solved",
            row.map_id, row.config, row.agents, row.solved, row.attempted
        );
    }
    ExitCode::SUCCESS
}

fn cmd_validate(args: &ValidateArgs) -> ExitCode {
    let (_, instance) = match build_cli_instance(&args.instance) {
        Ok(v) => v,
        Err(e) => return input_err(e),
    };
    let text = match std::fs::read_to_string(&args.sol) {
        Ok(t) => t,
        Err(e) => return input_err(format!("{}: {e}", args.sol.display())),
    };
    let (paths, cost, _) = match parse_solution(&text) {
        Ok(v) => v,
        Err(e) => return input_err(format!("{}: {e}", args.sol.display())),
    };
    let report = validate(&paths, &instance);
    let recomputed: f64 = paths.iter().map(|p| p.cost()).sum();
    print!("{report}");
    if report.is_valid() && (recomputed - cost).abs() <= 1e-6 {
        ExitCode::SUCCESS
    } else {
        if (recomputed - cost).abs() > 1e-6 {
            println!("violation: recorded cost {cost} differs from recomputed {recomputed}");
        }
        ExitCode::from(1)
    }
}

fn cmd_genroadmap(args: &GenArgs) -> ExitCode {
    if args.n == 0 || args.degree <= 0.0 {
        return input_err("vertex count and target degree must be positive");
    }
    let result = generate_roadmap(args.n, args.degree, args.seed);
    if let Some(w) = &result.warning {
        eprintln!("warning: {w}");
    }
    if let Err(e) = std::fs::write(&args.out, serialize_roadmap(&result.graph)) {
        return input_err(format!("{}: {e}", args.out.display()));
    }
    println!(
        "{} vertices, {} edges, mean degree {:.2} -> {}",
        result.graph.vertex_count(),
        result.graph.edge_count(),
        result.achieved_mean_degree,
        args.out.display()
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Genroadmap(args) => cmd_genroadmap(&args),
    }
}

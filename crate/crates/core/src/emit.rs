//! Solution serialization.
//!
//! Emits a solved instance as JSON with the schema
//! `{cost, agents: [{id, motions: [{from:[x,y], to:[x,y], start, duration}]}], stats}`.
//! Numbers are written with 17 significant digits so parsing reproduces the
//! exact binary values; infinite durations never appear (the rest at the
//! goal is implicit).

use serde::{Deserialize, Serialize};

use crate::search::{Solution, SolveStats};
use crate::sipp::{TimedMove, TimedPath};
use crate::world::Graph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotionJson {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentJson {
    pub id: usize,
    /// Start vertex index, so a parsed solution can be re-validated against
    /// the instance without geometric vertex lookup.
    pub start_vertex: usize,
    pub vertices: Vec<usize>,
    pub motions: Vec<MotionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsJson {
    pub ct_expanded: u64,
    pub lowlevel_calls: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub cost: f64,
    pub agents: Vec<AgentJson>,
    pub stats: StatsJson,
}

/// Serializes a solution to pretty JSON. Numbers keep full precision: the
/// formatter writes the shortest representation that parses back to the
/// identical binary value.
pub fn emit_solution(solution: &Solution, graph: &Graph) -> String {
    let agents = solution
        .paths
        .iter()
        .enumerate()
        .map(|(id, path)| AgentJson {
            id,
            start_vertex: path.start_vertex,
            vertices: path.moves.iter().map(|m| m.to_vertex).collect(),
            motions: path
                .moves
                .iter()
                .map(|m| {
                    let from = graph.position(m.from_vertex);
                    let to = graph.position(m.to_vertex);
                    MotionJson {
                        from: [from.x, from.y],
                        to: [to.x, to.y],
                        start: m.start_time,
                        duration: m.duration,
                    }
                })
                .collect(),
        })
        .collect();
    let doc = SolutionJson {
        cost: solution.cost,
        agents,
        stats: StatsJson {
            ct_expanded: solution.stats.ct_expanded,
            lowlevel_calls: solution.stats.lowlevel_calls,
            wall_ms: solution.stats.wall_ms,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("solution serializes");
    text.push('\n');
    text
}

/// Parses emitted JSON back into timed paths (vertex indices come from the
/// recorded vertex sequences; geometry is not re-derived).
pub fn parse_solution(text: &str) -> Result<(Vec<TimedPath>, f64, SolveStats), serde_json::Error> {
    let doc: SolutionJson = serde_json::from_str(text)?;
    let paths = doc
        .agents
        .iter()
        .map(|a| {
            let mut from = a.start_vertex;
            let moves = a
                .motions
                .iter()
                .zip(&a.vertices)
                .map(|(m, &to)| {
                    let tm = TimedMove {
                        from_vertex: from,
                        to_vertex: to,
                        start_time: m.start,
                        duration: m.duration,
                    };
                    from = to;
                    tm
                })
                .collect();
            TimedPath::from_moves(a.start_vertex, moves)
        })
        .collect();
    let stats = SolveStats {
        ct_expanded: doc.stats.ct_expanded,
        lowlevel_calls: doc.stats.lowlevel_calls,
        wall_ms: doc.stats.wall_ms,
    };
    Ok((paths, doc.cost, stats))
}

//! Independent solution validator.
//!
//! Re-checks a candidate solution against the instance from first
//! principles: structural integrity of each timed path (start/goal vertices,
//! edge existence and durations, temporal and spatial continuity) and a
//! pairwise conflict scan over all motions including the infinite rest at
//! the goal. The only code shared with the solver is the geometric conflict
//! predicate; no search or constraint machinery is involved.

use std::fmt;

use crate::geometry::{conflict_predicate, MotionSegment};
use crate::sipp::TimedPath;
use crate::world::Instance;

/// Tolerance for structural checks (durations, continuity stitching).
const STRUCT_EPS: f64 = 1e-6;

/// One violation found by the validator.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Number of paths differs from the number of agents.
    PathCount { expected: usize, actual: usize },
    /// Path does not begin at the agent's start vertex.
    WrongStart { agent: usize, expected: usize, actual: usize },
    /// Path does not end at the agent's goal vertex.
    WrongGoal { agent: usize, expected: usize, actual: usize },
    /// First move departs before time zero or with negative duration.
    BadTiming { agent: usize, move_index: usize },
    /// Consecutive moves disagree in space or time.
    Discontinuity { agent: usize, move_index: usize },
    /// A non-wait move uses an edge absent from the graph, or its duration
    /// differs from the edge weight.
    BadEdge { agent: usize, move_index: usize },
    /// Two agents' motions come closer than the shape sum.
    MotionConflict {
        agent_i: usize,
        motion_i: usize,
        agent_j: usize,
        motion_j: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PathCount { expected, actual } => {
                write!(f, "expected {expected} paths, found {actual}")
            }
            Violation::WrongStart { agent, expected, actual } => {
                write!(f, "agent {agent} starts at vertex {actual}, expected {expected}")
            }
            Violation::WrongGoal { agent, expected, actual } => {
                write!(f, "agent {agent} ends at vertex {actual}, expected {expected}")
            }
            Violation::BadTiming { agent, move_index } => {
                write!(f, "agent {agent} move {move_index} has invalid timing")
            }
            Violation::Discontinuity { agent, move_index } => {
                write!(f, "agent {agent} path discontinuous at move {move_index}")
            }
            Violation::BadEdge { agent, move_index } => {
                write!(f, "agent {agent} move {move_index} uses an invalid edge or duration")
            }
            Violation::MotionConflict { agent_i, motion_i, agent_j, motion_j } => write!(
                f,
                "agents {agent_i} (motion {motion_i}) and {agent_j} (motion {motion_j}) conflict"
            ),
        }
    }
}

/// Validation outcome: the list of violations, empty for a feasible
/// solution.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// Motions of one path rebuilt directly from the timed moves plus the
/// infinite rest at the final vertex.
fn motions(path: &TimedPath, instance: &Instance) -> Vec<MotionSegment> {
    let g = &instance.graph;
    let mut out: Vec<MotionSegment> = path
        .moves
        .iter()
        .map(|m| MotionSegment {
            from: g.position(m.from_vertex),
            to: g.position(m.to_vertex),
            start_time: m.start_time,
            duration: m.duration,
        })
        .collect();
    let end = path.moves.last().map(|m| (m.to_vertex, m.end_time()));
    let (v, t) = end.unwrap_or((path.start_vertex, 0.0));
    out.push(MotionSegment {
        from: g.position(v),
        to: g.position(v),
        start_time: t,
        duration: f64::INFINITY,
    });
    out
}

fn check_structure(path: &TimedPath, agent: usize, instance: &Instance, out: &mut Vec<Violation>) {
    if path.start_vertex != instance.starts[agent] {
        out.push(Violation::WrongStart {
            agent,
            expected: instance.starts[agent],
            actual: path.start_vertex,
        });
    }
    let end = path.moves.last().map(|m| m.to_vertex).unwrap_or(path.start_vertex);
    if end != instance.goals[agent] {
        out.push(Violation::WrongGoal { agent, expected: instance.goals[agent], actual: end });
    }
    let mut at_vertex = path.start_vertex;
    let mut at_time = 0.0;
    for (k, m) in path.moves.iter().enumerate() {
        if m.start_time < -STRUCT_EPS || m.duration < -STRUCT_EPS {
            out.push(Violation::BadTiming { agent, move_index: k });
        }
        if m.from_vertex != at_vertex || (m.start_time - at_time).abs() > STRUCT_EPS {
            out.push(Violation::Discontinuity { agent, move_index: k });
        }
        if m.from_vertex == m.to_vertex {
            // Explicit wait: any non-negative duration is fine.
        } else {
            match instance.graph.edge_weight(m.from_vertex, m.to_vertex) {
                Some(w) if (w - m.duration).abs() <= STRUCT_EPS => {}
                _ => out.push(Violation::BadEdge { agent, move_index: k }),
            }
        }
        at_vertex = m.to_vertex;
        at_time = m.end_time();
    }
}

/// Independent feasibility check of a candidate solution. The report lists
/// every structural violation and every pairwise motion conflict
/// (rest-at-goal included), one entry per conflicting motion pair.
pub fn validate(paths: &[TimedPath], instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    if paths.len() != instance.agent_count() {
        violations.push(Violation::PathCount {
            expected: instance.agent_count(),
            actual: paths.len(),
        });
        return ValidationReport { violations };
    }
    for (agent, path) in paths.iter().enumerate() {
        check_structure(path, agent, instance, &mut violations);
    }
    let shape_sum = instance.shape_sum();
    let all: Vec<Vec<MotionSegment>> = paths.iter().map(|p| motions(p, instance)).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            for (mi, a) in all[i].iter().enumerate() {
                for (mj, b) in all[j].iter().enumerate() {
                    if conflict_predicate(a, b, shape_sum) {
                        violations.push(Violation::MotionConflict {
                            agent_i: i,
                            motion_i: mi,
                            agent_j: j,
                            motion_j: mj,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

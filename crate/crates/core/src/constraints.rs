//! Constraint and conflict vocabulary shared by the low and high levels,
//! plus the conflict count table (CCT).
//!
//! Negative constraints block an agent from starting a directed move inside a
//! half-open time interval. For wait moves (`from == to`) the interval is a
//! presence window: the agent may not occupy the vertex at any time strictly
//! inside it. Positive constraints (landmarks) force a move to start inside a
//! window.

use std::collections::BTreeMap;

use crate::geometry::{conflict_interval, conflict_predicate, TimeInterval};
use crate::sipp::TimedPath;
use crate::world::Graph;

/// One agent's traversal of a directed edge, or a wait when both endpoints
/// coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MoveId {
    pub from_vertex: usize,
    pub to_vertex: usize,
}

impl MoveId {
    pub fn new(from_vertex: usize, to_vertex: usize) -> Self {
        MoveId { from_vertex, to_vertex }
    }

    pub fn wait_at(vertex: usize) -> Self {
        MoveId { from_vertex: vertex, to_vertex: vertex }
    }

    pub fn is_wait(&self) -> bool {
        self.from_vertex == self.to_vertex
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeConstraint {
    pub agent: usize,
    pub move_id: MoveId,
    pub blocked: TimeInterval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveConstraint {
    pub agent: usize,
    pub move_id: MoveId,
    pub window: TimeInterval,
}

/// A durative conflict between two motions of two agents' paths.
#[derive(Debug, Clone, Copy)]
pub struct Conflict {
    pub agent_i: usize,
    pub agent_j: usize,
    /// Index into each agent's motion list (the rest-at-goal motion is the
    /// index one past the last explicit motion).
    pub motion_i: usize,
    pub motion_j: usize,
    pub overlap: TimeInterval,
}

impl Conflict {
    /// Canonical ordering used for earliest-first selection: overlap start,
    /// then the agent pair.
    pub fn selection_key(&self) -> (f64, usize, usize) {
        (self.overlap.lo, self.agent_i, self.agent_j)
    }
}

/// Per-agent, per-motion index of every pairwise conflict in the current
/// solution. Rebuildable from scratch to identical content.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictCountTable {
    /// Keyed by (agent, motion index); each entry lists the opposing
    /// (agent, motion index) endpoints, sorted.
    entries: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
    totals: Vec<usize>,
}

impl ConflictCountTable {
    pub fn rebuild(paths: &[TimedPath], graph: &Graph, shape_sum: f64) -> Self {
        let mut table = ConflictCountTable {
            entries: BTreeMap::new(),
            totals: vec![0; paths.len()],
        };
        for i in 0..paths.len() {
            for j in (i + 1)..paths.len() {
                table.scan_pair(i, j, &paths[i], &paths[j], graph, shape_sum);
            }
        }
        table
    }

    fn scan_pair(
        &mut self,
        i: usize,
        j: usize,
        pi: &TimedPath,
        pj: &TimedPath,
        graph: &Graph,
        shape_sum: f64,
    ) {
        for (mi, seg_i) in pi.motions_with_rest(graph).enumerate() {
            for (mj, seg_j) in pj.motions_with_rest(graph).enumerate() {
                if conflict_predicate(&seg_i, &seg_j, shape_sum) {
                    self.insert(i, mi, j, mj);
                }
            }
        }
    }

    fn insert(&mut self, i: usize, mi: usize, j: usize, mj: usize) {
        self.entries.entry((i, mi)).or_default().push((j, mj));
        self.entries.entry((j, mj)).or_default().push((i, mi));
        self.totals[i] += 1;
        self.totals[j] += 1;
    }

    /// Replaces one agent's path, updating only the entries that involve it.
    /// Equivalent to a full rebuild over the updated path set.
    pub fn replace_path(
        &mut self,
        agent: usize,
        new_path: &TimedPath,
        all_paths: &[TimedPath],
        graph: &Graph,
        shape_sum: f64,
    ) {
        // Drop everything that mentions `agent` from both sides of the index.
        let removed: Vec<(usize, usize)> = self
            .entries
            .keys()
            .filter(|&&(a, _)| a == agent)
            .copied()
            .collect();
        for key in removed {
            let opposing = self.entries.remove(&key).unwrap();
            self.totals[agent] -= opposing.len();
            for (o, om) in opposing {
                let list = self.entries.get_mut(&(o, om)).unwrap();
                if let Some(pos) = list.iter().position(|&(a, m)| (a, m) == (agent, key.1)) {
                    list.remove(pos);
                    self.totals[o] -= 1;
                }
                if list.is_empty() {
                    self.entries.remove(&(o, om));
                }
            }
        }
        for (other, path) in all_paths.iter().enumerate() {
            if other == agent {
                continue;
            }
            let (i, j, pi, pj) = if agent < other {
                (agent, other, new_path, path)
            } else {
                (other, agent, path, new_path)
            };
            self.scan_pair(i, j, pi, pj, graph, shape_sum);
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        for list in self.entries.values_mut() {
            list.sort_unstable();
        }
    }

    /// Canonical form for equality tests against a fresh rebuild.
    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Opposing (agent, motion) endpoints recorded against one motion.
    pub fn conflicts_of(&self, agent: usize, motion: usize) -> &[(usize, usize)] {
        self.entries.get(&(agent, motion)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Agents (other than `agent`) with at least one conflict against the
    /// given motion, in ascending order.
    pub fn agents_conflicting_with(&self, agent: usize, motion: usize) -> Vec<usize> {
        let mut agents: Vec<usize> = self
            .conflicts_of(agent, motion)
            .iter()
            .map(|&(a, _)| a)
            .collect();
        agents.sort_unstable();
        agents.dedup();
        agents
    }

    pub fn total_for(&self, agent: usize) -> usize {
        self.totals.get(agent).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Recomputes every pairwise conflict of a path set with its durative
/// overlap intervals, including the implicit rest-at-goal motions.
pub fn all_conflicts(paths: &[TimedPath], graph: &Graph, shape_sum: f64) -> Vec<Conflict> {
    let mut out = Vec::new();
    for i in 0..paths.len() {
        for j in (i + 1)..paths.len() {
            for (mi, seg_i) in paths[i].motions_with_rest(graph).enumerate() {
                for (mj, seg_j) in paths[j].motions_with_rest(graph).enumerate() {
                    if let Some(overlap) = conflict_interval(&seg_i, &seg_j, shape_sum) {
                        if conflict_predicate(&seg_i, &seg_j, shape_sum) {
                            out.push(Conflict {
                                agent_i: i,
                                agent_j: j,
                                motion_i: mi,
                                motion_j: mj,
                                overlap,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Checks a path against a constraint set: no motion may start inside a
/// matching negative constraint's blocked interval (waits additionally may
/// not occupy the vertex inside the window), and every positive constraint
/// must be executed with a start time inside its window.
///
/// A blocked wait window is an occupancy ban: the agent may not be at the
/// vertex at any interior instant of the window, even with zero dwell time.
/// An arrival that departs the same instant ("pass-through") therefore still
/// violates the window — geometrically, presence at an interior instant is
/// already an overlap with the motion the window was derived from.
pub fn constraints_satisfied(
    path: &TimedPath,
    negatives: &[NegativeConstraint],
    positives: &[PositiveConstraint],
    agent: usize,
    graph: &Graph,
) -> bool {
    for (move_id, seg) in path.moves_with_rest(graph) {
        for nc in negatives.iter().filter(|nc| nc.agent == agent && nc.move_id == move_id) {
            if move_id.is_wait() {
                let presence = TimeInterval::new(seg.start_time, seg.end_time());
                if presence.overlaps_open(&nc.blocked) {
                    return false;
                }
            } else if nc.blocked.contains_start(seg.start_time) {
                return false;
            }
        }
        if !move_id.is_wait() {
            // Occupancy ban at the departure instant, even without a wait
            // motion (pass-through). Arrival instants are the next motion's
            // start; the final arrival is the rest wait's start.
            let wait_id = MoveId::wait_at(move_id.from_vertex);
            let t = seg.start_time;
            if negatives.iter().any(|nc| {
                nc.agent == agent && nc.move_id == wait_id && nc.blocked.lo < t && t < nc.blocked.hi
            }) {
                return false;
            }
        }
    }
    for pc in positives.iter().filter(|pc| pc.agent == agent) {
        let executed = path
            .moves_with_rest(graph)
            .any(|(move_id, seg)| move_id == pc.move_id && pc.window.contains_start(seg.start_time));
        if !executed {
            return false;
        }
    }
    true
}

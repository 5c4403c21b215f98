//! High-level constraint-tree search.
//!
//! Best-first search over constraint-tree nodes ordered by (cost, conflict
//! count, FIFO). Each expansion selects one conflict, derives a pair of
//! child constraint sets according to the configured split rule, replans
//! exactly the agents that received new constraints, and optionally first
//! attempts a bypass: adopting an equal-cost replacement path with strictly
//! fewer conflicts instead of branching.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::cliques::{
    bc_split, db_split, dk_split, ds_split, pair_constraints, CoreMotion, DbChooser,
};
use crate::constraints::{
    all_conflicts, Conflict, ConflictCountTable, NegativeConstraint, PositiveConstraint,
};
use crate::sipp::{plan_with_landmarks, TimedPath};
use crate::world::{goal_distances, Instance};

/// Which split rule derives child constraints from a chosen conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Plain,
    Ds,
    Bc,
    Db,
    Dk,
}

impl SplitMode {
    pub fn label(self) -> &'static str {
        match self {
            SplitMode::Plain => "plain",
            SplitMode::Ds => "ds",
            SplitMode::Bc => "bc",
            SplitMode::Db => "db",
            SplitMode::Dk => "dk",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub split_mode: SplitMode,
    pub bypass: bool,
    pub prioritize_conflicts: bool,
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    /// Conflict-tree node budget; the arena retains every generated node,
    /// so this bounds memory. Exceeding it reports a timeout.
    pub max_ct_nodes: usize,
    /// Cost-comparison tolerance.
    pub epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            split_mode: SplitMode::Plain,
            bypass: false,
            prioritize_conflicts: false,
            time_limit: 30.0,
            max_ct_nodes: 200_000,
            epsilon: 1e-6,
        }
    }
}

impl SolverConfig {
    /// Short identifier like "db+bp" used in benchmark CSV output.
    pub fn label(&self) -> String {
        let mut s = self.split_mode.label().to_string();
        if self.bypass {
            s.push_str("+bp");
        }
        if self.prioritize_conflicts {
            s.push_str("+pc");
        }
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub ct_expanded: u64,
    pub lowlevel_calls: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub paths: Vec<TimedPath>,
    pub cost: f64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(Solution),
    Timeout(SolveStats),
    Unsolvable(SolveStats),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }

    pub fn stats(&self) -> &SolveStats {
        match self {
            SolveOutcome::Solved(s) => &s.stats,
            SolveOutcome::Timeout(st) | SolveOutcome::Unsolvable(st) => st,
        }
    }
}

/// All pairwise motion conflicts of a candidate solution, rest-at-goal
/// included.
pub fn detect_conflicts(
    paths: &[TimedPath],
    graph: &crate::world::Graph,
    radius: f64,
) -> Vec<Conflict> {
    all_conflicts(paths, graph, 2.0 * radius)
}

/// A conflict-tree node stores only its constraint delta; the full
/// constraint sets are materialized on demand by walking the parent chain.
/// Cloning the accumulated sets into every node would cost memory quadratic
/// in tree depth.
struct CtNode {
    parent: Option<usize>,
    delta_negatives: Vec<NegativeConstraint>,
    delta_positive: Option<PositiveConstraint>,
    paths: Vec<TimedPath>,
    cost: f64,
    conflicts: Vec<Conflict>,
    cct: ConflictCountTable,
}

/// Adds a positive constraint, merging with an existing one on the same
/// agent and move when the windows overlap: both then pin the *same*
/// execution, so the intersection is the window that satisfies both. (Two
/// separate executions inside overlapping windows would need a round trip
/// back to the move's source inside the combined span, which the move
/// durations on any near-overlapping windows rule out.) Disjoint windows
/// stay separate landmarks requiring distinct executions.
fn push_positive(positives: &mut Vec<PositiveConstraint>, p: PositiveConstraint) {
    for existing in positives.iter_mut() {
        if existing.agent == p.agent && existing.move_id == p.move_id {
            if let Some(merged) = existing.window.intersect(&p.window) {
                existing.window = merged;
                return;
            }
        }
    }
    positives.push(p);
}

/// Root-first accumulated constraint sets for a node.
fn constraint_sets(
    arena: &[CtNode],
    node: usize,
) -> (Vec<NegativeConstraint>, Vec<PositiveConstraint>) {
    let mut chain = vec![node];
    while let Some(p) = arena[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    let mut negatives = Vec::new();
    let mut positives = Vec::new();
    for &idx in chain.iter().rev() {
        negatives.extend(arena[idx].delta_negatives.iter().copied());
        if let Some(p) = arena[idx].delta_positive {
            push_positive(&mut positives, p);
        }
    }
    (negatives, positives)
}

#[derive(Clone, Copy)]
struct OpenEntry {
    cost: f64,
    conflicts: usize,
    seq: u64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    // Max-heap: order reversed so the cheapest node pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.conflicts.cmp(&self.conflicts))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// One child's constraint delta before replanning.
struct ChildSpec {
    negatives: Vec<NegativeConstraint>,
    positive: Option<PositiveConstraint>,
}

struct Solver<'a> {
    instance: &'a Instance,
    config: &'a SolverConfig,
    goal_h: Vec<Vec<f64>>,
    shape_sum: f64,
    stats: SolveStats,
    started: Instant,
}

impl<'a> Solver<'a> {
    fn replan(
        &mut self,
        agent: usize,
        negatives: &[NegativeConstraint],
        positives: &[PositiveConstraint],
    ) -> Option<TimedPath> {
        self.stats.lowlevel_calls += 1;
        plan_with_landmarks(
            &self.instance.graph,
            agent,
            self.instance.starts[agent],
            self.instance.goals[agent],
            negatives,
            positives,
            &self.goal_h[agent],
        )
    }

    fn out_of_time(&self) -> bool {
        self.started.elapsed().as_secs_f64() > self.config.time_limit
    }

    fn core_of(&self, node: &CtNode, agent: usize, motion: usize) -> CoreMotion {
        CoreMotion {
            agent,
            move_id: node.paths[agent].move_id_at(motion),
            motion_index: motion,
            motion: node.paths[agent].motion(&self.instance.graph, motion),
        }
    }

    /// Classifies and picks the conflict to split on.
    fn select_conflict(
        &mut self,
        node: &CtNode,
        negatives: &[NegativeConstraint],
        positives: &[PositiveConstraint],
    ) -> Conflict {
        let mut ordered: Vec<&Conflict> = node.conflicts.iter().collect();
        ordered.sort_by(|a, b| {
            let (ta, ia, ja) = a.selection_key();
            let (tb, ib, jb) = b.selection_key();
            ta.total_cmp(&tb).then(ia.cmp(&ib)).then(ja.cmp(&jb))
        });
        if !self.config.prioritize_conflicts {
            return *ordered[0];
        }
        // Classify a bounded sample: cardinal (both candidate constraints
        // raise that agent's cost), semi-cardinal (one), else non-cardinal.
        let mut best: Option<(usize, Conflict)> = None;
        for c in ordered.into_iter().take(8) {
            let Some((ni, nj)) = pair_constraints(
                &self.core_of(node, c.agent_i, c.motion_i),
                &self.core_of(node, c.agent_j, c.motion_j),
                self.shape_sum,
            ) else {
                continue;
            };
            let mut raised = 0;
            for nc in [ni, nj] {
                let agent = nc.agent;
                let mut negs = negatives.to_vec();
                negs.push(nc);
                let increase = match self.replan(agent, &negs, positives) {
                    Some(p) => p.cost() - node.paths[agent].cost(),
                    None => f64::INFINITY,
                };
                if increase > self.config.epsilon {
                    raised += 1;
                }
            }
            let rank = 2 - raised; // cardinal 0, semi 1, non 2
            if best.as_ref().is_none_or(|(r, _)| rank < *r) {
                best = Some((rank, *c));
            }
            if rank == 0 {
                break;
            }
        }
        best.map(|(_, c)| c).unwrap_or(node.conflicts[0])
    }

    /// Derives the two child constraint deltas for a conflict.
    fn split_specs(
        &mut self,
        node: &CtNode,
        conflict: &Conflict,
        negatives: &[NegativeConstraint],
        positives: &[PositiveConstraint],
    ) -> Vec<ChildSpec> {
        let core_i = self.core_of(node, conflict.agent_i, conflict.motion_i);
        let core_j = self.core_of(node, conflict.agent_j, conflict.motion_j);
        let plain = |s: &mut Self| -> Vec<ChildSpec> {
            match pair_constraints(&core_i, &core_j, s.shape_sum) {
                Some((ci, cj)) => vec![
                    ChildSpec { negatives: vec![ci], positive: None },
                    ChildSpec { negatives: vec![cj], positive: None },
                ],
                None => Vec::new(),
            }
        };
        let from_disjoint = |d: crate::cliques::DisjointSplit| {
            vec![
                ChildSpec { negatives: d.negatives, positive: Some(d.positive) },
                ChildSpec { negatives: vec![d.mirror], positive: None },
            ]
        };
        match self.config.split_mode {
            SplitMode::Plain => plain(self),
            SplitMode::Ds => {
                // Positive goes to the agent whose negative child costs
                // more, so the cheaper-to-reroute agent absorbs the block.
                let Some((ni, nj)) = pair_constraints(&core_i, &core_j, self.shape_sum) else {
                    return Vec::new();
                };
                let mut increases = [0.0f64; 2];
                for (slot, nc) in [ni, nj].into_iter().enumerate() {
                    let agent = nc.agent;
                    let mut negs = negatives.to_vec();
                    negs.push(nc);
                    increases[slot] = match self.replan(agent, &negs, positives) {
                        Some(p) => p.cost() - node.paths[agent].cost(),
                        None => f64::INFINITY,
                    };
                }
                let i_first = increases[0] >= increases[1];
                let (first, second) = if i_first { (&core_i, &core_j) } else { (&core_j, &core_i) };
                ds_split(first, second, self.shape_sum)
                    .or_else(|| ds_split(second, first, self.shape_sum))
                    .map(from_disjoint)
                    .unwrap_or_else(|| plain(self))
            }
            SplitMode::Bc => match bc_split(&core_i, &core_j, &self.instance.graph, self.shape_sum)
            {
                Some((set_i, set_j)) => vec![
                    ChildSpec { negatives: set_i, positive: None },
                    ChildSpec { negatives: set_j, positive: None },
                ],
                None => plain(self),
            },
            SplitMode::Db => {
                db_split(&core_i, &core_j, &self.instance.graph, self.shape_sum, DbChooser::MostNodes)
                    .map(from_disjoint)
                    .unwrap_or_else(|| plain(self))
            }
            SplitMode::Dk => {
                dk_split(&core_i, &core_j, &node.cct, &self.instance.graph, self.shape_sum)
                    .map(from_disjoint)
                    .unwrap_or_else(|| plain(self))
            }
        }
    }

    /// Builds a child node from a constraint delta; None when some agent can
    /// no longer reach its goal.
    fn make_child(
        &mut self,
        node: &CtNode,
        parent: usize,
        spec: &ChildSpec,
        parent_negatives: &[NegativeConstraint],
        parent_positives: &[PositiveConstraint],
    ) -> Option<CtNode> {
        let mut negatives = parent_negatives.to_vec();
        negatives.extend(spec.negatives.iter().copied());
        let mut positives = parent_positives.to_vec();
        if let Some(p) = spec.positive {
            push_positive(&mut positives, p);
        }
        let mut affected: Vec<usize> = spec.negatives.iter().map(|c| c.agent).collect();
        if let Some(p) = &spec.positive {
            affected.push(p.agent);
        }
        affected.sort_unstable();
        affected.dedup();
        let mut paths = node.paths.clone();
        for &agent in &affected {
            paths[agent] = self.replan(agent, &negatives, &positives)?;
        }
        let conflicts = all_conflicts(&paths, &self.instance.graph, self.shape_sum);
        let cct = ConflictCountTable::rebuild(&paths, &self.instance.graph, self.shape_sum);
        let cost = paths.iter().map(TimedPath::cost).sum();
        Some(CtNode {
            parent: Some(parent),
            delta_negatives: spec.negatives.clone(),
            delta_positive: spec.positive,
            paths,
            cost,
            conflicts,
            cct,
        })
    }

    /// Attempts to adopt an equal-cost, strictly-fewer-conflicts path for
    /// one of the conflict's agents instead of splitting.
    fn try_bypass(
        &mut self,
        node: &mut CtNode,
        specs: &[ChildSpec],
        node_negatives: &[NegativeConstraint],
        node_positives: &[PositiveConstraint],
    ) -> bool {
        let mut agents: Vec<usize> = specs
            .iter()
            .flat_map(|s| s.negatives.iter().map(|c| c.agent))
            .collect();
        agents.sort_unstable();
        agents.dedup();
        for agent in agents {
            let mut negatives = node_negatives.to_vec();
            negatives.extend(
                specs
                    .iter()
                    .flat_map(|s| s.negatives.iter())
                    .filter(|c| c.agent == agent)
                    .copied(),
            );
            let Some(candidate) = self.replan(agent, &negatives, node_positives) else {
                continue;
            };
            if candidate.cost() > node.paths[agent].cost() + self.config.epsilon {
                continue;
            }
            let mut paths = node.paths.clone();
            paths[agent] = candidate;
            let conflicts = all_conflicts(&paths, &self.instance.graph, self.shape_sum);
            if conflicts.len() < node.conflicts.len() {
                node.cct = ConflictCountTable::rebuild(&paths, &self.instance.graph, self.shape_sum);
                node.cost = paths.iter().map(TimedPath::cost).sum();
                node.paths = paths;
                node.conflicts = conflicts;
                return true;
            }
        }
        false
    }
}

/// Optimal continuous-time multi-agent search. Returns the first
/// conflict-free constraint-tree node in best-first order.
pub fn solve(instance: &Instance, config: &SolverConfig) -> SolveOutcome {
    let started = Instant::now();
    let mut solver = Solver {
        instance,
        config,
        goal_h: instance
            .goals
            .iter()
            .map(|&g| goal_distances(&instance.graph, g))
            .collect(),
        shape_sum: instance.shape_sum(),
        stats: SolveStats::default(),
        started,
    };
    let finish = |mut stats: SolveStats| -> SolveStats {
        stats.wall_ms = started.elapsed().as_millis() as u64;
        stats
    };

    // Agents whose starts or goals are already within a shape sum of each
    // other can never coexist at time 0 / rest together: no solution exists.
    let n = instance.agent_count();
    for a in 0..n {
        for b in a + 1..n {
            let g = &instance.graph;
            let too_close = |u: usize, v: usize| {
                g.position(u).dist(g.position(v)) < solver.shape_sum
            };
            if too_close(instance.starts[a], instance.starts[b])
                || too_close(instance.goals[a], instance.goals[b])
            {
                return SolveOutcome::Unsolvable(finish(solver.stats));
            }
        }
    }

    let mut root_paths = Vec::with_capacity(n);
    for agent in 0..n {
        match solver.replan(agent, &[], &[]) {
            Some(p) => root_paths.push(p),
            None => return SolveOutcome::Unsolvable(finish(solver.stats)),
        }
    }
    let conflicts = all_conflicts(&root_paths, &instance.graph, solver.shape_sum);
    let cct = ConflictCountTable::rebuild(&root_paths, &instance.graph, solver.shape_sum);
    let root = CtNode {
        parent: None,
        delta_negatives: Vec::new(),
        delta_positive: None,
        cost: root_paths.iter().map(TimedPath::cost).sum(),
        paths: root_paths,
        conflicts,
        cct,
    };

    let mut arena = vec![root];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(OpenEntry { cost: arena[0].cost, conflicts: arena[0].conflicts.len(), seq, node: 0 });

    while let Some(entry) = open.pop() {
        if solver.out_of_time() || arena.len() >= config.max_ct_nodes {
            return SolveOutcome::Timeout(finish(solver.stats));
        }
        if arena[entry.node].conflicts.is_empty() {
            let node = &arena[entry.node];
            return SolveOutcome::Solved(Solution {
                paths: node.paths.clone(),
                cost: node.cost,
                stats: finish(solver.stats.clone()),
            });
        }
        solver.stats.ct_expanded += 1;
        let (negatives, positives) = constraint_sets(&arena, entry.node);
        let conflict = {
            let node = &arena[entry.node];
            solver.select_conflict(node, &negatives, &positives)
        };
        let specs = {
            let node = &arena[entry.node];
            solver.split_specs(node, &conflict, &negatives, &positives)
        };
        if specs.is_empty() {
            continue;
        }
        if config.bypass {
            let node = &mut arena[entry.node];
            if solver.try_bypass(node, &specs, &negatives, &positives) {
                seq += 1;
                open.push(OpenEntry {
                    cost: arena[entry.node].cost,
                    conflicts: arena[entry.node].conflicts.len(),
                    seq,
                    node: entry.node,
                });
                continue;
            }
        }
        for spec in &specs {
            let child = {
                let node = &arena[entry.node];
                solver.make_child(node, entry.node, spec, &negatives, &positives)
            };
            if let Some(child) = child {
                seq += 1;
                let e = OpenEntry {
                    cost: child.cost,
                    conflicts: child.conflicts.len(),
                    seq,
                    node: arena.len(),
                };
                arena.push(child);
                open.push(e);
            }
        }
    }
    SolveOutcome::Unsolvable(finish(solver.stats))
}

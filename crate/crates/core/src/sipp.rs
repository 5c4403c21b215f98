//! Optimal single-agent planner over safe intervals.
//!
//! Best-first search on (vertex, safe-interval, landmarks-done) states with
//! earliest-arrival g values. Negative constraints on moves restrict start
//! times; negative constraints on waits restrict when the agent may occupy a
//! vertex, which fragments the vertex safe intervals. Positive constraints
//! (landmarks) are executed in window order via the extra state dimension,
//! with a chained admissible heuristic through the remaining landmarks.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::constraints::{MoveId, NegativeConstraint, PositiveConstraint};
use crate::geometry::{MotionSegment, Point2, TimeInterval, EPS_TIME};
use crate::world::{goal_distances, Graph};

/// One executed move or explicit wait of a timed path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedMove {
    pub from_vertex: usize,
    pub to_vertex: usize,
    pub start_time: f64,
    pub duration: f64,
}

impl TimedMove {
    pub fn move_id(&self) -> MoveId {
        MoveId::new(self.from_vertex, self.to_vertex)
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn segment(&self, graph: &Graph) -> MotionSegment {
        MotionSegment {
            from: graph.position(self.from_vertex),
            to: graph.position(self.to_vertex),
            start_time: self.start_time,
            duration: self.duration,
        }
    }
}

/// A contiguous timed path for one agent, starting at its start vertex at
/// time 0. Cost is the arrival time at the goal, waits included.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPath {
    pub start_vertex: usize,
    pub moves: Vec<TimedMove>,
}

impl TimedPath {
    pub fn from_moves(start_vertex: usize, moves: Vec<TimedMove>) -> Self {
        if let Some(first) = moves.first() {
            debug_assert_eq!(first.from_vertex, start_vertex);
        }
        for w in moves.windows(2) {
            debug_assert_eq!(w[0].to_vertex, w[1].from_vertex);
            debug_assert!((w[0].end_time() - w[1].start_time).abs() < 1e-6);
        }
        TimedPath { start_vertex, moves }
    }

    pub fn end_vertex(&self) -> usize {
        self.moves.last().map(|m| m.to_vertex).unwrap_or(self.start_vertex)
    }

    /// Arrival time at the goal, waits included.
    pub fn cost(&self) -> f64 {
        self.moves.last().map(|m| m.end_time()).unwrap_or(0.0)
    }

    /// Number of motions including the implicit rest at the goal.
    pub fn motion_count(&self) -> usize {
        self.moves.len() + 1
    }

    /// The motion at a given index; index `moves.len()` is the infinite
    /// rest at the final vertex.
    pub fn motion(&self, graph: &Graph, index: usize) -> MotionSegment {
        if index < self.moves.len() {
            self.moves[index].segment(graph)
        } else {
            let at = graph.position(self.end_vertex());
            MotionSegment { from: at, to: at, start_time: self.cost(), duration: f64::INFINITY }
        }
    }

    pub fn move_id_at(&self, index: usize) -> MoveId {
        if index < self.moves.len() {
            self.moves[index].move_id()
        } else {
            MoveId::wait_at(self.end_vertex())
        }
    }

    pub fn motions_with_rest<'a>(&'a self, graph: &'a Graph) -> impl Iterator<Item = MotionSegment> + 'a {
        (0..self.motion_count()).map(move |i| self.motion(graph, i))
    }

    pub fn moves_with_rest<'a>(
        &'a self,
        graph: &'a Graph,
    ) -> impl Iterator<Item = (MoveId, MotionSegment)> + 'a {
        (0..self.motion_count()).map(move |i| (self.move_id_at(i), self.motion(graph, i)))
    }
}

/// Safe intervals per move and per vertex for one agent: the complement of
/// the union of that agent's blocked intervals.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    /// Closed safe occupancy intervals per vertex, ascending; the complement
    /// of the open union of wait-constraint windows. Default `[0, inf]`.
    vertex_safe: HashMap<usize, Vec<TimeInterval>>,
    /// Half-open safe start-time intervals per directed move. Default
    /// `[0, inf)`.
    move_safe: HashMap<MoveId, Vec<TimeInterval>>,
}

const FULL: TimeInterval = TimeInterval { lo: 0.0, hi: f64::INFINITY };

impl SafeIntervalTable {
    /// Builds the table from one agent's negative constraints.
    pub fn build(agent: usize, negatives: &[NegativeConstraint]) -> Self {
        let mut vertex_blocks: HashMap<usize, Vec<TimeInterval>> = HashMap::new();
        let mut move_blocks: HashMap<MoveId, Vec<TimeInterval>> = HashMap::new();
        for nc in negatives.iter().filter(|nc| nc.agent == agent) {
            if nc.blocked.is_empty() {
                continue;
            }
            if nc.move_id.is_wait() {
                vertex_blocks.entry(nc.move_id.from_vertex).or_default().push(nc.blocked);
            } else {
                move_blocks.entry(nc.move_id).or_default().push(nc.blocked);
            }
        }
        let vertex_safe = vertex_blocks
            .into_iter()
            .map(|(v, blocks)| (v, complement(blocks, true)))
            .collect();
        let move_safe = move_blocks
            .into_iter()
            .map(|(m, blocks)| (m, complement(blocks, false)))
            .collect();
        SafeIntervalTable { vertex_safe, move_safe }
    }

    pub fn vertex_intervals(&self, v: usize) -> &[TimeInterval] {
        self.vertex_safe.get(&v).map(Vec::as_slice).unwrap_or(std::slice::from_ref(&FULL))
    }

    pub fn move_intervals(&self, m: MoveId) -> &[TimeInterval] {
        self.move_safe.get(&m).map(Vec::as_slice).unwrap_or(std::slice::from_ref(&FULL))
    }

    fn vertex_interval_containing(&self, v: usize, t: f64) -> Option<usize> {
        self.vertex_intervals(v).iter().position(|iv| iv.lo <= t && t <= iv.hi)
    }
}

/// Complement of a union of blocked intervals over [0, inf). With
/// `point_gaps` (vertex occupancy), blocks are open so touching blocks leave
/// a zero-width safe instant between them.
fn complement(mut blocks: Vec<TimeInterval>, point_gaps: bool) -> Vec<TimeInterval> {
    blocks.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut safe = Vec::new();
    let mut cursor = 0.0f64;
    for b in blocks {
        let lo = b.lo.max(0.0);
        let hi = b.hi;
        if hi <= cursor && !(point_gaps && hi == cursor) {
            cursor = cursor.max(hi);
            continue;
        }
        if lo > cursor || (point_gaps && lo >= cursor) {
            safe.push(TimeInterval { lo: cursor, hi: lo });
        }
        cursor = cursor.max(hi);
    }
    safe.push(TimeInterval { lo: cursor, hi: f64::INFINITY });
    safe
}

#[derive(Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    interval_start: f64,
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
    // BinaryHeap is a max-heap; order so the heap pops the best entry:
    // smallest f, then smallest g, then largest interval start, then FIFO.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.g.total_cmp(&self.g))
            .then_with(|| self.interval_start.total_cmp(&other.interval_start))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct SearchNode {
    vertex: usize,
    interval_idx: usize,
    landmarks_done: usize,
    g: f64,
    parent: Option<usize>,
    /// Departure time from the parent's vertex, when this node was reached
    /// by a move.
    depart: f64,
}

/// Plans a minimum-cost path honoring negative constraints only.
pub fn plan(
    graph: &Graph,
    agent: usize,
    start: usize,
    goal: usize,
    negatives: &[NegativeConstraint],
    goal_h: &[f64],
) -> Option<TimedPath> {
    plan_with_landmarks(graph, agent, start, goal, negatives, &[], goal_h)
}

/// Plans a minimum-cost path that additionally executes every positive
/// constraint (in window order) with a start time inside its window.
pub fn plan_with_landmarks(
    graph: &Graph,
    agent: usize,
    start: usize,
    goal: usize,
    negatives: &[NegativeConstraint],
    positives: &[PositiveConstraint],
    goal_h: &[f64],
) -> Option<TimedPath> {
    let table = SafeIntervalTable::build(agent, negatives);
    let mut landmarks: Vec<PositiveConstraint> =
        positives.iter().filter(|pc| pc.agent == agent).copied().collect();
    landmarks.sort_by(|a, b| a.window.lo.total_cmp(&b.window.lo));

    // Chained heuristic: h[s] is the distance table to landmark s's source
    // plus the constant remainder through the rest of the chain.
    let mut h_tables: Vec<Vec<f64>> = Vec::with_capacity(landmarks.len());
    let mut h_consts: Vec<f64> = Vec::with_capacity(landmarks.len());
    for lm in &landmarks {
        h_tables.push(goal_distances(graph, lm.move_id.from_vertex));
    }
    let mut tail = 0.0f64;
    for (idx, lm) in landmarks.iter().enumerate().rev() {
        let dur = move_duration(graph, lm.move_id);
        let after = if idx + 1 < landmarks.len() {
            h_tables[idx + 1][lm.move_id.to_vertex] + h_consts[0]
        } else {
            goal_h[lm.move_id.to_vertex]
        };
        tail = dur + after;
        h_consts.insert(0, tail);
    }
    let _ = tail;
    let heuristic = |vertex: usize, done: usize| -> f64 {
        if done < landmarks.len() {
            h_tables[done][vertex] + h_consts[done]
        } else {
            goal_h[vertex]
        }
    };

    let root_interval = table.vertex_interval_containing(start, 0.0)?;
    let mut arena: Vec<SearchNode> = vec![SearchNode {
        vertex: start,
        interval_idx: root_interval,
        landmarks_done: 0,
        g: 0.0,
        parent: None,
        depart: 0.0,
    }];
    let mut best: HashMap<(usize, usize, usize), f64> = HashMap::new();
    best.insert((start, root_interval, 0), 0.0);
    let mut open = std::collections::BinaryHeap::new();
    let mut seq = 0u64;
    let h0 = heuristic(start, 0);
    if !h0.is_finite() {
        return None;
    }
    open.push(OpenEntry {
        f: h0,
        g: 0.0,
        interval_start: table.vertex_intervals(start)[root_interval].lo,
        seq,
        node: 0,
    });

    while let Some(entry) = open.pop() {
        let node_idx = entry.node;
        let (vertex, interval_idx, done, g) = {
            let n = &arena[node_idx];
            (n.vertex, n.interval_idx, n.landmarks_done, n.g)
        };
        if best
            .get(&(vertex, interval_idx, done))
            .is_some_and(|&bg| g > bg + EPS_TIME)
        {
            continue;
        }
        let interval = table.vertex_intervals(vertex)[interval_idx];
        if vertex == goal && done == landmarks.len() && interval.hi.is_infinite() {
            return Some(reconstruct(graph, &arena, node_idx));
        }

        let mut push = |arena: &mut Vec<SearchNode>,
                        open: &mut std::collections::BinaryHeap<OpenEntry>,
                        best: &mut HashMap<(usize, usize, usize), f64>,
                        to: usize,
                        iv_idx: usize,
                        next_done: usize,
                        arrival: f64,
                        depart: f64| {
            let h = heuristic(to, next_done);
            if !h.is_finite() {
                return;
            }
            let key = (to, iv_idx, next_done);
            if best.get(&key).is_some_and(|&bg| arrival >= bg - EPS_TIME) {
                return;
            }
            best.insert(key, arrival);
            arena.push(SearchNode {
                vertex: to,
                interval_idx: iv_idx,
                landmarks_done: next_done,
                g: arrival,
                parent: Some(node_idx),
                depart,
            });
            seq += 1;
            open.push(OpenEntry {
                f: arrival + h,
                g: arrival,
                interval_start: table.vertex_intervals(to)[iv_idx].lo,
                seq,
                node: arena.len() - 1,
            });
        };

        for &(to, dur) in graph.neighbors(vertex) {
            let mid = MoveId::new(vertex, to);
            let is_landmark = done < landmarks.len() && landmarks[done].move_id == mid;
            let window = is_landmark.then(|| landmarks[done].window);
            // A landmark edge can also be traversed without consuming the
            // landmark; both successors are generated when eligible.
            let mut variants = vec![(done, None)];
            if let Some(w) = window {
                variants.push((done + 1, Some(w)));
            }
            for (next_done, win) in variants {
                for move_iv in table.move_intervals(mid) {
                    for (iv_idx, target_iv) in table.vertex_intervals(to).iter().enumerate() {
                        let mut t = g.max(move_iv.lo).max(target_iv.lo - dur);
                        if let Some(w) = win {
                            t = t.max(w.lo);
                        }
                        let within_window = win.map_or(true, |w| t < w.hi);
                        if t <= interval.hi
                            && t < move_iv.hi
                            && t + dur <= target_iv.hi
                            && within_window
                        {
                            push(&mut arena, &mut open, &mut best, to, iv_idx, next_done, t + dur, t);
                        }
                    }
                }
            }
        }
    }
    None
}

fn move_duration(graph: &Graph, m: MoveId) -> f64 {
    graph
        .neighbors(m.from_vertex)
        .iter()
        .find(|&&(v, _)| v == m.to_vertex)
        .map(|&(_, w)| w)
        .unwrap_or(f64::INFINITY)
}

fn reconstruct(graph: &Graph, arena: &[SearchNode], goal_idx: usize) -> TimedPath {
    let _ = graph;
    let mut chain = Vec::new();
    let mut idx = goal_idx;
    while let Some(parent) = arena[idx].parent {
        chain.push(idx);
        idx = parent;
    }
    chain.reverse();
    let start_vertex = arena[idx].vertex;
    let mut moves = Vec::new();
    let mut at = start_vertex;
    let mut clock = 0.0f64;
    for node_idx in chain {
        let node = &arena[node_idx];
        let depart = node.depart;
        if depart > clock + EPS_TIME {
            moves.push(TimedMove {
                from_vertex: at,
                to_vertex: at,
                start_time: clock,
                duration: depart - clock,
            });
            clock = depart;
        }
        moves.push(TimedMove {
            from_vertex: at,
            to_vertex: node.vertex,
            start_time: clock,
            duration: node.g - depart,
        });
        at = node.vertex;
        clock = node.g;
    }
    TimedPath::from_moves(start_vertex, moves)
}

/// Builds a wait-free shortest path ignoring all constraints; used for root
/// lower bounds in tests.
pub fn unconstrained_cost(graph: &Graph, start: usize, goal: usize) -> f64 {
    goal_distances(graph, goal)[start]
}

/// Positions for a path's vertices; convenience for building instances in
/// tests and the validator.
pub fn vertex_position(graph: &Graph, v: usize) -> Point2 {
    graph.position(v)
}

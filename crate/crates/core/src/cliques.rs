//! Conflict-graph construction and symmetry-breaking constraint generation.
//!
//! The basic split for a conflicting motion pair blocks each motion over its
//! forward-anchored unsafe interval against the other at its current start,
//! so both children clear the current conflict outright and every split
//! makes macroscopic progress. Biclique splits additionally certify that
//! their constraint sets are *mutually disjunctive* — any execution inside
//! one side's blocked intervals conflicts with any execution inside the
//! other's — via interval-endpoint checks (the conflicting-start set against
//! a fixed motion is contiguous), falling back to the plain split when
//! certification fails. The disjoint rules (DS, DB, DK) turn one side into a
//! positive landmark and block the enumerated conflicting moves of the other
//! agents over their full annotated intervals.

use crate::constraints::{ConflictCountTable, MoveId, NegativeConstraint, PositiveConstraint};
use crate::geometry::{
    blocked_presence_interval, conflict_predicate, unsafe_interval, MotionSegment, ProbeEdge,
    TimeInterval, EPS_TIME,
};
use crate::world::{point_to_segment_distance, Graph};

/// One motion of a conflict's core pair, located in its agent's current path.
#[derive(Debug, Clone, Copy)]
pub struct CoreMotion {
    pub agent: usize,
    pub move_id: MoveId,
    /// Index of the motion in the agent's path (one past the last move for
    /// the rest at the goal).
    pub motion_index: usize,
    pub motion: MotionSegment,
}

/// A move of some agent annotated with the start times at which it conflicts
/// with a fixed opposing core motion. For wait moves the interval is the
/// presence window near the core instead of a start-time range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotatedVertex {
    pub agent: usize,
    pub move_id: MoveId,
    pub unsafe_interval: TimeInterval,
}

/// An edge of a conflict graph between two partition slots, annotated with
/// the pairwise unsafe interval.
#[derive(Debug, Clone, Copy)]
pub struct ConflictEdge {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub unsafe_interval: TimeInterval,
}

/// Bipartite or k-partite conflict graph: one partition per agent, vertices
/// are annotated moves, edges only between partitions.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub partitions: Vec<Vec<AnnotatedVertex>>,
    pub edges: Vec<ConflictEdge>,
}

impl ConflictGraph {
    /// Builds the two-sided star graph used by biclique splits: each core
    /// vertex is connected to every vertex of the opposing side.
    pub fn bipartite(
        left: Vec<AnnotatedVertex>,
        right: Vec<AnnotatedVertex>,
        core_left: usize,
        core_right: usize,
    ) -> Self {
        let mut edges = Vec::new();
        for (j, v) in right.iter().enumerate() {
            edges.push(ConflictEdge {
                a: (0, core_left),
                b: (1, j),
                unsafe_interval: v.unsafe_interval,
            });
        }
        for (i, v) in left.iter().enumerate() {
            if i != core_left {
                edges.push(ConflictEdge {
                    a: (0, i),
                    b: (1, core_right),
                    unsafe_interval: v.unsafe_interval,
                });
            }
        }
        ConflictGraph { partitions: vec![left, right], edges }
    }
}

/// Output of the disjoint split rules: a positive child (landmark plus
/// negative constraints for the other agents) and the mirror negative for
/// the second child.
#[derive(Debug, Clone)]
pub struct DisjointSplit {
    pub positive: PositiveConstraint,
    pub negatives: Vec<NegativeConstraint>,
    pub mirror: NegativeConstraint,
}

/// How disjoint-biclique chooses the positively constrained agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbChooser {
    /// The agent with more conflicting moves (graph nodes) on its side is
    /// negatively constrained; the other gets the positive constraint.
    MostNodes,
    /// Force the positive constraint onto a specific agent (testing hook).
    PositiveOn(usize),
}

const SEED_SAMPLES: usize = 160;
const PAIR_SEED_SAMPLES: usize = 24;

fn interval_ends(iv: TimeInterval) -> (f64, f64) {
    let ins = (iv.len() * 1e-3).min(1e-6);
    (iv.lo + ins, iv.hi - ins)
}

fn probe_for(graph: &Graph, m: MoveId) -> Option<ProbeEdge> {
    if m.is_wait() {
        return None;
    }
    let dur = graph.edge_weight(m.from_vertex, m.to_vertex)?;
    Some(ProbeEdge {
        from: graph.position(m.from_vertex),
        to: graph.position(m.to_vertex),
        duration: dur,
    })
}

/// Maximal interval `[seed, hi)` of probe start times conflicting with
/// `other` started anywhere in `other_iv`, established by checking both ends
/// of `other_iv` (the conflicting-start set against a fixed motion is
/// contiguous, so endpoint containment implies full containment).
fn forall_window(
    probe: ProbeEdge,
    seed: f64,
    other: ProbeEdge,
    other_iv: TimeInterval,
    shape_sum: f64,
) -> Option<TimeInterval> {
    let (s0, s1) = interval_ends(other_iv);
    let mut acc = TimeInterval::new(0.0, f64::INFINITY);
    for s in [s0, s1.max(s0)] {
        let fixed = other.at(s);
        if !conflict_predicate(&probe.at(seed), &fixed, shape_sum) {
            return Some(TimeInterval::new(seed, seed));
        }
        let w = unsafe_interval(&fixed, probe, shape_sum, seed).ok()?;
        acc = acc.intersect(&w)?;
    }
    Some(acc)
}

/// Forward-anchored unsafe intervals `[t_i, hi_i)`, `[t_j, hi_j)` for two
/// conflicting non-wait motions: each is the maximal delay range over which
/// the motion keeps conflicting with the opposing motion at its current
/// start. Blocking these in the respective children clears the conflict
/// outright, so every split makes macroscopic progress.
fn anchored_windows(
    mi: &MotionSegment,
    mj: &MotionSegment,
    shape_sum: f64,
) -> Option<(TimeInterval, TimeInterval)> {
    let pi = ProbeEdge::of(mi);
    let pj = ProbeEdge::of(mj);
    let (ti, tj) = (mi.start_time, mj.start_time);
    let ui = unsafe_interval(mj, pi, shape_sum, ti).ok()?;
    let uj = unsafe_interval(mi, pj, shape_sum, tj).ok()?;
    Some((
        TimeInterval::new(ti, ui.hi.max(ti + EPS_TIME)),
        TimeInterval::new(tj, uj.hi.max(tj + EPS_TIME)),
    ))
}

/// Certified variant for biclique splits: the anchored windows are shrunk by
/// interval-endpoint checks until executing i anywhere in the first window
/// provably conflicts with executing j anywhere in the second (mutual
/// disjunction). None when certification collapses a window to less than
/// `min_width` — callers then fall back to a plain split.
fn certified_windows(
    mi: &MotionSegment,
    mj: &MotionSegment,
    shape_sum: f64,
    min_width: f64,
) -> Option<(TimeInterval, TimeInterval)> {
    let pi = ProbeEdge::of(mi);
    let pj = ProbeEdge::of(mj);
    let (ti, tj) = (mi.start_time, mj.start_time);
    let (full_i, full_j) = anchored_windows(mi, mj, shape_sum)?;
    let wi = forall_window(pi, ti, pj, full_j, shape_sum)?;
    let ii = TimeInterval::new(ti, full_i.hi.min(wi.hi));
    if ii.len() < min_width {
        return None;
    }
    // Shrinking i's side only relaxes what j's side must cover, so one
    // reverse pass suffices.
    let wj = forall_window(pj, tj, pi, ii, shape_sum)?;
    let ij = TimeInterval::new(tj, full_j.hi.min(wj.hi));
    if ij.len() < min_width {
        return None;
    }
    Some((ii, ij))
}

/// Split intervals for a moving core against a waiting core: the mover's
/// forward-anchored unsafe start range against the wait, and the waiter's
/// full presence window near the move. Like the classical continuous-time
/// treatment of vertex conflicts this pairing is not exactly disjunctive
/// (independent intervals cannot express the simultaneity of a wait), but
/// both sides clear the current conflict outright.
fn move_vs_wait(
    m_move: &MotionSegment,
    m_wait: &MotionSegment,
    shape_sum: f64,
) -> Option<(TimeInterval, TimeInterval)> {
    let p = blocked_presence_interval(m_move, m_wait.from, shape_sum)?;
    let ui = unsafe_interval(m_wait, ProbeEdge::of(m_move), shape_sum, m_move.start_time).ok()?;
    let block_move =
        TimeInterval::new(m_move.start_time, ui.hi.max(m_move.start_time + EPS_TIME));
    Some((block_move, p))
}

/// Mutually disjunctive pair of negative constraints for a conflicting core
/// pair. This is the plain split; the other rules derive their positive
/// windows and mirrors from it.
pub fn pair_constraints(
    core_i: &CoreMotion,
    core_j: &CoreMotion,
    shape_sum: f64,
) -> Option<(NegativeConstraint, NegativeConstraint)> {
    let (mi, mj) = (&core_i.motion, &core_j.motion);
    if !conflict_predicate(mi, mj, shape_sum) {
        return None;
    }
    let neg = |c: &CoreMotion, blocked: TimeInterval| NegativeConstraint {
        agent: c.agent,
        move_id: c.move_id,
        blocked,
    };
    match (core_i.move_id.is_wait(), core_j.move_id.is_wait()) {
        (false, false) => {
            // Prefer certified (mutually disjunctive, hence lossless)
            // windows; fall back to the full anchored windows when
            // certification collapses below the progress floor, trading a
            // sliver of optimality for guaranteed termination.
            let (ii, ij) = certified_windows(mi, mj, shape_sum, BC_MIN_WIDTH)
                .or_else(|| anchored_windows(mi, mj, shape_sum))?;
            Some((neg(core_i, ii), neg(core_j, ij)))
        }
        (false, true) => {
            let (bi, bj) = move_vs_wait(mi, mj, shape_sum)?;
            Some((neg(core_i, bi), neg(core_j, bj)))
        }
        (true, false) => {
            let (bj, bi) = move_vs_wait(mj, mi, shape_sum)?;
            Some((neg(core_i, bi), neg(core_j, bj)))
        }
        (true, true) => {
            // Two stationary discs: block each one's presence over the full
            // window near the other. Simultaneity cannot be captured by
            // independent interval constraints, so this pairing may
            // over-constrain; it only arises on graphs with vertices closer
            // than the shape sum.
            let pi = blocked_presence_interval(mj, mi.from, shape_sum)?;
            let pj = blocked_presence_interval(mi, mj.from, shape_sum)?;
            Some((neg(core_i, pi), neg(core_j, pj)))
        }
    }
}

/// All moves of `opponent` (including waits) that can conflict with the
/// fixed core motion, each annotated with its unsafe start-time interval
/// (presence window for waits). Candidate sources are restricted to
/// vertices whose distance to the core segment is within reach.
pub fn enumerate_conflicting_moves(
    core: &MotionSegment,
    opponent: usize,
    graph: &Graph,
    shape_sum: f64,
) -> Vec<AnnotatedVertex> {
    let bound = shape_sum + graph.max_edge_length() + 1e-6;
    let core_to = if core.duration.is_finite() { core.to } else { core.from };
    let core_end = if core.end_time().is_finite() {
        core.end_time()
    } else {
        core.start_time + shape_sum + 2.0
    };
    let mut out = Vec::new();
    for v in 0..graph.vertex_count() {
        let pos = graph.position(v);
        if point_to_segment_distance(pos, core.from, core_to) > bound {
            continue;
        }
        if let Some(p) = blocked_presence_interval(core, pos, shape_sum) {
            if !p.is_empty() {
                out.push(AnnotatedVertex {
                    agent: opponent,
                    move_id: MoveId::wait_at(v),
                    unsafe_interval: p,
                });
            }
        }
        for &(to, dur) in graph.neighbors(v) {
            let probe = ProbeEdge {
                from: pos,
                to: graph.position(to),
                duration: dur,
            };
            let lo = (core.start_time - dur).max(0.0);
            let hi = (core_end + dur).max(lo + dur);
            let seed = (0..=SEED_SAMPLES)
                .map(|k| lo + (hi - lo) * k as f64 / SEED_SAMPLES as f64)
                .find(|&s| conflict_predicate(&probe.at(s), core, shape_sum));
            if let Some(s) = seed {
                if let Ok(iv) = unsafe_interval(core, probe, shape_sum, s) {
                    out.push(AnnotatedVertex {
                        agent: opponent,
                        move_id: MoveId::new(v, to),
                        unsafe_interval: iv,
                    });
                }
            }
        }
    }
    out
}

/// Superset-rule biclique extraction: each side keeps the moves whose
/// annotated unsafe interval contains the core pair's interval on that side,
/// and every emitted constraint is blocked over exactly that core interval
/// (the intersection over supersets).
pub fn superset_biclique(
    core: (&AnnotatedVertex, &AnnotatedVertex),
    bcg: &ConflictGraph,
) -> (Vec<NegativeConstraint>, Vec<NegativeConstraint>) {
    let side = |part: &[AnnotatedVertex], core_av: &AnnotatedVertex| {
        let mut set: Vec<NegativeConstraint> = Vec::new();
        for v in part {
            if v.agent != core_av.agent {
                continue;
            }
            let superset = v.unsafe_interval.lo <= core_av.unsafe_interval.lo + 1e-9
                && v.unsafe_interval.hi >= core_av.unsafe_interval.hi - 1e-9;
            if superset && !set.iter().any(|c| c.move_id == v.move_id) {
                set.push(NegativeConstraint {
                    agent: v.agent,
                    move_id: v.move_id,
                    blocked: core_av.unsafe_interval,
                });
            }
        }
        set
    };
    (side(&bcg.partitions[0], core.0), side(&bcg.partitions[1], core.1))
}

/// True when executing `a` anywhere in `iv_a` conflicts with executing `b`
/// anywhere in `iv_b` (interval-endpoint check; seeds located by sampling).
fn mutually_disjunctive(
    graph: &Graph,
    a: MoveId,
    iv_a: TimeInterval,
    b: MoveId,
    iv_b: TimeInterval,
    shape_sum: f64,
) -> bool {
    let (Some(pa), Some(pb)) = (probe_for(graph, a), probe_for(graph, b)) else {
        return false;
    };
    let (s0, s1) = interval_ends(iv_b);
    for s in [s0, s1.max(s0)] {
        let fixed = pb.at(s);
        let seed = (0..=PAIR_SEED_SAMPLES)
            .map(|k| iv_a.lo + iv_a.len().min(1e6) * k as f64 / PAIR_SEED_SAMPLES as f64)
            .find(|&t| conflict_predicate(&pa.at(t), &fixed, shape_sum));
        let Some(seed) = seed else { return false };
        let Ok(w) = unsafe_interval(&fixed, pa, shape_sum, seed) else {
            return false;
        };
        if w.lo > iv_a.lo + 1e-9 || w.hi < iv_a.hi - 1e-9 {
            return false;
        }
    }
    true
}

/// Minimum certified window width for a biclique split; below this the
/// caller falls back to a plain split so search progress stays macroscopic.
const BC_MIN_WIDTH: f64 = 1e-3;

/// Interval-superset biclique split: multi-constraint sets for both
/// children, pruned so that every cross pair is provably mutually
/// disjunctive. None when a core is a wait or when certification collapses
/// the core windows; callers then fall back to a plain split.
pub fn bc_split(
    core_i: &CoreMotion,
    core_j: &CoreMotion,
    graph: &Graph,
    shape_sum: f64,
) -> Option<(Vec<NegativeConstraint>, Vec<NegativeConstraint>)> {
    if core_i.move_id.is_wait() || core_j.move_id.is_wait() {
        return None;
    }
    let (ii, ij) = certified_windows(&core_i.motion, &core_j.motion, shape_sum, BC_MIN_WIDTH)?;
    let mut left = enumerate_conflicting_moves(&core_j.motion, core_i.agent, graph, shape_sum);
    let mut right = enumerate_conflicting_moves(&core_i.motion, core_j.agent, graph, shape_sum);
    ensure_core(&mut left, core_i, &core_j.motion, graph, shape_sum);
    ensure_core(&mut right, core_j, &core_i.motion, graph, shape_sum);
    let core_left = left.iter().position(|v| v.move_id == core_i.move_id).unwrap();
    let core_right = right.iter().position(|v| v.move_id == core_j.move_id).unwrap();
    let bcg = ConflictGraph::bipartite(left, right, core_left, core_right);
    let core_av_i = AnnotatedVertex {
        agent: core_i.agent,
        move_id: core_i.move_id,
        unsafe_interval: ii,
    };
    let core_av_j = AnnotatedVertex {
        agent: core_j.agent,
        move_id: core_j.move_id,
        unsafe_interval: ij,
    };
    let (raw_i, raw_j) = superset_biclique((&core_av_i, &core_av_j), &bcg);
    // Keep only cross pairs whose mutual disjunction is certified; waits are
    // dropped because interval constraints cannot capture their
    // simultaneity requirement exactly.
    let keep_j: Vec<NegativeConstraint> = raw_j
        .into_iter()
        .filter(|c| {
            c.move_id == core_j.move_id
                || (!c.move_id.is_wait()
                    && mutually_disjunctive(graph, core_i.move_id, ii, c.move_id, ij, shape_sum))
        })
        .collect();
    let keep_i: Vec<NegativeConstraint> = raw_i
        .into_iter()
        .filter(|c| {
            c.move_id == core_i.move_id
                || (!c.move_id.is_wait()
                    && keep_j.iter().all(|u| {
                        mutually_disjunctive(graph, c.move_id, ii, u.move_id, ij, shape_sum)
                    }))
        })
        .collect();
    Some((keep_i, keep_j))
}

fn ensure_core(
    side: &mut Vec<AnnotatedVertex>,
    core: &CoreMotion,
    fixed: &MotionSegment,
    graph: &Graph,
    shape_sum: f64,
) {
    if side.iter().any(|v| v.move_id == core.move_id) {
        return;
    }
    if let Some(p) = probe_for(graph, core.move_id) {
        if let Ok(iv) = unsafe_interval(fixed, p, shape_sum, core.motion.start_time) {
            side.push(AnnotatedVertex {
                agent: core.agent,
                move_id: core.move_id,
                unsafe_interval: iv,
            });
        }
    }
}

/// Builds a disjoint split from a positive core motion, its opposing core
/// and an enumerated star of the other agents' conflicting moves.
///
/// Soundness of the positive child: the positive constraint only pins the
/// core's start to somewhere in its window, so every negative imposed
/// alongside it must conflict with the core started *anywhere* in the
/// window, not just at the current placement.
///
/// - The opposing core (move×move) qualifies with its full anchored
///   interval: both windows are forward unsafe ranges measured against each
///   other, and the conflicting relative delays form one contiguous band, so
///   any start in one window conflicts with any start in the other.
/// - Star members are annotated against the core's current placement only.
///   Delaying the core by `a` shifts a member's conflicting range by exactly
///   `a` (moves: conflict depends on the relative delay; waits: presence
///   windows translate with the motion), so advancing each member's lower
///   end by the full window width keeps exactly the starts that conflict
///   with every placement. Members whose interval vanishes are dropped.
/// - A waiting opposing core would need the same advance, and when the
///   shifted window no longer covers the waiter's current dwell the split
///   stops clearing the conflict it was made for. Disjoint splitting
///   declines move×wait cores instead; the caller falls back to the plain
///   pair split.
fn disjoint_from_star(
    core_pos: &CoreMotion,
    core_opp: &CoreMotion,
    star: &[AnnotatedVertex],
    shape_sum: f64,
) -> Option<DisjointSplit> {
    if core_opp.move_id.is_wait() {
        return None;
    }
    let (pos_block, opp_block) = pair_constraints(core_pos, core_opp, shape_sum)?;
    let positive = PositiveConstraint {
        agent: core_pos.agent,
        move_id: core_pos.move_id,
        window: pos_block.blocked,
    };
    let slack = pos_block.blocked.len();
    let mut negatives = vec![opp_block];
    for av in star {
        if av.agent == core_pos.agent || av.unsafe_interval.is_empty() {
            continue;
        }
        let lo = av.unsafe_interval.lo + slack;
        if lo + 1e-6 >= av.unsafe_interval.hi {
            continue;
        }
        let nc = NegativeConstraint {
            agent: av.agent,
            move_id: av.move_id,
            blocked: TimeInterval::new(lo, av.unsafe_interval.hi),
        };
        let duplicate =
            negatives.iter().any(|c| c.agent == nc.agent && c.move_id == nc.move_id);
        if !duplicate {
            negatives.push(nc);
        }
    }
    Some(DisjointSplit { positive, negatives, mirror: pos_block })
}

/// Disjoint split (DS): one positive constraint plus a single negative for
/// the opposing core, mirror on the second child. The positive core must be
/// a genuine move.
pub fn ds_split(
    core_pos: &CoreMotion,
    core_opp: &CoreMotion,
    shape_sum: f64,
) -> Option<DisjointSplit> {
    if core_pos.move_id.is_wait() {
        return None;
    }
    disjoint_from_star(core_pos, core_opp, &[], shape_sum)
}

/// Disjoint split with biclique constraints (DB): the negatively constrained
/// agent's whole conflicting star is blocked in the positive child.
pub fn db_split(
    core_i: &CoreMotion,
    core_j: &CoreMotion,
    graph: &Graph,
    shape_sum: f64,
    chooser: DbChooser,
) -> Option<DisjointSplit> {
    let left = enumerate_conflicting_moves(&core_i.motion, core_j.agent, graph, shape_sum);
    let right = enumerate_conflicting_moves(&core_j.motion, core_i.agent, graph, shape_sum);
    let positive_on_i = match chooser {
        DbChooser::PositiveOn(a) => a == core_i.agent,
        DbChooser::MostNodes => {
            // The side with more nodes is negatively constrained; `left`
            // holds agent j's conflicting moves.
            match left.len().cmp(&right.len()) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => core_i.agent < core_j.agent,
            }
        }
    };
    let (pos, opp, star) = if positive_on_i {
        (core_i, core_j, &left)
    } else {
        (core_j, core_i, &right)
    };
    let (pos, opp, star) = if pos.move_id.is_wait() {
        if opp.move_id.is_wait() {
            return None;
        }
        if positive_on_i { (core_j, core_i, &right) } else { (core_i, core_j, &left) }
    } else {
        (pos, opp, star)
    };
    disjoint_from_star(pos, opp, star, shape_sum)
}

/// Disjoint split with k-partite cliques (DK): like DB, but the negative
/// star spans every agent that the conflict-count table reports as
/// conflicting with the positive core motion.
pub fn dk_split(
    core_i: &CoreMotion,
    core_j: &CoreMotion,
    cct: &ConflictCountTable,
    graph: &Graph,
    shape_sum: f64,
) -> Option<DisjointSplit> {
    let kcg = |core: &CoreMotion| -> Vec<AnnotatedVertex> {
        let mut agents = cct.agents_conflicting_with(core.agent, core.motion_index);
        agents.sort_unstable();
        agents.dedup();
        let mut verts = Vec::new();
        for k in agents {
            if k != core.agent {
                verts.extend(enumerate_conflicting_moves(&core.motion, k, graph, shape_sum));
            }
        }
        verts
    };
    let kcg_i = kcg(core_i);
    let kcg_j = kcg(core_j);
    let positive_on_i = match kcg_i.len().cmp(&kcg_j.len()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => core_i.agent < core_j.agent,
    };
    let (pos, opp, star) = if positive_on_i {
        (core_i, core_j, &kcg_i)
    } else {
        (core_j, core_i, &kcg_j)
    };
    let (pos, opp, star) = if pos.move_id.is_wait() {
        if opp.move_id.is_wait() {
            return None;
        }
        if positive_on_i { (core_j, core_i, &kcg_j) } else { (core_i, core_j, &kcg_i) }
    } else {
        (pos, opp, star)
    };
    disjoint_from_star(pos, opp, star, shape_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{conflict_interval, Point2, DEFAULT_RADIUS};
    use crate::sipp::{TimedMove, TimedPath};
    use crate::world::Graph;

    const SHAPE: f64 = 2.0 * DEFAULT_RADIUS;

    fn core(agent: usize, m: MoveId, idx: usize, motion: MotionSegment) -> CoreMotion {
        CoreMotion { agent, move_id: m, motion_index: idx, motion }
    }

    fn seg(g: &Graph, u: usize, v: usize, start: f64) -> MotionSegment {
        MotionSegment::new(g.position(u), g.position(v), start, g.position(u).dist(g.position(v)))
            .unwrap()
    }

    /// Horizontal edge 0->1 with a crossing vertical edge 2->3 and a spur
    /// 2->4 pointing away from the crossing.
    fn crossing_graph() -> Graph {
        let mut g = Graph::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, -1.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.5, -2.0),
        ]);
        g.add_geometric_edge(0, 1);
        g.add_geometric_edge(2, 3);
        g.add_geometric_edge(2, 4);
        g
    }

    #[test]
    fn enumerate_far_opponent_is_empty() {
        let mut g = Graph::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 10.0),
            Point2::new(1.0, 10.0),
        ]);
        g.add_geometric_edge(0, 1);
        g.add_geometric_edge(2, 3);
        let core_m = seg(&g, 0, 1, 0.0);
        // Only moves near the core can appear; the far lane contributes none.
        let verts = enumerate_conflicting_moves(&core_m, 1, &g, SHAPE);
        assert!(verts.iter().all(|v| ![2, 3].contains(&v.move_id.from_vertex)));
    }

    #[test]
    fn enumerate_head_on_opponent_is_included() {
        let mut g = Graph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        g.add_geometric_edge(0, 1);
        let core_m = seg(&g, 0, 1, 0.0);
        let verts = enumerate_conflicting_moves(&core_m, 1, &g, SHAPE);
        let head_on = verts.iter().find(|v| v.move_id == MoveId::new(1, 0)).unwrap();
        assert!(!head_on.unsafe_interval.is_empty());
        // The seed start (simultaneous) lies inside the interval.
        assert!(head_on.unsafe_interval.lo <= 0.0 && head_on.unsafe_interval.hi > 0.0);
    }

    #[test]
    fn superset_rule_matches_interval_containment() {
        // Side intervals [0,0.58) for the core partner and [0,0.71) for a
        // second action: the superset is kept and blocked over the core's
        // [0,0.58); with the cores swapped the narrower action is excluded.
        let core_x = AnnotatedVertex {
            agent: 0,
            move_id: MoveId::new(2, 20),
            unsafe_interval: TimeInterval::new(0.0, 0.58),
        };
        let act4 = AnnotatedVertex {
            agent: 1,
            move_id: MoveId::new(4, 40),
            unsafe_interval: TimeInterval::new(0.0, 0.58),
        };
        let act5 = AnnotatedVertex {
            agent: 1,
            move_id: MoveId::new(5, 50),
            unsafe_interval: TimeInterval::new(0.0, 0.71),
        };
        let bcg = ConflictGraph::bipartite(vec![core_x], vec![act4, act5], 0, 0);
        let (ci, cj) = superset_biclique((&core_x, &act4), &bcg);
        assert_eq!(ci.len(), 1);
        assert!((ci[0].blocked.hi - 0.58).abs() < 1e-12);
        let moves: Vec<MoveId> = cj.iter().map(|c| c.move_id).collect();
        assert!(moves.contains(&MoveId::new(4, 40)));
        assert!(moves.contains(&MoveId::new(5, 50)));
        assert!(cj.iter().all(|c| (c.blocked.hi - 0.58).abs() < 1e-12));

        // Core on the wider action: the narrower one cannot be included.
        let core_y = AnnotatedVertex {
            agent: 0,
            move_id: MoveId::new(2, 20),
            unsafe_interval: TimeInterval::new(0.0, 0.71),
        };
        let bcg2 = ConflictGraph::bipartite(vec![core_y], vec![act4, act5], 0, 1);
        let (_, cj2) = superset_biclique((&core_y, &act5), &bcg2);
        let moves2: Vec<MoveId> = cj2.iter().map(|c| c.move_id).collect();
        assert!(!moves2.contains(&MoveId::new(4, 40)));
        assert!(moves2.contains(&MoveId::new(5, 50)));
    }

    #[test]
    fn pair_constraints_are_anchored_and_disjunctive() {
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let (a, b) = pair_constraints(&ci, &cj, SHAPE).unwrap();
        assert_eq!(a.blocked.lo, 0.0);
        assert_eq!(b.blocked.lo, 0.0);
        assert!(a.blocked.hi > 0.0 && b.blocked.hi > 0.0);
        // Exhaustive cross-sampling: every pair of starts inside the blocks
        // conflicts.
        let pa = ProbeEdge::of(&ci.motion);
        let pb = ProbeEdge::of(&cj.motion);
        for p in 0..20 {
            for q in 0..20 {
                let t = a.blocked.lo + a.blocked.len() * (p as f64 + 0.5) / 20.0;
                let s = b.blocked.lo + b.blocked.len() * (q as f64 + 0.5) / 20.0;
                assert!(
                    conflict_predicate(&pa.at(t), &pb.at(s), SHAPE),
                    "starts {t} and {s} do not conflict"
                );
            }
        }
    }

    #[test]
    fn ds_split_emits_one_negative_and_mirror() {
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let split = ds_split(&ci, &cj, SHAPE).unwrap();
        assert_eq!(split.positive.agent, 0);
        assert_eq!(split.negatives.len(), 1);
        assert_eq!(split.negatives[0].agent, 1);
        assert_eq!(split.mirror.agent, 0);
        assert_eq!(split.mirror.move_id, split.positive.move_id);
        assert_eq!(split.mirror.blocked, split.positive.window);
        // The conflict's own start times are covered.
        assert!(split.positive.window.contains_start(0.0));
        assert!(split.negatives[0].blocked.contains_start(0.0));
    }

    #[test]
    fn db_isolated_core_reduces_to_ds() {
        // Only the two core moves exist near each other, so the star holds
        // exactly the opposing core (plus any wait windows, absent here
        // because the vertices are more than a shape sum apart).
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let db = db_split(&ci, &cj, &g, SHAPE, DbChooser::PositiveOn(0)).unwrap();
        let ds = ds_split(&ci, &cj, SHAPE).unwrap();
        assert_eq!(db.positive, ds.positive);
        assert_eq!(db.mirror, ds.mirror);
        // The db star may rediscover the core with a wider two-sided
        // interval; every extra entry must still target agent 1's moves
        // that genuinely conflict.
        assert!(db.negatives.iter().all(|c| c.agent == 1));
        assert!(db.negatives.contains(&ds.negatives[0]));
    }

    #[test]
    fn db_star_negatives_hold_for_every_window_placement() {
        // Opponent j's crossing options through the core's corridor are
        // blocked, but only over starts that conflict with the core placed
        // anywhere in the positive window (the positive constraint does not
        // pin the core to its current start). The reverse crossing 3->2 may
        // drop out entirely when its conflicting range is narrower than the
        // window.
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let db = db_split(&ci, &cj, &g, SHAPE, DbChooser::PositiveOn(0)).unwrap();
        let blocked: Vec<MoveId> = db.negatives.iter().map(|c| c.move_id).collect();
        assert!(blocked.contains(&MoveId::new(2, 3)));
        // The spur away from the corridor stays unconstrained.
        assert!(!blocked.contains(&MoveId::new(2, 4)));
        // Soundness: interior starts of every emitted negative conflict with
        // the core placed at either end of the positive window.
        let w = db.positive.window;
        let pc = ProbeEdge::of(&ci.motion);
        for placement in [w.lo, (w.hi - 1e-6).max(w.lo)] {
            let core_motion = pc.at(placement);
            for nc in &db.negatives {
                let iv = nc.blocked;
                for k in 0..10 {
                    let s = iv.lo + iv.len().min(1e3) * (k as f64 + 0.5) / 10.0;
                    if nc.move_id.is_wait() {
                        continue;
                    }
                    let pb = probe_for(&g, nc.move_id).unwrap();
                    assert!(
                        conflict_predicate(&pb.at(s), &core_motion, SHAPE),
                        "negative {nc:?} unjustified at start {s} for core placed at {placement}"
                    );
                }
            }
        }
    }

    #[test]
    fn disjoint_negatives_conflict_with_positive_motion() {
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let db = db_split(&ci, &cj, &g, SHAPE, DbChooser::MostNodes).unwrap();
        let pos_core = if db.positive.agent == 0 { &ci } else { &cj };
        for nc in &db.negatives {
            let iv = nc.blocked;
            for k in 0..10 {
                let s = iv.lo + iv.len().min(1e3) * (k as f64 + 0.5) / 10.0;
                let conflicting = if nc.move_id.is_wait() {
                    let at = g.position(nc.move_id.from_vertex);
                    blocked_presence_interval(&pos_core.motion, at, SHAPE)
                        .is_some_and(|p| p.contains_start(s) || (s >= p.lo && s <= p.hi))
                } else {
                    let pb = probe_for(&g, nc.move_id).unwrap();
                    conflict_predicate(&pb.at(s), &pos_core.motion, SHAPE)
                };
                assert!(conflicting, "negative {nc:?} unjustified at start {s}");
            }
        }
    }

    #[test]
    fn dk_with_two_agents_matches_db() {
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let paths = vec![
            TimedPath::from_moves(0, vec![TimedMove { from_vertex: 0, to_vertex: 1, start_time: 0.0, duration: 1.0 }]),
            TimedPath::from_moves(2, vec![TimedMove { from_vertex: 2, to_vertex: 3, start_time: 0.0, duration: 2.0 }]),
        ];
        let cct = ConflictCountTable::rebuild(&paths, &g, SHAPE);
        let dk = dk_split(&ci, &cj, &cct, &g, SHAPE).unwrap();
        let db = db_split(&ci, &cj, &g, SHAPE, DbChooser::MostNodes).unwrap();
        assert_eq!(dk.positive, db.positive);
        assert_eq!(dk.mirror, db.mirror);
        assert_eq!(dk.negatives, db.negatives);
    }

    #[test]
    fn dk_includes_third_party_crossing_moves() {
        // Three agents: i on the horizontal core, j crossing vertically and
        // a third agent k whose current path also crosses the core.
        let mut g = Graph::new(vec![
            Point2::new(0.0, 0.0),  // 0 core from
            Point2::new(1.0, 0.0),  // 1 core to
            Point2::new(0.5, -1.0), // 2 j from
            Point2::new(0.5, 1.0),  // 3 j to
            Point2::new(0.8, 1.0),  // 4 k from
            Point2::new(0.8, -1.0), // 5 k to
        ]);
        g.add_geometric_edge(0, 1);
        g.add_geometric_edge(2, 3);
        g.add_geometric_edge(4, 5);
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let paths = vec![
            TimedPath::from_moves(0, vec![TimedMove { from_vertex: 0, to_vertex: 1, start_time: 0.0, duration: 1.0 }]),
            TimedPath::from_moves(2, vec![TimedMove { from_vertex: 2, to_vertex: 3, start_time: 0.0, duration: 2.0 }]),
            TimedPath::from_moves(4, vec![TimedMove { from_vertex: 4, to_vertex: 5, start_time: 0.0, duration: 2.0 }]),
        ];
        let cct = ConflictCountTable::rebuild(&paths, &g, SHAPE);
        let dk = dk_split(&ci, &cj, &cct, &g, SHAPE).unwrap();
        if dk.positive.agent == 0 {
            let agents: Vec<usize> = dk.negatives.iter().map(|c| c.agent).collect();
            assert!(agents.contains(&2), "third agent's crossing move missing: {agents:?}");
            assert!(dk
                .negatives
                .iter()
                .any(|c| c.agent == 2 && c.move_id == MoveId::new(4, 5)));
        }
    }

    #[test]
    fn bc_split_includes_cores_and_is_cross_disjunctive() {
        let g = crossing_graph();
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::new(2, 3), 0, seg(&g, 2, 3, 0.0));
        let (set_i, set_j) = bc_split(&ci, &cj, &g, SHAPE).unwrap();
        assert!(set_i.iter().any(|c| c.move_id == ci.move_id));
        assert!(set_j.iter().any(|c| c.move_id == cj.move_id));
        for a in &set_i {
            for b in &set_j {
                let pa = probe_for(&g, a.move_id).unwrap();
                let pb = probe_for(&g, b.move_id).unwrap();
                for p in 0..10 {
                    for q in 0..10 {
                        let t = a.blocked.lo + a.blocked.len() * (p as f64 + 0.5) / 10.0;
                        let s = b.blocked.lo + b.blocked.len() * (q as f64 + 0.5) / 10.0;
                        assert!(
                            conflict_predicate(&pa.at(t), &pb.at(s), SHAPE),
                            "cross pair {:?}/{:?} fails at ({t},{s})",
                            a.move_id,
                            b.move_id
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn move_vs_rest_split_produces_progressing_blocks() {
        // Agent 1 rests forever at vertex 1, directly on agent 0's route.
        let mut g = Graph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        g.add_geometric_edge(0, 1);
        let rest = MotionSegment {
            from: g.position(1),
            to: g.position(1),
            start_time: 0.0,
            duration: f64::INFINITY,
        };
        let ci = core(0, MoveId::new(0, 1), 0, seg(&g, 0, 1, 0.0));
        let cj = core(1, MoveId::wait_at(1), 0, rest);
        let (a, b) = pair_constraints(&ci, &cj, SHAPE).unwrap();
        assert!(!a.move_id.is_wait());
        assert!(b.move_id.is_wait());
        assert!(a.blocked.contains_start(0.0));
        assert!(!a.blocked.is_empty() && !b.blocked.is_empty());
        // The rest conflicts with the presence block (progress in child 2).
        let o = conflict_interval(&ci.motion, &cj.motion, SHAPE).unwrap();
        assert!(b.blocked.lo < o.hi);
    }
}

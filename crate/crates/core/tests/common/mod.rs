//! Shared test utilities: an exhaustive single-agent planner used as an
//! oracle against the safe-interval planner, plus deterministic random
//! instance generators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use ccbs::constraints::{MoveId, NegativeConstraint, PositiveConstraint};
use ccbs::geometry::{Point2, TimeInterval};
use ccbs::sipp::{TimedMove, TimedPath};
use ccbs::world::Graph;
use ccbs::Instance;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random connected geometric graph: `n` points with pairwise separation at
/// least `min_sep`, a nearest-neighbor spanning tree, plus up to
/// `extra_edges` additional random edges.
pub fn random_geometric_graph(
    rng: &mut ChaCha12Rng,
    n: usize,
    extra_edges: usize,
    min_sep: f64,
    side: f64,
) -> Graph {
    let mut points: Vec<Point2> = Vec::new();
    while points.len() < n {
        let p = Point2::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
        if points.iter().all(|q| q.dist(p) >= min_sep) {
            points.push(p);
        }
    }
    let mut g = Graph::new(points.clone());
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        let u = (0..v)
            .min_by(|&a, &b| points[a].dist(points[v]).total_cmp(&points[b].dist(points[v])))
            .unwrap();
        edges.push((u.min(v), u.max(v)));
    }
    for _ in 0..extra_edges {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let (a, b) = (u.min(v), u.max(v));
        if a != b && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    for (u, v) in edges {
        g.add_geometric_edge(u, v);
    }
    g
}

/// Distinct start/goal assignments whose start positions (and goal
/// positions) are pairwise farther apart than `min_dist`.
pub fn random_endpoints(
    rng: &mut ChaCha12Rng,
    graph: &Graph,
    agents: usize,
    min_dist: f64,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = graph.vertex_count();
    let mut starts: Vec<usize> = Vec::new();
    let mut goals: Vec<usize> = Vec::new();
    let far = |chosen: &[usize], v: usize| {
        chosen.iter().all(|&c| graph.position(c).dist(graph.position(v)) > min_dist)
    };
    for _ in 0..200 * agents {
        if starts.len() < agents {
            let v = rng.gen_range(0..n);
            if !starts.contains(&v) && far(&starts, v) {
                starts.push(v);
            }
        } else if goals.len() < agents {
            let v = rng.gen_range(0..n);
            if v != starts[goals.len()] && !goals.contains(&v) && far(&goals, v) {
                goals.push(v);
            }
        } else {
            return Some((starts, goals));
        }
    }
    None
}

pub fn random_instance(
    rng: &mut ChaCha12Rng,
    graph: &Graph,
    agents: usize,
    min_dist: f64,
    radius: f64,
) -> Option<Instance> {
    let (starts, goals) = random_endpoints(rng, graph, agents, min_dist)?;
    Instance::new(graph.clone(), starts, goals, radius).ok()
}

// ---------------------------------------------------------------------------
// Exhaustive single-agent oracle.
// ---------------------------------------------------------------------------

/// Minimum cost of a single-agent path from `start` to `goal` honoring the
/// given constraints, by exhaustive search over hop-bounded routes and
/// constraint-endpoint departure events. None when no such path exists
/// within the bounds.
pub fn single_agent_oracle(
    graph: &Graph,
    agent: usize,
    start: usize,
    goal: usize,
    negatives: &[NegativeConstraint],
    positives: &[PositiveConstraint],
) -> Option<f64> {
    let negatives: Vec<NegativeConstraint> =
        negatives.iter().filter(|nc| nc.agent == agent).copied().collect();
    let mut positives: Vec<PositiveConstraint> =
        positives.iter().filter(|pc| pc.agent == agent).copied().collect();
    positives.sort_by(|a, b| a.window.lo.total_cmp(&b.window.lo));

    let shortest = shortest_hops(graph, start, goal)?;
    let max_hops = (shortest + 2 + 3 * positives.len()).min(graph.vertex_count() + 4);
    let mut routes = Vec::new();
    let mut walk = vec![start];
    collect_walks(graph, goal, max_hops, &mut walk, &mut routes);
    routes.retain(|r| landmarks_on_route(r, &positives));
    routes.sort_by(|a, b| {
        route_len(graph, a).total_cmp(&route_len(graph, b)).then_with(|| a.cmp(b))
    });

    // Candidate departure events: every constraint endpoint.
    let mut events: Vec<f64> = Vec::new();
    for nc in &negatives {
        events.extend([nc.blocked.lo, nc.blocked.hi]);
    }
    for pc in &positives {
        events.extend([pc.window.lo, pc.window.hi]);
    }
    events.retain(|e| e.is_finite() && *e >= 0.0);
    events.sort_by(f64::total_cmp);
    events.dedup();

    let mut best = f64::INFINITY;
    for route in &routes {
        if route_len(graph, route) >= best {
            break;
        }
        let mut moves = Vec::new();
        dfs(
            graph, route, 0, 0.0, &events, &negatives, &positives, start, &mut moves, &mut best,
        );
    }
    best.is_finite().then_some(best)
}

fn shortest_hops(graph: &Graph, start: usize, goal: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut q = std::collections::VecDeque::new();
    dist[start] = 0;
    q.push_back(start);
    while let Some(u) = q.pop_front() {
        if u == goal {
            return Some(dist[u]);
        }
        for &(v, _) in graph.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    None
}

fn collect_walks(
    graph: &Graph,
    goal: usize,
    hops_left: usize,
    walk: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let here = *walk.last().unwrap();
    if here == goal {
        out.push(walk.clone());
    }
    if hops_left == 0 {
        return;
    }
    let mut next: Vec<usize> = graph.neighbors(here).iter().map(|&(v, _)| v).collect();
    next.sort_unstable();
    for v in next {
        walk.push(v);
        collect_walks(graph, goal, hops_left - 1, walk, out);
        walk.pop();
    }
}

fn route_len(graph: &Graph, route: &[usize]) -> f64 {
    route.windows(2).map(|w| graph.edge_weight(w[0], w[1]).unwrap()).sum()
}

/// The landmark moves must appear along the route as edges, in window order.
fn landmarks_on_route(route: &[usize], positives: &[PositiveConstraint]) -> bool {
    let mut k = 0;
    for w in route.windows(2) {
        if k < positives.len()
            && positives[k].move_id == MoveId::new(w[0], w[1])
        {
            k += 1;
        }
    }
    k == positives.len()
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    graph: &Graph,
    route: &[usize],
    leg: usize,
    now: f64,
    events: &[f64],
    negatives: &[NegativeConstraint],
    positives: &[PositiveConstraint],
    start: usize,
    moves: &mut Vec<TimedMove>,
    best: &mut f64,
) {
    if now + remaining_len(graph, route, leg) >= *best {
        return;
    }
    let v = route[leg];
    if leg + 1 == route.len() {
        let path = TimedPath::from_moves(start, moves.clone());
        if schedule_ok(&path, negatives, positives, graph) && now < *best {
            *best = now;
        }
        return;
    }
    let w = route[leg + 1];
    let dur = graph.edge_weight(v, w).unwrap();
    let mut cands = vec![now];
    for &e in events {
        cands.push(e.max(now));
        cands.push((e - dur).max(now));
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    for t in cands {
        if wait_blocked(v, now, t, negatives) {
            // Longer waits at this vertex only get worse.
            break;
        }
        if negatives
            .iter()
            .any(|nc| nc.move_id == MoveId::new(v, w) && nc.blocked.contains_start(t))
        {
            continue;
        }
        let mut pushed = 0;
        if t > now + 1e-12 {
            moves.push(TimedMove { from_vertex: v, to_vertex: v, start_time: now, duration: t - now });
            pushed += 1;
        }
        moves.push(TimedMove { from_vertex: v, to_vertex: w, start_time: t, duration: dur });
        pushed += 1;
        dfs(graph, route, leg + 1, t + dur, events, negatives, positives, start, moves, best);
        for _ in 0..pushed {
            moves.pop();
        }
    }
}

fn remaining_len(graph: &Graph, route: &[usize], leg: usize) -> f64 {
    route[leg..].windows(2).map(|w| graph.edge_weight(w[0], w[1]).unwrap()).sum()
}

/// Presence at `v` over `[from, to]` hits a blocked wait window. Blocked
/// windows are occupancy bans, so even the zero-length presence of a
/// pass-through (`to <= from`) is checked against interior instants.
fn wait_blocked(v: usize, from: f64, to: f64, negatives: &[NegativeConstraint]) -> bool {
    let presence = TimeInterval::new(from, to.max(from));
    negatives.iter().any(|nc| {
        nc.move_id == MoveId::wait_at(v)
            && (presence.overlaps_open(&nc.blocked)
                || (nc.blocked.lo < from && from < nc.blocked.hi))
    })
}

/// Full independent re-check of a finished schedule against the constraint
/// set, including the infinite rest at the goal.
fn schedule_ok(
    path: &TimedPath,
    negatives: &[NegativeConstraint],
    positives: &[PositiveConstraint],
    _graph: &Graph,
) -> bool {
    for m in &path.moves {
        let id = MoveId::new(m.from_vertex, m.to_vertex);
        if id.is_wait() {
            if wait_blocked(m.from_vertex, m.start_time, m.end_time(), negatives) {
                return false;
            }
        } else if negatives
            .iter()
            .any(|nc| nc.move_id == id && nc.blocked.contains_start(m.start_time))
            || wait_blocked(m.from_vertex, m.start_time, m.start_time, negatives)
        {
            return false;
        }
    }
    let goal = path.end_vertex();
    let arrival = path.cost();
    if negatives.iter().any(|nc| {
        nc.move_id == MoveId::wait_at(goal)
            && TimeInterval::new(arrival, f64::INFINITY).overlaps_open(&nc.blocked)
    }) {
        return false;
    }
    let mut k = 0;
    for m in &path.moves {
        if k < positives.len()
            && positives[k].move_id == MoveId::new(m.from_vertex, m.to_vertex)
            && positives[k].window.contains_start(m.start_time)
        {
            k += 1;
        }
    }
    k == positives.len()
}

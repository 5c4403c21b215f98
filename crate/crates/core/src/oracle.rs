//! Brute-force reference solver for very small instances.
//!
//! Independent of the main search: enumerates hop-bounded routes per agent,
//! every agent priority order, and for each ordering schedules agents
//! sequentially against the already-fixed motions of earlier agents. Each
//! leg branches over candidate departure times: the earliest feasible one
//! plus the upper endpoints of unsafe start-time windows (found by sampling
//! and refined by bisection on the conflict predicate). The minimum
//! sum-of-costs over all of it is the best sequential schedule up to the
//! sampling and bisection resolution.
//!
//! Two caveats bound what the result means. Routes longer than the per-agent
//! hop bound are never considered, so "no solution" is relative to that
//! bound. And because every schedule is built by fixing agents one priority
//! order at a time, circular coordination — two agents each yielding to the
//! other at different moments — is inexpressible, so the returned cost is an
//! upper bound on the true optimum that is tight on most small instances but
//! not all.
//!
//! Deliberately refuses anything beyond toy size; the point is a trustworthy
//! cross-check, not performance.

use crate::geometry::{
    blocked_presence_interval, conflict_predicate, unsafe_interval, MotionSegment, ProbeEdge,
    EPS_TIME,
};
use crate::world::{goal_distances, Graph, Instance};

pub const MAX_AGENTS: usize = 3;
pub const MAX_VERTICES: usize = 8;
pub const MAX_EDGES: usize = 12;

/// Routes kept per agent (shortest first) and samples used per obstacle when
/// hunting for unsafe departure windows.
const MAX_ROUTES: usize = 400;
const SAMPLES_PER_OBSTACLE: usize = 64;
const MAX_PUSH_STEPS: usize = 60;
const LEG_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance exceeds oracle bounds ({agents} agents, {vertices} vertices, {edges} edges; limits are {MAX_AGENTS}/{MAX_VERTICES}/{MAX_EDGES})")]
    TooLarge { agents: usize, vertices: usize, edges: usize },
    #[error("oracle search budget exhausted")]
    BudgetExhausted,
}

/// All walks from `start` to `goal` with at most `shortest hops + 2` edges,
/// sorted by total length then lexicographically; capped at `MAX_ROUTES`.
fn enumerate_routes(graph: &Graph, start: usize, goal: usize) -> Vec<Vec<usize>> {
    let hops = shortest_hops(graph, start, goal);
    let Some(hops) = hops else { return Vec::new() };
    let max_hops = hops + 2;
    let mut routes = Vec::new();
    let mut walk = vec![start];
    collect_walks(graph, goal, max_hops, &mut walk, &mut routes);
    routes.sort_by(|a, b| {
        route_length(graph, a)
            .total_cmp(&route_length(graph, b))
            .then_with(|| a.cmp(b))
    });
    routes.truncate(MAX_ROUTES);
    routes
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

fn shortest_hops(graph: &Graph, start: usize, goal: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        if u == goal {
            return Some(dist[u]);
        }
        for &(v, _) in graph.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    None
}

fn route_length(graph: &Graph, route: &[usize]) -> f64 {
    route
        .windows(2)
        .map(|w| graph.edge_weight(w[0], w[1]).expect("route uses graph edges"))
        .sum()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(pool: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pool.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..pool.len() {
            let v = pool.remove(i);
            cur.push(v);
            rec(pool, cur, out);
            cur.pop();
            pool.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

struct Ctx<'a> {
    graph: &'a Graph,
    shape_sum: f64,
    budget: u64,
    best: f64,
    /// Motion segments of the best schedule, in priority order matching
    /// `best_order`.
    best_schedule: Vec<Vec<MotionSegment>>,
    best_order: Vec<usize>,
}

impl Ctx<'_> {
    fn spend(&mut self) -> Result<(), OracleError> {
        if self.budget == 0 {
            return Err(OracleError::BudgetExhausted);
        }
        self.budget -= 1;
        Ok(())
    }
}

/// Earliest departure `t >= from` such that waiting over `[wait_from, t]` at
/// the probe's origin and then moving is conflict-free, reached by repeatedly
/// jumping to the upper end of whichever unsafe window currently contains
/// `t`. Returns None when the wait becomes infeasible or the edge stays
/// blocked forever.
fn push_departure(
    probe: ProbeEdge,
    wait_from: f64,
    from: f64,
    obstacles: &[MotionSegment],
    shape_sum: f64,
) -> Option<f64> {
    let mut t = from.max(wait_from);
    for _ in 0..MAX_PUSH_STEPS {
        if t > wait_from + EPS_TIME {
            let wait = MotionSegment::wait(probe.from, wait_from, t - wait_from).ok()?;
            if obstacles.iter().any(|m| conflict_predicate(&wait, m, shape_sum)) {
                return None;
            }
        }
        let moving = probe.at(t);
        match obstacles.iter().find(|m| conflict_predicate(&moving, m, shape_sum)) {
            None => return Some(t),
            Some(m) => {
                let unsafe_win =
                    unsafe_interval(m, probe, shape_sum, t).expect("seed conflicts by construction");
                if !unsafe_win.hi.is_finite() {
                    return None;
                }
                t = unsafe_win.hi.max(t + EPS_TIME);
            }
        }
    }
    None
}

/// Candidate departure times for one leg: the earliest feasible departure
/// plus, for every obstacle, the pushed upper endpoints of any unsafe
/// start-time windows found by sampling that obstacle's active range.
/// When the leg ends at the agent's goal, departures that let each
/// obstacle's goal presence expire are added so the infinite rest can be
/// clear.
fn leg_candidates(
    probe: ProbeEdge,
    wait_from: f64,
    obstacles: &[MotionSegment],
    shape_sum: f64,
    lands_on_goal: bool,
) -> Vec<f64> {
    let mut raw = Vec::new();
    if let Some(t) = push_departure(probe, wait_from, wait_from, obstacles, shape_sum) {
        raw.push(t);
    }
    for m in obstacles {
        let m_end = if m.end_time().is_finite() { m.end_time() } else { m.start_time + 1.0 };
        let lo = (m.start_time - probe.duration - shape_sum - 1.0).max(wait_from);
        let hi = m_end + shape_sum + 1.0;
        if hi <= lo {
            continue;
        }
        for k in 0..SAMPLES_PER_OBSTACLE {
            let s = lo + (hi - lo) * (k as f64 + 0.5) / SAMPLES_PER_OBSTACLE as f64;
            if conflict_predicate(&probe.at(s), m, shape_sum) {
                let win = unsafe_interval(m, probe, shape_sum, s).expect("seed conflicts");
                if win.hi.is_finite() {
                    if let Some(t) =
                        push_departure(probe, wait_from, win.hi, obstacles, shape_sum)
                    {
                        raw.push(t);
                    }
                }
            }
        }
        if lands_on_goal {
            let goal_pos = probe.to;
            if let Some(p) = blocked_presence_interval(m, goal_pos, shape_sum) {
                if p.hi.is_finite() {
                    let depart = p.hi - probe.duration;
                    if depart > wait_from {
                        if let Some(t) =
                            push_departure(probe, wait_from, depart, obstacles, shape_sum)
                        {
                            raw.push(t);
                        }
                    }
                }
            }
        }
    }
    raw.sort_by(f64::total_cmp);
    raw.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    raw.truncate(8);
    raw
}

/// Depth-first branch over one agent's departures along a fixed route. Every
/// complete conflict-free schedule (arrival time plus motion segments
/// including the infinite rest) is handed to `on_complete`, which recurses
/// into the next agent.
#[allow(clippy::too_many_arguments)]
fn leg_dfs(
    ctx: &mut Ctx,
    route: &[usize],
    leg: usize,
    now: f64,
    remaining: f64,
    allowance: f64,
    segs: &mut Vec<MotionSegment>,
    obstacles: &[MotionSegment],
    on_complete: &mut dyn FnMut(&mut Ctx, f64, &[MotionSegment]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    ctx.spend()?;
    if now + remaining >= allowance {
        return Ok(());
    }
    let here = route[leg];
    let pos_here = ctx.graph.position(here);
    if leg + 1 == route.len() {
        let rest = MotionSegment {
            from: pos_here,
            to: pos_here,
            start_time: now,
            duration: f64::INFINITY,
        };
        if obstacles.iter().any(|m| conflict_predicate(&rest, m, ctx.shape_sum)) {
            return Ok(());
        }
        segs.push(rest);
        let r = on_complete(ctx, now, segs);
        segs.pop();
        return r;
    }
    let next = route[leg + 1];
    let dur = ctx.graph.edge_weight(here, next).expect("route edge exists");
    let probe = ProbeEdge { from: pos_here, to: ctx.graph.position(next), duration: dur };
    let lands_on_goal = leg + 2 == route.len();
    for t in leg_candidates(probe, now, obstacles, ctx.shape_sum, lands_on_goal) {
        let mut pushed = 0;
        if t > now + EPS_TIME {
            let wait = MotionSegment::wait(pos_here, now, t - now).expect("positive wait");
            segs.push(wait);
            pushed += 1;
        }
        segs.push(probe.at(t));
        pushed += 1;
        leg_dfs(
            ctx,
            route,
            leg + 1,
            t + dur,
            remaining - dur,
            allowance,
            segs,
            obstacles,
            on_complete,
        )?;
        for _ in 0..pushed {
            segs.pop();
        }
    }
    Ok(())
}

/// Schedules agents in `order[idx..]` sequentially, each against the motions
/// of everyone scheduled so far, exploring all departure branches and
/// keeping the best total in `ctx.best`.
#[allow(clippy::too_many_arguments)]
fn schedule_from(
    ctx: &mut Ctx,
    order: &[usize],
    idx: usize,
    routes: &[&[usize]],
    route_lengths: &[f64],
    lower_bounds: &[f64],
    partial: f64,
    obstacles: &mut Vec<MotionSegment>,
    stack: &mut Vec<Vec<MotionSegment>>,
) -> Result<(), OracleError> {
    if idx == order.len() {
        if partial < ctx.best {
            ctx.best = partial;
            ctx.best_schedule = stack.clone();
            ctx.best_order = order.to_vec();
        }
        return Ok(());
    }
    let agent = order[idx];
    let rest_lb: f64 = order[idx + 1..].iter().map(|&a| lower_bounds[a]).sum();
    let allowance = ctx.best - partial - rest_lb - 1e-9;
    if route_lengths[agent] >= allowance {
        return Ok(());
    }
    let route = routes[agent];
    let obstacle_snapshot = obstacles.clone();
    let mut segs = Vec::new();
    leg_dfs(
        ctx,
        route,
        0,
        0.0,
        route_lengths[agent],
        allowance,
        &mut segs,
        &obstacle_snapshot,
        &mut |ctx, arrival, schedule| {
            let before = obstacles.len();
            obstacles.extend_from_slice(schedule);
            stack.push(schedule.to_vec());
            let r = schedule_from(
                ctx,
                order,
                idx + 1,
                routes,
                route_lengths,
                lower_bounds,
                partial + arrival,
                obstacles,
                stack,
            );
            stack.pop();
            obstacles.truncate(before);
            r
        },
    )
}

/// Best sequential-schedule sum-of-costs for a toy instance (an upper bound
/// on the optimum; see the module docs), or None when no conflict-free
/// schedule exists within the route and departure bounds. Deterministic.
pub fn oracle_solve(instance: &Instance) -> Result<Option<f64>, OracleError> {
    Ok(oracle_solve_schedule(instance)?.map(|(cost, _)| cost))
}

/// Like [`oracle_solve`] but also returns the witness schedule: one motion
/// list per agent (waits, moves, and the final infinite rest).
pub fn oracle_solve_schedule(
    instance: &Instance,
) -> Result<Option<(f64, Vec<Vec<MotionSegment>>)>, OracleError> {
    let (agents, vertices, edges) = (
        instance.agent_count(),
        instance.graph.vertex_count(),
        instance.graph.edge_count(),
    );
    if agents > MAX_AGENTS || vertices > MAX_VERTICES || edges > MAX_EDGES {
        return Err(OracleError::TooLarge { agents, vertices, edges });
    }
    let shape_sum = instance.shape_sum();
    // Two agents parked within the shape sum can never be separated.
    for i in 0..agents {
        for j in i + 1..agents {
            let (g, s) = (&instance.graph, &instance.starts);
            if g.position(s[i]).dist(g.position(s[j])) < shape_sum
                || g.position(instance.goals[i]).dist(g.position(instance.goals[j])) < shape_sum
            {
                return Ok(None);
            }
        }
    }
    let all_routes: Vec<Vec<Vec<usize>>> = (0..agents)
        .map(|a| enumerate_routes(&instance.graph, instance.starts[a], instance.goals[a]))
        .collect();
    if all_routes.iter().any(|r| r.is_empty()) {
        return Ok(None);
    }
    let lower_bounds: Vec<f64> = (0..agents)
        .map(|a| goal_distances(&instance.graph, instance.goals[a])[instance.starts[a]])
        .collect();
    let mut ctx = Ctx {
        graph: &instance.graph,
        shape_sum,
        budget: LEG_BUDGET,
        best: f64::INFINITY,
        best_schedule: Vec::new(),
        best_order: Vec::new(),
    };
    let perms = permutations(agents);
    // Route choice per agent, shortest combinations first via index vectors.
    let mut choice = vec![0usize; agents];
    loop {
        let routes: Vec<&[usize]> =
            (0..agents).map(|a| all_routes[a][choice[a]].as_slice()).collect();
        let route_lengths: Vec<f64> =
            (0..agents).map(|a| route_length(&instance.graph, routes[a])).collect();
        if route_lengths.iter().sum::<f64>() < ctx.best {
            for order in &perms {
                let mut obstacles = Vec::new();
                let mut stack = Vec::new();
                schedule_from(
                    &mut ctx,
                    order,
                    0,
                    &routes,
                    &route_lengths,
                    &lower_bounds,
                    0.0,
                    &mut obstacles,
                    &mut stack,
                )?;
            }
        }
        // Odometer advance over route choices.
        let mut a = 0;
        loop {
            if a == agents {
                if !ctx.best.is_finite() {
                    return Ok(None);
                }
                let mut per_agent = vec![Vec::new(); agents];
                for (&k, segs) in ctx.best_order.iter().zip(&ctx.best_schedule) {
                    per_agent[k] = segs.clone();
                }
                return Ok(Some((ctx.best, per_agent)));
            }
            choice[a] += 1;
            if choice[a] < all_routes[a].len() {
                break;
            }
            choice[a] = 0;
            a += 1;
        }
    }
}

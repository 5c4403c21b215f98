//! Problem-instance model: grid maps with 2^k neighborhoods, weighted
//! roadmaps, MovingAI benchmark files, and per-goal distance tables.

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::geometry::{Point2, EPS_GEOM};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported neighborhood exponent {0} (expected 2..=5)")]
    UnsupportedNeighborhood(u32),
    #[error("instance has {starts} starts but {goals} goals")]
    AgentCountMismatch { starts: usize, goals: usize },
    #[error("duplicate {what} vertex {vertex}")]
    DuplicateEndpoint { what: &'static str, vertex: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

fn parse_err(line: usize, msg: impl Into<String>) -> WorldError {
    WorldError::Parse { line, msg: msg.into() }
}

/// Weighted undirected geometric graph. Edges are stored once and traversable
/// both ways; waits are implicit, so there are no self loops.
#[derive(Debug, Clone)]
pub struct Graph {
    positions: Vec<Point2>,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(positions: Vec<Point2>) -> Self {
        let n = positions.len();
        Graph { positions, edges: Vec::new(), adjacency: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) {
        debug_assert!(u != v, "self loops are implicit waits");
        debug_assert!(weight > 0.0);
        self.edges.push((u, v, weight));
        self.adjacency[u].push((v, weight));
        self.adjacency[v].push((u, weight));
    }

    /// Adds an edge weighted by the Euclidean distance between endpoints.
    pub fn add_geometric_edge(&mut self, u: usize, v: usize) {
        let w = self.positions[u].dist(self.positions[v]);
        self.add_edge(u, v, w);
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: usize) -> Point2 {
        self.positions[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Weight of the directed move u -> v, if the edge exists.
    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency[u].iter().find(|&&(t, _)| t == v).map(|&(_, w)| w)
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.positions.len() as f64
    }

    /// Longest edge incident to any vertex; used to bound conflict-candidate
    /// enumeration radii.
    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).fold(0.0, f64::max)
    }
}

/// Exact shortest-path distance from every vertex to `goal` (Dijkstra over
/// edge weights). Unreachable vertices get +inf.
pub fn goal_distances(graph: &Graph, goal: usize) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[goal] = 0.0;
    // Max-heap on negated distance; ties by vertex id for determinism.
    let mut heap: BinaryHeap<(std::cmp::Reverse<u64>, usize)> = BinaryHeap::new();
    heap.push((std::cmp::Reverse(0.0f64.to_bits()), goal));
    while let Some((std::cmp::Reverse(dbits), v)) = heap.pop() {
        let d = f64::from_bits(dbits);
        if d > dist[v] {
            continue;
        }
        for &(u, w) in graph.neighbors(v) {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push((std::cmp::Reverse(nd.to_bits()), u));
            }
        }
    }
    dist
}

/// A MovingAI-style grid of passable/blocked cells, y increasing downward.
#[derive(Debug, Clone)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn open(width: usize, height: usize) -> Self {
        GridMap { width, height, blocked: vec![false; width * height] }
    }

    pub fn blocked(&self, x: usize, y: usize) -> bool {
        self.blocked[y * self.width + x]
    }

    pub fn set_blocked(&mut self, x: usize, y: usize, value: bool) {
        self.blocked[y * self.width + x] = value;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }
}

/// Parses the MovingAI `.map` format: `type octile`, `height H`, `width W`,
/// `map`, then H rows of W glyphs. `.` and `G` are passable; `@ O T S W`
/// are blocked.
pub fn parse_map(text: &str) -> Result<GridMap, WorldError> {
    let mut lines = text.lines().enumerate();
    let mut expect = |label: &str| -> Result<(usize, String), WorldError> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_string()))
            .ok_or_else(|| parse_err(0, format!("missing `{label}` line")))
    };
    let (ln, ty) = expect("type")?;
    if !ty.starts_with("type") {
        return Err(parse_err(ln, format!("expected `type ...`, got `{ty}`")));
    }
    let (ln, h) = expect("height")?;
    let height: usize = h
        .strip_prefix("height ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, format!("bad height line `{h}`")))?;
    let (ln, w) = expect("width")?;
    let width: usize = w
        .strip_prefix("width ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, format!("bad width line `{w}`")))?;
    let (ln, m) = expect("map")?;
    if m.trim() != "map" {
        return Err(parse_err(ln, format!("expected `map`, got `{m}`")));
    }
    if width == 0 || height == 0 {
        return Err(parse_err(ln, "map dimensions must be >= 1"));
    }
    let mut grid = GridMap::open(width, height);
    for y in 0..height {
        let (ln, row) = expect("map row")?;
        let row = row.trim_end_matches('\r');
        if row.chars().count() != width {
            return Err(parse_err(ln, format!("row has {} glyphs, expected {width}", row.chars().count())));
        }
        for (x, glyph) in row.chars().enumerate() {
            let blocked = match glyph {
                '.' | 'G' => false,
                '@' | 'O' | 'T' | 'S' | 'W' => true,
                other => return Err(parse_err(ln, format!("unknown glyph `{other}`"))),
            };
            grid.set_blocked(x, y, blocked);
        }
    }
    Ok(grid)
}

/// Parses the MovingAI `.scen` format into ordered (start, goal) cell pairs.
pub fn parse_scen(text: &str) -> Result<Vec<((usize, usize), (usize, usize))>, WorldError> {
    let mut agents = Vec::new();
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines
        .next()
        .map(|(i, l)| (i + 1, l.trim()))
        .ok_or_else(|| parse_err(0, "empty scenario file"))?;
    if !header.starts_with("version") {
        return Err(parse_err(ln, format!("expected `version ...`, got `{header}`")));
    }
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 9 {
            return Err(parse_err(i + 1, format!("expected 9 tab-separated fields, got {}", fields.len())));
        }
        let width: i64 = fields[2].parse().map_err(|_| parse_err(i + 1, "bad width field"))?;
        let height: i64 = fields[3].parse().map_err(|_| parse_err(i + 1, "bad height field"))?;
        let coord = |idx: usize, bound: i64| -> Result<usize, WorldError> {
            let v: i64 = fields[idx].parse().map_err(|_| parse_err(i + 1, "bad coordinate field"))?;
            if v < 0 || v >= bound {
                return Err(parse_err(i + 1, format!("coordinate {v} out of bounds [0, {bound})")));
            }
            Ok(v as usize)
        };
        let sx = coord(4, width)?;
        let sy = coord(5, height)?;
        let gx = coord(6, width)?;
        let gy = coord(7, height)?;
        agents.push(((sx, sy), (gx, gy)));
    }
    Ok(agents)
}

/// A 2^k move set closed under the square symmetries, ordered by angle.
#[derive(Debug, Clone)]
pub struct NeighborhoodSpec {
    pub k_exponent: u32,
    pub offsets: Vec<(i32, i32)>,
}

/// Builds the 2^k neighborhood: k=2 gives the 4 cardinal moves; each
/// increment inserts the mediant (a+c, b+d) between every pair of angularly
/// adjacent offsets.
pub fn neighborhood(k_exponent: u32) -> Result<NeighborhoodSpec, WorldError> {
    if !(2..=5).contains(&k_exponent) {
        return Err(WorldError::UnsupportedNeighborhood(k_exponent));
    }
    let mut offsets: Vec<(i32, i32)> = vec![(1, 0), (0, 1), (-1, 0), (0, -1)];
    for _ in 2..k_exponent {
        let mut next = Vec::with_capacity(offsets.len() * 2);
        for idx in 0..offsets.len() {
            let (a, b) = offsets[idx];
            let (c, d) = offsets[(idx + 1) % offsets.len()];
            next.push((a, b));
            next.push((a + c, b + d));
        }
        offsets = next;
    }
    Ok(NeighborhoodSpec { k_exponent, offsets })
}

/// Grid graph plus the cell-to-vertex index needed to resolve scenario
/// coordinates.
#[derive(Debug, Clone)]
pub struct GridGraph {
    pub graph: Graph,
    cell_vertex: Vec<Option<usize>>,
    width: usize,
}

impl GridGraph {
    pub fn vertex_at(&self, x: usize, y: usize) -> Option<usize> {
        self.cell_vertex[y * self.width + x]
    }
}

/// Builds the graph over passable cell centers (integer coordinates, unit
/// pitch). An edge is kept only when the disc swept along it clears every
/// blocked cell's closed unit square by at least `radius - EPS_GEOM`,
/// computed with exact segment-to-square distances.
pub fn build_grid_graph(map: &GridMap, spec: &NeighborhoodSpec, radius: f64) -> GridGraph {
    let mut positions = Vec::new();
    let mut cell_vertex = vec![None; map.width * map.height];
    for y in 0..map.height {
        for x in 0..map.width {
            if !map.blocked(x, y) {
                cell_vertex[y * map.width + x] = Some(positions.len());
                positions.push(Point2::new(x as f64, y as f64));
            }
        }
    }
    let mut graph = Graph::new(positions);
    for y in 0..map.height {
        for x in 0..map.width {
            let Some(u) = cell_vertex[y * map.width + x] else { continue };
            for &(dx, dy) in &spec.offsets {
                // Store each undirected edge once.
                if (dy, dx) < (0, 0) || (dy == 0 && dx < 0) {
                    continue;
                }
                let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                if !map.in_bounds(nx, ny) || map.blocked(nx as usize, ny as usize) {
                    continue;
                }
                let v = cell_vertex[ny as usize * map.width + nx as usize].unwrap();
                if edge_is_clear(map, (x, y), (nx as usize, ny as usize), radius) {
                    graph.add_geometric_edge(u, v);
                }
            }
        }
    }
    GridGraph { graph, cell_vertex, width: map.width }
}

fn edge_is_clear(map: &GridMap, from: (usize, usize), to: (usize, usize), radius: f64) -> bool {
    let a = Point2::new(from.0 as f64, from.1 as f64);
    let b = Point2::new(to.0 as f64, to.1 as f64);
    // Only cells whose square can come within `radius` of the segment matter.
    let min_x = (a.x.min(b.x) - radius - 1.0).floor() as i64;
    let max_x = (a.x.max(b.x) + radius + 1.0).ceil() as i64;
    let min_y = (a.y.min(b.y) - radius - 1.0).floor() as i64;
    let max_y = (a.y.max(b.y) + radius + 1.0).ceil() as i64;
    for cy in min_y..=max_y {
        for cx in min_x..=max_x {
            if !map.in_bounds(cx, cy) || !map.blocked(cx as usize, cy as usize) {
                continue;
            }
            let d = segment_to_square_distance(a, b, Point2::new(cx as f64, cy as f64), 0.5);
            if d < radius - EPS_GEOM {
                return false;
            }
        }
    }
    true
}

/// Exact distance between segment [a, b] and the closed axis-aligned square
/// centered at `center` with half-extent `half`.
pub fn segment_to_square_distance(a: Point2, b: Point2, center: Point2, half: f64) -> f64 {
    let corners = [
        Point2::new(center.x - half, center.y - half),
        Point2::new(center.x + half, center.y - half),
        Point2::new(center.x + half, center.y + half),
        Point2::new(center.x - half, center.y + half),
    ];
    let inside = |p: Point2| (p.x - center.x).abs() <= half && (p.y - center.y).abs() <= half;
    if inside(a) || inside(b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let c = corners[i];
        let d = corners[(i + 1) % 4];
        if segments_intersect(a, b, c, d) {
            return 0.0;
        }
        best = best.min(segment_to_segment_distance(a, b, c, d));
    }
    best
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

pub(crate) fn point_to_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

fn segment_to_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_to_segment_distance(a, c, d)
        .min(point_to_segment_distance(b, c, d))
        .min(point_to_segment_distance(c, a, b))
        .min(point_to_segment_distance(d, a, b))
}

/// A full problem instance: graph, per-agent start/goal vertices and the
/// common disc radius.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub starts: Vec<usize>,
    pub goals: Vec<usize>,
    pub radius: f64,
}

impl Instance {
    pub fn new(graph: Graph, starts: Vec<usize>, goals: Vec<usize>, radius: f64) -> Result<Self, WorldError> {
        if starts.len() != goals.len() {
            return Err(WorldError::AgentCountMismatch { starts: starts.len(), goals: goals.len() });
        }
        for &v in starts.iter().chain(goals.iter()) {
            if v >= graph.vertex_count() {
                return Err(WorldError::VertexOutOfRange(v));
            }
        }
        for (i, &s) in starts.iter().enumerate() {
            if starts[..i].contains(&s) {
                return Err(WorldError::DuplicateEndpoint { what: "start", vertex: s });
            }
        }
        for (i, &g) in goals.iter().enumerate() {
            if goals[..i].contains(&g) {
                return Err(WorldError::DuplicateEndpoint { what: "goal", vertex: g });
            }
        }
        Ok(Instance { graph, starts, goals, radius })
    }

    pub fn agent_count(&self) -> usize {
        self.starts.len()
    }

    /// Sum of two agent radii, the collision threshold.
    pub fn shape_sum(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Parses the plain-text roadmap format: `V`, then V `id x y` lines, then
/// `E`, then E `u v` lines. Edge weights are Euclidean distances.
pub fn load_roadmap(text: &str) -> Result<Graph, WorldError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next_line = || -> Result<(usize, String), WorldError> {
        for (i, l) in lines.by_ref() {
            if !l.is_empty() {
                return Ok((i, l.to_string()));
            }
        }
        Err(parse_err(0, "unexpected end of roadmap file"))
    };
    let (ln, vcount) = next_line()?;
    let v: usize = vcount.parse().map_err(|_| parse_err(ln, "bad vertex count"))?;
    let mut positions = vec![None; v];
    for _ in 0..v {
        let (ln, line) = next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(ln, "expected `id x y`"));
        }
        let id: usize = parts[0].parse().map_err(|_| parse_err(ln, "bad vertex id"))?;
        if id >= v {
            return Err(parse_err(ln, format!("vertex id {id} out of range")));
        }
        if positions[id].is_some() {
            return Err(parse_err(ln, format!("duplicate vertex id {id}")));
        }
        let x: f64 = parts[1].parse().map_err(|_| parse_err(ln, "bad x coordinate"))?;
        let y: f64 = parts[2].parse().map_err(|_| parse_err(ln, "bad y coordinate"))?;
        positions[id] = Some(Point2::new(x, y));
    }
    let positions: Vec<Point2> = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| parse_err(0, format!("vertex {i} missing"))))
        .collect::<Result<_, _>>()?;
    let mut graph = Graph::new(positions);
    let (ln, ecount) = next_line()?;
    let e: usize = ecount.parse().map_err(|_| parse_err(ln, "bad edge count"))?;
    for _ in 0..e {
        let (ln, line) = next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(ln, "expected `u v`"));
        }
        let u: usize = parts[0].parse().map_err(|_| parse_err(ln, "bad edge endpoint"))?;
        let w: usize = parts[1].parse().map_err(|_| parse_err(ln, "bad edge endpoint"))?;
        if u >= graph.vertex_count() || w >= graph.vertex_count() {
            return Err(parse_err(ln, format!("dangling edge endpoint {u} {w}")));
        }
        graph.add_geometric_edge(u, w);
    }
    Ok(graph)
}

/// Writes a graph in the roadmap format accepted by [`load_roadmap`].
pub fn serialize_roadmap(graph: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", graph.vertex_count()));
    for v in 0..graph.vertex_count() {
        let p = graph.position(v);
        out.push_str(&format!("{} {} {}\n", v, p.x, p.y));
    }
    out.push_str(&format!("{}\n", graph.edge_count()));
    for &(u, v, _) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Test fixture: the tight triangle used by the three-agent rotation
/// instance, with |AB|=2, |BC|=1, |CA|=sqrt(3).
#[cfg(test)]
pub(crate) fn rotation_triangle() -> Graph {
    let s3 = 3.0f64.sqrt();
    let mut g = Graph::new(vec![
        Point2::new(0.0, 0.0), // A
        Point2::new(s3, 1.0),  // B
        Point2::new(s3, 0.0),  // C
    ]);
    g.add_geometric_edge(0, 1);
    g.add_geometric_edge(1, 2);
    g.add_geometric_edge(2, 0);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_open_map() {
        let map = parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n..\n").unwrap();
        assert_eq!((map.width, map.height), (2, 2));
        assert_eq!(map.blocked_count(), 0);
    }

    #[test]
    fn parse_map_with_obstacle() {
        let map = parse_map("type octile\nheight 2\nwidth 2\nmap\n.@\n..\n").unwrap();
        assert!(map.blocked(1, 0));
        assert!(!map.blocked(0, 0) && !map.blocked(0, 1) && !map.blocked(1, 1));
    }

    #[test]
    fn parse_empty_8_8() {
        let mut text = String::from("type octile\nheight 8\nwidth 8\nmap\n");
        for _ in 0..8 {
            text.push_str("........\n");
        }
        let map = parse_map(&text).unwrap();
        assert_eq!((map.width, map.height), (8, 8));
        assert_eq!(map.blocked_count(), 0);
    }

    #[test]
    fn parse_map_rejects_bad_rows() {
        assert!(parse_map("type octile\nheight 1\nwidth 3\nmap\n..\n").is_err());
        assert!(parse_map("type octile\nheight 1\nwidth 1\nmap\nZ\n").is_err());
    }

    #[test]
    fn parse_scen_lines() {
        assert_eq!(parse_scen("version 1\n").unwrap(), vec![]);
        let one = parse_scen("version 1\n0\tm.map\t8\t8\t0\t0\t7\t7\t9.899\n").unwrap();
        assert_eq!(one, vec![((0, 0), (7, 7))]);
        assert!(parse_scen("nonsense\n").is_err());
        assert!(parse_scen("version 1\n0\tm.map\t8\t8\t9\t0\t7\t7\t9.9\n").is_err());
    }

    #[test]
    fn neighborhood_sizes_and_members() {
        assert_eq!(neighborhood(2).unwrap().offsets.len(), 4);
        let k3 = neighborhood(3).unwrap();
        assert_eq!(k3.offsets.len(), 8);
        assert!(k3.offsets.contains(&(1, 1)));
        assert!(neighborhood(6).is_err());
    }

    #[test]
    fn neighborhood_k5_first_quadrant_order() {
        let k5 = neighborhood(5).unwrap();
        assert_eq!(k5.offsets.len(), 32);
        let quadrant: Vec<(i32, i32)> =
            k5.offsets.iter().copied().filter(|&(dx, dy)| dx >= 0 && dy >= 0).collect();
        assert_eq!(
            quadrant,
            vec![(1, 0), (3, 1), (2, 1), (3, 2), (1, 1), (2, 3), (1, 2), (1, 3), (0, 1)]
        );
    }

    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }

    proptest! {
        #[test]
        fn neighborhood_offsets_coprime_and_symmetric(k in 2u32..=5) {
            let spec = neighborhood(k).unwrap();
            for &(dx, dy) in &spec.offsets {
                prop_assert_eq!(gcd(dx, dy), 1);
                // Closure under the 8 square symmetries.
                for &sym in &[(dy, dx), (-dx, dy), (dx, -dy), (-dy, -dx)] {
                    prop_assert!(spec.offsets.contains(&sym));
                }
            }
            // Strict angular ordering.
            let angles: Vec<f64> = spec
                .offsets
                .iter()
                .map(|&(dx, dy)| (dy as f64).atan2(dx as f64).rem_euclid(std::f64::consts::TAU))
                .collect();
            for w in angles.windows(2) {
                prop_assert!(w[0] < w[1] || (w[1] - w[0]).abs() > std::f64::consts::TAU - 1e-9);
            }
        }
    }

    #[test]
    fn grid_graph_counts_on_open_3x3() {
        let map = parse_map("type octile\nheight 3\nwidth 3\nmap\n...\n...\n...\n").unwrap();
        let g4 = build_grid_graph(&map, &neighborhood(2).unwrap(), DEFAULT_RADIUS);
        assert_eq!(g4.graph.vertex_count(), 9);
        assert_eq!(g4.graph.edge_count(), 12);
        let g8 = build_grid_graph(&map, &neighborhood(3).unwrap(), DEFAULT_RADIUS);
        assert_eq!(g8.graph.edge_count(), 20);
    }

    use crate::geometry::DEFAULT_RADIUS;

    #[test]
    fn grid_graph_prunes_corner_cutting_diagonals() {
        let map = parse_map("type octile\nheight 3\nwidth 3\nmap\n...\n.@.\n...\n").unwrap();
        let g8 = build_grid_graph(&map, &neighborhood(3).unwrap(), DEFAULT_RADIUS);
        // Open 3x3 has 20 edges; removing the center kills its 4 orthogonal
        // and 4 diagonal incident edges, and the 4 remaining diagonals that
        // cut the blocked square's corners.
        assert_eq!(g8.graph.vertex_count(), 8);
        for &(u, v, _) in g8.graph.edges() {
            let pu = g8.graph.position(u);
            let pv = g8.graph.position(v);
            let d = segment_to_square_distance(pu, pv, Point2::new(1.0, 1.0), 0.5);
            assert!(d >= DEFAULT_RADIUS - EPS_GEOM);
        }
        let diag = |x1: usize, y1: usize, x2: usize, y2: usize| {
            let u = g8.vertex_at(x1, y1).unwrap();
            let v = g8.vertex_at(x2, y2).unwrap();
            g8.graph.edges().iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
        };
        assert!(!diag(0, 1, 1, 2));
        assert!(!diag(1, 0, 2, 1));
        assert!(!diag(0, 1, 1, 0));
        assert!(!diag(1, 2, 2, 1));
    }

    #[test]
    fn grid_edges_clear_obstacles_by_sampling() {
        let map = parse_map("type octile\nheight 4\nwidth 4\nmap\n....\n.@..\n..@.\n....\n").unwrap();
        let gg = build_grid_graph(&map, &neighborhood(4).unwrap(), DEFAULT_RADIUS);
        for &(u, v, _) in gg.graph.edges() {
            let pu = gg.graph.position(u);
            let pv = gg.graph.position(v);
            for k in 0..=1000 {
                let t = k as f64 / 1000.0;
                let p = pu.add(pv.sub(pu).scale(t));
                for y in 0..4 {
                    for x in 0..4 {
                        if map.blocked(x, y) {
                            let dx = (p.x - x as f64).abs().max(0.5) - 0.5;
                            let dy = (p.y - y as f64).abs().max(0.5) - 0.5;
                            let d = (dx * dx + dy * dy).sqrt();
                            assert!(
                                d >= DEFAULT_RADIUS - 1e-6,
                                "edge {u}->{v} too close to blocked ({x},{y})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn roadmap_round_trip_and_weights() {
        let text = "3\n0 0 0\n1 2 0\n2 2 1\n3\n0 1\n1 2\n2 0\n";
        let g = load_roadmap(text).unwrap();
        assert_eq!(g.vertex_count(), 3);
        let weights: Vec<f64> = g.edges().iter().map(|&(_, _, w)| w).collect();
        assert!((weights[0] - 2.0).abs() < 1e-12);
        assert!((weights[1] - 1.0).abs() < 1e-12);
        assert!((weights[2] - 5.0f64.sqrt()).abs() < 1e-12);
        let again = load_roadmap(&serialize_roadmap(&g)).unwrap();
        assert_eq!(again.vertex_count(), g.vertex_count());
        assert_eq!(again.edges(), g.edges());
    }

    #[test]
    fn roadmap_rejects_dangling_edges() {
        assert!(load_roadmap("1\n0 0 0\n1\n0 3\n").is_err());
        assert!(load_roadmap("2\n0 0 0\n0 1 1\n0\n").is_err());
    }

    #[test]
    fn goal_distances_on_triangle() {
        let g = super::rotation_triangle();
        let dist = goal_distances(&g, 0);
        assert_eq!(dist[0], 0.0);
        assert!((dist[2] - 3.0f64.sqrt()).abs() < 1e-12);
        assert!((dist[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn goal_distances_unreachable_is_infinite() {
        let g = Graph::new(vec![Point2::new(0.0, 0.0), Point2::new(5.0, 0.0)]);
        let dist = goal_distances(&g, 0);
        assert!(dist[1].is_infinite());
    }

    #[test]
    fn instance_rejects_duplicates() {
        let g = super::rotation_triangle();
        assert!(Instance::new(g.clone(), vec![0, 0], vec![1, 2], DEFAULT_RADIUS).is_err());
        assert!(Instance::new(g.clone(), vec![0, 1], vec![2, 2], DEFAULT_RADIUS).is_err());
        assert!(Instance::new(g, vec![0, 1], vec![1, 0], DEFAULT_RADIUS).is_ok());
    }
}

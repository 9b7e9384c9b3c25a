//! Shortest routes to the OLT, drop-distance tables and segment geometry.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::model::{NetworkMap, NodeId, Point, RouteKind};
use crate::rules::{BusinessRules, IntersectionMode};

/// A route from some node to the OLT.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePath {
    pub length_m: f64,
    /// Edge indices ordered from the source towards the OLT.
    pub edges: Vec<usize>,
}

impl RoutePath {
    /// Edge that leaves the OLT, i.e. the branch this path belongs to.
    pub fn root_edge(&self) -> Option<usize> {
        self.edges.last().copied()
    }
}

#[derive(Debug)]
struct RootTree {
    dist: Vec<f64>,
    /// (parent node index, edge index) towards the root.
    parent: Vec<Option<(usize, usize)>>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn root_tree(map: &NetworkMap) -> RootTree {
    let n = map.nodes().len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let root = map.root_index();
    dist[root] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: root });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, e) in map.adjacency(u) {
            let nd = d + map.edges()[e].length_m;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some((u, e));
                heap.push(HeapEntry { dist: nd, node: v });
            } else if nd == dist[v] {
                // Equal-length alternative: keep the smaller next hop id.
                if let Some((p, _)) = parent[v] {
                    if map.node_at(u).id < map.node_at(p).id {
                        parent[v] = Some((u, e));
                    }
                }
            }
        }
    }
    RootTree { dist, parent }
}

/// Lazily filled store of shortest routes to the OLT.
///
/// The shortest-path tree rooted at the OLT is computed on first use; each
/// source's edge sequence is then extracted on demand and retained. Reads and
/// fills are safe from several threads; concurrent fills write identical values.
#[derive(Debug, Default)]
pub struct PathCache {
    tree: OnceLock<RootTree>,
    paths: RwLock<HashMap<NodeId, Arc<RoutePath>>>,
}

impl PathCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cached_sources(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.paths.read().expect("path cache poisoned").keys().copied().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.paths.read().expect("path cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, from: NodeId) -> Option<Arc<RoutePath>> {
        self.paths.read().expect("path cache poisoned").get(&from).cloned()
    }
}

/// Minimal-length route from `from` to the OLT. Ties between equally short
/// routes resolve to the smallest next-hop node id at every step.
pub fn shortest_path(map: &NetworkMap, cache: &PathCache, from: NodeId) -> Result<Arc<RoutePath>> {
    if let Some(hit) = cache.get(from) {
        return Ok(hit);
    }
    let start = map.node_index(from).ok_or_else(|| Error::Argument(format!("unknown node {from}")))?;
    if map.node_at(start).kind.is_client() {
        return Err(Error::Argument(format!("node {from} is a client, not a route node")));
    }
    let tree = cache.tree.get_or_init(|| root_tree(map));
    if !tree.dist[start].is_finite() {
        return Err(Error::Infeasible(format!("node {from} has no route to the olt")));
    }
    let mut edges = Vec::new();
    let mut at = start;
    while let Some((p, e)) = tree.parent[at] {
        edges.push(e);
        at = p;
    }
    let path = Arc::new(RoutePath { length_m: tree.dist[start], edges });
    cache.paths.write().expect("path cache poisoned").entry(from).or_insert_with(|| path.clone());
    Ok(path)
}

/// Reachable candidate for one client, with its straight-line distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropLink {
    /// Candidate slot (position in the PDO mask).
    pub candidate: usize,
    pub distance_m: f64,
}

/// Per-client candidates within drop range, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DropTable {
    links: Vec<Vec<DropLink>>,
}

impl DropTable {
    pub fn links(&self, client: usize) -> &[DropLink] {
        &self.links[client]
    }

    pub fn distance(&self, client: usize, candidate: usize) -> Option<f64> {
        self.links[client].iter().find(|l| l.candidate == candidate).map(|l| l.distance_m)
    }

    pub fn client_count(&self) -> usize {
        self.links.len()
    }

    /// Client slots with no candidate in drop range.
    pub fn unservable(&self) -> Vec<usize> {
        (0..self.links.len()).filter(|&c| self.links[c].is_empty()).collect()
    }
}

/// Builds the drop table with a uniform grid of cell size `drop_limit_m`, so
/// only the 3x3 neighbourhood of each client is scanned.
pub fn build_drop_table(map: &NetworkMap, rules: &BusinessRules) -> DropTable {
    let limit = rules.drop_limit_m;
    let cell = |p: &Point| ((p.x / limit).floor() as i64, (p.y / limit).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (slot, c) in map.candidates().enumerate() {
        grid.entry(cell(&c.position)).or_default().push(slot);
    }
    let links = map
        .clients()
        .map(|client| {
            let (cx, cy) = cell(&client.position);
            let mut found = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(slots) = grid.get(&(cx + dx, cy + dy)) else { continue };
                    for &slot in slots {
                        let d = client.position.distance(&map.candidate(slot).position);
                        if d <= limit {
                            found.push(DropLink { candidate: slot, distance_m: d });
                        }
                    }
                }
            }
            found.sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.candidate.cmp(&b.candidate)));
            found
        })
        .collect();
    DropTable { links }
}

/// Union of the edges used by a set of OLT routes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistributionUnion {
    /// Sorted edge indices.
    pub edges: Vec<usize>,
    /// Physical cable length, each edge counted once.
    pub length_m: f64,
    /// Length with buried edges scaled by the buried cost multiplier.
    pub weighted_length_m: f64,
}

pub fn distribution_union<'a>(
    map: &NetworkMap,
    paths: impl IntoIterator<Item = &'a RoutePath>,
    buried_multiplier: f64,
) -> DistributionUnion {
    let mut used = vec![false; map.edges().len()];
    for path in paths {
        for &e in &path.edges {
            used[e] = true;
        }
    }
    let mut out = DistributionUnion::default();
    for (e, _) in used.iter().enumerate().filter(|(_, u)| **u) {
        let edge = &map.edges()[e];
        out.edges.push(e);
        out.length_m += edge.length_m;
        out.weighted_length_m += match edge.route {
            RouteKind::Aerial => edge.length_m,
            RouteKind::Buried => edge.length_m * buried_multiplier,
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }
}

fn orient(a: Point, b: Point, c: Point) -> i8 {
    let v = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `c` lies within the bounding box of `a`-`b`; meaningful only when collinear.
fn within_box(a: Point, b: Point, c: Point) -> bool {
    c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
}

/// True iff the two segments cross at a single point interior to both.
/// Touching, shared endpoints and collinear overlap are not crossings.
pub fn segments_intersect(drop: Segment, dist: Segment) -> Result<bool> {
    segments_intersect_with(drop, dist, IntersectionMode::Proper)
}

pub fn segments_intersect_with(drop: Segment, dist: Segment, mode: IntersectionMode) -> Result<bool> {
    if drop.a == drop.b || dist.a == dist.b {
        return Err(Error::Argument("zero-length segment".into()));
    }
    let (p1, p2, q1, q2) = (drop.a, drop.b, dist.a, dist.b);
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    let proper = o1 * o2 < 0 && o3 * o4 < 0;
    if mode == IntersectionMode::Proper || proper {
        return Ok(proper);
    }

    let shared = [(p1, q1), (p1, q2), (p2, q1), (p2, q2)].into_iter().filter(|(p, q)| p == q).count();
    let collinear = o1 == 0 && o2 == 0;
    if shared > 0 {
        if !collinear {
            return Ok(false);
        }
        if shared == 2 {
            return Ok(true);
        }
        // Collinear with one common endpoint: overlap iff both run the same way from it.
        let (s, p_far, q_far) = if p1 == q1 {
            (p1, p2, q2)
        } else if p1 == q2 {
            (p1, p2, q1)
        } else if p2 == q1 {
            (p2, p1, q2)
        } else {
            (p2, p1, q1)
        };
        let dot = (p_far.x - s.x) * (q_far.x - s.x) + (p_far.y - s.y) * (q_far.y - s.y);
        return Ok(dot > 0.0);
    }
    Ok((o1 == 0 && within_box(p1, p2, q1))
        || (o2 == 0 && within_box(p1, p2, q2))
        || (o3 == 0 && within_box(q1, q2, p1))
        || (o4 == 0 && within_box(q1, q2, p2)))
}

//! Seeded synthetic street maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MapEdge, MapNode, NetworkMap, NodeId, NodeKind, Point, RouteKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Each new route node hangs off its nearest predecessor, plus `extra_edges` chords.
    #[default]
    Tree,
    /// Jittered lattice with all 4-neighbour streets.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    /// Equipment candidates, not counting the OLT.
    pub n_candidates: usize,
    pub n_sdu: usize,
    pub n_mdu: usize,
    pub area_m2: f64,
    pub topology: Topology,
    pub extra_edges: usize,
    /// Inclusive range of MDU port demand.
    pub mdu_demand: (u32, u32),
    /// Clients are dropped within this distance of a random candidate...
    pub client_reach_m: f64,
    /// ...except this fraction, which lands anywhere in the area.
    pub stray_fraction: f64,
    pub buried_fraction: f64,
    /// Minimum spacing between route nodes.
    pub min_spacing_m: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_candidates: 10,
            n_sdu: 8,
            n_mdu: 0,
            area_m2: 40_000.0,
            topology: Topology::Tree,
            extra_edges: 0,
            mdu_demand: (2, 8),
            client_reach_m: 60.0,
            stray_fraction: 0.03,
            buried_fraction: 0.2,
            min_spacing_m: 8.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Scaled like the first evaluation map: 80 equipment nodes (79 candidates
    /// plus the OLT), 103 SDUs, 5 MDUs, 81 routes of roughly 2.1 km in total.
    pub fn map1(seed: u64) -> Self {
        Self {
            n_candidates: 79,
            n_sdu: 103,
            n_mdu: 5,
            area_m2: 50_000.0,
            topology: Topology::Tree,
            extra_edges: 2,
            mdu_demand: (2, 6),
            seed,
            ..Self::default()
        }
    }

    /// At most 10 candidates and 8 clients, small enough for the exhaustive oracle.
    pub fn tiny(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        Self {
            n_candidates: rng.gen_range(5..=10),
            n_sdu: rng.gen_range(4..=8),
            n_mdu: 0,
            area_m2: 30_000.0,
            seed,
            ..Self::default()
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, side: f64) -> Point {
    Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side))
}

fn route_edge(rng: &mut ChaCha8Rng, spec: &SynthSpec, pts: &[Point], a: usize, b: usize) -> MapEdge {
    let route = if rng.gen_bool(spec.buried_fraction) { RouteKind::Buried } else { RouteKind::Aerial };
    MapEdge { a: NodeId(a as u32), b: NodeId(b as u32), length_m: pts[a].distance(&pts[b]), route }
}

pub fn synth_instance(spec: &SynthSpec) -> Result<NetworkMap> {
    if !(spec.area_m2.is_finite() && spec.area_m2 > 0.0) {
        return Err(Error::Generation(format!("area must be > 0, got {}", spec.area_m2)));
    }
    if spec.n_candidates == 0 {
        return Err(Error::Generation("at least one candidate is required".into()));
    }
    if spec.mdu_demand.0 < 1 || spec.mdu_demand.0 > spec.mdu_demand.1 {
        return Err(Error::Generation(format!("bad mdu demand range {:?}", spec.mdu_demand)));
    }
    let probs = [spec.stray_fraction, spec.buried_fraction];
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Generation("fractions must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = spec.area_m2.sqrt();
    let n_route = spec.n_candidates + 1;

    // Route nodes: index 0 is the OLT.
    let (pts, mut edges) = match spec.topology {
        Topology::Tree => {
            let mut pts: Vec<Point> = Vec::with_capacity(n_route);
            let mut edges = Vec::new();
            while pts.len() < n_route {
                let mut placed = None;
                for _ in 0..1000 {
                    let p = random_point(&mut rng, side);
                    if pts.iter().all(|q| q.distance(&p) >= spec.min_spacing_m) {
                        placed = Some(p);
                        break;
                    }
                }
                let p = placed.ok_or_else(|| {
                    Error::Generation(format!("no room for {n_route} route nodes in {} m2", spec.area_m2))
                })?;
                pts.push(p);
                let i = pts.len() - 1;
                if i > 0 {
                    let nearest =
                        (0..i).min_by(|&a, &b| pts[a].distance(&p).total_cmp(&pts[b].distance(&p))).expect("non-empty");
                    edges.push(route_edge(&mut rng, spec, &pts, nearest, i));
                }
            }
            (pts, edges)
        }
        Topology::Grid => {
            let cols = (n_route as f64).sqrt().ceil() as usize;
            let rows = n_route.div_ceil(cols);
            let step = side / cols.max(rows) as f64;
            if step < spec.min_spacing_m {
                return Err(Error::Generation(format!("grid step {step:.1} m below minimum spacing")));
            }
            let jitter = step * 0.15;
            let pts: Vec<Point> = (0..n_route)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    Point::new(
                        (c as f64 + 0.5) * step + rng.gen_range(-jitter..=jitter),
                        (r as f64 + 0.5) * step + rng.gen_range(-jitter..=jitter),
                    )
                })
                .collect();
            let mut edges = Vec::new();
            for i in 0..n_route {
                let (r, c) = (i / cols, i % cols);
                if c + 1 < cols && i + 1 < n_route {
                    edges.push(route_edge(&mut rng, spec, &pts, i, i + 1));
                }
                if r + 1 < rows && i + cols < n_route {
                    edges.push(route_edge(&mut rng, spec, &pts, i, i + cols));
                }
            }
            (pts, edges)
        }
    };

    if spec.topology == Topology::Tree {
        // Chords: join a random node to its nearest non-neighbour.
        let mut added = 0;
        let mut attempts = 0;
        while added < spec.extra_edges && attempts < 100 * (spec.extra_edges + 1) {
            attempts += 1;
            let a = rng.gen_range(0..n_route);
            let linked = |x: usize, y: usize| {
                edges.iter().any(|e| {
                    let (p, q) = (e.a.0 as usize, e.b.0 as usize);
                    (p == x && q == y) || (p == y && q == x)
                })
            };
            let b = (0..n_route)
                .filter(|&b| b != a && !linked(a, b))
                .min_by(|&x, &y| pts[a].distance(&pts[x]).total_cmp(&pts[a].distance(&pts[y])));
            if let Some(b) = b {
                edges.push(route_edge(&mut rng, spec, &pts, a, b));
                added += 1;
            }
        }
    }

    let mut nodes: Vec<MapNode> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| MapNode {
            id: NodeId(i as u32),
            position: *p,
            kind: if i == 0 { NodeKind::OltRoot } else { NodeKind::EquipmentCandidate },
            demand: 0,
        })
        .collect();

    let n_clients = spec.n_sdu + spec.n_mdu;
    // MDUs are interleaved at random positions of the client list.
    let mut kinds = vec![NodeKind::ClientSdu; spec.n_sdu];
    kinds.extend(std::iter::repeat_n(NodeKind::ClientMdu, spec.n_mdu));
    for i in (1..kinds.len()).rev() {
        let j = rng.gen_range(0..=i);
        kinds.swap(i, j);
    }
    for (k, kind) in kinds.into_iter().enumerate() {
        let position = if rng.gen_bool(spec.stray_fraction) {
            random_point(&mut rng, side)
        } else {
            let anchor = pts[rng.gen_range(1..n_route)];
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(3.0..spec.client_reach_m.max(3.5));
            Point::new(anchor.x + r * angle.cos(), anchor.y + r * angle.sin())
        };
        let demand = match kind {
            NodeKind::ClientMdu => rng.gen_range(spec.mdu_demand.0..=spec.mdu_demand.1),
            _ => 1,
        };
        nodes.push(MapNode { id: NodeId((n_route + k) as u32), position, kind, demand });
    }
    debug_assert_eq!(nodes.len(), n_route + n_clients);
    NetworkMap::new(nodes, std::mem::take(&mut edges))
}

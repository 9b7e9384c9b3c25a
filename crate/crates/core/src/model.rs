//! Route-graph data model: nodes, edges, map ingestion and preprocessing.
//!
//! Clients (SDU/MDU) are off-graph points. They attach to equipment candidates
//! through straight drop cables, so route edges only ever join candidates and
//! the OLT root.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    #[serde(rename = "candidate")]
    EquipmentCandidate,
    #[serde(rename = "sdu")]
    ClientSdu,
    #[serde(rename = "mdu")]
    ClientMdu,
    #[serde(rename = "olt")]
    OltRoot,
}

impl NodeKind {
    pub fn is_client(self) -> bool {
        matches!(self, NodeKind::ClientSdu | NodeKind::ClientMdu)
    }

    pub fn is_route_node(self) -> bool {
        !self.is_client()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    Aerial,
    Buried,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapNode {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
    /// Ports required: 1 for an SDU, several for an MDU, 0 otherwise.
    pub demand: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub length_m: f64,
    pub route: RouteKind,
}

/// On-disk representation of a map (`nodes` + `edges`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub a: u32,
    pub b: u32,
    pub length_m: f64,
    pub route: RouteKind,
}

/// An immutable, integrity-checked route graph plus its client population.
#[derive(Debug, Clone)]
pub struct NetworkMap {
    nodes: Vec<MapNode>,
    edges: Vec<MapEdge>,
    index: HashMap<NodeId, usize>,
    root: usize,
    candidates: Vec<usize>,
    candidate_slot: HashMap<NodeId, usize>,
    clients: Vec<usize>,
    client_slot: HashMap<NodeId, usize>,
    /// Per node index: (neighbour node index, edge index).
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NetworkMap {
    pub fn new(nodes: Vec<MapNode>, edges: Vec<MapEdge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        let mut roots = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(Error::Integrity(format!("duplicate node id {}", node.id)));
            }
            if !(node.position.x.is_finite() && node.position.y.is_finite()) {
                return Err(Error::Integrity(format!("node {} has non-finite coordinates", node.id)));
            }
            match node.kind {
                NodeKind::OltRoot => {
                    roots.push(i);
                    if node.demand != 0 {
                        return Err(Error::Integrity(format!("olt node {} must have demand 0", node.id)));
                    }
                }
                NodeKind::EquipmentCandidate if node.demand != 0 => {
                    return Err(Error::Integrity(format!("candidate node {} must have demand 0", node.id)));
                }
                NodeKind::ClientSdu if node.demand != 1 => {
                    return Err(Error::Integrity(format!("sdu node {} must have demand 1", node.id)));
                }
                NodeKind::ClientMdu if node.demand < 1 => {
                    return Err(Error::Integrity(format!("mdu node {} must have demand >= 1", node.id)));
                }
                _ => {}
            }
        }
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::Integrity("map has no olt node".into())),
            _ => return Err(Error::Integrity(format!("map has {} olt nodes, expected exactly 1", roots.len()))),
        };

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            if edge.a == edge.b {
                return Err(Error::Integrity(format!("edge {e} is a self-loop on node {}", edge.a)));
            }
            if !(edge.length_m.is_finite() && edge.length_m > 0.0) {
                return Err(Error::Integrity(format!("edge {e} ({}-{}) has non-positive length", edge.a, edge.b)));
            }
            let mut ends = [0usize; 2];
            for (slot, id) in [edge.a, edge.b].into_iter().enumerate() {
                let &i =
                    index.get(&id).ok_or_else(|| Error::Integrity(format!("edge {e} references unknown node {id}")))?;
                if nodes[i].kind.is_client() {
                    return Err(Error::Integrity(format!("edge {e} touches client node {id}")));
                }
                ends[slot] = i;
            }
            adjacency[ends[0]].push((ends[1], e));
            adjacency[ends[1]].push((ends[0], e));
        }

        let candidates: Vec<usize> =
            (0..nodes.len()).filter(|&i| nodes[i].kind == NodeKind::EquipmentCandidate).collect();
        let clients: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].kind.is_client()).collect();
        let candidate_slot = candidates.iter().enumerate().map(|(s, &i)| (nodes[i].id, s)).collect();
        let client_slot = clients.iter().enumerate().map(|(s, &i)| (nodes[i].id, s)).collect();

        Ok(Self { nodes, edges, index, root, candidates, candidate_slot, clients, client_slot, adjacency })
    }

    pub fn from_document(doc: MapDocument) -> Result<Self> {
        let nodes = doc
            .nodes
            .into_iter()
            .map(|n| {
                let demand = match (n.kind, n.demand) {
                    (_, Some(d)) => d,
                    (NodeKind::ClientSdu, None) => 1,
                    (NodeKind::ClientMdu, None) => {
                        return Err(Error::Parse(format!("node {}: missing field `demand` for mdu", n.id)))
                    }
                    (_, None) => 0,
                };
                Ok(MapNode { id: NodeId(n.id), position: Point::new(n.x_m, n.y_m), kind: n.kind, demand })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = doc
            .edges
            .into_iter()
            .map(|e| MapEdge { a: NodeId(e.a), b: NodeId(e.b), length_m: e.length_m, route: e.route })
            .collect();
        Self::new(nodes, edges)
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    x_m: n.position.x,
                    y_m: n.position.y,
                    kind: n.kind,
                    demand: Some(n.demand),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord { a: e.a.0, b: e.b.0, length_m: e.length_m, route: e.route })
                .collect(),
        }
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[MapEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&MapNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub(crate) fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn node_at(&self, index: usize) -> &MapNode {
        &self.nodes[index]
    }

    pub(crate) fn adjacency(&self, index: usize) -> &[(usize, usize)] {
        &self.adjacency[index]
    }

    pub(crate) fn root_index(&self) -> usize {
        self.root
    }

    pub fn root(&self) -> &MapNode {
        &self.nodes[self.root]
    }

    /// Equipment candidates in document order; positions index the PDO mask.
    pub fn candidates(&self) -> impl ExactSizeIterator<Item = &MapNode> + '_ {
        self.candidates.iter().map(move |&i| &self.nodes[i])
    }

    pub fn candidate(&self, slot: usize) -> &MapNode {
        &self.nodes[self.candidates[slot]]
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidate_slot(&self, id: NodeId) -> Option<usize> {
        self.candidate_slot.get(&id).copied()
    }

    /// Clients in document order; positions index the assignment vector.
    pub fn clients(&self) -> impl ExactSizeIterator<Item = &MapNode> + '_ {
        self.clients.iter().map(move |&i| &self.nodes[i])
    }

    pub fn client(&self, slot: usize) -> &MapNode {
        &self.nodes[self.clients[slot]]
    }

    pub fn client_count(&self) -> usize {
        self.clients.len()
    }

    pub fn client_slot(&self, id: NodeId) -> Option<usize> {
        self.client_slot.get(&id).copied()
    }

    /// Sum of client demands in ports (fibres).
    pub fn total_demand(&self) -> u64 {
        self.clients().map(|c| c.demand as u64).sum()
    }

    pub fn total_route_length_m(&self) -> f64 {
        self.edges.iter().map(|e| e.length_m).sum()
    }

    /// Node indices reachable from the root over route edges.
    fn reachable_from_root(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

pub fn parse_map(text: &str) -> Result<NetworkMap> {
    let doc: MapDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    NetworkMap::from_document(doc)
}

/// Reads a map document from disk. No preprocessing is applied.
pub fn load_map(path: impl AsRef<Path>) -> Result<NetworkMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_map(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Result of [`preprocess`].
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub map: NetworkMap,
    pub removed: Vec<NodeId>,
}

/// Drops every candidate that is not in the OLT's connected component, along
/// with the edges among them. Clients are always retained.
pub fn preprocess(map: &NetworkMap) -> Result<Preprocessed> {
    let reachable = map.reachable_from_root();
    let removed: Vec<NodeId> = map
        .nodes
        .iter()
        .enumerate()
        .filter(|(i, n)| n.kind == NodeKind::EquipmentCandidate && !reachable[*i])
        .map(|(_, n)| n.id)
        .collect();
    let kept_candidates = map.candidates.iter().filter(|&&i| reachable[i]).count();
    if kept_candidates == 0 {
        return Err(Error::UnusableMap(format!(
            "olt node {} is not connected to any equipment candidate",
            map.root().id
        )));
    }
    if removed.is_empty() {
        return Ok(Preprocessed { map: map.clone(), removed });
    }
    let gone: HashSet<NodeId> = removed.iter().copied().collect();
    let nodes = map.nodes.iter().filter(|n| !gone.contains(&n.id)).cloned().collect();
    let edges = map.edges.iter().filter(|e| !gone.contains(&e.a) && !gone.contains(&e.b)).cloned().collect();
    Ok(Preprocessed { map: NetworkMap::new(nodes, edges)?, removed })
}

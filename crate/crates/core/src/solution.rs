//! Decoded designs and the solution document exchanged with the CLI.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::Genotype;
use crate::model::{NetworkMap, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub client: u32,
    /// PDO node id, or -1 when the client is not served.
    pub pdo: i64,
}

/// Active PDOs plus the client links, by node id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub pdos: Vec<u32>,
    pub assignments: Vec<AssignmentRecord>,
}

impl SolutionDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution document serializes")
    }
}

/// A design resolved against a map: positions are candidate / client slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Active candidate slots, ascending.
    pub pdos: Vec<usize>,
    /// Per client slot, the serving candidate slot.
    pub assignment: Vec<Option<usize>>,
}

impl Solution {
    pub fn empty(map: &NetworkMap) -> Self {
        Self { pdos: Vec::new(), assignment: vec![None; map.client_count()] }
    }

    pub fn from_genotype(genotype: &Genotype, map: &NetworkMap) -> Result<Self> {
        let pdos = genotype.active_slots().collect();
        let assignment = genotype
            .assignment
            .iter()
            .map(|a| match a {
                None => Ok(None),
                Some(id) => map
                    .candidate_slot(*id)
                    .map(Some)
                    .ok_or_else(|| Error::Integrity(format!("assignment references non-candidate {id}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self { pdos, assignment })
    }

    pub fn to_genotype(&self, map: &NetworkMap) -> Genotype {
        let mut mask = vec![false; map.candidate_count()];
        for &p in &self.pdos {
            mask[p] = true;
        }
        let assignment = self.assignment.iter().map(|a| a.map(|s| map.candidate(s).id)).collect();
        Genotype { pdo_mask: mask, assignment, stale: false }
    }

    /// Resolves a document, rejecting references to unknown or ill-typed nodes.
    pub fn from_document(doc: &SolutionDocument, map: &NetworkMap) -> Result<Self> {
        let mut pdos = BTreeSet::new();
        for &id in &doc.pdos {
            let id = NodeId(id);
            let slot = map.candidate_slot(id).ok_or_else(|| match map.node(id) {
                None => Error::Integrity(format!("pdo {id} is not a node of the map")),
                Some(_) => Error::Integrity(format!("pdo {id} is not an equipment candidate")),
            })?;
            if !pdos.insert(slot) {
                return Err(Error::Integrity(format!("pdo {id} listed twice")));
            }
        }
        let mut assignment = vec![None; map.client_count()];
        let mut seen = HashSet::new();
        for rec in &doc.assignments {
            let cid = NodeId(rec.client);
            let c = map.client_slot(cid).ok_or_else(|| match map.node(cid) {
                None => Error::Integrity(format!("client {cid} is not a node of the map")),
                Some(_) => Error::Integrity(format!("node {cid} is not a client")),
            })?;
            if !seen.insert(c) {
                return Err(Error::Integrity(format!("client {cid} assigned twice")));
            }
            if rec.pdo < 0 {
                continue;
            }
            let pid = u32::try_from(rec.pdo)
                .map(NodeId)
                .map_err(|_| Error::Integrity(format!("client {cid}: invalid pdo id {}", rec.pdo)))?;
            let slot = map
                .candidate_slot(pid)
                .ok_or_else(|| Error::Integrity(format!("client {cid} assigned to unknown pdo {pid}")))?;
            if !pdos.contains(&slot) {
                return Err(Error::Integrity(format!(
                    "client {cid} assigned to pdo {pid}, which is not listed in pdos"
                )));
            }
            assignment[c] = Some(slot);
        }
        Ok(Self { pdos: pdos.into_iter().collect(), assignment })
    }

    pub fn to_document(&self, map: &NetworkMap) -> SolutionDocument {
        SolutionDocument {
            pdos: self.pdos.iter().map(|&s| map.candidate(s).id.0).collect(),
            assignments: self
                .assignment
                .iter()
                .enumerate()
                .map(|(c, a)| AssignmentRecord {
                    client: map.client(c).id.0,
                    pdo: a.map_or(-1, |s| map.candidate(s).id.0 as i64),
                })
                .collect(),
        }
    }

    pub fn missing(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(|(_, a)| a.is_none()).map(|(c, _)| c)
    }

    /// Assigned demand per candidate slot.
    pub fn loads(&self, map: &NetworkMap) -> Vec<u32> {
        let mut loads = vec![0u32; map.candidate_count()];
        for (c, a) in self.assignment.iter().enumerate() {
            if let Some(s) = a {
                loads[*s] += map.client(c).demand;
            }
        }
        loads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_map;

    fn map() -> NetworkMap {
        parse_map(
            r#"{"nodes": [
                {"id": 0, "x_m": 0, "y_m": 0, "kind": "olt"},
                {"id": 1, "x_m": 10, "y_m": 0, "kind": "candidate"},
                {"id": 2, "x_m": 20, "y_m": 0, "kind": "candidate"},
                {"id": 3, "x_m": 10, "y_m": 5, "kind": "sdu"},
                {"id": 4, "x_m": 20, "y_m": 5, "kind": "mdu", "demand": 3}
            ], "edges": [
                {"a": 0, "b": 1, "length_m": 10, "route": "aerial"},
                {"a": 1, "b": 2, "length_m": 10, "route": "buried"}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn document_resolves_and_roundtrips() {
        let map = map();
        let doc = SolutionDocument::parse(
            r#"{"pdos": [2], "assignments": [{"client": 3, "pdo": 2}, {"client": 4, "pdo": -1}]}"#,
        )
        .unwrap();
        let sol = Solution::from_document(&doc, &map).unwrap();
        assert_eq!(sol.pdos, vec![1]);
        assert_eq!(sol.assignment, vec![Some(1), None]);
        assert_eq!(sol.to_document(&map), doc);
        let g = sol.to_genotype(&map);
        assert_eq!(g.pdo_mask, vec![false, true]);
        assert_eq!(g.assignment, vec![Some(NodeId(2)), None]);
        assert_eq!(Solution::from_genotype(&g, &map).unwrap(), sol);
    }

    #[test]
    fn unknown_references_rejected() {
        let map = map();
        let bad = [
            r#"{"pdos": [9], "assignments": []}"#,
            r#"{"pdos": [3], "assignments": []}"#,
            r#"{"pdos": [1], "assignments": [{"client": 9, "pdo": 1}]}"#,
            r#"{"pdos": [1], "assignments": [{"client": 3, "pdo": 2}]}"#,
            r#"{"pdos": [1], "assignments": [{"client": 1, "pdo": 1}]}"#,
            r#"{"pdos": [1], "assignments": [{"client": 3, "pdo": 1}, {"client": 3, "pdo": 1}]}"#,
        ];
        for text in bad {
            let doc = SolutionDocument::parse(text).unwrap();
            assert!(matches!(Solution::from_document(&doc, &map), Err(Error::Integrity(_))), "{text}");
        }
    }

    #[test]
    fn unlisted_clients_are_unassigned() {
        let map = map();
        let doc = SolutionDocument::parse(r#"{"pdos": [], "assignments": []}"#).unwrap();
        let sol = Solution::from_document(&doc, &map).unwrap();
        assert_eq!(sol.missing().count(), 2);
        assert_eq!(sol.loads(&map), vec![0, 0]);
    }
}

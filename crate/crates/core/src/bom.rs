//! Splitter and distribution-cable bill of materials for a finished design.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::NodeId;
use crate::paths::shortest_path;
use crate::solution::Solution;

/// Fibre demand per branch, keyed by the first node after the OLT.
pub fn branch_demands(solution: &Solution, inst: &Instance) -> Result<BTreeMap<NodeId, u64>> {
    let map = &inst.map;
    let root = map.root().id;
    let mut out = BTreeMap::new();
    for (c, a) in solution.assignment.iter().enumerate() {
        let Some(s) = *a else { continue };
        let pdo = map.candidate(s).id;
        let path = shortest_path(map, &inst.paths, pdo)?;
        let edge = path.root_edge().ok_or_else(|| {
            Error::Consistency(format!("client {} is on no branch (pdo {pdo} has an empty route)", map.client(c).id))
        })?;
        let e = &map.edges()[edge];
        let first_hop = if e.a == root {
            e.b
        } else if e.b == root {
            e.a
        } else {
            return Err(Error::Consistency(format!("route of pdo {pdo} does not end at the olt")));
        };
        *out.entry(first_hop).or_insert(0) += map.client(c).demand as u64;
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CableSelection {
    /// Fibre capacity -> number of cables.
    pub cables: BTreeMap<u32, u32>,
    pub capacity: u64,
    /// Unused fibres.
    pub waste: u64,
}

/// Covers `demand` fibres: as many of the largest cable as fit entirely, then
/// the smallest single cable that covers the remainder.
pub fn select_cables(demand: u64, available: &[u32]) -> Result<CableSelection> {
    let mut caps: Vec<u32> = available.to_vec();
    caps.sort_unstable();
    let &largest = caps.last().ok_or_else(|| Error::Config("empty cable capacity list".into()))?;
    if caps[0] == 0 {
        return Err(Error::Config("cable capacity 0".into()));
    }
    let mut out = CableSelection::default();
    let full = demand / largest as u64;
    if full > 0 {
        out.cables.insert(largest, full as u32);
    }
    let rest = demand % largest as u64;
    if rest > 0 {
        let pick = caps.iter().copied().find(|&c| c as u64 >= rest).expect("largest covers remainder");
        *out.cables.entry(pick).or_insert(0) += 1;
    }
    out.capacity = out.cables.iter().map(|(c, n)| *c as u64 * *n as u64).sum();
    out.waste = out.capacity - demand;
    Ok(out)
}

/// Number of 1:`ratio` splitters needed for `total_demand` fibres.
pub fn select_splitters(total_demand: u64, ratio: u32) -> Result<u64> {
    if ratio == 0 {
        return Err(Error::Argument("split ratio must be positive".into()));
    }
    Ok(total_demand.div_ceil(ratio as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchBill {
    pub first_hop: NodeId,
    pub demand: u64,
    pub cables: CableSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquipmentBill {
    pub total_demand: u64,
    pub split_ratio: u32,
    /// Ratio -> count.
    pub splitters: BTreeMap<u32, u64>,
    /// Fibre capacity -> count, over all branches.
    pub cables: BTreeMap<u32, u32>,
    pub branches: Vec<BranchBill>,
}

impl EquipmentBill {
    pub fn spare_fibres(&self) -> u64 {
        self.branches.iter().map(|b| b.cables.waste).sum()
    }
}

pub fn equipment_bill(solution: &Solution, inst: &Instance) -> Result<EquipmentBill> {
    let ratio = inst.rules.split_ratio;
    let demands = branch_demands(solution, inst)?;
    let total: u64 = demands.values().sum();
    let mut cables = BTreeMap::new();
    let mut branches = Vec::new();
    for (&first_hop, &demand) in &demands {
        let sel = select_cables(demand, &inst.rules.cable_capacities)?;
        for (c, n) in &sel.cables {
            *cables.entry(*c).or_insert(0) += n;
        }
        branches.push(BranchBill { first_hop, demand, cables: sel });
    }
    let mut splitters = BTreeMap::new();
    let n = select_splitters(total, ratio)?;
    if n > 0 {
        splitters.insert(ratio, n);
    }
    Ok(EquipmentBill { total_demand: total, split_ratio: ratio, splitters, cables, branches })
}

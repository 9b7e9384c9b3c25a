//! Hard-constraint checks over a resolved design.

use serde::Serialize;

use crate::error::Result;
use crate::fitness::union_for;
use crate::instance::Instance;
use crate::model::NodeId;
use crate::paths::{segments_intersect_with, shortest_path, Segment};
use crate::solution::Solution;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Finding {
    Capacity { pdo: NodeId, assigned: u32, usable: u32 },
    DropRange { client: NodeId, pdo: NodeId, distance_m: f64, limit_m: f64 },
    NetworkRange { client: NodeId, pdo: NodeId, total_m: f64, limit_m: f64 },
    OpticalBudget { client: NodeId, loss_db: f64, margin_db: f64 },
    Intersection { client: NodeId, pdo: NodeId, edge: (NodeId, NodeId) },
    Missing { client: NodeId },
}

impl Finding {
    /// Whether this finding makes the design infeasible under `inst`'s rules.
    pub fn is_hard(&self, inst: &Instance) -> bool {
        match self {
            Finding::Intersection { .. } => inst.rules.intersections_hard,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetMargin {
    pub client: NodeId,
    pub length_m: f64,
    pub cable_loss_db: f64,
    pub splitter_loss_db: f64,
    pub loss_db: f64,
    pub margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortOccupancy {
    pub pdo: NodeId,
    pub used: u32,
    pub limit: u32,
    pub usable: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub findings: Vec<Finding>,
    pub occupancy: Vec<PortOccupancy>,
    pub budget: Vec<BudgetMargin>,
}

impl FeasibilityReport {
    pub fn max_occupancy(&self) -> u32 {
        self.occupancy.iter().map(|o| o.used).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Cable attenuation for `km` of fibre.
pub fn cable_loss_db(km: f64, loss_db_per_km: f64) -> f64 {
    km * loss_db_per_km
}

fn pdo_id(inst: &Instance, slot: usize) -> NodeId {
    inst.map.candidate(slot).id
}

fn served(solution: &Solution) -> impl Iterator<Item = (usize, usize)> + '_ {
    solution.assignment.iter().enumerate().filter_map(|(c, a)| a.map(|s| (c, s)))
}

pub fn check_capacity(solution: &Solution, inst: &Instance) -> Vec<Finding> {
    let usable = inst.usable_ports();
    let loads = solution.loads(&inst.map);
    solution
        .pdos
        .iter()
        .filter(|&&s| loads[s] > usable)
        .map(|&s| Finding::Capacity { pdo: pdo_id(inst, s), assigned: loads[s], usable })
        .collect()
}

pub fn check_drop_range(solution: &Solution, inst: &Instance) -> Vec<Finding> {
    let limit = inst.rules.drop_limit_m;
    served(solution)
        .filter_map(|(c, s)| {
            let d = inst.map.client(c).position.distance(&inst.map.candidate(s).position);
            (d > limit).then(|| Finding::DropRange {
                client: inst.map.client(c).id,
                pdo: pdo_id(inst, s),
                distance_m: d,
                limit_m: limit,
            })
        })
        .collect()
}

/// OLT-to-client cable length: route to the PDO plus the drop.
fn client_length_m(inst: &Instance, c: usize, s: usize) -> Result<f64> {
    let route = shortest_path(&inst.map, &inst.paths, pdo_id(inst, s))?;
    Ok(route.length_m + inst.map.client(c).position.distance(&inst.map.candidate(s).position))
}

/// Flags clients whose total cable length exceeds the network range (inclusive bound).
pub fn check_network_range(solution: &Solution, inst: &Instance) -> Result<Vec<Finding>> {
    let limit = inst.rules.network_range_m;
    let mut out = Vec::new();
    for (c, s) in served(solution) {
        let total = client_length_m(inst, c, s)?;
        if total > limit {
            out.push(Finding::NetworkRange {
                client: inst.map.client(c).id,
                pdo: pdo_id(inst, s),
                total_m: total,
                limit_m: limit,
            });
        }
    }
    Ok(out)
}

/// Per served client loss and margin against the budget; negative margins are findings.
pub fn check_optical_budget(solution: &Solution, inst: &Instance) -> Result<(Vec<BudgetMargin>, Vec<Finding>)> {
    let rules = &inst.rules;
    let splitter = rules.splitter_loss()?;
    let mut margins = Vec::new();
    let mut findings = Vec::new();
    for (c, s) in served(solution) {
        let length_m = client_length_m(inst, c, s)?;
        let cable = cable_loss_db(length_m / 1000.0, rules.fiber_loss_db_per_km);
        let loss = cable + splitter;
        let m = BudgetMargin {
            client: inst.map.client(c).id,
            length_m,
            cable_loss_db: cable,
            splitter_loss_db: splitter,
            loss_db: loss,
            margin_db: rules.budget_db - loss,
        };
        if m.margin_db < 0.0 {
            findings.push(Finding::OpticalBudget { client: m.client, loss_db: loss, margin_db: m.margin_db });
        }
        margins.push(m);
    }
    Ok((margins, findings))
}

/// Every served drop against every distribution edge in use.
pub fn check_intersections(solution: &Solution, inst: &Instance) -> Result<Vec<Finding>> {
    let map = &inst.map;
    let union = union_for(inst, &solution.pdos)?;
    let edges: Vec<(Segment, (NodeId, NodeId))> = union
        .edges
        .iter()
        .map(|&e| {
            let edge = &map.edges()[e];
            let a = map.node(edge.a).expect("edge endpoint").position;
            let b = map.node(edge.b).expect("edge endpoint").position;
            (Segment::new(a, b), (edge.a, edge.b))
        })
        .filter(|(seg, _)| seg.a != seg.b)
        .collect();
    let mut out = Vec::new();
    for (c, s) in served(solution) {
        let client = map.client(c);
        let pdo = map.candidate(s);
        if client.position == pdo.position {
            continue;
        }
        let drop = Segment::new(client.position, pdo.position);
        for (seg, ends) in &edges {
            if segments_intersect_with(drop, *seg, inst.rules.intersection_mode)? {
                out.push(Finding::Intersection { client: client.id, pdo: pdo.id, edge: *ends });
            }
        }
    }
    Ok(out)
}

pub fn check_coverage(solution: &Solution, inst: &Instance) -> Vec<Finding> {
    solution.missing().map(|c| Finding::Missing { client: inst.map.client(c).id }).collect()
}

fn occupancy(solution: &Solution, inst: &Instance) -> Vec<PortOccupancy> {
    let loads = solution.loads(&inst.map);
    solution
        .pdos
        .iter()
        .map(|&s| PortOccupancy {
            pdo: pdo_id(inst, s),
            used: loads[s],
            limit: inst.rules.port_limit,
            usable: inst.usable_ports(),
        })
        .collect()
}

/// Runs every check. The design is feasible iff no hard finding remains.
pub fn validate(solution: &Solution, inst: &Instance) -> Result<FeasibilityReport> {
    let mut findings = check_coverage(solution, inst);
    findings.extend(check_capacity(solution, inst));
    findings.extend(check_drop_range(solution, inst));
    findings.extend(check_network_range(solution, inst)?);
    let (budget, optical) = check_optical_budget(solution, inst)?;
    findings.extend(optical);
    findings.extend(check_intersections(solution, inst)?);
    let feasible = findings.iter().all(|f| !f.is_hard(inst));
    Ok(FeasibilityReport { feasible, findings, occupancy: occupancy(solution, inst), budget })
}

/// Same verdict as [`validate`] without building the report; skips the
/// crossing scan unless crossings are hard.
pub(crate) fn hard_checks_pass(solution: &Solution, inst: &Instance) -> Result<bool> {
    if solution.missing().next().is_some()
        || !check_capacity(solution, inst).is_empty()
        || !check_drop_range(solution, inst).is_empty()
    {
        return Ok(false);
    }
    let rules = &inst.rules;
    let splitter = rules.splitter_loss()?;
    for (c, s) in served(solution) {
        let length = client_length_m(inst, c, s)?;
        if length > rules.network_range_m
            || rules.budget_db - splitter - cable_loss_db(length / 1000.0, rules.fiber_loss_db_per_km) < 0.0
        {
            return Ok(false);
        }
    }
    if rules.intersections_hard && !check_intersections(solution, inst)?.is_empty() {
        return Ok(false);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MapEdge, MapNode, NetworkMap, NodeKind, Point, RouteKind};
    use crate::rules::{BusinessRules, IntersectionMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn node(id: u32, x: f64, y: f64, kind: NodeKind, demand: u32) -> MapNode {
        MapNode { id: NodeId(id), position: Point::new(x, y), kind, demand }
    }

    fn edge(a: u32, b: u32, len: f64) -> MapEdge {
        MapEdge { a: NodeId(a), b: NodeId(b), length_m: len, route: RouteKind::Aerial }
    }

    /// Star of PDOs, each with `loads[i]` SDUs stacked 1 m apart above it.
    fn star(loads: &[u32], rules: BusinessRules) -> (Instance, Solution) {
        let mut nodes = vec![node(0, 0.0, 0.0, NodeKind::OltRoot, 0)];
        let mut edges = Vec::new();
        let mut next = 1000;
        let mut assignment = Vec::new();
        for (i, &n) in loads.iter().enumerate() {
            let id = i as u32 + 1;
            let x = 200.0 * (i as f64 + 1.0);
            nodes.push(node(id, x, 0.0, NodeKind::EquipmentCandidate, 0));
            edges.push(edge(0, id, x));
            for k in 0..n {
                nodes.push(node(next, x, 1.0 + k as f64, NodeKind::ClientSdu, 1));
                next += 1;
                assignment.push(Some(i));
            }
        }
        let inst = Instance::new(NetworkMap::new(nodes, edges).unwrap(), rules).unwrap();
        (inst, Solution { pdos: (0..loads.len()).collect(), assignment })
    }

    #[test]
    fn capacity_boundary() {
        let (inst, sol) = star(&[11], BusinessRules::default());
        assert!(check_capacity(&sol, &inst).is_empty());
        let (inst, sol) = star(&[12], BusinessRules::default());
        assert_eq!(check_capacity(&sol, &inst), vec![Finding::Capacity { pdo: NodeId(1), assigned: 12, usable: 11 }]);
    }

    #[test]
    fn reported_occupancies_pass() {
        let (inst, sol) = star(&[6, 9, 9, 7, 11], BusinessRules::default());
        assert!(check_capacity(&sol, &inst).is_empty());
        let report = validate(&sol, &inst).unwrap();
        assert!(report.feasible, "{:?}", report.findings);
        assert_eq!(report.max_occupancy(), 11);
        assert!(report.occupancy.iter().all(|o| o.limit == 12));
    }

    fn single_drop(dx: f64) -> (Instance, Solution) {
        let map = NetworkMap::new(
            vec![
                node(0, 0.0, 0.0, NodeKind::OltRoot, 0),
                node(1, 0.0, 10.0, NodeKind::EquipmentCandidate, 0),
                node(2, dx, 10.0, NodeKind::ClientSdu, 1),
            ],
            vec![edge(0, 1, 10.0)],
        )
        .unwrap();
        let inst = Instance::new(map, BusinessRules::default()).unwrap();
        (inst, Solution { pdos: vec![0], assignment: vec![Some(0)] })
    }

    #[test]
    fn drop_range_boundary() {
        let (inst, sol) = single_drop(84.9);
        assert!(check_drop_range(&sol, &inst).is_empty());
        let (inst, sol) = single_drop(85.1);
        let f = check_drop_range(&sol, &inst);
        assert_eq!(f.len(), 1);
        assert!(matches!(f[0], Finding::DropRange { distance_m, .. } if (distance_m - 85.1).abs() < 1e-9));
    }

    #[test]
    fn drop_range_fuzz_matches_scalar_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let dx = rng.gen_range(0.5..150.0);
            let (inst, sol) = single_drop(dx);
            assert_eq!(check_drop_range(&sol, &inst).len(), usize::from(dx > 85.0), "{dx}");
        }
    }

    /// Chain of `hops` edges of `edge_m` each, PDO at the end, client `drop_m` beyond it.
    fn chain(hops: u32, edge_m: f64, drop_m: f64) -> (Instance, Solution) {
        let mut nodes = vec![node(0, 0.0, 0.0, NodeKind::OltRoot, 0)];
        let mut edges = Vec::new();
        for i in 1..=hops {
            nodes.push(node(i, i as f64 * edge_m, 0.0, NodeKind::EquipmentCandidate, 0));
            edges.push(edge(i - 1, i, edge_m));
        }
        nodes.push(node(900, hops as f64 * edge_m + drop_m, 0.0, NodeKind::ClientSdu, 1));
        let inst = Instance::new(NetworkMap::new(nodes, edges).unwrap(), BusinessRules::default()).unwrap();
        let last = inst.map.candidate_count() - 1;
        (inst, Solution { pdos: vec![last], assignment: vec![Some(last)] })
    }

    #[test]
    fn network_range_boundaries() {
        let (inst, sol) = chain(4, 4_987.0, 51.0);
        assert!(check_network_range(&sol, &inst).unwrap().is_empty());
        let (inst, sol) = chain(4, 4_987.0, 53.0);
        assert_eq!(check_network_range(&sol, &inst).unwrap().len(), 1);
        // Exactly 20 000 m is allowed.
        let (inst, sol) = chain(5, 3_990.0, 50.0);
        assert!(check_network_range(&sol, &inst).unwrap().is_empty());
        assert!(validate(&sol, &inst).unwrap().feasible);
    }

    #[test]
    fn cable_loss_values() {
        assert!((cable_loss_db(10.0, 0.35) - 3.5).abs() < 1e-12);
        assert_eq!(cable_loss_db(0.0, 0.35), 0.0);
    }

    #[test]
    fn budget_margins_match_hand_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let hops = rng.gen_range(1..6);
            let edge_m = rng.gen_range(10.0..5_000.0);
            let drop_m = rng.gen_range(1.0..80.0);
            let (inst, sol) = chain(hops, edge_m, drop_m);
            let (margins, findings) = check_optical_budget(&sol, &inst).unwrap();
            let km = (hops as f64 * edge_m + drop_m) / 1000.0;
            let want = 28.0 - 20.5 - 0.35 * km;
            assert!((margins[0].margin_db - want).abs() < 1e-9);
            assert_eq!(findings.is_empty(), want >= 0.0);
        }
    }

    #[test]
    fn budget_overrun_is_reported() {
        let rules = BusinessRules { budget_db: 21.0, ..Default::default() };
        let map = chain(2, 1_000.0, 50.0).0.map.clone();
        let inst = Instance::new(map, rules).unwrap();
        let sol = Solution { pdos: vec![1], assignment: vec![Some(1)] };
        let (m, f) = check_optical_budget(&sol, &inst).unwrap();
        assert!((m[0].loss_db - (20.5 + 0.35 * 2.05)).abs() < 1e-9);
        assert_eq!(f.len(), 1);
        assert!(!validate(&sol, &inst).unwrap().feasible);
    }

    fn crossing_scene(rules: BusinessRules) -> (Instance, Solution) {
        // Distribution runs along y = 0 to the PDO at (100, 0); the client sits
        // below the line and is linked to a PDO above it.
        let map = NetworkMap::new(
            vec![
                node(0, 0.0, 0.0, NodeKind::OltRoot, 0),
                node(1, 100.0, 0.0, NodeKind::EquipmentCandidate, 0),
                node(2, 50.0, 30.0, NodeKind::EquipmentCandidate, 0),
                node(3, 50.0, -30.0, NodeKind::ClientSdu, 1),
                node(4, 100.0, 20.0, NodeKind::ClientSdu, 1),
            ],
            vec![edge(0, 1, 100.0), edge(0, 2, 60.0)],
        )
        .unwrap();
        let inst = Instance::new(map, rules).unwrap();
        (inst, Solution { pdos: vec![0, 1], assignment: vec![Some(1), Some(0)] })
    }

    #[test]
    fn crossing_found_and_soft_by_default() {
        let (inst, sol) = crossing_scene(BusinessRules::default());
        let f = check_intersections(&sol, &inst).unwrap();
        assert_eq!(f, vec![Finding::Intersection { client: NodeId(3), pdo: NodeId(2), edge: (NodeId(0), NodeId(1)) }]);
        let report = validate(&sol, &inst).unwrap();
        assert!(report.feasible);
        assert_eq!(report.findings, f);

        let (inst, sol) = crossing_scene(BusinessRules { intersections_hard: true, ..Default::default() });
        let report = validate(&sol, &inst).unwrap();
        assert!(!report.feasible);
        assert_eq!(report.findings, f);
    }

    #[test]
    fn drop_parallel_to_distribution_passes() {
        let (inst, sol) = star(&[3, 2], BusinessRules::default());
        assert!(check_intersections(&sol, &inst).unwrap().is_empty());
    }

    #[test]
    fn random_scenes_match_all_pairs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let mut nodes = vec![node(0, 0.0, 0.0, NodeKind::OltRoot, 0)];
            let mut edges = Vec::new();
            for i in 1..=8u32 {
                nodes.push(node(
                    i,
                    rng.gen_range(-100.0..100.0),
                    rng.gen_range(-100.0..100.0),
                    NodeKind::EquipmentCandidate,
                    0,
                ));
                edges.push(edge(rng.gen_range(0..i), i, 50.0));
            }
            for i in 0..10u32 {
                nodes.push(node(
                    100 + i,
                    rng.gen_range(-100.0..100.0),
                    rng.gen_range(-100.0..100.0),
                    NodeKind::ClientSdu,
                    1,
                ));
            }
            let rules = BusinessRules { drop_limit_m: 400.0, port_limit: 20, ..Default::default() };
            let inst = Instance::new(NetworkMap::new(nodes, edges).unwrap(), rules).unwrap();
            let pdos: Vec<usize> = (0..8).filter(|_| rng.gen_bool(0.6)).collect();
            if pdos.is_empty() {
                continue;
            }
            let assignment: Vec<Option<usize>> = (0..10).map(|_| Some(pdos[rng.gen_range(0..pdos.len())])).collect();
            let sol = Solution { pdos: pdos.clone(), assignment: assignment.clone() };

            // Oracle: collect used edges by walking every PDO's route, then test all pairs
            // with a plain floating-point cross-product sign test.
            let mut used = std::collections::BTreeSet::new();
            for &p in &pdos {
                used.extend(
                    shortest_path(&inst.map, &inst.paths, inst.map.candidate(p).id).unwrap().edges.iter().copied(),
                );
            }
            let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
            let mut want = 0;
            for (c, a) in assignment.iter().enumerate() {
                let p = inst.map.client(c).position;
                let q = inst.map.candidate(a.unwrap()).position;
                for &e in &used {
                    let ed = &inst.map.edges()[e];
                    let r = inst.map.node(ed.a).unwrap().position;
                    let s = inst.map.node(ed.b).unwrap().position;
                    let d1 = cross(p, q, r);
                    let d2 = cross(p, q, s);
                    let d3 = cross(r, s, p);
                    let d4 = cross(r, s, q);
                    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                        want += 1;
                    }
                }
            }
            assert_eq!(check_intersections(&sol, &inst).unwrap().len(), want);
            let any = BusinessRules { intersection_mode: IntersectionMode::AnyContact, ..inst.rules.clone() };
            let inst_any = Instance::new(inst.map.clone(), any).unwrap();
            assert!(check_intersections(&sol, &inst_any).unwrap().len() >= want);
        }
    }

    #[test]
    fn empty_solution_on_clientless_map_is_feasible() {
        let map = NetworkMap::new(
            vec![node(0, 0.0, 0.0, NodeKind::OltRoot, 0), node(1, 5.0, 0.0, NodeKind::EquipmentCandidate, 0)],
            vec![edge(0, 1, 5.0)],
        )
        .unwrap();
        let inst = Instance::new(map, BusinessRules::default()).unwrap();
        let report = validate(&Solution::empty(&inst.map), &inst).unwrap();
        assert!(report.feasible);
        assert!(report.findings.is_empty());
    }

    #[test]
    fn single_injected_violation_is_the_only_finding() {
        let (inst, mut sol) = star(&[2, 2], BusinessRules::default());
        assert!(validate(&sol, &inst).unwrap().feasible);
        sol.assignment[3] = None;
        let report = validate(&sol, &inst).unwrap();
        assert!(!report.feasible);
        assert_eq!(report.findings, vec![Finding::Missing { client: NodeId(1003) }]);
        assert!(!hard_checks_pass(&sol, &inst).unwrap());
    }
}

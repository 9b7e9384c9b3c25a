//! Material cost and penalized fitness of a genotype.
//!
//! `c_mat = cost_drop * drop + cost_dist * dist + cost_pdo * n_pdo` and
//! `fitness = c_mat + missing * penalty`. Drop meters of MDU links are scaled by
//! the MDU factor and buried route meters by the buried multiplier before
//! pricing; the reported meters stay physical.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ga::{Genotype, Individual};
use crate::instance::Instance;
use crate::model::NodeKind;
use crate::paths::{distribution_union, shortest_path, DistributionUnion};
use crate::solution::Solution;
use crate::validator;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    /// Active PDOs (mask bits set), used or not.
    pub n_pdo: usize,
    /// Physical drop cable.
    pub drop_m: f64,
    /// Drop meters with MDU links scaled, as priced.
    pub drop_weighted_m: f64,
    /// Physical distribution cable (edge union).
    pub dist_m: f64,
    /// Distribution meters with buried edges scaled, as priced.
    pub dist_weighted_m: f64,
    pub drop_cost: f64,
    pub dist_cost: f64,
    pub pdo_cost: f64,
    pub c_mat: f64,
    pub h_missing: usize,
    pub penalty_cost: f64,
    /// Drop/distribution crossings; only counted when they affect fitness.
    pub intersections: usize,
    pub fitness: f64,
}

pub(crate) fn union_for(inst: &Instance, active: &[usize]) -> Result<DistributionUnion> {
    let paths = active
        .iter()
        .map(|&s| shortest_path(&inst.map, &inst.paths, inst.map.candidate(s).id))
        .collect::<Result<Vec<_>>>()?;
    Ok(distribution_union(&inst.map, paths.iter().map(|p| p.as_ref()), inst.rules.buried_cost_multiplier))
}

fn solution_cost(solution: &Solution, inst: &Instance) -> Result<CostBreakdown> {
    let rules = &inst.rules;
    let mut out = CostBreakdown { n_pdo: solution.pdos.len(), ..Default::default() };
    for (c, a) in solution.assignment.iter().enumerate() {
        let client = inst.map.client(c);
        match a {
            Some(s) => {
                let d = client.position.distance(&inst.map.candidate(*s).position);
                out.drop_m += d;
                out.drop_weighted_m += match client.kind {
                    NodeKind::ClientMdu => d * rules.mdu_drop_factor,
                    _ => d,
                };
            }
            None => out.h_missing += 1,
        }
    }
    let union = union_for(inst, &solution.pdos)?;
    out.dist_m = union.length_m;
    out.dist_weighted_m = union.weighted_length_m;
    out.drop_cost = rules.cost_drop_per_m * out.drop_weighted_m;
    out.dist_cost = rules.cost_dist_per_m * out.dist_weighted_m;
    out.pdo_cost = rules.cost_pdo * out.n_pdo as f64;
    out.c_mat = out.drop_cost + out.dist_cost + out.pdo_cost;
    out.fitness = out.c_mat;
    Ok(out)
}

/// Material cost only; `fitness` equals `c_mat` and the missing count is
/// reported but not priced.
pub fn material_cost(genotype: &Genotype, inst: &Instance) -> Result<CostBreakdown> {
    if genotype.stale {
        return Err(Error::State("genotype must be repaired before evaluation".into()));
    }
    solution_cost(&Solution::from_genotype(genotype, &inst.map)?, inst)
}

/// Full cost of a resolved solution, penalties included.
pub fn solution_fitness(solution: &Solution, inst: &Instance) -> Result<CostBreakdown> {
    let rules = &inst.rules;
    let mut cost = solution_cost(solution, inst)?;
    cost.penalty_cost = cost.h_missing as f64 * rules.penalty();
    if rules.intersection_penalty > 0.0 || rules.intersections_hard {
        cost.intersections = validator::check_intersections(solution, inst)?.len();
        cost.penalty_cost += cost.intersections as f64 * rules.intersection_penalty;
    }
    cost.fitness = cost.c_mat + cost.penalty_cost;
    Ok(cost)
}

/// Prices a repaired genotype and attaches its feasibility.
pub fn evaluate(genotype: Genotype, inst: &Instance) -> Result<Individual> {
    if genotype.stale {
        return Err(Error::State("genotype must be repaired before evaluation".into()));
    }
    let solution = Solution::from_genotype(&genotype, &inst.map)?;
    let cost = solution_fitness(&solution, inst)?;
    let feasible = cost.h_missing == 0 && validator::hard_checks_pass(&solution, inst)?;
    Ok(Individual { genotype, cost, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::repair;
    use crate::model::{MapEdge, MapNode, NetworkMap, NodeId, Point, RouteKind};
    use crate::rules::BusinessRules;

    fn node(id: u32, x: f64, y: f64, kind: NodeKind, demand: u32) -> MapNode {
        MapNode { id: NodeId(id), position: Point::new(x, y), kind, demand }
    }

    fn line_instance(rules: BusinessRules) -> Instance {
        // olt -- 1 (aerial 50) -- 2 (buried 30); one SDU near each, one MDU near 2.
        let map = NetworkMap::new(
            vec![
                node(0, 0.0, 0.0, NodeKind::OltRoot, 0),
                node(1, 50.0, 0.0, NodeKind::EquipmentCandidate, 0),
                node(2, 80.0, 0.0, NodeKind::EquipmentCandidate, 0),
                node(10, 50.0, 10.0, NodeKind::ClientSdu, 1),
                node(11, 80.0, 20.0, NodeKind::ClientSdu, 1),
                node(12, 80.0, -5.0, NodeKind::ClientMdu, 4),
            ],
            vec![
                MapEdge { a: NodeId(0), b: NodeId(1), length_m: 50.0, route: RouteKind::Aerial },
                MapEdge { a: NodeId(1), b: NodeId(2), length_m: 30.0, route: RouteKind::Buried },
            ],
        )
        .unwrap();
        Instance::new(map, rules).unwrap()
    }

    #[test]
    fn single_pdo_hand_computation() {
        let map = NetworkMap::new(
            vec![
                node(0, 0.0, 0.0, NodeKind::OltRoot, 0),
                node(1, 0.0, 0.0001, NodeKind::EquipmentCandidate, 0),
                node(2, 10.0, 0.0001, NodeKind::ClientSdu, 1),
            ],
            vec![MapEdge { a: NodeId(0), b: NodeId(1), length_m: 1e-9, route: RouteKind::Aerial }],
        )
        .unwrap();
        let inst = Instance::new(map, BusinessRules::default()).unwrap();
        let g = repair(Genotype::from_mask(vec![true]), &inst);
        let ind = evaluate(g, &inst).unwrap();
        assert!((ind.cost.c_mat - 320.0).abs() < 1e-6, "{}", ind.cost.c_mat);
        assert_eq!(ind.cost.fitness, ind.cost.c_mat);
        assert!(ind.feasible);
    }

    #[test]
    fn empty_mask_costs_nothing_but_penalties() {
        let inst = line_instance(BusinessRules::default());
        let g = repair(Genotype::from_mask(vec![false, false]), &inst);
        let cost = material_cost(&g, &inst).unwrap();
        assert_eq!(cost.c_mat, 0.0);
        let ind = evaluate(g, &inst).unwrap();
        assert_eq!(ind.cost.h_missing, 3);
        assert_eq!(ind.cost.fitness, 900.0);
        assert!(!ind.feasible);
    }

    #[test]
    fn mdu_factor_and_buried_multiplier_scale_cost_not_meters() {
        let inst = line_instance(BusinessRules::default());
        let g = repair(Genotype::from_mask(vec![true, true]), &inst);
        let cost = material_cost(&g, &inst).unwrap();
        assert_eq!(cost.n_pdo, 2);
        assert_eq!(cost.h_missing, 0);
        assert_eq!(cost.drop_m, 10.0 + 20.0 + 5.0);
        assert_eq!(cost.drop_weighted_m, 10.0 + 20.0 + 50.0);
        assert_eq!(cost.dist_m, 80.0);
        assert_eq!(cost.dist_weighted_m, 50.0 + 60.0);
        assert_eq!(cost.c_mat, 2.0 * 80.0 + 5.0 * 110.0 + 600.0);
    }

    #[test]
    fn missing_client_adds_one_penalty() {
        let inst = line_instance(BusinessRules { drop_limit_m: 25.0, ..Default::default() });
        let g = repair(Genotype::from_mask(vec![true, false]), &inst);
        let ind = evaluate(g, &inst).unwrap();
        // Only the SDU at node 10 is within 25 m of candidate 1.
        assert_eq!(ind.cost.h_missing, 2);
        assert_eq!(ind.cost.fitness, ind.cost.c_mat + 2.0 * 300.0);
    }

    #[test]
    fn stale_genotype_rejected() {
        let inst = line_instance(BusinessRules::default());
        let g = Genotype::from_mask(vec![true, true]);
        assert!(matches!(evaluate(g, &inst), Err(Error::State(_))));
    }
}

//! Reference designs: a coverage-greedy heuristic and an exhaustive optimum
//! for very small instances.

use crate::bench::flow::MinCostFlow;
use crate::error::{Error, Result};
use crate::fitness::evaluate;
use crate::ga::{repair_with, Genotype, Individual};
use crate::instance::Instance;
use crate::model::{NodeKind, RouteKind};
use crate::paths::shortest_path;

pub const ORACLE_MAX_CANDIDATES: usize = 12;
pub const ORACLE_MAX_CLIENTS: usize = 10;

/// Opens PDOs one at a time, each time the candidate whose free ports would
/// take the most still-unserved demand (ties to the lower slot), until no
/// candidate adds coverage. Clients are then allocated as in the GA, without
/// the swap search.
pub fn greedy_baseline(inst: &Instance) -> Result<Individual> {
    let n = inst.map.candidate_count();
    let usable = inst.usable_ports();
    // Per candidate: in-range clients, nearest first.
    let mut reach: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    for c in 0..inst.map.client_count() {
        for link in inst.drops.links(c) {
            reach[link.candidate].push((link.distance_m, c));
        }
    }
    for r in &mut reach {
        r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    let take = |slot: usize, served: &[bool]| -> (u32, Vec<usize>) {
        let mut load = 0;
        let mut taken = Vec::new();
        for &(_, c) in &reach[slot] {
            let d = inst.demand(c);
            if !served[c] && load + d <= usable {
                load += d;
                taken.push(c);
            }
        }
        (load, taken)
    };

    let mut mask = vec![false; n];
    let mut served = vec![false; inst.map.client_count()];
    loop {
        let mut best: Option<(u32, usize)> = None;
        for slot in (0..n).filter(|&s| !mask[s]) {
            let (cover, _) = take(slot, &served);
            if cover > 0 && best.is_none_or(|(b, _)| cover > b) {
                best = Some((cover, slot));
            }
        }
        let Some((_, slot)) = best else { break };
        mask[slot] = true;
        for c in take(slot, &served).1 {
            served[c] = true;
        }
    }
    evaluate(repair_with(Genotype::from_mask(mask), inst, false), inst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub fitness: f64,
    pub pdo_mask: Vec<bool>,
    pub assignment: Vec<Option<usize>>,
}

/// Exact minimum fitness by enumerating every PDO subset. For each subset the
/// MDU placements are enumerated and the SDUs are assigned by min-cost flow,
/// with a bypass arc priced at the missing-client penalty.
///
/// Crossings are not priced, so a nonzero intersection penalty is rejected.
pub fn brute_force_oracle(inst: &Instance) -> Result<OracleResult> {
    let map = &inst.map;
    let rules = &inst.rules;
    let (n, m) = (map.candidate_count(), map.client_count());
    if n > ORACLE_MAX_CANDIDATES || m > ORACLE_MAX_CLIENTS {
        return Err(Error::Size(format!(
            "oracle handles at most {ORACLE_MAX_CANDIDATES} candidates and {ORACLE_MAX_CLIENTS} clients, got {n} and {m}"
        )));
    }
    if rules.intersection_penalty > 0.0 {
        return Err(Error::Config("oracle does not price intersections".into()));
    }
    let usable = inst.usable_ports();
    let penalty = rules.penalty();
    let routes = (0..n).map(|s| shortest_path(map, &inst.paths, map.candidate(s).id)).collect::<Result<Vec<_>>>()?;
    let link_cost = |c: usize, dist: f64| {
        let f = if map.client(c).kind == NodeKind::ClientMdu { rules.mdu_drop_factor } else { 1.0 };
        rules.cost_drop_per_m * dist * f
    };
    let mdus: Vec<usize> = (0..m).filter(|&c| map.client(c).kind == NodeKind::ClientMdu).collect();
    let sdus: Vec<usize> = (0..m).filter(|&c| map.client(c).kind != NodeKind::ClientMdu).collect();

    let mut best: Option<OracleResult> = None;
    for bits in 0u32..(1 << n) {
        let mask: Vec<bool> = (0..n).map(|s| bits >> s & 1 == 1).collect();
        let mut used = vec![false; map.edges().len()];
        for s in (0..n).filter(|&s| mask[s]) {
            for &e in &routes[s].edges {
                used[e] = true;
            }
        }
        let dist_weighted: f64 = map
            .edges()
            .iter()
            .zip(&used)
            .filter(|(_, u)| **u)
            .map(|(e, _)| match e.route {
                RouteKind::Aerial => e.length_m,
                RouteKind::Buried => e.length_m * rules.buried_cost_multiplier,
            })
            .sum();
        let fixed = rules.cost_pdo * bits.count_ones() as f64 + rules.cost_dist_per_m * dist_weighted;
        if best.as_ref().is_some_and(|b| fixed >= b.fitness) {
            continue;
        }

        // MDU placements: None or any active in-range PDO with room.
        let options: Vec<Vec<Option<usize>>> = mdus
            .iter()
            .map(|&c| {
                let mut o = vec![None];
                o.extend(inst.drops.links(c).iter().map(|l| l.candidate).filter(|&s| mask[s]).map(Some));
                o
            })
            .collect();
        let mut choice = vec![0usize; mdus.len()];
        loop {
            let mut load = vec![0u32; n];
            let mut cost = fixed;
            let mut assignment = vec![None; m];
            let mut fits = true;
            for (k, &c) in mdus.iter().enumerate() {
                match options[k][choice[k]] {
                    Some(s) => {
                        load[s] += inst.demand(c);
                        fits &= load[s] <= usable;
                        cost += link_cost(c, inst.drops.distance(c, s).expect("in range"));
                        assignment[c] = Some(s);
                    }
                    None => cost += penalty,
                }
            }
            if fits {
                // Nodes: source, sink, SDUs, candidates.
                let (src, sink) = (0, 1);
                let mut net = MinCostFlow::new(2 + sdus.len() + n);
                let mut arcs = Vec::new();
                for (i, &c) in sdus.iter().enumerate() {
                    net.add_edge(src, 2 + i, 1, 0.0);
                    net.add_edge(2 + i, sink, 1, penalty);
                    for l in inst.drops.links(c).iter().filter(|l| mask[l.candidate]) {
                        let id = net.add_edge(2 + i, 2 + sdus.len() + l.candidate, 1, link_cost(c, l.distance_m));
                        arcs.push((id, c, l.candidate));
                    }
                }
                for s in (0..n).filter(|&s| mask[s]) {
                    net.add_edge(2 + sdus.len() + s, sink, (usable - load[s]) as i64, 0.0);
                }
                let (_, flow_cost) = net.run(src, sink, sdus.len() as i64);
                cost += flow_cost;
                if best.as_ref().is_none_or(|b| cost < b.fitness) {
                    for &(id, c, s) in &arcs {
                        if net.flow(id) > 0 {
                            assignment[c] = Some(s);
                        }
                    }
                    best = Some(OracleResult { fitness: cost, pdo_mask: mask.clone(), assignment });
                }
            }
            // Next MDU combination.
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    Ok(best.expect("the empty subset is always a candidate"))
}

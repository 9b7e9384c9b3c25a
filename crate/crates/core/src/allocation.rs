//! Client-to-PDO allocation: nearest-PDO first fit, then a hill-climbing pass
//! that swaps drop links among clients not served by their nearest PDO.

use std::collections::VecDeque;

use crate::instance::Instance;

/// Minimum drop-distance gain for a swap to count as an improvement.
const MIN_GAIN_M: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Per client slot, the serving candidate slot.
    pub assignment: Vec<Option<usize>>,
    /// Served clients whose PDO is not the nearest active one.
    pub misplaced: Vec<usize>,
}

/// Assigns clients in ascending slot order to the nearest active PDO in drop
/// range that still has room for the client's whole demand.
pub fn allocate(mask: &[bool], inst: &Instance) -> Allocation {
    let usable = inst.usable_ports();
    let mut load = vec![0u32; mask.len()];
    let mut assignment = vec![None; inst.map.client_count()];
    let mut misplaced = Vec::new();
    for (c, slot) in assignment.iter_mut().enumerate() {
        let demand = inst.demand(c);
        let mut first = true;
        for link in inst.drops.links(c).iter().filter(|l| mask[l.candidate]) {
            if load[link.candidate] + demand <= usable {
                load[link.candidate] += demand;
                *slot = Some(link.candidate);
                if !first {
                    misplaced.push(c);
                }
                break;
            }
            first = false;
        }
    }
    Allocation { assignment, misplaced }
}

/// Sum of physical drop lengths over served clients.
pub fn total_drop_m(assignment: &[Option<usize>], inst: &Instance) -> f64 {
    assignment.iter().enumerate().filter_map(|(c, a)| a.map(|s| drop_m(inst, c, s))).sum()
}

fn drop_m(inst: &Instance, client: usize, slot: usize) -> f64 {
    inst.drops.distance(client, slot).expect("assignment outside drop range")
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Relocate { to: usize },
    Swap { to: usize, other: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub inspected: usize,
    pub accepted: usize,
}

/// Improves `assignment` in place. Starts from the misplaced clients; for each
/// one, tries every active PDO in its drop range, either relocating into free
/// ports or swapping links with a client already on that PDO. The best move
/// that strictly shortens total drop length is applied and the clients it
/// touched are queued for another look. Served clients stay served.
pub fn local_search(
    assignment: &mut [Option<usize>],
    misplaced: &[usize],
    mask: &[bool],
    inst: &Instance,
) -> SearchStats {
    let mut stats = SearchStats::default();
    if misplaced.is_empty() {
        return stats;
    }
    let usable = inst.usable_ports();
    let mut load = vec![0u32; mask.len()];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); mask.len()];
    for (c, a) in assignment.iter().enumerate() {
        if let Some(s) = *a {
            load[s] += inst.demand(c);
            members[s].push(c);
        }
    }

    let mut queue: VecDeque<usize> = misplaced.iter().copied().collect();
    while let Some(c) = queue.pop_front() {
        stats.inspected += 1;
        let Some(current) = assignment[c] else { continue };
        let demand = inst.demand(c);
        let here = drop_m(inst, c, current);

        let mut best: Option<(f64, Move)> = None;
        let mut consider = |gain: f64, mv: Move| {
            if gain > MIN_GAIN_M && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, mv));
            }
        };
        for link in inst.drops.links(c).iter().filter(|l| mask[l.candidate] && l.candidate != current) {
            let to = link.candidate;
            if load[to] + demand <= usable {
                consider(here - link.distance_m, Move::Relocate { to });
            }
            for &other in &members[to] {
                let Some(back) = inst.drops.distance(other, current) else { continue };
                let od = inst.demand(other);
                if load[to] - od + demand > usable || load[current] - demand + od > usable {
                    continue;
                }
                let before = here + drop_m(inst, other, to);
                let after = link.distance_m + back;
                consider(before - after, Move::Swap { to, other });
            }
        }

        let Some((_, mv)) = best else { continue };
        stats.accepted += 1;
        let detach = |members: &mut Vec<Vec<usize>>, slot: usize, client: usize| {
            let pos = members[slot].iter().position(|&x| x == client).expect("member index out of sync");
            members[slot].swap_remove(pos);
        };
        match mv {
            Move::Relocate { to } => {
                detach(&mut members, current, c);
                members[to].push(c);
                load[current] -= demand;
                load[to] += demand;
                assignment[c] = Some(to);
            }
            Move::Swap { to, other } => {
                let od = inst.demand(other);
                detach(&mut members, current, c);
                detach(&mut members, to, other);
                members[to].push(c);
                members[current].push(other);
                load[current] = load[current] - demand + od;
                load[to] = load[to] - od + demand;
                assignment[c] = Some(to);
                assignment[other] = Some(current);
                queue.push_back(other);
            }
        }
        queue.push_back(c);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::flow::MinCostFlow;
    use crate::model::{MapEdge, MapNode, NetworkMap, NodeId, NodeKind, Point, RouteKind};
    use crate::rules::BusinessRules;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(candidates: &[(f64, f64)], clients: &[(f64, f64, u32)], rules: BusinessRules) -> Instance {
        let mut nodes =
            vec![MapNode { id: NodeId(0), position: Point::new(0.0, -1.0), kind: NodeKind::OltRoot, demand: 0 }];
        let mut edges = Vec::new();
        for (i, &(x, y)) in candidates.iter().enumerate() {
            let id = i as u32 + 1;
            nodes.push(MapNode {
                id: NodeId(id),
                position: Point::new(x, y),
                kind: NodeKind::EquipmentCandidate,
                demand: 0,
            });
            edges.push(MapEdge {
                a: NodeId(0),
                b: NodeId(id),
                length_m: 1.0 + x.abs() + y.abs(),
                route: RouteKind::Aerial,
            });
        }
        for (i, &(x, y, d)) in clients.iter().enumerate() {
            let kind = if d == 1 { NodeKind::ClientSdu } else { NodeKind::ClientMdu };
            nodes.push(MapNode { id: NodeId(1000 + i as u32), position: Point::new(x, y), kind, demand: d });
        }
        Instance::new(NetworkMap::new(nodes, edges).unwrap(), rules).unwrap()
    }

    fn check_invariants(inst: &Instance, mask: &[bool], assignment: &[Option<usize>]) {
        let mut load = vec![0; mask.len()];
        for (c, a) in assignment.iter().enumerate() {
            if let Some(s) = *a {
                assert!(mask[s], "client {c} on inactive pdo");
                let d = inst.drops.distance(c, s).expect("out of range");
                assert!(d <= inst.rules.drop_limit_m);
                load[s] += inst.demand(c);
            }
        }
        assert!(load.iter().all(|&l| l <= inst.usable_ports()));
    }

    #[test]
    fn capacity_exactly_met() {
        let clients: Vec<_> = (0..11).map(|i| (i as f64, 10.0, 1)).collect();
        let inst = instance(&[(0.0, 0.0)], &clients, BusinessRules::default());
        let a = allocate(&[true], &inst);
        assert!(a.assignment.iter().all(|x| *x == Some(0)));
        assert!(a.misplaced.is_empty());
    }

    #[test]
    fn twelfth_client_left_out() {
        let clients: Vec<_> = (0..12).map(|i| (i as f64, 10.0, 1)).collect();
        let inst = instance(&[(0.0, 0.0)], &clients, BusinessRules::default());
        let a = allocate(&[true], &inst);
        assert_eq!(a.assignment.iter().filter(|x| x.is_some()).count(), 11);
        assert_eq!(a.assignment[11], None);
        assert!(a.misplaced.is_empty());
    }

    #[test]
    fn full_nearest_pdo_sends_client_to_second() {
        let mut clients: Vec<_> = (0..11).map(|_| (0.0, 5.0, 1)).collect();
        clients.push((0.0, 10.0, 1));
        let inst = instance(&[(0.0, 0.0), (0.0, 40.0)], &clients, BusinessRules::default());
        let a = allocate(&[true, true], &inst);
        assert_eq!(a.assignment[11], Some(1));
        assert_eq!(a.misplaced, vec![11]);
        assert!(allocate(&[true, false], &inst).assignment[11].is_none());
    }

    #[test]
    fn mdu_takes_ports_atomically() {
        let rules = BusinessRules::default();
        let inst = instance(&[(0.0, 0.0), (0.0, 60.0)], &[(0.0, 1.0, 8), (0.0, 2.0, 4), (0.0, 3.0, 3)], rules);
        let a = allocate(&[true, true], &inst);
        assert_eq!(a.assignment, vec![Some(0), Some(1), Some(0)]);
        assert_eq!(a.misplaced, vec![1]);
    }

    fn one_port() -> BusinessRules {
        BusinessRules { port_limit: 1, port_margin: 0.0, ..Default::default() }
    }

    #[test]
    fn skipped_when_nothing_misplaced() {
        let inst = instance(&[(0.0, 0.0), (30.0, 0.0)], &[(0.0, 5.0, 1), (30.0, 5.0, 1)], one_port());
        let mask = [true, true];
        let mut a = allocate(&mask, &inst);
        let before = a.assignment.clone();
        let stats = local_search(&mut a.assignment, &a.misplaced, &mask, &inst);
        assert_eq!(a.assignment, before);
        assert_eq!(stats, SearchStats::default());
    }

    #[test]
    fn crossing_pair_is_swapped() {
        // Client 0 grabs P (10 m) before client 1 (3 m from P) is processed,
        // pushing client 1 onto Q at 37 m.
        let inst = instance(&[(0.0, 0.0), (40.0, 0.0)], &[(10.0, 0.0, 1), (3.0, 0.0, 1)], one_port());
        let mask = [true, true];
        let mut a = allocate(&mask, &inst);
        assert_eq!(a.assignment, vec![Some(0), Some(1)]);
        assert_eq!(a.misplaced, vec![1]);
        let before = total_drop_m(&a.assignment, &inst);
        let stats = local_search(&mut a.assignment, &a.misplaced, &mask, &inst);
        assert_eq!(stats.accepted, 1);
        assert_eq!(a.assignment, vec![Some(1), Some(0)]);
        let after = total_drop_m(&a.assignment, &inst);
        assert!(after < before);
        assert_eq!(after, 30.0 + 3.0);
        check_invariants(&inst, &mask, &a.assignment);
    }

    fn congested(rng: &mut ChaCha8Rng, n_pdo: usize, n_client: usize, mdu: bool) -> Instance {
        let cands: Vec<_> = (0..n_pdo).map(|_| (rng.gen_range(0.0..150.0), rng.gen_range(0.0..150.0))).collect();
        let clients: Vec<_> = (0..n_client)
            .map(|_| {
                let d = if mdu && rng.gen_bool(0.15) { rng.gen_range(2..=4) } else { 1 };
                (rng.gen_range(0.0..150.0), rng.gen_range(0.0..150.0), d)
            })
            .collect();
        let rules = BusinessRules { port_limit: 4, port_margin: 0.0, ..Default::default() };
        instance(&cands, &clients, rules)
    }

    /// Min total drop length that keeps exactly the given clients served.
    fn flow_optimum(inst: &Instance, mask: &[bool], served: &[usize]) -> f64 {
        let n_c = inst.map.candidate_count();
        let src = 0;
        let sink = 1;
        let mut g = MinCostFlow::new(2 + served.len() + n_c);
        for (i, &c) in served.iter().enumerate() {
            g.add_edge(src, 2 + i, 1, 0.0);
            for l in inst.drops.links(c).iter().filter(|l| mask[l.candidate]) {
                g.add_edge(2 + i, 2 + served.len() + l.candidate, 1, l.distance_m);
            }
        }
        for s in 0..n_c {
            g.add_edge(2 + served.len() + s, sink, inst.usable_ports() as i64, 0.0);
        }
        let (flow, cost) = g.run(src, sink, served.len() as i64);
        assert_eq!(flow as usize, served.len());
        cost
    }

    #[test]
    fn search_improves_and_often_reaches_flow_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut optimal = 0;
        let mut with_misplaced = 0;
        for _ in 0..30 {
            let inst = congested(&mut rng, 6, 18, false);
            let mask = vec![true; 6];
            let mut a = allocate(&mask, &inst);
            if !a.misplaced.is_empty() {
                with_misplaced += 1;
            }
            let before = total_drop_m(&a.assignment, &inst);
            local_search(&mut a.assignment, &a.misplaced, &mask, &inst);
            let after = total_drop_m(&a.assignment, &inst);
            assert!(after <= before + 1e-9);
            check_invariants(&inst, &mask, &a.assignment);
            let served: Vec<usize> = (0..a.assignment.len()).filter(|&c| a.assignment[c].is_some()).collect();
            let best = flow_optimum(&inst, &mask, &served);
            assert!(best <= after + 1e-6);
            if (after - best).abs() < 1e-6 {
                optimal += 1;
            }
        }
        assert!(with_misplaced >= 20, "instances not congested enough: {with_misplaced}");
        assert!(optimal >= 15, "only {optimal}/30 at flow optimum");
    }

    #[test]
    fn random_search_runs_preserve_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..300 {
            let inst = congested(&mut rng, 5, 14, true);
            let mask: Vec<bool> = (0..5).map(|_| rng.gen_bool(0.7)).collect();
            let mut a = allocate(&mask, &inst);
            check_invariants(&inst, &mask, &a.assignment);
            let served_before = a.assignment.iter().filter(|x| x.is_some()).count();
            let before = total_drop_m(&a.assignment, &inst);
            local_search(&mut a.assignment, &a.misplaced, &mask, &inst);
            check_invariants(&inst, &mask, &a.assignment);
            assert_eq!(a.assignment.iter().filter(|x| x.is_some()).count(), served_before);
            assert!(total_drop_m(&a.assignment, &inst) <= before + 1e-9);
        }
    }
}

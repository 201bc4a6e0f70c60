//! Graph-level oracles: brute-force chain enumeration, transpose duality of
//! inbound/outbound, handshake degree sums, and SCCs against a
//! Floyd-Warshall reachability oracle.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ownet_core::geo::CityUniverse;
use ownet_core::ingest::{Firm, OwnershipLink, Snapshot};
use ownet_core::netgraph::{OwnershipGraph, ScopeConfig};

const CITIES: [&str; 4] = ["avon", "brook", "carl", "dun"];

fn random_snapshot(rng: &mut StdRng, n_nodes: usize, n_edges: usize) -> Snapshot {
    let mut snap = Snapshot::new(2016);
    for i in 0..n_nodes {
        let city = if rng.random_bool(0.8) {
            Some(CITIES[rng.random_range(0..CITIES.len())].to_string())
        } else {
            None
        };
        snap.insert_firm(Firm {
            firm_id: format!("F{i:04}"),
            name: String::new(),
            lon: 0.0,
            lat: 0.0,
            country: ["XA", "XB", "XZ"][rng.random_range(0..3)].to_string(),
            nace4: "6420".to_string(),
            turnover: if rng.random_bool(0.7) {
                Some(rng.random_range(1.0..1e6))
            } else {
                None
            },
            city_id: city,
        });
    }
    let mut seen = BTreeSet::new();
    while snap.links.len() < n_edges && seen.len() < n_nodes * (n_nodes - 1) {
        let a = rng.random_range(0..n_nodes);
        let b = rng.random_range(0..n_nodes);
        if a == b || !seen.insert((a, b)) {
            continue;
        }
        snap.links.push(OwnershipLink {
            owner_id: format!("F{a:04}"),
            owned_id: format!("F{b:04}"),
            share_pct: rng.random_range(0.01..=100.0),
        });
    }
    snap.sort_links();
    snap
}

fn universe() -> CityUniverse {
    CityUniverse::from_ids(CITIES.map(str::to_string))
}

fn cfg() -> ScopeConfig {
    ScopeConfig::new("avon", "carl", "XA", ["XB".to_string()]).unwrap()
}

#[test]
fn chains_match_ordered_pair_enumeration() {
    let mut rng = StdRng::seed_from_u64(0xc4a1);
    for round in 0..20 {
        let snap = random_snapshot(&mut rng, 100 + round, 300);
        let graph = OwnershipGraph::build(&snap);
        let chains = graph.extract_chains("avon", &universe(), &cfg()).unwrap();

        // O(E^2) oracle over all ordered link pairs sharing an L2 firm.
        let mut expected: Vec<(String, String, String)> = Vec::new();
        for e1 in &snap.links {
            if snap.firms[&e1.owned_id].city_id.as_deref() != Some("avon") {
                continue;
            }
            for e2 in &snap.links {
                if e1.owned_id == e2.owner_id {
                    expected.push((
                        e1.owner_id.clone(),
                        e1.owned_id.clone(),
                        e2.owned_id.clone(),
                    ));
                }
            }
        }
        expected.sort();
        let got: Vec<(String, String, String)> = chains
            .iter()
            .map(|c| {
                (
                    c.l1_id().to_string(),
                    c.l2_id().to_string(),
                    c.l3_id().to_string(),
                )
            })
            .collect();
        assert_eq!(got, expected, "round {round}");

        // Chain-link consistency: sum over L2 firms of indeg x outdeg.
        let product_total: u64 = snap
            .firms
            .values()
            .filter(|f| f.city_id.as_deref() == Some("avon"))
            .map(|f| (graph.in_degree(&f.firm_id) * graph.out_degree(&f.firm_id)) as u64)
            .sum();
        assert_eq!(chains.len() as u64, product_total);
    }
}

#[test]
fn inbound_equals_outbound_on_transposed_graph() {
    let mut rng = StdRng::seed_from_u64(0x7a05);
    for _ in 0..10 {
        let snap = random_snapshot(&mut rng, 80, 200);
        let mut transposed = snap.clone();
        transposed.links = snap
            .links
            .iter()
            .map(|l| OwnershipLink {
                owner_id: l.owned_id.clone(),
                owned_id: l.owner_id.clone(),
                share_pct: l.share_pct,
            })
            .collect();
        transposed.sort_links();

        let g = OwnershipGraph::build(&snap);
        let gt = OwnershipGraph::build(&transposed);
        for city in CITIES {
            let mut inbound: Vec<(String, String)> = g
                .inbound_links(city, &universe())
                .unwrap()
                .iter()
                .map(|l| (l.owner_id.clone(), l.owned_id.clone()))
                .collect();
            let mut outbound_t: Vec<(String, String)> = gt
                .outbound_links(city, &universe())
                .unwrap()
                .iter()
                .map(|l| (l.owned_id.clone(), l.owner_id.clone()))
                .collect();
            inbound.sort();
            outbound_t.sort();
            assert_eq!(inbound, outbound_t);
        }
    }
}

#[test]
fn handshake_degree_sums() {
    let mut rng = StdRng::seed_from_u64(0x4a11d);
    let snap = random_snapshot(&mut rng, 200, 600);
    let g = OwnershipGraph::build(&snap);
    let degree_total: usize = snap
        .firms
        .keys()
        .map(|id| g.in_degree(id) + g.out_degree(id))
        .sum();
    assert_eq!(degree_total, 2 * g.edge_count());
    assert_eq!(g.edge_count(), snap.links.len());
}

#[test]
fn sccs_match_reachability_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5cc);
    for _ in 0..15 {
        let n = rng.random_range(5..50);
        let n_edges = rng.random_range(0..n * 3);
        let snap = random_snapshot(&mut rng, n, n_edges);
        let g = OwnershipGraph::build(&snap);
        let report = g.detect_cycles();

        // Floyd-Warshall boolean reachability on firm indices.
        let ids: Vec<&String> = snap.firms.keys().collect();
        let pos: BTreeMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut reach = vec![vec![false; n]; n];
        for l in &snap.links {
            reach[pos[l.owner_id.as_str()]][pos[l.owned_id.as_str()]] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut oracle_components: BTreeSet<Vec<String>> = BTreeSet::new();
        let mut claimed = vec![false; n];
        for i in 0..n {
            if claimed[i] {
                continue;
            }
            let members: Vec<usize> = (0..n)
                .filter(|&j| i == j || (reach[i][j] && reach[j][i]))
                .collect();
            if members.len() > 1 {
                for &m in &members {
                    claimed[m] = true;
                }
                oracle_components.insert(members.iter().map(|&m| ids[m].clone()).collect());
            }
        }

        let got: BTreeSet<Vec<String>> = report
            .components
            .iter()
            .map(|c| c.members.clone())
            .collect();
        assert_eq!(got, oracle_components);

        // Example cycles actually close along existing edges.
        let edge_set: BTreeSet<(&str, &str)> = snap
            .links
            .iter()
            .map(|l| (l.owner_id.as_str(), l.owned_id.as_str()))
            .collect();
        for component in &report.components {
            let cycle = &component.example_cycle;
            assert!(cycle.len() >= 3, "cycle must visit at least two firms");
            assert_eq!(cycle.first(), cycle.last());
            for pair in cycle.windows(2) {
                assert!(edge_set.contains(&(pair[0].as_str(), pair[1].as_str())));
            }
        }
    }
}

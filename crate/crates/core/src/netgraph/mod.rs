//! Directed ownership graph, geographic scope classification, and the
//! depth-2 control chains (L1 -> L2 -> L3) around a focal city.

pub mod export;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::CityUniverse;
use crate::ingest::{Firm, OwnershipLink, Snapshot};

/// Where a chain endpoint sits relative to the focal frame. Classification
/// is total: every firm maps to exactly one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeoScope {
    FocalCity,
    Capital,
    OtherDomestic,
    EuropeanUnion,
    ExtraEuropean,
}

impl GeoScope {
    pub const ALL: [GeoScope; 5] = [
        GeoScope::FocalCity,
        GeoScope::Capital,
        GeoScope::OtherDomestic,
        GeoScope::EuropeanUnion,
        GeoScope::ExtraEuropean,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            GeoScope::FocalCity => "FOCAL_CITY",
            GeoScope::Capital => "CAPITAL",
            GeoScope::OtherDomestic => "OTHER_DOMESTIC",
            GeoScope::EuropeanUnion => "EUROPEAN_UNION",
            GeoScope::ExtraEuropean => "EXTRA_EUROPEAN",
        }
    }
}

impl std::fmt::Display for GeoScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Parameterises the focal/capital/domestic/EU frame. The EU set is
/// vintage-dated configuration, not hard-coded membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeConfig {
    pub focal_fua_id: String,
    pub capital_fua_id: String,
    pub domestic_country: String,
    pub eu_countries: BTreeSet<String>,
}

impl ScopeConfig {
    pub fn new(
        focal_fua_id: impl Into<String>,
        capital_fua_id: impl Into<String>,
        domestic_country: impl Into<String>,
        eu_countries: impl IntoIterator<Item = String>,
    ) -> Result<Self, GraphError> {
        let cfg = Self {
            focal_fua_id: focal_fua_id.into(),
            capital_fua_id: capital_fua_id.into(),
            domestic_country: domestic_country.into(),
            eu_countries: eu_countries.into_iter().collect(),
        };
        if cfg.focal_fua_id == cfg.capital_fua_id {
            return Err(GraphError::FocalEqualsCapital(cfg.focal_fua_id));
        }
        Ok(cfg)
    }

    /// Post-2020 vintages may have the domestic country outside the EU set;
    /// that is permitted and surfaced here for reporting.
    pub fn domestic_outside_eu(&self) -> bool {
        !self.eu_countries.contains(&self.domestic_country)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("focal and capital city are both '{0}'")]
    FocalEqualsCapital(String),
    #[error("unknown city id '{0}'")]
    UnknownCity(String),
    #[error("EMPTY_SET: scope distribution over an empty link collection")]
    EmptySet,
}

/// Classify one firm. City checks use the assigned FUA; firms outside all
/// FUAs fall back to country-level classification.
pub fn classify_scope(firm: &Firm, cfg: &ScopeConfig) -> GeoScope {
    match firm.city_id.as_deref() {
        Some(city) if city == cfg.focal_fua_id => return GeoScope::FocalCity,
        Some(city) if city == cfg.capital_fua_id => return GeoScope::Capital,
        _ => {}
    }
    if firm.country == cfg.domestic_country {
        GeoScope::OtherDomestic
    } else if cfg.eu_countries.contains(&firm.country) {
        GeoScope::EuropeanUnion
    } else {
        GeoScope::ExtraEuropean
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    owner: u32,
    owned: u32,
}

/// Immutable directed graph over a snapshot's accepted links.
pub struct OwnershipGraph<'a> {
    snapshot: &'a Snapshot,
    ids: Vec<&'a str>,
    index_of: HashMap<&'a str, u32>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
}

impl<'a> OwnershipGraph<'a> {
    /// Build adjacency from every accepted link, exactly once per link.
    pub fn build(snapshot: &'a Snapshot) -> Self {
        let ids: Vec<&str> = snapshot.firms.keys().map(String::as_str).collect();
        let index_of: HashMap<&str, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i as u32))
            .collect();
        let mut edges = Vec::with_capacity(snapshot.links.len());
        let mut out_edges = vec![Vec::new(); ids.len()];
        let mut in_edges = vec![Vec::new(); ids.len()];
        for link in &snapshot.links {
            let owner = index_of[link.owner_id.as_str()];
            let owned = index_of[link.owned_id.as_str()];
            let ei = edges.len() as u32;
            edges.push(Edge { owner, owned });
            out_edges[owner as usize].push(ei);
            in_edges[owned as usize].push(ei);
        }
        Self {
            snapshot,
            ids,
            index_of,
            edges,
            out_edges,
            in_edges,
        }
    }

    pub fn snapshot(&self) -> &'a Snapshot {
        self.snapshot
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degree(&self, firm_id: &str) -> usize {
        self.index_of
            .get(firm_id)
            .map(|&i| self.out_edges[i as usize].len())
            .unwrap_or(0)
    }

    pub fn in_degree(&self, firm_id: &str) -> usize {
        self.index_of
            .get(firm_id)
            .map(|&i| self.in_edges[i as usize].len())
            .unwrap_or(0)
    }

    fn firm_by_index(&self, i: u32) -> &'a Firm {
        &self.snapshot.firms[self.ids[i as usize]]
    }

    fn link_of_edge(&self, ei: u32) -> &'a OwnershipLink {
        &self.snapshot.links[ei as usize]
    }

    fn check_city(&self, city: &str, known: &CityUniverse) -> Result<(), GraphError> {
        if known.contains(city) {
            Ok(())
        } else {
            Err(GraphError::UnknownCity(city.to_string()))
        }
    }

    /// Links whose owned firm sits in `city` (L1 -> L2). A link internal to
    /// the city is both inbound and outbound.
    pub fn inbound_links(
        &self,
        city: &str,
        known: &CityUniverse,
    ) -> Result<Vec<&'a OwnershipLink>, GraphError> {
        self.check_city(city, known)?;
        Ok(self
            .snapshot
            .links
            .iter()
            .filter(|l| self.snapshot.firms[&l.owned_id].city_id.as_deref() == Some(city))
            .collect())
    }

    /// Links whose owner firm sits in `city` (L2 -> L3).
    pub fn outbound_links(
        &self,
        city: &str,
        known: &CityUniverse,
    ) -> Result<Vec<&'a OwnershipLink>, GraphError> {
        self.check_city(city, known)?;
        Ok(self
            .snapshot
            .links
            .iter()
            .filter(|l| self.snapshot.firms[&l.owner_id].city_id.as_deref() == Some(city))
            .collect())
    }

    /// Every (inbound, outbound) pair sharing an L2 firm in the focal city.
    /// L1 = L3 round-trips are kept and flagged. Output is ordered by
    /// (l1_id, l2_id, l3_id).
    pub fn extract_chains(
        &self,
        city: &str,
        known: &CityUniverse,
        cfg: &ScopeConfig,
    ) -> Result<Vec<OwnershipChain<'a>>, GraphError> {
        self.check_city(city, known)?;
        let mut chains = Vec::new();
        for (node, id) in self.ids.iter().enumerate() {
            let l2 = &self.snapshot.firms[*id];
            if l2.city_id.as_deref() != Some(city) {
                continue;
            }
            for &in_edge in &self.in_edges[node] {
                let inbound = self.link_of_edge(in_edge);
                let l1 = self.firm_by_index(self.edges[in_edge as usize].owner);
                let l1_scope = classify_scope(l1, cfg);
                for &out_edge in &self.out_edges[node] {
                    let outbound = self.link_of_edge(out_edge);
                    let l3 = self.firm_by_index(self.edges[out_edge as usize].owned);
                    chains.push(OwnershipChain {
                        inbound,
                        outbound,
                        l2_city: city.to_string(),
                        l1_scope,
                        l3_scope: classify_scope(l3, cfg),
                        roundtrip: l1.firm_id == l3.firm_id,
                    });
                }
            }
        }
        chains.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(chains)
    }

    /// Strongly connected components of size > 1, lowest firm id first.
    /// Chains are fixed-depth so cycles only affect reporting.
    pub fn detect_cycles(&self) -> CycleReport {
        let sccs = self.kosaraju();
        let mut components = Vec::new();
        for scc in sccs {
            if scc.len() < 2 {
                continue;
            }
            let mut members: Vec<String> = scc
                .iter()
                .map(|&i| self.ids[i as usize].to_string())
                .collect();
            members.sort();
            let example_cycle = self.example_cycle(&scc);
            components.push(CycleComponent {
                members,
                example_cycle,
            });
        }
        components.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
        CycleReport { components }
    }

    fn kosaraju(&self) -> Vec<Vec<u32>> {
        let n = self.ids.len();
        let mut visited = vec![false; n];
        let mut order: Vec<u32> = Vec::with_capacity(n);

        // First pass: iterative DFS finish order on the forward graph.
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut stack: Vec<(u32, usize)> = vec![(start as u32, 0)];
            visited[start] = true;
            while let Some((v, cursor)) = stack.pop() {
                let outs = &self.out_edges[v as usize];
                if cursor < outs.len() {
                    stack.push((v, cursor + 1));
                    let next = self.edges[outs[cursor] as usize].owned;
                    if !visited[next as usize] {
                        visited[next as usize] = true;
                        stack.push((next, 0));
                    }
                } else {
                    order.push(v);
                }
            }
        }

        // Second pass: collect components on the reversed graph.
        visited.fill(false);
        let mut comps = Vec::new();
        for &start in order.iter().rev() {
            if visited[start as usize] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            visited[start as usize] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &ei in &self.in_edges[v as usize] {
                    let u = self.edges[ei as usize].owner;
                    if !visited[u as usize] {
                        visited[u as usize] = true;
                        stack.push(u);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// Shortest cycle through the component's lowest-id node, via BFS
    /// restricted to the component. Deterministic: neighbours are explored
    /// in sorted id order.
    fn example_cycle(&self, scc: &[u32]) -> Vec<String> {
        let in_scc: BTreeSet<u32> = scc.iter().copied().collect();
        let start = *scc
            .iter()
            .min_by_key(|&&i| self.ids[i as usize])
            .expect("non-empty scc");

        let mut parent: HashMap<u32, u32> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        let mut closing: Option<u32> = None;
        'bfs: while let Some(v) = queue.pop_front() {
            let mut nexts: Vec<u32> = self.out_edges[v as usize]
                .iter()
                .map(|&ei| self.edges[ei as usize].owned)
                .filter(|n| in_scc.contains(n))
                .collect();
            nexts.sort_by_key(|&n| self.ids[n as usize]);
            for next in nexts {
                if next == start {
                    closing = Some(v);
                    break 'bfs;
                }
                if next != start && !parent.contains_key(&next) {
                    parent.insert(next, v);
                    queue.push_back(next);
                }
            }
        }

        let mut path = vec![start];
        if let Some(mut v) = closing {
            let mut tail = Vec::new();
            while v != start {
                tail.push(v);
                v = parent[&v];
            }
            tail.reverse();
            path.extend(tail);
            path.push(start);
        }
        path.into_iter()
            .map(|i| self.ids[i as usize].to_string())
            .collect()
    }
}

/// An L1 -> L2 -> L3 control path through the focal city.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnershipChain<'a> {
    pub inbound: &'a OwnershipLink,
    pub outbound: &'a OwnershipLink,
    pub l2_city: String,
    pub l1_scope: GeoScope,
    pub l3_scope: GeoScope,
    pub roundtrip: bool,
}

impl OwnershipChain<'_> {
    pub fn l1_id(&self) -> &str {
        &self.inbound.owner_id
    }

    pub fn l2_id(&self) -> &str {
        &self.inbound.owned_id
    }

    pub fn l3_id(&self) -> &str {
        &self.outbound.owned_id
    }

    fn sort_key(&self) -> (&str, &str, &str) {
        (self.l1_id(), self.l2_id(), self.l3_id())
    }
}

/// Chain export CSV: l1_id,l1_scope,l2_id,l3_id,l3_scope,flags.
pub fn chains_csv(chains: &[OwnershipChain<'_>]) -> String {
    let mut out = String::from("l1_id,l1_scope,l2_id,l3_id,l3_scope,flags\n");
    for c in chains {
        let flags = if c.roundtrip { "ROUNDTRIP" } else { "" };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.l1_id(),
            c.l1_scope,
            c.l2_id(),
            c.l3_id(),
            c.l3_scope,
            flags
        ));
    }
    out
}

/// Distinct-firm and distinct-link counts alongside the raw chain count,
/// since a firm may appear in many chains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStats {
    pub chains: u64,
    pub roundtrips: u64,
    pub distinct_firms: u64,
    pub distinct_links: u64,
}

pub fn chain_stats(chains: &[OwnershipChain<'_>]) -> ChainStats {
    let mut firms = BTreeSet::new();
    let mut links = BTreeSet::new();
    let mut roundtrips = 0;
    for c in chains {
        firms.insert(c.l1_id());
        firms.insert(c.l2_id());
        firms.insert(c.l3_id());
        links.insert((c.inbound.owner_id.as_str(), c.inbound.owned_id.as_str()));
        links.insert((c.outbound.owner_id.as_str(), c.outbound.owned_id.as_str()));
        if c.roundtrip {
            roundtrips += 1;
        }
    }
    ChainStats {
        chains: chains.len() as u64,
        roundtrips,
        distinct_firms: firms.len() as u64,
        distinct_links: links.len() as u64,
    }
}

/// Which endpoint of a link collection to classify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkSide {
    Owner,
    Owned,
}

/// Percentages over the five scope classes; sums to 100 within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeDistribution {
    pub total: u64,
    pub counts: [u64; 5],
    pub pct: [f64; 5],
}

impl ScopeDistribution {
    pub fn count(&self, scope: GeoScope) -> u64 {
        self.counts[scope as usize]
    }

    pub fn pct(&self, scope: GeoScope) -> f64 {
        self.pct[scope as usize]
    }

    /// Domestic share: focal + capital + other domestic.
    pub fn domestic_share(&self) -> f64 {
        self.pct(GeoScope::FocalCity)
            + self.pct(GeoScope::Capital)
            + self.pct(GeoScope::OtherDomestic)
    }
}

/// Distribution of one side of a link collection over the scope classes.
pub fn scope_distribution(
    links: &[&OwnershipLink],
    side: LinkSide,
    cfg: &ScopeConfig,
    firms: &std::collections::BTreeMap<String, Firm>,
) -> Result<ScopeDistribution, GraphError> {
    if links.is_empty() {
        return Err(GraphError::EmptySet);
    }
    let mut counts = [0u64; 5];
    for link in links {
        let id = match side {
            LinkSide::Owner => &link.owner_id,
            LinkSide::Owned => &link.owned_id,
        };
        let firm = &firms[id];
        counts[classify_scope(firm, cfg) as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mut pct = [0.0; 5];
    for (i, c) in counts.iter().enumerate() {
        pct[i] = 100.0 * (*c as f64) / (total as f64);
    }
    Ok(ScopeDistribution { total, counts, pct })
}

/// Cycle report: one entry per SCC of size > 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleReport {
    pub components: Vec<CycleComponent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleComponent {
    pub members: Vec<String>,
    /// Starts and ends at the lowest-id member.
    pub example_cycle: Vec<String>,
}

impl CycleReport {
    pub fn count(&self) -> usize {
        self.components.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn firm(id: &str, country: &str, city: Option<&str>) -> Firm {
        Firm {
            firm_id: id.to_string(),
            name: id.to_string(),
            lon: 0.0,
            lat: 0.0,
            country: country.to_string(),
            nace4: "6420".to_string(),
            turnover: Some(100.0),
            city_id: city.map(str::to_string),
        }
    }

    fn link(owner: &str, owned: &str) -> OwnershipLink {
        OwnershipLink {
            owner_id: owner.to_string(),
            owned_id: owned.to_string(),
            share_pct: 50.0,
        }
    }

    fn snapshot(firms: Vec<Firm>, links: Vec<OwnershipLink>) -> Snapshot {
        let mut snap = Snapshot::new(2016);
        for f in firms {
            snap.insert_firm(f);
        }
        snap.links = links;
        snap.sort_links();
        snap
    }

    fn cfg() -> ScopeConfig {
        ScopeConfig::new(
            "manchester",
            "london",
            "GB",
            ["DE".to_string(), "FR".to_string(), "IT".to_string()],
        )
        .unwrap()
    }

    fn universe() -> CityUniverse {
        CityUniverse::from_ids(["manchester", "london", "leeds"].map(str::to_string))
    }

    #[test]
    fn focal_equals_capital_is_rejected() {
        let err = ScopeConfig::new("x", "x", "GB", []).unwrap_err();
        assert_eq!(err, GraphError::FocalEqualsCapital("x".into()));
    }

    #[test]
    fn empty_links_graph_has_nodes_only() {
        let snap = snapshot(vec![firm("A", "GB", None)], vec![]);
        let g = OwnershipGraph::build(&snap);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn degrees_match_hand_count() {
        let snap = snapshot(
            vec![
                firm("A", "GB", None),
                firm("B", "GB", None),
                firm("C", "GB", None),
            ],
            vec![link("A", "B"), link("B", "C"), link("A", "C")],
        );
        let g = OwnershipGraph::build(&snap);
        assert_eq!(g.out_degree("A"), 2);
        assert_eq!(g.in_degree("C"), 2);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn scope_classification_examples() {
        let cfg = cfg();
        assert_eq!(
            classify_scope(&firm("a", "GB", Some("manchester")), &cfg),
            GeoScope::FocalCity
        );
        assert_eq!(
            classify_scope(&firm("b", "GB", Some("london")), &cfg),
            GeoScope::Capital
        );
        // UK firm with no FUA assignment falls back to the country rule.
        assert_eq!(
            classify_scope(&firm("c", "GB", None), &cfg),
            GeoScope::OtherDomestic
        );
        assert_eq!(
            classify_scope(&firm("d", "DE", None), &cfg),
            GeoScope::EuropeanUnion
        );
        assert_eq!(
            classify_scope(&firm("e", "US", None), &cfg),
            GeoScope::ExtraEuropean
        );
        // Foreign-registered firm inside the focal city is still focal.
        assert_eq!(
            classify_scope(&firm("f", "US", Some("manchester")), &cfg),
            GeoScope::FocalCity
        );
    }

    #[test]
    fn scope_totality_over_representative_firms() {
        let cfg = cfg();
        for country in ["GB", "DE", "US", "FR", "JP"] {
            for city in [None, Some("manchester"), Some("london"), Some("leeds")] {
                let f = firm("x", country, city);
                let scope = classify_scope(&f, &cfg);
                assert_eq!(GeoScope::ALL.iter().filter(|s| **s == scope).count(), 1);
            }
        }
    }

    #[test]
    fn inbound_outbound_and_internal_links() {
        let snap = snapshot(
            vec![
                firm("A", "GB", Some("leeds")),
                firm("B", "GB", Some("manchester")),
                firm("C", "GB", Some("manchester")),
                firm("D", "DE", None),
            ],
            vec![
                link("A", "B"),
                link("B", "C"),
                link("C", "D"),
                link("D", "A"),
            ],
        );
        let g = OwnershipGraph::build(&snap);
        let known = universe();

        let inbound = g.inbound_links("manchester", &known).unwrap();
        let in_pairs: Vec<_> = inbound
            .iter()
            .map(|l| (l.owner_id.as_str(), l.owned_id.as_str()))
            .collect();
        // B->C is internal to the city: both inbound and outbound.
        assert_eq!(in_pairs, vec![("A", "B"), ("B", "C")]);

        let outbound = g.outbound_links("manchester", &known).unwrap();
        let out_pairs: Vec<_> = outbound
            .iter()
            .map(|l| (l.owner_id.as_str(), l.owned_id.as_str()))
            .collect();
        assert_eq!(out_pairs, vec![("B", "C"), ("C", "D")]);

        assert!(g.inbound_links("atlantis", &known).is_err());
        assert!(!g.inbound_links("leeds", &known).unwrap().is_empty());
        // A city in the universe with no firms yields empty, not an error.
        assert!(g.inbound_links("london", &known).unwrap().is_empty());
    }

    #[test]
    fn inbound_matches_linear_scan_on_mixed_fixture() {
        // 10 links, 4 of them ending in manchester.
        let mut firms = vec![
            firm("M1", "GB", Some("manchester")),
            firm("M2", "GB", Some("manchester")),
            firm("L1", "GB", Some("leeds")),
            firm("L2", "GB", Some("leeds")),
            firm("N1", "GB", None),
        ];
        firms.push(firm("D1", "DE", None));
        let links = vec![
            link("L1", "M1"),
            link("L2", "M1"),
            link("D1", "M2"),
            link("N1", "M2"),
            link("M1", "L1"),
            link("M2", "D1"),
            link("L1", "L2"),
            link("L2", "N1"),
            link("D1", "L1"),
            link("N1", "L2"),
        ];
        let snap = snapshot(firms, links);
        let g = OwnershipGraph::build(&snap);
        let inbound = g.inbound_links("manchester", &universe()).unwrap();
        let oracle: Vec<(&str, &str)> = snap
            .links
            .iter()
            .filter(|l| snap.firms[&l.owned_id].city_id.as_deref() == Some("manchester"))
            .map(|l| (l.owner_id.as_str(), l.owned_id.as_str()))
            .collect();
        assert_eq!(oracle.len(), 4);
        assert_eq!(
            inbound
                .iter()
                .map(|l| (l.owner_id.as_str(), l.owned_id.as_str()))
                .collect::<Vec<_>>(),
            oracle
        );
    }

    #[test]
    fn minimal_chain() {
        let snap = snapshot(
            vec![
                firm("A", "GB", Some("leeds")),
                firm("B", "GB", Some("manchester")),
                firm("C", "DE", None),
            ],
            vec![link("A", "B"), link("B", "C")],
        );
        let g = OwnershipGraph::build(&snap);
        let chains = g.extract_chains("manchester", &universe(), &cfg()).unwrap();
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        assert_eq!((c.l1_id(), c.l2_id(), c.l3_id()), ("A", "B", "C"));
        assert_eq!(c.l1_scope, GeoScope::OtherDomestic);
        assert_eq!(c.l3_scope, GeoScope::EuropeanUnion);
        assert!(!c.roundtrip);
    }

    #[test]
    fn chains_are_inbound_outbound_products() {
        // Two inbound and three outbound links on one L2 firm: six chains.
        let mut firms = vec![firm("L2", "GB", Some("manchester"))];
        let mut links = Vec::new();
        for i in 0..2 {
            let id = format!("IN{i}");
            firms.push(firm(&id, "GB", None));
            links.push(link(&id, "L2"));
        }
        for i in 0..3 {
            let id = format!("OUT{i}");
            firms.push(firm(&id, "US", None));
            links.push(link("L2", &id));
        }
        let snap = snapshot(firms, links);
        let g = OwnershipGraph::build(&snap);
        let chains = g.extract_chains("manchester", &universe(), &cfg()).unwrap();
        assert_eq!(chains.len(), 6);

        let expected: u64 = snap
            .firms
            .values()
            .filter(|f| f.city_id.as_deref() == Some("manchester"))
            .map(|f| (g.in_degree(&f.firm_id) * g.out_degree(&f.firm_id)) as u64)
            .sum();
        assert_eq!(chains.len() as u64, expected);
    }

    #[test]
    fn roundtrip_chain_is_flagged_and_kept() {
        let snap = snapshot(
            vec![
                firm("A", "GB", Some("leeds")),
                firm("B", "GB", Some("manchester")),
            ],
            vec![link("A", "B"), link("B", "A")],
        );
        let g = OwnershipGraph::build(&snap);
        let chains = g.extract_chains("manchester", &universe(), &cfg()).unwrap();
        assert_eq!(chains.len(), 1);
        assert!(chains[0].roundtrip);
        assert!(chains_csv(&chains).contains("ROUNDTRIP"));

        let stats = chain_stats(&chains);
        assert_eq!(stats.chains, 1);
        assert_eq!(stats.roundtrips, 1);
        assert_eq!(stats.distinct_firms, 2);
        assert_eq!(stats.distinct_links, 2);
    }

    #[test]
    fn scope_distribution_hand_count() {
        let firms: BTreeMap<String, Firm> = [
            firm("F1", "GB", Some("manchester")),
            firm("F2", "GB", Some("manchester")),
            firm("F3", "GB", Some("london")),
            firm("F4", "DE", None),
            firm("T", "GB", Some("manchester")),
        ]
        .into_iter()
        .map(|f| (f.firm_id.clone(), f))
        .collect();
        let links = [
            link("F1", "T"),
            link("F2", "T"),
            link("F3", "T"),
            link("F4", "T"),
        ];
        let refs: Vec<&OwnershipLink> = links.iter().collect();
        let dist = scope_distribution(&refs, LinkSide::Owner, &cfg(), &firms).unwrap();
        assert_eq!(dist.pct, [50.0, 25.0, 0.0, 25.0, 0.0]);
        assert!((dist.pct.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        assert_eq!(dist.domestic_share(), 75.0);
    }

    #[test]
    fn scope_distribution_all_focal() {
        let firms: BTreeMap<String, Firm> = [
            firm("F1", "GB", Some("manchester")),
            firm("T", "GB", Some("london")),
        ]
        .into_iter()
        .map(|f| (f.firm_id.clone(), f))
        .collect();
        let links = [link("F1", "T")];
        let refs: Vec<&OwnershipLink> = links.iter().collect();
        let dist = scope_distribution(&refs, LinkSide::Owner, &cfg(), &firms).unwrap();
        assert_eq!(dist.pct(GeoScope::FocalCity), 100.0);

        let empty: Vec<&OwnershipLink> = Vec::new();
        assert_eq!(
            scope_distribution(&empty, LinkSide::Owner, &cfg(), &firms).unwrap_err(),
            GraphError::EmptySet
        );
    }

    #[test]
    fn dag_has_no_cycles() {
        let snap = snapshot(
            vec![
                firm("A", "GB", None),
                firm("B", "GB", None),
                firm("C", "GB", None),
            ],
            vec![link("A", "B"), link("B", "C"), link("A", "C")],
        );
        let g = OwnershipGraph::build(&snap);
        assert_eq!(g.detect_cycles().count(), 0);
    }

    #[test]
    fn two_cycle_is_reported() {
        let snap = snapshot(
            vec![
                firm("A", "GB", None),
                firm("B", "GB", None),
                firm("C", "GB", None),
            ],
            vec![link("A", "B"), link("B", "A"), link("B", "C")],
        );
        let g = OwnershipGraph::build(&snap);
        let report = g.detect_cycles();
        assert_eq!(report.count(), 1);
        assert_eq!(report.components[0].members, vec!["A", "B"]);
        assert_eq!(report.components[0].example_cycle, vec!["A", "B", "A"]);
    }
}

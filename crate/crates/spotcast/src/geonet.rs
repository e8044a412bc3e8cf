//! Dynamic geographical network search: a co-visit proximity graph over
//! self-reported positions, clustered by modularity maximization.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{Community, CommunityKind};
use crate::ingest::{GeoPoint, StreamTuple};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance in meters (haversine formula).
pub fn haversine(p: GeoPoint, q: GeoPoint) -> f64 {
    let lat1 = p.lat.to_radians();
    let lat2 = q.lat.to_radians();
    let dlat = (q.lat - p.lat).to_radians();
    let dlon = (q.lon - p.lon).to_radians();
    let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().asin()
}

/// Undirected weighted graph over user ids; no self-loops, weights > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoGraph {
    pub nodes: Vec<String>,
    /// Edges stored once with u < v (node indices).
    pub edges: Vec<(usize, usize, f64)>,
}

impl GeoGraph {
    pub fn new(nodes: Vec<String>, mut edges: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(nodes.iter().collect::<BTreeSet<_>>().len() == nodes.len());
        for e in &mut edges {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
            debug_assert!(e.0 != e.1 && e.2 > 0.0);
        }
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        GeoGraph { nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weighted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }

    /// Weighted degree per node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.nodes.len()];
        for &(u, v, w) in &self.edges {
            deg[u] += w;
            deg[v] += w;
        }
        deg
    }

    /// Dump as `u v weight` lines (node names must not contain spaces).
    pub fn dump_edges<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &(u, v, w) in &self.edges {
            writeln!(out, "{} {} {}", self.nodes[u], self.nodes[v], w)?;
        }
        Ok(())
    }

    pub fn load_edges<R: BufRead>(input: R) -> std::io::Result<Self> {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let err = || std::io::Error::new(std::io::ErrorKind::InvalidData, "bad edge line");
            let u = parts.next().ok_or_else(err)?.to_string();
            let v = parts.next().ok_or_else(err)?.to_string();
            let w: f64 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            let mut id = |name: String| {
                *index.entry(name.clone()).or_insert_with(|| {
                    nodes.push(name);
                    nodes.len() - 1
                })
            };
            let ui = id(u);
            let vi = id(v);
            edges.push((ui, vi, w));
        }
        Ok(GeoGraph::new(nodes, edges))
    }
}

/// Assignment of every node to a community id, with the partition's
/// modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub modularity: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("graph has no edges")]
pub struct EmptyGraph;

/// Weighted Newman modularity of a partition.
pub fn modularity(g: &GeoGraph, assignment: &[usize]) -> Result<f64, EmptyGraph> {
    assert_eq!(assignment.len(), g.node_count());
    let two_m = 2.0 * g.total_weight();
    if two_m == 0.0 {
        return Err(EmptyGraph);
    }
    let deg = g.degrees();
    let n_comm = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; n_comm]; // twice the internal edge weight
    let mut total = vec![0.0; n_comm];
    for &(u, v, w) in &g.edges {
        if assignment[u] == assignment[v] {
            internal[assignment[u]] += 2.0 * w;
        }
    }
    for (u, &c) in assignment.iter().enumerate() {
        total[c] += deg[u];
    }
    let q = (0..n_comm)
        .map(|c| internal[c] / two_m - (total[c] / two_m).powi(2))
        .sum();
    Ok(q)
}

/// Result of a Louvain run: the final partition plus the modularity
/// reached after each pass (monotonically non-decreasing).
#[derive(Debug, Clone)]
pub struct LouvainResult {
    pub partition: Partition,
    pub pass_modularity: Vec<f64>,
}

// internal aggregated graph with self-loops
struct WorkGraph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>, // neighbors excluding self
    self_loops: Vec<f64>,
    degrees: Vec<f64>, // including self-loop weight counted twice
    two_m: f64,
}

impl WorkGraph {
    fn from_geo(g: &GeoGraph) -> Self {
        let adj = g.adjacency();
        let degrees = g.degrees();
        WorkGraph {
            n: g.node_count(),
            adj,
            self_loops: vec![0.0; g.node_count()],
            degrees,
            two_m: 2.0 * g.total_weight(),
        }
    }

    fn modularity(&self, assignment: &[usize]) -> f64 {
        let n_comm = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut internal = vec![0.0; n_comm];
        let mut total = vec![0.0; n_comm];
        for u in 0..self.n {
            let c = assignment[u];
            total[c] += self.degrees[u];
            internal[c] += 2.0 * self.self_loops[u];
            for &(v, w) in &self.adj[u] {
                if assignment[v] == c {
                    internal[c] += w;
                }
            }
        }
        (0..n_comm)
            .map(|c| internal[c] / self.two_m - (total[c] / self.two_m).powi(2))
            .sum()
    }
}

/// Two-phase Louvain with strictly-positive gain acceptance. Node visit
/// order is shuffled by `seed`; the result is deterministic given
/// `(graph, seed)`.
pub fn louvain(g: &GeoGraph, seed: u64) -> Result<LouvainResult, EmptyGraph> {
    if g.edges.is_empty() {
        return Err(EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = WorkGraph::from_geo(g);
    // mapping from original node to current community label
    let mut node_to_comm: Vec<usize> = (0..g.node_count()).collect();
    let mut pass_modularity = Vec::new();
    let mut current_q = work.modularity(&(0..work.n).collect::<Vec<_>>());

    loop {
        let n = work.n;
        let mut comm: Vec<usize> = (0..n).collect();
        let mut comm_total: Vec<f64> = work.degrees.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);

        let mut improved = false;
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            if sweeps > 1000 {
                break;
            }
            let mut moved = false;
            for &u in &order {
                let cu = comm[u];
                let ku = work.degrees[u];
                // weights from u to each neighboring community
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for &(v, w) in &work.adj[u] {
                    *links.entry(comm[v]).or_insert(0.0) += w;
                }
                let w_to_own = links.get(&cu).copied().unwrap_or(0.0);
                // remove u from its community, then compare communities by
                // w(u->C) - tot_C * k_u / 2m (shared terms cancel)
                comm_total[cu] -= ku;
                let gain_of =
                    |w_to_c: f64, tot_c: f64| w_to_c - tot_c * ku / work.two_m;
                let stay_gain = gain_of(w_to_own, comm_total[cu]);
                let mut best_comm = cu;
                let mut best_gain = stay_gain;
                for (&c, &w_to_c) in &links {
                    if c == cu {
                        continue;
                    }
                    let gain = gain_of(w_to_c, comm_total[c]);
                    // strict improvement only; ties keep the node in place
                    if gain > best_gain {
                        best_gain = gain;
                        best_comm = c;
                    }
                }
                comm_total[cu] += ku;
                if best_comm != cu {
                    comm_total[cu] -= ku;
                    comm_total[best_comm] += ku;
                    comm[u] = best_comm;
                    moved = true;
                    improved = true;
                }
            }
            if !moved {
                break;
            }
        }

        // relabel communities contiguously in order of first appearance
        let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &comm {
            let next = relabel.len();
            relabel.entry(c).or_insert(next);
        }
        let comm: Vec<usize> = comm.iter().map(|&c| relabel[&c]).collect();
        let n_comm = relabel.len();

        let q = work.modularity(&comm);
        debug_assert!(q >= current_q - 1e-12, "modularity decreased within a pass");
        pass_modularity.push(q);

        for c in node_to_comm.iter_mut() {
            *c = comm[*c];
        }

        if !improved || n_comm == work.n {
            break;
        }
        current_q = q;

        // aggregate communities into super-nodes
        let mut self_loops = vec![0.0; n_comm];
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for u in 0..work.n {
            self_loops[comm[u]] += work.self_loops[u];
            for &(v, w) in &work.adj[u] {
                if u < v {
                    let (cu, cv) = (comm[u], comm[v]);
                    if cu == cv {
                        self_loops[cu] += w;
                    } else {
                        let key = (cu.min(cv), cu.max(cv));
                        *between.entry(key).or_insert(0.0) += w;
                    }
                }
            }
        }
        let mut adj = vec![Vec::new(); n_comm];
        for (&(a, b), &w) in &between {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut degrees = vec![0.0; n_comm];
        for c in 0..n_comm {
            degrees[c] = 2.0 * self_loops[c] + adj[c].iter().map(|&(_, w)| w).sum::<f64>();
        }
        work = WorkGraph { n: n_comm, adj, self_loops, degrees, two_m: work.two_m };
    }

    // final contiguous relabel over original nodes
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &node_to_comm {
        let next = relabel.len();
        relabel.entry(c).or_insert(next);
    }
    let assignment: Vec<usize> = node_to_comm.iter().map(|&c| relabel[&c]).collect();
    let q = modularity(g, &assignment)?;
    Ok(LouvainResult { partition: Partition { assignment, modularity: q }, pass_modularity })
}

/// Configuration for the geo network search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeoNetConfig {
    pub radius_m: f64,
    pub min_covisits: usize,
    pub seed: u64,
    /// Largest communities kept, labeled "Cluster 1..k" by size.
    pub max_communities: usize,
}

impl Default for GeoNetConfig {
    fn default() -> Self {
        GeoNetConfig { radius_m: 140.0, min_covisits: 1, seed: 7, max_communities: 10 }
    }
}

/// Build the co-visit graph: nodes are users with at least one geo
/// tuple; an edge connects two users with at least `min_covisits`
/// check-in pairs within `radius_m` of each other, weighted by the pair
/// count.
pub fn build_geo_graph(tuples: &[StreamTuple], radius_m: f64, min_covisits: usize) -> GeoGraph {
    assert!(radius_m > 0.0);
    let mut per_user: BTreeMap<&str, Vec<GeoPoint>> = BTreeMap::new();
    for t in tuples {
        if let Some(g) = t.geo {
            per_user.entry(t.user_id.as_str()).or_default().push(g);
        }
    }
    let nodes: Vec<String> = per_user.keys().map(|s| s.to_string()).collect();
    let points: Vec<&Vec<GeoPoint>> = per_user.values().collect();
    let mut edges = Vec::new();
    for u in 0..nodes.len() {
        for v in (u + 1)..nodes.len() {
            let mut pairs = 0usize;
            for &p in points[u] {
                for &q in points[v] {
                    if haversine(p, q) <= radius_m {
                        pairs += 1;
                    }
                }
            }
            if pairs >= min_covisits.max(1) {
                edges.push((u, v, pairs as f64));
            }
        }
    }
    GeoGraph::new(nodes, edges)
}

/// Full geo search: build the graph, run Louvain, and emit the largest
/// communities as "Cluster 1..k" by descending member count.
pub fn geonet_search(tuples: &[StreamTuple], cfg: &GeoNetConfig) -> Vec<Community> {
    let graph = build_geo_graph(tuples, cfg.radius_m, cfg.min_covisits);
    let result = match louvain(&graph, cfg.seed) {
        Ok(r) => r,
        Err(EmptyGraph) => return Vec::new(),
    };
    let assignment = &result.partition.assignment;
    let n_comm = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comm];
    for (node, &c) in assignment.iter().enumerate() {
        members[c].push(node);
    }
    let mut order: Vec<usize> = (0..n_comm).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(members[c].len()), c));
    order.truncate(cfg.max_communities);

    let mut tuples_by_user: BTreeMap<&str, Vec<&StreamTuple>> = BTreeMap::new();
    for t in tuples {
        if t.geo.is_some() {
            tuples_by_user.entry(t.user_id.as_str()).or_default().push(t);
        }
    }
    order
        .iter()
        .enumerate()
        .map(|(rank, &c)| {
            let mut community_tuples = Vec::new();
            for &node in &members[c] {
                if let Some(ts) = tuples_by_user.get(graph.nodes[node].as_str()) {
                    community_tuples.extend(ts.iter().map(|&t| t.clone()));
                }
            }
            Community::from_single_cluster(
                CommunityKind::GeoNets,
                format!("Cluster {}", rank + 1),
                community_tuples,
            )
        })
        .collect()
}

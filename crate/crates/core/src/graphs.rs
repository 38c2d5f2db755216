//! Problem graphs: random regular generation, validation, and the coupler
//! accounting that compares penalty and conservation-law encodings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored as `(u, v)` with `u < v` in a sorted set, which is also
/// the canonical order used by the JSON writer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::new(file.n, file.edges.iter().map(|&[u, v]| (u, v)))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Graph(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::Graph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Graph { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph { n, edges }
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.degrees().iter().all(|&x| x == d)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Union of this graph's edges with `extra`.
    pub fn with_edges(&self, extra: &BTreeSet<(usize, usize)>) -> Graph {
        let mut g = self.clone();
        g.edges.extend(extra.iter().map(|&(u, v)| (u.min(v), u.max(v))));
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Samples a uniformly random simple `d`-regular graph on `n` vertices.
///
/// Configuration (pairing) model: the `n * d` half-edges are paired by a
/// uniform random matching and the whole pairing is discarded as soon as it
/// produces a loop or a repeated edge.
pub fn generate_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n < 2 || n > 64 || d >= n || (n * d) % 2 != 0 {
        return Err(Error::Parameter(format!(
            "no simple {d}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * d).map(|p| p / d).collect();
    let len = points.len();
    let mut adj = vec![0u64; n];
    'attempt: loop {
        adj.iter_mut().for_each(|a| *a = 0);
        // Fisher-Yates drawn two slots at a time, so a collision stops the
        // shuffle early
        for i in (0..len).step_by(2) {
            let j = rng.random_range(i..len);
            points.swap(i, j);
            let j = rng.random_range(i + 1..len);
            points.swap(i + 1, j);
            let (u, v) = (points[i], points[i + 1]);
            if u == v || adj[u] >> v & 1 == 1 {
                continue 'attempt;
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| adj[u] >> v & 1 == 1)
            .collect();
        return Ok(Graph { n, edges });
    }
}

/// Returns `true` if `ordering` is a permutation of `0..n`.
pub fn is_permutation(ordering: &[usize], n: usize) -> bool {
    if ordering.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    ordering
        .iter()
        .all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

pub fn identity_ordering(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Ring edges along `ordering` that the graph does not already contain.
pub fn cycle_completion(g: &Graph, ordering: &[usize]) -> Result<BTreeSet<(usize, usize)>> {
    if !is_permutation(ordering, g.n()) {
        return Err(Error::Parameter(
            "ordering is not a permutation of the vertices".into(),
        ));
    }
    let n = ordering.len();
    let mut missing = BTreeSet::new();
    if n < 2 {
        return Ok(missing);
    }
    for i in 0..n {
        let (u, v) = (ordering[i], ordering[(i + 1) % n]);
        if !g.has_edge(u, v) {
            missing.insert((u.min(v), u.max(v)));
        }
    }
    Ok(missing)
}

/// Greedy ring ordering that walks along existing edges where it can.
///
/// Starting from vertex 0, it repeatedly moves to the smallest unvisited
/// neighbour, jumping to the smallest unvisited vertex when stuck.
pub fn greedy_ordering(g: &Graph) -> Vec<usize> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let adj = g.adjacency();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = 0;
    loop {
        visited[current] = true;
        order.push(current);
        if order.len() == n {
            break;
        }
        current = adj[current]
            .iter()
            .copied()
            .find(|&w| !visited[w])
            .or_else(|| (0..n).find(|&w| !visited[w]))
            .expect("an unvisited vertex remains");
    }
    order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Penalty,
    Cqa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Penalty => "penalty",
            Method::Cqa => "cqa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalty" => Ok(Method::Penalty),
            "cqa" => Ok(Method::Cqa),
            other => Err(Error::Parameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Extra couplers an encoding needs on top of the problem graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub method: Method,
    pub n: usize,
    pub base_edges: usize,
    pub additional_edges: usize,
    /// Maximal degree of the interaction graph after the additions.
    pub max_degree: usize,
    /// Order-of-magnitude proxy, not an embedding: `n(n-1)/2 + n` for the
    /// penalty method, the number of added ring couplers for CQA.
    pub embedding_qubit_estimate: usize,
}

pub fn resource_report(g: &Graph, method: Method, ordering: &[usize]) -> Result<ResourceReport> {
    let n = g.n();
    let complete = n * n.saturating_sub(1) / 2;
    let report = match method {
        Method::Penalty => ResourceReport {
            method,
            n,
            base_edges: g.edge_count(),
            additional_edges: complete - g.edge_count(),
            max_degree: n.saturating_sub(1),
            embedding_qubit_estimate: complete + n,
        },
        Method::Cqa => {
            let extra = cycle_completion(g, ordering)?;
            ResourceReport {
                method,
                n,
                base_edges: g.edge_count(),
                additional_edges: extra.len(),
                max_degree: g.with_edges(&extra).max_degree(),
                embedding_qubit_estimate: extra.len(),
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        for seed in 0..5 {
            assert_eq!(generate_random_regular(4, 3, seed).unwrap(), Graph::complete(4));
        }
    }

    #[test]
    fn regular_graph_edge_count() {
        let g = generate_random_regular(12, 6, 7).unwrap();
        assert_eq!(g.edge_count(), 36);
        assert!(g.is_regular(6));
    }

    #[test]
    fn infeasible_regular_parameters() {
        assert!(matches!(generate_random_regular(5, 3, 1), Err(Error::Parameter(_))));
        assert!(matches!(generate_random_regular(4, 4, 1), Err(Error::Parameter(_))));
        assert!(matches!(generate_random_regular(1, 0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn regular_generation_is_seeded() {
        let a = generate_random_regular(14, 6, 99).unwrap();
        let b = generate_random_regular(14, 6, 99).unwrap();
        let c = generate_random_regular(14, 6, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::from_json(r#"{"n":3,"edges":[[2,1],[0,1]]}"#).is_ok());
        assert!(Graph::from_json(r#"{"n":2,"edges":[[0,1],[1,0]]}"#).is_err());
    }

    #[test]
    fn json_is_canonical() {
        let g = Graph::new(4, [(3, 2), (1, 0), (0, 2)]).unwrap();
        assert_eq!(g.to_json(), r#"{"n":4,"edges":[[0,1],[0,2],[2,3]]}"#);
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn completion_of_k4_is_empty() {
        let order = identity_ordering(4);
        assert!(cycle_completion(&Graph::complete(4), &order).unwrap().is_empty());
    }

    #[test]
    fn completion_of_edgeless_graph_is_the_ring() {
        let got = cycle_completion(&Graph::empty(4), &identity_ordering(4)).unwrap();
        let want: BTreeSet<_> = [(0, 1), (1, 2), (2, 3), (0, 3)].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn completion_rejects_non_permutations() {
        assert!(cycle_completion(&Graph::empty(3), &[0, 1, 1]).is_err());
        assert!(cycle_completion(&Graph::empty(3), &[0, 1]).is_err());
    }

    #[test]
    fn degree_six_resources() {
        let g = generate_random_regular(12, 6, 3).unwrap();
        let order = identity_ordering(12);
        let pen = resource_report(&g, Method::Penalty, &order).unwrap();
        assert_eq!(pen.additional_edges, 30);
        assert_eq!(pen.max_degree, 11);
        assert_eq!(pen.embedding_qubit_estimate, 66 + 12);
        let cqa = resource_report(&g, Method::Cqa, &order).unwrap();
        assert!(cqa.additional_edges <= 12);
        assert_eq!(cqa.embedding_qubit_estimate, cqa.additional_edges);
        let k4 = resource_report(&Graph::complete(4), Method::Cqa, &identity_ordering(4)).unwrap();
        assert_eq!(k4.additional_edges, 0);
    }

    #[test]
    fn greedy_ordering_never_needs_more_than_identity_on_a_path() {
        // vertices visited 0,2,4,... along the path 0-2-4-1-3
        let g = Graph::new(5, [(0, 2), (2, 4), (4, 1), (1, 3)]).unwrap();
        let order = greedy_ordering(&g);
        assert_eq!(order, vec![0, 2, 4, 1, 3]);
        assert_eq!(cycle_completion(&g, &order).unwrap().len(), 1);
        assert_eq!(cycle_completion(&g, &identity_ordering(5)).unwrap().len(), 5);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..40).prop_map(move |pairs| {
                let edges: BTreeSet<_> = pairs
                    .into_iter()
                    .filter(|(u, v)| u != v)
                    .map(|(u, v)| (u.min(v), u.max(v)))
                    .collect();
                Graph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn completion_closes_a_hamiltonian_cycle(g in arb_graph(), shift in 0usize..12) {
            let n = g.n();
            let mut order = identity_ordering(n);
            order.rotate_left(shift % n.max(1));
            order.reverse();
            let extra = cycle_completion(&g, &order).unwrap();
            prop_assert!(extra.len() <= n);
            let union = g.with_edges(&extra);
            if n >= 3 {
                for i in 0..n {
                    prop_assert!(union.has_edge(order[i], order[(i + 1) % n]));
                }
            }
            let pen = resource_report(&g, Method::Penalty, &order).unwrap();
            prop_assert_eq!(pen.base_edges + pen.additional_edges, n * (n - 1) / 2);
        }

        #[test]
        fn generated_graphs_are_regular(half in 2usize..8, d in 1usize..6, seed in any::<u64>()) {
            let n = 2 * half;
            prop_assume!(d < n);
            let g = generate_random_regular(n, d, seed).unwrap();
            prop_assert!(g.is_regular(d));
        }
    }
}

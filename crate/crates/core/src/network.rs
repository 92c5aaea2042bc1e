//! Friend network of agents.
//!
//! Graphs are grown with the connecting-nearest-neighbor (CNN) model: a
//! newcomer attaches to one existing node and remembers every neighbor of
//! that node as a *potential* edge; later steps convert potential edges into
//! real ones. The process yields connected, highly clustered graphs with a
//! heavy-tailed degree distribution.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("a CNN graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("conversion probability u must lie in [0, 1), got {0}")]
    InvalidConversionProbability(f64),
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge list parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected graph on nodes `0..node_count`.
///
/// Edges are stored once as `(a, b)` with `a < b`, sorted; adjacency lists are
/// sorted ascending so that every traversal order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list. Connectivity is not
    /// required here; isolated nodes are allowed.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, NetworkError> {
        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (a, b) in edges {
            for node in [a, b] {
                if node >= node_count {
                    return Err(NetworkError::NodeOutOfRange { node, node_count });
                }
            }
            if a == b {
                return Err(NetworkError::SelfLoop(a));
            }
            let pair = (a.min(b), a.max(b));
            if !seen.insert(pair) {
                return Err(NetworkError::DuplicateEdge(pair.0, pair.1));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            normalized.push(pair);
        }
        Ok(Self::assemble(node_count, normalized, adjacency))
    }

    fn assemble(
        node_count: usize,
        mut edges: Vec<(NodeId, NodeId)>,
        mut adjacency: Vec<Vec<NodeId>>,
    ) -> Self {
        edges.sort_unstable();
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Sorted neighbor list of `node`.
    ///
    /// Panics if `node` is out of range; use [`Graph::degree`] for a checked query.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> Result<usize, NetworkError> {
        self.adjacency
            .get(node)
            .map(Vec::len)
            .ok_or(NetworkError::NodeOutOfRange {
                node,
                node_count: self.node_count,
            })
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.node_count && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut visited = vec![false; self.node_count];
        let mut stack = vec![0];
        visited[0] = true;
        let mut reached = 1;
        while let Some(node) = stack.pop() {
            for &next in &self.adjacency[node] {
                if !visited[next] {
                    visited[next] = true;
                    reached += 1;
                    stack.push(next);
                }
            }
        }
        reached == self.node_count
    }

    /// Number of triangles through `node`.
    fn closed_triangles(&self, node: NodeId) -> usize {
        let neighbors = &self.adjacency[node];
        let mut count = 0;
        for (idx, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[idx + 1..] {
                if self.has_edge(a, b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Local clustering coefficient; zero for nodes of degree below 2.
    pub fn local_clustering(&self, node: NodeId) -> f64 {
        let k = self.adjacency[node].len();
        if k < 2 {
            return 0.0;
        }
        let pairs = (k * (k - 1) / 2) as f64;
        self.closed_triangles(node) as f64 / pairs
    }

    /// Mean local clustering coefficient over all nodes.
    pub fn clustering_coefficient(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        let total: f64 = (0..self.node_count).map(|n| self.local_clustering(n)).sum();
        total / self.node_count as f64
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Writes the edge list with a `# nodes=<n> u=<u> seed=<s>` header.
    pub fn write_edge_list<W: Write>(&self, mut out: W, u: f64, seed: u64) -> std::io::Result<()> {
        writeln!(out, "# nodes={} u={} seed={}", self.node_count, u, seed)?;
        for (a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        out.flush()
    }

    /// Reads a file produced by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, NetworkError> {
        let mut node_count = None;
        let mut edges = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('#') {
                for token in header.split_whitespace() {
                    if let Some(value) = token.strip_prefix("nodes=") {
                        node_count = Some(value.parse().map_err(|_| NetworkError::Parse {
                            line: line_no,
                            message: format!("bad node count `{value}`"),
                        })?);
                    }
                }
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let mut next = || -> Result<NodeId, NetworkError> {
                let token = parts.next().ok_or_else(|| NetworkError::Parse {
                    line: line_no,
                    message: "expected two node ids".into(),
                })?;
                token.parse().map_err(|_| NetworkError::Parse {
                    line: line_no,
                    message: format!("bad node id `{token}`"),
                })
            };
            let a = next()?;
            let b = next()?;
            edges.push((a, b));
        }
        let node_count = node_count.ok_or_else(|| NetworkError::Parse {
            line: 1,
            message: "missing `# nodes=<n>` header".into(),
        })?;
        Graph::from_edges(node_count, edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Graph(nodes={}, edges={}, mean_degree={:.3})",
            self.node_count,
            self.edges.len(),
            self.mean_degree()
        )
    }
}

/// Grows a CNN graph with `n` nodes.
///
/// Each step, with probability `1 - u`, a new node attaches to a uniformly
/// chosen existing node and the pairs (newcomer, neighbor of target) become
/// potential edges; otherwise one uniformly chosen potential edge becomes
/// real. Growth starts from a single edge between nodes 0 and 1. Potential
/// edges left over when `n` nodes exist are discarded.
pub fn generate_cnn<R: Rng + ?Sized>(n: usize, u: f64, rng: &mut R) -> Result<Graph, NetworkError> {
    if n < 2 {
        return Err(NetworkError::TooFewNodes(n));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(NetworkError::InvalidConversionProbability(u));
    }

    let mut adjacency: Vec<Vec<NodeId>> = vec![vec![1], vec![0]];
    let mut edges = vec![(0, 1)];
    // Pairs at distance 2 when recorded; selection is uniform so order only
    // matters for reproducibility.
    let mut potential: Vec<(NodeId, NodeId)> = Vec::new();

    while adjacency.len() < n {
        if rng.random::<f64>() >= u {
            let newcomer = adjacency.len();
            let target = rng.random_range(0..newcomer);
            potential.extend(adjacency[target].iter().map(|&w| (w, newcomer)));
            adjacency[target].push(newcomer);
            adjacency.push(vec![target]);
            edges.push((target, newcomer));
        } else if !potential.is_empty() {
            let pick = rng.random_range(0..potential.len());
            let (a, b) = potential.swap_remove(pick);
            // Endpoints may already be joined by another route.
            if adjacency[a].contains(&b) {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            edges.push((a.min(b), a.max(b)));
        }
    }

    Ok(Graph::assemble(n, edges, adjacency))
}

/// Degree-preserving randomization by repeated double-edge swaps.
///
/// Picks two edges `(a, b)` and `(c, d)` and rewires them to `(a, d)` and
/// `(c, b)` whenever that keeps the graph simple. The result has the same
/// degree sequence as `graph` but no triangle structure beyond chance, so it
/// serves as the null model for clustering comparisons.
pub fn degree_preserving_rewire<R: Rng + ?Sized>(graph: &Graph, swaps: usize, rng: &mut R) -> Graph {
    let mut edges = graph.edges.clone();
    let mut present: HashSet<(NodeId, NodeId)> = edges.iter().copied().collect();
    if edges.len() < 2 {
        return graph.clone();
    }
    let key = |x: NodeId, y: NodeId| (x.min(y), x.max(y));
    for _ in 0..swaps {
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        if a == d || c == b || present.contains(&key(a, d)) || present.contains(&key(c, b)) {
            continue;
        }
        present.remove(&key(a, b));
        present.remove(&key(c, d));
        edges[i] = key(a, d);
        edges[j] = key(c, b);
        present.insert(edges[i]);
        present.insert(edges[j]);
    }
    let mut adjacency = vec![Vec::new(); graph.node_count];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    Graph::assemble(graph.node_count, edges, adjacency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (0, i))).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn degree_queries() {
        let path = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(path.degree(0).unwrap(), 1);
        for node in 0..3 {
            assert_eq!(triangle().degree(node).unwrap(), 2);
        }
        assert_eq!(star(5).degree(0).unwrap(), 4);
        assert!(matches!(
            star(5).degree(5),
            Err(NetworkError::NodeOutOfRange {
                node: 5,
                node_count: 5
            })
        ));
    }

    #[test]
    fn clustering_of_small_graphs() {
        assert_eq!(triangle().clustering_coefficient(), 1.0);
        assert_eq!(star(5).clustering_coefficient(), 0.0);
    }

    #[test]
    fn clustering_of_four_clique_minus_edge() {
        // K4 without (2, 3).
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        // Brute force: enumerate every node triple and count closed ones per node.
        let mut expected = 0.0;
        for v in 0..4 {
            let nbrs: Vec<_> = (0..4).filter(|&w| w != v && g.has_edge(v, w)).collect();
            let k = nbrs.len();
            let mut closed = 0;
            for x in 0..4 {
                for y in (x + 1)..4 {
                    if x != v && y != v && g.has_edge(v, x) && g.has_edge(v, y) && g.has_edge(x, y) {
                        closed += 1;
                    }
                }
            }
            if k >= 2 {
                expected += closed as f64 / (k * (k - 1) / 2) as f64;
            }
        }
        expected /= 4.0;
        // Nodes 0 and 1 see 2 of 3 neighbor pairs closed; 2 and 3 are fully closed.
        assert!((expected - (2.0 / 3.0 + 2.0 / 3.0 + 1.0 + 1.0) / 4.0).abs() < 1e-15);
        assert!((g.clustering_coefficient() - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            generate_cnn(1, 0.5, &mut rng),
            Err(NetworkError::TooFewNodes(1))
        ));
        assert!(matches!(
            generate_cnn(10, 1.0, &mut rng),
            Err(NetworkError::InvalidConversionProbability(_))
        ));
        assert!(generate_cnn(10, -0.1, &mut rng).is_err());
        assert!(generate_cnn(10, f64::NAN, &mut rng).is_err());
        assert!(matches!(
            Graph::from_edges(2, [(1, 1)]),
            Err(NetworkError::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(NetworkError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn two_nodes_is_a_single_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_cnn(2, 0.9, &mut rng).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn three_nodes_is_path_or_triangle() {
        for seed in 0..50 {
            for u in [0.0, 0.5, 0.9] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = generate_cnn(3, u, &mut rng).unwrap();
                assert!(g.is_connected());
                // The third node arrives last, so the triangle cannot close.
                assert_eq!(g.edge_count(), 2);
            }
        }
    }

    #[test]
    fn zero_u_grows_a_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = generate_cnn(200, 0.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 199);
        assert!(g.is_connected());
    }

    #[test]
    fn edge_list_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = generate_cnn(60, 0.9, &mut rng).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf, 0.9, 4).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# nodes=60 u=0.9 seed=4\n"));
        let back = Graph::read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        assert!(Graph::read_edge_list("0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn rewire_preserves_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = generate_cnn(150, 0.9, &mut rng).unwrap();
        let r = degree_preserving_rewire(&g, 10 * g.edge_count(), &mut rng);
        assert_eq!(r.degrees(), g.degrees());
        assert_eq!(r.edge_count(), g.edge_count());
        assert_ne!(r.edges(), g.edges());
        // Rebuilding through the checked constructor rejects loops and duplicates.
        assert!(Graph::from_edges(r.node_count(), r.edges().iter().copied()).is_ok());
    }
}

//! Graph representation, validation, synthetic transfer topologies, shift
//! operators, matrix powers, and walk counting.
//!
//! Graphs are simple, undirected, and connected; node ids are 0-based
//! contiguous integers. All matrices are dense.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on graph size; everything downstream is dense.
pub const MAX_NODES: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: node {0} is unreachable from node 0")]
    Disconnected(usize),
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("source-target distance {given} below the minimum {minimum} for this topology")]
    InvalidDistance { given: usize, minimum: usize },
    #[error("graph has {0} nodes, more than the supported {MAX_NODES}")]
    TooLarge(usize),
}

/// A simple undirected connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    /// Normalized edges with `u < v`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph from an edge list.
    pub fn new(num_nodes: usize, edge_list: &[(usize, usize)]) -> Result<Self, GraphError> {
        if num_nodes > MAX_NODES {
            return Err(GraphError::TooLarge(num_nodes));
        }
        if edge_list.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            if u >= num_nodes {
                return Err(GraphError::NodeOutOfRange {
                    node: u,
                    num_nodes,
                });
            }
            if v >= num_nodes {
                return Err(GraphError::NodeOutOfRange {
                    node: v,
                    num_nodes,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }

        let mut neighbors = vec![Vec::new(); num_nodes];
        let mut degrees = vec![0usize; num_nodes];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
            degrees[u] += 1;
            degrees[v] += 1;
        }
        for adj in &mut neighbors {
            adj.sort_unstable();
        }

        let graph = Graph {
            num_nodes,
            edges,
            degrees,
            neighbors,
        };
        let reach = graph.bfs_distances(0);
        if let Some(node) = reach.iter().position(|d| d.is_none()) {
            return Err(GraphError::Disconnected(node));
        }
        Ok(graph)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges normalized to `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn min_degree(&self) -> usize {
        *self.degrees.iter().min().expect("graph is non-empty")
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Non-edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.num_nodes {
            for v in (u + 1)..self.num_nodes {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Returns a new graph with `extra` added. The originals are untouched.
    pub fn with_edges(&self, extra: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut edge_list = self.edges.clone();
        edge_list.extend_from_slice(extra);
        Graph::new(self.num_nodes, &edge_list)
    }

    /// BFS distances from `v`; `None` marks unreachable nodes (only possible
    /// during construction, before connectivity has been checked).
    pub fn bfs_distances(&self, v: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes];
        let mut queue = std::collections::VecDeque::new();
        dist[v] = Some(0);
        queue.push_back(v);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &y in &self.neighbors[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Geodesic distance between two nodes of a connected graph.
    pub fn distance(&self, v: usize, u: usize) -> usize {
        self.bfs_distances(v)[u].expect("graph is connected")
    }

    /// Largest geodesic distance over all pairs.
    pub fn diameter(&self) -> usize {
        (0..self.num_nodes)
            .map(|v| {
                self.bfs_distances(v)
                    .iter()
                    .map(|d| d.expect("graph is connected"))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Number of shortest paths between two nodes.
    pub fn shortest_path_count(&self, v: usize, u: usize) -> u64 {
        let dist = self.bfs_distances(v);
        let mut counts = vec![0u64; self.num_nodes];
        counts[v] = 1;
        let mut order: Vec<usize> = (0..self.num_nodes).collect();
        order.sort_by_key(|&x| dist[x]);
        for &x in &order {
            if x == v {
                continue;
            }
            let dx = dist[x].unwrap();
            counts[x] = self.neighbors[x]
                .iter()
                .filter(|&&y| dist[y] == Some(dx - 1))
                .map(|&y| counts[y])
                .sum();
        }
        counts[u]
    }

    /// Two-coloring check; bipartite graphs have a normalized-Laplacian
    /// eigenvalue at exactly 2.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![None; self.num_nodes];
        let mut queue = std::collections::VecDeque::new();
        color[0] = Some(false);
        queue.push_back(0);
        while let Some(x) = queue.pop_front() {
            let cx = color[x].unwrap();
            for &y in &self.neighbors[x] {
                match color[y] {
                    None => {
                        color[y] = Some(!cx);
                        queue.push_back(y);
                    }
                    Some(cy) if cy == cx => return false,
                    Some(_) => {}
                }
            }
        }
        true
    }

    /// Unnormalized adjacency matrix.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::<f64>::zeros((self.num_nodes, self.num_nodes));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }
}

/// The supported graph shift operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftOperatorKind {
    /// Unnormalized adjacency `A`.
    Adjacency,
    /// Random-walk normalization `D⁻¹A`; rows sum to one.
    RandomWalk,
    /// Symmetric normalization `D^{-1/2} A D^{-1/2}`.
    Symmetric,
}

impl ShiftOperatorKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adjacency" | "adj" | "gin" => Some(Self::Adjacency),
            "random-walk" | "random_walk" | "rw" | "sage" => Some(Self::RandomWalk),
            "symmetric" | "sym" | "gcn" => Some(Self::Symmetric),
            _ => None,
        }
    }
}

impl std::fmt::Display for ShiftOperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Adjacency => write!(f, "adjacency"),
            Self::RandomWalk => write!(f, "random-walk"),
            Self::Symmetric => write!(f, "symmetric"),
        }
    }
}

/// Dense shift operator of the requested kind.
pub fn shift_operator(graph: &Graph, kind: ShiftOperatorKind) -> Array2<f64> {
    let n = graph.num_nodes();
    let mut m = Array2::<f64>::zeros((n, n));
    for &(u, v) in graph.edges() {
        match kind {
            ShiftOperatorKind::Adjacency => {
                m[[u, v]] = 1.0;
                m[[v, u]] = 1.0;
            }
            ShiftOperatorKind::Symmetric => {
                let w = 1.0 / ((graph.degree(u) as f64) * (graph.degree(v) as f64)).sqrt();
                m[[u, v]] = w;
                m[[v, u]] = w;
            }
            ShiftOperatorKind::RandomWalk => {
                m[[u, v]] = 1.0 / graph.degree(u) as f64;
                m[[v, u]] = 1.0 / graph.degree(v) as f64;
            }
        }
    }
    m
}

/// The message-passing matrix `S = c_r·I + c_a·Â`.
#[derive(Debug, Clone)]
pub struct MessagePassingMatrix {
    pub base: ShiftOperatorKind,
    pub residual_scale: f64,
    pub aggregation_scale: f64,
    pub matrix: Array2<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("message-passing coefficient {name} = {value} is negative")]
pub struct NegativeCoefficient {
    pub name: &'static str,
    pub value: f64,
}

/// Builds `S = c_r·I + c_a·Â` for a graph and shift-operator kind.
pub fn message_passing_matrix(
    graph: &Graph,
    kind: ShiftOperatorKind,
    residual_scale: f64,
    aggregation_scale: f64,
) -> Result<MessagePassingMatrix, NegativeCoefficient> {
    if residual_scale < 0.0 {
        return Err(NegativeCoefficient {
            name: "c_r",
            value: residual_scale,
        });
    }
    if aggregation_scale < 0.0 {
        return Err(NegativeCoefficient {
            name: "c_a",
            value: aggregation_scale,
        });
    }
    let n = graph.num_nodes();
    let mut matrix = shift_operator(graph, kind);
    matrix.mapv_inplace(|x| aggregation_scale * x);
    for i in 0..n {
        matrix[[i, i]] += residual_scale;
    }
    Ok(MessagePassingMatrix {
        base: kind,
        residual_scale,
        aggregation_scale,
        matrix,
    })
}

/// `(S^m)_{vu}` by repeated dense multiplication.
pub fn matrix_power_entry(s: &Array2<f64>, m: usize, v: usize, u: usize) -> f64 {
    matrix_power(s, m)[[v, u]]
}

/// `S^m` by repeated dense multiplication; `S⁰ = I`.
pub fn matrix_power(s: &Array2<f64>, m: usize) -> Array2<f64> {
    let n = s.nrows();
    let mut acc = Array2::<f64>::eye(n);
    for _ in 0..m {
        acc = acc.dot(s);
    }
    acc
}

/// Number of walks from `v` to `u` of length at most `max_len`, using the
/// unnormalized adjacency: `γ_ℓ(v,u) = Σ_{i=0..ℓ} (A^i)_{vu}`.
///
/// Counts are exact while they fit in the 2^53 integer range of `f64` and
/// saturate at `u64::MAX` beyond it.
pub fn walk_count(graph: &Graph, v: usize, u: usize, max_len: usize) -> u64 {
    let a = graph.adjacency();
    let n = graph.num_nodes();
    let mut power = Array2::<f64>::eye(n);
    let mut total = 0.0f64;
    for step in 0..=max_len {
        if step > 0 {
            power = power.dot(&a);
        }
        total += power[[v, u]];
    }
    if total >= u64::MAX as f64 {
        u64::MAX
    } else {
        total.round() as u64
    }
}

/// Sum over all walks `v = x_0, …, x_m = u` of the entry products
/// `Π S_{x_i, x_{i+1}}`, enumerated recursively over the nonzero pattern of
/// `S`. Independent oracle for [`matrix_power_entry`].
pub fn enumerate_weighted_walks(s: &Array2<f64>, m: usize, v: usize, u: usize) -> f64 {
    fn recurse(s: &Array2<f64>, steps_left: usize, at: usize, target: usize) -> f64 {
        if steps_left == 0 {
            return if at == target { 1.0 } else { 0.0 };
        }
        let mut acc = 0.0;
        for next in 0..s.nrows() {
            let w = s[[at, next]];
            if w != 0.0 {
                acc += w * recurse(s, steps_left - 1, next, target);
            }
        }
        acc
    }
    recurse(s, m, v, u)
}

/// The synthetic transfer topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferKind {
    Ring,
    CrossedRing,
    CliquePath,
}

impl TransferKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Some(Self::Ring),
            "crossed-ring" | "crossed_ring" | "crossedring" => Some(Self::CrossedRing),
            "clique-path" | "clique_path" | "cliquepath" => Some(Self::CliquePath),
            _ => None,
        }
    }

    /// Smallest admissible source-target distance for this topology.
    pub fn min_distance(self) -> usize {
        match self {
            Self::Ring => 2,
            Self::CrossedRing | Self::CliquePath => 3,
        }
    }

    pub fn build(self, r: usize) -> Result<(Graph, TransferTopology), GraphError> {
        match self {
            Self::Ring => make_ring(r),
            Self::CrossedRing => make_crossed_ring(r),
            Self::CliquePath => make_clique_path(r),
        }
    }
}

impl std::fmt::Display for TransferKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Ring => write!(f, "ring"),
            Self::CrossedRing => write!(f, "crossed-ring"),
            Self::CliquePath => write!(f, "clique-path"),
        }
    }
}

/// Source/target designation of a transfer topology; the source-target
/// geodesic distance is exactly `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferTopology {
    pub kind: TransferKind,
    pub r: usize,
    pub source: usize,
    pub target: usize,
}

/// Cycle on `2r` nodes with source 0 and target `r` at distance exactly `r`.
pub fn make_ring(r: usize) -> Result<(Graph, TransferTopology), GraphError> {
    if r < 2 {
        return Err(GraphError::InvalidDistance {
            given: r,
            minimum: 2,
        });
    }
    let n = 2 * r;
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let graph = Graph::new(n, &edges)?;
    let topo = TransferTopology {
        kind: TransferKind::Ring,
        r,
        source: 0,
        target: r,
    };
    debug_assert_eq!(graph.distance(topo.source, topo.target), r);
    Ok((graph, topo))
}

/// Cycle on `2r` nodes with crosses between the two arms.
///
/// Arm nodes at distance `j` from the source (`j` on one arm, `2r-j` on the
/// other, `1 ≤ j ≤ r-1`) are joined to the opposite-arm nodes at distances
/// `j-1` and `j+1`; source and target take no crosses. Every edge changes the
/// distance-to-source level by exactly one, so the source-target distance
/// stays `r`.
pub fn make_crossed_ring(r: usize) -> Result<(Graph, TransferTopology), GraphError> {
    if r < 3 {
        return Err(GraphError::InvalidDistance {
            given: r,
            minimum: 3,
        });
    }
    let n = 2 * r;
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    // Arm one holds node j at level j; arm two holds node 2r - j.
    for j in 1..r {
        if j + 1 <= r - 1 {
            edges.push((j, n - (j + 1)));
        }
        if j >= 2 {
            edges.push((j, n - (j - 1)));
        }
    }
    let graph = Graph::new(n, &edges)?;
    let topo = TransferTopology {
        kind: TransferKind::CrossedRing,
        r,
        source: 0,
        target: r,
    };
    debug_assert_eq!(graph.distance(topo.source, topo.target), r);
    Ok((graph, topo))
}

/// An `(r-1)`-clique joined to a path of `r-1` nodes so that the source
/// (node 0, in the clique) sits at distance exactly `r` from the target (the
/// path end). Node 1 of the clique is the single attachment point, so the
/// source needs one hop to gain access to the path.
pub fn make_clique_path(r: usize) -> Result<(Graph, TransferTopology), GraphError> {
    if r < 3 {
        return Err(GraphError::InvalidDistance {
            given: r,
            minimum: 3,
        });
    }
    let clique_size = r - 1;
    let n = 2 * (r - 1);
    let mut edges = Vec::new();
    for u in 0..clique_size {
        for v in (u + 1)..clique_size {
            edges.push((u, v));
        }
    }
    edges.push((1, clique_size));
    for p in clique_size..(n - 1) {
        edges.push((p, p + 1));
    }
    let graph = Graph::new(n, &edges)?;
    let topo = TransferTopology {
        kind: TransferKind::CliquePath,
        r,
        source: 0,
        target: n - 1,
    };
    debug_assert_eq!(graph.distance(topo.source, topo.target), r);
    Ok((graph, topo))
}

/// Random connected simple graph: a random spanning tree plus each remaining
/// pair independently with probability `extra_edge_prob`.
pub fn random_connected_graph<R: Rng>(
    num_nodes: usize,
    extra_edge_prob: f64,
    rng: &mut R,
) -> Graph {
    assert!(num_nodes >= 2);
    let mut edges = Vec::new();
    for v in 1..num_nodes {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v));
    }
    let tree: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
    for u in 0..num_nodes {
        for v in (u + 1)..num_nodes {
            if !tree.contains(&(u, v)) && rng.gen_bool(extra_edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(num_nodes, &edges).expect("tree plus extra edges is connected and simple")
}

/// Like [`random_connected_graph`] but resampled until non-bipartite.
pub fn random_connected_non_bipartite_graph<R: Rng>(
    num_nodes: usize,
    extra_edge_prob: f64,
    rng: &mut R,
) -> Graph {
    assert!(num_nodes >= 3);
    loop {
        let g = random_connected_graph(num_nodes, extra_edge_prob, rng);
        if !g.is_bipartite() {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::new(2, &[(0, 1)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn builds_k2() {
        let g = k2();
        assert_eq!(g.degrees(), &[1, 1]);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn builds_triangle() {
        let g = triangle();
        assert_eq!(g.degrees(), &[2, 2, 2]);
    }

    #[test]
    fn rejects_disconnected() {
        assert_eq!(
            Graph::new(3, &[(0, 1)]),
            Err(GraphError::Disconnected(2))
        );
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert_eq!(Graph::new(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::new(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::new(2, &[(0, 3)]),
            Err(GraphError::NodeOutOfRange {
                node: 3,
                num_nodes: 2
            })
        );
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let g = triangle();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.num_edges());
    }

    #[test]
    fn ring_distance_and_closed_form() {
        let (g, topo) = make_ring(5).unwrap();
        assert_eq!(g.num_nodes(), 10);
        assert_eq!(g.distance(topo.source, topo.target), 5);
        let a_hat = shift_operator(&g, ShiftOperatorKind::Symmetric);
        let entry = matrix_power_entry(&a_hat, 5, topo.source, topo.target);
        assert!((entry - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn ring_minimum_size() {
        assert!(make_ring(2).is_ok());
        assert!(matches!(
            make_ring(1),
            Err(GraphError::InvalidDistance { .. })
        ));
    }

    #[test]
    fn crossed_ring_preserves_distance() {
        for r in 3..=7 {
            let (g, topo) = make_crossed_ring(r).unwrap();
            assert_eq!(g.distance(topo.source, topo.target), r, "r = {r}");
            assert_eq!(g.num_nodes(), 2 * r);
        }
    }

    #[test]
    fn crossed_ring_matches_walk_enumeration() {
        let (g, topo) = make_crossed_ring(4).unwrap();
        let s = message_passing_matrix(&g, ShiftOperatorKind::Symmetric, 0.5, 0.5)
            .unwrap()
            .matrix;
        let by_power = matrix_power_entry(&s, 4, topo.source, topo.target);
        let by_walks = enumerate_weighted_walks(&s, 4, topo.source, topo.target);
        assert!((by_power - by_walks).abs() < 1e-12);
    }

    #[test]
    fn clique_path_shape() {
        let (g, topo) = make_clique_path(4).unwrap();
        assert_eq!(g.distance(topo.source, topo.target), 4);
        assert_eq!(g.degree(topo.target), 1);
        assert_eq!(g.shortest_path_count(topo.source, topo.target), 1);
    }

    #[test]
    fn shift_operator_entries() {
        let sym = shift_operator(&k2(), ShiftOperatorKind::Symmetric);
        assert_eq!(sym[[0, 1]], 1.0);
        assert_eq!(sym[[0, 0]], 0.0);

        let (c4, _) = make_ring(2).unwrap();
        let sym = shift_operator(&c4, ShiftOperatorKind::Symmetric);
        for &(u, v) in c4.edges() {
            assert!((sym[[u, v]] - 0.5).abs() < 1e-15);
        }

        let rw = shift_operator(&triangle(), ShiftOperatorKind::RandomWalk);
        for row in 0..3 {
            let sum: f64 = (0..3).map(|col| rw[[row, col]]).sum();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_operator_supports_edges_exactly() {
        let g = triangle();
        for kind in [
            ShiftOperatorKind::Adjacency,
            ShiftOperatorKind::RandomWalk,
            ShiftOperatorKind::Symmetric,
        ] {
            let m = shift_operator(&g, kind);
            for u in 0..3 {
                for v in 0..3 {
                    assert_eq!(m[[u, v]] != 0.0, g.has_edge(u, v), "kind {kind}");
                }
            }
        }
    }

    #[test]
    fn message_passing_matrix_composition() {
        let g = k2();
        let identity = message_passing_matrix(&g, ShiftOperatorKind::Symmetric, 1.0, 0.0)
            .unwrap()
            .matrix;
        assert_eq!(identity, Array2::<f64>::eye(2));

        let pure_shift = message_passing_matrix(&g, ShiftOperatorKind::Symmetric, 0.0, 1.0)
            .unwrap()
            .matrix;
        assert_eq!(pure_shift, shift_operator(&g, ShiftOperatorKind::Symmetric));

        let both = message_passing_matrix(&g, ShiftOperatorKind::Symmetric, 1.0, 1.0)
            .unwrap()
            .matrix;
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(both[[i, j]], 1.0);
            }
        }

        assert!(message_passing_matrix(&g, ShiftOperatorKind::Symmetric, -0.1, 1.0).is_err());
    }

    #[test]
    fn matrix_power_zero_is_identity() {
        let s = shift_operator(&triangle(), ShiftOperatorKind::Symmetric);
        assert_eq!(matrix_power_entry(&s, 0, 0, 0), 1.0);
        assert_eq!(matrix_power_entry(&s, 0, 0, 1), 0.0);
    }

    #[test]
    fn matrix_power_matches_enumeration_on_random_graphs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let g = random_connected_graph(n, 0.3, &mut rng);
            let s = message_passing_matrix(&g, ShiftOperatorKind::Symmetric, 0.7, 0.9)
                .unwrap()
                .matrix;
            let m = rng.gen_range(0..=6);
            let v = rng.gen_range(0..n);
            let u = rng.gen_range(0..n);
            let by_power = matrix_power_entry(&s, m, v, u);
            let by_walks = enumerate_weighted_walks(&s, m, v, u);
            assert!(
                (by_power - by_walks).abs() < 1e-12,
                "n={n} m={m} v={v} u={u}"
            );
        }
    }

    #[test]
    fn walk_counts() {
        let path3 = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(walk_count(&path3, 0, 2, 2), 1);

        let g = triangle();
        assert_eq!(walk_count(&g, 0, 1, 2), 2);
        assert_eq!(walk_count(&g, 0, 0, 0), 1);
        assert_eq!(walk_count(&g, 0, 1, 0), 0);
    }

    #[test]
    fn walk_count_monotone_and_symmetric() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.gen_range(3..=8);
            let g = random_connected_graph(n, 0.4, &mut rng);
            let v = rng.gen_range(0..n);
            let u = rng.gen_range(0..n);
            let mut prev = 0;
            for len in 0..=5 {
                let count = walk_count(&g, v, u, len);
                assert!(count >= prev);
                assert_eq!(count, walk_count(&g, u, v, len));
                prev = count;
            }
        }
    }

    #[test]
    fn bfs_distances_on_known_graphs() {
        let (c10, topo) = make_ring(5).unwrap();
        let dist = c10.bfs_distances(topo.source);
        let max = dist.iter().map(|d| d.unwrap()).max().unwrap();
        assert_eq!(max, 5);

        let k4 = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for v in 0..4 {
            for (u, d) in k4.bfs_distances(v).iter().enumerate() {
                assert_eq!(d.unwrap(), usize::from(u != v));
            }
        }
    }

    #[test]
    fn bipartiteness() {
        let (c4, _) = make_ring(2).unwrap();
        assert!(c4.is_bipartite());
        assert!(!triangle().is_bipartite());
    }

    #[test]
    fn random_graphs_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(2..=12);
            let g = random_connected_graph(n, 0.2, &mut rng);
            assert_eq!(g.num_nodes(), n);
            assert!(g.bfs_distances(0).iter().all(|d| d.is_some()));
            assert!(g.min_degree() >= 1);
        }
    }
}

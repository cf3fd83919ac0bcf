//! Normalized-Laplacian eigendecomposition and the spectral topology
//! metrics: spectral gap, Cheeger bounds, effective resistance, access and
//! commute times, plus Monte-Carlo random-walk oracles.

use crate::graph::Graph;
use crate::numeric::{self, NumericError};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("exhaustive Cheeger constant needs n <= {limit}, got n = {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("access and commute times need two distinct nodes, got {0} twice")]
    SameNode(usize),
}

/// Largest graph for which the Cheeger constant is computed exhaustively.
pub const CHEEGER_EXACT_LIMIT: usize = 16;

/// `Δ = I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(graph: &Graph) -> Array2<f64> {
    let n = graph.num_nodes();
    let mut m = Array2::<f64>::eye(n);
    for &(u, v) in graph.edges() {
        let w = 1.0 / ((graph.degree(u) as f64) * (graph.degree(v) as f64)).sqrt();
        m[[u, v]] = -w;
        m[[v, u]] = -w;
    }
    m
}

/// Eigenpairs of the normalized Laplacian together with the degree data the
/// spectral sums need.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues `λ_0 ≤ … ≤ λ_{n-1}`.
    pub eigenvalues: Array1<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: Array2<f64>,
    pub degrees: Vec<usize>,
    pub num_edges: usize,
}

impl SpectralDecomposition {
    /// Decomposes the normalized Laplacian of `graph` by cyclic Jacobi
    /// rotations.
    pub fn from_graph(graph: &Graph) -> Result<Self, SpectralError> {
        let eig = numeric::jacobi_eigen(&normalized_laplacian(graph))?;
        Ok(SpectralDecomposition {
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            degrees: graph.degrees().to_vec(),
            num_edges: graph.num_edges(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    /// `λ_1`, the smallest positive eigenvalue of a connected graph.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    fn eigvec(&self, ell: usize, v: usize) -> f64 {
        self.eigenvectors[[v, ell]]
    }

    /// `Σ_{ℓ≥1} (1/λ_ℓ) (ψ_ℓ(v)/√d_v - ψ_ℓ(u)/√d_u)²`.
    pub fn effective_resistance(&self, v: usize, u: usize) -> f64 {
        if v == u {
            return 0.0;
        }
        let dv = (self.degrees[v] as f64).sqrt();
        let du = (self.degrees[u] as f64).sqrt();
        let mut acc = 0.0;
        for ell in 1..self.num_nodes() {
            let diff = self.eigvec(ell, v) / dv - self.eigvec(ell, u) / du;
            acc += diff * diff / self.eigenvalues[ell];
        }
        acc
    }

    /// Expected steps of a random walk started at `v` until it first visits
    /// `u`: `2|E| Σ_{ℓ≥1} (1/λ_ℓ)(ψ_ℓ²(u)/d_u - ψ_ℓ(v)ψ_ℓ(u)/√(d_v d_u))`.
    pub fn access_time(&self, v: usize, u: usize) -> Result<f64, SpectralError> {
        if v == u {
            return Err(SpectralError::SameNode(v));
        }
        let dv = self.degrees[v] as f64;
        let du = self.degrees[u] as f64;
        let mut acc = 0.0;
        for ell in 1..self.num_nodes() {
            let pu = self.eigvec(ell, u);
            let pv = self.eigvec(ell, v);
            acc += (pu * pu / du - pv * pu / (dv * du).sqrt()) / self.eigenvalues[ell];
        }
        Ok(2.0 * self.num_edges as f64 * acc)
    }

    /// `τ(v,u) = t(v,u) + t(u,v)`; equals `2|E|·Res(v,u)`.
    pub fn commute_time(&self, v: usize, u: usize) -> Result<f64, SpectralError> {
        Ok(self.access_time(v, u)? + self.access_time(u, v)?)
    }

    /// Total effective resistance, summed over unordered pairs.
    pub fn total_resistance(&self) -> f64 {
        let n = self.num_nodes();
        let mut acc = 0.0;
        for v in 0..n {
            for u in (v + 1)..n {
                acc += self.effective_resistance(v, u);
            }
        }
        acc
    }
}

/// `(λ_1/2, √(2λ_1))`; the Cheeger inequality `2h ≥ λ_1 > h²/2` puts the
/// Cheeger constant between the two.
pub fn cheeger_bounds(spectral_gap: f64) -> (f64, f64) {
    (spectral_gap / 2.0, (2.0 * spectral_gap).sqrt())
}

/// Exhaustive Cheeger constant
/// `min_U cut(U) / min(vol(U), vol(V∖U))` over non-empty proper subsets.
pub fn cheeger_exact(graph: &Graph) -> Result<f64, SpectralError> {
    let n = graph.num_nodes();
    if n > CHEEGER_EXACT_LIMIT {
        return Err(SpectralError::TooLarge {
            n,
            limit: CHEEGER_EXACT_LIMIT,
        });
    }
    let total_volume: usize = graph.degrees().iter().sum();
    let mut best = f64::INFINITY;
    // Node 0's side is fixed, which enumerates each bipartition once.
    for mask in 0u32..(1 << (n - 1)) {
        let in_side = |v: usize| v == 0 || (mask >> (v - 1)) & 1 == 1;
        let mut volume = 0usize;
        for v in 0..n {
            if in_side(v) {
                volume += graph.degree(v);
            }
        }
        if volume == 0 || volume == total_volume {
            continue;
        }
        let mut cut = 0usize;
        for &(u, v) in graph.edges() {
            if in_side(u) != in_side(v) {
                cut += 1;
            }
        }
        let ratio = cut as f64 / volume.min(total_volume - volume) as f64;
        if ratio < best {
            best = ratio;
        }
    }
    Ok(best)
}

/// Effective resistance through the combinatorial Laplacian `L = D - A`:
/// solves the grounded system for `(e_v - e_u)ᵀ L⁺ (e_v - e_u)`.
/// Independent oracle for [`SpectralDecomposition::effective_resistance`].
pub fn resistance_pinv_oracle(graph: &Graph, v: usize, u: usize) -> Result<f64, SpectralError> {
    if v == u {
        return Ok(0.0);
    }
    let n = graph.num_nodes();
    // Ground a node distinct from both endpoints when possible; grounding an
    // endpoint is fine too since its potential is then fixed at zero.
    let ground = (0..n).find(|&g| g != v && g != u).unwrap_or(0);
    let index = |w: usize| if w < ground { w } else { w - 1 };

    let mut lap = Array2::<f64>::zeros((n - 1, n - 1));
    for w in 0..n {
        if w != ground {
            lap[[index(w), index(w)]] = graph.degree(w) as f64;
        }
    }
    for &(a, b) in graph.edges() {
        if a != ground && b != ground {
            lap[[index(a), index(b)]] -= 1.0;
            lap[[index(b), index(a)]] -= 1.0;
        }
    }
    let mut rhs = Array1::<f64>::zeros(n - 1);
    if v != ground {
        rhs[index(v)] = 1.0;
    }
    if u != ground {
        rhs[index(u)] = -1.0;
    }
    let x = numeric::solve_linear(&lap, &rhs)?;
    let potential = |w: usize| if w == ground { 0.0 } else { x[index(w)] };
    Ok(potential(v) - potential(u))
}

/// All pairwise topology metrics of a graph.
#[derive(Debug, Clone)]
pub struct TopologyMetrics {
    pub spectral_gap: f64,
    pub cheeger_lower: f64,
    pub cheeger_upper: f64,
    /// Exhaustive Cheeger constant, present when `n ≤ 16`.
    pub cheeger_exact: Option<f64>,
    pub total_resistance: f64,
    pub resistance: Array2<f64>,
    pub commute: Array2<f64>,
    /// `access[[v, u]] = t(v,u)`; not symmetric.
    pub access: Array2<f64>,
}

impl TopologyMetrics {
    pub fn compute(graph: &Graph) -> Result<Self, SpectralError> {
        let decomp = SpectralDecomposition::from_graph(graph)?;
        Self::from_decomposition(graph, &decomp)
    }

    pub fn from_decomposition(
        graph: &Graph,
        decomp: &SpectralDecomposition,
    ) -> Result<Self, SpectralError> {
        let n = graph.num_nodes();
        let mut resistance = Array2::<f64>::zeros((n, n));
        let mut access = Array2::<f64>::zeros((n, n));
        let mut commute = Array2::<f64>::zeros((n, n));
        for v in 0..n {
            for u in 0..n {
                if v != u {
                    access[[v, u]] = decomp.access_time(v, u)?;
                }
            }
        }
        let mut total = 0.0;
        for v in 0..n {
            for u in (v + 1)..n {
                let res = decomp.effective_resistance(v, u);
                resistance[[v, u]] = res;
                resistance[[u, v]] = res;
                let tau = access[[v, u]] + access[[u, v]];
                commute[[v, u]] = tau;
                commute[[u, v]] = tau;
                total += res;
            }
        }
        let gap = decomp.spectral_gap();
        let (lower, upper) = cheeger_bounds(gap);
        let exact = if n <= CHEEGER_EXACT_LIMIT {
            Some(cheeger_exact(graph)?)
        } else {
            None
        };
        Ok(TopologyMetrics {
            spectral_gap: gap,
            cheeger_lower: lower,
            cheeger_upper: upper,
            cheeger_exact: exact,
            total_resistance: total,
            resistance,
            commute,
            access,
        })
    }

    pub fn max_commute_time(&self) -> f64 {
        self.commute.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Empirical hitting and commute statistics from simulated random walks.
#[derive(Debug, Clone)]
pub struct WalkStats {
    pub hitting_mean: f64,
    pub hitting_stderr: f64,
    pub commute_mean: f64,
    pub commute_stderr: f64,
    /// Walks cut off at the step cap and excluded from the means.
    pub censored: usize,
    pub num_walks: usize,
}

/// Per-walk step budget for [`random_walk_oracle`].
pub const WALK_STEP_CAP: usize = 1_000_000;

/// Simulates `num_walks` random walks from `v`, recording the first-visit
/// time of `u` and the first return to `v` after that. Walk `i` runs on its
/// own generator derived from `(seed, i)`, so results do not depend on
/// evaluation order.
pub fn random_walk_oracle(
    graph: &Graph,
    v: usize,
    u: usize,
    num_walks: usize,
    seed: u64,
) -> WalkStats {
    assert!(num_walks >= 1);
    assert_ne!(v, u, "hitting time needs distinct nodes");
    let mut hit_sum = 0.0;
    let mut hit_sq = 0.0;
    let mut commute_sum = 0.0;
    let mut commute_sq = 0.0;
    let mut censored = 0usize;
    let mut completed = 0usize;
    for walk in 0..num_walks {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, walk as u64));
        let mut at = v;
        let mut steps = 0usize;
        let mut hit: Option<usize> = None;
        let mut done = false;
        while steps < WALK_STEP_CAP {
            let nbrs = graph.neighbors(at);
            at = nbrs[rng.gen_range(0..nbrs.len())];
            steps += 1;
            if hit.is_none() {
                if at == u {
                    hit = Some(steps);
                }
            } else if at == v {
                done = true;
                break;
            }
        }
        if done {
            let h = hit.unwrap() as f64;
            let c = steps as f64;
            hit_sum += h;
            hit_sq += h * h;
            commute_sum += c;
            commute_sq += c * c;
            completed += 1;
        } else {
            censored += 1;
        }
    }
    let n = completed.max(1) as f64;
    let mean = |sum: f64| sum / n;
    let stderr = |sum: f64, sq: f64| {
        if completed < 2 {
            return f64::INFINITY;
        }
        let m = sum / n;
        ((sq / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    };
    WalkStats {
        hitting_mean: mean(hit_sum),
        hitting_stderr: stderr(hit_sum, hit_sq),
        commute_mean: mean(commute_sum),
        commute_stderr: stderr(commute_sum, commute_sq),
        censored,
        num_walks,
    }
}

/// SplitMix64 step used to derive independent per-walk seeds.
pub fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_ring, random_connected_graph, Graph};
    use ndarray::array;

    fn k2() -> Graph {
        Graph::new(2, &[(0, 1)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn laplacian_of_k2() {
        let lap = normalized_laplacian(&k2());
        assert_eq!(lap, array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn laplacian_entries_and_kernel() {
        let g = path(4);
        let lap = normalized_laplacian(&g);
        for v in 0..4 {
            assert_eq!(lap[[v, v]], 1.0);
        }
        for &(u, v) in g.edges() {
            let expect = -1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt();
            assert!((lap[[u, v]] - expect).abs() < 1e-15);
        }
        // Δ·√d = 0 on connected graphs.
        let sqrt_d = Array1::from_iter(g.degrees().iter().map(|&d| (d as f64).sqrt()));
        let img = lap.dot(&sqrt_d);
        for x in img.iter() {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn c4_spectrum_matches_characteristic_roots() {
        // 1 - cos(2πk/4) for k = 0..3 gives {0, 1, 1, 2}.
        let (c4, _) = make_ring(2).unwrap();
        let decomp = SpectralDecomposition::from_graph(&c4).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0];
        for (got, want) in decomp.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_invariants_on_random_graphs() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..25 {
            let n = rng.gen_range(2..=10);
            let g = random_connected_graph(n, 0.35, &mut rng);
            let lap = normalized_laplacian(&g);
            let decomp = SpectralDecomposition::from_graph(&g).unwrap();
            assert!(decomp.eigenvalues[0].abs() < 1e-10);
            assert!(decomp.spectral_gap() > 0.0);
            if !g.is_bipartite() {
                assert!(decomp.largest_eigenvalue() < 2.0);
            }
            // Residuals ‖Δψ - λψ‖ and orthonormality.
            for ell in 0..n {
                let psi = decomp.eigenvectors.column(ell);
                let resid = lap.dot(&psi) - decomp.eigenvalues[ell] * &psi.to_owned();
                let norm = resid.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(norm < 1e-9, "residual {norm}");
            }
            let gram = decomp.eigenvectors.t().dot(&decomp.eigenvectors);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[[i, j]] - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn cheeger_bounds_substitution() {
        assert_eq!(cheeger_bounds(1.0), (0.5, 2.0f64.sqrt()));
        assert_eq!(cheeger_bounds(2.0), (1.0, 2.0));
    }

    #[test]
    fn cheeger_exact_known_values() {
        let k4 = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!((cheeger_exact(&k4).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let (c4, _) = make_ring(2).unwrap();
        assert!((cheeger_exact(&c4).unwrap() - 0.5).abs() < 1e-12);
        assert!((cheeger_exact(&k2()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cheeger_exact_within_spectral_bounds_on_c4() {
        let (c4, _) = make_ring(2).unwrap();
        let decomp = SpectralDecomposition::from_graph(&c4).unwrap();
        let (lower, upper) = cheeger_bounds(decomp.spectral_gap());
        let h = cheeger_exact(&c4).unwrap();
        assert!(lower <= h + 1e-12 && h <= upper);
    }

    #[test]
    fn cheeger_exact_rejects_large_graphs() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_connected_graph(17, 0.2, &mut rng);
        assert!(matches!(
            cheeger_exact(&g),
            Err(SpectralError::TooLarge { .. })
        ));
    }

    #[test]
    fn resistance_known_values() {
        let decomp = SpectralDecomposition::from_graph(&k2()).unwrap();
        assert!((decomp.effective_resistance(0, 1) - 1.0).abs() < 1e-12);

        let p4 = path(4);
        let decomp = SpectralDecomposition::from_graph(&p4).unwrap();
        assert!((decomp.effective_resistance(0, 3) - 3.0).abs() < 1e-10);

        let (c4, _) = make_ring(2).unwrap();
        let decomp = SpectralDecomposition::from_graph(&c4).unwrap();
        assert!((decomp.effective_resistance(0, 2) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pinv_oracle_known_values() {
        assert!((resistance_pinv_oracle(&k2(), 0, 1).unwrap() - 1.0).abs() < 1e-12);
        // Triangle: one direct unit resistor in parallel with two in series.
        let g = triangle();
        for (v, u) in [(0, 1), (1, 2), (0, 2)] {
            assert!((resistance_pinv_oracle(&g, v, u).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_resistance_agrees_with_pinv_oracle() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let n = rng.gen_range(2..=12);
            let g = random_connected_graph(n, 0.3, &mut rng);
            let decomp = SpectralDecomposition::from_graph(&g).unwrap();
            let v = rng.gen_range(0..n);
            let u = rng.gen_range(0..n);
            let lhs = decomp.effective_resistance(v, u);
            let rhs = if v == u {
                0.0
            } else {
                resistance_pinv_oracle(&g, v, u).unwrap()
            };
            assert!((lhs - rhs).abs() < 1e-10, "n={n} v={v} u={u}");
        }
    }

    #[test]
    fn access_and_commute_known_values() {
        let decomp = SpectralDecomposition::from_graph(&k2()).unwrap();
        assert!((decomp.access_time(0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((decomp.access_time(1, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((decomp.commute_time(0, 1).unwrap() - 2.0).abs() < 1e-12);

        let decomp = SpectralDecomposition::from_graph(&triangle()).unwrap();
        assert!((decomp.access_time(0, 1).unwrap() - 2.0).abs() < 1e-10);

        assert!(matches!(
            decomp.access_time(1, 1),
            Err(SpectralError::SameNode(1))
        ));
    }

    #[test]
    fn commute_equals_resistance_identity() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let n = rng.gen_range(2..=10);
            let g = random_connected_graph(n, 0.3, &mut rng);
            let decomp = SpectralDecomposition::from_graph(&g).unwrap();
            let two_e = 2.0 * g.num_edges() as f64;
            for v in 0..n {
                for u in (v + 1)..n {
                    let tau = decomp.commute_time(v, u).unwrap();
                    let res = decomp.effective_resistance(v, u);
                    assert!((tau - two_e * res).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn resistance_triangle_inequality() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(3..=10);
            let g = random_connected_graph(n, 0.3, &mut rng);
            let decomp = SpectralDecomposition::from_graph(&g).unwrap();
            for _ in 0..10 {
                let v = rng.gen_range(0..n);
                let u = rng.gen_range(0..n);
                let w = rng.gen_range(0..n);
                let direct = decomp.effective_resistance(v, u);
                let via = decomp.effective_resistance(v, w) + decomp.effective_resistance(w, u);
                assert!(direct <= via + 1e-10);
            }
        }
    }

    #[test]
    fn walk_oracle_on_k2() {
        let stats = random_walk_oracle(&k2(), 0, 1, 20_000, 42);
        assert_eq!(stats.censored, 0);
        assert!((stats.hitting_mean - 1.0).abs() < 0.02);
        assert!((stats.commute_mean - 2.0).abs() < 0.02);
    }

    #[test]
    fn walk_oracle_matches_spectral_on_triangle() {
        let g = triangle();
        let decomp = SpectralDecomposition::from_graph(&g).unwrap();
        let stats = random_walk_oracle(&g, 0, 1, 50_000, 7);
        let spectral = decomp.access_time(0, 1).unwrap();
        assert!((stats.hitting_mean - spectral).abs() < 3.0 * stats.hitting_stderr);
    }

    #[test]
    fn walk_oracle_is_reproducible() {
        let g = triangle();
        let a = random_walk_oracle(&g, 0, 2, 500, 99);
        let b = random_walk_oracle(&g, 0, 2, 500, 99);
        assert_eq!(a.hitting_mean, b.hitting_mean);
        assert_eq!(a.commute_mean, b.commute_mean);
    }

    #[test]
    fn metrics_assemble() {
        let g = triangle();
        let metrics = TopologyMetrics::compute(&g).unwrap();
        assert!(metrics.cheeger_exact.is_some());
        assert!(metrics.spectral_gap > 0.0);
        for v in 0..3 {
            assert_eq!(metrics.resistance[[v, v]], 0.0);
            for u in 0..3 {
                let tau = metrics.access[[v, u]] + metrics.access[[u, v]];
                assert!((metrics.commute[[v, u]] - tau).abs() < 1e-10);
            }
        }
    }
}

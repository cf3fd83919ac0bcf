//! Graph rewiring: spatial and spectral edge-addition strategies with
//! quantified before/after connectivity reports.
//!
//! All strategies are greedy, one edge at a time, with a full spectral
//! recompute per step and lexicographic tie-breaking, so identical inputs
//! produce identical plans. Rewired graphs stay simple and unweighted.

use crate::graph::{Graph, GraphError};
use crate::spectral::{cheeger_bounds, SpectralDecomposition, SpectralError, TopologyMetrics};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RewiringError {
    #[error("edge ({0}, {1}) is already present")]
    EdgeAlreadyPresent(usize, usize),
    #[error("plan adds {planned} edges, more than the budget {budget}")]
    BudgetExceeded { budget: usize, planned: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RewiringStrategy {
    SpatialThreshold,
    SpatialDiameter,
    SpectralGapGreedy,
    ResistanceGreedy,
}

impl std::fmt::Display for RewiringStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SpatialThreshold => write!(f, "spatial-threshold"),
            Self::SpatialDiameter => write!(f, "spatial-diameter"),
            Self::SpectralGapGreedy => write!(f, "spectral-gap-greedy"),
            Self::ResistanceGreedy => write!(f, "resistance-greedy"),
        }
    }
}

/// An ordered list of edges to add; the output graph stays simple.
#[derive(Debug, Clone, Serialize)]
pub struct RewiringPlan {
    pub strategy: RewiringStrategy,
    pub budget: usize,
    pub threshold: Option<f64>,
    pub added_edges: Vec<(usize, usize)>,
}

/// Connectivity summary of one graph.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectivitySnapshot {
    pub diameter: usize,
    pub spectral_gap: f64,
    pub cheeger_lower: f64,
    pub cheeger_upper: f64,
    pub cheeger_exact: Option<f64>,
    pub total_resistance: f64,
    pub max_commute_time: f64,
}

impl ConnectivitySnapshot {
    pub fn compute(graph: &Graph) -> Result<Self, SpectralError> {
        let metrics = TopologyMetrics::compute(graph)?;
        let (lower, upper) = cheeger_bounds(metrics.spectral_gap);
        Ok(ConnectivitySnapshot {
            diameter: graph.diameter(),
            spectral_gap: metrics.spectral_gap,
            cheeger_lower: lower,
            cheeger_upper: upper,
            cheeger_exact: metrics.cheeger_exact,
            total_resistance: metrics.total_resistance,
            max_commute_time: metrics.max_commute_time(),
        })
    }
}

/// Before/after connectivity values plus the marginal total-resistance change
/// of each added edge, in plan order.
#[derive(Debug, Clone, Serialize)]
pub struct RewiringReport {
    pub before: ConnectivitySnapshot,
    pub after: ConnectivitySnapshot,
    pub marginal_total_resistance: Vec<f64>,
}

/// Applies a plan, leaving the input graph untouched.
pub fn rewire(
    graph: &Graph,
    plan: &RewiringPlan,
) -> Result<(Graph, RewiringReport), RewiringError> {
    if plan.added_edges.len() > plan.budget {
        return Err(RewiringError::BudgetExceeded {
            budget: plan.budget,
            planned: plan.added_edges.len(),
        });
    }
    let before = ConnectivitySnapshot::compute(graph)?;
    let mut current = graph.clone();
    let mut total_res = before.total_resistance;
    let mut marginal = Vec::with_capacity(plan.added_edges.len());
    for &(u, v) in &plan.added_edges {
        if current.has_edge(u, v) {
            return Err(RewiringError::EdgeAlreadyPresent(u, v));
        }
        current = current.with_edges(&[(u, v)])?;
        let next_res = SpectralDecomposition::from_graph(&current)?.total_resistance();
        marginal.push(next_res - total_res);
        total_res = next_res;
    }
    let after = ConnectivitySnapshot::compute(&current)?;
    Ok((
        current,
        RewiringReport {
            before,
            after,
            marginal_total_resistance: marginal,
        },
    ))
}

/// What spatial rewiring greedily optimizes.
#[derive(Debug, Clone, Copy)]
pub enum SpatialObjective {
    /// Connect the highest-resistance non-adjacent pair; stop once every
    /// non-adjacent pair is at or below the threshold, when given.
    ResistanceThreshold(Option<f64>),
    /// Connect the most distant pair; stop once the diameter is at or below
    /// the target, when given.
    TargetDiameter(Option<usize>),
}

/// Greedily connects the currently worst pair until the budget or threshold
/// is met. Ties break on the lexicographically smallest pair.
pub fn spatial_rewire(
    graph: &Graph,
    budget: usize,
    objective: SpatialObjective,
) -> Result<RewiringPlan, RewiringError> {
    assert!(budget >= 1);
    let (strategy, threshold) = match objective {
        SpatialObjective::ResistanceThreshold(t) => (RewiringStrategy::SpatialThreshold, t),
        SpatialObjective::TargetDiameter(d) => {
            (RewiringStrategy::SpatialDiameter, d.map(|x| x as f64))
        }
    };
    let mut current = graph.clone();
    let mut added = Vec::new();
    while added.len() < budget {
        let candidates = current.non_edges();
        if candidates.is_empty() {
            break;
        }
        let pick = match objective {
            SpatialObjective::ResistanceThreshold(tau) => {
                let decomp = SpectralDecomposition::from_graph(&current)?;
                let (pair, worst) =
                    argmax_by(&candidates, |&(u, v)| decomp.effective_resistance(u, v));
                if tau.is_some_and(|t| worst <= t) {
                    break;
                }
                pair
            }
            SpatialObjective::TargetDiameter(target) => {
                if target.is_some_and(|d| current.diameter() <= d) {
                    break;
                }
                let (pair, _) = argmax_by(&candidates, |&(u, v)| current.distance(u, v) as f64);
                pair
            }
        };
        current = current.with_edges(&[pick])?;
        added.push(pick);
    }
    Ok(RewiringPlan {
        strategy,
        budget,
        threshold,
        added_edges: added,
    })
}

/// What spectral rewiring greedily optimizes.
#[derive(Debug, Clone, Copy)]
pub enum SpectralObjective {
    /// Maximize the spectral gap `λ_1`. Stops early if no candidate keeps
    /// `λ_1` from decreasing.
    MaxGap,
    /// Minimize the total effective resistance.
    MinTotalResistance,
}

/// Above this node count the candidate set is sampled instead of exhaustive.
pub const EXHAUSTIVE_CANDIDATE_LIMIT: usize = 256;
const SAMPLED_CANDIDATES: usize = 4096;

/// Greedy spectral rewiring: each step evaluates the objective on every
/// candidate augmented graph and adds the best non-edge, recomputing the
/// spectrum per step. Ties break on the lexicographically smallest pair. The
/// candidate set is every non-edge up to [`EXHAUSTIVE_CANDIDATE_LIMIT`] nodes
/// and a seeded sample beyond that.
pub fn spectral_rewire(
    graph: &Graph,
    budget: usize,
    objective: SpectralObjective,
    seed: u64,
) -> Result<RewiringPlan, RewiringError> {
    assert!(budget >= 1);
    let strategy = match objective {
        SpectralObjective::MaxGap => RewiringStrategy::SpectralGapGreedy,
        SpectralObjective::MinTotalResistance => RewiringStrategy::ResistanceGreedy,
    };
    let mut current = graph.clone();
    let mut added = Vec::new();
    while added.len() < budget {
        let mut candidates = current.non_edges();
        if candidates.is_empty() {
            break;
        }
        if graph.num_nodes() > EXHAUSTIVE_CANDIDATE_LIMIT && candidates.len() > SAMPLED_CANDIDATES {
            let mut rng =
                ChaCha8Rng::seed_from_u64(crate::spectral::splitmix(seed, added.len() as u64));
            candidates.shuffle(&mut rng);
            candidates.truncate(SAMPLED_CANDIDATES);
            candidates.sort_unstable();
        }
        let mut best: Option<((usize, usize), f64)> = None;
        for pair in &candidates {
            let augmented = current.with_edges(&[*pair])?;
            let decomp = SpectralDecomposition::from_graph(&augmented)?;
            let value = match objective {
                SpectralObjective::MaxGap => decomp.spectral_gap(),
                // Negate so both objectives maximize.
                SpectralObjective::MinTotalResistance => -decomp.total_resistance(),
            };
            if best.is_none() || value > best.unwrap().1 {
                best = Some((*pair, value));
            }
        }
        let (pick, value) = best.expect("candidates are non-empty");
        if matches!(objective, SpectralObjective::MaxGap) {
            let current_gap = SpectralDecomposition::from_graph(&current)?.spectral_gap();
            if value < current_gap {
                break;
            }
        }
        current = current.with_edges(&[pick])?;
        added.push(pick);
    }
    Ok(RewiringPlan {
        strategy,
        budget,
        threshold: None,
        added_edges: added,
    })
}

/// First maximizer in iteration order, which is lexicographic for
/// [`Graph::non_edges`].
fn argmax_by<F: FnMut(&(usize, usize)) -> f64>(
    pairs: &[(usize, usize)],
    mut score: F,
) -> ((usize, usize), f64) {
    let mut best_pair = pairs[0];
    let mut best_value = f64::NEG_INFINITY;
    for pair in pairs {
        let value = score(pair);
        if value > best_value {
            best_value = value;
            best_pair = *pair;
        }
    }
    (best_pair, best_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_ring, random_connected_graph};
    use rand::Rng;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, &edges).unwrap()
    }

    fn barbell() -> Graph {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((u, v));
                edges.push((u + 4, v + 4));
            }
        }
        edges.push((3, 4));
        Graph::new(8, &edges).unwrap()
    }

    #[test]
    fn empty_plan_is_identity() {
        let (g, _) = make_ring(4).unwrap();
        let plan = RewiringPlan {
            strategy: RewiringStrategy::SpatialThreshold,
            budget: 3,
            threshold: None,
            added_edges: vec![],
        };
        let (rewired, report) = rewire(&g, &plan).unwrap();
        assert_eq!(rewired, g);
        assert!(report.marginal_total_resistance.is_empty());
        assert_eq!(report.before.diameter, report.after.diameter);
        assert_eq!(
            report.before.total_resistance,
            report.after.total_resistance
        );
    }

    #[test]
    fn antipodal_chord_on_c8() {
        let (c8, _) = make_ring(4).unwrap();
        let plan = RewiringPlan {
            strategy: RewiringStrategy::SpatialDiameter,
            budget: 1,
            threshold: None,
            added_edges: vec![(0, 4)],
        };
        let (rewired, report) = rewire(&c8, &plan).unwrap();
        assert_eq!(rewired.distance(0, 4), 1);
        // One antipodal chord cannot shorten pairs equidistant from both of
        // its endpoints, so the diameter stays 4; it must not grow though,
        // and the total resistance must strictly drop.
        assert!(report.after.diameter <= report.before.diameter);
        assert!(report.after.total_resistance < report.before.total_resistance);
        assert!(report.marginal_total_resistance[0] < 0.0);
    }

    #[test]
    fn two_spatial_steps_shrink_the_c8_diameter() {
        let (c8, _) = make_ring(4).unwrap();
        let plan = spatial_rewire(&c8, 2, SpatialObjective::TargetDiameter(None)).unwrap();
        let (_, report) = rewire(&c8, &plan).unwrap();
        assert_eq!(report.before.diameter, 4);
        assert!(report.after.diameter < 4);
    }

    #[test]
    fn rejects_duplicate_and_over_budget_plans() {
        let (g, _) = make_ring(3).unwrap();
        let duplicate = RewiringPlan {
            strategy: RewiringStrategy::SpatialThreshold,
            budget: 2,
            threshold: None,
            added_edges: vec![(0, 1)],
        };
        assert!(matches!(
            rewire(&g, &duplicate),
            Err(RewiringError::EdgeAlreadyPresent(0, 1))
        ));
        let over = RewiringPlan {
            strategy: RewiringStrategy::SpatialThreshold,
            budget: 1,
            threshold: None,
            added_edges: vec![(0, 2), (0, 3)],
        };
        assert!(matches!(
            rewire(&g, &over),
            Err(RewiringError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn resistance_mode_connects_path_endpoints() {
        let g = path(8);
        let plan = spatial_rewire(&g, 1, SpatialObjective::ResistanceThreshold(None)).unwrap();
        assert_eq!(plan.added_edges, vec![(0, 7)]);
    }

    #[test]
    fn complete_graph_yields_empty_plan() {
        let g = complete(5);
        let plan = spatial_rewire(&g, 3, SpatialObjective::ResistanceThreshold(None)).unwrap();
        assert!(plan.added_edges.is_empty());
        let plan = spectral_rewire(&g, 3, SpectralObjective::MaxGap, 0).unwrap();
        assert!(plan.added_edges.is_empty());
    }

    #[test]
    fn full_budget_on_c10_reduces_max_commute() {
        let (c10, _) = make_ring(5).unwrap();
        let plan = spatial_rewire(&c10, 3, SpatialObjective::ResistanceThreshold(None)).unwrap();
        let (_, report) = rewire(&c10, &plan).unwrap();
        assert!(report.after.max_commute_time < report.before.max_commute_time);
    }

    #[test]
    fn resistance_threshold_stops_early() {
        let g = path(6);
        let plan =
            spatial_rewire(&g, 10, SpatialObjective::ResistanceThreshold(Some(100.0))).unwrap();
        // Every pair is already below a huge threshold.
        assert!(plan.added_edges.is_empty());
    }

    #[test]
    fn spectral_rewire_bridges_the_barbell() {
        let g = barbell();
        let plan = spectral_rewire(&g, 1, SpectralObjective::MaxGap, 0).unwrap();
        assert_eq!(plan.added_edges.len(), 1);
        let (u, v) = plan.added_edges[0];
        assert!(
            u < 4 && v >= 4,
            "expected an inter-clique edge, got ({u}, {v})"
        );
    }

    #[test]
    fn max_gap_never_decreases_lambda1() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let n = rng.gen_range(5..=10);
            let g = random_connected_graph(n, 0.25, &mut rng);
            let plan = spectral_rewire(&g, 3, SpectralObjective::MaxGap, 7).unwrap();
            let mut current = g.clone();
            let mut gap = SpectralDecomposition::from_graph(&current)
                .unwrap()
                .spectral_gap();
            for &edge in &plan.added_edges {
                current = current.with_edges(&[edge]).unwrap();
                let next = SpectralDecomposition::from_graph(&current)
                    .unwrap()
                    .spectral_gap();
                assert!(next >= gap, "gap decreased: {gap} -> {next}");
                gap = next;
            }
        }
    }

    #[test]
    fn rayleigh_monotonicity_per_added_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..12 {
            let n = rng.gen_range(4..=10);
            let g = random_connected_graph(n, 0.3, &mut rng);
            let plan =
                spectral_rewire(&g, 2, SpectralObjective::MinTotalResistance, 3).unwrap();
            let (_, report) = rewire(&g, &plan).unwrap();
            for delta in &report.marginal_total_resistance {
                assert!(*delta < -1e-12, "Res_G failed to strictly decrease: {delta}");
            }
        }
    }

    #[test]
    fn budget_covering_all_non_edges_completes_the_graph() {
        let g = path(5);
        let missing = g.non_edges().len();
        let plan = spectral_rewire(&g, missing, SpectralObjective::MinTotalResistance, 0).unwrap();
        let (rewired, _) = rewire(&g, &plan).unwrap();
        assert_eq!(rewired.num_edges(), 5 * 4 / 2);
    }

    #[test]
    fn plans_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let g = random_connected_graph(9, 0.3, &mut rng);
        let a = spectral_rewire(&g, 3, SpectralObjective::MaxGap, 42).unwrap();
        let b = spectral_rewire(&g, 3, SpectralObjective::MaxGap, 42).unwrap();
        assert_eq!(a.added_edges, b.added_edges);
        let a = spatial_rewire(&g, 3, SpatialObjective::ResistanceThreshold(None)).unwrap();
        let b = spatial_rewire(&g, 3, SpatialObjective::ResistanceThreshold(None)).unwrap();
        assert_eq!(a.added_edges, b.added_edges);
    }
}

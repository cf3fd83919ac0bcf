//! Expected-Jacobian obstruction machinery.
//!
//! Under the equal-path-activation assumption the expected Jacobian between
//! two nodes has a closed spectral form, and summing suitably normalized
//! differences over layers measures how strongly the topology obstructs one
//! node from hearing another. The per-path Bernoulli process itself is not
//! realizable by independent node masks, so the spectral expansions are the
//! sole computation path; the unknown weight-product norm enters only through
//! the scalar envelopes `ν^{m-k}` (lower) and `μ^{m-k}` (upper), which
//! coincide in the scalar-weight mode.

use crate::graph::Graph;
use crate::spectral::SpectralDecomposition;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error("mode precondition violated: {0}")]
    ModePreconditionViolated(String),
    #[error("graph is bipartite; the commute-time envelope needs λ_max < 2")]
    BipartiteGraph,
}

/// Parameters of the expected-Jacobian analysis.
#[derive(Debug, Clone, Copy)]
pub struct ObstructionConfig {
    /// Probability that a computation path activates.
    pub activation_prob: f64,
    /// Smallest singular value over the weight matrices.
    pub min_singular: f64,
    /// Largest spectral norm over the weight matrices.
    pub max_spectral: f64,
    pub residual_scale: f64,
    pub aggregation_scale: f64,
    pub depth: usize,
}

impl ObstructionConfig {
    /// Scalar-weight mode: width one with every weight equal to `weight`, so
    /// `ν = μ = |weight|` and the envelopes collapse to identities.
    pub fn scalar(
        weight: f64,
        residual_scale: f64,
        aggregation_scale: f64,
        activation_prob: f64,
        depth: usize,
    ) -> Self {
        ObstructionConfig {
            activation_prob,
            min_singular: weight.abs(),
            max_spectral: weight.abs(),
            residual_scale,
            aggregation_scale,
            depth,
        }
    }

    fn check_common(&self) -> Result<(), ObstructionError> {
        if !(self.activation_prob > 0.0 && self.activation_prob <= 1.0) {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "activation probability must lie in (0, 1], got {}",
                self.activation_prob
            )));
        }
        if self.aggregation_scale <= 0.0 || self.min_singular <= 0.0 {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "need c_a > 0 and ν > 0, got c_a = {}, ν = {}",
                self.aggregation_scale, self.min_singular
            )));
        }
        if self.min_singular > self.max_spectral + 1e-12 {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "ν = {} exceeds μ = {}",
                self.min_singular, self.max_spectral
            )));
        }
        Ok(())
    }

    /// Access-time mode requires `ν(c_r + c_a) = 1`.
    pub fn check_access_mode(&self) -> Result<(), ObstructionError> {
        self.check_common()?;
        let product = self.min_singular * (self.residual_scale + self.aggregation_scale);
        if (product - 1.0).abs() > 1e-9 {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "access-time mode needs ν(c_r + c_a) = 1, got {product}"
            )));
        }
        Ok(())
    }

    /// Commute-time mode requires `μ(c_r + c_a) ≤ 1` and `c_r ≥ c_a`.
    pub fn check_commute_mode(&self) -> Result<(), ObstructionError> {
        self.check_common()?;
        let product = self.max_spectral * (self.residual_scale + self.aggregation_scale);
        if product > 1.0 + 1e-12 {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "commute-time mode needs μ(c_r + c_a) <= 1, got {product}"
            )));
        }
        if self.residual_scale < self.aggregation_scale - 1e-12 {
            return Err(ObstructionError::ModePreconditionViolated(format!(
                "commute-time mode needs c_r >= c_a, got c_r = {}, c_a = {}",
                self.residual_scale, self.aggregation_scale
            )));
        }
        Ok(())
    }
}

/// `E[∂h_v^{(m)}/∂h_u^{(k)}] = ρ (Π_{s=k+1}^m W^{(s)}) (S^{m-k})_{vu}` for a
/// precomputed weight product and symmetric message-passing matrix.
pub fn expected_jacobian(
    config: &ObstructionConfig,
    weight_product: &Array2<f64>,
    s: &Array2<f64>,
    m: usize,
    k: usize,
    v: usize,
    u: usize,
) -> Array2<f64> {
    assert!(k < m, "expected Jacobian needs k < m");
    let entry = crate::graph::matrix_power_entry(s, m - k, v, u);
    weight_product * (config.activation_prob * entry)
}

/// Everything one pair's obstruction evaluation produces.
#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub target_node: usize,
    pub source_node: usize,
    pub depth: usize,
    /// Per-layer terms with the weight product at its lower envelope
    /// `ν^{m-k}`, for k = 0..=m.
    pub per_layer: Vec<f64>,
    /// Per-layer terms at the upper envelope `μ^{m-k}`; equal to `per_layer`
    /// in scalar-weight mode.
    pub per_layer_upper: Vec<f64>,
    /// Σ of `per_layer`.
    pub total: f64,
    /// Σ of `per_layer_upper`.
    pub total_upper: f64,
    /// Theorem envelope around the totals: `(lower, upper)`.
    pub envelope: (f64, f64),
    /// Magnitude of the exponentially-decaying correction.
    pub o_m_correction: f64,
    /// `ε_G = λ_1/(λ_1 + (1 - ν(c_r+c_a))/(νc_a))`; 1 when `ν(c_r+c_a) = 1`.
    pub epsilon_graph: Option<f64>,
}

fn spectral_factor(config: &ObstructionConfig, lambda: f64) -> f64 {
    config.residual_scale + config.aggregation_scale * (1.0 - lambda)
}

/// Largest geometric ratio `max_{ℓ≥1} |scale·(c_r + c_a(1-λ_ℓ))|` governing
/// the o(m) tails.
fn max_tail_ratio(config: &ObstructionConfig, decomp: &SpectralDecomposition, scale: f64) -> f64 {
    decomp
        .eigenvalues
        .iter()
        .skip(1)
        .map(|&l| (scale * spectral_factor(config, l)).abs())
        .fold(0.0f64, f64::max)
}

/// Directed Jacobian obstruction of `target` with respect to `source`:
/// per-layer terms
/// `ρ·ν^{m-k}·|Σ_{ℓ≥1} (c_r + c_a(1-λ_ℓ))^{m-k} (ψ_ℓ²(v)/d_v - ψ_ℓ(v)ψ_ℓ(u)/√(d_v d_u))|`
/// summed over k = 0..=m, with the access-time lower bound
/// `(ρ/νc_a)·t(u,v)/2|E|` minus its exponentially-decaying correction as the
/// envelope floor. Needs access-time mode: `ν(c_r + c_a) = 1`.
pub fn jacobian_obstruction(
    config: &ObstructionConfig,
    decomp: &SpectralDecomposition,
    target_node: usize,
    source_node: usize,
) -> Result<ObstructionReport, ObstructionError> {
    config.check_access_mode()?;
    let (v, u) = (target_node, source_node);
    let n = decomp.num_nodes();
    let rho = config.activation_prob;
    let nu = config.min_singular;
    let m = config.depth;
    let dv = decomp.degrees[v] as f64;
    let du = decomp.degrees[u] as f64;

    let coeffs: Vec<f64> = (1..n)
        .map(|ell| {
            let pv = decomp.eigenvectors[[v, ell]];
            let pu = decomp.eigenvectors[[u, ell]];
            pv * pv / dv - pv * pu / (dv * du).sqrt()
        })
        .collect();

    let mut per_layer = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let power = (m - k) as i32;
        let mut sum = 0.0;
        for (ell, &c) in (1..n).zip(coeffs.iter()) {
            sum += spectral_factor(config, decomp.eigenvalues[ell]).powi(power) * c;
        }
        per_layer.push(rho * nu.powi(power) * sum.abs());
    }
    let total: f64 = per_layer.iter().sum();

    let nu_ca = nu * config.aggregation_scale;
    let access = decomp
        .access_time(u, v)
        .expect("obstruction pairs are distinct");
    let raw_lower = rho / nu_ca * access / (2.0 * decomp.num_edges as f64);
    let tail = max_tail_ratio(config, decomp, nu);
    let d_min = *decomp.degrees.iter().min().expect("non-empty graph") as f64;
    let correction = rho * tail.powi(m as i32 + 1) * (n as f64 - 1.0)
        / (nu_ca * decomp.spectral_gap() * d_min);

    Ok(ObstructionReport {
        target_node: v,
        source_node: u,
        depth: m,
        per_layer_upper: per_layer.clone(),
        per_layer,
        total,
        total_upper: total,
        envelope: (raw_lower - correction, f64::INFINITY),
        o_m_correction: correction,
        epsilon_graph: None,
    })
}

/// Symmetric Jacobian obstruction of a pair: per-layer terms
/// `ρ·(ν or μ)^{m-k}·Σ_{ℓ≥1} (c_r + c_a(1-λ_ℓ))^{m-k} (ψ_ℓ(v)/√d_v - ψ_ℓ(u)/√d_u)²`
/// with the commute-time envelope
/// `ε_G(1-o(m))·(ρ/νc_a)·τ/2|E| ≤ Õ ≤ (ρ/μc_a)·τ/2|E|`. Needs commute-time
/// mode (`μ(c_r+c_a) ≤ 1`, `c_r ≥ c_a`) and a non-bipartite graph.
pub fn symmetric_obstruction(
    config: &ObstructionConfig,
    graph: &Graph,
    decomp: &SpectralDecomposition,
    v: usize,
    u: usize,
) -> Result<ObstructionReport, ObstructionError> {
    config.check_commute_mode()?;
    if graph.is_bipartite() {
        return Err(ObstructionError::BipartiteGraph);
    }
    let n = decomp.num_nodes();
    let rho = config.activation_prob;
    let nu = config.min_singular;
    let mu = config.max_spectral;
    let m = config.depth;
    let dv = (decomp.degrees[v] as f64).sqrt();
    let du = (decomp.degrees[u] as f64).sqrt();

    let coeffs: Vec<f64> = (1..n)
        .map(|ell| {
            let diff = decomp.eigenvectors[[v, ell]] / dv - decomp.eigenvectors[[u, ell]] / du;
            diff * diff
        })
        .collect();

    let mut per_layer = Vec::with_capacity(m + 1);
    let mut per_layer_upper = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let power = (m - k) as i32;
        let mut sum = 0.0;
        for (ell, &c) in (1..n).zip(coeffs.iter()) {
            sum += spectral_factor(config, decomp.eigenvalues[ell]).powi(power) * c;
        }
        per_layer.push(rho * nu.powi(power) * sum);
        per_layer_upper.push(rho * mu.powi(power) * sum);
    }
    let total: f64 = per_layer.iter().sum();
    let total_upper: f64 = per_layer_upper.iter().sum();

    let commute_term = decomp
        .commute_time(v, u)
        .expect("obstruction pairs are distinct")
        / (2.0 * decomp.num_edges as f64);
    let nu_ca = nu * config.aggregation_scale;
    let mu_ca = mu * config.aggregation_scale;
    let epsilon = decomp.spectral_gap()
        / (decomp.spectral_gap()
            + (1.0 - nu * (config.residual_scale + config.aggregation_scale)) / nu_ca);
    let o_m = max_tail_ratio(config, decomp, nu).powi(m as i32 + 1);
    let lower = epsilon * (1.0 - o_m) * rho / nu_ca * commute_term;
    let upper = rho / mu_ca * commute_term;

    Ok(ObstructionReport {
        target_node: v,
        source_node: u,
        depth: m,
        per_layer,
        per_layer_upper,
        total,
        total_upper,
        envelope: (lower, upper),
        o_m_correction: o_m,
        epsilon_graph: Some(epsilon),
    })
}

/// The uniform pairwise bound chain of the commute-time mode.
#[derive(Debug, Clone, Copy)]
pub struct CheegerObstructionBound {
    /// `(ρ/μc_a)·2/λ_1`.
    pub lambda_form: f64,
    /// `(ρ/μc_a)·4/h²`.
    pub cheeger_form: f64,
    /// The Cheeger constant used in `cheeger_form`.
    pub cheeger_value: f64,
    /// Whether `cheeger_value` is the exhaustive constant or the spectral
    /// lower bound `λ_1/2`.
    pub cheeger_is_exact: bool,
    /// Intermediate pairwise resistance bound `2/λ_1`.
    pub resistance_bound: f64,
}

/// Uniform upper bound on the symmetric obstruction over all pairs, through
/// `Õ ≤ (ρ/μc_a)·Res ≤ (ρ/μc_a)·2/λ_1 ≤ (ρ/μc_a)·4/h²`. Reports both the
/// `λ_1` form and the `h²` form; the exhaustive Cheeger constant is used when
/// feasible and the spectral lower bound `λ_1/2` otherwise.
pub fn cheeger_obstruction_bound(
    config: &ObstructionConfig,
    graph: &Graph,
    decomp: &SpectralDecomposition,
) -> Result<CheegerObstructionBound, ObstructionError> {
    config.check_commute_mode()?;
    let prefactor = config.activation_prob / (config.max_spectral * config.aggregation_scale);
    let gap = decomp.spectral_gap();
    let (exact, h) = match crate::spectral::cheeger_exact(graph) {
        Ok(h) => (true, h),
        Err(_) => (false, gap / 2.0),
    };
    Ok(CheegerObstructionBound {
        lambda_form: prefactor * 2.0 / gap,
        cheeger_form: prefactor * 4.0 / (h * h),
        cheeger_value: h,
        cheeger_is_exact: exact,
        resistance_bound: 2.0 / gap,
    })
}

//! Critical Norros–Reittu random graphs: calibrated weights, generation,
//! component and degree statistics, scaling ensembles.

mod stats;

pub use stats::{
    component_stats, degree_check, ks_distance, mixed_poisson_pmf, scaling_ensemble, scaling_ensemble_with, ComponentStats,
    GraphEnsembleResult, ReplicaRecord,
};

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Law of a typical weight, used for the limiting degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MixingLaw {
    /// `1 - F(x) = (x0/x)^{τ-1}` for `x ≥ x0`
    Pareto { x0: f64, tau: f64 },
    /// the empirical law of the weight vector itself
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub n: usize,
    pub tau: f64,
    pub lambda: f64,
    pub x0: f64,
    pub c_f: f64,
    pub law: MixingLaw,
    pub weights: Vec<f64>,
}

/// `x0 = (τ-3)/(τ-2)`, the Pareto scale with `E[W²]/E[W] = 1`.
pub fn critical_scale(tau: f64) -> f64 {
    (tau - 3.0) / (tau - 2.0)
}

/// `w_i = x0 (n/i)^{1/(τ-1)} (1 + λ n^{-(τ-3)/(τ-1)})`, `i = 1..n`. At
/// `i = n` the Pareto form gives `x0` (not the `[1-F]^{-1}(1) = 0` convention).
pub fn build_weights(n: usize, tau: f64, lambda: f64) -> Result<WeightModel> {
    if n < 2 {
        return Err(domain("build_weights", "need n >= 2"));
    }
    if !(tau > 3.0 && tau < 4.0) {
        return Err(domain("build_weights", "tau must lie in (3, 4)"));
    }
    let eta = (tau - 3.0) / (tau - 1.0);
    let factor = 1.0 + lambda * (n as f64).powf(-eta);
    if !(factor >= 0.0) {
        return Err(Error::Config(alloc::format!(
            "1 + lambda n^-eta = {factor} < 0: lambda too negative for n = {n}"
        )));
    }
    let x0 = critical_scale(tau);
    let alpha = 1.0 / (tau - 1.0);
    let nf = n as f64;
    let weights = (1..=n).map(|i| x0 * (nf / i as f64).powf(alpha) * factor).collect();
    Ok(WeightModel {
        n,
        tau,
        lambda,
        x0,
        c_f: x0.powf(tau - 1.0),
        law: MixingLaw::Pareto { x0, tau },
        weights,
    })
}

impl WeightModel {
    /// Hand-built weights, e.g. for fixtures; the mixing law is empirical.
    pub fn from_weights(weights: Vec<f64>, tau: f64) -> Result<Self> {
        if weights.len() < 2 || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(domain("WeightModel", "need at least two finite nonnegative weights"));
        }
        Ok(Self {
            n: weights.len(),
            tau,
            lambda: 0.0,
            x0: f64::NAN,
            c_f: f64::NAN,
            law: MixingLaw::Empirical,
            weights,
        })
    }

    /// `ℓ_n = Σ w_i`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().rev().sum()
    }

    /// `ν_n = Σ w_i² / Σ w_i`.
    pub fn nu(&self) -> f64 {
        self.weights.iter().rev().map(|w| w * w).sum::<f64>() / self.total_weight()
    }

    /// `ρ = (τ-2)/(τ-1)`, the component-size exponent.
    pub fn rho(&self) -> f64 {
        (self.tau - 2.0) / (self.tau - 1.0)
    }

    /// `a = c_F^α / E[W]`, converting the hitting time `H₁(0)` to `n^{-ρ}|C(1)|`.
    pub fn hitting_time_scale(&self) -> f64 {
        let mean = self.x0 * (self.tau - 1.0) / (self.tau - 2.0);
        self.c_f.powf(1.0 / (self.tau - 1.0)) / mean
    }

    /// `P(i ~ j) = 1 - e^{-w_i w_j / ℓ_n}`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        -(-self.weights[i] * self.weights[j] / self.total_weight()).exp_m1()
    }
}

/// Edge kernel; only Norros–Reittu has the `O(n + m)` generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// `1 - e^{-w_i w_j/ℓ_n}`
    NorrosReittu,
    /// `min(w_i w_j/ℓ_n, 1)`
    ChungLu,
    /// `w_i w_j/(ℓ_n + w_i w_j)`
    GeneralizedRandomGraph,
}

/// Largest `n` accepted by the per-pair generators.
pub const PAIRWISE_MAX_N: usize = 20_000;

/// Simple undirected graph on `0..n` in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    /// From an edge list; self-loops are dropped and parallel edges collapsed.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(domain("Graph", "too many vertices"));
        }
        let mut keys: Vec<u64> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(domain("Graph", "edge endpoint out of range"));
            }
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                keys.push(((lo as u64) << 32) | hi as u64);
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let mut degree = alloc::vec![0usize; n];
        for &k in &keys {
            degree[(k >> 32) as usize] += 1;
            degree[(k & 0xffff_ffff) as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets[offsets.len() - 1] + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = alloc::vec![0u32; offsets[n]];
        for &k in &keys {
            let (a, b) = ((k >> 32) as usize, (k & 0xffff_ffff) as usize);
            targets[fill[a]] = b as u32;
            fill[a] += 1;
            targets[fill[b]] = a as u32;
            fill[b] += 1;
        }
        Ok(Self { n, offsets, targets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Each edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(move |&j| (i, j as usize))
                .filter(|&(i, j)| i < j)
        })
    }
}

/// RNG for replica `replica` of a graph ensemble at size `n`.
pub fn graph_stream(seed: u64, n: usize, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
    rng.set_stream(replica);
    rng
}

/// Norros–Reittu graph: `Poisson(ℓ_n/2)` candidate edges with both endpoints
/// drawn proportional to weight, then collapsed. Each pair receives
/// `Poisson(w_i w_j/ℓ_n)` candidates, so it is joined with probability
/// `1 - e^{-w_i w_j/ℓ_n}`, independently over pairs.
pub fn generate_graph(model: &WeightModel, seed: u64) -> Result<Graph> {
    generate_graph_with(model, Kernel::NorrosReittu, &mut graph_stream(seed, model.n, 0))
}

pub fn generate_graph_with<R: Rng>(model: &WeightModel, kernel: Kernel, rng: &mut R) -> Result<Graph> {
    let ell = model.total_weight();
    match kernel {
        Kernel::NorrosReittu => {
            if ell == 0.0 {
                return Graph::from_edges(model.n, core::iter::empty());
            }
            let count = Poisson::new(0.5 * ell)
                .map_err(|_| domain("generate_graph", "invalid Poisson mean"))?
                .sample(rng) as usize;
            let alias = WeightedAliasIndex::new(model.weights.clone())
                .map_err(|_| domain("generate_graph", "weights not usable for sampling"))?;
            let mut edges = Vec::with_capacity(count);
            for _ in 0..count {
                edges.push((alias.sample(rng), alias.sample(rng)));
            }
            Graph::from_edges(model.n, edges)
        }
        Kernel::ChungLu | Kernel::GeneralizedRandomGraph => {
            if model.n > PAIRWISE_MAX_N {
                return Err(Error::Config(alloc::format!(
                    "per-pair kernels are limited to n <= {PAIRWISE_MAX_N}"
                )));
            }
            let w = &model.weights;
            let mut edges = Vec::new();
            for i in 0..model.n {
                for j in i + 1..model.n {
                    let x = w[i] * w[j];
                    let p = match kernel {
                        Kernel::ChungLu => (x / ell).min(1.0),
                        _ => x / (ell + x),
                    };
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            Graph::from_edges(model.n, edges)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_collapses_and_drops_loops() {
        let g = Graph::from_edges(4, [(0, 1), (1, 0), (2, 2), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1) && !g.has_edge(0, 2) && !g.has_edge(2, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 1), (1, 2)]);
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn weights_shape() {
        let m = build_weights(1000, 3.5, 0.0).unwrap();
        assert!((m.x0 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.weights[999], m.x0);
        assert!(m.weights.windows(2).all(|w| w[0] > w[1]));
        assert!((m.c_f - m.x0.powf(2.5)).abs() < 1e-15);
        assert!(build_weights(100, 3.5, -1e6).is_err());
        assert!(build_weights(1, 3.5, 0.0).is_err());
    }
}

//! Component sizes, degree law and scaling ensembles.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{build_weights, generate_graph_with, graph_stream, Graph, Kernel, MixingLaw, WeightModel};
use crate::error::{domain, Result};
use crate::numerics::{integrate, Domain, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentStats {
    /// `|C_(1)| ≥ |C_(2)| ≥ …`, summing to `n`
    pub ordered_sizes: Vec<usize>,
    /// size of the component of vertex 1 (index 0, the largest weight)
    pub c_vertex1: usize,
    /// `N_k`, number of vertices of degree `k`
    pub degree_histogram: Vec<usize>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Union–find pass over the edges.
pub fn component_stats(g: &Graph) -> ComponentStats {
    let n = g.n();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = alloc::vec![1usize; n];
    for (i, j) in g.edges() {
        let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
        if a != b {
            let (big, small) = if size[a as usize] >= size[b as usize] {
                (a, b)
            } else {
                (b, a)
            };
            parent[small as usize] = big;
            size[big as usize] += size[small as usize];
        }
    }
    let mut ordered_sizes: Vec<usize> = (0..n).filter(|&i| parent[i] as usize == i).map(|i| size[i]).collect();
    ordered_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let c_vertex1 = if n > 0 { size[find(&mut parent, 0) as usize] } else { 0 };
    let max_degree = (0..n).map(|i| g.degree(i)).max().unwrap_or(0);
    let mut degree_histogram = alloc::vec![0usize; max_degree + 1];
    for i in 0..n {
        degree_histogram[g.degree(i)] += 1;
    }
    ComponentStats {
        ordered_sizes,
        c_vertex1,
        degree_histogram,
    }
}

fn ln_poisson(k: usize, w: f64) -> f64 {
    let kf = k as f64;
    if w == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    kf * w.ln() - w - libm::lgamma(kf + 1.0)
}

/// `E[e^{-W} W^k / k!]` under the model's mixing law.
pub fn mixed_poisson_pmf(model: &WeightModel, k: usize) -> Result<f64> {
    match model.law {
        MixingLaw::Empirical => {
            Ok(model.weights.iter().map(|&w| ln_poisson(k, w).exp()).sum::<f64>() / model.weights.len() as f64)
        }
        MixingLaw::Pareto { x0, tau } => {
            // density (τ-1) x0^{τ-1} x^{-τ} on [x0, ∞); the Poisson factor
            // peaks at x ≈ k, so the range is split around it
            let norm = (tau - 1.0) * x0.powf(tau - 1.0);
            let f = |x: f64| norm * (ln_poisson(k, x) - tau * x.ln()).exp();
            let spread = 40.0 * (k as f64 + 1.0).sqrt() + 40.0;
            let lo = (k as f64 - spread).max(x0);
            let hi = (k as f64 + spread).max(2.0 * x0);
            let spec = QuadratureSpec::with_tolerances(1e-15, 1e-12);
            let mut total = integrate(f, Domain::Interval(lo, hi), &spec)?;
            if lo > x0 {
                total += integrate(f, Domain::Interval(x0, lo), &spec)?;
            }
            total += integrate(f, Domain::UpperHalf(hi), &spec)?;
            Ok(total)
        }
    }
}

/// Total-variation distance between the empirical degree law and the
/// mixed-Poisson law, over `k ≤ k_max` with the remaining mass in one bin.
pub fn degree_check(g: &Graph, model: &WeightModel, k_max: usize) -> Result<f64> {
    if k_max < 1 {
        return Err(domain("degree_check", "k_max must be at least 1"));
    }
    let hist = component_stats(g).degree_histogram;
    let n = g.n() as f64;
    let (mut tv, mut emp_seen, mut pmf_seen) = (0.0, 0.0, 0.0);
    for k in 0..=k_max {
        let emp = hist.get(k).copied().unwrap_or(0) as f64 / n;
        let p = mixed_poisson_pmf(model, k)?;
        tv += (emp - p).abs();
        emp_seen += emp;
        pmf_seen += p;
    }
    tv += ((1.0 - emp_seen) - (1.0 - pmf_seen)).abs();
    Ok(0.5 * tv)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub n: usize,
    pub replica: u64,
    pub c1_ordered: usize,
    pub c2_ordered: usize,
    pub c_vertex1: usize,
    /// edges of the simple graph
    pub m: usize,
    pub nu_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEnsembleResult {
    pub tau: f64,
    pub lambda: f64,
    pub seed: u64,
    pub kernel: Kernel,
    pub records: Vec<ReplicaRecord>,
}

impl GraphEnsembleResult {
    pub fn rho(&self) -> f64 {
        (self.tau - 2.0) / (self.tau - 1.0)
    }

    /// `(n^{-ρ}|C_(1)|, n^{-ρ}|C(1)|)` over the replicas at size `n`.
    pub fn rescaled(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let scale = (n as f64).powf(-self.rho());
        self.records
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.c1_ordered as f64 * scale, r.c_vertex1 as f64 * scale))
            .unzip()
    }
}

/// `reps` graphs at each `n`; replica `r` at size `n` uses [`graph_stream`]`(seed, n, r)`.
pub fn scaling_ensemble(tau: f64, lambda: f64, n_list: &[usize], reps: u64, seed: u64) -> Result<GraphEnsembleResult> {
    scaling_ensemble_with(tau, lambda, n_list, reps, seed, Kernel::NorrosReittu)
}

pub fn scaling_ensemble_with(
    tau: f64,
    lambda: f64,
    n_list: &[usize],
    reps: u64,
    seed: u64,
    kernel: Kernel,
) -> Result<GraphEnsembleResult> {
    if n_list.iter().any(|&n| n < 1000) {
        return Err(domain("scaling_ensemble", "each n must be at least 1000"));
    }
    let mut records = Vec::with_capacity(n_list.len() * reps as usize);
    for &n in n_list {
        let model = build_weights(n, tau, lambda)?;
        let nu_n = model.nu();
        for r in 0..reps {
            let g = generate_graph_with(&model, kernel, &mut graph_stream(seed, n, r))?;
            let c = component_stats(&g);
            records.push(ReplicaRecord {
                n,
                replica: r,
                c1_ordered: c.ordered_sizes[0],
                c2_ordered: c.ordered_sizes.get(1).copied().unwrap_or(0),
                c_vertex1: c.c_vertex1,
                m: g.edge_count(),
                nu_n,
            });
        }
    }
    Ok(GraphEnsembleResult {
        tau,
        lambda,
        seed,
        kernel,
        records,
    })
}

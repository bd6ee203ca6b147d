//! Monte Carlo estimators: naive and exponentially tilted estimates of
//! `P(S_u > 0)` and `P(H₁(0) > u)`, conditioned profiles, reversed end-game
//! statistics and the Brownian benchmark.
//!
//! Replicas run in index order and every reduction is a fixed-order sum, so
//! results depend only on `(seed, reps)`.

mod bm;
mod profile;

pub use bm::{bm_pittel_benchmark, pittel_comparator, BmBenchmark};
pub use profile::{conditioned_profile, reversed_endgame_stats, Profile, ProfilePoint, ReversedEndgame};

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, Error, Result};
use crate::numerics::Neumaier;
use crate::process::{
    clock_weight, make_vertex_process, tail_moments_beyond, Measure, ModelParams, PathWorkspace, TailMode, TruncatedModel,
    TruncationScheme,
};
use crate::ratefn::RateFunctionTable;

/// Smallest replica count accepted by the estimators.
pub const MIN_REPS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Fraction of original-measure samples in the event.
    Naive,
    /// Importance sampling under the measure tilted by `e^{θ u S_u}`.
    Tilted { theta: f64 },
}

impl Method {
    /// Tilted at the optimal finite-`u` tilt `θ*_u`.
    pub fn optimal(table: &RateFunctionTable, u: f64) -> Result<Self> {
        Ok(Method::Tilted {
            theta: table.theta_star_u(u)?,
        })
    }

    fn measure(&self) -> Result<Measure> {
        match *self {
            Method::Naive => Ok(Measure::Original),
            Method::Tilted { theta } => {
                let m = Measure::Tilted { theta };
                m.validate()?;
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// `ln value`, kept separately so far tails survive underflow
    pub log_value: f64,
    /// `std_error / value`
    pub relative_error: f64,
    pub reps: u64,
    pub method: Method,
    pub effective_sample_size: f64,
    /// `ln φ_trunc(u)` for tilted estimates
    pub log_normalizer: Option<f64>,
}

impl Estimate {
    /// Binomial estimate from `hits` out of `reps`.
    pub fn from_hits(hits: u64, reps: u64) -> Self {
        let p = hits as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        Self {
            value: p,
            std_error: se,
            log_value: p.ln(),
            relative_error: if p > 0.0 { se / p } else { f64::INFINITY },
            reps,
            method: Method::Naive,
            effective_sample_size: reps as f64,
            log_normalizer: None,
        }
    }

    /// Combined standard error of the difference to `other`.
    pub fn combined_se(&self, other: &Estimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub params: ModelParams,
    pub scheme: TruncationScheme,
    pub reps: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(params: ModelParams, reps: u64, seed: u64) -> Self {
        Self {
            params,
            scheme: TruncationScheme::default(),
            reps,
            seed,
        }
    }

    pub fn with_scheme(mut self, scheme: TruncationScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::Config(alloc::format!(
                "need at least {MIN_REPS} replicas, got {}",
                self.reps
            )));
        }
        self.scheme.validate()
    }
}

/// `ln E[e^{θ u S_u}]` for the truncated vertex-1 model exactly as sampled:
/// head clocks `i ≤ N` one by one, and the tail beyond `N` as the Gaussian
/// (or deterministic, in mean-only mode) surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ISNormalizer {
    pub theta: f64,
    pub u: f64,
    pub head_cutoff: u64,
    /// `θu(start + drift·u) + Σ_head [-θu²c² + ln(e^{-cu} + e^{θcu}(1 - e^{-cu}))]`
    pub head: f64,
    /// `θu m_N(u) + θ²u² v_N(u)/2` (the variance term only with a Gaussian tail)
    pub tail: f64,
    pub log_phi_trunc: f64,
}

impl ISNormalizer {
    pub fn new(params: &ModelParams, u: f64, scheme: &TruncationScheme, theta: f64) -> Result<Self> {
        scheme.validate()?;
        Measure::Tilted { theta }.validate()?;
        if !(u > 0.0) || !u.is_finite() {
            return Err(domain("ISNormalizer", "u must be positive"));
        }
        let n = scheme.head_cutoff;
        let (start, drift) = make_vertex_process(params, 1)?;
        let tu = theta * u;
        let mut head = Neumaier::default();
        for i in (2..=n).rev() {
            let c = clock_weight(i, params);
            let x = c * u;
            // ln(e^{-x} + e^{θx}(1 - e^{-x})) = θx + ln(1 + e^{-x}(e^{-θx} - 1))
            head.add(-tu * u * c * c + tu * c + ((-x).exp() * (-theta * x).exp_m1()).ln_1p());
        }
        head.add(tu * (start + drift * u));
        let m = tail_moments_beyond(params, n, u, u, Measure::Original)?;
        let tail = match scheme.tail_mode {
            TailMode::Gaussian => tu * m.mean + 0.5 * tu * tu * m.var,
            TailMode::MeanOnly => tu * m.mean,
        };
        let head = head.sum();
        Ok(Self {
            theta,
            u,
            head_cutoff: n,
            head,
            tail,
            log_phi_trunc: head + tail,
        })
    }

    /// `ln φ_trunc(u) - log_phi(u)`; meaningful at `θ = θ*_u`.
    pub fn gap(&self, table: &RateFunctionTable) -> Result<f64> {
        Ok(self.log_phi_trunc - table.log_phi(self.u)?)
    }
}

/// Running `Σ e^{x}` and `Σ e^{2x}` over log-weights, rescaled to the
/// largest weight seen.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogWeights {
    max: f64,
    s1: f64,
    s2: f64,
}

impl LogWeights {
    pub(crate) fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            s1: 0.0,
            s2: 0.0,
        }
    }

    pub(crate) fn add(&mut self, lw: f64) {
        if lw == f64::NEG_INFINITY {
            return;
        }
        if lw > self.max {
            let r = (self.max - lw).exp();
            self.s1 *= r;
            self.s2 *= r * r;
            self.max = lw;
        }
        let w = (lw - self.max).exp();
        self.s1 += w;
        self.s2 += w * w;
    }

    pub(crate) fn max(&self) -> f64 {
        self.max
    }

    /// `(Σw)²/Σw²`.
    pub(crate) fn ess(&self) -> f64 {
        if self.s2 > 0.0 {
            self.s1 * self.s1 / self.s2
        } else {
            0.0
        }
    }

    /// Estimate of `e^{log_norm} · mean(w)` over `reps` draws (zeros included).
    fn finish(&self, op: &'static str, log_norm: f64, reps: u64, theta: f64) -> Result<Estimate> {
        if !(self.s1 > 0.0) {
            return Err(Error::Degenerate {
                op,
                detail: alloc::format!("no replica of {reps} landed in the event"),
            });
        }
        let n = reps as f64;
        let m1 = self.s1 / n;
        let m2 = self.s2 / n;
        // sample variance of the scaled weights, delta method through e^{max}
        let var = ((m2 - m1 * m1) * n / (n - 1.0)).max(0.0);
        let relative_error = (var / n).sqrt() / m1;
        let log_value = log_norm + self.max + m1.ln();
        let value = log_value.exp();
        Ok(Estimate {
            value,
            std_error: value * relative_error,
            log_value,
            relative_error,
            reps,
            method: Method::Tilted { theta },
            effective_sample_size: self.ess(),
            log_normalizer: Some(log_norm),
        })
    }
}

/// Estimates of `P(S_u > 0)` and `P(H₁(0) > u)` from the same replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimates {
    pub u: f64,
    pub su_positive: Estimate,
    pub h1_tail: Estimate,
}

/// Both tail estimates on shared replicas `0..reps` of `cfg.seed`. Every
/// replica is checked for `{H₁(0) > u} ⊆ {S_u > 0}`.
pub fn estimate_tails(u: f64, method: Method, cfg: &McConfig) -> Result<TailEstimates> {
    cfg.validate()?;
    let measure = method.measure()?;
    let model = TruncatedModel::new(&cfg.params, u, &cfg.scheme, measure)?;
    let mut ws = PathWorkspace::new();
    match method {
        Method::Naive => {
            let (mut su, mut h1) = (0u64, 0u64);
            for r in 0..cfg.reps {
                let path = model.simulate(cfg.seed, r, &mut ws, true);
                let (pos, survived) = (path.terminal_value() > 0.0, path.first_hit().is_none());
                check_inclusion(pos, survived, r)?;
                su += pos as u64;
                h1 += survived as u64;
            }
            Ok(TailEstimates {
                u,
                su_positive: Estimate::from_hits(su, cfg.reps),
                h1_tail: Estimate::from_hits(h1, cfg.reps),
            })
        }
        Method::Tilted { theta } => {
            let norm = ISNormalizer::new(&cfg.params, u, &cfg.scheme, theta)?;
            let (mut su, mut h1) = (LogWeights::new(), LogWeights::new());
            for r in 0..cfg.reps {
                let path = model.simulate(cfg.seed, r, &mut ws, true);
                let s = path.terminal_value();
                let (pos, survived) = (s > 0.0, path.first_hit().is_none());
                check_inclusion(pos, survived, r)?;
                let lw = -theta * u * s;
                if pos {
                    su.add(lw);
                }
                if survived {
                    h1.add(lw);
                }
            }
            Ok(TailEstimates {
                u,
                su_positive: su.finish("estimate_su_positive", norm.log_phi_trunc, cfg.reps, theta)?,
                h1_tail: h1.finish("estimate_h1_tail", norm.log_phi_trunc, cfg.reps, theta)?,
            })
        }
    }
}

fn check_inclusion(pos: bool, survived: bool, replica: u64) -> Result<()> {
    if survived && !pos {
        return Err(numerical(
            "estimate_tails",
            alloc::format!("replica {replica} stays positive on [0,u] but S_u <= 0"),
        ));
    }
    Ok(())
}

/// `P(S_u > 0)`.
pub fn estimate_su_positive(u: f64, method: Method, cfg: &McConfig) -> Result<Estimate> {
    estimate_tails(u, method, cfg).map(|t| t.su_positive)
}

/// `P(H₁(0) > u)`: the path stays positive on `[0, u]`.
pub fn estimate_h1_tail(u: f64, method: Method, cfg: &McConfig) -> Result<Estimate> {
    estimate_tails(u, method, cfg).map(|t| t.h1_tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_match_direct_sums() {
        let lws = [-3.0, 0.5, f64::NEG_INFINITY, 2.0, -1.0];
        let mut acc = LogWeights::new();
        for &x in &lws {
            acc.add(x);
        }
        let s1: f64 = lws.iter().map(|x| x.exp()).sum();
        let s2: f64 = lws.iter().map(|x| (2.0 * x).exp()).sum();
        let e = acc.finish("t", 0.0, 5, 1.0).unwrap();
        assert!((e.value - s1 / 5.0).abs() < 1e-14);
        assert!((acc.ess() - s1 * s1 / s2).abs() < 1e-12);
        let var = (s2 / 5.0 - (s1 / 5.0).powi(2)) * 5.0 / 4.0;
        assert!((e.std_error - (var / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn huge_log_weights_do_not_overflow() {
        let mut acc = LogWeights::new();
        for k in 0..10 {
            acc.add(800.0 + k as f64);
        }
        let e = acc.finish("t", -900.0, 10, 1.0).unwrap();
        assert!(e.value.is_finite() && e.value > 0.0);
        assert!(LogWeights::new().finish("t", 0.0, 10, 1.0).is_err());
    }
}

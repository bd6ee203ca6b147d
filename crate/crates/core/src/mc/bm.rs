//! Brownian motion on a parabola: the largest excursion of the reflected
//! `W_t + λt - t²/2` against Pittel's tail.

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Estimate, MIN_REPS};
use crate::error::{domain, Error, Result};
use crate::process::replica_streams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmBenchmark {
    pub lambda: f64,
    pub u: f64,
    pub dt: f64,
    /// `P(γ₁(λ) > u)`
    pub p_gamma: Estimate,
    /// `P(W^λ_u > 0)` on the same paths
    pub p_w_positive: Estimate,
    /// `e^{-u(u-2λ)²/8} / (√(2π) u^{3/2})`
    pub pittel: f64,
    /// `θ*_u = 1/2 - λ/u`
    pub theta_star: f64,
    /// `φ(u) = e^{-u(u-2λ)²/8}`
    pub phi: f64,
    /// paths with `γ₁ > u` but `W^λ_u ≤ 0`
    pub inclusion_exceptions: u64,
}

/// `(θ*_u, φ(u), Pittel's tail)` for the parabola with offset `λ`.
pub fn pittel_comparator(lambda: f64, u: f64) -> (f64, f64, f64) {
    let phi = (-u * (u - 2.0 * lambda).powi(2) / 8.0).exp();
    let pittel = phi / ((2.0 * core::f64::consts::PI).sqrt() * u.powf(1.5));
    (0.5 - lambda / u, phi, pittel)
}

/// Reflected Euler walk `R ← max(0, R + ΔW^λ)` on a grid of step `dt`.
/// An excursion also ends between two positive grid values `a`, `b` when
/// the Brownian bridge crosses zero, probability `e^{-2ab/dt}`. Paths run
/// to `max(λ, 0) + u + 6`, past which an excursion of length `u` has
/// probability below `e^{-40}`.
pub fn bm_pittel_benchmark(lambda: f64, u: f64, reps: u64, dt: f64, seed: u64) -> Result<BmBenchmark> {
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(domain("bm_pittel_benchmark", "dt must lie in (0, 1e-3]"));
    }
    if !(u > 0.0) || !u.is_finite() || !lambda.is_finite() {
        return Err(domain("bm_pittel_benchmark", "u must be positive and lambda finite"));
    }
    if reps < MIN_REPS {
        return Err(Error::Config(alloc::format!("need at least {MIN_REPS} replicas, got {reps}")));
    }
    let t_max = lambda.max(0.0) + u + 6.0;
    let steps = (t_max / dt).ceil() as u64;
    let k_u = (u / dt).round() as u64;
    let sd = dt.sqrt();
    let (mut long, mut positive, mut exceptions) = (0u64, 0u64, 0u64);
    for r in 0..reps {
        let (mut rng, _) = replica_streams(seed, r);
        let (mut x, mut refl, mut start) = (0.0f64, 0.0f64, 0.0f64);
        let (mut found, mut w_pos) = (false, false);
        for k in 0..steps {
            let t = k as f64 * dt;
            let z: f64 = rng.sample(StandardNormal);
            // ∫_t^{t+dt} (λ - s) ds
            let step = (lambda - t - 0.5 * dt) * dt + sd * z;
            x += step;
            let next = refl + step;
            let t1 = t + dt;
            if next <= 0.0 {
                if refl > 0.0 && t1 - start > u {
                    found = true;
                }
                refl = 0.0;
                start = t1;
            } else {
                if refl > 0.0 && rng.random::<f64>() < (-2.0 * refl * next / dt).exp() {
                    if t + 0.5 * dt - start > u {
                        found = true;
                    }
                    start = t + 0.5 * dt;
                } else if refl == 0.0 {
                    start = t;
                }
                refl = next;
            }
            if k + 1 == k_u {
                w_pos = x > 0.0;
            }
            if found && k + 1 >= k_u {
                break;
            }
        }
        if !found && refl > 0.0 && t_max - start > u {
            found = true;
        }
        long += found as u64;
        positive += w_pos as u64;
        exceptions += (found && !w_pos) as u64;
    }
    let (theta_star, phi, pittel) = pittel_comparator(lambda, u);
    Ok(BmBenchmark {
        lambda,
        u,
        dt,
        p_gamma: Estimate::from_hits(long, reps),
        p_w_positive: Estimate::from_hits(positive, reps),
        pittel,
        theta_star,
        phi,
        inclusion_exceptions: exceptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparator_closed_forms() {
        let (th, phi, p) = pittel_comparator(0.0, 2.0);
        assert_eq!(th, 0.5);
        assert!((phi - (-1.0f64).exp()).abs() < 1e-16);
        assert!((p - (-1.0f64).exp() / ((2.0 * core::f64::consts::PI).sqrt() * 2f64.powf(1.5))).abs() < 1e-16);
        assert_eq!(pittel_comparator(1.0, 4.0).0, 0.25);
    }
}

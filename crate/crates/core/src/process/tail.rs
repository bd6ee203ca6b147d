//! Clock marginals and the compensated moments of the clocks beyond the
//! head cutoff.

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{em_tail, integrate_improper, Domain, Neumaier, QuadratureSpec};
use crate::process::{ModelParams, TruncationScheme};

/// Law of the clocks on `[0, u]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    Original,
    /// Exponentially tilted by `e^{θ u S_u}`.
    Tilted {
        theta: f64,
    },
}

impl Measure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Measure::Original => Ok(()),
            Measure::Tilted { theta } if theta > 0.0 && theta.is_finite() => Ok(()),
            Measure::Tilted { theta } => Err(domain(
                "tilted measure",
                alloc::format!("theta must be positive, got {theta}"),
            )),
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Measure::Original => 0.0,
            Measure::Tilted { theta } => theta,
        }
    }
}

/// `e^{-x} - 1 + x`, to full relative precision.
#[inline]
pub(crate) fn expm1_plus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ_{n≥2} (-x)^n / n!
        let mut term = 0.5 * x * x;
        let mut acc = term;
        for n in 3..=20 {
            term *= -x / n as f64;
            acc += term;
        }
        acc
    } else {
        (-x).exp_m1() + x
    }
}

/// Normalizing denominator of the tilted marginal:
/// `(1 - e^{-cu}) + e^{-(1+θ)cu}`.
#[inline]
pub(crate) fn tilt_denominator(cu: f64, theta: f64) -> f64 {
    -(-cu).exp_m1() + (-(1.0 + theta) * cu).exp()
}

/// `P(T ≤ t)` for a clock of rate `c`, `0 ≤ t ≤ u`.
#[inline]
pub fn fire_probability(c: f64, t: f64, u: f64, measure: Measure) -> f64 {
    let p = -(-c * t).exp_m1();
    match measure {
        Measure::Original => p,
        Measure::Tilted { theta } => p / tilt_denominator(c * u, theta),
    }
}

/// `c (P(T ≤ t) - c t)`, written without the O(c t) cancellation.
#[inline]
fn compensated_mean(c: f64, t: f64, u: f64, measure: Measure) -> f64 {
    let ct = c * t;
    match measure {
        Measure::Original => -c * expm1_plus_x(ct),
        Measure::Tilted { theta } => {
            let cu = c * u;
            let dn = tilt_denominator(cu, theta);
            // 1 - dn = e^{-cu}(1 - e^{-θcu})
            let one_minus_dn = (-cu).exp() * -(-theta * cu).exp_m1();
            c * (-expm1_plus_x(ct) + ct * one_minus_dn) / dn
        }
    }
}

#[inline]
fn bernoulli_variance(c: f64, t: f64, u: f64, measure: Measure) -> f64 {
    let p = fire_probability(c, t, u, measure);
    c * c * p * (1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMoments {
    /// `m_N(t) = Σ_{i>N} c_i (P(T_i ≤ t) - c_i t)`
    pub mean: f64,
    /// `v_N(t) = Σ_{i>N} c_i² P(T_i ≤ t)(1 - P(T_i ≤ t))`
    pub var: f64,
    /// Absolute error estimate shared by both.
    pub err_est: f64,
}

/// Terms summed one by one past the cutoff before the Euler–Maclaurin tail.
const DIRECT_BLOCK: u64 = 4096;

fn tail_sum<G: Fn(f64) -> f64>(params: &ModelParams, n: u64, g: G) -> Result<(f64, f64)> {
    let alpha = params.alpha();
    let tau = params.tau();
    let k = n + DIRECT_BLOCK + 1;
    let mut acc = Neumaier::default();
    for i in (n + 1..k).rev() {
        acc.add(g((i as f64).powf(-alpha)));
    }
    let spec = QuadratureSpec::with_tolerances(1e-15, 1e-11).with_exponent(3.0);
    // Σ over i ≥ k in the coordinate y = x^{-α} = c
    let q = integrate_improper(
        |y: f64| (tau - 1.0) * y.powf(-tau) * g(y),
        Domain::Interval(0.0, (k as f64).powf(-alpha)),
        &spec,
    )?;
    let (tail, last) = em_tail(|x: f64| g(x.powf(-alpha)), k as f64, q.value);
    acc.add(tail);
    Ok((acc.sum(), q.err_est + last + 1e-15 * DIRECT_BLOCK as f64))
}

/// Compensated mean and variance of the clocks `i > n` at time `t` of the
/// horizon `u`. `n = 1` gives the moments of the whole sum over `i ≥ 2`.
pub fn tail_moments_beyond(params: &ModelParams, n: u64, t: f64, u: f64, measure: Measure) -> Result<TailMoments> {
    measure.validate()?;
    if n == 0 {
        return Err(domain("tail_moments", "head cutoff must be at least 1"));
    }
    if !(t >= 0.0 && t <= u) {
        return Err(domain("tail_moments", "need 0 <= t <= u"));
    }
    if t == 0.0 {
        return Ok(TailMoments {
            mean: 0.0,
            var: 0.0,
            err_est: 0.0,
        });
    }
    let (mean, e1) = tail_sum(params, n, |c| compensated_mean(c, t, u, measure))?;
    let (var, e2) = tail_sum(params, n, |c| bernoulli_variance(c, t, u, measure))?;
    Ok(TailMoments {
        mean,
        var,
        err_est: e1 + e2,
    })
}

/// [`tail_moments_beyond`] at the scheme's head cutoff.
pub fn tail_moments(params: &ModelParams, scheme: &TruncationScheme, t: f64, u: f64, measure: Measure) -> Result<TailMoments> {
    tail_moments_beyond(params, scheme.head_cutoff, t, u, measure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(3.5, 0.0).unwrap()
    }

    #[test]
    fn expm1_plus_x_both_branches() {
        // 40-digit values of e^{-x} - 1 + x
        assert!((expm1_plus_x(1e-3) / 4.998_333_749_916_680_6e-7 - 1.0).abs() < 1e-15);
        assert!((expm1_plus_x(0.4999) / 0.106_491_315_811_359_08 - 1.0).abs() < 1e-14);
        assert!((expm1_plus_x(0.5001) / 0.106_570_009_679_214_37 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_time() {
        let m = tail_moments_beyond(&params(), 1000, 0.0, 5.0, Measure::Original).unwrap();
        assert_eq!((m.mean, m.var), (0.0, 0.0));
    }

    #[test]
    fn theta_to_zero_recovers_original_marginal() {
        for c in [1.0, 0.3, 1e-3] {
            let a = fire_probability(c, 0.7, 2.0, Measure::Tilted { theta: 1e-12 });
            let b = fire_probability(c, 0.7, 2.0, Measure::Original);
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn compensated_forms_match_naive_where_safe() {
        for &(c, t, u) in &[(0.8, 1.0, 2.0), (0.05, 3.0, 5.0), (0.3, 0.2, 8.0)] {
            for m in [Measure::Original, Measure::Tilted { theta: 1.3 }] {
                let naive = c * (fire_probability(c, t, u, m) - c * t);
                assert!((compensated_mean(c, t, u, m) - naive).abs() < 1e-14, "{c} {t} {m:?}");
            }
        }
    }

    #[test]
    fn small_weight_cancellation() {
        // leading term -c³t²/2 (original) and c³(θut - t²/2) (tilted)
        let (c, t, u, th) = (1e-7, 2.0, 5.0, 1.5);
        let o = compensated_mean(c, t, u, Measure::Original);
        assert!((o / (-c * c * c * t * t / 2.0) - 1.0).abs() < 1e-6);
        let w = compensated_mean(c, t, u, Measure::Tilted { theta: th });
        let lead = c * c * c * (th * u * t - t * t / 2.0);
        assert!((w / lead - 1.0).abs() < 1e-5, "{w} {lead}");
    }

    #[test]
    fn variance_nondecreasing_in_time() {
        let p = params();
        let mut prev = 0.0;
        for k in 0..=20 {
            let t = 0.25 * k as f64;
            let m = tail_moments_beyond(&p, 2000, t, 5.0, Measure::Original).unwrap();
            assert!(m.var >= prev, "{t}");
            prev = m.var;
        }
    }

    #[test]
    fn invalid_measure() {
        assert!(tail_moments_beyond(&params(), 10, 1.0, 2.0, Measure::Tilted { theta: 0.0 }).is_err());
        assert!(tail_moments_beyond(&params(), 10, 3.0, 2.0, Measure::Original).is_err());
    }
}

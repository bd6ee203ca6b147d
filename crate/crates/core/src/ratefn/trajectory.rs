//! The conditioned mean trajectory `I_E` and the variance functions
//! `I_V`, `J_V`, `G_V` at the optimal tilt.

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::RateFunctionTable;
use crate::error::{domain, Result};
use crate::numerics::{integrate_improper, Domain, QuadratureSpec};
use crate::process::{expm1_plus_x, tilt_denominator, ModelParams};

fn check_p(op: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(op, "p must lie in [0, 1]"));
    }
    Ok(())
}

/// `q_p(v) - p v` with `q_p = (1 - e^{-pv}) / D(v)`; the numerator is
/// rearranged so that nothing cancels as `v → 0`.
fn centred_q(p: f64, v: f64, theta: f64) -> f64 {
    let pv = p * v;
    let dn = tilt_denominator(v, theta);
    (-expm1_plus_x(pv) + pv * (-v).exp() * -(-theta * v).exp_m1()) / dn
}

/// `I_E(p)` at an arbitrary tilt `θ`.
pub fn i_e_at(p: f64, theta: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    check_p("i_e", p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let tau = params.tau();
    let q = integrate_improper(
        |v| (tau - 1.0) * centred_q(p, v, theta) * v.powf(1.0 - tau),
        Domain::HalfLine,
        spec,
    )?;
    Ok(q.value)
}

/// `I_E(p)` at `θ*`.
pub fn i_e(p: f64, table: &RateFunctionTable) -> Result<f64> {
    i_e_at(p, table.theta_star, &table.params, &table.spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceFns {
    pub i_v: f64,
    pub j_v: f64,
    pub g_v: f64,
}

/// `q`, `1 - q`, `r`, `1 - r` with
/// `q = (1 - e^{-pv})/D`, `r = e^{-pv}(1 - e^{-(1-p)v})/D`,
/// `D = 1 - e^{-v} + e^{-(1+θ)v}`.
fn occupation(p: f64, v: f64, theta: f64) -> (f64, f64, f64, f64) {
    let dn = tilt_denominator(v, theta);
    let epv = (-p * v).exp();
    let ev = (-v).exp();
    let e1t = (-(1.0 + theta) * v).exp();
    let q = -(-p * v).exp_m1() / dn;
    let one_q = (epv - ev + e1t) / dn;
    let r = epv * -(-(1.0 - p) * v).exp_m1() / dn;
    let one_r = (-(-p * v).exp_m1() + e1t) / dn;
    (q, one_q, r, one_r)
}

/// `(I_V(p), J_V(p), G_V(p))` at an arbitrary tilt.
pub fn variance_fns_at(p: f64, theta: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<VarianceFns> {
    check_p("variance_fns", p)?;
    let tau = params.tau();
    let w = |v: f64| (tau - 1.0) * v.powf(2.0 - tau);
    let one = |f: &dyn Fn(f64, f64, f64, f64) -> f64| -> Result<f64> {
        integrate_improper(
            |v| {
                let (q, oq, r, or) = occupation(p, v, theta);
                w(v) * f(q, oq, r, or)
            },
            Domain::HalfLine,
            spec,
        )
        .map(|q| q.value)
    };
    // endpoints where an occupation probability vanishes identically
    let i_v = if p == 0.0 { 0.0 } else { one(&|q, oq, _, _| q * oq)? };
    let j_v = if p == 1.0 { 0.0 } else { one(&|_, _, r, or| r * or)? };
    let g_v = if p == 0.0 || p == 1.0 {
        0.0
    } else {
        one(&|q, _, r, _| q * r)?
    };
    Ok(VarianceFns { i_v, j_v, g_v })
}

pub fn variance_fns(p: f64, table: &RateFunctionTable) -> Result<VarianceFns> {
    variance_fns_at(p, table.theta_star, &table.params, &table.spec)
}

/// Small-`p` constant: `I_V(p) ~ p^{τ-3} (τ-1) Γ(3-τ)(1 - 2^{τ-3})`.
pub fn i_v_small_p_constant(params: &ModelParams) -> f64 {
    let tau = params.tau();
    (tau - 1.0) * libm::tgamma(3.0 - tau) * (1.0 - 2f64.powf(tau - 3.0))
}

/// Constant of the local Gaussian density of `S_u` near zero under the
/// optimal tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    #[serde(rename = "B")]
    pub b: f64,
    pub i_v1: f64,
}

impl DensityModel {
    pub fn new(table: &RateFunctionTable) -> Result<Self> {
        let i_v1 = variance_fns(1.0, table)?.i_v;
        Ok(Self::from_i_v1(i_v1))
    }

    /// `B = (2π I_V(1))^{-1/2}`.
    pub fn from_i_v1(i_v1: f64) -> Self {
        Self {
            b: 1.0 / (2.0 * core::f64::consts::PI * i_v1).sqrt(),
            i_v1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupation_complements() {
        for &(p, v, t) in &[(0.3, 0.01, 1.6), (0.7, 2.0, 0.5), (0.5, 40.0, 3.0)] {
            let (q, oq, r, or) = occupation(p, v, t);
            assert!((q + oq - 1.0).abs() < 1e-14);
            assert!((r + or - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn centred_q_small_v() {
        let (p, t) = (0.4, 1.3);
        let v = 0.3;
        let direct = -(-p * v).exp_m1() / tilt_denominator(v, t) - p * v;
        assert!((centred_q(p, v, t) - direct).abs() < 1e-15);
        // leading order v²(pθ - p²/2)
        let v = 1e-6;
        let lead = v * v * (p * t - p * p / 2.0);
        assert!((centred_q(p, v, t) / lead - 1.0).abs() < 1e-4);
    }

    #[test]
    fn small_p_constant_value() {
        let p = ModelParams::new(3.5, 0.0).unwrap();
        assert!((i_v_small_p_constant(&p) - 3.670_872_118_627_422_4).abs() < 1e-12);
    }
}

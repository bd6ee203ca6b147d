//! The end-game limit: the drift `κ`, the Lévy measure `Π` of the
//! time-reversed fluctuations, its Laplace exponent `ψ`, the scale function
//! `𝒲` and the tail constants `A`, `D`.

mod levy;

pub use levy::{simulate_levy_sup, JumpTable, LevySimConfig, LevySimulator, LevySupSample};

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, Result};
use crate::numerics::{integrate_improper, laplace_invert_gs, Domain, InversionConfig, QuadratureSpec};
use crate::process::{expm1_plus_x, tilt_denominator, ModelParams};
use crate::ratefn::{rate_spec, DensityModel, RateFunctionTable};

/// `Π` in the coordinate `y = -z > 0`: `(τ-1) y^{1-τ} e^{-y} / D(y)` with
/// `D(y) = 1 - e^{-y} + e^{-(1+θ)y}` (the `e^{θy}` factor divided out).
#[inline]
pub(crate) fn levy_density_y(y: f64, theta: f64, tau: f64) -> f64 {
    (tau - 1.0) * y.powf(1.0 - tau) * (-y).exp() / tilt_denominator(y, theta)
}

/// Density of `Π(dz)` at `z < 0`.
pub fn levy_measure_density(z: f64, theta_star: f64, params: &ModelParams) -> Result<f64> {
    if !(z < 0.0) {
        return Err(domain("levy_measure_density", "z must be negative"));
    }
    Ok(levy_density_y(-z, theta_star, params.tau()))
}

/// `1 - e^{-y} - y e^{-y} = e^{-y}(e^y - 1 - y)`, accurate near 0.
fn exp_excess(y: f64) -> f64 {
    if y < 0.5 {
        // e^{-y} Σ_{n≥2} y^n/n!
        let mut term = 0.5 * y * y;
        let mut acc = term;
        for n in 3..=20 {
            term *= y / n as f64;
            acc += term;
        }
        (-y).exp() * acc
    } else {
        -(-y).exp_m1() - y * (-y).exp()
    }
}

/// `κ = ∫_0^∞ (e^y - 1 - y) Π(y) dy`, i.e. the defining integral after the
/// substitution `y = x^{-α}` with `e^{θy}` and `e^{y}` folded into the
/// denominator.
pub fn kappa(theta_star: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    if !(theta_star > 0.0) {
        return Err(domain("kappa", "theta* must be positive"));
    }
    let tau = params.tau();
    let q = integrate_improper(
        |y| (tau - 1.0) * y.powf(1.0 - tau) * exp_excess(y) / tilt_denominator(y, theta_star),
        Domain::HalfLine,
        spec,
    )?;
    Ok(q.value)
}

/// Everything about the end-game limit at the reference tilt `θ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndgameConstants {
    pub params: ModelParams,
    pub theta_star: f64,
    pub kappa: f64,
    /// `B` of the local density of `S_u`
    #[serde(rename = "B")]
    pub b: f64,
    pub psi_at_theta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub spec: QuadratureSpec,
    pub inversion: InversionConfig,
}

impl EndgameConstants {
    pub fn new(table: &RateFunctionTable) -> Result<Self> {
        let density = DensityModel::new(table)?;
        Self::with_parts(
            &table.params,
            table.theta_star,
            density.b,
            &rate_spec(),
            &InversionConfig::default(),
        )
    }

    pub fn with_parts(
        params: &ModelParams,
        theta_star: f64,
        b: f64,
        spec: &QuadratureSpec,
        inversion: &InversionConfig,
    ) -> Result<Self> {
        inversion.validate()?;
        let kappa = kappa(theta_star, params, spec)?;
        if !(kappa > 0.0) {
            return Err(numerical("endgame", alloc::format!("kappa = {kappa} is not positive")));
        }
        let mut out = Self {
            params: *params,
            theta_star,
            kappa,
            b,
            psi_at_theta: f64::NAN,
            a: f64::NAN,
            d: f64::NAN,
            spec: *spec,
            inversion: *inversion,
        };
        let (a, d, psi) = out.tail_constants()?;
        out.a = a;
        out.d = d;
        out.psi_at_theta = psi;
        Ok(out)
    }

    /// `ψ(a) = κa + ∫_{(-∞,0)} (e^{az} - 1 - az) Π(dz)`, `a ≥ 0`.
    pub fn psi(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(domain("psi", "a must be nonnegative and finite"));
        }
        if a == 0.0 {
            return Ok(0.0);
        }
        let (theta, tau) = (self.theta_star, self.params.tau());
        let q = integrate_improper(
            |y| expm1_plus_x(a * y) * levy_density_y(y, theta, tau),
            Domain::HalfLine,
            &self.spec,
        )?;
        Ok(self.kappa * a + q.value)
    }

    /// `∫ z^k Π(dz)` over `z < 0` as a positive moment `∫ y^k Π(y) dy`;
    /// finite for `k > τ - 2`.
    pub fn levy_moment(&self, k: f64) -> Result<f64> {
        let (theta, tau) = (self.theta_star, self.params.tau());
        if !(k > tau - 2.0) {
            return Err(domain("levy_moment", "moment diverges at 0 for k <= tau - 2"));
        }
        // y = t^p makes the integrand at 0 behave like t^{p(k-τ+2)-1}; keep that power ≥ 1
        let spec = self.spec.with_exponent((2.0 / (k - tau + 2.0)).max(2.0).ceil());
        integrate_improper(|y| y.powf(k) * levy_density_y(y, theta, tau), Domain::HalfLine, &spec).map(|q| q.value)
    }

    /// `A = Bκ/ψ(θ*)`, `D = B/θ*`, and `ψ(θ*)`.
    pub fn tail_constants(&self) -> Result<(f64, f64, f64)> {
        let psi = self.psi(self.theta_star)?;
        if !(psi > 0.0) {
            return Err(numerical(
                "tail_constants",
                alloc::format!("psi(theta*) = {psi} is not positive"),
            ));
        }
        let a = self.b * self.kappa / psi;
        let d = self.b / self.theta_star;
        if !(a > 0.0 && a < d) {
            return Err(numerical(
                "tail_constants",
                alloc::format!("need 0 < A < D, got A = {a}, D = {d}"),
            ));
        }
        Ok((a, d, psi))
    }

    /// `(𝒲(v), g(v) = κ𝒲(v))` by Gaver–Stehfest inversion of `1/ψ`;
    /// `g` is clipped to `[0, 1]`.
    pub fn g_scale(&self, v: f64) -> Result<ScalePoint> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(domain("g_scale", "v must be nonnegative and finite"));
        }
        if v == 0.0 {
            // unbounded variation: 𝒲(0) = 0
            return Ok(ScalePoint {
                v,
                w: 0.0,
                g: 0.0,
                disagreement: 0.0,
            });
        }
        let inv = laplace_invert_gs(|a| self.psi(a).map(|p| 1.0 / p), v, &self.inversion)?;
        let w = inv.value;
        let raw = w * self.kappa;
        if !(-1e-3..=1.0 + 1e-3).contains(&raw) {
            log::warn!("kappa * W({v}) = {raw} outside [0, 1] beyond 1e-3; clipped");
        }
        Ok(ScalePoint {
            v,
            w,
            g: raw.clamp(0.0, 1.0),
            disagreement: inv.relative_disagreement,
        })
    }

    /// Headline predictions at `u` with the exponent from `table.log_phi`.
    pub fn predict_tails(&self, u: f64, table: &RateFunctionTable) -> Result<TailPrediction> {
        if !(u > 0.0) {
            return Err(domain("predict_tails", "u must be positive"));
        }
        let log_phi = table.log_phi(u)?;
        let base = log_phi - 0.5 * (self.params.tau() - 1.0) * u.ln();
        let log_p_su = self.d.ln() + base;
        let log_p_h1 = self.a.ln() + base;
        Ok(TailPrediction {
            u,
            log_phi,
            log_p_su,
            log_p_h1,
            p_su: log_p_su.exp(),
            p_h1: log_p_h1.exp(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub v: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub g: f64,
    /// relative gap to the inversion two orders lower
    pub disagreement: f64,
}

/// Asymptotic tail probabilities of `S_u > 0` and `H_1(0) > u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPrediction {
    pub u: f64,
    pub log_phi: f64,
    pub log_p_su: f64,
    pub log_p_h1: f64,
    pub p_su: f64,
    pub p_h1: f64,
}

/// [`EndgameConstants::predict_tails`] as a free function.
pub fn predict_tails(u: f64, table: &RateFunctionTable, constants: &EndgameConstants) -> Result<TailPrediction> {
    constants.predict_tails(u, table)
}

/// [`EndgameConstants::g_scale`] as a free function.
pub fn g_scale(v: f64, constants: &EndgameConstants) -> Result<ScalePoint> {
    constants.g_scale(v)
}

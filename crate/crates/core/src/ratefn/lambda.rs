//! `Λ(θ)`, its minimizer `θ*`, the finite-`u` tilt `θ*_u` and `log φ(u)`.

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, BracketSide, Error, Result};
use crate::numerics::{integrate_improper, minimize_scalar, zeta_em, Domain, QuadratureSpec, ZetaConfig};
use crate::process::{expm1_plus_x, ModelParams};

/// Below this value of `y·max(1, θ)` the summand is evaluated by its
/// Taylor series, which starts at order `y³`.
const SERIES_CUTOFF: f64 = 1e-3;

/// Summand in the coordinate `y = x^{-α}`:
/// `log(1 + e^{-y}(e^{-θy} - 1)) + θy - θy²`.
pub fn f_tail_y(y: f64, theta: f64) -> f64 {
    if y * theta.max(1.0) < SERIES_CUTOFF {
        let t = theta;
        let a3 = t * (t - 1.0) / 2.0;
        let a4 = t * (2.0 * t * t - 9.0 * t + 2.0) / 12.0;
        let a5 = t * (t - 1.0) * (t * t - 13.0 * t + 1.0) / 24.0;
        let a6 = t * (((6.0 * t - 225.0) * t + 620.0) * t * t - 225.0 * t + 6.0) / 720.0;
        let a7 = t * (t - 1.0) * ((((t - 92.0) * t + 483.0) * t - 92.0) * t + 1.0) / 720.0;
        return y * y * y * (a3 + y * (a4 + y * (a5 + y * (a6 + y * a7))));
    }
    direct_form(y, theta)
}

/// The summand away from zero. With `A = e^{-y}`, `B = e^{-θy} - 1`,
/// `e = AB` it is regrouped as
/// `M(e) + A·D(θy) + A(1-A)B²/2 - θy·E(y)` where
/// `M(e) = log(1+e) - e + e²/2`, `E(x) = e^{-x} - 1 + x` and
/// `D(x) = E(x) - (e^{-x} - 1)²/2`; every piece is `O(y³)`.
fn direct_form(y: f64, theta: f64) -> f64 {
    let a = (-y).exp();
    let b = (-theta * y).exp_m1();
    let one_minus_a = -(-y).exp_m1();
    log1p_tail(a * b) + a * square_gap(theta * y) + 0.5 * a * one_minus_a * b * b - theta * y * expm1_plus_x(y)
}

/// `log(1+e) - e + e²/2` for `e > -1`.
fn log1p_tail(e: f64) -> f64 {
    if e.abs() < 0.1 {
        // Σ_{k≥3} (-1)^{k+1} e^k / k
        let mut term = e * e * e;
        let mut acc = 0.0;
        for k in 3..=20 {
            let t = term / k as f64;
            acc += if k % 2 == 1 { t } else { -t };
            term *= e;
        }
        acc
    } else {
        e.ln_1p() - e + 0.5 * e * e
    }
}

/// `2e^{-x} - 3/2 + x - e^{-2x}/2 = Σ_{n≥3} (-1)^n (2 - 2^{n-1}) x^n / n!`, `x ≥ 0`.
fn square_gap(x: f64) -> f64 {
    if x < 1.0 {
        let mut pow_fact = x * x * x / 6.0;
        let mut two = 4.0;
        let mut acc = 0.0;
        for n in 3..=32 {
            let t = (2.0 - two) * pow_fact;
            acc += if n % 2 == 1 { -t } else { t };
            two *= 2.0;
            pow_fact *= x / (n + 1) as f64;
        }
        acc
    } else {
        2.0 * (-x).exp() - 1.5 + x - 0.5 * (-2.0 * x).exp()
    }
}

/// The summand as a function of `x > 0`.
pub fn f_tail(x: f64, theta: f64, params: &ModelParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("f_tail", "x must be positive"));
    }
    Ok(f_tail_y(x.powf(-params.alpha()), theta))
}

/// Default tolerances for the rate-function integrals; tight enough that
/// finite differences of `Λ` resolve `Λ'` to better than `1e-7`.
pub fn rate_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 5e-13,
        rel_tol: 1e-12,
        max_subdivisions: 8192,
        ..QuadratureSpec::default()
    }
}

/// `Λ(θ) = (τ-1) ∫_0^∞ f(y; θ) y^{-τ} dy`.
pub fn lambda(theta: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(domain("lambda", "theta must be nonnegative"));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let tau = params.tau();
    let q = integrate_improper(|y| (tau - 1.0) * f_tail_y(y, theta) * y.powf(-tau), Domain::HalfLine, spec)?;
    Ok(q.value)
}

/// `Λ'(θ)` by quadrature of `∂f/∂θ = y - y² - e^{-(1+θ)y} y / D(y)` with
/// `D(y) = 1 - e^{-y} + e^{-(1+θ)y}`; equal to `I_E(1)`.
pub fn lambda_prime(theta: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    super::trajectory::i_e_at(1.0, theta, params, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFunctionTable {
    pub params: ModelParams,
    pub theta_star: f64,
    /// `I = -Λ(θ*)`
    #[serde(rename = "I")]
    pub rate: f64,
    pub zeta_alpha: f64,
    pub zeta_2alpha: f64,
    pub spec: QuadratureSpec,
    pub zeta: ZetaConfig,
}

const THETA_MIN: f64 = 1e-3;
const THETA_MAX_START: f64 = 10.0;
const THETA_MAX_LIMIT: f64 = 1e4;
const THETA_TOL: f64 = 1e-10;

/// Minimizes `g` over `(THETA_MIN, hi)`, doubling `hi` while the minimum
/// runs into the upper end.
fn minimize_expanding(mut g: impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
    let mut hi = THETA_MAX_START;
    loop {
        match minimize_scalar(&mut g, (THETA_MIN, hi), THETA_TOL) {
            Ok(m) => return Ok((m.x_star, m.g_star)),
            Err(Error::NoInteriorMinimum {
                side: BracketSide::Upper,
                ..
            }) if hi < THETA_MAX_LIMIT => hi *= 4.0,
            Err(e) => return Err(e),
        }
    }
}

/// Objective evaluator that turns quadrature failures into NaN and
/// remembers the first one, so the minimizer can be driven by a plain
/// closure.
struct Guarded {
    failure: Option<Error>,
}

impl Guarded {
    fn eval(&mut self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.failure.get_or_insert(e);
                f64::NAN
            }
        }
    }
}

impl RateFunctionTable {
    pub fn solve(params: &ModelParams) -> Result<Self> {
        Self::solve_with(params, &rate_spec(), &ZetaConfig::default())
    }

    pub fn solve_with(params: &ModelParams, spec: &QuadratureSpec, zeta: &ZetaConfig) -> Result<Self> {
        spec.validate()?;
        let mut guard = Guarded { failure: None };
        let found = minimize_expanding(|t| guard.eval(lambda(t, params, spec)));
        if let Some(e) = guard.failure {
            return Err(e);
        }
        let (theta_star, lam) = found.map_err(|e| match e {
            Error::NoInteriorMinimum { side, x } => numerical(
                "solve_theta_star",
                alloc::format!("no interior minimum of Lambda ({side:?} end, x = {x})"),
            ),
            other => other,
        })?;
        let rate = -lam;
        if !(theta_star > 0.0) || !(rate > 0.0) {
            return Err(numerical(
                "solve_theta_star",
                alloc::format!("theta* = {theta_star}, I = {rate}: both must be positive"),
            ));
        }
        let alpha = params.alpha();
        let zeta_alpha = zeta_em(alpha, zeta)?.value;
        let zeta_2alpha = zeta_em(2.0 * alpha, zeta)?.value;
        Ok(Self {
            params: *params,
            theta_star,
            rate,
            zeta_alpha,
            zeta_2alpha,
            spec: *spec,
            zeta: *zeta,
        })
    }

    pub fn lambda(&self, theta: f64) -> Result<f64> {
        lambda(theta, &self.params, &self.spec)
    }

    /// Coefficient of `ϑ` in the finite-`u` objective:
    /// `u^{2-τ}(ζ(α) + (β̃ - ζ(2α) + 1) u)`.
    pub fn linear_coefficient(&self, u: f64) -> f64 {
        let tau = self.params.tau();
        u.powf(2.0 - tau) * (self.zeta_alpha + (self.params.beta_tilde() - self.zeta_2alpha + 1.0) * u)
    }

    /// The finite-`u` objective `Λ(ϑ) + ϑ·linear_coefficient(u)`.
    pub fn objective(&self, theta: f64, u: f64) -> Result<f64> {
        Ok(self.lambda(theta)? + theta * self.linear_coefficient(u))
    }

    /// `θ*_u` and the minimum of the finite-`u` objective.
    pub fn theta_star_u_with_min(&self, u: f64) -> Result<(f64, f64)> {
        if !(u > 0.0) {
            return Err(domain("theta_star_u", "u must be positive"));
        }
        let b = self.linear_coefficient(u);
        let mut guard = Guarded { failure: None };
        let found = minimize_expanding(|t| guard.eval(self.lambda(t)) + t * b);
        if let Some(e) = guard.failure {
            return Err(e);
        }
        found
    }

    pub fn theta_star_u(&self, u: f64) -> Result<f64> {
        self.theta_star_u_with_min(u).map(|(t, _)| t)
    }

    /// `log φ(u) = u^{τ-1} Λ(θ*_u) + θ*_u u (ζ(α) + (β̃ - ζ(2α) + 1) u)`.
    pub fn log_phi(&self, u: f64) -> Result<f64> {
        let (_, g) = self.theta_star_u_with_min(u)?;
        Ok(u.powf(self.params.tau() - 1.0) * g)
    }

    /// The exponent above at an arbitrary `θ`; `log_phi` is its minimum.
    pub fn log_phi_at(&self, theta: f64, u: f64) -> Result<f64> {
        Ok(u.powf(self.params.tau() - 1.0) * self.objective(theta, u)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_tail_zero_at_theta_zero() {
        for y in [1e-6, 1e-3, 0.5, 3.0, 40.0] {
            assert_eq!(f_tail_y(y, 0.0), 0.0);
        }
    }

    #[test]
    fn f_tail_high_precision_values() {
        // 50-digit evaluations of the defining formula
        let p = ModelParams::new(3.5, 0.0).unwrap();
        let cases = [
            (1.0, 1.0, -0.264_674_335_944_480_78),
            (1.0, 1.642_445, -0.351_960_981_841_624_75),
            (1000.0, 2.0, 0.000_228_376_237_239_060_08),
            (0.01, 0.5, -16.752_314_564_247_951),
        ];
        for (x, t, want) in cases {
            let got = f_tail(x, t, &p).unwrap();
            assert!((got - want).abs() < 1e-13 * want.abs().max(1.0), "{x} {t}: {got} vs {want}");
        }
    }

    #[test]
    fn series_and_direct_forms_agree_at_switch() {
        for t in [0.3, 1.0, 1.7, 4.0] {
            let y = SERIES_CUTOFF / t.max(1.0);
            let below = f_tail_y(y * (1.0 - 1e-12), t);
            let direct = direct_form(y, t);
            assert!((below - direct).abs() < 1e-9 * direct.abs(), "{t}: {below} {direct}");
        }
    }

    #[test]
    fn helper_branches_meet() {
        for e in [-0.1, 0.1] {
            let a = log1p_tail(e * (1.0 - 1e-13));
            let b = e.ln_1p() - e + 0.5 * e * e;
            assert!((a - b).abs() < 1e-12 * b.abs(), "{e}");
        }
        let x: f64 = 1.0;
        let direct = 2.0 * (-x).exp() - 1.5 + x - 0.5 * (-2.0 * x).exp();
        assert!((square_gap(x * (1.0 - 1e-15)) - direct).abs() < 1e-14 * direct);
        // leading order x³/3
        assert!((square_gap(1e-6) / (1e-18 / 3.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn lambda_zero_and_negative_theta() {
        let p = ModelParams::new(3.5, 0.0).unwrap();
        assert_eq!(lambda(0.0, &p, &rate_spec()).unwrap(), 0.0);
        assert!(lambda(-0.1, &p, &rate_spec()).is_err());
    }
}

//! Sums over the clock weights `c_i = i^{-α}` by partial summation plus an
//! Euler–Maclaurin corrected integral tail.

use crate::error::{domain, Result};
use crate::numerics::{integrate_improper, Domain, Neumaier, QuadratureSpec};
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

/// Euler–Maclaurin tail `Σ_{i >= k} g(i)` given `integral = ∫_k^∞ g`.
///
/// Uses `g(k)/2 - g'(k)/12 + g'''(k)/720` with central-difference
/// derivatives on the scale of `k`; `g` must be smooth and slowly varying
/// there (relative change per unit step well below one). Returns the sum and
/// the magnitude of the last correction term.
pub fn em_tail<G: Fn(f64) -> f64>(g: G, k: f64, integral: f64) -> (f64, f64) {
    let h1 = (0.01 * k).max(0.5);
    let d1 = (g(k + h1) - g(k - h1)) / (2.0 * h1);
    let h3 = (0.05 * k).max(1.0);
    let d3 = (g(k + 2.0 * h3) - 2.0 * g(k + h3) + 2.0 * g(k - h3) - g(k - 2.0 * h3)) / (2.0 * h3 * h3 * h3);
    let last = d3 / 720.0;
    (integral + 0.5 * g(k) - d1 / 12.0 + last, last.abs())
}

/// Start of the Euler–Maclaurin tail for `i^{-aα} e^{-λ i^{-α}}`: far enough
/// out that the summand changes by under 1% per unit step.
pub(crate) fn smooth_cutoff(alpha: f64, lambda: f64, floor: f64) -> f64 {
    let k = (100.0 * alpha * lambda.max(1.0)).powf(1.0 / (1.0 + alpha));
    k.max(floor).min(2e7).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiExpSum {
    pub sum: f64,
    /// `c(a,b) = ∫_0^∞ x^{-aα} e^{-b x^{-α}} dx`, so that
    /// `sum ≈ c(a,b) u^{τ-a-1}` for large `u`.
    pub scaling_constant: f64,
}

/// `Σ_{i>=2} c_i^a e^{-b c_i u}` with `c_i = i^{-1/(τ-1)}`.
pub fn sum_ci_exp(a: f64, b: f64, u: f64, tau: f64) -> Result<CiExpSum> {
    if !(a > tau - 1.0) {
        return Err(domain("sum_ci_exp", "a must exceed tau - 1 for the sum to converge"));
    }
    if !(b > 0.0) || !(u > 0.0) {
        return Err(domain("sum_ci_exp", "b and u must be positive"));
    }
    if !(tau > 1.0) {
        return Err(domain("sum_ci_exp", "tau must exceed 1"));
    }
    let alpha = 1.0 / (tau - 1.0);
    let lambda = b * u;
    let spec = QuadratureSpec::with_tolerances(1e-300, 1e-12).with_exponent(3.0);
    // in y = x^{-α}: ∫ x^{-aα} e^{-λ x^{-α}} dx = (τ-1) ∫ y^{a-τ} e^{-λ y} dy
    let y_integrand = |lam: f64| move |y: f64| (tau - 1.0) * y.powf(a - tau) * (-lam * y).exp();

    let term = |x: f64| x.powf(-a * alpha) * (-lambda * x.powf(-alpha)).exp();
    let k = smooth_cutoff(alpha, lambda, 1024.0);
    let mut acc = Neumaier::default();
    let mut i = k - 1.0;
    while i >= 2.0 {
        acc.add(term(i));
        i -= 1.0;
    }
    let tail_integral = integrate_improper(y_integrand(lambda), Domain::Interval(0.0, k.powf(-alpha)), &spec)?.value;
    let (tail, _) = em_tail(term, k, tail_integral);
    acc.add(tail);

    let scaling_constant = integrate_improper(y_integrand(b), Domain::HalfLine, &spec)?.value;
    Ok(CiExpSum {
        sum: acc.sum(),
        scaling_constant,
    })
}

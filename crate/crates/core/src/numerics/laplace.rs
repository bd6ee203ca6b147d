//! Real-axis Laplace inversion by the Gaver–Stehfest formula
//! `f(x) ≈ (ln 2 / x) Σ_{k=1}^{2M} V_k F(k ln 2 / x)`.
//!
//! The weights `V_k` alternate in sign and grow like `10^{0.45·2M}`, so they
//! are computed exactly in rational arithmetic and the weighted sum is
//! accumulated in double-double.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DoubleDouble;

/// Digits carried by the double-double accumulator.
pub const MAX_WORKING_DIGITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub order: u32,
    pub working_precision: u32,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            order: 14,
            working_precision: 32,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 8 | 10 | 12 | 14 | 16) {
            return Err(Error::Config(alloc::format!(
                "inversion order must be one of 8, 10, 12, 14, 16 (got {})",
                self.order
            )));
        }
        if self.order >= 12 && self.working_precision < 30 {
            return Err(Error::Config("inversion order >= 12 needs working_precision >= 30".into()));
        }
        if self.working_precision > MAX_WORKING_DIGITS {
            return Err(Error::Config(alloc::format!(
                "working_precision above {MAX_WORKING_DIGITS} digits is not available"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Result at `order - 2`, from the same transform evaluations.
    pub lower_order_value: f64,
    /// `|value - lower_order_value| / |value|`.
    pub relative_disagreement: f64,
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = Vec::with_capacity(n + 1);
    f.push(BigInt::one());
    for i in 1..=n {
        let next = &f[i - 1] * BigInt::from(i);
        f.push(next);
    }
    f
}

/// Exact Stehfest weights `V_1..V_order`.
pub fn stehfest_weights(order: u32) -> Vec<BigRational> {
    let n = order as usize;
    let m = n / 2;
    let fact = factorials(n);
    (1..=n)
        .map(|k| {
            let mut acc = BigRational::zero();
            for j in k.div_ceil(2)..=k.min(m) {
                let num = BigInt::from(j).pow(m as u32) * &fact[2 * j];
                let den = &fact[m - j] * &fact[j] * &fact[j - 1] * &fact[k - j] * &fact[2 * j - k];
                acc += BigRational::new(num, den);
            }
            if (k + m) % 2 == 1 {
                -acc
            } else {
                acc
            }
        })
        .collect()
}

fn to_dd(r: &BigRational) -> DoubleDouble {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    DoubleDouble::new(hi, rest.to_f64().unwrap_or(0.0))
}

fn weighted(weights: &[BigRational], values: &[f64]) -> f64 {
    let mut acc = DoubleDouble::ZERO;
    for (w, &f) in weights.iter().zip(values) {
        acc = acc + to_dd(w) * DoubleDouble::from(f);
    }
    acc.to_f64()
}

pub fn laplace_invert_gs<F>(mut transform: F, x: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(crate::error::domain("laplace_invert_gs", "x must be positive and finite"));
    }
    let ln2_x = core::f64::consts::LN_2 / x;
    let n = cfg.order as usize;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        let a = k as f64 * ln2_x;
        let f = transform(a)?;
        if !f.is_finite() {
            return Err(crate::error::numerical(
                "laplace_invert_gs",
                alloc::format!("transform is not finite at a = {a}"),
            ));
        }
        values.push(f);
    }
    let value = ln2_x * weighted(&stehfest_weights(cfg.order), &values);
    let lower_order_value = ln2_x * weighted(&stehfest_weights(cfg.order - 2), &values[..n - 2]);
    let relative_disagreement = if value != 0.0 {
        ((value - lower_order_value) / value).abs()
    } else {
        (value - lower_order_value).abs()
    };
    if relative_disagreement > 0.01 {
        log::warn!(
            "Gaver-Stehfest orders {} and {} disagree by {:.2}% at x = {x}",
            cfg.order,
            cfg.order - 2,
            100.0 * relative_disagreement
        );
    }
    Ok(Inversion {
        value,
        lower_order_value,
        relative_disagreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_zero() {
        // the inversion of F = 1/a (f ≡ 1) forces Σ V_k / k = 1 and Σ V_k = 0
        for order in [8u32, 10, 12, 14, 16] {
            let w = stehfest_weights(order);
            let s: BigRational = w.iter().cloned().sum();
            assert!(s.is_zero(), "order {order}");
            let s1: BigRational = w
                .iter()
                .enumerate()
                .map(|(k, v)| v / BigRational::from_integer(BigInt::from(k + 1)))
                .sum();
            assert!(s1.is_one(), "order {order}");
        }
    }

    #[test]
    fn known_weights_order_8() {
        let w = stehfest_weights(8);
        let expect = [
            -1.0 / 3.0,
            145.0 / 3.0,
            -906.0,
            16394.0 / 3.0,
            -43130.0 / 3.0,
            18730.0,
            -35840.0 / 3.0,
            8960.0 / 3.0,
        ];
        for (a, b) in w.iter().zip(expect) {
            assert!((a.to_f64().unwrap() - b).abs() < 1e-9 * b.abs());
        }
    }

    // Gaver–Stehfest evaluated in 50-digit arithmetic (independent script):
    // (order, F = 1/a² at x = 1, F = 1/(a(a+1)) at x = 0.7)
    const EXACT_ARITHMETIC: [(u32, f64, f64); 5] = [
        (8, 1.000_154_062_076_594_9, 0.503_952_986_270_124_94),
        (10, 1.000_034_791_653_240_95, 0.503_464_179_175_486_75),
        (12, 1.000_000_962_224_071_48, 0.503_418_540_652_830_26),
        (14, 0.999_999_638_850_609_56, 0.503_414_953_744_906_18),
        (16, 0.999_999_956_587_335_1, 0.503_414_711_357_246_85),
    ];

    /// Rounding bound from the f64 transform values themselves:
    /// a few ulps of `(ln 2/x) Σ |V_k F_k|`.
    fn rounding_bound(order: u32, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        let l = core::f64::consts::LN_2 / x;
        let cond: f64 = stehfest_weights(order)
            .iter()
            .enumerate()
            .map(|(k, v)| v.to_f64().unwrap().abs() * f((k + 1) as f64 * l).abs())
            .sum();
        8.0 * f64::EPSILON * l * cond
    }

    #[test]
    fn matches_high_precision_evaluation_every_order() {
        let square = |a: f64| 1.0 / (a * a);
        let expo = |a: f64| 1.0 / (a * (a + 1.0));
        for (order, want_sq, want_exp) in EXACT_ARITHMETIC {
            let cfg = InversionConfig {
                order,
                working_precision: 32,
            };
            let r = laplace_invert_gs(|a| Ok(square(a)), 1.0, &cfg).unwrap();
            let tol = rounding_bound(order, 1.0, square);
            assert!(tol < 1e-6);
            assert!((r.value - want_sq).abs() < tol, "order {order}: {r:?} tol {tol:e}");
            let r = laplace_invert_gs(|a| Ok(expo(a)), 0.7, &cfg).unwrap();
            let tol = rounding_bound(order, 0.7, expo);
            assert!((r.value - want_exp).abs() < tol, "order {order}: {r:?} tol {tol:e}");
        }
    }

    #[test]
    fn table_transforms() {
        // orders 8 and 10 carry formula truncation error above these bounds
        // even in exact arithmetic (see the table above)
        let exact = 1.0 - (-0.7f64).exp();
        for order in [12u32, 14, 16] {
            let cfg = InversionConfig {
                order,
                working_precision: 32,
            };
            let r = laplace_invert_gs(|a| Ok(1.0 / (a * a)), 1.0, &cfg).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "order {order}: {r:?}");
            let r = laplace_invert_gs(|a| Ok(1.0 / (a * (a + 1.0))), 0.7, &cfg).unwrap();
            assert!((r.value - exact).abs() < 1e-5, "order {order}: {r:?}");
        }
        for order in [8u32, 10] {
            let cfg = InversionConfig {
                order,
                working_precision: 32,
            };
            let r = laplace_invert_gs(|a| Ok(1.0 / (a * (a + 1.0))), 0.7, &cfg).unwrap();
            assert!((r.value - exact).abs() < 1e-3, "order {order}: {r:?}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(InversionConfig {
            order: 9,
            working_precision: 32
        }
        .validate()
        .is_err());
        assert!(InversionConfig {
            order: 12,
            working_precision: 20
        }
        .validate()
        .is_err());
        assert!(InversionConfig {
            order: 10,
            working_precision: 20
        }
        .validate()
        .is_ok());
        assert!(InversionConfig {
            order: 16,
            working_precision: 50
        }
        .validate()
        .is_err());
    }

    #[test]
    fn transform_failure_propagates() {
        let r = laplace_invert_gs(|_| Err(Error::Config("boom".into())), 1.0, &InversionConfig::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}

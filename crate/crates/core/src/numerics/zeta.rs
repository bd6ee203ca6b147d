//! Riemann zeta on `(-1, 1)` by truncated Euler-Maclaurin summation:
//! `zeta(s) = lim_N [ sum_{n<=N} n^{-s} - N^{1-s}/(1-s) - N^{-s}/2 ]`.

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::Neumaier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refinement {
    Plain,
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaConfig {
    pub truncation: u64,
    pub refinement: Refinement,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        Self {
            truncation: 20_000,
            refinement: Refinement::Richardson,
        }
    }
}

impl ZetaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 100 {
            return Err(Error::Config("zeta truncation N must be at least 100".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub value: f64,
    /// Bound on the truncation error of `value`.
    pub error: f64,
}

fn partial(s: f64, n: u64) -> f64 {
    let mut acc = Neumaier::default();
    // small terms first
    for k in (1..=n).rev() {
        acc.add((k as f64).powf(-s));
    }
    let nf = n as f64;
    acc.add(-nf.powf(1.0 - s) / (1.0 - s));
    acc.add(-0.5 * nf.powf(-s));
    acc.sum()
}

/// Leading omitted Euler-Maclaurin term `s N^{-s-1} / 12`.
fn leading_error(s: f64, n: u64) -> f64 {
    (s / 12.0 * (n as f64).powf(-s - 1.0)).abs()
}

pub fn zeta_em(s: f64, cfg: &ZetaConfig) -> Result<ZetaValue> {
    cfg.validate()?;
    if !(s > -1.0) || s >= 1.0 || !s.is_finite() {
        return Err(domain("zeta_em", "s must lie in (-1, 1)"));
    }
    let n = cfg.truncation;
    let plain = partial(s, n);
    match cfg.refinement {
        Refinement::Plain => Ok(ZetaValue {
            value: plain,
            error: 2.0 * leading_error(s, n),
        }),
        Refinement::Richardson => {
            // error ~ c N^{-s-1}: eliminate it with the 2N value
            let doubled = partial(s, 2 * n);
            let r = 2f64.powf(s + 1.0);
            let value = (r * doubled - plain) / (r - 1.0);
            // next omitted term is O(N^{-s-3})
            let nf = n as f64;
            let next = (s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0)).abs();
            Ok(ZetaValue {
                value,
                error: 2.0 * next + 8.0 * f64::EPSILON * value.abs().max(1.0) * nf.sqrt(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_exactly_minus_half() {
        for n in [100u64, 1000, 12345] {
            for refinement in [Refinement::Plain, Refinement::Richardson] {
                let z = zeta_em(
                    0.0,
                    &ZetaConfig {
                        truncation: n,
                        refinement,
                    },
                )
                .unwrap();
                assert_eq!(z.value, -0.5);
            }
        }
    }

    #[test]
    fn error_estimate_shrinks_on_doubling_ladder() {
        let errs: alloc::vec::Vec<f64> = [1000u64, 2000, 4000]
            .iter()
            .map(|&n| {
                zeta_em(
                    0.5,
                    &ZetaConfig {
                        truncation: n,
                        refinement: Refinement::Plain,
                    },
                )
                .unwrap()
                .error
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn plain_error_bound_holds() {
        let reference = zeta_em(0.5, &ZetaConfig::default()).unwrap().value;
        for n in [100u64, 1000] {
            let z = zeta_em(
                0.5,
                &ZetaConfig {
                    truncation: n,
                    refinement: Refinement::Plain,
                },
            )
            .unwrap();
            assert!((z.value - reference).abs() <= z.error, "{n}: {z:?}");
        }
    }

    #[test]
    fn domain_errors() {
        let cfg = ZetaConfig::default();
        assert!(zeta_em(1.0, &cfg).is_err());
        assert!(zeta_em(-1.0, &cfg).is_err());
        assert!(zeta_em(-1.5, &cfg).is_err());
        assert!(zeta_em(
            0.5,
            &ZetaConfig {
                truncation: 10,
                refinement: Refinement::Plain
            }
        )
        .is_err());
    }
}

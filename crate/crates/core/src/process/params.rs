#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the thinned Lévy process: the power-law exponent `τ ∈ (3,4)` and
/// the drift offset `β̃`. The exponents `α`, `ρ`, `η` are derived on access.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    tau: f64,
    beta_tilde: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    tau: f64,
    beta_tilde: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.tau, raw.beta_tilde)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            tau: p.tau,
            beta_tilde: p.beta_tilde,
        }
    }
}

impl ModelParams {
    pub fn new(tau: f64, beta_tilde: f64) -> Result<Self> {
        if !(tau > 3.0 && tau < 4.0) {
            return Err(Error::Config(alloc::format!("tau must lie in (3, 4), got {tau}")));
        }
        if !beta_tilde.is_finite() {
            return Err(Error::Config("beta_tilde must be finite".into()));
        }
        Ok(Self { tau, beta_tilde })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    /// `1/(τ-1)`
    pub fn alpha(&self) -> f64 {
        1.0 / (self.tau - 1.0)
    }

    /// `(τ-2)/(τ-1)`
    pub fn rho(&self) -> f64 {
        (self.tau - 2.0) / (self.tau - 1.0)
    }

    /// `(τ-3)/(τ-1)`
    pub fn eta(&self) -> f64 {
        (self.tau - 3.0) / (self.tau - 1.0)
    }

    /// `c_i = i^{-α}`.
    pub fn clock_weight(&self, i: u64) -> f64 {
        clock_weight(i, self)
    }
}

/// `c_i = i^{-α}`; `i >= 1`.
pub fn clock_weight(i: u64, params: &ModelParams) -> f64 {
    debug_assert!(i >= 1);
    if i == 1 {
        return 1.0;
    }
    (i as f64).powf(-params.alpha())
}

/// Start value and drift of the process seen from vertex `i`: the clock of
/// `i` is removed, the start becomes `c_i` and the drift `β̃ + 1 - c_i²`.
pub fn make_vertex_process(params: &ModelParams, i: u64) -> Result<(f64, f64)> {
    if i == 0 {
        return Err(crate::error::domain("make_vertex_process", "vertex index starts at 1"));
    }
    let c = clock_weight(i, params);
    Ok((c, params.beta_tilde + 1.0 - c * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let p = ModelParams::new(3.5, 0.0).unwrap();
        assert!((p.alpha() - 0.4).abs() < 1e-15);
        assert!((p.rho() - 0.6).abs() < 1e-15);
        assert!((p.eta() - 0.2).abs() < 1e-15);
        assert!(ModelParams::new(3.0, 0.0).is_err());
        assert!(ModelParams::new(4.0, 0.0).is_err());
        assert!(ModelParams::new(3.5, f64::NAN).is_err());
    }

    #[test]
    fn weights() {
        let p = ModelParams::new(3.5, 0.0).unwrap();
        assert_eq!(clock_weight(1, &p), 1.0);
        assert!((clock_weight(2, &p) - 0.757_858_283_255_198_6).abs() < 1e-15);
        assert!((clock_weight(1_000_000, &p) - 10f64.powf(-2.4)).abs() < 1e-15);
    }

    #[test]
    fn vertex_processes() {
        let p = ModelParams::new(3.5, 0.0).unwrap();
        assert_eq!(make_vertex_process(&p, 1).unwrap(), (1.0, 0.0));
        let (s, d) = make_vertex_process(&p, 2).unwrap();
        assert!((s - 2f64.powf(-0.4)).abs() < 1e-15);
        assert!((d - (1.0 - 2f64.powf(-0.8))).abs() < 1e-15);
        let p = ModelParams::new(3.3, -0.7).unwrap();
        assert_eq!(make_vertex_process(&p, 1).unwrap(), (1.0, -0.7));
    }

    #[test]
    fn serde_rejects_invalid() {
        let p = ModelParams::new(3.5, 0.25).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<ModelParams>(&json).unwrap(), p);
        assert!(serde_json::from_str::<ModelParams>(r#"{"tau":4.5,"beta_tilde":0}"#).is_err());
    }
}

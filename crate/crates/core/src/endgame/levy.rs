//! Simulation of the limit process `X_s = -L_s + κs`: jumps of size beyond
//! `ε` as a compound Poisson process, the rest as Brownian motion, and the
//! running infimum from exact Brownian-bridge minima between jumps.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{levy_density_y, EndgameConstants};
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_improper, Domain};
use crate::process::replica_streams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevySimConfig {
    pub horizon: f64,
    pub small_jump_cutoff: f64,
    /// longest Gaussian step between two recorded skeleton points
    pub grid_step: f64,
}

impl Default for LevySimConfig {
    fn default() -> Self {
        Self {
            horizon: 50.0,
            small_jump_cutoff: 0.05,
            grid_step: 1.0,
        }
    }
}

impl LevySimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config("Levy simulation horizon must be positive".into()));
        }
        if !(self.small_jump_cutoff > 0.0 && self.small_jump_cutoff < 1.0) {
            return Err(Error::Config("small-jump cutoff must lie in (0, 1)".into()));
        }
        if !(self.grid_step > 0.0) {
            return Err(Error::Config("grid step must be positive".into()));
        }
        Ok(())
    }
}

/// Upper end of the tabulated jump sizes; `Π` beyond it has mass below `e^{-60}`.
const JUMP_MAX: f64 = 60.0;
const JUMP_CELLS: usize = 4096;

/// `Π` restricted to jump sizes `y ∈ [ε, JUMP_MAX]`, piecewise power-law
/// between log-spaced nodes. Masses, first moments and the inverse CDF are
/// all exact for that piecewise law.
#[derive(Debug, Clone)]
pub struct JumpTable {
    nodes: Vec<f64>,
    slope: Vec<f64>,
    cumulative: Vec<f64>,
    rate: f64,
    mean: f64,
}

/// `∫_1^r t^s dt`.
fn power_mass(r: f64, s: f64) -> f64 {
    let e = s + 1.0;
    if e.abs() < 1e-12 {
        r.ln()
    } else {
        (r.powf(e) - 1.0) / e
    }
}

impl JumpTable {
    pub fn new(theta: f64, tau: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < JUMP_MAX) {
            return Err(domain("JumpTable", "cutoff out of range"));
        }
        let ratio = (JUMP_MAX / eps).ln() / JUMP_CELLS as f64;
        let nodes: Vec<f64> = (0..=JUMP_CELLS).map(|j| eps * (ratio * j as f64).exp()).collect();
        let dens: Vec<f64> = nodes.iter().map(|&y| levy_density_y(y, theta, tau)).collect();
        let mut slope = Vec::with_capacity(JUMP_CELLS);
        let mut cumulative = Vec::with_capacity(JUMP_CELLS + 1);
        cumulative.push(0.0);
        let (mut rate, mut mean) = (0.0, 0.0);
        for j in 0..JUMP_CELLS {
            let r = nodes[j + 1] / nodes[j];
            let s = (dens[j + 1] / dens[j]).ln() / r.ln();
            slope.push(s);
            rate += dens[j] * nodes[j] * power_mass(r, s);
            mean += dens[j] * nodes[j] * nodes[j] * power_mass(r, s + 1.0);
            cumulative.push(rate);
        }
        Ok(Self {
            nodes,
            slope,
            cumulative,
            rate,
            mean,
        })
    }

    /// `Π((-∞, -ε))`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `∫_{(-∞,-ε)} (-z) Π(dz)`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Jump size with tail mass fraction `w ∈ [0, 1)` below it.
    pub fn quantile(&self, w: f64) -> f64 {
        let target = w * self.rate;
        let j = match self.cumulative.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(j) => j.min(JUMP_CELLS - 1),
            Err(j) => j.saturating_sub(1).min(JUMP_CELLS - 1),
        };
        let cell = self.cumulative[j + 1] - self.cumulative[j];
        let frac = if cell > 0.0 {
            ((target - self.cumulative[j]) / cell).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let r = self.nodes[j + 1] / self.nodes[j];
        let e = self.slope[j] + 1.0;
        let t = if e.abs() < 1e-12 {
            r.powf(frac)
        } else {
            (1.0 + frac * (r.powf(e) - 1.0)).powf(1.0 / e)
        };
        (self.nodes[j] * t).min(self.nodes[j + 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevySupSample {
    /// `sup_{s≤T} (L_s - κs) ≥ 0`
    pub sup: f64,
    /// `inf_{s≤T} (-L_s + κs) = -sup`
    pub inf: f64,
    /// `-L_T`
    pub neg_l_terminal: f64,
}

/// Prepared simulator for one set of end-game constants.
#[derive(Debug, Clone)]
pub struct LevySimulator {
    cfg: LevySimConfig,
    kappa: f64,
    jumps: Option<JumpTable>,
    /// drift of `X` between jumps: `κ` plus the big-jump compensator
    drift: f64,
    sigma: f64,
}

impl LevySimulator {
    pub fn new(constants: &EndgameConstants, cfg: LevySimConfig) -> Result<Self> {
        cfg.validate()?;
        let (theta, tau) = (constants.theta_star, constants.params.tau());
        let eps = cfg.small_jump_cutoff;
        let jumps = JumpTable::new(theta, tau, eps)?;
        let var = integrate_improper(
            |y| y * y * levy_density_y(y, theta, tau),
            Domain::Interval(0.0, eps),
            &constants.spec,
        )?
        .value;
        Ok(Self {
            cfg,
            kappa: constants.kappa,
            drift: constants.kappa + jumps.mean(),
            sigma: var.sqrt(),
            jumps: Some(jumps),
        })
    }

    /// `X_s = κs`, i.e. `Π = 0`.
    pub fn drift_only(kappa: f64, cfg: LevySimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            kappa,
            jumps: None,
            drift: kappa,
            sigma: 0.0,
        })
    }

    pub fn config(&self) -> &LevySimConfig {
        &self.cfg
    }

    /// Standard deviation per unit time of the small-jump surrogate.
    pub fn small_jump_sd(&self) -> f64 {
        self.sigma
    }

    pub fn jump_rate(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |j| j.rate())
    }

    /// One replica; streams are keyed by `(seed, replica)`.
    pub fn sample(&self, seed: u64, replica: u64) -> LevySupSample {
        let (mut rng, _) = replica_streams(seed, replica);
        self.sample_with(&mut rng)
    }

    fn sample_with<R: Rng>(&self, rng: &mut R) -> LevySupSample {
        let horizon = self.cfg.horizon;
        let rate = self.jump_rate();
        let (mut t, mut x, mut low) = (0.0f64, 0.0f64, 0.0f64);
        let mut next_jump = if rate > 0.0 {
            <Exp1 as Distribution<f64>>::sample(&Exp1, rng) / rate
        } else {
            f64::INFINITY
        };
        while t < horizon {
            let stop = next_jump.min(horizon).min(t + self.cfg.grid_step);
            let dt = stop - t;
            let z: f64 = StandardNormal.sample(rng);
            let end = x + self.drift * dt + self.sigma * dt.sqrt() * z;
            if self.sigma > 0.0 {
                // minimum of the Brownian bridge from x to end over dt
                let u: f64 = 1.0 - rng.random::<f64>();
                let spread = ((end - x) * (end - x) - 2.0 * self.sigma * self.sigma * dt * u.ln()).sqrt();
                low = low.min(0.5 * (x + end - spread));
            } else {
                low = low.min(end);
            }
            x = end;
            t = stop;
            if t == next_jump && t < horizon {
                let jumps = self.jumps.as_ref().expect("positive rate implies a table");
                x -= jumps.quantile(rng.random::<f64>());
                low = low.min(x);
                next_jump = t + <Exp1 as Distribution<f64>>::sample(&Exp1, rng) / rate;
            }
        }
        LevySupSample {
            sup: -low,
            inf: low,
            neg_l_terminal: x - self.kappa * horizon,
        }
    }
}

/// `reps` independent replicas `0..reps` of `seed`.
pub fn simulate_levy_sup(constants: &EndgameConstants, cfg: LevySimConfig, reps: u64, seed: u64) -> Result<Vec<LevySupSample>> {
    let sim = LevySimulator::new(constants, cfg)?;
    Ok((0..reps).map(|r| sim.sample(seed, r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_only_has_zero_supremum() {
        let sim = LevySimulator::drift_only(1.7, LevySimConfig::default()).unwrap();
        for r in 0..5 {
            let s = sim.sample(3, r);
            assert_eq!(s.sup, 0.0);
            assert_eq!(s.inf, 0.0);
            assert!(s.neg_l_terminal.abs() < 1e-12);
        }
    }

    #[test]
    fn jump_table_against_quadrature() {
        let (theta, tau, eps) = (1.64, 3.5, 0.05);
        let table = JumpTable::new(theta, tau, eps).unwrap();
        let spec = crate::numerics::QuadratureSpec::with_tolerances(1e-12, 1e-10);
        let rate = integrate_improper(|y| levy_density_y(y, theta, tau), Domain::UpperHalf(eps), &spec)
            .unwrap()
            .value;
        let mean = integrate_improper(|y| y * levy_density_y(y, theta, tau), Domain::UpperHalf(eps), &spec)
            .unwrap()
            .value;
        assert!((table.rate() / rate - 1.0).abs() < 1e-6, "{} {rate}", table.rate());
        assert!((table.mean() / mean - 1.0).abs() < 1e-6);
        // quantiles invert the cumulative mass
        let median = table.quantile(0.5);
        let below = integrate_improper(|y| levy_density_y(y, theta, tau), Domain::Interval(eps, median), &spec)
            .unwrap()
            .value;
        assert!((below / rate - 0.5).abs() < 1e-6);
        assert_eq!(table.quantile(0.0), eps);
    }

    #[test]
    fn config_validation() {
        let bad = LevySimConfig {
            small_jump_cutoff: 1.5,
            ..LevySimConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(LevySimConfig {
            horizon: 0.0,
            ..LevySimConfig::default()
        }
        .validate()
        .is_err());
    }
}

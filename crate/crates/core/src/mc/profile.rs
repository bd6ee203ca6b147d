//! Conditioned trajectories and the time-reversed end-game processes.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{LogWeights, McConfig};
use crate::error::{domain, Error, Result};
use crate::process::{Measure, PathWorkspace, TruncatedModel};
use crate::ratefn::{i_e, RateFunctionTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub p: f64,
    /// self-normalized estimate of `E[S_{pu} | H₁(0) > u]`
    pub mean: f64,
    /// `u^{τ-2} I_E(p)`
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub u: f64,
    pub theta: f64,
    pub points: Vec<ProfilePoint>,
    pub survivors: u64,
    pub effective_sample_size: f64,
}

impl Profile {
    /// `sup_p |Ŝ(pu) - u^{τ-2} I_E(p)| / u^{τ-2}`.
    pub fn max_scaled_gap(&self, tau: f64) -> f64 {
        let scale = self.u.powf(tau - 2.0);
        self.points
            .iter()
            .map(|q| (q.mean - q.predicted).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Mean path `Ŝ(pu)` given `{H₁(0) > u}`, from samples tilted at `θ*_u`
/// with self-normalized weights `e^{-θ u S_u}` on the surviving paths.
pub fn conditioned_profile(u: f64, p_grid: &[f64], table: &RateFunctionTable, cfg: &McConfig) -> Result<Profile> {
    cfg.validate()?;
    if p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(domain("conditioned_profile", "p must lie in [0, 1]"));
    }
    let theta = table.theta_star_u(u)?;
    let model = TruncatedModel::new(&cfg.params, u, &cfg.scheme, Measure::Tilted { theta })?;
    let mut ws = PathWorkspace::new();
    let mut weights = LogWeights::new();
    let mut lws = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for r in 0..cfg.reps {
        let path = model.simulate(cfg.seed, r, &mut ws, true);
        if path.first_hit().is_some() {
            continue;
        }
        let lw = -theta * u * path.terminal_value();
        weights.add(lw);
        lws.push(lw);
        values.extend(p_grid.iter().map(|&p| path.value(p * u)));
    }
    if lws.is_empty() {
        return Err(Error::Degenerate {
            op: "conditioned_profile",
            detail: alloc::format!("no surviving path in {} replicas", cfg.reps),
        });
    }
    let k = p_grid.len();
    let (mut num, mut den) = (alloc::vec![0.0; k], 0.0);
    for (j, &lw) in lws.iter().enumerate() {
        let w = (lw - weights.max()).exp();
        den += w;
        for (acc, v) in num.iter_mut().zip(&values[j * k..(j + 1) * k]) {
            *acc += w * v;
        }
    }
    let scale = u.powf(cfg.params.tau() - 2.0);
    let points = p_grid
        .iter()
        .zip(&num)
        .map(|(&p, &s)| {
            Ok(ProfilePoint {
                p,
                mean: s / den,
                predicted: scale * i_e(p, table)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Profile {
        u,
        theta,
        points,
        survivors: lws.len() as u64,
        effective_sample_size: weights.ess(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversedEndgame {
    pub u: f64,
    pub theta: f64,
    pub window: f64,
    pub s_max: f64,
    /// rescaled reversed times `s_k = t_k u^{τ-2}`, starting at 0
    pub s: Vec<f64>,
    /// mean of `A_u(t_k)` over the accepted samples
    pub mean_a: Vec<f64>,
    /// sample variance of `B_u(t_k)`
    pub var_b: Vec<f64>,
    /// regression slope of `mean_a` on `s` through the origin
    pub a_slope: f64,
    /// pooled variance of the `B_u` increments per unit `s`
    pub b_increment_variance: f64,
    pub accepted: u64,
}

/// Time-reversed end-game processes on tilted samples with `|u S_u| ≤ window`.
///
/// With `q_i(t) = (e^{c_i t} - 1)/(e^{c_i u} - 1)`, the head clocks that fired
/// in `[0, u]` give `A_u(t) = -Σ c_i (u q_i(t) - t)` and
/// `B_u(t) = u Σ c_i (1{T_i > u-t} - q_i(t))`. The Gaussian tail beyond `N`
/// enters through its regression on the tail value at `u`: with `m` the tail
/// mean, `v` its variance and `Z` the tail noise,
/// `A = u m(u-t) - (u-t) m(u) + (u v(u-t)/v(u) - (u-t)) Z(u)` and
/// `B = -u (Z(u-t) - v(u-t)/v(u) Z(u))`.
/// `t` runs over the tail grid up to `s_max u^{-(τ-2)}`.
pub fn reversed_endgame_stats(u: f64, s_max: f64, window: f64, theta: f64, cfg: &McConfig) -> Result<ReversedEndgame> {
    cfg.validate()?;
    if !(u >= 5.0) {
        return Err(domain("reversed_endgame_stats", "u must be at least 5"));
    }
    if !(window > 0.0) || !(s_max > 0.0) {
        return Err(domain("reversed_endgame_stats", "window and s_max must be positive"));
    }
    let model = TruncatedModel::new(&cfg.params, u, &cfg.scheme, Measure::Tilted { theta })?;
    let cells = model.cells();
    let dt = model.grid_step();
    let speed = u.powf(cfg.params.tau() - 2.0);
    let nodes = ((s_max / speed / dt).floor() as usize).min(cells);
    if nodes == 0 {
        return Err(domain("reversed_endgame_stats", "s_max is below one tail-grid step"));
    }
    let t: Vec<f64> = (0..=nodes).map(|k| k as f64 * dt).collect();
    let mean = model.tail_mean_nodes();
    let var = model.tail_var_nodes();
    let v_u = var[cells];
    let ratio: Vec<f64> = (0..=nodes)
        .map(|k| if v_u > 0.0 { var[cells - k] / v_u } else { 0.0 })
        .collect();

    let mut ws = PathWorkspace::new();
    let mut sum_a = alloc::vec![0.0; nodes + 1];
    let mut sum_b = alloc::vec![0.0; nodes + 1];
    let mut sum_bb = alloc::vec![0.0; nodes + 1];
    let mut sum_db = alloc::vec![0.0; nodes];
    let mut sum_dbdb = alloc::vec![0.0; nodes];
    let (mut a, mut b) = (alloc::vec![0.0; nodes + 1], alloc::vec![0.0; nodes + 1]);
    let mut accepted = 0u64;
    for r in 0..cfg.reps {
        let path = model.simulate(cfg.seed, r, &mut ws, false);
        if (u * path.terminal_value()).abs() > window {
            continue;
        }
        accepted += 1;
        let z_u = path.grid[cells] - mean[cells];
        for k in 0..=nodes {
            let z = path.grid[cells - k] - mean[cells - k];
            let (tk, rk) = (t[k], ratio[k]);
            a[k] = u * mean[cells - k] - (u - tk) * mean[cells] + (u * rk - (u - tk)) * z_u;
            b[k] = -u * (z - rk * z_u);
        }
        for j in path.jumps {
            let c = j.size;
            let denom = (c * u).exp_m1();
            for k in 1..=nodes {
                let q = (c * t[k]).exp_m1() / denom;
                a[k] -= c * (u * q - t[k]);
                b[k] += u * c * ((j.time > u - t[k]) as u8 as f64 - q);
            }
        }
        for k in 0..=nodes {
            sum_a[k] += a[k];
            sum_b[k] += b[k];
            sum_bb[k] += b[k] * b[k];
        }
        for k in 0..nodes {
            let d = b[k + 1] - b[k];
            sum_db[k] += d;
            sum_dbdb[k] += d * d;
        }
    }
    if accepted < 2 {
        return Err(Error::Degenerate {
            op: "reversed_endgame_stats",
            detail: alloc::format!("{accepted} of {} replicas inside the window", cfg.reps),
        });
    }
    let n = accepted as f64;
    let s: Vec<f64> = t.iter().map(|&x| x * speed).collect();
    let mean_a: Vec<f64> = sum_a.iter().map(|x| x / n).collect();
    let var_b: Vec<f64> = sum_b
        .iter()
        .zip(&sum_bb)
        .map(|(&m, &m2)| ((m2 - m * m / n) / (n - 1.0)).max(0.0))
        .collect();
    let a_slope = s.iter().zip(&mean_a).map(|(x, y)| x * y).sum::<f64>() / s.iter().map(|x| x * x).sum::<f64>();
    let pooled: f64 = sum_db
        .iter()
        .zip(&sum_dbdb)
        .map(|(&m, &m2)| (m2 - m * m / n) / (n - 1.0))
        .sum();
    Ok(ReversedEndgame {
        u,
        theta,
        window,
        s_max,
        s,
        mean_a,
        var_b,
        a_slope,
        b_increment_variance: pooled / (nodes as f64 * dt * speed),
        accepted,
    })
}

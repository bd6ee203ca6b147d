//! Piecewise-linear path skeletons and first passage below zero.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

use rand::Rng;

use crate::process::model::{replica_streams, Jump, TruncatedModel};

/// A right-continuous path on `[0, horizon]`: linear drift, upward jumps,
/// plus a continuous correction that is linear between uniform grid nodes.
#[derive(Debug, Clone, Copy)]
pub struct PathSkeleton<'a> {
    pub start: f64,
    pub slope: f64,
    /// Sorted by time; every time in `(0, horizon]`.
    pub jumps: &'a [Jump],
    /// Correction at nodes `k·dt`, `k = 0..=cells`; empty means none.
    pub grid: &'a [f64],
    pub horizon: f64,
}

impl<'a> PathSkeleton<'a> {
    fn cells(&self) -> usize {
        self.grid.len().saturating_sub(1).max(1)
    }

    fn dt(&self) -> f64 {
        self.horizon / self.cells() as f64
    }

    fn node_time(&self, k: usize) -> f64 {
        if k >= self.cells() {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    fn grid_at(&self, k: usize) -> f64 {
        if self.grid.is_empty() {
            0.0
        } else {
            self.grid[k]
        }
    }

    /// Continuous correction at `t`, interpolated linearly.
    pub fn correction(&self, t: f64) -> f64 {
        interpolate(self.grid, self.horizon, t)
    }

    /// Path value at `t` (jumps at `t` included).
    pub fn value(&self, t: f64) -> f64 {
        let jumps: f64 = self.jumps.iter().take_while(|j| j.time <= t).map(|j| j.size).sum();
        self.start + self.slope * t + jumps + self.correction(t)
    }

    /// Value at the horizon; does not need the jumps sorted.
    pub fn terminal_value(&self) -> f64 {
        let jumps: f64 = self.jumps.iter().map(|j| j.size).sum();
        self.start + self.slope * self.horizon + jumps + self.grid.last().copied().unwrap_or(0.0)
    }

    /// First time the path is `<= 0`, or `None` if it stays strictly
    /// positive on `[0, horizon]`.
    ///
    /// Between breakpoints (jump times and grid nodes) the path is linear,
    /// so its minimum over a piece sits at the left limit of the piece's
    /// right end and the crossing time is the exact linear root.
    pub fn first_hit(&self) -> Option<f64> {
        if self.start + self.grid_at(0) <= 0.0 {
            return Some(0.0);
        }
        let cells = self.cells();
        let mut level = 0.0; // jumps so far
        let mut next = 0;
        for k in 0..cells {
            let (a, b) = (self.node_time(k), self.node_time(k + 1));
            let ga = self.grid_at(k);
            let gb = self.grid_at(if self.grid.is_empty() { 0 } else { k + 1 });
            let s = self.slope + (gb - ga) / (b - a);
            let mut cur = a;
            let mut v = self.start + self.slope * a + ga + level;
            while next < self.jumps.len() && self.jumps[next].time <= b {
                let tj = self.jumps[next].time;
                let before = v + s * (tj - cur);
                if before <= 0.0 {
                    return Some(root(cur, v, tj, before));
                }
                v = before + self.jumps[next].size;
                level += self.jumps[next].size;
                cur = tj;
                next += 1;
            }
            let end = v + s * (b - cur);
            if end <= 0.0 {
                return Some(root(cur, v, b, end));
            }
        }
        None
    }
}

#[inline]
fn root(t0: f64, v0: f64, t1: f64, v1: f64) -> f64 {
    if v1 >= 0.0 || v0 <= v1 {
        return t1;
    }
    (t0 + v0 / (v0 - v1) * (t1 - t0)).clamp(t0, t1)
}

/// Linear interpolation of node values on a uniform grid over `[0, u]`.
pub(crate) fn interpolate(nodes: &[f64], u: f64, t: f64) -> f64 {
    match nodes.len() {
        0 => 0.0,
        1 => nodes[0],
        n => {
            let cells = n - 1;
            let dt = u / cells as f64;
            let x = (t / dt).max(0.0);
            let k = (x.floor() as usize).min(cells - 1);
            let w = x - k as f64;
            nodes[k] + (nodes[k + 1] - nodes[k]) * w
        }
    }
}

/// Reusable buffers for simulating many replicas of one model.
#[derive(Debug, Default, Clone)]
pub struct PathWorkspace {
    pub(crate) jumps: Vec<Jump>,
    pub(crate) grid: Vec<f64>,
    noise: Vec<f64>,
}

impl PathWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

impl TruncatedModel {
    /// Simulates replica `replica` of `seed` and returns its skeleton.
    /// Jumps after the horizon are dropped; with `ordered` the jumps are
    /// sorted by time (needed for anything but the terminal value).
    pub fn simulate<'w>(&self, seed: u64, replica: u64, ws: &'w mut PathWorkspace, ordered: bool) -> PathSkeleton<'w> {
        let (mut head_rng, mut tail_rng) = replica_streams(seed, replica);
        self.simulate_with(&mut head_rng, &mut tail_rng, ws, ordered)
    }

    pub(crate) fn simulate_with<'w, R: Rng, T: Rng>(
        &self,
        head_rng: &mut R,
        tail_rng: &mut T,
        ws: &'w mut PathWorkspace,
        ordered: bool,
    ) -> PathSkeleton<'w> {
        let u = self.horizon();
        ws.jumps.clear();
        let jumps = &mut ws.jumps;
        self.draw_head(head_rng, |slot, t| {
            if t <= u {
                jumps.push(Jump {
                    time: t,
                    size: self.slot_weight(slot),
                });
            }
        });
        if ordered {
            ws.jumps.sort_unstable_by(|a, b| a.time.total_cmp(&b.time));
        }
        self.draw_tail_noise(tail_rng, &mut ws.noise);
        ws.grid.clear();
        let mean = self.tail_mean_nodes();
        if ws.noise.is_empty() {
            ws.grid.extend_from_slice(mean);
        } else {
            ws.grid.extend(mean.iter().zip(&ws.noise).map(|(m, z)| m + z));
        }
        PathSkeleton {
            start: self.start(),
            slope: self.drift() - self.compensator(),
            jumps: &ws.jumps,
            grid: &ws.grid,
            horizon: u,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skel<'a>(start: f64, slope: f64, jumps: &'a [Jump], grid: &'a [f64], horizon: f64) -> PathSkeleton<'a> {
        PathSkeleton {
            start,
            slope,
            jumps,
            grid,
            horizon,
        }
    }

    #[test]
    fn linear_descent() {
        assert_eq!(skel(1.0, -1.0, &[], &[], 3.0).first_hit(), Some(1.0));
        assert_eq!(skel(1.0, -1.0, &[], &[0.0; 9], 3.0).first_hit(), Some(1.0));
        assert_eq!(skel(1.0, -0.2, &[], &[], 3.0).first_hit(), None);
    }

    #[test]
    fn one_jump() {
        let j = [Jump { time: 0.5, size: 0.5 }];
        let h = skel(1.0, -1.0, &j, &[], 3.0).first_hit().unwrap();
        assert!((h - 1.5).abs() < 1e-15);
        let h = skel(1.0, -1.0, &j, &[0.0; 17], 3.0).first_hit().unwrap();
        assert!((h - 1.5).abs() < 1e-14);
    }

    #[test]
    fn touching_zero_at_a_jump_is_a_hit() {
        let j = [Jump { time: 1.0, size: 0.5 }];
        assert_eq!(skel(1.0, -1.0, &j, &[], 3.0).first_hit(), Some(1.0));
    }

    #[test]
    fn removing_a_jump_never_delays_the_hit() {
        let js = [
            Jump { time: 0.3, size: 0.2 },
            Jump { time: 0.9, size: 0.4 },
            Jump { time: 1.4, size: 0.1 },
        ];
        let full = skel(1.0, -1.0, &js, &[], 5.0).first_hit().unwrap();
        for drop in 0..3 {
            let fewer: Vec<Jump> = js.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, j)| *j).collect();
            assert!(skel(1.0, -1.0, &fewer, &[], 5.0).first_hit().unwrap() <= full);
        }
    }

    #[test]
    fn grid_correction_dips() {
        // correction dips to -2 at t = 1 between nodes 0 and 2: crossing at 0.5
        let grid = [0.0, -2.0, 0.0];
        let h = skel(1.0, 0.0, &[], &grid, 2.0).first_hit().unwrap();
        assert!((h - 0.5).abs() < 1e-15);
        assert!((skel(1.0, 0.0, &[], &grid, 2.0).value(1.5) - 0.0).abs() < 1e-15);
    }
}

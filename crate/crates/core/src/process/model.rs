//! Precomputed truncated model: head-clock tables, the tail grid, and the
//! per-replica sampler shared by [`ClockSample`](super::ClockSample) and
//! the estimators.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::tail::{tail_moments_beyond, tilt_denominator, Measure};
use crate::process::{clock_weight, make_vertex_process, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMode {
    /// Exact tail mean plus Gaussian independent increments.
    Gaussian,
    /// Exact tail mean only.
    MeanOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailGrid {
    /// Fixed step in time units.
    Step(f64),
    /// `u / cells`.
    Cells(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationScheme {
    pub head_cutoff: u64,
    pub tail_mode: TailMode,
    pub tail_grid: TailGrid,
}

impl Default for TruncationScheme {
    fn default() -> Self {
        Self {
            head_cutoff: 100_000,
            tail_mode: TailMode::Gaussian,
            tail_grid: TailGrid::Cells(1024),
        }
    }
}

impl TruncationScheme {
    pub const MIN_HEAD_CUTOFF: u64 = 1000;

    pub fn with_head_cutoff(mut self, n: u64) -> Self {
        self.head_cutoff = n;
        self
    }

    pub fn with_cells(mut self, cells: u32) -> Self {
        self.tail_grid = TailGrid::Cells(cells);
        self
    }

    pub fn with_tail_mode(mut self, mode: TailMode) -> Self {
        self.tail_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.head_cutoff < Self::MIN_HEAD_CUTOFF {
            return Err(Error::Config(alloc::format!(
                "head cutoff N must be at least {}",
                Self::MIN_HEAD_CUTOFF
            )));
        }
        if self.head_cutoff > u32::MAX as u64 {
            return Err(Error::Config("head cutoff N too large".into()));
        }
        match self.tail_grid {
            TailGrid::Step(h) if !(h > 0.0) || !h.is_finite() => Err(Error::Config("tail grid step must be positive".into())),
            TailGrid::Cells(0) => Err(Error::Config("tail grid needs at least one cell".into())),
            _ => Ok(()),
        }
    }

    pub fn cells(&self, u: f64) -> usize {
        match self.tail_grid {
            TailGrid::Cells(k) => k as usize,
            TailGrid::Step(h) => ((u / h).ceil() as usize).max(1),
        }
    }
}

/// One head jump: time and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Head clocks with firing probability at least this are drawn one by one;
/// below it the sampler skips geometrically.
const DENSE_PROBABILITY: f64 = 0.1;

/// Everything about the truncated process on `[0, u]` that does not depend
/// on the random draw.
#[derive(Debug, Clone)]
pub struct TruncatedModel {
    params: ModelParams,
    horizon: f64,
    scheme: TruncationScheme,
    measure: Measure,
    vertex: u64,
    start: f64,
    drift: f64,
    /// clock index per head slot, decreasing weight order
    index: Vec<u32>,
    c: Vec<f64>,
    /// probability the clock fires in `[0, u]`
    p: Vec<f64>,
    /// `ln(1 - p)`
    ln_q: Vec<f64>,
    /// `1 - e^{-c u}`
    p0: Vec<f64>,
    dense: usize,
    /// `Σ_head c_i²`
    compensator: f64,
    dt: f64,
    /// tail mean (tilt-shifted under the tilted measure) at grid nodes
    tail_mean: Vec<f64>,
    /// standard deviation of the tail noise increment per cell
    tail_sd: Vec<f64>,
    /// original-measure tail variance at grid nodes
    tail_var: Vec<f64>,
    /// original-measure `m_N(u)`, `v_N(u)`
    tail_mean_u: f64,
    tail_var_u: f64,
    tail_err: f64,
}

impl TruncatedModel {
    /// Model of the vertex-1 process.
    pub fn new(params: &ModelParams, u: f64, scheme: &TruncationScheme, measure: Measure) -> Result<Self> {
        Self::for_vertex(params, 1, u, scheme, measure)
    }

    pub fn for_vertex(params: &ModelParams, vertex: u64, u: f64, scheme: &TruncationScheme, measure: Measure) -> Result<Self> {
        scheme.validate()?;
        Self::build(params, vertex, u, scheme, measure)
    }

    /// No validation of the head cutoff; used for hand fixtures.
    pub(crate) fn build(params: &ModelParams, vertex: u64, u: f64, scheme: &TruncationScheme, measure: Measure) -> Result<Self> {
        measure.validate()?;
        if !(u > 0.0) || !u.is_finite() {
            return Err(crate::error::domain("truncated model", "horizon u must be positive"));
        }
        let (start, drift) = make_vertex_process(params, vertex)?;
        let n = scheme.head_cutoff;
        let cap = n as usize;
        let (mut index, mut c, mut p, mut ln_q, mut p0) = (
            Vec::with_capacity(cap),
            Vec::with_capacity(cap),
            Vec::with_capacity(cap),
            Vec::with_capacity(cap),
            Vec::with_capacity(cap),
        );
        let mut compensator = crate::numerics::Neumaier::default();
        for i in 1..=n {
            if i == vertex {
                continue;
            }
            let ci = clock_weight(i, params);
            let cu = ci * u;
            let fire = -(-cu).exp_m1();
            let pi = match measure {
                Measure::Original => fire,
                Measure::Tilted { theta } => fire / tilt_denominator(cu, theta),
            };
            index.push(i as u32);
            c.push(ci);
            p.push(pi);
            ln_q.push((-pi).ln_1p());
            p0.push(fire);
            compensator.add(ci * ci);
        }
        let dense = p.iter().take_while(|&&x| x >= DENSE_PROBABILITY).count().max(64).min(p.len());

        let cells = scheme.cells(u);
        let dt = u / cells as f64;
        // a deterministic tail (mean-only mode) is not moved by the tilt
        let theta = match scheme.tail_mode {
            TailMode::Gaussian => measure.theta(),
            TailMode::MeanOnly => 0.0,
        };
        let mut tail_mean = Vec::with_capacity(cells + 1);
        let mut var_nodes = Vec::with_capacity(cells + 1);
        let mut tail_err = 0.0f64;
        for k in 0..=cells {
            let t = if k == cells { u } else { k as f64 * dt };
            let m = tail_moments_beyond(params, n, t, u, Measure::Original)?;
            // exact tilt of the Gaussian surrogate: shift by θ u Cov(G_t, G_u)
            tail_mean.push(m.mean + theta * u * m.var);
            var_nodes.push(m.var);
            tail_err = tail_err.max(m.err_est);
        }
        let tail_sd = match scheme.tail_mode {
            TailMode::Gaussian => var_nodes.windows(2).map(|w| (w[1] - w[0]).max(0.0).sqrt()).collect(),
            TailMode::MeanOnly => Vec::new(),
        };
        let tail_var_u = var_nodes[cells];
        let tail_mean_u = tail_mean[cells] - theta * u * tail_var_u;
        let tail_var = var_nodes;
        Ok(Self {
            params: *params,
            horizon: u,
            scheme: *scheme,
            measure,
            vertex,
            start,
            drift,
            index,
            c,
            p,
            ln_q,
            p0,
            dense,
            compensator: compensator.sum(),
            dt,
            tail_mean,
            tail_sd,
            tail_var,
            tail_mean_u,
            tail_var_u,
            tail_err,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }
    pub fn measure(&self) -> Measure {
        self.measure
    }
    pub fn vertex(&self) -> u64 {
        self.vertex
    }
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn drift(&self) -> f64 {
        self.drift
    }
    /// `Σ_head c_i²`, the slope of the head compensator.
    pub fn compensator(&self) -> f64 {
        self.compensator
    }
    pub fn cells(&self) -> usize {
        self.tail_mean.len() - 1
    }
    pub fn grid_step(&self) -> f64 {
        self.dt
    }
    pub fn tail_mean_nodes(&self) -> &[f64] {
        &self.tail_mean
    }
    /// Original-measure tail variance at the grid nodes.
    pub fn tail_var_nodes(&self) -> &[f64] {
        &self.tail_var
    }
    /// Original-measure tail mean and variance at `u`.
    pub fn tail_at_horizon(&self) -> (f64, f64) {
        (self.tail_mean_u, self.tail_var_u)
    }
    pub fn tail_error_estimate(&self) -> f64 {
        self.tail_err
    }
    /// Head clocks as (clock index, weight, firing probability on `[0,u]`).
    pub fn head_clocks(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.index
            .iter()
            .zip(&self.c)
            .zip(&self.p)
            .map(|((&i, &c), &p)| (i as u64, c, p))
    }

    /// Draws the head clocks of one replica. Pushes `(slot, time)` for
    /// every clock that fires in `[0, u]`; under the original measure the
    /// densely drawn clocks also report their time when it exceeds `u`.
    pub(crate) fn draw_head<R: Rng>(&self, rng: &mut R, mut push: impl FnMut(usize, f64)) {
        let tilted = matches!(self.measure, Measure::Tilted { .. });
        for j in 0..self.dense {
            let c = self.c[j];
            if tilted {
                if rng.random::<f64>() < self.p[j] {
                    push(j, self.truncated_time(j, 1.0 - rng.random::<f64>()));
                }
            } else {
                // Exp(c) by inversion; 1 - U lies in (0, 1]
                let t = -(1.0 - rng.random::<f64>()).ln() / c;
                push(j, t);
            }
        }
        // geometric skipping with the running bound p[j] >= p[k], k >= j
        let len = self.p.len();
        let mut j = self.dense;
        while j < len {
            let ln_q = self.ln_q[j];
            if ln_q == 0.0 {
                break;
            }
            let e = (1.0 - rng.random::<f64>()).ln();
            let skip = (e / ln_q).floor();
            if skip >= (len - j) as f64 {
                break;
            }
            let k = j + skip as usize;
            if rng.random::<f64>() * self.p[j] < self.p[k] {
                push(k, self.truncated_time(k, 1.0 - rng.random::<f64>()));
            }
            j = k + 1;
        }
    }

    /// Inverse CDF of the exponential(c) law restricted to `[0, u]`;
    /// `v ∈ (0, 1]` maps into `(0, u]`.
    #[inline]
    fn truncated_time(&self, slot: usize, v: f64) -> f64 {
        let t = -(-v * self.p0[slot]).ln_1p() / self.c[slot];
        t.min(self.horizon)
    }

    /// Cumulative tail noise at the grid nodes (`cells + 1` values starting
    /// at 0), or an empty vector in mean-only mode.
    pub(crate) fn draw_tail_noise<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        if self.tail_sd.is_empty() {
            return;
        }
        out.reserve(self.tail_sd.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for &sd in &self.tail_sd {
            let z: f64 = rng.sample(StandardNormal);
            acc += sd * z;
            out.push(acc);
        }
    }

    pub(crate) fn tail_increments<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.tail_sd
            .iter()
            .map(|&sd| {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            })
            .collect()
    }

    pub(crate) fn slot_weight(&self, slot: usize) -> f64 {
        self.c[slot]
    }

    pub(crate) fn slot_index(&self, slot: usize) -> u64 {
        self.index[slot] as u64
    }
}

/// Per-replica RNG streams: head clocks on stream `2r`, tail noise on `2r+1`.
/// Raising the head cutoff leaves the clocks below the old cutoff unchanged.
pub fn replica_streams(seed: u64, replica: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut head = ChaCha8Rng::seed_from_u64(seed);
    head.set_stream(2 * replica);
    let mut tail = ChaCha8Rng::seed_from_u64(seed);
    tail.set_stream(2 * replica + 1);
    (head, tail)
}

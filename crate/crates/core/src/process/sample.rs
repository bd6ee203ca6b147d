use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::Neumaier;
use crate::process::model::{replica_streams, Jump, TailMode, TruncatedModel, TruncationScheme};
use crate::process::path::{interpolate, PathSkeleton};
use crate::process::{clock_weight, Measure, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadTime {
    pub index: u64,
    pub time: f64,
}

/// One realization of the truncated process on `[0, u]`.
///
/// `head_times` lists, by clock index, every head clock that fires in
/// `[0, u]`; under the original measure the first few clocks also carry
/// their time when it falls after `u`. Clocks not listed fire after `u`.
/// `tail_increments` are the centred Gaussian tail increments per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockSample {
    params: ModelParams,
    horizon: f64,
    measure: Measure,
    seed: u64,
    replica: u64,
    head_cutoff: u64,
    vertex: u64,
    start: f64,
    drift: f64,
    head_compensator: f64,
    head_times: Vec<HeadTime>,
    tail_mode: TailMode,
    tail_mean: Vec<f64>,
    tail_increments: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathValue {
    pub t: f64,
    pub value: f64,
    pub head_part: f64,
    pub tail_mean_part: f64,
    pub tail_noise_part: f64,
}

/// Samples replica 0 of the vertex-1 process.
pub fn sample_clocks(
    params: &ModelParams,
    u: f64,
    scheme: &TruncationScheme,
    measure: Measure,
    seed: u64,
) -> Result<ClockSample> {
    let model = TruncatedModel::new(params, u, scheme, measure)?;
    Ok(ClockSample::draw(&model, seed, 0))
}

impl ClockSample {
    /// Draws replica `replica` of `seed` from a prepared model.
    pub fn draw(model: &TruncatedModel, seed: u64, replica: u64) -> Self {
        let (mut head_rng, mut tail_rng) = replica_streams(seed, replica);
        let mut head_times = Vec::new();
        let u = model.horizon();
        model.draw_head(&mut head_rng, |slot, time| {
            // dense clocks under the original law also report times past u
            if time <= u {
                head_times.push(HeadTime {
                    index: model.slot_index(slot),
                    time,
                })
            }
        });
        let tail_increments = model.tail_increments(&mut tail_rng);
        Self {
            params: *model.params(),
            horizon: model.horizon(),
            measure: model.measure(),
            seed,
            replica,
            head_cutoff: model.scheme().head_cutoff,
            vertex: model.vertex(),
            start: model.start(),
            drift: model.drift(),
            head_compensator: model.compensator(),
            head_times,
            tail_mode: model.scheme().tail_mode,
            tail_mean: model.tail_mean_nodes().to_vec(),
            tail_increments,
        }
    }

    /// Hand-built vertex-1 sample with head clocks `2..=head_cutoff`, the
    /// listed firing times, and no tail.
    pub fn fixture(params: &ModelParams, horizon: f64, head_cutoff: u64, times: &[(u64, f64)]) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(domain("ClockSample::fixture", "horizon must be positive"));
        }
        let mut head_times = Vec::new();
        for &(index, time) in times {
            if index < 2 || index > head_cutoff || !(time > 0.0) {
                return Err(domain("ClockSample::fixture", "clock index or time out of range"));
            }
            if time.is_finite() {
                head_times.push(HeadTime { index, time });
            }
        }
        head_times.sort_by_key(|h| h.index);
        let head_compensator: Neumaier = (2..=head_cutoff).map(|i| clock_weight(i, params).powi(2)).collect();
        Ok(Self {
            params: *params,
            horizon,
            measure: Measure::Original,
            seed: 0,
            replica: 0,
            head_cutoff,
            vertex: 1,
            start: 1.0,
            drift: params.beta_tilde(),
            head_compensator: head_compensator.sum(),
            head_times,
            tail_mode: TailMode::MeanOnly,
            tail_mean: Vec::new(),
            tail_increments: Vec::new(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn measure(&self) -> Measure {
        self.measure
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn replica(&self) -> u64 {
        self.replica
    }
    pub fn head_cutoff(&self) -> u64 {
        self.head_cutoff
    }
    pub fn vertex(&self) -> u64 {
        self.vertex
    }
    pub fn head_times(&self) -> &[HeadTime] {
        &self.head_times
    }
    pub fn tail_increments(&self) -> &[f64] {
        &self.tail_increments
    }

    /// `T_i`, or infinity when the clock did not fire in `[0, u]` (its time
    /// after `u` is not drawn).
    pub fn head_time(&self, index: u64) -> f64 {
        match self.head_times.binary_search_by_key(&index, |h| h.index) {
            Ok(k) => self.head_times[k].time,
            Err(_) => f64::INFINITY,
        }
    }

    fn noise_nodes(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut nodes = Vec::with_capacity(self.tail_increments.len() + 1);
        nodes.push(0.0);
        for &dz in &self.tail_increments {
            acc += dz;
            nodes.push(acc);
        }
        nodes
    }

    fn jumps(&self) -> Vec<Jump> {
        let mut jumps: Vec<Jump> = self
            .head_times
            .iter()
            .filter(|h| h.time <= self.horizon)
            .map(|h| Jump {
                time: h.time,
                size: clock_weight(h.index, &self.params),
            })
            .collect();
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        jumps
    }

    /// Path value at `t` with its decomposition; `start` and `drift`
    /// override the sample's own (1 and `β̃` for vertex 1).
    pub fn eval_path_with(&self, t: f64, start: f64, drift: f64) -> Result<PathValue> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(domain("eval_path", "t must lie in [0, u]"));
        }
        let mut fired = Neumaier::default();
        for h in &self.head_times {
            if h.time <= t {
                fired.add(clock_weight(h.index, &self.params));
            }
        }
        let head_part = fired.sum() - self.head_compensator * t;
        let tail_mean_part = interpolate(&self.tail_mean, self.horizon, t);
        let tail_noise_part = if self.tail_increments.is_empty() {
            0.0
        } else {
            interpolate(&self.noise_nodes(), self.horizon, t)
        };
        let value = start + drift * t + head_part + tail_mean_part + tail_noise_part;
        Ok(PathValue {
            t,
            value,
            head_part,
            tail_mean_part,
            tail_noise_part,
        })
    }

    pub fn eval_path(&self, t: f64) -> Result<PathValue> {
        self.eval_path_with(t, self.start, self.drift)
    }

    fn with_skeleton<T>(&self, f: impl FnOnce(PathSkeleton<'_>) -> T) -> T {
        let jumps = self.jumps();
        let noise = self.noise_nodes();
        let grid: Vec<f64> = if self.tail_increments.is_empty() {
            self.tail_mean.clone()
        } else if self.tail_mean.is_empty() {
            noise
        } else {
            self.tail_mean.iter().zip(&noise).map(|(m, z)| m + z).collect()
        };
        f(PathSkeleton {
            start: self.start,
            slope: self.drift - self.head_compensator,
            jumps: &jumps,
            grid: &grid,
            horizon: self.horizon,
        })
    }

    /// First time the path is `<= 0` on `[0, u]`, if any.
    pub fn first_hit(&self) -> Option<f64> {
        self.with_skeleton(|s| s.first_hit())
    }
}

/// `H_1(0) ∧ u`: the first time the path is `<= 0`, or `u` when it stays
/// positive (use [`ClockSample::first_hit`] to tell the two apart).
pub fn hitting_time(sample: &ClockSample) -> f64 {
    sample.first_hit().unwrap_or(sample.horizon)
}

//! The thinned Lévy process `S_t = 1 + β̃t + Σ_{i≥2} c_i (1{T_i ≤ t} - c_i t)`:
//! clock sampling under the original and tilted laws, path evaluation with
//! an exact head and a Gaussian tail, and first passage below zero.

mod model;
mod params;
mod path;
mod sample;
mod tail;

pub use model::{replica_streams, Jump, TailGrid, TailMode, TruncatedModel, TruncationScheme};
pub use params::{clock_weight, make_vertex_process, ModelParams};
pub use path::{PathSkeleton, PathWorkspace};
pub use sample::{hitting_time, sample_clocks, ClockSample, HeadTime, PathValue};
pub(crate) use tail::{expm1_plus_x, tilt_denominator};
pub use tail::{fire_probability, tail_moments, tail_moments_beyond, Measure, TailMoments};

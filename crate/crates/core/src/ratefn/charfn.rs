//! Characteristic function of `S_u` under the truncated model and its
//! Fourier inversion.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

use crate::error::{domain, numerical, Result};
use crate::numerics::gauss_legendre;
use crate::process::{Measure, ModelParams, TailMode, TruncatedModel, TruncationScheme};

/// `E[e^{ik S_u}]` of the truncated process: head clocks enter as
/// independent Bernoulli jumps, the tail as the Gaussian (or deterministic)
/// surrogate used by the sampler.
#[derive(Debug, Clone)]
pub struct CharFn {
    /// `E[S_u]` under the chosen measure; the phase is taken about it.
    center: f64,
    clocks: Vec<(f64, f64)>,
    tail_var: f64,
}

impl CharFn {
    pub fn new(model: &TruncatedModel) -> Self {
        let u = model.horizon();
        let nodes = model.tail_mean_nodes();
        let tail_mean = nodes[nodes.len() - 1];
        let tail_var = match model.scheme().tail_mode {
            TailMode::Gaussian => model.tail_at_horizon().1,
            TailMode::MeanOnly => 0.0,
        };
        // deterministic part: start, drift, compensator, tail mean
        let offset = model.start() + (model.drift() - model.compensator()) * u + tail_mean;
        let clocks: Vec<(f64, f64)> = model.head_clocks().map(|(_, c, p)| (c, p)).collect();
        let center = offset + clocks.iter().map(|&(c, p)| c * p).sum::<f64>();
        Self {
            center,
            clocks,
            tail_var,
        }
    }

    pub fn mean(&self) -> f64 {
        self.center
    }

    /// Variance of `S_u` under the model's measure.
    pub fn variance(&self) -> f64 {
        self.tail_var + self.clocks.iter().map(|&(c, p)| c * c * p * (1.0 - p)).sum::<f64>()
    }

    /// `E[e^{ik(S_u - mean)}]`, the centred characteristic function.
    pub fn centred(&self, k: f64) -> Complex64 {
        // per clock: e^{-ikcp}(p e^{ikc} + 1 - p); multiplied directly, with
        // the modulus renormalized every block to stay in range
        let mut acc = Complex64::new(1.0, 0.0);
        let mut log_scale = 0.0;
        for (j, &(c, p)) in self.clocks.iter().enumerate() {
            // 1 + p(e^{ikc} - 1), with cos - 1 = -2 sin²(kc/2)
            let s = (k * c).sin();
            let h = (0.5 * k * c).sin();
            let z = Complex64::new(1.0 - 2.0 * p * h * h, p * s);
            let (s2, c2) = (-k * c * p).sin_cos();
            acc *= z * Complex64::new(c2, s2);
            if j % 256 == 255 {
                let m = acc.norm();
                if m == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                log_scale += m.ln();
                acc /= m;
            }
        }
        acc * (log_scale - 0.5 * k * k * self.tail_var).exp()
    }

    /// `ln|χ(k)|`, free of underflow far in the tail.
    pub fn ln_modulus(&self, k: f64) -> f64 {
        let mut acc = -0.5 * k * k * self.tail_var;
        for &(c, p) in &self.clocks {
            // |1 + p(e^{ikc} - 1)|² = 1 - 4p(1-p) sin²(kc/2)
            let h = (0.5 * k * c).sin();
            acc += 0.5 * (-4.0 * p * (1.0 - p) * h * h).ln_1p();
        }
        acc
    }

    /// `E[e^{ik S_u}]`.
    pub fn eval(&self, k: f64) -> Complex64 {
        let (s, c) = (k * self.center).sin_cos();
        self.centred(k) * Complex64::new(c, s)
    }
}

/// [`CharFn::eval`] for a freshly built vertex-1 model.
pub fn su_charfn(k: f64, u: f64, params: &ModelParams, measure: Measure, scheme: &TruncationScheme) -> Result<Complex64> {
    let model = TruncatedModel::new(params, u, scheme, measure)?;
    Ok(CharFn::new(&model).eval(k))
}

/// Modulus below which the characteristic function is treated as zero.
const CUTOFF_MODULUS: f64 = 1e-12;
const GL_POINTS: usize = 16;

/// Density of `S_u` on a window of `s`, by `f(s) = (1/π)∫_0^K Re(e^{-iks}χ(k))dk`
/// with Gauss–Legendre panels. The panel nodes and `χ` there are computed
/// once and reused for every `s` in the window.
#[derive(Debug, Clone)]
pub struct DensityInverter {
    center: f64,
    half_width: f64,
    cutoff: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

impl DensityInverter {
    /// Prepares inversion for `|s - mean| <= half_width`.
    pub fn new(chi: &CharFn, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) || !half_width.is_finite() {
            return Err(domain("su_density", "window half-width must be finite"));
        }
        let var = chi.variance();
        if !(var > 0.0) {
            return Err(numerical("su_density", "degenerate law: zero variance"));
        }
        // Gaussian guess, then extend until the modulus is negligible twice in a row
        let mut k = (2.0 * 28.0 / var).sqrt();
        let mut guard = 0;
        while chi.centred(k).norm() >= CUTOFF_MODULUS || chi.centred(1.5 * k).norm() >= CUTOFF_MODULUS {
            k *= 1.5;
            guard += 1;
            if guard > 60 {
                return Err(numerical("su_density", "characteristic function does not decay"));
            }
        }
        let cutoff = k;
        // panels: resolve e^{-ik(s-mean)} on the window and the k-scale of χ
        let scale = (1.0 / var.sqrt()).min(cutoff / 32.0);
        let width = scale.min(4.0 / (half_width + 1e-300)).min(cutoff / 32.0);
        let panels = (cutoff / width).ceil() as usize;
        let h = cutoff / panels as f64;
        let (x, w) = gauss_legendre(GL_POINTS);
        let mut nodes = Vec::with_capacity(panels * GL_POINTS);
        let mut weights = Vec::with_capacity(panels * GL_POINTS);
        for j in 0..panels {
            let a = j as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        let values = nodes.iter().map(|&k| chi.centred(k)).collect();
        Ok(Self {
            center: chi.mean(),
            half_width,
            cutoff,
            nodes,
            weights,
            values,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn window(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Raw inversion, possibly slightly negative in the far tails.
    pub fn raw(&self, s: f64) -> f64 {
        let x = s - self.center;
        let mut acc = 0.0;
        for ((&k, &w), z) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let (sn, cs) = (k * x).sin_cos();
            // Re(e^{-ikx} z)
            acc += w * (z.re * cs + z.im * sn);
        }
        acc / PI
    }

    /// Density at `s`, clipped at zero (with a warning when the raw value
    /// is materially negative).
    pub fn density(&self, s: f64) -> Result<f64> {
        if (s - self.center).abs() > self.half_width * (1.0 + 1e-12) {
            return Err(domain("su_density", "s outside the prepared window"));
        }
        let f = self.raw(s);
        if f < -1e-8 {
            log::warn!("density inversion dipped to {f:e} at s = {s}; clipped to 0");
        }
        Ok(f.max(0.0))
    }
}

/// Density of `S_u` at one point.
pub fn su_density(s: f64, u: f64, params: &ModelParams, measure: Measure, scheme: &TruncationScheme) -> Result<f64> {
    let model = TruncatedModel::new(params, u, scheme, measure)?;
    let chi = CharFn::new(&model);
    let inv = DensityInverter::new(&chi, (s - chi.mean()).abs())?;
    inv.density(s)
}

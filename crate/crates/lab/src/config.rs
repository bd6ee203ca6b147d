//! Run settings: built-in defaults, then the TOML file, then flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thinlevy::numerics::{InversionConfig, QuadratureSpec};
use thinlevy::process::{ModelParams, TruncationScheme};
use thinlevy::ratefn::rate_spec;

use crate::LabError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileModel {
    tau: Option<f64>,
    beta_tilde: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGraph {
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTrunc {
    #[serde(rename = "N")]
    n: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMc {
    reps: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileQuad {
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInversion {
    order: Option<u32>,
}

/// The config-file schema; `model.tau = 3.5` and `[model]\ntau = 3.5`
/// spell the same key.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    model: FileModel,
    #[serde(default)]
    graph: FileGraph,
    #[serde(default)]
    trunc: FileTrunc,
    #[serde(default)]
    mc: FileMc,
    #[serde(default)]
    quad: FileQuad,
    #[serde(default)]
    inversion: FileInversion,
}

/// Values given on the command line; each mirrors one config key.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub beta_tilde: Option<f64>,
    pub lambda: Option<f64>,
    pub trunc_n: Option<u64>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub inversion_order: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tau: f64,
    pub beta_tilde: f64,
    pub lambda: f64,
    pub trunc_n: u64,
    pub reps: u64,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub inversion_order: u32,
}

pub const DEFAULT_SEED: u64 = 20_240_917;

impl Default for Settings {
    fn default() -> Self {
        let q = rate_spec();
        Self {
            tau: 3.5,
            beta_tilde: 0.0,
            lambda: 0.0,
            trunc_n: TruncationScheme::default().head_cutoff,
            reps: 10_000,
            seed: DEFAULT_SEED,
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            inversion_order: InversionConfig::default().order,
        }
    }
}

impl Settings {
    /// Defaults, overlaid by the file at `path` (if any), overlaid by flags.
    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self, LabError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_file(&text)?
            }
            None => ConfigFile::default(),
        };
        let mut s = Self::default();
        let pick = |slot: &mut f64, file: Option<f64>, flag: Option<f64>| {
            if let Some(v) = flag.or(file) {
                *slot = v;
            }
        };
        pick(&mut s.tau, file.model.tau, flags.tau);
        pick(&mut s.beta_tilde, file.model.beta_tilde, flags.beta_tilde);
        pick(&mut s.lambda, file.graph.lambda, flags.lambda);
        pick(&mut s.abs_tol, file.quad.abs_tol, flags.abs_tol);
        pick(&mut s.rel_tol, file.quad.rel_tol, flags.rel_tol);
        if let Some(v) = flags.trunc_n.or(file.trunc.n) {
            s.trunc_n = v;
        }
        if let Some(v) = flags.reps.or(file.mc.reps) {
            s.reps = v;
        }
        if let Some(v) = flags.seed.or(file.mc.seed) {
            s.seed = v;
        }
        if let Some(v) = flags.inversion_order.or(file.inversion.order) {
            s.inversion_order = v;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        ModelParams::new(self.tau, self.beta_tilde)?;
        if !self.lambda.is_finite() {
            return Err(LabError::Usage("graph.lambda must be finite".into()));
        }
        if self.trunc_n < TruncationScheme::MIN_HEAD_CUTOFF {
            return Err(LabError::Usage(format!(
                "trunc.N must be at least {}",
                TruncationScheme::MIN_HEAD_CUTOFF
            )));
        }
        if self.reps < thinlevy::mc::MIN_REPS {
            return Err(LabError::Usage(format!(
                "mc.reps must be at least {}",
                thinlevy::mc::MIN_REPS
            )));
        }
        for (key, v) in [("quad.abs_tol", self.abs_tol), ("quad.rel_tol", self.rel_tol)] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(LabError::Usage(format!("{key} must lie in (0, 1e-3), got {v}")));
            }
        }
        self.inversion().validate()?;
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.tau, self.beta_tilde).expect("validated")
    }

    pub fn scheme(&self) -> TruncationScheme {
        TruncationScheme::default().with_head_cutoff(self.trunc_n)
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            ..rate_spec()
        }
    }

    pub fn inversion(&self) -> InversionConfig {
        InversionConfig {
            order: self.inversion_order,
            ..InversionConfig::default()
        }
    }
}

fn parse_file(text: &str) -> Result<ConfigFile, LabError> {
    toml::from_str(text).map_err(|e| LabError::Usage(format!("config: {}", e.message())))
}

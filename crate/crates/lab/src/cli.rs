//! Flags and subcommands.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;
use crate::LabError;

#[derive(Debug, Parser)]
#[command(name = "thinlevy", version, about = "Thinned Lévy process laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirrored by config-file keys; a flag wins over the file.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// model.tau
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// model.beta_tilde
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta_tilde: Option<f64>,
    /// graph.lambda (also the BM drift offset)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// trunc.N, the head cutoff
    #[arg(long = "trunc-n", global = true)]
    pub trunc_n: Option<u64>,
    /// mc.reps
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// mc.seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// quad.abs_tol
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// quad.rel_tol
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// inversion.order
    #[arg(long, global = true)]
    pub inversion_order: Option<u32>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            tau: self.tau,
            beta_tilde: self.beta_tilde,
            lambda: self.lambda,
            trunc_n: self.trunc_n,
            reps: self.reps,
            seed: self.seed,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            inversion_order: self.inversion_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// P(S_u > 0)
    Su,
    /// P(H_1(0) > u)
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Naive,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    NorrosReittu,
    ChungLu,
    Grg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate-function table: p, I_E, I_V, J_V, G_V
    Ratefn {
        /// grid points on [0, 1]
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Predicted tails over a range of u
    Tail {
        /// `start:stop:step`, a comma list, or a single value
        #[arg(long)]
        u: String,
    },
    /// Monte Carlo estimate of P(S_u > 0) or P(H_1(0) > u)
    Estimate {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        u: f64,
        #[arg(long, value_enum, default_value = "tilted")]
        method: MethodArg,
        /// tilt; defaults to the optimal θ*_u
        #[arg(long)]
        theta: Option<f64>,
        /// tail-grid cells on [0, u]
        #[arg(long)]
        cells: Option<u32>,
    },
    /// Sample paths of the thinned process
    SimulateProcess {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 10)]
        paths: u64,
        /// evaluation points on [0, u]
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// sample under the tilt θ*_u instead of the original law
        #[arg(long)]
        tilted: bool,
    },
    /// Component-size ensemble of critical Norros–Reittu graphs
    SimulateGraph {
        /// graph sizes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        replicas: u64,
        #[arg(long, value_enum, default_value = "norros-reittu")]
        kernel: KernelArg,
    },
    /// Scale function W and g = κW over a range of v
    ScaleFunction {
        #[arg(long, default_value = "0.25:5:0.25")]
        v: String,
    },
    /// Longest excursion of reflected Brownian motion on a parabola
    BenchmarkBm {
        #[arg(long, default_value_t = 2.0)]
        u: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Deterministic invariant suite
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ratefn { .. } => "ratefn",
            Command::Tail { .. } => "tail",
            Command::Estimate { .. } => "estimate",
            Command::SimulateProcess { .. } => "simulate-process",
            Command::SimulateGraph { .. } => "simulate-graph",
            Command::ScaleFunction { .. } => "scale-function",
            Command::BenchmarkBm { .. } => "benchmark-bm",
            Command::Validate => "validate",
        }
    }
}

/// `a:b:step` (inclusive, `b ≥ a`), `x,y,z`, or `x`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, LabError> {
    let bad = || {
        LabError::Usage(format!(
            "cannot parse grid '{spec}': expected start:stop:step, a comma list or a number"
        ))
    };
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    let parts: Vec<&str> = spec.split(':').collect();
    let out = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a).ok_or_else(bad)?, num(b).ok_or_else(bad)?, num(step).ok_or_else(bad)?);
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(LabError::Usage(format!("grid '{spec}' has {count} points")));
            }
            (0..count).map(|k| a + k as f64 * step).collect()
        }
        [list] => list
            .split(',')
            .map(|s| num(s).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("3:8:1").unwrap(), vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(parse_grid("0.5,2").unwrap(), vec![0.5, 2.0]);
        assert_eq!(parse_grid("4").unwrap(), vec![4.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap().len(), 5);
        assert!(parse_grid("3:1:1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a").is_err());
    }
}

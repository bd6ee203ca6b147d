//! Deterministic invariant checks shared by `validate` and the acceptance
//! suite. Each check reports one line; a numerical failure inside a check
//! is a failed check, not an abort.

use serde::Serialize;
use thinlevy::endgame::EndgameConstants;
use thinlevy::numerics::{sum_ci_exp, zeta_em, QuadratureSpec, Refinement, ZetaConfig};
use thinlevy::process::ModelParams;
use thinlevy::ratefn::{i_e, i_v_small_p_constant, variance_fns, DensityModel, RateFunctionTable};

use crate::config::Settings;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>3} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Collects the sub-conditions of one criterion.
pub struct Criterion {
    id: String,
    name: String,
    notes: Vec<String>,
    failed: Vec<String>,
}

impl Criterion {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            notes: Vec::new(),
            failed: Vec::new(),
        }
    }

    /// Records `label` with its measured detail; `ok == false` fails the criterion.
    pub fn expect(&mut self, label: &str, ok: bool, detail: impl AsRef<str>) -> &mut Self {
        let note = format!("{label} {}", detail.as_ref());
        if !ok {
            self.failed.push(note.clone());
        }
        self.notes.push(note);
        self
    }

    pub fn error(&mut self, label: &str, e: impl std::fmt::Display) -> &mut Self {
        self.expect(label, false, format!("error: {e}"))
    }

    pub fn finish(self) -> Check {
        let pass = self.failed.is_empty();
        let detail = if pass {
            self.notes.join("; ")
        } else {
            format!("failed: {}", self.failed.join("; "))
        };
        Check {
            id: self.id,
            name: self.name,
            pass,
            detail,
        }
    }
}

/// Runs `body`, turning an early `Err` into a failed sub-condition.
pub fn guarded(id: &str, name: &str, body: impl FnOnce(&mut Criterion) -> thinlevy::Result<()>) -> Check {
    let mut c = Criterion::new(id, name);
    if let Err(e) = body(&mut c) {
        c.error("aborted", e);
    }
    c.finish()
}

pub fn zeta_check() -> Check {
    guarded("1", "zeta", |c| {
        let z0 = zeta_em(0.0, &ZetaConfig::default())?.value;
        c.expect("zeta(0) = -1/2", z0 == -0.5, format!("got {z0}"));
        let oracle = zeta_em(
            0.5,
            &ZetaConfig {
                truncation: 2_000_000,
                refinement: Refinement::Richardson,
            },
        )?
        .value;
        let z = zeta_em(0.5, &ZetaConfig::default())?.value;
        c.expect(
            "|zeta(1/2) - oracle| < 1e-6",
            (z - oracle).abs() < 1e-6,
            format!("{:.2e}", (z - oracle).abs()),
        );
        Ok(())
    })
}

pub fn rate_function_check(table: &RateFunctionTable) -> Check {
    guarded("2", "rate function", |c| {
        let l0 = table.lambda(0.0)?;
        c.expect("|Lambda(0)| < 1e-10", l0.abs() < 1e-10, format!("{l0:.1e}"));
        let grid: Vec<f64> = (1..=15).map(|k| 0.2 * k as f64).collect();
        let vals = grid.iter().map(|&t| table.lambda(t)).collect::<thinlevy::Result<Vec<_>>>()?;
        let convex = vals.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + 1e-12);
        c.expect("Lambda convex", convex, "on 0.2..3.0");
        c.expect(
            "theta* > 0, I > 0",
            table.theta_star > 0.0 && table.rate > 0.0,
            format!("theta* = {:.10}, I = {:.10}", table.theta_star, table.rate),
        );
        let h = 1e-4;
        let th = table.theta_star;
        let fd = (table.lambda(th + h)? - table.lambda(th - h)?) / (2.0 * h);
        let ie1 = i_e(1.0, table)?;
        c.expect("|Lambda'(theta*)| < 1e-6", fd.abs() < 1e-6, format!("{fd:.1e}"));
        c.expect("|I_E(1)| < 1e-6", ie1.abs() < 1e-6, format!("{ie1:.1e}"));
        let ie0 = i_e(0.0, table)?;
        c.expect("I_E(0) = 0", ie0 == 0.0, format!("{ie0}"));
        let interior = (1..=9)
            .map(|k| i_e(0.1 * k as f64, table))
            .collect::<thinlevy::Result<Vec<_>>>()?;
        c.expect("I_E > 0 inside", interior.iter().all(|&v| v > 0.0), "p = 0.1..0.9");
        let h = 1e-3;
        let d0 = (i_e(h, table)? - ie0) / h;
        let d1 = (ie1 - i_e(1.0 - h, table)?) / h;
        c.expect("I_E'(0) > 0", d0 > 0.0, format!("{d0:.4}"));
        c.expect("I_E'(1) < 0", d1 < 0.0, format!("{d1:.4}"));
        Ok(())
    })
}

pub fn variance_check(table: &RateFunctionTable) -> Check {
    guarded("3", "variance identity", |c| {
        let full = variance_fns(1.0, table)?;
        let mut worst = 0.0f64;
        for k in 1..=9 {
            let v = variance_fns(0.1 * k as f64, table)?;
            worst = worst.max((v.i_v + v.j_v - 2.0 * v.g_v - full.i_v).abs());
        }
        c.expect("identity within 1e-8", worst < 1e-8, format!("max gap {worst:.1e}"));
        let iv0 = variance_fns(0.0, table)?.i_v;
        c.expect("I_V(0) = 0", iv0.abs() < 1e-8, format!("{iv0:.1e}"));
        c.expect("J_V(1) = 0", full.j_v.abs() < 1e-8, format!("{:.1e}", full.j_v));
        let p = 1e-3;
        let tau = table.params.tau();
        let ratio = variance_fns(p, table)?.i_v / p.powf(tau - 3.0) / i_v_small_p_constant(&table.params);
        c.expect(
            "small-p constant within 5%",
            (ratio - 1.0).abs() < 0.05,
            format!("ratio {ratio:.4}"),
        );
        Ok(())
    })
}

pub fn sum_integral_check(params: &ModelParams) -> Check {
    guarded("4", "sum vs integral", |c| {
        let u = 50.0;
        let s = sum_ci_exp(3.0, 1.0, u, params.tau())?;
        let ratio = s.sum / (s.scaling_constant * u.powf(params.tau() - 4.0));
        c.expect(
            "ratio in [0.95, 1.05] at u = 50",
            (0.95..=1.05).contains(&ratio),
            format!("{ratio:.5}"),
        );
        Ok(())
    })
}

/// The deterministic half of the end-game criterion.
pub fn endgame_shape_check(constants: &EndgameConstants) -> Check {
    guarded("8a", "end-game shape", |c| {
        let psi0 = constants.psi(0.0)?;
        c.expect("psi(0) = 0", psi0 == 0.0, format!("{psi0}"));
        // ψ lives on a ≥ 0: one-sided second-order difference
        let h = 1e-4;
        let slope = (4.0 * constants.psi(h)? - constants.psi(2.0 * h)? - 3.0 * psi0) / (2.0 * h);
        c.expect(
            "|psi'(0) - kappa| < 1e-6",
            (slope - constants.kappa).abs() < 1e-6,
            format!("{:.1e} (kappa = {:.10})", (slope - constants.kappa).abs(), constants.kappa),
        );
        let ws = (1..=40)
            .map(|k| constants.g_scale(0.125 * k as f64).map(|s| s.w))
            .collect::<thinlevy::Result<Vec<_>>>()?;
        c.expect("W increasing", ws.windows(2).all(|w| w[1] > w[0]), "on 0.125..5");
        c.expect(
            "0 < A < D",
            constants.a > 0.0 && constants.a < constants.d,
            format!("A = {:.6}, D = {:.6}", constants.a, constants.d),
        );
        Ok(())
    })
}

/// Rate-function table and end-game constants under `settings`.
pub fn solve(settings: &Settings) -> thinlevy::Result<(RateFunctionTable, EndgameConstants)> {
    solve_with(&settings.params(), &settings.quad(), &settings.inversion())
}

pub fn solve_with(
    params: &ModelParams,
    quad: &QuadratureSpec,
    inversion: &thinlevy::numerics::InversionConfig,
) -> thinlevy::Result<(RateFunctionTable, EndgameConstants)> {
    let table = RateFunctionTable::solve_with(params, quad, &ZetaConfig::default())?;
    let b = DensityModel::new(&table)?.b;
    let constants = EndgameConstants::with_parts(params, table.theta_star, b, quad, inversion)?;
    Ok((table, constants))
}

/// Everything that needs no sampling.
pub fn invariant_suite(settings: &Settings) -> Vec<Check> {
    let mut out = vec![zeta_check()];
    match solve(settings) {
        Ok((table, constants)) => {
            out.push(rate_function_check(&table));
            out.push(variance_check(&table));
            out.push(sum_integral_check(&table.params));
            out.push(endgame_shape_check(&constants));
        }
        Err(e) => {
            let mut c = Criterion::new("2", "rate function");
            c.error("solve", e);
            out.push(c.finish());
        }
    }
    out
}

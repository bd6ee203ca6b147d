//! One function per subcommand; each writes its artifacts through a [`Run`].

use serde::Serialize;
use thinlevy::graphsim::{scaling_ensemble_with, Kernel};
use thinlevy::mc::{bm_pittel_benchmark, estimate_tails, ISNormalizer, McConfig, Method};
use thinlevy::numerics::ZetaConfig;
use thinlevy::process::{ClockSample, Measure, TruncatedModel};
use thinlevy::ratefn::{i_e, variance_fns, DensityModel, RateFunctionTable};

use crate::cli::{parse_grid, Cli, Command, KernelArg, MethodArg, Target};
use crate::config::Settings;
use crate::output::{Run, Table};
use crate::suite;
use crate::LabError;

/// Largest `u` at which naive estimation is accepted.
pub const NAIVE_MAX_U: f64 = 3.0;

pub fn run(cli: &Cli) -> Result<(), LabError> {
    let settings = Settings::load(cli.global.config.as_deref(), &cli.global.overrides())?;
    let name = cli.command.name();
    let mut out = Run::start(name)?;
    let result = dispatch(&cli.command, &settings, &mut out);
    // a failed validation still leaves its report behind
    if result.is_ok() || name == "validate" {
        out.finish(&settings)?;
    }
    result.map_err(|e| match e {
        LabError::Numerical(m) => LabError::Numerical(format!(
            "{name}: {m} (quad abs_tol {:e}, rel_tol {:e}, trunc.N {})",
            settings.abs_tol, settings.rel_tol, settings.trunc_n
        )),
        other => other,
    })
}

fn dispatch(cmd: &Command, s: &Settings, out: &mut Run) -> Result<(), LabError> {
    match cmd {
        Command::Ratefn { points } => ratefn(s, *points, out),
        Command::Tail { u } => tail(s, &parse_grid(u)?, out),
        Command::Estimate {
            target,
            u,
            method,
            theta,
            cells,
        } => estimate(s, *target, *u, *method, *theta, *cells, out),
        Command::SimulateProcess {
            u,
            paths,
            points,
            tilted,
        } => simulate_process(s, *u, *paths, *points, *tilted, out),
        Command::SimulateGraph { n, replicas, kernel } => simulate_graph(s, n, *replicas, *kernel, out),
        Command::ScaleFunction { v } => scale_function(s, &parse_grid(v)?, out),
        Command::BenchmarkBm { u, dt } => benchmark_bm(s, *u, *dt, out),
        Command::Validate => validate(s, out),
    }
}

fn table(s: &Settings) -> Result<RateFunctionTable, LabError> {
    Ok(RateFunctionTable::solve_with(&s.params(), &s.quad(), &ZetaConfig::default())?)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), LabError> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?
    );
    Ok(())
}

#[derive(Serialize)]
struct RateHeader {
    tau: f64,
    beta_tilde: f64,
    theta_star: f64,
    #[serde(rename = "I")]
    rate: f64,
    zeta_alpha: f64,
    zeta_2alpha: f64,
    #[serde(rename = "B")]
    b: f64,
}

fn ratefn(s: &Settings, points: usize, out: &mut Run) -> Result<(), LabError> {
    if points < 2 {
        return Err(LabError::Usage("--points must be at least 2".into()));
    }
    let t = table(s)?;
    let header = RateHeader {
        tau: s.tau,
        beta_tilde: s.beta_tilde,
        theta_star: t.theta_star,
        rate: t.rate,
        zeta_alpha: t.zeta_alpha,
        zeta_2alpha: t.zeta_2alpha,
        b: DensityModel::new(&t)?.b,
    };
    let mut rows = Table::new(&["p", "I_E", "I_V", "J_V", "G_V"]);
    for k in 0..points {
        let p = k as f64 / (points - 1) as f64;
        let v = variance_fns(p, &t)?;
        rows.push(vec![p.into(), i_e(p, &t)?.into(), v.i_v.into(), v.j_v.into(), v.g_v.into()]);
    }
    out.csv("ratefn.csv", &rows)?;
    out.json("ratefn.json", &header)?;
    print_json(&header)
}

fn tail(s: &Settings, us: &[f64], out: &mut Run) -> Result<(), LabError> {
    if us.iter().any(|&u| !(u > 0.0)) {
        return Err(LabError::Usage("every u must be positive".into()));
    }
    let (t, c) = suite::solve(s)?;
    let mut rows = Table::new(&["u", "log_phi", "p_su_pred", "p_h1_pred"]);
    for &u in us {
        let p = c.predict_tails(u, &t)?;
        rows.push(vec![u.into(), p.log_phi.into(), p.p_su.into(), p.p_h1.into()]);
    }
    let path = out.csv("tail.csv", &rows)?;
    println!("{} rows -> {}", rows.rows.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct EstimateParams {
    tau: f64,
    beta_tilde: f64,
    target: &'static str,
    u: f64,
    method: &'static str,
    theta: Option<f64>,
    reps: u64,
    seed: u64,
    trunc_n: u64,
    cells: usize,
}

#[derive(Serialize)]
struct EstimateReport {
    estimate: f64,
    se: f64,
    ess: f64,
    log_normalizer: Option<f64>,
    /// `ln φ_trunc(u) - log_phi(u)`
    normalizer_gap: Option<f64>,
    params: EstimateParams,
}

const ESTIMATE_HEADER: [&str; 13] = [
    "target",
    "u",
    "method",
    "theta",
    "reps",
    "seed",
    "trunc_n",
    "cells",
    "estimate",
    "se",
    "ess",
    "log_normalizer",
    "normalizer_gap",
];

fn estimate(
    s: &Settings,
    target: Target,
    u: f64,
    method: MethodArg,
    theta: Option<f64>,
    cells: Option<u32>,
    out: &mut Run,
) -> Result<(), LabError> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(LabError::Usage("--u must be positive".into()));
    }
    let mut scheme = s.scheme();
    if let Some(c) = cells {
        scheme = scheme.with_cells(c);
    }
    let (method, gap) = match method {
        MethodArg::Naive => {
            if u > NAIVE_MAX_U {
                return Err(LabError::Usage(format!(
                    "naive estimation is refused for u > {NAIVE_MAX_U}: the event has probability far below 1/reps \
                     at any affordable replica count; use --method tilted"
                )));
            }
            if theta.is_some() {
                return Err(LabError::Usage("--theta applies to the tilted method only".into()));
            }
            (Method::Naive, None)
        }
        MethodArg::Tilted => {
            let t = table(s)?;
            let theta = match theta {
                Some(th) => th,
                None => t.theta_star_u(u)?,
            };
            let gap = ISNormalizer::new(&s.params(), u, &scheme, theta)?.gap(&t)?;
            (Method::Tilted { theta }, Some(gap))
        }
    };
    let cfg = McConfig::new(s.params(), s.reps, s.seed).with_scheme(scheme);
    let both = estimate_tails(u, method, &cfg)?;
    let (name, e) = match target {
        Target::Su => ("su", both.su_positive),
        Target::H1 => ("h1", both.h1_tail),
    };
    let theta = match method {
        Method::Tilted { theta } => Some(theta),
        Method::Naive => None,
    };
    let report = EstimateReport {
        estimate: e.value,
        se: e.std_error,
        ess: e.effective_sample_size,
        log_normalizer: e.log_normalizer,
        normalizer_gap: gap,
        params: EstimateParams {
            tau: s.tau,
            beta_tilde: s.beta_tilde,
            target: name,
            u,
            method: if theta.is_some() { "tilted" } else { "naive" },
            theta,
            reps: s.reps,
            seed: s.seed,
            trunc_n: s.trunc_n,
            cells: scheme.cells(u),
        },
    };
    let opt = |x: Option<f64>| x.map_or_else(|| "".into(), |v| format!("{v:.16e}").into());
    out.json("estimate.json", &report)?;
    out.append_csv(
        "estimates.csv",
        &ESTIMATE_HEADER,
        vec![
            name.into(),
            u.into(),
            report.params.method.into(),
            opt(theta),
            s.reps.into(),
            s.seed.into(),
            s.trunc_n.into(),
            report.params.cells.into(),
            e.value.into(),
            e.std_error.into(),
            e.effective_sample_size.into(),
            opt(e.log_normalizer),
            opt(gap),
        ],
    )?;
    print_json(&report)
}

fn simulate_process(s: &Settings, u: f64, paths: u64, points: usize, tilted: bool, out: &mut Run) -> Result<(), LabError> {
    if !(u > 0.0) || !u.is_finite() || points < 2 || paths == 0 {
        return Err(LabError::Usage("need u > 0, --points >= 2 and --paths >= 1".into()));
    }
    let measure = if tilted {
        Measure::Tilted {
            theta: table(s)?.theta_star_u(u)?,
        }
    } else {
        Measure::Original
    };
    let model = TruncatedModel::new(&s.params(), u, &s.scheme(), measure)?;
    let mut values = Table::new(&["replica", "t", "value", "head_part", "tail_mean_part", "tail_noise_part"]);
    let mut summary = Table::new(&["replica", "s_u", "first_hit", "head_jumps"]);
    for r in 0..paths {
        let sample = ClockSample::draw(&model, s.seed, r);
        for k in 0..points {
            let t = if k + 1 == points {
                u
            } else {
                u * k as f64 / (points - 1) as f64
            };
            let v = sample.eval_path(t)?;
            values.push(vec![
                r.into(),
                t.into(),
                v.value.into(),
                v.head_part.into(),
                v.tail_mean_part.into(),
                v.tail_noise_part.into(),
            ]);
        }
        let hit = sample.first_hit().map_or_else(|| "".into(), |h| format!("{h:.16e}").into());
        summary.push(vec![
            r.into(),
            sample.eval_path(u)?.value.into(),
            hit,
            sample.head_times().len().into(),
        ]);
    }
    out.csv("process_paths.csv", &values)?;
    let path = out.csv("process_summary.csv", &summary)?;
    println!("{paths} paths -> {}", path.display());
    Ok(())
}

fn simulate_graph(s: &Settings, ns: &[usize], replicas: u64, kernel: KernelArg, out: &mut Run) -> Result<(), LabError> {
    if replicas == 0 {
        return Err(LabError::Usage("--replicas must be positive".into()));
    }
    let kernel = match kernel {
        KernelArg::NorrosReittu => Kernel::NorrosReittu,
        KernelArg::ChungLu => Kernel::ChungLu,
        KernelArg::Grg => Kernel::GeneralizedRandomGraph,
    };
    let e = scaling_ensemble_with(s.tau, s.lambda, ns, replicas, s.seed, kernel)?;
    let rho = e.rho();
    let mut rows = Table::new(&[
        "n",
        "replica",
        "c1_ordered",
        "c2_ordered",
        "c_vertex1",
        "edges",
        "nu_n",
        "c1_rescaled",
        "c_vertex1_rescaled",
    ]);
    for r in &e.records {
        let scale = (r.n as f64).powf(-rho);
        rows.push(vec![
            r.n.into(),
            r.replica.into(),
            r.c1_ordered.into(),
            r.c2_ordered.into(),
            r.c_vertex1.into(),
            r.m.into(),
            r.nu_n.into(),
            (r.c1_ordered as f64 * scale).into(),
            (r.c_vertex1 as f64 * scale).into(),
        ]);
    }
    let path = out.csv("graph.csv", &rows)?;
    println!("{} graphs -> {}", e.records.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct EndgameReport {
    theta_star: f64,
    kappa: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "D")]
    d: f64,
    psi_at_theta: f64,
}

fn scale_function(s: &Settings, vs: &[f64], out: &mut Run) -> Result<(), LabError> {
    if vs.iter().any(|&v| !(v >= 0.0)) {
        return Err(LabError::Usage("every v must be nonnegative".into()));
    }
    let (_, c) = suite::solve(s)?;
    let mut rows = Table::new(&["v", "W", "g", "disagreement"]);
    for &v in vs {
        let p = c.g_scale(v)?;
        rows.push(vec![v.into(), p.w.into(), p.g.into(), p.disagreement.into()]);
    }
    out.csv("scale.csv", &rows)?;
    let report = EndgameReport {
        theta_star: c.theta_star,
        kappa: c.kappa,
        a: c.a,
        b: c.b,
        d: c.d,
        psi_at_theta: c.psi_at_theta,
    };
    out.json("endgame.json", &report)?;
    print_json(&report)
}

fn benchmark_bm(s: &Settings, u: f64, dt: f64, out: &mut Run) -> Result<(), LabError> {
    let b = bm_pittel_benchmark(s.lambda, u, s.reps, dt, s.seed)?;
    let mut rows = Table::new(&[
        "lambda",
        "u",
        "dt",
        "reps",
        "p_gamma",
        "se_gamma",
        "p_w_positive",
        "se_w_positive",
        "pittel",
        "ratio",
        "theta_star",
        "phi",
        "inclusion_exceptions",
    ]);
    rows.push(vec![
        b.lambda.into(),
        b.u.into(),
        b.dt.into(),
        s.reps.into(),
        b.p_gamma.value.into(),
        b.p_gamma.std_error.into(),
        b.p_w_positive.value.into(),
        b.p_w_positive.std_error.into(),
        b.pittel.into(),
        (b.p_gamma.value / b.pittel).into(),
        b.theta_star.into(),
        b.phi.into(),
        b.inclusion_exceptions.into(),
    ]);
    out.csv("bm.csv", &rows)?;
    out.json("bm.json", &b)?;
    print_json(&b)
}

fn validate(s: &Settings, out: &mut Run) -> Result<(), LabError> {
    let checks = suite::invariant_suite(s);
    let mut rows = Table::new(&["id", "name", "pass", "detail"]);
    for c in &checks {
        println!("{}", c.line());
        rows.push(vec![
            c.id.clone().into(),
            c.name.clone().into(),
            c.pass.into(),
            c.detail.clone().into(),
        ]);
    }
    out.csv("validate.csv", &rows)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(LabError::Numerical(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join(", ")
        )))
    }
}

use std::path::{Path, PathBuf};

use frac_talenti::kernels;
use frac_talenti::quadrature::sphere_rule;
use frac_talenti::solver::{default_profile_grid, radial_boundary_value, shell_midpoints, DEFAULT_PROFILE_POINTS};
use frac_talenti::sources::{lp_norm, schwarz};
use frac_talenti::talenti::{self, VerifyOptions, CROSSING_GRID, DEFAULT_REL_TOL};
use frac_talenti::{BumpSource, ProblemParams, RadialProfile, SolutionHandle, SourceFunction, VerificationReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Validator;
use crate::output::{emit_json, emit_text, envelope, markdown_summary, Table};
use crate::random::{case_rng, random_nonsymmetric_profile, random_point, random_profile};
use crate::{CliError, Command, KernelKind, RunConfig, SweepClaim, VerifyClaim, THREADS_ENV};

/// Quadrature tolerance for single runs.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
/// Quadrature tolerance inside sweeps.
pub const SWEEP_QUAD_TOL: f64 = 1e-6;
/// Relative tolerance of `calibrate`.
pub const CALIBRATION_REL_TOL: f64 = 1e-6;
/// Quadrature tolerance of `calibrate`.
pub const CALIBRATION_QUAD_TOL: f64 = 1e-10;

/// Result of one command before it is written out.
struct Outcome {
    claim: Option<String>,
    reports: Vec<VerificationReport>,
    data: Value,
    table: Option<Table>,
    /// Whether the exit code reflects the verdicts in `reports`.
    judged: bool,
}

impl Outcome {
    fn data(data: Value) -> Self {
        Self {
            claim: None,
            reports: Vec::new(),
            data,
            table: None,
            judged: false,
        }
    }

    fn verdicts(claim: &str, reports: Vec<VerificationReport>) -> Self {
        let table = Some(Table::from_reports(&reports));
        Self {
            claim: Some(claim.to_string()),
            reports,
            data: Value::Null,
            table,
            judged: true,
        }
    }

    fn with_data(mut self, data: Value) -> Self {
        self.data = data;
        self
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

pub(crate) fn execute(command: Command) -> Result<i32, CliError> {
    let (name, flags, task) = match command {
        Command::Report { inputs, out } => return report(&inputs, out.as_deref()),
        Command::Kernel { kind, config } => ("kernel", config, Task::Kernel(kind)),
        Command::Solve { config } => ("solve", config, Task::Solve),
        Command::Trace { config } => ("trace", config, Task::Trace),
        Command::Symmetrize { config } => ("symmetrize", config, Task::Symmetrize),
        Command::Verify { claim, config } => ("verify", config, Task::Verify(claim)),
        Command::Sweep { claim, config } => ("sweep", config, Task::Sweep(claim)),
        Command::Calibrate { config } => ("calibrate", config, Task::Calibrate),
    };
    let cfg = RunConfig::load(&flags)?;
    let out = match task {
        Task::Kernel(kind) => kernel(&cfg, kind)?,
        Task::Solve => solve(&cfg)?,
        Task::Trace => trace(&cfg)?,
        Task::Symmetrize => symmetrize(&cfg)?,
        Task::Verify(claim) => verify(&cfg, claim)?,
        Task::Sweep(claim) => sweep(&cfg, claim)?,
        Task::Calibrate => calibrate(&cfg)?,
    };
    let json = envelope(name, out.claim.as_deref(), &cfg, &out.reports, out.data);
    emit_json(&json, cfg.out.as_deref())?;
    if let (Some(path), Some(table)) = (&cfg.csv, &out.table) {
        table.write(path)?;
    }
    let failed = out.reports.is_empty() || out.reports.iter().any(|r| !r.pass);
    Ok(if out.judged && failed { 1 } else { 0 })
}

enum Task {
    Kernel(KernelKind),
    Solve,
    Trace,
    Symmetrize,
    Verify(VerifyClaim),
    Sweep(SweepClaim),
    Calibrate,
}

fn kernel(cfg: &RunConfig, kind: KernelKind) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let data = match kind {
        KernelKind::Green | KernelKind::Martin | KernelKind::MartinLimit => {
            let params = v.params(cfg);
            let first = if kind == KernelKind::Green {
                v.point("x", &cfg.x, cfg.dim)
            } else {
                v.point("theta", &cfg.theta, cfg.dim)
            };
            let y = v.point("y", &cfg.y, cfg.dim);
            let k_max = v.count("k-max", cfg.k_max, 20, 1, 60);
            v.finish()?;
            let (p, a, y) = (params.unwrap(), first.unwrap(), y.unwrap());
            match kind {
                KernelKind::Green => json!({ "kind": "green", "value": kernels::green(&p, &a, &y)? }),
                KernelKind::Martin => json!({ "kind": "martin", "value": kernels::martin(&p, &y, &a)? }),
                _ => {
                    let limit = kernels::martin_from_green_limit(&p, &y, &a, k_max)?;
                    let green_scale = p.with_normalization(frac_talenti::Normalization::GreenLimit);
                    let closed = kernels::martin(&green_scale, &y, &a)?;
                    json!({
                        "kind": "martin-limit",
                        "k_max": k_max,
                        "value": limit,
                        "closed_form_green_limit": closed,
                        "relative_difference": (limit - closed) / closed,
                    })
                }
            }
        }
        KernelKind::Poisson => {
            let dim = v.dim(cfg);
            let x = v.point("x", &cfg.x, cfg.dim);
            let theta = v.point("theta", &cfg.theta, cfg.dim);
            v.finish()?;
            json!({ "kind": "poisson", "value": kernels::poisson(&x.unwrap(), &theta.unwrap(), dim.unwrap())? })
        }
        KernelKind::TMoment => {
            let dim = v.dim(cfg);
            let xi = v.point("xi", &cfg.xi, cfg.dim);
            if cfg.tau.is_none() {
                v.error("--tau is required");
            }
            let tau = v.positive("tau", cfg.tau, 1.0);
            v.finish()?;
            json!({ "kind": "t-moment", "tau": tau, "value": kernels::t_moment(dim.unwrap(), tau, &xi.unwrap())? })
        }
    };
    Ok(Outcome::data(data))
}

fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let params = v.params(cfg);
    let source = v.source(cfg);
    let tol = v.positive("quad-tol", cfg.quad_tol, DEFAULT_QUAD_TOL);
    let grid = v.count("grid", cfg.grid, DEFAULT_PROFILE_POINTS, 2, 1 << 16);
    let x = match &cfg.x {
        Some(_) => v.point("x", &cfg.x, cfg.dim),
        None => {
            if matches!(source, Some(SourceFunction::Bump(_))) {
                v.error("--x is required for bump sources");
            }
            None
        }
    };
    v.finish()?;
    let handle = SolutionHandle::new(params.unwrap(), source.unwrap())?;
    if let Some(x) = x {
        let u = handle.solve_at(&x, tol)?;
        return Ok(Outcome::data(json!({ "x": x, "u": u, "quad_tol": tol })));
    }
    let mids = shell_midpoints(&default_profile_grid(grid));
    let u = handle.radial_solution_profile(&mids, tol)?;
    let mut table = Table::new(&["r", "u"]);
    for (r, val) in mids.iter().zip(&u) {
        table.push(vec![r.to_string(), val.to_string()]);
    }
    Ok(Outcome::data(json!({ "r": mids, "u": u, "quad_tol": tol })).with_table(table))
}

fn trace(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let params = v.params(cfg);
    let source = v.source(cfg);
    let tol = v.positive("quad-tol", cfg.quad_tol, DEFAULT_QUAD_TOL);
    v.finish()?;
    let params = params.unwrap();
    let order = cfg
        .order
        .unwrap_or_else(|| VerifyOptions::default().sphere_order_for(params.dim));
    let rule = sphere_rule(params.dim, order)?;
    let handle = SolutionHandle::new(params, source.unwrap())?;
    let tr = handle.boundary_trace(&rule, tol)?;
    let mut header = vec!["node".to_string()];
    header.extend((1..=params.dim).map(|i| format!("theta_{i}")));
    header.extend(["weight".to_string(), "value".to_string()]);
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for (i, (node, (w, val))) in rule.nodes().zip(rule.weights().iter().zip(tr.values())).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(node.iter().map(f64::to_string));
        row.extend([w.to_string(), val.to_string()]);
        table.push(row);
    }
    let data = json!({
        "sphere_order": order,
        "nodes": rule.len(),
        "quad_tol": tol,
        "values": tr.values(),
        "min": tr.min(),
        "max": tr.max(),
        "mean": tr.mean(),
        "harmonic_mean": tr.harmonic_mean(params.s).ok(),
    });
    Ok(Outcome::data(data).with_table(table))
}

fn symmetrize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let dim = v.dim(cfg);
    let params = cfg.s.is_some().then(|| v.params(cfg)).flatten();
    let source = v.source(cfg);
    let tol = v.positive("quad-tol", cfg.quad_tol, DEFAULT_QUAD_TOL);
    v.finish()?;
    let (dim, source) = (dim.unwrap(), source.unwrap());
    let star = schwarz(&source, dim);
    let star_src: SourceFunction = star.clone().into();
    let mut data = json!({
        "symmetrization": star.to_spec_string(),
        "sup": [source.sup(), star.sup()],
        "l1": [lp_norm(&source, 1.0, dim), lp_norm(&star_src, 1.0, dim)],
        "l2": [lp_norm(&source, 2.0, dim), lp_norm(&star_src, 2.0, dim)],
    });
    if let Some(p) = params {
        data["boundary_value_symmetrized_source"] = json!(radial_boundary_value(&p, &star)?);
        match &source {
            SourceFunction::Radial(f) => {
                data["boundary_value_source"] = json!(radial_boundary_value(&p, f)?);
            }
            SourceFunction::Bump(_) => {
                if let Some(order) = cfg.order {
                    let rule = sphere_rule(dim, order)?;
                    let h = SolutionHandle::new(p, source.clone())?;
                    data["rearranged_boundary_trace"] = json!(h.symmetrized_boundary_value(&rule, tol)?);
                }
            }
        }
    }
    let mut table = Table::new(&["r", "value"]);
    for (_, b, val) in star.pieces() {
        table.push(vec![b.to_string(), val.to_string()]);
    }
    Ok(Outcome::data(data).with_table(table))
}

fn verify_options(v: &mut Validator, cfg: &RunConfig, quad_default: f64) -> VerifyOptions {
    VerifyOptions {
        rel_tol: v.positive("tol", cfg.tol, DEFAULT_REL_TOL),
        quad_tol: v.positive("quad-tol", cfg.quad_tol, quad_default),
        sphere_order: cfg.order.inspect(|&o| v.check(o >= 1, "order must be at least 1")),
        grid_points: v.count("grid", cfg.grid, CROSSING_GRID, 2, 1 << 16),
    }
}

/// The given profile, or `--random` seeded draws.
fn profiles(v: &mut Validator, cfg: &RunConfig, nonsymmetric: bool) -> Vec<RadialProfile> {
    match cfg.random {
        Some(k) => {
            let seed = cfg.seed.unwrap_or(0);
            (0..k as u64)
                .map(|i| {
                    let mut rng = case_rng(seed, i);
                    if nonsymmetric {
                        random_nonsymmetric_profile(&mut rng)
                    } else {
                        random_profile(&mut rng)
                    }
                })
                .collect()
        }
        None => v.profile(cfg).into_iter().collect(),
    }
}

/// Largest ρ of the form `0.01 (1 - |ξ|) 2^{-j}` meeting the higher-order
/// radius condition.
fn higher_order_rho(dim: usize, s: f64, xi: &[f64]) -> Result<f64, CliError> {
    let a = frac_talenti::geometry::norm(xi);
    let mut rho = 0.01 * (1.0 - a).min(a);
    for _ in 0..40 {
        if talenti::check_higher_order_condition(dim, s, xi, rho)? {
            return Ok(rho);
        }
        rho *= 0.5;
    }
    Err(CliError::Config(vec![format!(
        "no admissible radius found for |ξ| = {a}"
    )]))
}

fn verify(cfg: &RunConfig, claim: VerifyClaim) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let params = v.params(cfg);
    let opts = verify_options(&mut v, cfg, DEFAULT_QUAD_TOL);
    let seed = cfg.seed.unwrap_or(0);
    let label = claim_label(claim);
    match claim {
        VerifyClaim::Thm1 | VerifyClaim::SGt1 | VerifyClaim::Classical | VerifyClaim::Crossing | VerifyClaim::Mass => {
            let nonsym = matches!(claim, VerifyClaim::Crossing | VerifyClaim::Mass);
            let fs = profiles(&mut v, cfg, nonsym);
            let radii = cfg
                .radii
                .clone()
                .unwrap_or_else(|| (1..=20).map(|i| i as f64 / 20.0).collect());
            v.finish()?;
            let p = params.unwrap();
            let reports = fs
                .iter()
                .map(|f| match claim {
                    VerifyClaim::Thm1 => talenti::verify_reverse_boundary_talenti(&p, f),
                    VerifyClaim::SGt1 => talenti::verify_s_gt1(&p, f),
                    VerifyClaim::Classical => talenti::verify_classical_equality(&p, f),
                    VerifyClaim::Crossing => talenti::verify_crossing(&p, f, opts.grid_points),
                    _ => talenti::verify_mass_concentration_with(&p, f, &radii, &opts),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome::verdicts(label, reports))
        }
        VerifyClaim::Thm2 | VerifyClaim::HigherOrder => {
            let bumps: Vec<Option<BumpSource>> = match cfg.random {
                Some(k) => {
                    v.finish()?;
                    let p = params.unwrap();
                    (0..k as u64)
                        .map(|i| {
                            let xi = random_point(&mut case_rng(seed, i), p.dim, 0.2, 0.8);
                            let rho = if claim == VerifyClaim::Thm2 {
                                0.9 * talenti::max_admissible_rho(p.dim, p.s, &xi)?
                            } else {
                                higher_order_rho(p.dim, p.s, &xi)?
                            };
                            Ok(Some(BumpSource::new(xi, rho, cfg.height.unwrap_or(1.0))?))
                        })
                        .collect::<Result<_, CliError>>()?
                }
                None => {
                    let b = v.bump(cfg);
                    v.finish()?;
                    vec![b]
                }
            };
            let p = params.unwrap();
            let reports = bumps
                .into_iter()
                .flatten()
                .map(|b| match claim {
                    VerifyClaim::Thm2 => talenti::verify_bump_boundary_talenti_with(&p, &b, &opts),
                    _ => talenti::verify_higher_order_bump_with(&p, &b, &opts),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome::verdicts(label, reports))
        }
        VerifyClaim::Green => {
            let points: Vec<Vec<f64>> = match cfg.random {
                Some(k) => {
                    let dim = cfg.dim.unwrap_or(1);
                    (0..k as u64)
                        .map(|i| random_point(&mut case_rng(seed, i), dim, 0.05, 0.95))
                        .collect()
                }
                None => v.point("xi", &cfg.xi, cfg.dim).into_iter().collect(),
            };
            v.finish()?;
            let p = params.unwrap();
            let reports = points
                .iter()
                .map(|xi| talenti::verify_green_boundary_talenti(&p, xi))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome::verdicts(label, reports))
        }
        VerifyClaim::Sharpness => {
            let eps = cfg
                .epsilons
                .clone()
                .unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05, 0.025, 0.0125]);
            v.finish()?;
            let p = params.unwrap();
            let rows = talenti::sharpness_sweep(&p, &eps)?;
            let report = talenti::sharpness_report(&p, &rows);
            let mut table = Table::new(&["epsilon", "value", "limit", "excess", "excess_over_eps2", "above_limit"]);
            for r in &rows {
                table.push(vec![
                    r.epsilon.to_string(),
                    r.value.to_string(),
                    r.limit.to_string(),
                    r.excess.to_string(),
                    r.excess_over_eps2.to_string(),
                    r.above_limit.to_string(),
                ]);
            }
            Ok(Outcome::verdicts(label, vec![report])
                .with_data(json!({ "rows": rows }))
                .with_table(table))
        }
    }
}

fn claim_label(claim: VerifyClaim) -> &'static str {
    match claim {
        VerifyClaim::Thm1 => "thm1",
        VerifyClaim::Crossing => "crossing",
        VerifyClaim::Thm2 => "thm2",
        VerifyClaim::Green => "green",
        VerifyClaim::SGt1 => "s-gt1",
        VerifyClaim::HigherOrder => "higher-order",
        VerifyClaim::Mass => "mass",
        VerifyClaim::Classical => "classical",
        VerifyClaim::Sharpness => "sharpness",
    }
}

/// Pool size: the environment variable, then `--threads`, then the number
/// of available cores.
pub fn pool_size(configured: Option<usize>) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(configured.filter(|&n| n > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

struct SweepPoint {
    index: u64,
    params: ProblemParams,
}

fn sweep(cfg: &RunConfig, claim: SweepClaim) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let conv = v.conventions(cfg);
    let opts = verify_options(&mut v, cfg, SWEEP_QUAD_TOL);
    let (default_n, default_s, default_k): (&[usize], &[f64], usize) = match claim {
        SweepClaim::Thm1 => (&[1, 3], &[0.25, 0.5, 0.75], 20),
        SweepClaim::SGt1 => (&[3], &[1.5, 2.5], 20),
        SweepClaim::Classical => (&[1, 3], &[1.0], 20),
        SweepClaim::Green => (&[1, 2, 3], &[0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0], 5),
        SweepClaim::Thm2 => (&[1, 2], &[0.25, 0.5, 0.75], 3),
        SweepClaim::Explore => (&[1, 2, 3], &[1.5, 2.5, 3.5], 3),
    };
    let n_values = cfg.n_values.clone().unwrap_or_else(|| default_n.to_vec());
    let s_values = cfg.s_values.clone().unwrap_or_else(|| default_s.to_vec());
    let k = cfg.random.unwrap_or(default_k);
    for &n in &n_values {
        v.check((1..=3).contains(&n), format!("N-values: N = {n} is not supported"));
    }
    for &s in &s_values {
        v.check(s.is_finite() && s > 0.0, format!("s-values: s = {s} must be positive"));
    }
    v.check(k >= 1, "random must be at least 1");
    let threads = pool_size(cfg.threads);
    v.finish()?;
    let (normalization, log_branch) = conv.unwrap();
    let seed = cfg.seed.unwrap_or(0);

    let mut points = Vec::new();
    for &n in &n_values {
        for &s in &s_values {
            let applies = match claim {
                SweepClaim::Thm1 | SweepClaim::Thm2 => s < 1.0,
                SweepClaim::SGt1 => s > 1.0,
                SweepClaim::Classical => s == 1.0,
                SweepClaim::Green => s <= n as f64,
                SweepClaim::Explore => true,
            };
            if !applies {
                continue;
            }
            let params = ProblemParams::new(n, s)?
                .with_normalization(normalization)
                .with_log_branch(log_branch);
            for _ in 0..k {
                let index = points.len() as u64;
                points.push(SweepPoint { index, params });
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Config(vec!["the sweep grid is empty for this claim".into()]));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Output(e.to_string()))?;
    let reports = pool.install(|| {
        points
            .par_iter()
            .map(|pt| sweep_point(claim, pt, seed, &opts))
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let label = match claim {
        SweepClaim::Thm1 => "thm1",
        SweepClaim::SGt1 => "s-gt1",
        SweepClaim::Classical => "classical",
        SweepClaim::Green => "green",
        SweepClaim::Thm2 => "thm2",
        SweepClaim::Explore => "explore",
    };
    let mut out = Outcome::verdicts(label, reports);
    out.data = json!({ "points": points.len(), "cases_per_point": k, "seed": seed });
    if claim == SweepClaim::Explore {
        let positive = out.reports.iter().filter(|r| r.signed_gap > 0.0).count();
        out.data["signed_gap_positive"] = json!(positive);
        out.data["signed_gap_nonpositive"] = json!(out.reports.len() - positive);
        out.judged = false;
    }
    Ok(out)
}

fn sweep_point(
    claim: SweepClaim,
    pt: &SweepPoint,
    seed: u64,
    opts: &VerifyOptions,
) -> Result<VerificationReport, CliError> {
    let p = &pt.params;
    let mut rng = case_rng(seed, pt.index);
    let report = match claim {
        SweepClaim::Thm1 => talenti::verify_reverse_boundary_talenti(p, &random_profile(&mut rng))?,
        SweepClaim::SGt1 => talenti::verify_s_gt1(p, &random_profile(&mut rng))?,
        SweepClaim::Classical => talenti::verify_classical_equality(p, &random_profile(&mut rng))?,
        SweepClaim::Green => talenti::verify_green_boundary_talenti(p, &random_point(&mut rng, p.dim, 0.05, 0.95))?,
        SweepClaim::Thm2 => {
            let xi = random_point(&mut rng, p.dim, 0.2, 0.8);
            let rho = 0.9 * talenti::max_admissible_rho(p.dim, p.s, &xi)?;
            talenti::verify_bump_boundary_talenti_with(p, &BumpSource::new(xi, rho, 1.0)?, opts)?
        }
        SweepClaim::Explore => {
            let xi = random_point(&mut rng, p.dim, 0.2, 0.8);
            let a = frac_talenti::geometry::norm(&xi);
            let rho = 0.1 * a.min(1.0 - a);
            talenti::explore_bump(p, &BumpSource::new(xi, rho, 1.0)?, opts)?
        }
    };
    Ok(report.with_meta("case", pt.index))
}

fn calibrate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut v = Validator::default();
    let params = v.params(cfg);
    let rel_tol = v.positive("tol", cfg.tol, CALIBRATION_REL_TOL);
    let quad_tol = v.positive("quad-tol", cfg.quad_tol, CALIBRATION_QUAD_TOL);
    v.finish()?;
    let p = params.unwrap();
    let order = cfg
        .order
        .unwrap_or_else(|| VerifyOptions::default().sphere_order_for(p.dim));
    let report = talenti::verify_calibration(&p, order, rel_tol, quad_tol)?;
    let data = json!({ "trace_mean": report.lhs, "torsion_boundary_value": report.rhs });
    Ok(Outcome::verdicts("calibration", vec![report]).with_data(data))
}

fn report(inputs: &[PathBuf], out: Option<&Path>) -> Result<i32, CliError> {
    let mut sources = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
        let name = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        sources.push((name, value));
    }
    emit_text(&markdown_summary(&sources)?, out)?;
    Ok(0)
}

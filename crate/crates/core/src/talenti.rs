//! Numerical checks of boundary Talenti comparison inequalities for the
//! fractional Laplacian on the unit ball.
//!
//! Every check returns a [`VerificationReport`] with both sides of the
//! inequality, a signed margin oriented so that a positive margin means the
//! claim holds, and a pass flag. `signed_gap` always equals
//! `(u_f)^*/δ^s - u_{f^*}/δ^s` (or its analogue), so its sign can be compared
//! across claims.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::kernels::t_moment;
use crate::quadrature::sphere_rule;
use crate::solver::{default_profile_grid, radial_boundary_value, shell_midpoints, SolutionHandle};
use crate::sources::{
    lp_norm, rearrange_radial_samples, schwarz, shell_volume, BumpSource, RadialProfile, SourceFunction,
};
use crate::special::{LogBranch, Normalization, ProblemParams};

/// Relative tolerance applied to the right-hand side of each inequality.
pub const DEFAULT_REL_TOL: f64 = 1e-7;
/// Symmetric-difference measure above which a strict margin is required.
pub const EQUALITY_MEASURE: f64 = 1e-6;
/// Grid size used by [`locate_crossing`] before refinement.
pub const CROSSING_GRID: usize = 512;

/// Claim identifiers used in reports.
pub mod claims {
    pub const REVERSE_BOUNDARY: &str = "theorem1.reverse_boundary";
    pub const CROSSING: &str = "theorem1.interior_crossing";
    pub const BUMP_BOUNDARY: &str = "theorem2.bump_boundary";
    pub const GREEN_BOUNDARY: &str = "green.boundary_talenti";
    pub const S_GREATER_ONE: &str = "theorem_s_gt1.radial";
    pub const HIGHER_ORDER_BUMP: &str = "theorem_s_gt1.bump";
    pub const MASS_CONCENTRATION: &str = "mass_concentration";
    pub const CLASSICAL_EQUALITY: &str = "classical.equality";
    pub const SHARPNESS: &str = "lemma.sharp_lower_bound";
    pub const CALIBRATION: &str = "calibration.torsion_trace";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the claimed inequality holds.
    pub margin: f64,
    pub signed_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub equality_expected: bool,
    pub normalization: Normalization,
    pub metadata: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
}

impl VerificationReport {
    /// Report with `margin = rhs - lhs`, `pass = false` and the parameters
    /// echoed in `metadata`.
    pub fn new(claim: &str, params: &ProblemParams, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("N".to_string(), params.dim.to_string());
        metadata.insert("s".to_string(), params.s.to_string());
        metadata.insert("normalization".to_string(), params.normalization.as_str().to_string());
        metadata.insert(
            "log_branch".to_string(),
            match params.log_branch {
                LogBranch::Printed => "printed",
                LogBranch::Consistent => "consistent",
            }
            .to_string(),
        );
        Self {
            claim: claim.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            signed_gap: 0.0,
            tolerance,
            pass: false,
            equality_expected: false,
            normalization: params.normalization,
            metadata,
            values: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }
}

/// Knobs shared by the checks that need quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Relative tolerance on the right-hand side.
    pub rel_tol: f64,
    /// Target accuracy of the underlying integrals.
    pub quad_tol: f64,
    /// Sphere rule order for boundary traces; `None` picks a default per
    /// dimension.
    pub sphere_order: Option<usize>,
    /// Radial grid size for interior profiles.
    pub grid_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            quad_tol: 1e-10,
            sphere_order: None,
            grid_points: CROSSING_GRID,
        }
    }
}

impl VerifyOptions {
    pub fn sphere_order_for(&self, dim: usize) -> usize {
        self.sphere_order.unwrap_or(match dim {
            1 => 1,
            2 => 64,
            _ => 32,
        })
    }
}

fn require_nonzero(op: &'static str, f: &RadialProfile) -> Result<()> {
    if f.is_zero() {
        return Err(Error::precondition(op, "f must not vanish identically"));
    }
    Ok(())
}

/// Shared radial comparison of `V(f)` and `V(f^*)` where
/// `V = radial_boundary_value`. `forward` puts `V(f^*)` on the left.
fn radial_comparison(
    claim: &str,
    params: &ProblemParams,
    f: &RadialProfile,
    star_on_left: bool,
    rel_tol: f64,
) -> Result<VerificationReport> {
    let star = schwarz(&f.clone().into(), params.dim);
    let v_f = radial_boundary_value(params, f)?;
    let v_star = radial_boundary_value(params, &star)?;
    let (lhs, rhs) = if star_on_left { (v_star, v_f) } else { (v_f, v_star) };
    let tol = rel_tol * rhs.abs();
    let diff = f.measure_of_difference(&star, params.dim);
    let mut r = VerificationReport::new(claim, params, lhs, rhs, tol)
        .with_value("measure_f_ne_fstar", diff)
        .with_meta("profile", f.to_spec_string())
        .with_meta("symmetrization", star.to_spec_string());
    r.signed_gap = v_f - v_star;
    r.equality_expected = f.is_symmetric_decreasing();
    r.pass = if r.equality_expected {
        r.margin.abs() <= tol
    } else if diff > EQUALITY_MEASURE {
        r.margin > tol
    } else {
        r.margin >= -tol
    };
    Ok(r)
}

/// For `s ∈ (0, 1)` and radial `f`: `u_{f^*}/δ^s ≤ (u_f)^*/δ^s` on the
/// sphere, with equality iff `f = f^*`.
pub fn verify_reverse_boundary_talenti(params: &ProblemParams, f: &RadialProfile) -> Result<VerificationReport> {
    const OP: &str = "verify_reverse_boundary_talenti";
    if !(params.s < 1.0) {
        return Err(Error::domain(
            OP,
            format!("s = {} must lie in (0, 1); use verify_s_gt1 for s > 1", params.s),
        ));
    }
    require_nonzero(OP, f)?;
    radial_comparison(claims::REVERSE_BOUNDARY, params, f, true, DEFAULT_REL_TOL)
}

/// For `s > 1` and radial `f`: `(u_f)^*/δ^s ≤ u_{f^*}/δ^s`.
pub fn verify_s_gt1(params: &ProblemParams, f: &RadialProfile) -> Result<VerificationReport> {
    const OP: &str = "verify_s_gt1";
    if !(params.s > 1.0) {
        return Err(Error::domain(OP, format!("s = {} must exceed 1", params.s)));
    }
    require_nonzero(OP, f)?;
    radial_comparison(claims::S_GREATER_ONE, params, f, false, DEFAULT_REL_TOL)
}

/// For `s = 1` both boundary values coincide for every radial `f`.
pub fn verify_classical_equality(params: &ProblemParams, f: &RadialProfile) -> Result<VerificationReport> {
    const OP: &str = "verify_classical_equality";
    if params.s != 1.0 {
        return Err(Error::domain(OP, format!("s = {} must equal 1", params.s)));
    }
    let mut r = radial_comparison(claims::CLASSICAL_EQUALITY, params, f, false, 0.0)?;
    r.tolerance = 1e-12 * r.rhs.abs().max(1.0);
    r.equality_expected = true;
    r.pass = r.margin.abs() <= r.tolerance;
    Ok(r)
}

/// Interval `(lower, 1)` of the radial grid on which `u_{f^*} < (u_f)^*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Smallest grid radius of the contiguous run of strict nodes ending at
    /// the outermost node.
    pub lower: f64,
    /// Largest grid radius inside the run where the inequality fails, or 0.
    pub last_failure: f64,
    pub grid_points: usize,
    pub nodes: usize,
}

impl Crossing {
    /// Grid spacing at the lower endpoint.
    pub fn cell_width(&self) -> f64 {
        self.lower - self.last_failure
    }
}

/// Values of `u_f` and `u_{f^*}` on the shell midpoints of a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfiles {
    pub outer: Vec<f64>,
    pub midpoints: Vec<f64>,
    pub u_f: Vec<f64>,
    pub u_star: Vec<f64>,
    /// Decreasing rearrangement of `u_f` as a step profile on the shells.
    pub u_f_rearranged: RadialProfile,
    pub u_star_profile: RadialProfile,
}

pub fn radial_profiles(params: &ProblemParams, f: &RadialProfile, points: usize, tol: f64) -> Result<RadialProfiles> {
    let outer = default_profile_grid(points);
    let midpoints = shell_midpoints(&outer);
    let star = schwarz(&f.clone().into(), params.dim);
    let u_f = SolutionHandle::new(*params, f.clone())?.radial_solution_profile(&midpoints, tol)?;
    let u_star = if star == f.canonical() {
        u_f.clone()
    } else {
        SolutionHandle::new(*params, star)?.radial_solution_profile(&midpoints, tol)?
    };
    let u_f_rearranged = rearrange_radial_samples(&outer, &u_f, params.dim)?;
    let u_star_profile = RadialProfile::new(outer.clone(), u_star.clone())?;
    Ok(RadialProfiles {
        outer,
        midpoints,
        u_f,
        u_star,
        u_f_rearranged,
        u_star_profile,
    })
}

/// Locates the outer interval on which `u_{f^*} < (u_f)^*`, refining the
/// grid once when the first grid shows no such interval.
pub fn locate_crossing(params: &ProblemParams, f: &RadialProfile, grid_points: usize) -> Result<Crossing> {
    locate_crossing_with(params, f, grid_points, 1e-9)
}

pub fn locate_crossing_with(
    params: &ProblemParams,
    f: &RadialProfile,
    grid_points: usize,
    tol: f64,
) -> Result<Crossing> {
    const OP: &str = "locate_crossing";
    if !(params.s < 1.0) {
        return Err(Error::domain(OP, "s must lie in (0, 1)"));
    }
    if f.is_symmetric_decreasing()
        || f.measure_of_difference(&schwarz(&f.clone().into(), params.dim), params.dim) == 0.0
    {
        return Err(Error::precondition(OP, "f coincides with its symmetrization"));
    }
    let mut points = grid_points.max(2);
    for _ in 0..2 {
        let prof = radial_profiles(params, f, points, tol)?;
        let n = prof.midpoints.len();
        let mut j = n;
        while j > 0 {
            let m = prof.midpoints[j - 1];
            if prof.u_star[j - 1] < prof.u_f_rearranged.value_at(m) {
                j -= 1;
            } else {
                break;
            }
        }
        if j < n {
            return Ok(Crossing {
                lower: prof.midpoints[j],
                last_failure: if j > 0 { prof.midpoints[j - 1] } else { 0.0 },
                grid_points: points,
                nodes: n - j,
            });
        }
        points *= 2;
    }
    Err(Error::NoCrossing {
        op: OP,
        grid: points / 2,
    })
}

/// Report form of [`locate_crossing`]: `lhs` is the lower end of the
/// interval, `rhs = 1`, and the check passes when the interval is nonempty.
pub fn verify_crossing(params: &ProblemParams, f: &RadialProfile, grid_points: usize) -> Result<VerificationReport> {
    let c = locate_crossing(params, f, grid_points)?;
    let mut r = VerificationReport::new(claims::CROSSING, params, c.lower, 1.0, 0.0)
        .with_meta("profile", f.to_spec_string())
        .with_meta("grid_points", c.grid_points)
        .with_value("nodes", c.nodes as f64)
        .with_value("cell_width", c.cell_width());
    r.pass = c.nodes > 0;
    Ok(r)
}

/// `(1 - (|ξ| - ρ)^2)^s ≤ (1 - ρ/(1 - |ξ|))^N`.
pub fn check_rho_condition(dim: usize, s: f64, xi: &[f64], rho: f64) -> Result<bool> {
    const OP: &str = "check_rho_condition";
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::precondition(OP, format!("s = {s} must lie in (0, 1)")));
    }
    let (lhs, rhs) = rho_condition_sides(OP, dim, s, xi, rho)?;
    Ok(lhs <= rhs)
}

fn rho_condition_sides(op: &'static str, dim: usize, s: f64, xi: &[f64], rho: f64) -> Result<(f64, f64)> {
    let a = norm(xi);
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::precondition(op, format!("|ξ| = {a} must lie in (0, 1)")));
    }
    if !(rho > 0.0 && rho < a.min(1.0 - a)) {
        return Err(Error::precondition(
            op,
            format!("ρ = {rho} must lie in (0, {})", a.min(1.0 - a)),
        ));
    }
    let lhs = (1.0 - (a - rho) * (a - rho)).powf(s);
    let rhs = (1.0 - rho / (1.0 - a)).powi(dim as i32);
    Ok((lhs, rhs))
}

/// Largest `ρ` satisfying [`check_rho_condition`], by bisection.
pub fn max_admissible_rho(dim: usize, s: f64, xi: &[f64]) -> Result<f64> {
    const OP: &str = "max_admissible_rho";
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::precondition(OP, format!("s = {s} must lie in (0, 1)")));
    }
    let a = norm(xi);
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::precondition(OP, format!("|ξ| = {a} must lie in (0, 1)")));
    }
    let bound = a.min(1.0 - a);
    let holds = |rho: f64| {
        let lhs = (1.0 - (a - rho) * (a - rho)).powf(s);
        let rhs = (1.0 - rho / (1.0 - a)).powi(dim as i32);
        lhs <= rhs
    };
    if holds(bound) {
        return Ok(bound);
    }
    let (mut lo, mut hi) = (0.0, bound);
    while hi - lo > 1e-15 * bound {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(1 - (|ξ| - ρ)^2)^s ≤ (1 - ρ/(1 - |ξ|))^N (1 - ρ^2)^{s-1}` for
/// `s ∈ (1, N]`.
pub fn check_higher_order_condition(dim: usize, s: f64, xi: &[f64], rho: f64) -> Result<bool> {
    const OP: &str = "check_higher_order_condition";
    if !(s > 1.0 && s <= dim as f64) {
        return Err(Error::precondition(OP, format!("s = {s} must lie in (1, {dim}]")));
    }
    let (lhs, rhs) = rho_condition_sides(OP, dim, s, xi, rho)?;
    Ok(lhs <= rhs * (1.0 - rho * rho).powf(s - 1.0))
}

fn bump_comparison(
    claim: &str,
    params: &ProblemParams,
    f: &BumpSource,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let order = opts.sphere_order_for(params.dim);
    let rule = sphere_rule(params.dim, order)?;
    let handle = SolutionHandle::new(*params, f.clone())?;
    let lhs = handle.symmetrized_boundary_value(&rule, opts.quad_tol)?;
    let source: SourceFunction = f.clone().into();
    let star = schwarz(&source, params.dim);
    let rhs = radial_boundary_value(params, &star)?;
    let tol = opts.rel_tol * rhs.abs();
    let a = norm(f.center());
    let rho = f.rho();
    let l1 = lp_norm(&source, 1.0, params.dim);
    let m0 = params.martin_at_origin();
    let upper =
        m0 * (1.0 - (a - rho) * (a - rho)).powf(params.s) * (1.0 - rho / (1.0 - a)).powi(-(params.dim as i32)) * l1;
    let mut r = VerificationReport::new(claim, params, lhs, rhs, tol)
        .with_meta("xi", format!("{:?}", f.center()))
        .with_meta("rho", rho)
        .with_meta("height", f.height())
        .with_meta("sphere_order", order)
        .with_meta("quad_tol", opts.quad_tol)
        .with_value("upper_bound_lhs", upper)
        .with_value("l1_norm", l1)
        .with_value("martin_at_origin", m0);
    r.signed_gap = lhs - rhs;
    r.pass = r.margin > tol;
    Ok(r)
}

/// Boundary check for an off-centre bump with `s ∈ (0, 1)`:
/// `(u_f)^*/δ^s < u_{f^*}/δ^s`.
pub fn verify_bump_boundary_talenti(params: &ProblemParams, f: &BumpSource) -> Result<VerificationReport> {
    verify_bump_boundary_talenti_with(params, f, &VerifyOptions::default())
}

pub fn verify_bump_boundary_talenti_with(
    params: &ProblemParams,
    f: &BumpSource,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    const OP: &str = "verify_bump_boundary_talenti";
    if !(params.s > 0.0 && params.s < 1.0) {
        return Err(Error::domain(OP, format!("s = {} must lie in (0, 1)", params.s)));
    }
    if f.is_centered() {
        return Err(Error::precondition(OP, "the bump must be centred away from the origin"));
    }
    if !check_rho_condition(params.dim, params.s, f.center(), f.rho())? {
        return Err(Error::ConditionNotSatisfied {
            op: OP,
            detail: format!(
                "ρ = {} exceeds the admissible radius {:.10} for |ξ| = {}",
                f.rho(),
                max_admissible_rho(params.dim, params.s, f.center())?,
                norm(f.center())
            ),
        });
    }
    let mut r = bump_comparison(claims::BUMP_BOUNDARY, params, f, opts)?;
    let m0 = params.martin_at_origin();
    let l1 = r.values["l1_norm"];
    r = r.with_value("lower_bound_rhs", m0 * l1);
    Ok(r)
}

/// Bump check for `s ∈ (1, N]` under the strengthened radius condition.
pub fn verify_higher_order_bump(params: &ProblemParams, f: &BumpSource) -> Result<VerificationReport> {
    verify_higher_order_bump_with(params, f, &VerifyOptions::default())
}

pub fn verify_higher_order_bump_with(
    params: &ProblemParams,
    f: &BumpSource,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    const OP: &str = "verify_higher_order_bump";
    if !(params.s > 1.0 && params.s <= params.dim as f64) {
        return Err(Error::domain(
            OP,
            format!("s = {} must lie in (1, {}]", params.s, params.dim),
        ));
    }
    if f.is_centered() {
        return Err(Error::precondition(OP, "the bump must be centred away from the origin"));
    }
    if !check_higher_order_condition(params.dim, params.s, f.center(), f.rho())? {
        return Err(Error::ConditionNotSatisfied {
            op: OP,
            detail: format!("ρ = {} violates the higher-order radius condition", f.rho()),
        });
    }
    let mut r = bump_comparison(claims::HIGHER_ORDER_BUMP, params, f, opts)?;
    let m0 = params.martin_at_origin();
    let l1 = r.values["l1_norm"];
    r = r
        .with_value(
            "lower_bound_rhs",
            m0 * (1.0 - f.rho() * f.rho()).powf(params.s - 1.0) * l1,
        )
        .with_meta("condition_distance", "1-|xi|");
    Ok(r)
}

/// Exploratory comparison for a bump without any admissibility gate.
/// `pass` is always false; only the sides and the gap are meaningful.
pub fn explore_bump(params: &ProblemParams, f: &BumpSource, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut r = bump_comparison("exploratory.bump", params, f, opts)?;
    r.pass = false;
    Ok(r.with_meta("mode", "exploratory"))
}

/// `(1 - |ξ|^2)^s T_{N,N/s}(ξ)^{-s} < 1`, the normalized symmetrized Martin
/// kernel at the sphere.
pub fn verify_green_boundary_talenti(params: &ProblemParams, xi: &[f64]) -> Result<VerificationReport> {
    const OP: &str = "verify_green_boundary_talenti";
    let (dim, s) = (params.dim, params.s);
    if !(s > 0.0 && s <= dim as f64) {
        return Err(Error::domain(OP, format!("s = {s} must lie in (0, {dim}]")));
    }
    let a = norm(xi);
    if xi.len() != dim || !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(
            OP,
            format!("ξ must be a point of B_1 \\ {{0}} in R^{dim}"),
        ));
    }
    let tau = dim as f64 / s;
    let t = t_moment(dim, tau, xi)?;
    let lhs = ((1.0 - a) * (1.0 + a)).powf(s) * t.powf(-s);
    let m0 = params.martin_at_origin();
    let mut r = VerificationReport::new(claims::GREEN_BOUNDARY, params, lhs, 1.0, 0.0)
        .with_meta("xi", format!("{xi:?}"))
        .with_value("t_moment", t)
        .with_value("martin_star", m0 * lhs)
        .with_value("martin_at_origin", m0);
    r.signed_gap = lhs - 1.0;
    r.pass = lhs < 1.0;
    Ok(r)
}

/// `∫_{B_r} (u_f)^* ≤ ∫_{B_r} u_{f^*}` at each radius.
pub fn verify_mass_concentration(
    params: &ProblemParams,
    f: &RadialProfile,
    radii: &[f64],
) -> Result<VerificationReport> {
    verify_mass_concentration_with(params, f, radii, &VerifyOptions::default())
}

pub fn verify_mass_concentration_with(
    params: &ProblemParams,
    f: &RadialProfile,
    radii: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    const OP: &str = "verify_mass_concentration";
    if !(params.s > 0.0 && params.s < 1.0) {
        return Err(Error::domain(OP, format!("s = {} must lie in (0, 1)", params.s)));
    }
    require_nonzero(OP, f)?;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::domain(OP, "radii must be a nonempty list in (0, 1]"));
    }
    let prof = radial_profiles(params, f, opts.grid_points, opts.quad_tol)?;
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    let mut all_ok = true;
    for &r in radii {
        let lhs = mass_within(&prof.u_f_rearranged, r, params.dim);
        let rhs = mass_within(&prof.u_star_profile, r, params.dim);
        let tol = opts.rel_tol * rhs.abs();
        if rhs - lhs < -tol {
            all_ok = false;
        }
        let rel = (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE);
        if worst.is_none_or(|w| rel < w.3) {
            worst = Some((r, lhs, rhs, rel));
        }
    }
    let (r_worst, lhs, rhs, _) = worst.expect("nonempty radii");
    let mut report = VerificationReport::new(claims::MASS_CONCENTRATION, params, lhs, rhs, opts.rel_tol * rhs.abs())
        .with_meta("grid_points", opts.grid_points)
        .with_meta("radii", radii.len())
        .with_value("worst_radius", r_worst);
    report.signed_gap = lhs - rhs;
    report.equality_expected = f.is_symmetric_decreasing();
    report.pass = all_ok;
    Ok(report)
}

/// `∫_{B_r} g` for a radial step profile `g`.
pub fn mass_within(g: &RadialProfile, r: f64, dim: usize) -> f64 {
    g.pieces()
        .take_while(|(a, _, _)| *a < r)
        .map(|(a, b, v)| v * shell_volume(a, b.min(r), dim))
        .sum()
}

/// Boundary trace of `f ≡ 1` against the torsion value `2^s γ_{N,s}`, with
/// pass meaning every node agrees to relative error `rel_tol`. The trace is
/// scaled to the `DeltaLimit` normalization whatever `params` says.
pub fn verify_calibration(
    params: &ProblemParams,
    order: usize,
    rel_tol: f64,
    quad_tol: f64,
) -> Result<VerificationReport> {
    let delta = params.with_normalization(Normalization::DeltaLimit);
    let rule = sphere_rule(params.dim, order)?;
    let handle = SolutionHandle::new(delta, RadialProfile::constant(1.0)?)?;
    let trace = handle.boundary_trace(&rule, quad_tol)?;
    let oracle = crate::solver::torsion_boundary_value(&delta)?;
    let worst = trace
        .values()
        .iter()
        .map(|v| (v / oracle - 1.0).abs())
        .fold(0.0, f64::max);
    let mut r = VerificationReport::new(claims::CALIBRATION, &delta, trace.mean(), oracle, rel_tol * oracle)
        .with_meta("sphere_order", order)
        .with_meta("quad_tol", quad_tol)
        .with_value("max_relative_error", worst)
        .with_value("trace_min", trace.min())
        .with_value("trace_max", trace.max());
    r.signed_gap = r.lhs - r.rhs;
    r.equality_expected = true;
    r.pass = worst <= rel_tol;
    Ok(r)
}

/// One row of [`sharpness_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub epsilon: f64,
    pub value: f64,
    pub limit: f64,
    pub excess: f64,
    pub excess_over_eps2: f64,
    pub above_limit: bool,
}

/// Boundary value of `u_{f_ε}/δ^s` for `f_ε = |B_ε|^{-1} 1_{B_ε(0)}`,
/// compared with its limit `ν 2κ_{N,s}/s`.
pub fn sharpness_sweep(params: &ProblemParams, epsilons: &[f64]) -> Result<Vec<SharpnessRow>> {
    const OP: &str = "sharpness_sweep";
    if !(params.s > 0.0 && params.s < 1.0) {
        return Err(Error::domain(OP, format!("s = {} must lie in (0, 1)", params.s)));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain(OP, "ε values must be strictly decreasing"));
    }
    let limit = params.martin_at_origin();
    epsilons
        .iter()
        .map(|&eps| {
            let bump = BumpSource::normalized_centered(params.dim, eps)?;
            let prof = schwarz(&bump.into(), params.dim);
            let value = radial_boundary_value(params, &prof)?;
            let excess = value - limit;
            Ok(SharpnessRow {
                epsilon: eps,
                value,
                limit,
                excess,
                excess_over_eps2: excess / (eps * eps),
                above_limit: value > limit,
            })
        })
        .collect()
}

/// Summary report for a [`sharpness_sweep`] table.
pub fn sharpness_report(params: &ProblemParams, rows: &[SharpnessRow]) -> VerificationReport {
    let last = rows.last();
    let lhs = params.martin_at_origin();
    let rhs = last.map_or(f64::NAN, |r| r.value);
    let mut r = VerificationReport::new(claims::SHARPNESS, params, lhs, rhs, 0.0).with_meta("rows", rows.len());
    r.signed_gap = rhs - lhs;
    r.pass = !rows.is_empty() && rows.iter().all(|row| row.above_limit);
    r
}

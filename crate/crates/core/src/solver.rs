//! Solution values through the Green representation and boundary values
//! `u/δ^s` through the Martin representation.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{check_point, check_unit, norm, norm3, pad3, Vec3};
use crate::kernels::{martin_from_parts, GreenKernel};
use crate::quadrature::gauss::{jacobi_cached, jacobi_integrate_on, jacobi_unit_cached, legendre_cached};
use crate::quadrature::{sphere_rule, BallIntegrator, EndBehavior, QuadratureRule, RuleDomain};
use crate::sources::{BoundaryTrace, BumpSource, RadialProfile, SourceFunction};
use crate::special::{beta, log_gamma, ProblemParams};

/// Number of radii in [`default_profile_grid`].
pub const DEFAULT_PROFILE_POINTS: usize = 256;

const RADIAL_NODES: usize = 32;
const PATCH_MIN_ORDER: usize = 8;
const PATCH_MAX_ORDER: usize = 128;

/// A source together with lazily computed derived data.
#[derive(Debug)]
pub struct SolutionHandle {
    params: ProblemParams,
    source: SourceFunction,
    kernel: GreenKernel,
    trace: OnceLock<(QuadratureRule, BoundaryTrace)>,
    profile: OnceLock<(Vec<f64>, Vec<f64>)>,
}

impl SolutionHandle {
    pub fn new(params: ProblemParams, source: impl Into<SourceFunction>) -> Result<Self> {
        params.require_ball_dim("SolutionHandle")?;
        let source = source.into();
        if let SourceFunction::Bump(b) = &source {
            if b.dim() != params.dim {
                return Err(Error::domain(
                    "SolutionHandle",
                    format!("bump centre has {} components, N = {}", b.dim(), params.dim),
                ));
            }
        }
        Ok(Self {
            kernel: GreenKernel::new(&params)?,
            params,
            source,
            trace: OnceLock::new(),
            profile: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn source(&self) -> &SourceFunction {
        &self.source
    }

    /// `u_f(x) = ∫ G_s(x, y) f(y) dy`.
    pub fn solve_at(&self, x: &[f64], tol: f64) -> Result<f64> {
        const OP: &str = "solve_at";
        check_point(OP, x, self.params.dim)?;
        let nx = norm(x);
        if nx >= 1.0 {
            return Err(Error::domain(OP, format!("|x| = {nx} must be below 1")));
        }
        if self.source.is_zero() {
            return Ok(0.0);
        }
        let p = &self.params;
        let center_exp = ((p.dim - 1) as f64).min(2.0 * p.s - 1.0);
        let mut integrator = BallIntegrator::new(p.dim, p.s)?
            .tolerance(tol)
            .center(x, EndBehavior::Graded { exponent: center_exp })?
            .boundary(EndBehavior::Exact { exponent: p.s });
        let dx = crate::geometry::deficit(x);
        let kernel = &self.kernel;
        match &self.source {
            SourceFunction::Radial(prof) => {
                integrator = integrator.radial_breaks(&prof.interior_breaks()).axisymmetric(true);
                integrator.integrate(|smp| {
                    let v = prof.value_at(norm3(&smp.y));
                    if v == 0.0 {
                        0.0
                    } else {
                        v * kernel.from_parts(smp.rho, dx, smp.deficit)
                    }
                })
            }
            SourceFunction::Bump(b) => {
                let xi = pad3(b.center());
                integrator = integrator
                    .support_ball(b.center(), b.rho())
                    .axisymmetric(collinear_with_origin(&pad3(x), &xi));
                let (rho, h) = (b.rho(), b.height());
                integrator.integrate(|smp| {
                    let d = [smp.y[0] - xi[0], smp.y[1] - xi[1], smp.y[2] - xi[2]];
                    if norm3(&d) < rho {
                        h * kernel.from_parts(smp.rho, dx, smp.deficit)
                    } else {
                        0.0
                    }
                })
            }
        }
    }

    /// `ψ(θ_i) = ∫ M_s(y, θ_i) f(y) dy` at every node of a sphere rule.
    pub fn boundary_trace(&self, rule: &QuadratureRule, tol: f64) -> Result<BoundaryTrace> {
        const OP: &str = "boundary_trace";
        if rule.domain() != RuleDomain::Sphere || rule.dim() != self.params.dim {
            return Err(Error::domain(OP, "rule must be a sphere rule of the problem dimension"));
        }
        if let Some((cached_rule, trace)) = self.trace.get() {
            if cached_rule == rule {
                return Ok(trace.clone());
            }
        }
        let mut values = Vec::with_capacity(rule.len());
        match &self.source {
            SourceFunction::Radial(prof) => {
                for theta in rule.nodes() {
                    values.push(self.radial_trace_at(prof, theta, tol)?);
                }
            }
            SourceFunction::Bump(b) => {
                let mut patches = PatchRules::new(self.params.dim, b);
                for theta in rule.nodes() {
                    values.push(patches.trace_at(&self.params, theta, tol)?);
                }
            }
        }
        let trace = BoundaryTrace::new(rule.clone(), values)?;
        let _ = self.trace.set((rule.clone(), trace.clone()));
        Ok(trace)
    }

    fn radial_trace_at(&self, prof: &RadialProfile, theta: &[f64], tol: f64) -> Result<f64> {
        check_unit("boundary_trace", theta, self.params.dim)?;
        if prof.is_zero() {
            return Ok(0.0);
        }
        let p = &self.params;
        let pre = p.martin_at_origin();
        BallIntegrator::new(p.dim, p.s)?
            .tolerance(tol)
            .center(theta, EndBehavior::Exact { exponent: p.s - 1.0 })?
            .boundary(EndBehavior::Exact { exponent: p.s })
            .radial_breaks(&prof.interior_breaks())
            .axisymmetric(true)
            .integrate(|smp| {
                let v = prof.value_at(norm3(&smp.y));
                if v == 0.0 {
                    0.0
                } else {
                    v * martin_from_parts(p, pre, smp.deficit, smp.rho)
                }
            })
    }

    /// `((1/ω_{N-1}) ∫ ψ^{-1/s} dσ)^{-s}`, the boundary value of
    /// `(u_f)^*/δ^s`.
    pub fn symmetrized_boundary_value(&self, rule: &QuadratureRule, tol: f64) -> Result<f64> {
        let trace = self.boundary_trace(rule, tol)?;
        trace.require_positive("symmetrized_boundary_value")?;
        trace.harmonic_mean(self.params.s)
    }

    /// `u_f(r e_1)` for each radius of `grid`.
    pub fn radial_solution_profile(&self, grid: &[f64], tol: f64) -> Result<Vec<f64>> {
        const OP: &str = "radial_solution_profile";
        if !matches!(self.source, SourceFunction::Radial(_)) {
            return Err(Error::precondition(OP, "the source must be radial"));
        }
        if let Some((g, values)) = self.profile.get() {
            if g.as_slice() == grid {
                return Ok(values.clone());
            }
        }
        let mut x = vec![0.0; self.params.dim];
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::domain(OP, format!("radius {r} outside [0, 1)")));
            }
            x[0] = r;
            values.push(self.solve_at(&x, tol)?);
        }
        let _ = self.profile.set((grid.to_vec(), values.clone()));
        Ok(values)
    }
}

fn collinear_with_origin(x: &Vec3, xi: &Vec3) -> bool {
    let c = [
        x[1] * xi[2] - x[2] * xi[1],
        x[2] * xi[0] - x[0] * xi[2],
        x[0] * xi[1] - x[1] * xi[0],
    ];
    norm3(&c) <= 1e-14 * norm3(x) * norm3(xi)
}

/// Product rules on a bump's support `B_ρ(ξ)`, built for doubling orders.
struct PatchRules {
    dim: usize,
    center: Vec3,
    height: f64,
    radius: f64,
    rules: Vec<(Vec<Vec3>, Vec<f64>)>,
}

impl PatchRules {
    fn new(dim: usize, bump: &BumpSource) -> Self {
        Self {
            dim,
            center: pad3(bump.center()),
            height: bump.height(),
            radius: bump.rho(),
            rules: Vec::new(),
        }
    }

    fn rule(&mut self, level: usize) -> Result<&(Vec<Vec3>, Vec<f64>)> {
        while self.rules.len() <= level {
            let order = PATCH_MIN_ORDER << self.rules.len();
            let radial = jacobi_unit_cached(order, (self.dim - 1) as f64)?;
            let sphere = sphere_rule(self.dim, order)?;
            let scale = self.height * self.radius.powi(self.dim as i32);
            let mut pts = Vec::with_capacity(radial.u.len() * sphere.len());
            let mut wts = Vec::with_capacity(pts.capacity());
            for (t, wt) in radial.u.iter().zip(&radial.w) {
                for (omega, wo) in sphere.nodes().zip(sphere.weights()) {
                    let o = pad3(omega);
                    let r = self.radius * t;
                    pts.push([
                        self.center[0] + r * o[0],
                        self.center[1] + r * o[1],
                        self.center[2] + r * o[2],
                    ]);
                    wts.push(scale * wt * wo);
                }
            }
            self.rules.push((pts, wts));
        }
        Ok(&self.rules[level])
    }

    fn trace_at(&mut self, params: &ProblemParams, theta: &[f64], tol: f64) -> Result<f64> {
        check_unit("boundary_trace", theta, params.dim)?;
        let th = pad3(theta);
        let pre = params.martin_at_origin();
        let eval = |(pts, wts): &(Vec<Vec3>, Vec<f64>)| -> f64 {
            pts.iter()
                .zip(wts)
                .map(|(y, w)| {
                    let ny2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                    let d = [th[0] - y[0], th[1] - y[1], th[2] - y[2]];
                    w * martin_from_parts(params, pre, 1.0 - ny2, norm3(&d))
                })
                .sum()
        };
        let mut prev = eval(self.rule(0)?);
        let mut level = 1;
        while (PATCH_MIN_ORDER << level) <= PATCH_MAX_ORDER {
            let next = eval(self.rule(level)?);
            if (next - prev).abs() <= tol * next.abs() {
                return Ok(next);
            }
            prev = next;
            level += 1;
        }
        Err(Error::non_convergence(
            "boundary_trace",
            format!("bump patch rule did not settle up to order {PATCH_MAX_ORDER}"),
        ))
    }
}

/// `γ_{N,s} (1 - |x|^2)^s`, the solution for `f ≡ 1`.
pub fn torsion_oracle(params: &ProblemParams, x: &[f64]) -> Result<f64> {
    check_point("torsion_oracle", x, params.dim)?;
    let n = norm(x);
    if n > 1.0 + 1e-12 {
        return Err(Error::domain("torsion_oracle", format!("|x| = {n} exceeds 1")));
    }
    let d = crate::geometry::deficit(x).max(0.0);
    Ok(torsion_constant(params)? * d.powf(params.s))
}

/// `γ_{N,s} = Γ(N/2) / (4^s Γ(N/2 + s) Γ(1 + s))`.
pub fn torsion_constant(params: &ProblemParams) -> Result<f64> {
    let h = 0.5 * params.dim as f64;
    let s = params.s;
    Ok((log_gamma(h)? - s * 4f64.ln() - log_gamma(h + s)? - log_gamma(1.0 + s)?).exp())
}

/// Limit of `γ_{N,s}(1 - |x|^2)^s / (1 - |x|)^s` at the sphere, `2^s γ_{N,s}`.
pub fn torsion_boundary_value(params: &ProblemParams) -> Result<f64> {
    Ok(2f64.powf(params.s) * torsion_constant(params)?)
}

/// `ν (2κ/s) ∫ f(y) (1 - |y|^2)^{s-1} dy` for radial `f`.
pub fn radial_boundary_value(params: &ProblemParams, f: &RadialProfile) -> Result<f64> {
    params.require_ball_dim("radial_boundary_value")?;
    let weights = RadialWeight::new(params.dim, params.s)?;
    let mut total = 0.0;
    for (a, b, v) in f.pieces() {
        if v != 0.0 {
            total += v * weights.piece(a, b);
        }
    }
    Ok(params.martin_at_origin() * params.sphere_measure() * total)
}

/// `∫_a^b r^{N-1} (1 - r^2)^{s-1} dr`.
struct RadialWeight {
    dim: usize,
    s: f64,
    full: f64,
    tail_rule: std::sync::Arc<crate::quadrature::gauss::Rule1d>,
    gl: std::sync::Arc<crate::quadrature::gauss::Rule1d>,
}

impl RadialWeight {
    fn new(dim: usize, s: f64) -> Result<Self> {
        Ok(Self {
            dim,
            s,
            full: 0.5 * beta(0.5 * dim as f64, s)?,
            tail_rule: jacobi_cached(RADIAL_NODES, s - 1.0, 0.0)?,
            gl: legendre_cached(RADIAL_NODES)?,
        })
    }

    /// `∫_a^1`, Jacobi weight `(1 - r)^{s-1}` folded in.
    fn tail(&self, a: f64) -> f64 {
        if a == 0.0 {
            return self.full;
        }
        let (n, sm1) = ((self.dim - 1) as i32, self.s - 1.0);
        jacobi_integrate_on(&self.tail_rule, sm1, 0.0, a, 1.0, |r, _, _| {
            r.powi(n) * (1.0 + r).powf(sm1)
        })
    }

    fn piece(&self, a: f64, b: f64) -> f64 {
        if b >= 1.0 {
            return self.tail(a);
        }
        if 1.0 - b >= b - a {
            let (n, sm1) = ((self.dim - 1) as i32, self.s - 1.0);
            return self
                .gl
                .integrate_on(a, b, |r| r.powi(n) * ((1.0 - r) * (1.0 + r)).powf(sm1));
        }
        self.tail(a) - self.tail(b)
    }
}

/// `n` outer shell radii `sin(π i / 2n)`, `i = 1..=n`, clustered at 1.
pub fn default_profile_grid(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            if i == n {
                1.0
            } else {
                (std::f64::consts::FRAC_PI_2 * i as f64 / n as f64).sin()
            }
        })
        .collect()
}

/// Midpoints of the shells `(r_{i-1}, r_i]` with `r_0 = 0`.
pub fn shell_midpoints(outer: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    outer
        .iter()
        .map(|&r| {
            let m = 0.5 * (prev + r);
            prev = r;
            m
        })
        .collect()
}

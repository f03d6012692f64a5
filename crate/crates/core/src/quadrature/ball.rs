//! Integration over the unit ball in polar coordinates centred at a chosen
//! point.
//!
//! Every ray from the centre is split where it crosses a declared radial
//! break sphere or the boundary of an optional support ball. The piece next
//! to the centre is integrated with dyadic grading plus a Gauss–Jacobi panel
//! for the declared power behaviour; the piece ending on the unit sphere
//! carries the Jacobi weight `(R - ρ)^{s-1}`. The directions are integrated
//! adaptively in the polar angle around a fixed axis, with the tangency
//! angles of the break spheres passed on as singular points.

use std::f64::consts::PI;
use std::sync::Arc;

use super::adaptive::{self, Tolerance, DEFAULT_BUDGET};
use super::gauss::{jacobi_cached, jacobi_integrate_on, legendre_cached, Rule1d};
use crate::error::{Error, Result};
use crate::geometry::{dot3, norm3, pad3, Vec3};
use crate::special::ProblemParams;

const RAY_NODES: usize = 16;
const GRADED_LEVELS: usize = 18;
const BOUNDARY_LEVELS: usize = 30;
const MIN_AZIMUTHS: usize = 8;
const MAX_AZIMUTHS: usize = 2048;

/// One integration node handed to the integrand.
#[derive(Debug, Clone, Copy)]
pub struct BallSample {
    /// The point, padded with zeros to three components.
    pub y: Vec3,
    /// Distance from the polar centre.
    pub rho: f64,
    /// `1 - |y|^2`, computed from the ray geometry without cancellation.
    pub deficit: f64,
    pub dim: usize,
}

impl BallSample {
    pub fn point(&self) -> &[f64] {
        &self.y[..self.dim]
    }
}

/// Behaviour of the radial integrand `g(c + ρω) ρ^{N-1}` at one end of a
/// ray: at the polar centre as a power of `ρ`, at the unit sphere as a power
/// of the distance `R - ρ` to the ray end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndBehavior {
    /// Smooth.
    Regular,
    /// The power times a function that may contain weaker non-smooth terms.
    Graded { exponent: f64 },
    /// Exactly the power times a smooth function.
    Exact { exponent: f64 },
}

/// Polar-coordinate integrator on `B_1 ⊂ R^N`, `N ≤ 3`.
#[derive(Debug, Clone)]
pub struct BallIntegrator {
    dim: usize,
    center: Vec3,
    center_norm: f64,
    center_deficit: f64,
    behavior: EndBehavior,
    boundary: EndBehavior,
    breaks: Vec<f64>,
    support: Option<(Vec3, f64)>,
    axisymmetric: bool,
    tol: f64,
    gl: Arc<Rule1d>,
}

impl BallIntegrator {
    /// Integrator centred at the origin. At the unit sphere the integrand is
    /// allowed to behave like `(1 - |y|^2)^{s-1}` plus smoother terms.
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension {
                op: "ball_integrate",
                dim,
            });
        }
        if !(s > 0.0) {
            return Err(Error::domain("ball_integrate", format!("s = {s} must be positive")));
        }
        Ok(Self {
            dim,
            center: [0.0; 3],
            center_norm: 0.0,
            center_deficit: 1.0,
            behavior: EndBehavior::Regular,
            boundary: EndBehavior::Graded { exponent: s - 1.0 },
            breaks: Vec::new(),
            support: None,
            axisymmetric: false,
            tol: 1e-8,
            gl: legendre_cached(RAY_NODES)?,
        })
    }

    /// Moves the polar centre to `c ∈ closed B_1`.
    pub fn center(mut self, c: &[f64], behavior: EndBehavior) -> Result<Self> {
        if c.len() != self.dim {
            return Err(Error::domain("ball_integrate", "centre has the wrong dimension"));
        }
        let c3 = pad3(c);
        let n = norm3(&c3);
        if n > 1.0 + 1e-12 {
            return Err(Error::domain(
                "ball_integrate",
                format!("centre |c| = {n} lies outside B_1"),
            ));
        }
        self.center = c3;
        self.center_norm = n.min(1.0);
        self.center_deficit = ((1.0 - self.center_norm) * (1.0 + self.center_norm)).max(0.0);
        self.behavior = behavior;
        Ok(self)
    }

    /// Declares the behaviour at the unit sphere.
    pub fn boundary(mut self, behavior: EndBehavior) -> Self {
        self.boundary = behavior;
        self
    }

    /// Spheres `|y| = r` across which the integrand may jump.
    pub fn radial_breaks(mut self, radii: &[f64]) -> Self {
        self.breaks = radii.iter().copied().filter(|r| *r > 0.0 && *r < 1.0).collect();
        self.breaks.sort_by(f64::total_cmp);
        self.breaks.dedup();
        self
    }

    /// The integrand vanishes outside `B_radius(center)`.
    pub fn support_ball(mut self, center: &[f64], radius: f64) -> Self {
        self.support = Some((pad3(center), radius));
        self
    }

    /// Declares the integrand invariant under rotations about the polar axis.
    pub fn axisymmetric(mut self, yes: bool) -> Self {
        self.axisymmetric = yes;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn on_boundary(&self) -> bool {
        self.center_deficit <= 1e-14
    }

    fn frame(&self) -> (Vec3, Vec3, Vec3, Option<f64>) {
        let c = self.center;
        let mut axis = if self.center_norm > 0.0 {
            [
                -c[0] / self.center_norm,
                -c[1] / self.center_norm,
                -c[2] / self.center_norm,
            ]
        } else {
            [1.0, 0.0, 0.0]
        };
        let mut support_cone = None;
        if let Some((xi, rb)) = self.support {
            let d = [xi[0] - c[0], xi[1] - c[1], xi[2] - c[2]];
            let dn = norm3(&d);
            if dn > rb {
                axis = [d[0] / dn, d[1] / dn, d[2] / dn];
                support_cone = Some((rb / dn).asin());
            }
        }
        let (p1, p2) = match self.dim {
            1 => ([0.0; 3], [0.0; 3]),
            2 => ([-axis[1], axis[0], 0.0], [0.0; 3]),
            _ => {
                let k = (0..3).min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs())).unwrap();
                let mut e = [0.0; 3];
                e[k] = 1.0;
                let t = dot3(&e, &axis);
                let mut p1 = [e[0] - t * axis[0], e[1] - t * axis[1], e[2] - t * axis[2]];
                let n = norm3(&p1);
                p1 = [p1[0] / n, p1[1] / n, p1[2] / n];
                let p2 = [
                    axis[1] * p1[2] - axis[2] * p1[1],
                    axis[2] * p1[0] - axis[0] * p1[2],
                    axis[0] * p1[1] - axis[1] * p1[0],
                ];
                (p1, p2)
            }
        };
        (axis, p1, p2, support_cone)
    }

    /// `∫_{B_1} g(y) dy`.
    pub fn integrate<G: Fn(&BallSample) -> f64>(&self, g: G) -> Result<f64> {
        let (axis, p1, p2, support_cone) = self.frame();
        let ray = |omega: &Vec3| self.ray_integral(&g, omega);
        let direction = |phi: f64, psi: f64| -> Vec3 {
            let (sp, cp) = phi.sin_cos();
            match self.dim {
                1 => [cp.signum() * axis[0], 0.0, 0.0],
                2 => {
                    let sp = sp * psi.cos().signum();
                    [cp * axis[0] + sp * p1[0], cp * axis[1] + sp * p1[1], 0.0]
                }
                _ => {
                    let (ss, cs) = psi.sin_cos();
                    [
                        cp * axis[0] + sp * (cs * p1[0] + ss * p2[0]),
                        cp * axis[1] + sp * (cs * p1[1] + ss * p2[1]),
                        cp * axis[2] + sp * (cs * p1[2] + ss * p2[2]),
                    ]
                }
            }
        };
        if self.dim == 1 {
            let a = direction(0.0, 0.0);
            return Ok(ray(&a) + ray(&[-a[0], 0.0, 0.0]));
        }

        let mut phi_max = PI;
        let mut hints = Vec::new();
        if self.on_boundary() {
            phi_max = 0.5 * PI;
            hints.push(phi_max);
        }
        if let Some(cone) = support_cone {
            phi_max = phi_max.min(cone);
            hints.push(cone);
        } else if self.center_norm > 0.0 {
            for &r in &self.breaks {
                if r < self.center_norm {
                    hints.push((r / self.center_norm).asin());
                }
            }
        }
        hints.retain(|h| *h > 0.0 && *h <= phi_max);
        let tol = Tolerance {
            abs: 1e-3 * self.tol,
            rel: self.tol,
        };

        let value = if self.dim == 2 {
            let f = |phi: f64| {
                let plus = ray(&direction(phi, 0.0));
                if self.axisymmetric {
                    2.0 * plus
                } else {
                    plus + ray(&direction(phi, PI))
                }
            };
            adaptive::integrate(&f, 0.0, phi_max, tol, &hints, DEFAULT_BUDGET)?.0
        } else if self.axisymmetric {
            let f = |phi: f64| 2.0 * PI * phi.sin() * ray(&direction(phi, 0.0));
            adaptive::integrate(&f, 0.0, phi_max, tol, &hints, DEFAULT_BUDGET)?.0
        } else {
            let failure = std::cell::RefCell::new(None::<Error>);
            let f = |phi: f64| {
                let sp = phi.sin();
                if sp == 0.0 {
                    return 0.0;
                }
                match azimuthal_trapezoid(|psi| ray(&direction(phi, psi)), self.tol) {
                    Ok(v) => sp * v,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        f64::NAN
                    }
                }
            };
            let result = adaptive::integrate(&f, 0.0, phi_max, tol, &hints, DEFAULT_BUDGET);
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            result?.0
        };
        Ok(value)
    }

    /// `∫_0^{R(ω)} g(c + ρω) ρ^{N-1} dρ`.
    fn ray_integral<G: Fn(&BallSample) -> f64>(&self, g: &G, omega: &Vec3) -> f64 {
        let c = &self.center;
        let cw = dot3(c, omega);
        let disc = (cw * cw + self.center_deficit).max(0.0);
        let sq = disc.sqrt();
        let (big, small) = if cw <= 0.0 {
            let big = sq - cw;
            (big, if big > 0.0 { self.center_deficit / big } else { 0.0 })
        } else {
            let small = sq + cw;
            (self.center_deficit / small, small)
        };
        // `big` is the ray length R, `small` the length of the opposite ray
        let r_end = big;
        if !(r_end > 0.0) {
            return 0.0;
        }
        let mut lo: f64 = 0.0;
        let mut hi = r_end;
        if let Some((xi, rb)) = self.support {
            let d = [c[0] - xi[0], c[1] - xi[1], c[2] - xi[2]];
            let dw = dot3(&d, omega);
            let q = dot3(&d, &d) - rb * rb;
            let disc = dw * dw - q;
            if disc <= 0.0 {
                return 0.0;
            }
            let sq = disc.sqrt();
            let (t1, t2) = if dw <= 0.0 {
                let t2 = sq - dw;
                (q / t2, t2)
            } else {
                let t1 = -dw - sq;
                (t1, q / t1)
            };
            lo = lo.max(t1);
            hi = hi.min(t2);
            if hi <= lo {
                return 0.0;
            }
        }
        let mut cuts = vec![lo];
        for &r in &self.breaks {
            let q = (self.center_norm - r) * (self.center_norm + r);
            let disc = cw * cw - q;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let roots = if cw <= 0.0 {
                let big = sq - cw;
                [big, if big > 0.0 { q / big } else { 0.0 }]
            } else {
                let neg = -cw - sq;
                [neg, if neg != 0.0 { q / neg } else { 0.0 }]
            };
            for t in roots {
                if t > lo + 1e-14 * r_end && t < hi - 1e-14 * r_end {
                    cuts.push(t);
                }
            }
        }
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let ctx = RayContext {
            integrator: self,
            omega,
            r_end,
            opposite: small,
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += ctx.piece(g, w[0], w[1]);
        }
        total
    }
}

struct RayContext<'a> {
    integrator: &'a BallIntegrator,
    omega: &'a Vec3,
    r_end: f64,
    opposite: f64,
}

impl RayContext<'_> {
    fn sample(&self, rho: f64, to_end: f64) -> BallSample {
        let c = &self.integrator.center;
        let w = self.omega;
        BallSample {
            y: [c[0] + rho * w[0], c[1] + rho * w[1], c[2] + rho * w[2]],
            rho,
            deficit: to_end * (rho + self.opposite),
            dim: self.integrator.dim,
        }
    }

    fn jacobian(&self, rho: f64) -> f64 {
        match self.integrator.dim {
            1 => 1.0,
            2 => rho,
            _ => rho * rho,
        }
    }

    fn center_singular(&self) -> bool {
        !matches!(self.integrator.behavior, EndBehavior::Regular)
    }

    fn piece<G: Fn(&BallSample) -> f64>(&self, g: &G, a: f64, b: f64) -> f64 {
        let r = self.r_end;
        let half = 0.5 * r;
        let at_center = a == 0.0;
        let at_end = b == r;
        let behavior = self.integrator.behavior;
        if at_center && at_end {
            if let (EndBehavior::Exact { exponent: beta }, EndBehavior::Exact { exponent: alpha }) =
                (behavior, self.integrator.boundary)
            {
                return self.jacobi_panel(g, 0.0, r, alpha, beta);
            }
        }
        let mut total = 0.0;
        let mut inner_a = a;
        let mut inner_b = b;
        if at_center {
            let cut = b.min(half);
            total += self.center_panel(g, cut);
            inner_a = cut;
        }
        if at_end {
            let cut = a.max(half).max(inner_a);
            total += self.end_panel(g, cut);
            inner_b = cut;
        }
        if inner_b > inner_a {
            total += self.graded_interior(g, inner_a, inner_b, 0);
        }
        total
    }

    fn center_panel<G: Fn(&BallSample) -> f64>(&self, g: &G, cut: f64) -> f64 {
        match self.integrator.behavior {
            EndBehavior::Regular => self.graded_interior(g, 0.0, cut, 0),
            EndBehavior::Exact { exponent } => self.jacobi_panel(g, 0.0, cut, 0.0, exponent),
            EndBehavior::Graded { exponent } => {
                let mut total = 0.0;
                let mut outer = cut;
                for _ in 0..GRADED_LEVELS {
                    let inner = 0.5 * outer;
                    total += self.gl_panel(g, inner, outer);
                    outer = inner;
                }
                total + self.jacobi_panel(g, 0.0, outer, 0.0, exponent)
            }
        }
    }

    fn end_panel<G: Fn(&BallSample) -> f64>(&self, g: &G, cut: f64) -> f64 {
        let r = self.r_end;
        match self.integrator.boundary {
            EndBehavior::Regular => self.graded_interior(g, cut, r, 0),
            EndBehavior::Exact { exponent } => self.jacobi_panel(g, cut, r, exponent, 0.0),
            EndBehavior::Graded { exponent } => {
                let mut total = 0.0;
                let mut inner = cut;
                for _ in 0..BOUNDARY_LEVELS {
                    let outer = r - 0.5 * (r - inner);
                    if outer <= inner {
                        break;
                    }
                    total += self.gl_panel(g, inner, outer);
                    inner = outer;
                }
                total + self.jacobi_panel(g, inner, r, exponent, 0.0)
            }
        }
    }

    /// Splits `[a, b]` until every panel is no longer than twice its distance
    /// to the singular ray ends.
    fn graded_interior<G: Fn(&BallSample) -> f64>(&self, g: &G, a: f64, b: f64, depth: usize) -> f64 {
        let left = if self.center_singular() { a } else { f64::INFINITY };
        let right = if matches!(self.integrator.boundary, EndBehavior::Regular) {
            f64::INFINITY
        } else {
            self.r_end - b
        };
        let limit = 2.0 * left.min(right);
        if b - a <= limit || depth > 60 {
            return self.gl_panel(g, a, b);
        }
        let mid = if left <= right {
            (a + limit.max(0.0)).min(0.5 * (a + b)).max(a + 0.25 * (b - a))
        } else {
            (b - limit.max(0.0)).max(0.5 * (a + b)).min(b - 0.25 * (b - a))
        };
        self.graded_interior(g, a, mid, depth + 1) + self.graded_interior(g, mid, b, depth + 1)
    }

    fn gl_panel<G: Fn(&BallSample) -> f64>(&self, g: &G, a: f64, b: f64) -> f64 {
        let r = self.r_end;
        self.integrator.gl.integrate_on(a, b, |rho| {
            let sample = self.sample(rho, r - rho);
            g(&sample) * self.jacobian(rho)
        })
    }

    /// Panel with weight `(b - ρ)^α (ρ - a)^β`. A nonzero `α` is only used
    /// when `b` is the ray end, a nonzero `β` only when `a` is the centre.
    fn jacobi_panel<G: Fn(&BallSample) -> f64>(&self, g: &G, a: f64, b: f64, alpha: f64, beta: f64) -> f64 {
        let rule = jacobi_cached(RAY_NODES, alpha, beta).expect("valid Jacobi exponents");
        let r = self.r_end;
        let dim = self.integrator.dim;
        let at_end = b == r;
        jacobi_integrate_on(&rule, alpha, beta, a, b, |rho, to_b, from_a| {
            let to_end = if at_end { to_b } else { r - rho };
            let sample = self.sample(rho, to_end);
            let mut v = g(&sample);
            let jac_exp = (dim - 1) as f64 - beta;
            if jac_exp != 0.0 {
                // at the centre the distance from the left end is ρ itself
                let base = if a == 0.0 { from_a } else { rho };
                v *= base.powf(jac_exp);
            }
            if alpha != 0.0 {
                v /= to_b.powf(alpha);
            }
            v
        })
    }
}

fn azimuthal_trapezoid(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut m = MIN_AZIMUTHS;
    let mut sum: f64 = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).sum();
    let mut value = 2.0 * PI * sum / m as f64;
    while m < MAX_AZIMUTHS {
        let extra: f64 = (0..m).map(|j| f(2.0 * PI * (j as f64 + 0.5) / m as f64)).sum();
        sum += extra;
        m *= 2;
        let next = 2.0 * PI * sum / m as f64;
        if (next - value).abs() <= 0.1 * tol * next.abs().max(1e-300) {
            return Ok(next);
        }
        value = next;
    }
    Err(Error::non_convergence(
        "ball_integrate",
        format!("azimuthal rule did not settle with {MAX_AZIMUTHS} points"),
    ))
}

/// `∫_{B_1} g(y) dy` with estimated relative error `tol`.
///
/// With `interior_singularity = Some(x)` the integrand may behave like
/// `|x - y|^{2s - N}` near `x`; polar coordinates are then centred at `x`.
pub fn ball_integrate<G: Fn(&[f64]) -> f64>(
    params: &ProblemParams,
    g: G,
    tol: f64,
    interior_singularity: Option<&[f64]>,
) -> Result<f64> {
    params.require_ball_dim("ball_integrate")?;
    let mut integrator = BallIntegrator::new(params.dim, params.s)?.tolerance(tol);
    if let Some(x) = interior_singularity {
        let exponent = ((params.dim - 1) as f64).min(2.0 * params.s - 1.0);
        integrator = integrator.center(x, EndBehavior::Graded { exponent })?;
    }
    integrator.integrate(|sample| g(sample.point()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize, s: f64) -> ProblemParams {
        ProblemParams::new(dim, s).unwrap()
    }

    #[test]
    fn unit_disc_area() {
        let v = ball_integrate(&params(2, 0.5), |_| 1.0, 1e-10, None).unwrap();
        assert!((v - PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn boundary_weight_n1() {
        let v = ball_integrate(&params(1, 0.5), |y| (1.0 - y[0] * y[0]).powf(-0.5), 1e-10, None).unwrap();
        assert!((v - PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn boundary_weight_n3() {
        let v = BallIntegrator::new(3, 0.5)
            .unwrap()
            .integrate(|s| s.deficit.powf(-0.5))
            .unwrap();
        assert!((v - PI * PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn off_center_polar_frame() {
        // the volume of the ball does not depend on the polar centre
        for dim in 1..=3 {
            let c = vec![0.3; dim];
            let v = BallIntegrator::new(dim, 0.75)
                .unwrap()
                .center(&c, EndBehavior::Regular)
                .unwrap()
                .radial_breaks(&[0.2, 0.6])
                .integrate(|s| {
                    let r2: f64 = s.point().iter().map(|t| t * t).sum();
                    if r2 < 0.36 {
                        2.0
                    } else {
                        1.0
                    }
                })
                .unwrap();
            let vol = crate::special::ball_volume(dim);
            let exact = vol * (1.0 + 0.6f64.powi(dim as i32));
            assert!((v - exact).abs() < 1e-9 * exact, "N = {dim}: {v} vs {exact}");
        }
    }

    #[test]
    fn support_ball_volume() {
        for dim in 1..=3 {
            let mut xi = vec![0.0; dim];
            xi[0] = 0.5;
            let v = BallIntegrator::new(dim, 0.5)
                .unwrap()
                .support_ball(&xi, 0.1)
                .integrate(|_| 1.0)
                .unwrap();
            let exact = crate::special::ball_volume(dim) * 0.1f64.powi(dim as i32);
            assert!((v - exact).abs() < 1e-9 * exact, "N = {dim}: {v} vs {exact}");
        }
    }

    #[test]
    fn singular_center() {
        // ∫_{B_1} |x - y|^{-1} dy in R^3 for |x| = a equals 2π(1 - a²/3)
        let x = [0.4, 0.0, 0.0];
        let v = ball_integrate(
            &params(3, 1.0),
            |y| {
                let d = ((y[0] - x[0]).powi(2) + y[1] * y[1] + y[2] * y[2]).sqrt();
                1.0 / d
            },
            1e-10,
            Some(&x),
        )
        .unwrap();
        let exact = 2.0 * PI * (1.0 - 0.16 / 3.0);
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn boundary_center() {
        // ∫_{B_1} |θ - y|^{-1} dy in R^3 equals 2π·(2/3)
        let theta = [0.0, 0.0, 1.0];
        let v = BallIntegrator::new(3, 1.0)
            .unwrap()
            .center(&theta, EndBehavior::Exact { exponent: 1.0 })
            .unwrap()
            .axisymmetric(true)
            .integrate(|s| 1.0 / s.rho)
            .unwrap();
        let exact = 4.0 * PI / 3.0;
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }
}

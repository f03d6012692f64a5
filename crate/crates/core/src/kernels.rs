//! Green function, Martin kernel, Poisson kernel and the spherical moments
//! `T_{N,τ}` on the unit ball.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_point, check_unit, deficit, distance, norm};
use crate::quadrature::adaptive::{self, Tolerance, DEFAULT_BUDGET};
use crate::special::{sphere_measure, GreenTail, LogBranch, ProblemParams};

/// Below this distance two points are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-14;

/// A pair of points together with
/// `r0 = (1 - |x|^2)(1 - |y|^2) / |x - y|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r0: f64,
}

impl KernelPoint {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::domain("KernelPoint", "points have different dimensions"));
        }
        check_point("KernelPoint", x, x.len())?;
        check_point("KernelPoint", y, y.len())?;
        for p in [x, y] {
            if norm(p) > 1.0 + 1e-12 {
                return Err(Error::domain("KernelPoint", format!("|{p:?}| exceeds 1")));
            }
        }
        let d = distance(x, y);
        if d < COINCIDENCE_TOL {
            return Err(Error::Coincidence {
                op: "KernelPoint",
                distance: d,
            });
        }
        let r0 = deficit(x).max(0.0) * deficit(y).max(0.0) / (d * d);
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            r0,
        })
    }

    pub fn distance(&self) -> f64 {
        distance(&self.x, &self.y)
    }
}

/// Green function evaluator with the tail integral precomputed.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    params: ProblemParams,
    kappa: f64,
    tail: GreenTail,
    printed_log: bool,
}

impl GreenKernel {
    pub fn new(params: &ProblemParams) -> Result<Self> {
        let printed_log = params.is_log_branch() && params.dim == 1 && params.log_branch == LogBranch::Printed;
        Ok(Self {
            params: *params,
            kappa: crate::special::kappa(params.dim, params.s)?,
            tail: GreenTail::new(params.dim, params.s)?,
            printed_log,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// `G(x, y)` from the distance `d = |x - y|` and the deficits
    /// `1 - |x|^2`, `1 - |y|^2`.
    pub fn from_parts(&self, d: f64, dx: f64, dy: f64) -> f64 {
        if dx <= 0.0 || dy <= 0.0 {
            return 0.0;
        }
        if self.printed_log {
            // 1 - x·y = (dx + dy + d²)/2
            let a = 0.5 * (dx + dy + d * d);
            return self.kappa * ((a + (dx * dy).sqrt()) / d).ln();
        }
        let r0 = dx * dy / (d * d);
        let radial = d.powf(2.0 * self.params.s - self.params.dim as f64);
        self.kappa * radial * self.tail.eval(r0)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_point("green", x, self.params.dim)?;
        check_point("green", y, self.params.dim)?;
        let kp = KernelPoint::new(x, y).map_err(|e| match e {
            Error::Coincidence { distance, .. } => Error::Coincidence { op: "green", distance },
            Error::Domain { detail, .. } => Error::Domain { op: "green", detail },
            other => other,
        })?;
        Ok(self.from_parts(kp.distance(), deficit(x).max(0.0), deficit(y).max(0.0)))
    }
}

/// `G_s(x, y)` on the unit ball.
pub fn green(params: &ProblemParams, x: &[f64], y: &[f64]) -> Result<f64> {
    GreenKernel::new(params)?.eval(x, y)
}

/// Martin kernel from the deficit `1 - |y|^2` and the distance `|θ - y|`.
pub(crate) fn martin_from_parts(params: &ProblemParams, prefactor: f64, dy: f64, dist: f64) -> f64 {
    prefactor * dy.powf(params.s) / dist.powi(params.dim as i32)
}

/// `ν (2κ/s) (1 - |y|^2)^s / |θ - y|^N`.
pub fn martin(params: &ProblemParams, y: &[f64], theta: &[f64]) -> Result<f64> {
    check_point("martin", y, params.dim)?;
    check_unit("martin", theta, params.dim)?;
    let ny = norm(y);
    if ny >= 1.0 {
        return Err(Error::domain("martin", format!("|y| = {ny} must be below 1")));
    }
    Ok(martin_from_parts(
        params,
        params.martin_at_origin(),
        deficit(y),
        distance(y, theta),
    ))
}

const RICHARDSON_DEPTH: usize = 5;
const MARTIN_LIMIT_RTOL: f64 = 1e-3;

/// Martin kernel in the `GreenLimit` scale computed as the limit of
/// `2 G(y, z) / (1 - |z|^2)^s` along `z_k = (1 - 2^{-k}) θ`, `k = 4..=k_max`,
/// with Richardson extrapolation in `h = 2^{-k}`.
pub fn martin_from_green_limit(params: &ProblemParams, y: &[f64], theta: &[f64], k_max: usize) -> Result<f64> {
    check_point("martin_from_green_limit", y, params.dim)?;
    check_unit("martin_from_green_limit", theta, params.dim)?;
    if k_max < 5 {
        return Err(Error::domain("martin_from_green_limit", "k_max must be at least 5"));
    }
    let ny = norm(y);
    if ny >= 1.0 {
        return Err(Error::domain(
            "martin_from_green_limit",
            format!("|y| = {ny} must be below 1"),
        ));
    }
    let kernel = GreenKernel::new(params)?;
    let dy = deficit(y);
    let mut table: Vec<Vec<f64>> = Vec::new();
    for k in 4..=k_max {
        let h = 0.5f64.powi(k as i32);
        let t = 1.0 - h;
        let z: Vec<f64> = theta.iter().map(|c| t * c).collect();
        let dz = h * (2.0 - h);
        let d = distance(y, &z);
        let value = 2.0 * kernel.from_parts(d, dy, dz) / dz.powf(params.s);
        let mut row = vec![value];
        if let Some(prev) = table.last() {
            for j in 1..=prev.len().min(RICHARDSON_DEPTH) {
                let factor = 2f64.powi(j as i32) - 1.0;
                let next = row[j - 1] + (row[j - 1] - prev[j - 1]) / factor;
                row.push(next);
            }
        }
        table.push(row);
    }
    let last = table.last().expect("at least two rows");
    let prev = &table[table.len() - 2];
    let col = (last.len() - 1).min(prev.len() - 1);
    let value = last[col];
    let change = (value - prev[col]).abs() / value.abs();
    if !(change <= MARTIN_LIMIT_RTOL) {
        return Err(Error::non_convergence(
            "martin_from_green_limit",
            format!("successive extrapolants differ by {change:e} (relative)"),
        ));
    }
    Ok(value)
}

/// Classical Poisson kernel `(1/ω_{N-1}) (1 - |x|^2) / |θ - x|^N`.
pub fn poisson(x: &[f64], theta: &[f64], dim: usize) -> Result<f64> {
    check_point("poisson", x, dim)?;
    check_unit("poisson", theta, dim)?;
    let nx = norm(x);
    if nx >= 1.0 {
        return Err(Error::domain("poisson", format!("|x| = {nx} must be below 1")));
    }
    Ok(deficit(x) / (sphere_measure(dim) * distance(x, theta).powi(dim as i32)))
}

const T_MOMENT_TOL: f64 = 1e-13;

/// `T_{N,τ}(ξ) = (1/ω_{N-1}) ∫_{S^{N-1}} |θ - ξ|^τ dσ(θ)`.
pub fn t_moment(dim: usize, tau: f64, xi: &[f64]) -> Result<f64> {
    check_point("t_moment", xi, dim)?;
    if !(tau > 0.0) {
        return Err(Error::domain("t_moment", format!("τ = {tau} must be positive")));
    }
    let a = norm(xi);
    if a >= 1.0 {
        return Err(Error::domain("t_moment", format!("|ξ| = {a} must be below 1")));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    let half = 0.5 * tau;
    match dim {
        1 => Ok(0.5 * ((1.0 - xi[0]).powf(tau) + (1.0 + xi[0]).powf(tau))),
        2 => {
            // |θ - ξ|^2 = (1 - a)^2 + 4a sin^2(φ/2)
            let g = |phi: f64| {
                let s = (0.5 * phi).sin();
                ((1.0 - a).powi(2) + 4.0 * a * s * s).powf(half)
            };
            let v = adaptive::integrate(&g, 0.0, PI, Tolerance::relative(T_MOMENT_TOL), &[], DEFAULT_BUDGET)?;
            Ok(v.0 / PI)
        }
        3 => {
            // zonal reduction along ξ: |θ - ξ|^2 = (1 - a)^2 + 2a(1 - z)
            let g = |z: f64| ((1.0 - a).powi(2) + 2.0 * a * (1.0 - z)).powf(half);
            let v = adaptive::integrate(&g, -1.0, 1.0, Tolerance::relative(T_MOMENT_TOL), &[], DEFAULT_BUDGET)?;
            Ok(0.5 * v.0)
        }
        _ => Err(Error::UnsupportedDimension { op: "t_moment", dim }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use crate::special::Normalization;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(dim: usize, s: f64) -> ProblemParams {
        ProblemParams::new(dim, s).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize, rmax: f64) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-rmax..rmax)).collect();
            if norm(&x) < rmax {
                return x;
            }
        }
    }

    #[test]
    fn green_log_branch_printed_value() {
        let v = green(&p(1, 0.5), &[0.0], &[0.5]).unwrap();
        let exact = ((1.0 + 0.75f64.sqrt()) / 0.5).ln() / (2.0 * PI);
        assert!((v - exact).abs() < 1e-14, "{v}");
        assert!((v - 0.209_600_4).abs() < 1e-7);
    }

    #[test]
    fn green_log_branch_consistent_is_twice_printed() {
        let printed = green(&p(1, 0.5), &[0.2], &[-0.5]).unwrap();
        let consistent = green(&p(1, 0.5).with_log_branch(LogBranch::Consistent), &[0.2], &[-0.5]).unwrap();
        assert!((consistent - 2.0 * printed).abs() < 1e-13);
    }

    #[test]
    fn green_two_dimensional_laplacian() {
        // (1/4π) ln(1 + r0)
        let x = [0.3, -0.2];
        let y = [-0.1, 0.5];
        let kp = KernelPoint::new(&x, &y).unwrap();
        let v = green(&p(2, 1.0), &x, &y).unwrap();
        assert!((v - kp.r0.ln_1p() / (4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn green_newtonian_three_dimensional() {
        // classical image formula for -Δ on the unit ball in R^3
        let x = [0.3, 0.1, -0.2];
        let y = [-0.4, 0.2, 0.1];
        let v = green(&p(3, 1.0), &x, &y).unwrap();
        let nx = norm(&x);
        let xstar: Vec<f64> = x.iter().map(|c| c / (nx * nx)).collect();
        let exact = (1.0 / distance(&x, &y) - 1.0 / (nx * distance(&xstar, &y))) / (4.0 * PI);
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn green_errors() {
        assert!(matches!(
            green(&p(2, 0.5), &[0.1, 0.1], &[0.1, 0.1]),
            Err(Error::Coincidence { .. })
        ));
        assert!(matches!(
            green(&p(2, 0.5), &[1.1, 0.0], &[0.1, 0.1]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn green_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, s) in &[
            (1, 0.25),
            (1, 0.5),
            (1, 0.75),
            (2, 0.5),
            (2, 1.0),
            (3, 0.25),
            (3, 0.75),
            (3, 1.5),
        ] {
            let k = GreenKernel::new(&p(n, s)).unwrap();
            for _ in 0..100 {
                let x = random_point(&mut rng, n, 1.0);
                let y = random_point(&mut rng, n, 1.0);
                let a = k.eval(&x, &y).unwrap();
                let b = k.eval(&y, &x).unwrap();
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0), "({n}, {s})");
            }
        }
    }

    #[test]
    fn green_boundary_decay() {
        for &(n, s) in &[(1, 0.5), (2, 0.75), (3, 0.25)] {
            let k = GreenKernel::new(&p(n, s)).unwrap();
            let x = vec![0.1; n];
            let mut prev = f64::INFINITY;
            for j in 4..=12 {
                let mut y = vec![0.0; n];
                y[0] = -(1.0 - 0.5f64.powi(j));
                let v = k.eval(&x, &y).unwrap();
                assert!(v < prev && v > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn martin_examples() {
        let g = p(1, 0.5).with_normalization(Normalization::GreenLimit);
        assert!((martin(&g, &[0.0], &[1.0]).unwrap() - 2.0 / PI).abs() < 1e-15);
        let d = p(1, 0.5);
        assert!((martin(&d, &[0.0], &[1.0]).unwrap() - 0.5f64.sqrt() * 2.0 / PI).abs() < 1e-15);
        assert!(martin(&d, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn martin_sphere_average_at_origin() {
        for &(n, s) in &[(2, 0.5), (3, 0.25)] {
            let g = p(n, s).with_normalization(Normalization::GreenLimit);
            let rule = sphere_rule(n, 16).unwrap();
            let y = vec![0.0; n];
            let avg = rule.integrate(|t| martin(&g, &y, t).unwrap()) / sphere_measure(n);
            assert!((avg - g.martin_at_origin()).abs() < 1e-13);
        }
    }

    #[test]
    fn martin_limit_three_dimensional() {
        let g = p(3, 0.5).with_normalization(Normalization::GreenLimit);
        let v = martin_from_green_limit(&g, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 12).unwrap();
        assert!((v - 1.0 / (PI * PI)).abs() / v < 1e-3, "{v}");
    }

    #[test]
    fn martin_limit_log_branch_factor_two() {
        let printed = p(1, 0.5).with_normalization(Normalization::GreenLimit);
        let consistent = printed.with_log_branch(LogBranch::Consistent);
        let explicit = martin(&printed, &[0.5], &[1.0]).unwrap();
        assert!((explicit - 1.102_657_8).abs() < 1e-6);
        let a = martin_from_green_limit(&printed, &[0.5], &[1.0], 14).unwrap();
        let b = martin_from_green_limit(&consistent, &[0.5], &[1.0], 14).unwrap();
        assert!((a / explicit - 0.5).abs() < 1e-3, "{a}");
        assert!((b / explicit - 1.0).abs() < 1e-3, "{b}");
    }

    #[test]
    fn poisson_examples() {
        assert!((poisson(&[0.0, 0.0], &[1.0, 0.0], 2).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!((poisson(&[0.5], &[1.0], 1).unwrap() - 0.75).abs() < 1e-15);
        let rule = sphere_rule(2, 256).unwrap();
        let total = rule.integrate(|t| poisson(&[0.5, 0.0], t, 2).unwrap());
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn t_moment_examples() {
        for n in 1..=3 {
            assert_eq!(t_moment(n, 2.5, &vec![0.0; n]).unwrap(), 1.0);
        }
        assert!((t_moment(1, 2.0, &[0.5]).unwrap() - 1.25).abs() < 1e-15);
        assert!((t_moment(2, 4.0, &[0.5, 0.0]).unwrap() - 2.0625).abs() < 1e-12);
        for &a in &[0.1, 0.5, 0.9, 0.99] {
            let v = t_moment(3, 2.0, &[0.0, a, 0.0]).unwrap();
            assert!((v - (1.0 + a * a)).abs() < 1e-12);
            // closed form of the zonal integral
            let tau = 1.7;
            let exact = ((1.0 + a).powf(tau + 2.0) - (1.0 - a).powf(tau + 2.0)) / (2.0 * a * (tau + 2.0));
            let v = t_moment(3, tau, &[a, 0.0, 0.0]).unwrap();
            assert!((v - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn t_moment_matches_sphere_rule() {
        let xi = [0.3, -0.2, 0.4];
        let rule = sphere_rule(3, 48).unwrap();
        let brute = rule.integrate(|t| distance(t, &xi).powf(3.0)) / (4.0 * PI);
        assert!((t_moment(3, 3.0, &xi).unwrap() - brute).abs() < 1e-12);
        let xi2 = [0.6, 0.1];
        let rule = sphere_rule(2, 400).unwrap();
        let brute = rule.integrate(|t| distance(t, &xi2).powf(1.5)) / (2.0 * PI);
        assert!((t_moment(2, 1.5, &xi2).unwrap() - brute).abs() < 1e-12);
    }
}

//! Gamma-family special functions, the kernel constants of the fractional
//! Laplacian on the unit ball, and the problem parameters shared by every
//! other module.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss::{jacobi_unit_cached, UnitRule};

/// Tolerance used to detect the log branch `N = 2s`.
pub const LOG_BRANCH_TOL: f64 = 1e-12;

/// Which limit defines the Martin kernel and therefore the scale of every
/// reported fractional normal derivative.
///
/// `GreenLimit` is `lim 2 G(y, z) / (1 - |z|^2)^s`, the closed form printed for
/// the Martin kernel on the ball. `DeltaLimit` is `lim G(y, z) / dist(z, ∂B)^s`,
/// which differs by the factor `2^(s-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Normalization {
    GreenLimit,
    #[default]
    DeltaLimit,
}

impl Normalization {
    /// Scale factor relative to the `GreenLimit` closed form.
    pub fn factor(self, s: f64) -> f64 {
        match self {
            Normalization::GreenLimit => 1.0,
            Normalization::DeltaLimit => 2f64.powf(s - 1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::GreenLimit => "GreenLimit",
            Normalization::DeltaLimit => "DeltaLimit",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "greenlimit" | "green" => Ok(Normalization::GreenLimit),
            "deltalimit" | "delta" => Ok(Normalization::DeltaLimit),
            other => Err(format!("unknown normalization `{other}`")),
        }
    }
}

/// Constant in front of the closed-form logarithmic Green function for
/// `(N, s) = (1, 1/2)`.
///
/// `Printed` uses `κ_{1,1/2} = 1/(2π)`. `Consistent` uses the value obtained by
/// letting the general formula run through `N = 2s`, which is twice as large
/// and agrees with the Martin kernel and with the torsion function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum LogBranch {
    #[default]
    Printed,
    Consistent,
}

/// Dimension, order and kernel conventions for one problem on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub s: f64,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub log_branch: LogBranch,
}

impl ProblemParams {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("ProblemParams", "dimension must be at least 1"));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::domain(
                "ProblemParams",
                format!("order s = {s} must be positive"),
            ));
        }
        Ok(Self {
            dim,
            s,
            normalization: Normalization::default(),
            log_branch: LogBranch::default(),
        })
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_log_branch(mut self, log_branch: LogBranch) -> Self {
        self.log_branch = log_branch;
        self
    }

    /// `N == 2s` up to [`LOG_BRANCH_TOL`].
    pub fn is_log_branch(&self) -> bool {
        (2.0 * self.s - self.dim as f64).abs() <= LOG_BRANCH_TOL
    }

    /// The normalization factor `ν` (1 or `2^(s-1)`).
    pub fn nu(&self) -> f64 {
        self.normalization.factor(self.s)
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.dim, self.s).expect("validated parameters")
    }

    /// `ν · 2κ_{N,s} / s`, the value of the Martin kernel at the origin.
    pub fn martin_at_origin(&self) -> f64 {
        self.nu() * 2.0 * self.kappa() / self.s
    }

    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    pub(crate) fn require_ball_dim(&self, op: &'static str) -> Result<()> {
        if (1..=3).contains(&self.dim) {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension { op, dim: self.dim })
        }
    }
}

// Stirling coefficients B_{2k} / (2k (2k-1)).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const STIRLING_SHIFT: f64 = 15.0;

fn stirling_log_gamma(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// `ln Γ(x)` for `x > 0`.
///
/// Stirling's series at `x + n ≥ 15`, shifted back with the recurrence.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "log_gamma",
            format!("x = {x} must be positive and finite"),
        ));
    }
    if x >= STIRLING_SHIFT {
        return Ok(stirling_log_gamma(x));
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < STIRLING_SHIFT {
        prod *= z;
        z += 1.0;
    }
    Ok(stirling_log_gamma(z) - prod.ln())
}

fn sin_pi(x: f64) -> f64 {
    // reduce to [-1, 1] first so that integers give an exact zero
    let r = x - 2.0 * (x / 2.0).round();
    (PI * r).sin()
}

/// `Γ(x)` for real `x` away from the poles at `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if x > 0.0 {
        return Ok(log_gamma(x)?.exp());
    }
    if x == x.round() {
        return Err(Error::domain("gamma", format!("pole at x = {x}")));
    }
    // reflection formula
    let g = log_gamma(1.0 - x)?.exp();
    Ok(PI / (sin_pi(x) * g))
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for positive arguments.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

/// `κ_{N,s} = Γ(N/2) / (π^{N/2} 4^s Γ(s)^2)`.
pub fn kappa(dim: usize, s: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::domain("kappa", "dimension must be at least 1"));
    }
    if !(s > 0.0) {
        return Err(Error::domain("kappa", format!("s = {s} must be positive")));
    }
    let half_n = dim as f64 / 2.0;
    let ln = log_gamma(half_n)? - half_n * PI.ln() - s * 4f64.ln() - 2.0 * log_gamma(s)?;
    Ok(ln.exp())
}

/// Normalization constant `c_{N,s}` of the singular-integral form of the
/// fractional Laplacian. Reported only; the solver never uses it.
pub fn c_constant(dim: usize, s: f64) -> Result<f64> {
    if dim == 0 || !(s > 0.0) {
        return Err(Error::domain("c_constant", format!("invalid (N, s) = ({dim}, {s})")));
    }
    if (s - s.round()).abs() < 1e-12 {
        return Err(Error::domain("c_constant", format!("Γ(1 - s) has a pole at s = {s}")));
    }
    let half_n = dim as f64 / 2.0;
    let num = s * 4f64.powf(s) * gamma(half_n + s)?;
    Ok(num / (PI.powf(half_n) * gamma(1.0 - s)?))
}

/// Surface measure `ω_{N-1} = 2π^{N/2}/Γ(N/2)` of the unit sphere in `R^N`.
pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let half_n = dim as f64 / 2.0;
            2.0 * PI.powf(half_n) / log_gamma(half_n).expect("positive").exp()
        }
    }
}

/// Volume `ω_{N-1}/N` of the unit ball in `R^N`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_measure(dim) / dim as f64
}

/// Upper limit of the Green tail integral. `Infinite` is only meaningful when
/// the integral converges, i.e. `N > 2s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    Finite(f64),
    Infinite,
}

const TAIL_NODES: usize = 24;
const SERIES_TERMS: usize = 80;

#[derive(Debug, Clone)]
enum TailMode {
    /// `N > 2s`: the tail beyond `t = 1` converges and is evaluated as a
    /// complement.
    Convergent { half: f64, rule: std::sync::Arc<UnitRule> },
    /// `N <= 2s`: binomial series of `(1 - z)^{s-1}` against `z^{b-1}`.
    Series {
        constant: f64,
        /// `(exponent b + k, coefficient C_k / (b + k))` for `b + k != 0`.
        terms: Vec<(f64, f64)>,
        /// Coefficient of `ln(1/(2ε))` when some `b + k` vanishes.
        log_coeff: f64,
    },
}

/// Precomputed evaluator for `∫_0^{r0} t^{s-1} (1+t)^{-N/2} dt`.
///
/// For `r0 <= 1` the substitution `t = r0 u` leaves the Jacobi weight
/// `u^{s-1}` on `[0, 1]`. Beyond `t = 1` the variable `z = 1/(1+t)` turns the
/// remainder into `∫_ε^{1/2} z^{b-1}(1-z)^{s-1} dz` with `b = N/2 - s` and
/// `ε = 1/(1 + r0)`.
#[derive(Debug, Clone)]
pub struct GreenTail {
    dim: usize,
    s: f64,
    b: f64,
    head: std::sync::Arc<UnitRule>,
    at_one: f64,
    mode: TailMode,
}

impl GreenTail {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if dim == 0 || !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(
                "green_tail_integral",
                format!("invalid (N, s) = ({dim}, {s})"),
            ));
        }
        let b = dim as f64 / 2.0 - s;
        let head = jacobi_unit_cached(TAIL_NODES, s - 1.0)?;
        let half_n = dim as f64 / 2.0;
        let at_one = head.integrate(|u| (1.0 + u).powf(-half_n));
        let mode = if b > LOG_BRANCH_TOL {
            let rule = jacobi_unit_cached(TAIL_NODES, b - 1.0)?;
            let half = 0.5f64.powf(b) * rule.integrate(|u| (1.0 - 0.5 * u).powf(s - 1.0));
            TailMode::Convergent { half, rule }
        } else {
            let b = if b.abs() <= LOG_BRANCH_TOL { 0.0 } else { b };
            let a = s - 1.0;
            let mut coeff = 1.0;
            let mut constant = 0.0;
            let mut terms = Vec::with_capacity(SERIES_TERMS);
            let mut log_coeff = 0.0;
            for k in 0..SERIES_TERMS {
                let e = b + k as f64;
                if e.abs() <= LOG_BRANCH_TOL {
                    log_coeff = coeff;
                } else {
                    constant += coeff * 0.5f64.powf(e) / e;
                    terms.push((e, coeff / e));
                }
                coeff *= (k as f64 - a) / (k as f64 + 1.0);
                if coeff == 0.0 {
                    break;
                }
            }
            TailMode::Series {
                constant,
                terms,
                log_coeff,
            }
        };
        Ok(Self {
            dim,
            s,
            b,
            head,
            at_one,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Value at `r0 = +∞`, when finite (equals `B(s, N/2 - s)`).
    pub fn total(&self) -> Result<f64> {
        match &self.mode {
            TailMode::Convergent { half, .. } => Ok(self.at_one + half),
            TailMode::Series { .. } => Err(Error::Divergence {
                op: "green_tail_integral",
                detail: format!("N = {} <= 2s = {}", self.dim, 2.0 * self.s),
            }),
        }
    }

    /// Evaluates the integral for a finite, nonnegative upper limit.
    pub fn eval(&self, r0: f64) -> f64 {
        if r0 <= 0.0 {
            return 0.0;
        }
        if r0 <= 1.0 {
            let half_n = self.dim as f64 / 2.0;
            return r0.powf(self.s) * self.head.integrate(|u| (1.0 + r0 * u).powf(-half_n));
        }
        let eps = 1.0 / (1.0 + r0);
        match &self.mode {
            TailMode::Convergent { half, rule } => {
                let s1 = self.s - 1.0;
                let near = eps.powf(self.b) * rule.integrate(|u| (1.0 - eps * u).powf(s1));
                self.at_one + (half - near)
            }
            TailMode::Series {
                constant,
                terms,
                log_coeff,
            } => {
                let mut acc = 0.0;
                let mut pow_k = 1.0;
                let eps_b = eps.powf(self.b);
                // terms[k] has exponent b + k except for the skipped log term;
                // recompute ε^{b+k} from the stored exponent when one was skipped
                let skipped = *log_coeff != 0.0;
                for &(e, c) in terms {
                    let p = if skipped { eps.powf(e) } else { eps_b * pow_k };
                    let term = c * p;
                    acc += term;
                    pow_k *= eps;
                    if term.abs() < 1e-18 * acc.abs() {
                        break;
                    }
                }
                let mut value = self.at_one + constant - acc;
                if *log_coeff != 0.0 {
                    value += log_coeff * (0.5 / eps).ln();
                }
                value
            }
        }
    }

    pub fn eval_bound(&self, r0: TailBound) -> Result<f64> {
        match r0 {
            TailBound::Finite(r) if r >= 0.0 && r.is_finite() => Ok(self.eval(r)),
            TailBound::Finite(r) => Err(Error::domain(
                "green_tail_integral",
                format!("upper limit r0 = {r} must be finite and nonnegative"),
            )),
            TailBound::Infinite => self.total(),
        }
    }
}

/// `∫_0^{r0} t^{s-1} (1+t)^{-N/2} dt`.
pub fn green_tail_integral(dim: usize, s: f64, r0: TailBound) -> Result<f64> {
    GreenTail::new(dim, s)?.eval_bound(r0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-14);
        assert!((log_gamma(4.0).unwrap() - 6f64.ln()).abs() < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_recurrence() {
        let mut x = 0.5;
        while x <= 20.0 {
            let d = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap() - x.ln();
            assert!(d.abs() <= 1e-12, "x = {x}: {d}");
            x += 0.37;
        }
    }

    #[test]
    fn gamma_reflection() {
        // Γ(-1/2) = -2√π
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-14);
        assert!(gamma(-2.0).is_err());
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
    }

    #[test]
    fn kappa_examples() {
        assert!(rel(kappa(1, 0.5).unwrap(), 1.0 / (2.0 * PI)) < 1e-14);
        assert!(rel(kappa(3, 0.5).unwrap(), 1.0 / (4.0 * PI * PI)) < 1e-14);
        assert!(rel(kappa(1, 1.0).unwrap(), 0.25) < 1e-14);
        assert!(kappa(2, 0.0).is_err());
        for n in 1..=3 {
            let direct = gamma(n as f64 / 2.0).unwrap() / (4.0 * PI.powf(n as f64 / 2.0));
            assert!(rel(kappa(n, 1.0).unwrap(), direct) < 1e-14);
        }
    }

    #[test]
    fn c_constant_examples() {
        assert!(rel(c_constant(1, 0.5).unwrap(), 1.0 / PI) < 1e-13);
        assert!(rel(c_constant(2, 0.5).unwrap(), 0.5 / PI) < 1e-13);
        assert!((c_constant(1, 0.25).unwrap() - 0.199_471_140_200_716_3).abs() < 1e-12);
        assert!(c_constant(2, 1.0).is_err());
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_measure(1), 2.0);
        assert!(rel(sphere_measure(2), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_measure(3), 4.0 * PI) < 1e-15);
        // ω_3 = 2π²
        assert!(rel(sphere_measure(4), 2.0 * PI * PI) < 1e-14);
    }

    #[test]
    fn tail_integral_examples() {
        let v = green_tail_integral(3, 0.5, TailBound::Infinite).unwrap();
        assert!(rel(v, 2.0) < 1e-12, "{v}");
        let v = green_tail_integral(2, 1.0, TailBound::Finite(1.0)).unwrap();
        assert!(rel(v, 2f64.ln()) < 1e-12, "{v}");
        assert_eq!(green_tail_integral(3, 0.25, TailBound::Finite(0.0)).unwrap(), 0.0);
        assert!(matches!(
            green_tail_integral(1, 0.5, TailBound::Infinite),
            Err(Error::Divergence { .. })
        ));
        assert!(green_tail_integral(2, 0.75, TailBound::Finite(-1.0)).is_err());
    }

    #[test]
    fn tail_integral_closed_forms_on_log_branch() {
        // (1, 1/2): 2 asinh(√r0);  (2, 1): ln(1 + r0)
        for &r0 in &[1e-6, 0.3, 1.0, 2.5, 40.0, 1e6, 1e14] {
            let a = green_tail_integral(1, 0.5, TailBound::Finite(r0)).unwrap();
            assert!(rel(a, 2.0 * r0.sqrt().asinh()) < 1e-11, "r0 = {r0}: {a}");
            let b = green_tail_integral(2, 1.0, TailBound::Finite(r0)).unwrap();
            assert!(rel(b, r0.ln_1p()) < 1e-11, "r0 = {r0}: {b}");
        }
    }

    #[test]
    fn tail_integral_increasing() {
        for &(n, s) in &[(1, 0.25), (1, 0.75), (2, 0.5), (3, 0.75), (3, 1.5), (3, 2.5)] {
            let tail = GreenTail::new(n, s).unwrap();
            let mut prev = 0.0;
            let mut r = 1e-4;
            while r < 1e8 {
                let v = tail.eval(r);
                assert!(v > prev, "(N, s) = ({n}, {s}) at r0 = {r}");
                prev = v;
                r *= 1.7;
            }
        }
    }
}

//! Piecewise-constant sources on the unit ball, their distribution
//! functions and Schwarz symmetrization, and the rearranged angular model
//! built from a boundary trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, norm};
use crate::quadrature::{QuadratureRule, RuleDomain};
use crate::special::{ball_volume, sphere_measure};

/// Radial step function `f(x) = v_i` for `r_{i-1} ≤ |x| < r_i`, with
/// `r_0 = 0` implicit and `r_k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct RadialProfile {
    /// Outer radii `r_1 < … < r_k = 1`.
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawProfile> for RadialProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        RadialProfile::new(raw.breakpoints, raw.values)
    }
}

impl RadialProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        const OP: &str = "RadialProfile";
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::domain(
                OP,
                "need one value per breakpoint and at least one piece",
            ));
        }
        let mut prev = 0.0;
        for &r in &breakpoints {
            if !(r > prev) || !r.is_finite() {
                return Err(Error::domain(OP, "breakpoints must be strictly increasing in (0, 1]"));
            }
            prev = r;
        }
        if *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::domain(OP, "the last breakpoint must be 1"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(OP, "values must be finite and nonnegative"));
        }
        Ok(Self { breakpoints, values })
    }

    /// The constant profile `f ≡ value`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![value])
    }

    /// Indicator of the annulus `a ≤ |x| < b`.
    pub fn annulus(a: f64, b: f64) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        if a > 0.0 {
            radii.push(a);
            values.push(0.0);
        }
        radii.push(b);
        values.push(1.0);
        if b < 1.0 {
            radii.push(1.0);
            values.push(0.0);
        }
        Self::new(radii, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(inner radius, outer radius, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .iter()
            .enumerate()
            .map(move |(i, &r)| (if i == 0 { 0.0 } else { self.breakpoints[i - 1] }, r, self.values[i]))
    }

    /// Value at radius `r` (right-continuous).
    pub fn value_at(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return if r == 1.0 { *self.values.last().unwrap() } else { 0.0 };
        }
        let i = self.breakpoints.partition_point(|&b| b <= r);
        self.values[i.min(self.values.len() - 1)]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn is_symmetric_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Same function with equal neighbouring pieces merged.
    pub fn canonical(&self) -> Self {
        let mut radii: Vec<f64> = Vec::with_capacity(self.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.len());
        for (_, r, v) in self.pieces() {
            if values.last() == Some(&v) {
                *radii.last_mut().unwrap() = r;
            } else {
                radii.push(r);
                values.push(v);
            }
        }
        Self {
            breakpoints: radii,
            values,
        }
    }

    /// Radii at which the function may jump, excluding 1.
    pub fn interior_breaks(&self) -> Vec<f64> {
        self.breakpoints[..self.breakpoints.len() - 1].to_vec()
    }

    /// Lebesgue measure of the set where this profile differs from `other`.
    pub fn measure_of_difference(&self, other: &RadialProfile, dim: usize) -> f64 {
        let mut cuts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut inner = 0.0;
        let mut total = 0.0;
        for r in cuts {
            let mid = 0.5 * (inner + r);
            if self.value_at(mid) != other.value_at(mid) {
                total += shell_volume(inner, r, dim);
            }
            inner = r;
        }
        total
    }

    /// Parses `"r1:v1,r2:v2,…"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (r, v) = item
                .split_once(':')
                .ok_or_else(|| Error::domain("RadialProfile::parse", format!("`{item}` is not of the form r:v")))?;
            let r: f64 = r
                .trim()
                .parse()
                .map_err(|_| Error::domain("RadialProfile::parse", format!("bad radius `{r}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::domain("RadialProfile::parse", format!("bad value `{v}`")))?;
            radii.push(r);
            values.push(v);
        }
        Self::new(radii, values)
    }

    /// Inverse of [`RadialProfile::parse`].
    pub fn to_spec_string(&self) -> String {
        self.pieces()
            .map(|(_, r, v)| format!("{r}:{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Volume of the shell `a ≤ |x| < b` in `R^N`.
pub fn shell_volume(a: f64, b: f64, dim: usize) -> f64 {
    ball_volume(dim) * (b.powi(dim as i32) - a.powi(dim as i32))
}

/// Constant bump `height · 1_{B_rho(center)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBump")]
pub struct BumpSource {
    center: Vec<f64>,
    rho: f64,
    height: f64,
}

#[derive(Deserialize)]
struct RawBump {
    center: Vec<f64>,
    rho: f64,
    height: f64,
}

impl TryFrom<RawBump> for BumpSource {
    type Error = Error;

    fn try_from(raw: RawBump) -> Result<Self> {
        if norm(&raw.center) == 0.0 {
            BumpSource::centered(raw.center.len(), raw.rho, raw.height)
        } else {
            BumpSource::new(raw.center, raw.rho, raw.height)
        }
    }
}

impl BumpSource {
    /// Off-centre bump with `0 < ρ < min(|ξ|, 1 - |ξ|)`.
    pub fn new(center: Vec<f64>, rho: f64, height: f64) -> Result<Self> {
        const OP: &str = "BumpSource";
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(OP, "centre must be a finite point"));
        }
        let a = norm(&center);
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain(OP, format!("|ξ| = {a} must lie in (0, 1)")));
        }
        if !(rho > 0.0 && rho < a.min(1.0 - a)) {
            return Err(Error::domain(
                OP,
                format!("ρ = {rho} must lie in (0, min(|ξ|, 1 - |ξ|)) = (0, {})", a.min(1.0 - a)),
            ));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::domain(OP, "height must be positive"));
        }
        Ok(Self { center, rho, height })
    }

    /// Bump centred at the origin, `0 < ρ < 1`.
    pub fn centered(dim: usize, rho: f64, height: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("BumpSource", "dimension must be at least 1"));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain("BumpSource", format!("ρ = {rho} must lie in (0, 1)")));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::domain("BumpSource", "height must be positive"));
        }
        Ok(Self {
            center: vec![0.0; dim],
            rho,
            height,
        })
    }

    /// `|B_ε|^{-1} 1_{B_ε(0)}`, of unit `L^1` norm.
    pub fn normalized_centered(dim: usize, eps: f64) -> Result<Self> {
        Self::centered(dim, eps, 1.0 / (ball_volume(dim) * eps.powi(dim as i32)))
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_centered(&self) -> bool {
        norm(&self.center) == 0.0
    }

    /// Copy with a different height.
    pub fn with_height(&self, height: f64) -> Self {
        Self { height, ..self.clone() }
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) * self.rho.powi(self.dim() as i32)
    }
}

/// A nonnegative bounded source supported in the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceFunction {
    Radial(RadialProfile),
    Bump(BumpSource),
}

impl From<RadialProfile> for SourceFunction {
    fn from(p: RadialProfile) -> Self {
        SourceFunction::Radial(p)
    }
}

impl From<BumpSource> for SourceFunction {
    fn from(b: BumpSource) -> Self {
        SourceFunction::Bump(b)
    }
}

impl SourceFunction {
    pub fn is_zero(&self) -> bool {
        match self {
            SourceFunction::Radial(p) => p.is_zero(),
            SourceFunction::Bump(_) => false,
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            SourceFunction::Radial(p) => p.sup(),
            SourceFunction::Bump(b) => b.height,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialProfile> {
        match self {
            SourceFunction::Radial(p) => Some(p),
            SourceFunction::Bump(_) => None,
        }
    }

    /// Multiplies the source by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            SourceFunction::Radial(p) => SourceFunction::Radial(RadialProfile {
                breakpoints: p.breakpoints.clone(),
                values: p.values.iter().map(|v| v * factor).collect(),
            }),
            SourceFunction::Bump(b) => SourceFunction::Bump(b.with_height(b.height * factor)),
        }
    }
}

/// Pointwise value; zero outside the closed unit ball.
pub fn eval_source(f: &SourceFunction, x: &[f64]) -> f64 {
    match f {
        SourceFunction::Radial(p) => {
            let r = norm(x);
            if r > 1.0 {
                0.0
            } else {
                p.value_at(r)
            }
        }
        SourceFunction::Bump(b) => {
            if distance(x, &b.center) < b.rho {
                b.height
            } else {
                0.0
            }
        }
    }
}

/// `μ_f(t) = |{f > t}|` in `R^N`.
pub fn distribution_mu(f: &SourceFunction, t: f64, dim: usize) -> f64 {
    match f {
        SourceFunction::Radial(p) => p
            .pieces()
            .filter(|(_, _, v)| *v > t)
            .map(|(a, b, _)| shell_volume(a, b, dim))
            .sum(),
        SourceFunction::Bump(b) => {
            if t < b.height {
                b.volume()
            } else {
                0.0
            }
        }
    }
}

/// Schwarz symmetrization as a non-increasing radial profile.
pub fn schwarz(f: &SourceFunction, dim: usize) -> RadialProfile {
    match f {
        SourceFunction::Radial(p) => schwarz_profile(p, dim),
        SourceFunction::Bump(b) => {
            RadialProfile::new(vec![b.rho, 1.0], vec![b.height, 0.0]).expect("valid bump radius")
        }
    }
}

/// `|{f ≥ level}| / |B_1|`, accumulated over maximal runs of consecutive
/// pieces in the original radius order.
fn super_level_content(p: &RadialProfile, level: f64, dim: usize) -> f64 {
    let n = dim as i32;
    let mut total = 0.0;
    let mut run_start: Option<f64> = None;
    for (a, _, v) in p.pieces() {
        if v >= level {
            run_start.get_or_insert(a);
        } else if let Some(start) = run_start.take() {
            total += a.powi(n) - start.powi(n);
        }
    }
    if let Some(start) = run_start {
        total += 1.0 - start.powi(n);
    }
    total
}

fn schwarz_profile(p: &RadialProfile, dim: usize) -> RadialProfile {
    if p.is_symmetric_decreasing() {
        return p.canonical();
    }
    let mut levels: Vec<f64> = p.values.clone();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut radii = Vec::with_capacity(levels.len());
    for (j, &v) in levels.iter().enumerate() {
        let r = if j + 1 == levels.len() {
            1.0
        } else {
            super_level_content(p, v, dim).powf(1.0 / dim as f64).min(1.0)
        };
        radii.push(r);
    }
    RadialProfile {
        breakpoints: radii,
        values: levels,
    }
}

/// `min(f, τ)`.
pub fn truncate(f: &SourceFunction, tau: f64) -> SourceFunction {
    match f {
        SourceFunction::Radial(p) => SourceFunction::Radial(truncate_profile(p, tau)),
        SourceFunction::Bump(b) => SourceFunction::Bump(b.with_height(b.height.min(tau))),
    }
}

pub fn truncate_profile(p: &RadialProfile, tau: f64) -> RadialProfile {
    RadialProfile {
        breakpoints: p.breakpoints.clone(),
        values: p.values.iter().map(|v| v.min(tau)).collect(),
    }
    .canonical()
}

/// `‖f‖_{L^p(B_1)}` from the piecewise representation.
pub fn lp_norm(f: &SourceFunction, p: f64, dim: usize) -> f64 {
    match f {
        SourceFunction::Radial(prof) => prof
            .pieces()
            .map(|(a, b, v)| v.powf(p) * shell_volume(a, b, dim))
            .sum::<f64>()
            .powf(1.0 / p),
        SourceFunction::Bump(b) => b.height * b.volume().powf(1.0 / p),
    }
}

/// Decreasing rearrangement of a radial grid function.
///
/// `values[i]` is taken as the value on the shell `(radii[i-1], radii[i]]`
/// with `radii[-1] = 0`; when the last radius is below 1 a zero piece fills
/// the remaining shell.
pub fn rearrange_radial_samples(radii: &[f64], values: &[f64], dim: usize) -> Result<RadialProfile> {
    const OP: &str = "rearrange_radial_samples";
    if radii.is_empty() || radii.len() != values.len() {
        return Err(Error::domain(OP, "need one value per radius"));
    }
    let mut prev = 0.0;
    for &r in radii {
        if !(r > prev && r <= 1.0) {
            return Err(Error::domain(OP, "radii must be strictly increasing in (0, 1]"));
        }
        prev = r;
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::domain(OP, "values must be finite and nonnegative"));
    }
    let n = dim as i32;
    let mut shells: Vec<(f64, f64, f64)> = Vec::with_capacity(radii.len() + 1);
    let mut inner = 0.0;
    for (&r, &v) in radii.iter().zip(values) {
        shells.push((r, r.powi(n) - f64::powi(inner, n), v));
        inner = r;
    }
    if inner < 1.0 {
        shells.push((1.0, 1.0 - f64::powi(inner, n), 0.0));
    }
    // values descending, ties by original radius ascending
    shells.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.total_cmp(&b.0)));
    let mut out_r: Vec<f64> = Vec::with_capacity(shells.len());
    let mut out_v: Vec<f64> = Vec::with_capacity(shells.len());
    let mut content = 0.0;
    let last = shells.len() - 1;
    for (i, &(_, dv, v)) in shells.iter().enumerate() {
        content += dv;
        let r = if i == last {
            1.0
        } else {
            content.powf(1.0 / dim as f64).min(1.0)
        };
        if let Some(&prev_r) = out_r.last() {
            if r <= prev_r {
                continue;
            }
        }
        if out_v.last() == Some(&v) {
            *out_r.last_mut().unwrap() = r;
        } else {
            out_r.push(r);
            out_v.push(v);
        }
    }
    *out_r.last_mut().unwrap() = 1.0;
    RadialProfile::new(out_r, out_v)
}

/// Values `ψ(θ_i) = u/δ^s` at the nodes of a sphere rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    rule: QuadratureRule,
    values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn new(rule: QuadratureRule, values: Vec<f64>) -> Result<Self> {
        if rule.domain() != RuleDomain::Sphere {
            return Err(Error::domain("BoundaryTrace", "rule must be a sphere rule"));
        }
        if rule.len() != values.len() {
            return Err(Error::domain("BoundaryTrace", "one value per node is required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("BoundaryTrace", "values must be finite"));
        }
        Ok(Self { rule, values })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.rule.dim()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(1/ω_{N-1}) ∫ ψ dσ`.
    pub fn mean(&self) -> f64 {
        let total: f64 = self.values.iter().zip(self.rule.weights()).map(|(v, w)| v * w).sum();
        total / sphere_measure(self.dim())
    }

    /// `((1/ω_{N-1}) ∫ ψ^{-1/s} dσ)^{-s}`.
    pub fn harmonic_mean(&self, s: f64) -> Result<f64> {
        if let Some(v) = self.values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Positivity {
                op: "harmonic_mean",
                detail: format!("boundary trace value {v} is not positive"),
            });
        }
        let total: f64 = self
            .values
            .iter()
            .zip(self.rule.weights())
            .map(|(v, w)| w * v.powf(-1.0 / s))
            .sum();
        Ok((total / sphere_measure(self.dim())).powf(-s))
    }

    pub(crate) fn require_positive(&self, op: &'static str) -> Result<()> {
        if let Some((i, v)) = self.values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Positivity {
                op,
                detail: format!("trace value {v} at node {i} is not positive"),
            });
        }
        Ok(())
    }
}

const BISECTION_ITERS: usize = 200;

/// Value `h*(r)` of the Schwarz symmetrization of the model function
/// `h(x) = ψ(x/|x|)(1 - |x|)^s`, defined implicitly by
/// `r^N = (1/ω_{N-1}) ∫ (1 - (h*/ψ(θ))^{1/s})_+^N dσ(θ)`.
pub fn angular_model_rearranged(psi: &BoundaryTrace, s: f64, r: f64) -> Result<f64> {
    const OP: &str = "angular_model_rearranged";
    psi.require_positive(OP)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(OP, format!("r = {r} must lie in (0, 1)")));
    }
    if !(s > 0.0) {
        return Err(Error::domain(OP, format!("s = {s} must be positive")));
    }
    let dim = psi.dim();
    let n = dim as i32;
    let omega = sphere_measure(dim);
    let target = r.powi(n);
    let weights = psi.rule().weights();
    let content = |h: f64| -> f64 {
        let total: f64 = psi
            .values()
            .iter()
            .zip(weights)
            .map(|(v, w)| {
                let t = 1.0 - (h / v).powf(1.0 / s);
                if t > 0.0 {
                    w * t.powi(n)
                } else {
                    0.0
                }
            })
            .sum();
        total / omega
    };
    let hi0 = 2.0 * psi.max() * (1.0 - r).powf(s);
    let (mut lo, mut hi) = (0.0, hi0);
    for _ in 0..BISECTION_ITERS {
        if hi - lo <= 1e-15 * hi0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if content(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > 1e-12 * hi0.max(f64::MIN_POSITIVE) {
        return Err(Error::non_convergence(
            OP,
            format!("bracket width {:e} after bisection", hi - lo),
        ));
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use proptest::prelude::*;

    fn annulus() -> SourceFunction {
        RadialProfile::annulus(0.5, 1.0).unwrap().into()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_source(&annulus(), &[0.75]), 1.0);
        assert_eq!(eval_source(&annulus(), &[0.25]), 0.0);
        let bump: SourceFunction = BumpSource::new(vec![0.5, 0.0], 0.1, 3.0).unwrap().into();
        assert_eq!(eval_source(&bump, &[0.55, 0.0]), 3.0);
        assert_eq!(eval_source(&bump, &[0.35, 0.0]), 0.0);
    }

    #[test]
    fn distribution_examples() {
        assert!((distribution_mu(&annulus(), 0.5, 1) - 1.0).abs() < 1e-15);
        assert_eq!(distribution_mu(&annulus(), 1.0, 3), 0.0);
        let bump: SourceFunction = BumpSource::new(vec![0.5, 0.0], 0.1, 3.0).unwrap().into();
        assert!((distribution_mu(&bump, 1.0, 2) - std::f64::consts::PI * 0.01).abs() < 1e-15);
        assert_eq!(distribution_mu(&bump, 3.0, 2), 0.0);
    }

    #[test]
    fn schwarz_examples() {
        let s = schwarz(&annulus(), 1);
        assert_eq!(s.values(), &[1.0, 0.0]);
        assert!((s.breakpoints()[0] - 0.5).abs() < 1e-15);
        let dec = RadialProfile::new(vec![0.3, 0.7, 1.0], vec![3.0, 2.0, 0.5]).unwrap();
        assert_eq!(schwarz(&dec.clone().into(), 3), dec);
        let bump: SourceFunction = BumpSource::new(vec![0.0, 0.5, 0.0], 0.2, 2.0).unwrap().into();
        let s = schwarz(&bump, 3);
        assert_eq!(s.values(), &[2.0, 0.0]);
        assert_eq!(s.breakpoints()[0], 0.2);
    }

    #[test]
    fn truncate_examples() {
        let p: SourceFunction = RadialProfile::new(vec![0.5, 1.0], vec![2.0, 5.0]).unwrap().into();
        let t = truncate(&p, 3.0);
        assert_eq!(t.as_radial().unwrap().values(), &[2.0, 3.0]);
        assert_eq!(truncate(&p, 7.0), p);
        let a = annulus();
        assert_eq!(schwarz(&truncate(&a, 0.5), 1), truncate_profile(&schwarz(&a, 1), 0.5));
    }

    #[test]
    fn lp_examples() {
        assert!((lp_norm(&annulus(), 1.0, 1) - 1.0).abs() < 1e-15);
        let b = BumpSource::new(vec![0.5, 0.0], 0.1, 3.0).unwrap();
        let v = lp_norm(&b.clone().into(), 2.0, 2);
        assert!((v - 3.0 * (std::f64::consts::PI * 0.01).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rearrange_examples() {
        let p = rearrange_radial_samples(&[0.5, 1.0], &[1.0, 3.0], 1).unwrap();
        assert_eq!(p.values(), &[3.0, 1.0]);
        assert_eq!(p.breakpoints(), &[0.5, 1.0]);
        let q = rearrange_radial_samples(&[0.2, 0.6, 1.0], &[3.0, 2.0, 1.0], 2).unwrap();
        assert_eq!(q.values(), &[3.0, 2.0, 1.0]);
        assert!((q.breakpoints()[1] - 0.6).abs() < 1e-15);
        let z = rearrange_radial_samples(&[0.5], &[2.0], 3).unwrap();
        assert_eq!(z.values(), &[2.0, 0.0]);
    }

    #[test]
    fn parse_round_trip() {
        let p = RadialProfile::parse("0.5:0, 1:1").unwrap();
        assert_eq!(p, RadialProfile::annulus(0.5, 1.0).unwrap());
        assert_eq!(RadialProfile::parse(&p.to_spec_string()).unwrap(), p);
        assert!(RadialProfile::parse("0.5:1").is_err());
        assert!(RadialProfile::parse("0.5;1").is_err());
    }

    #[test]
    fn serde_forms() {
        let f = annulus();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"kind\":\"radial\""));
        assert_eq!(serde_json::from_str::<SourceFunction>(&json).unwrap(), f);
        let b: SourceFunction =
            serde_json::from_str(r#"{"kind":"bump","center":[0.5,0.0],"rho":0.1,"height":2.0}"#).unwrap();
        assert_eq!(b.sup(), 2.0);
        let bad = serde_json::from_str::<SourceFunction>(r#"{"kind":"radial","breakpoints":[0.5],"values":[1.0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn bump_constraints() {
        assert!(BumpSource::new(vec![0.5], 0.6, 1.0).is_err());
        assert!(BumpSource::new(vec![0.0], 0.1, 1.0).is_err());
        let f = BumpSource::normalized_centered(3, 0.1).unwrap();
        assert!((lp_norm(&f.into(), 1.0, 3) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn angular_model_constant_trace() {
        for dim in 1..=3 {
            let rule = sphere_rule(dim, 6).unwrap();
            let trace = BoundaryTrace::new(rule.clone(), vec![2.5; rule.len()]).unwrap();
            for &r in &[0.1, 0.5, 0.9] {
                let h = angular_model_rearranged(&trace, 0.5, r).unwrap();
                assert!((h - 2.5 * (1.0 - r).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn angular_model_asymptote() {
        let rule = sphere_rule(2, 16).unwrap();
        let values: Vec<f64> = rule.nodes().map(|t| 1.0 + 0.5 * t[0]).collect();
        let trace = BoundaryTrace::new(rule, values).unwrap();
        for &s in &[0.25, 0.5, 0.75] {
            let hm = trace.harmonic_mean(s).unwrap();
            let r = 1.0 - 0.5f64.powi(12);
            let h = angular_model_rearranged(&trace, s, r).unwrap();
            assert!((h / (1.0 - r).powf(s) / hm - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn angular_model_two_nodes_against_scan() {
        let rule = sphere_rule(1, 1).unwrap();
        let (a, b, s) = (1.0, 4.0, 0.5);
        let trace = BoundaryTrace::new(rule, vec![a, b]).unwrap();
        for &r in &[0.05, 0.3, 0.6, 0.95] {
            let h = angular_model_rearranged(&trace, s, r).unwrap();
            let f = |h: f64| (1.0 - (h / a).powf(1.0 / s)).max(0.0) + (1.0 - (h / b).powf(1.0 / s)).max(0.0) - 2.0 * r;
            // brute-force scan followed by local refinement of the sign change
            let n = 200_000;
            let top = b;
            let mut root = None;
            for i in 0..n {
                let (x0, x1) = (top * i as f64 / n as f64, top * (i + 1) as f64 / n as f64);
                if f(x0) > 0.0 && f(x1) <= 0.0 {
                    let (mut lo, mut hi) = (x0, x1);
                    for _ in 0..100 {
                        let m = 0.5 * (lo + hi);
                        if f(m) > 0.0 {
                            lo = m
                        } else {
                            hi = m
                        }
                    }
                    root = Some(0.5 * (lo + hi));
                    break;
                }
            }
            assert!((h - root.unwrap()).abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn angular_model_rejects_nonpositive() {
        let rule = sphere_rule(1, 1).unwrap();
        let trace = BoundaryTrace::new(rule, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            angular_model_rearranged(&trace, 0.5, 0.5),
            Err(Error::Positivity { .. })
        ));
    }

    fn profile_strategy() -> impl Strategy<Value = RadialProfile> {
        (1usize..=6)
            .prop_flat_map(|k| {
                (
                    proptest::collection::vec(0.01f64..1.0, k - 1),
                    proptest::collection::vec(prop_oneof![Just(0.0), Just(0.5), 0.0f64..1.0], k),
                )
            })
            .prop_filter_map("distinct radii", |(mut radii, values)| {
                radii.sort_by(f64::total_cmp);
                radii.dedup();
                radii.push(1.0);
                if radii.len() != values.len() {
                    return None;
                }
                RadialProfile::new(radii, values).ok()
            })
    }

    proptest! {
        #[test]
        fn schwarz_is_equimeasurable(p in profile_strategy(), dim in 1usize..=3) {
            let f: SourceFunction = p.clone().into();
            let star = schwarz(&f, dim);
            prop_assert!(star.is_symmetric_decreasing());
            let fs: SourceFunction = star.into();
            for &t in p.values() {
                let a = distribution_mu(&f, t, dim);
                let b = distribution_mu(&fs, t, dim);
                prop_assert!((a - b).abs() <= 1e-14 * ball_volume(dim));
                let t2 = 0.999 * t;
                prop_assert!((distribution_mu(&f, t2, dim) - distribution_mu(&fs, t2, dim)).abs() <= 1e-14 * ball_volume(dim));
            }
            for q in [1.0, 2.0, 3.5] {
                let a = lp_norm(&f, q, dim);
                prop_assert!((a - lp_norm(&fs, q, dim)).abs() <= 1e-13 * a.max(1e-300));
            }
        }

        #[test]
        fn truncation_commutes(p in profile_strategy(), dim in 1usize..=3, tau in 0.01f64..1.0) {
            let f: SourceFunction = p.into();
            let a = schwarz(&truncate(&f, tau), dim);
            let b = truncate_profile(&schwarz(&f, dim), tau);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn bump_truncation_commutes(h in 0.1f64..3.0, tau in 0.05f64..4.0) {
            let f: SourceFunction = BumpSource::new(vec![0.5, 0.1], 0.2, h).unwrap().into();
            let a = schwarz(&truncate(&f, tau), 2);
            let b = truncate_profile(&schwarz(&f, 2), tau);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn distribution_monotone(p in profile_strategy(), t in 0.0f64..1.0, dt in 0.0f64..0.5) {
            let f: SourceFunction = p.into();
            prop_assert!(distribution_mu(&f, t + dt, 2) <= distribution_mu(&f, t, 2));
        }

        #[test]
        fn rearranged_samples_equimeasurable(values in proptest::collection::vec(0.0f64..2.0, 1..40), dim in 1usize..=3) {
            let n = values.len();
            let radii: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + 0.5)).collect();
            let out = rearrange_radial_samples(&radii, &values, dim).unwrap();
            prop_assert!(out.is_symmetric_decreasing());
            let mut grid = radii.clone();
            grid.push(1.0);
            let mut vals = values.clone();
            vals.push(0.0);
            let input = RadialProfile::new(grid, vals).unwrap();
            for &t in &values {
                let a = distribution_mu(&input.clone().into(), t * 0.999, dim);
                let b = distribution_mu(&out.clone().into(), t * 0.999, dim);
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn angular_model_nonincreasing(r1 in 0.01f64..0.98, dr in 0.001f64..0.02) {
            let rule = sphere_rule(2, 12).unwrap();
            let values: Vec<f64> = rule.nodes().map(|t| 1.5 + t[1]).collect();
            let trace = BoundaryTrace::new(rule, values).unwrap();
            let a = angular_model_rearranged(&trace, 0.75, r1).unwrap();
            let b = angular_model_rearranged(&trace, 0.75, (r1 + dr).min(0.999)).unwrap();
            prop_assert!(b <= a + 1e-12);
        }
    }
}

//! Gauss–Legendre and Gauss–Jacobi node/weight generation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special::log_gamma;

pub const MAX_NODES: usize = 512;

/// Nodes and weights of a one-dimensional rule on `[-1, 1]`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule1d {
    /// `∫_a^b g(x) dx` for a plain (unweighted) rule.
    pub fn integrate_on(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.x.iter().zip(&self.w) {
            acc += w * g(mid + half * x);
        }
        acc * half
    }
}

/// Rule for `∫_0^1 g(u) u^β du`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRule {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl UnitRule {
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (u, w) in self.u.iter().zip(&self.w) {
            acc += w * g(*u);
        }
        acc
    }
}

fn check_size(op: &'static str, n: usize) -> Result<()> {
    if (1..=MAX_NODES).contains(&n) {
        Ok(())
    } else {
        Err(Error::Size {
            op,
            size: n,
            range: "1..=512",
        })
    }
}

fn legendre_nodes(n: usize) -> Rule1d {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * pp * pp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Rule1d { x, w }
}

/// Recurrence coefficients of the orthonormal Jacobi polynomials:
/// diagonal `a_0..a_{n-1}` and off-diagonal `b_1..b_n`.
fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut a = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        if k == 0 {
            a.push((beta - alpha) / (ab + 2.0));
        } else {
            let t = 2.0 * kf + ab;
            a.push((beta * beta - alpha * alpha) / (t * (t + 2.0)));
        }
    }
    let mut b = Vec::with_capacity(n);
    for k in 1..=n {
        let kf = k as f64;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let t = 2.0 * kf + ab;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (t * t * (t + 1.0) * (t - 1.0))
        };
        b.push(b2.sqrt());
    }
    (a, b)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::non_convergence("gauss_jacobi", "tridiagonal QL iteration"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn jacobi_nodes(n: usize, alpha: f64, beta: f64) -> Result<Rule1d> {
    let (a, b) = jacobi_recurrence(n, alpha, beta);
    let mut x = tridiagonal_eigenvalues(a.clone(), &b)?;
    let ln_mu0 = (alpha + beta + 1.0) * 2f64.ln() + log_gamma(alpha + 1.0)? + log_gamma(beta + 1.0)?
        - log_gamma(alpha + beta + 2.0)?;
    let mu0 = ln_mu0.exp();
    let mut w = Vec::with_capacity(n);
    for xi in x.iter_mut() {
        // one Newton step on the orthonormal p_n polishes the eigenvalue
        for _ in 0..2 {
            let (mut q_prev, mut q) = (0.0, 1.0);
            let (mut dq_prev, mut dq) = (0.0, 0.0);
            for k in 0..n {
                let back = if k == 0 { 0.0 } else { b[k - 1] };
                let q_next = ((*xi - a[k]) * q - back * q_prev) / b[k];
                let dq_next = (q + (*xi - a[k]) * dq - back * dq_prev) / b[k];
                q_prev = q;
                q = q_next;
                dq_prev = dq;
                dq = dq_next;
            }
            if dq != 0.0 && q.is_finite() && dq.is_finite() {
                let step = q / dq;
                if step.abs() < 1e-8 {
                    *xi -= step;
                }
            }
        }
        let (mut q_prev, mut q) = (0.0, 1.0);
        let mut sum = 1.0;
        for k in 0..n - 1 {
            let back = if k == 0 { 0.0 } else { b[k - 1] };
            let q_next = ((*xi - a[k]) * q - back * q_prev) / b[k];
            q_prev = q;
            q = q_next;
            sum += q * q;
        }
        w.push(mu0 / sum);
    }
    Ok(Rule1d { x, w })
}

type JacobiKey = (usize, u64, u64);

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<Rule1d>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule1d>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn jacobi_cache() -> &'static Mutex<HashMap<JacobiKey, Arc<Rule1d>>> {
    static CACHE: OnceLock<Mutex<HashMap<JacobiKey, Arc<Rule1d>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn unit_cache() -> &'static Mutex<HashMap<(usize, u64), Arc<UnitRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<UnitRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub(crate) fn legendre_cached(n: usize) -> Result<Arc<Rule1d>> {
    check_size("gauss_legendre", n)?;
    let mut cache = legendre_cache().lock().expect("rule cache poisoned");
    Ok(cache.entry(n).or_insert_with(|| Arc::new(legendre_nodes(n))).clone())
}

pub(crate) fn jacobi_cached(n: usize, alpha: f64, beta: f64) -> Result<Arc<Rule1d>> {
    check_size("gauss_jacobi", n)?;
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(
            "gauss_jacobi",
            format!("exponents (α, β) = ({alpha}, {beta}) must exceed -1"),
        ));
    }
    if alpha == 0.0 && beta == 0.0 {
        return legendre_cached(n);
    }
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = jacobi_cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(jacobi_nodes(n, alpha, beta)?);
    jacobi_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

/// Rule for `∫_0^1 g(u) u^β du`, obtained from the Jacobi rule with
/// `α = 0` through `u = (1 + x)/2`.
pub(crate) fn jacobi_unit_cached(n: usize, beta: f64) -> Result<Arc<UnitRule>> {
    let key = (n, beta.to_bits());
    if let Some(rule) = unit_cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let base = jacobi_cached(n, 0.0, beta)?;
    let scale = 0.5f64.powf(beta + 1.0);
    let rule = Arc::new(UnitRule {
        u: base.x.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        w: base.w.iter().map(|w| w * scale).collect(),
    });
    unit_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

/// `∫_a^b q(x) (b - x)^α (x - a)^β dx` with `q` evaluated as
/// `q(x, b - x, x - a)` so callers can use the endpoint distances without
/// cancellation.
pub(crate) fn jacobi_integrate_on(
    rule: &Rule1d,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    mut q: impl FnMut(f64, f64, f64) -> f64,
) -> f64 {
    let len = b - a;
    let half = 0.5 * len;
    let mut acc = 0.0;
    for (t, w) in rule.x.iter().zip(&rule.w) {
        let to_right = half * (1.0 - t);
        let from_left = half * (1.0 + t);
        let x = if from_left <= to_right {
            a + from_left
        } else {
            b - to_right
        };
        acc += w * q(x, to_right, from_left);
    }
    acc * half.powf(1.0 + alpha + beta)
}

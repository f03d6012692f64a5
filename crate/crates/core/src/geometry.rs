//! Small fixed-size vector helpers. Points of `R^N` with `N ≤ 3` are padded
//! to three components internally.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn pad3(x: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, v) in out.iter_mut().zip(x) {
        *o = *v;
    }
    out
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn dist3(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm3(&d)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `1 - |x|^2` without cancellation near the unit sphere.
pub fn deficit(x: &[f64]) -> f64 {
    let n = norm(x);
    (1.0 - n) * (1.0 + n)
}

/// The point `r e_1` of `R^N`.
pub fn radial_point(dim: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    x[0] = r;
    x
}

pub(crate) fn check_point(op: &'static str, x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::domain(
            op,
            format!("point has {} components, expected {dim}", x.len()),
        ));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain(op, "point has non-finite components"));
    }
    Ok(())
}

pub(crate) fn check_unit(op: &'static str, theta: &[f64], dim: usize) -> Result<()> {
    check_point(op, theta, dim)?;
    let n = norm(theta);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::domain(op, format!("|θ| = {n} is not 1")));
    }
    Ok(())
}

use std::f64::consts::PI;

use super::{gauss, QuadratureRule, RuleDomain};
use crate::error::{Error, Result};

/// Product rule on `S^{N-1}` for `N ∈ {1, 2, 3}`.
///
/// `N = 1` uses the two points `±1` with unit weight, `N = 2` uses `order`
/// equispaced angles, `N = 3` uses Gauss–Legendre in the polar cosine times
/// `2 · order` equispaced azimuths.
pub fn sphere_rule(dim: usize, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Size {
            op: "sphere_rule",
            size: order,
            range: ">= 1",
        });
    }
    match dim {
        1 => Ok(QuadratureRule::new(
            RuleDomain::Sphere,
            1,
            order,
            vec![-1.0, 1.0],
            vec![1.0, 1.0],
        )),
        2 => {
            let w = 2.0 * PI / order as f64;
            let mut nodes = Vec::with_capacity(2 * order);
            for i in 0..order {
                let phi = 2.0 * PI * i as f64 / order as f64;
                nodes.push(phi.cos());
                nodes.push(phi.sin());
            }
            Ok(QuadratureRule::new(RuleDomain::Sphere, 2, order, nodes, vec![w; order]))
        }
        3 => {
            let gl = gauss::legendre_cached(order)?;
            let naz = 2 * order;
            let mut nodes = Vec::with_capacity(3 * order * naz);
            let mut weights = Vec::with_capacity(order * naz);
            for (z, wz) in gl.x.iter().zip(&gl.w) {
                let sin_polar = ((1.0 - z) * (1.0 + z)).sqrt();
                for j in 0..naz {
                    let psi = 2.0 * PI * (j as f64 + 0.5) / naz as f64;
                    nodes.push(sin_polar * psi.cos());
                    nodes.push(sin_polar * psi.sin());
                    nodes.push(*z);
                    weights.push(wz * PI / order as f64);
                }
            }
            Ok(QuadratureRule::new(RuleDomain::Sphere, 3, order, nodes, weights))
        }
        _ => Err(Error::UnsupportedDimension { op: "sphere_rule", dim }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_measure;

    #[test]
    fn weights_sum_to_measure() {
        for dim in 1..=3 {
            for order in [1, 5, 24, 64] {
                let r = sphere_rule(dim, order).unwrap();
                let rel = (r.total_weight() - sphere_measure(dim)).abs() / sphere_measure(dim);
                assert!(rel < 1e-12, "N = {dim}, order = {order}");
                for x in r.nodes() {
                    let n: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                    assert!((n - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn second_moment_on_s2() {
        let r = sphere_rule(3, 24).unwrap();
        let v = r.integrate(|x| x[2] * x[2]);
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
        let v = r.integrate(|x| x[0] * x[0]);
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(matches!(sphere_rule(4, 8), Err(Error::UnsupportedDimension { .. })));
    }
}

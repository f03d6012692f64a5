//! Quadrature rules on intervals, spheres and the unit ball.

pub mod adaptive;
pub mod ball;
pub mod gauss;
pub mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use adaptive::{adaptive_1d, Tolerance};
pub use ball::{ball_integrate, BallIntegrator, BallSample, EndBehavior};
pub use sphere::sphere_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleDomain {
    Interval,
    Sphere,
    Ball,
}

/// Nodes and positive weights. Interval rules store scalar nodes; sphere
/// rules store unit vectors of length `dim`, flattened row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    domain: RuleDomain,
    dim: usize,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub(crate) fn new(domain: RuleDomain, dim: usize, order: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(nodes.len(), dim * weights.len());
        Self {
            domain,
            dim,
            order,
            nodes,
            weights,
        }
    }

    pub fn domain(&self) -> RuleDomain {
        self.domain
    }

    /// Dimension of each node (1 for interval rules, `N` for sphere rules).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Order parameter the rule was built with.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i g(x_i)`.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes().zip(&self.weights).map(|(x, w)| w * g(x)).sum()
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, `1 ≤ n ≤ 512`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    let rule = gauss::legendre_cached(n)?;
    Ok(QuadratureRule::new(
        RuleDomain::Interval,
        1,
        n,
        rule.x.clone(),
        rule.w.clone(),
    ))
}

/// `n`-point rule for `∫_{-1}^{1} g(x) (1-x)^α (1+x)^β dx`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    let rule = gauss::jacobi_cached(n, alpha, beta)?;
    Ok(QuadratureRule::new(
        RuleDomain::Interval,
        1,
        n,
        rule.x.clone(),
        rule.w.clone(),
    ))
}

//! Quadrature rules realizing the weighted inner products
//! `⟨f,g⟩ = ∫ f g w dt` (or the weighted sum in the discrete case).
//!
//! Continuous rules are Gauss rules computed from the symmetric
//! tridiagonal (Golub-Welsch) eigenproblem on the recurrence coefficients
//! of the weight's orthogonal polynomials. The discrete Poisson rule is a
//! truncated sum over `0..=v`.

use crate::basis::{BasisFamily, BasisKind};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub weight_class: BasisKind,
    /// Node count per dimension.
    pub order: usize,
    /// `Σ weights`, equal to `∫ w dt` (up to Poisson-tail truncation).
    pub total_mass: f64,
}

impl QuadratureRule {
    /// Gauss (or truncated-sum) rule matched to a basis family's weight.
    ///
    /// `charlier_v` overrides the truncation point for the Poisson weight;
    /// by default the smallest `v ≥ 10` with upper-tail mass below `1e-14`
    /// is used.
    pub fn for_family(family: &BasisFamily, order: usize, charlier_v: Option<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        match family.kind {
            BasisKind::Legendre01 => Ok(legendre01_rule(order)),
            BasisKind::LaguerreExp => Ok(laguerre_rule(order, family.gamma.unwrap())),
            BasisKind::HermiteGauss | BasisKind::TensorHermite => {
                Ok(hermite_rule(order, family.gamma.unwrap()))
            }
            BasisKind::CharlierPoisson => Ok(charlier_rule(family.rho.unwrap(), charlier_v)),
        }
    }

    /// `Σ_p Σ_q ω_p ω_q f(t_p, t_q)`.
    pub fn integrate_2d(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&s, &ws) in self.nodes.iter().zip(&self.weights) {
            let mut inner = 0.0;
            for (&t, &wt) in self.nodes.iter().zip(&self.weights) {
                inner += wt * f(s, t);
            }
            acc += ws * inner;
        }
        acc
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Tensor-product rule over `ℝ^d` built from a 1-D rule.
#[derive(Debug, Clone)]
pub struct ProductRule {
    /// `order^d` points.
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub dim: usize,
    pub total_mass: f64,
}

pub fn product_rule(rule: &QuadratureRule, d: usize) -> Result<ProductRule> {
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!(
            "product rules support d in 1..=3, got {d}"
        )));
    }
    let q = rule.order;
    let total = q.pow(d as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut pt = Vec::with_capacity(d);
        let mut w = 1.0;
        for _ in 0..d {
            let i = rem % q;
            rem /= q;
            pt.push(rule.nodes[i]);
            w *= rule.weights[i];
        }
        pt.reverse();
        nodes.push(pt);
        weights.push(w);
    }
    Ok(ProductRule {
        nodes,
        weights,
        dim: d,
        total_mass: rule.total_mass.powi(d as i32),
    })
}

/// Nodes and weights from the Jacobi matrix of a monic three-term
/// recurrence `p_{k+1} = (x − α_k) p_k − β_k p_{k−1}`; `mass` is the total
/// integral of the weight (the `β_0` moment).
fn golub_welsch(alpha: &[f64], beta: &[f64], mass: f64) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = alpha[i];
    }
    for i in 1..n {
        let b = beta[i].sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Legendre on `[0,1]` with unit weight.
pub fn legendre01_rule(order: usize) -> QuadratureRule {
    let alpha = vec![0.5; order];
    let beta: Vec<f64> = (0..order)
        .map(|k| {
            let kf = k as f64;
            kf * kf / (4.0 * (4.0 * kf * kf - 1.0))
        })
        .collect();
    let (nodes, weights) = golub_welsch(&alpha, &beta, 1.0);
    QuadratureRule {
        nodes,
        weights,
        weight_class: BasisKind::Legendre01,
        order,
        total_mass: 1.0,
    }
}

/// Gauss-Legendre on an arbitrary interval `[a,b]`, unit weight.
pub fn legendre_rule_on(order: usize, a: f64, b: f64) -> QuadratureRule {
    let base = legendre01_rule(order);
    let h = b - a;
    QuadratureRule {
        nodes: base.nodes.iter().map(|&x| a + h * x).collect(),
        weights: base.weights.iter().map(|&w| w * h).collect(),
        weight_class: BasisKind::Legendre01,
        order,
        total_mass: h,
    }
}

/// Gauss-Laguerre for the weight `e^{−γt}` on `[0,∞)` via `u = γt`;
/// total mass `1/γ`.
pub fn laguerre_rule(order: usize, gamma: f64) -> QuadratureRule {
    let alpha: Vec<f64> = (0..order).map(|k| 2.0 * k as f64 + 1.0).collect();
    let beta: Vec<f64> = (0..order).map(|k| (k as f64) * (k as f64)).collect();
    let (u, wu) = golub_welsch(&alpha, &beta, 1.0);
    QuadratureRule {
        nodes: u.iter().map(|&x| x / gamma).collect(),
        weights: wu.iter().map(|&w| w / gamma).collect(),
        weight_class: BasisKind::LaguerreExp,
        order,
        total_mass: 1.0 / gamma,
    }
}

/// Gauss-Hermite for the weight `e^{−γt²}` on `ℝ` via `u = √γ t`;
/// total mass `√(π/γ)`.
pub fn hermite_rule(order: usize, gamma: f64) -> QuadratureRule {
    let alpha = vec![0.0; order];
    let beta: Vec<f64> = (0..order).map(|k| k as f64 / 2.0).collect();
    let (u, wu) = golub_welsch(&alpha, &beta, std::f64::consts::PI.sqrt());
    let sg = gamma.sqrt();
    QuadratureRule {
        nodes: u.iter().map(|&x| x / sg).collect(),
        weights: wu.iter().map(|&w| w / sg).collect(),
        weight_class: BasisKind::HermiteGauss,
        order,
        total_mass: (std::f64::consts::PI / gamma).sqrt(),
    }
}

/// Smallest truncation point `v ≥ 10` with Poisson(ϱ) upper-tail mass
/// below `1e-14`.
pub fn charlier_truncation(rho: f64) -> usize {
    let mut pmf = (-rho).exp();
    let mut cdf = pmf;
    let mut v = 0usize;
    while !(1.0 - cdf < 1e-14 && v >= 10) {
        v += 1;
        pmf *= rho / v as f64;
        cdf += pmf;
        if v > 10_000 {
            break;
        }
    }
    v
}

/// Truncated Poisson(ϱ) summation rule: nodes `0..=v`, weights
/// `e^{−ϱ} ϱ^t / t!`.
pub fn charlier_rule(rho: f64, v: Option<usize>) -> QuadratureRule {
    let v = v.unwrap_or_else(|| charlier_truncation(rho));
    let mut nodes = Vec::with_capacity(v + 1);
    let mut weights = Vec::with_capacity(v + 1);
    let mut pmf = (-rho).exp();
    let mut mass = 0.0;
    for t in 0..=v {
        if t > 0 {
            pmf *= rho / t as f64;
        }
        nodes.push(t as f64);
        weights.push(pmf);
        mass += pmf;
    }
    QuadratureRule {
        nodes,
        weights,
        weight_class: BasisKind::CharlierPoisson,
        order: v + 1,
        total_mass: mass,
    }
}

/// Default Gram-assembly quadrature order for basis size `n`; kernels with
/// a kink along the diagonal double it.
pub fn default_order(n: usize, kinked: bool) -> usize {
    let q = 64usize.max(2 * n + 16);
    if kinked {
        2 * q
    } else {
        q
    }
}

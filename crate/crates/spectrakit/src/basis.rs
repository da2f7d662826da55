//! Orthonormal polynomial families evaluated by stable three-term
//! recurrences on the normalized polynomials.
//!
//! Five families are provided, each orthonormal with respect to its weight:
//!
//! * `Legendre01`: `φ_k(x) = √(2k+1) P_k(2x−1)` on `[0,1]`, weight 1.
//! * `LaguerreExp`: `φ_k(x) = √γ L_k(γx)` on `[0,∞)`, weight `e^{−γx}`.
//! * `HermiteGauss`: scaled Hermite functions on `ℝ`, weight `e^{−γx²}`.
//! * `CharlierPoisson`: normalized Charlier polynomials on `ℕ₀`, Poisson(ϱ)
//!   weight.
//! * `TensorHermite`: products of 1-D Hermite factors on `ℝ^d`, indexed by
//!   multi-indices ordered by (total degree, lexicographic).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Legendre01,
    LaguerreExp,
    HermiteGauss,
    CharlierPoisson,
    TensorHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// The unit interval `[0,1]`.
    Unit,
    /// The half line `[0,∞)`.
    HalfLine,
    /// The real line.
    Real,
    /// The nonnegative integers.
    Naturals,
    /// `ℝ^d`.
    RealD(usize),
}

impl std::fmt::Display for Support {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Support::Unit => write!(f, "[0,1]"),
            Support::HalfLine => write!(f, "[0,inf)"),
            Support::Real => write!(f, "R"),
            Support::Naturals => write!(f, "N0"),
            Support::RealD(d) => write!(f, "R^{d}"),
        }
    }
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::Unit => (0.0..=1.0).contains(&x),
            Support::HalfLine => x >= 0.0,
            Support::Real => x.is_finite(),
            Support::Naturals => x >= 0.0 && x.fract() == 0.0,
            Support::RealD(_) => x.is_finite(),
        }
    }
}

/// A multi-index for the tensor-product basis; the basis element is the
/// product of the 1-D factors of the listed degrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }
}

/// All multi-indices of length `dim` with total degree at most `n`,
/// ordered by (total degree, lexicographic). The ordering is part of the
/// output contract for multivariate spectra.
pub fn multi_indices(dim: usize, n: usize) -> Vec<MultiIndex> {
    fn rec(dim: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            prefix.push(total);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(dim - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=n {
        let mut buf = Vec::with_capacity(dim);
        rec(dim, total, &mut buf, &mut out);
    }
    out
}

pub const DEFAULT_DEGREE_BOUND: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFamily {
    pub kind: BasisKind,
    /// Weight rate/scale for LaguerreExp, HermiteGauss, TensorHermite.
    pub gamma: Option<f64>,
    /// Poisson mean for CharlierPoisson.
    pub rho: Option<f64>,
    pub dim: usize,
    pub degree_bound: usize,
}

impl BasisFamily {
    pub fn legendre01() -> Self {
        BasisFamily {
            kind: BasisKind::Legendre01,
            gamma: None,
            rho: None,
            dim: 1,
            degree_bound: DEFAULT_DEGREE_BOUND,
        }
    }

    pub fn laguerre_exp(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(BasisFamily {
            kind: BasisKind::LaguerreExp,
            gamma: Some(gamma),
            rho: None,
            dim: 1,
            degree_bound: DEFAULT_DEGREE_BOUND,
        })
    }

    pub fn hermite_gauss(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(BasisFamily {
            kind: BasisKind::HermiteGauss,
            gamma: Some(gamma),
            rho: None,
            dim: 1,
            degree_bound: DEFAULT_DEGREE_BOUND,
        })
    }

    pub fn charlier_poisson(rho: f64) -> Result<Self> {
        require_positive("rho", rho)?;
        Ok(BasisFamily {
            kind: BasisKind::CharlierPoisson,
            gamma: None,
            rho: Some(rho),
            dim: 1,
            degree_bound: DEFAULT_DEGREE_BOUND,
        })
    }

    pub fn tensor_hermite(gamma: f64, dim: usize) -> Result<Self> {
        require_positive("gamma", gamma)?;
        if dim < 1 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        Ok(BasisFamily {
            kind: BasisKind::TensorHermite,
            gamma: Some(gamma),
            rho: None,
            dim,
            degree_bound: DEFAULT_DEGREE_BOUND,
        })
    }

    pub fn support(&self) -> Support {
        match self.kind {
            BasisKind::Legendre01 => Support::Unit,
            BasisKind::LaguerreExp => Support::HalfLine,
            BasisKind::HermiteGauss => Support::Real,
            BasisKind::CharlierPoisson => Support::Naturals,
            BasisKind::TensorHermite => Support::RealD(self.dim),
        }
    }

    /// Evaluate the orthonormal basis function of degree `k` at `x`
    /// (univariate families).
    pub fn eval(&self, k: usize, x: f64) -> Result<f64> {
        if k > self.degree_bound {
            return Err(Error::DegreeBound {
                degree: k,
                bound: self.degree_bound,
            });
        }
        if !self.support().contains(x) {
            return Err(Error::OutsideSupport {
                point: x,
                support: self.support(),
            });
        }
        if self.kind == BasisKind::TensorHermite && self.dim != 1 {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: 1,
            });
        }
        Ok(self.eval_column(k, x)[k])
    }

    /// Evaluate the tensor basis element for multi-index `idx` at `x`.
    pub fn eval_multi(&self, idx: &MultiIndex, x: &[f64]) -> Result<f64> {
        if idx.0.len() != self.dim || x.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: x.len().min(idx.0.len()),
            });
        }
        let kmax = idx.0.iter().copied().max().unwrap_or(0);
        if kmax > self.degree_bound {
            return Err(Error::DegreeBound {
                degree: kmax,
                bound: self.degree_bound,
            });
        }
        let gamma = self.gamma.unwrap_or(1.0);
        let mut prod = 1.0;
        for (ki, xi) in idx.0.iter().zip(x) {
            prod *= hermite_gauss_column(*ki, *xi, gamma)[*ki];
        }
        Ok(prod)
    }

    /// Values `φ_0(x)..φ_n(x)` computed in one recurrence pass.
    /// Support and degree checks are the caller's responsibility; this is
    /// the hot path of Gram assembly.
    pub fn eval_column(&self, n: usize, x: f64) -> Vec<f64> {
        match self.kind {
            BasisKind::Legendre01 => {
                let t = 2.0 * x - 1.0;
                let mut out = Vec::with_capacity(n + 1);
                let (mut pm, mut pc) = (0.0f64, 1.0f64);
                for k in 0..=n {
                    out.push(((2 * k + 1) as f64).sqrt() * pc);
                    let kf = k as f64;
                    let pn = ((2.0 * kf + 1.0) * t * pc - kf * pm) / (kf + 1.0);
                    pm = pc;
                    pc = pn;
                }
                out
            }
            BasisKind::LaguerreExp => {
                let gamma = self.gamma.unwrap();
                let u = gamma * x;
                let scale = gamma.sqrt();
                let mut out = Vec::with_capacity(n + 1);
                let (mut lm, mut lc) = (0.0f64, 1.0f64);
                for k in 0..=n {
                    out.push(scale * lc);
                    let kf = k as f64;
                    let ln = ((2.0 * kf + 1.0 - u) * lc - kf * lm) / (kf + 1.0);
                    lm = lc;
                    lc = ln;
                }
                out
            }
            BasisKind::HermiteGauss | BasisKind::TensorHermite => {
                hermite_gauss_column(n, x, self.gamma.unwrap())
            }
            BasisKind::CharlierPoisson => {
                let rho = self.rho.unwrap();
                let mut out = Vec::with_capacity(n + 1);
                let (mut pm, mut pc) = (0.0f64, 1.0f64);
                for k in 0..=n {
                    out.push(pc);
                    let kf = k as f64;
                    let pn = ((x - kf - rho) * pc - (rho * kf).sqrt() * pm)
                        / (rho * (kf + 1.0)).sqrt();
                    pm = pc;
                    pc = pn;
                }
                out
            }
        }
    }
}

/// 1-D Hermite factor orthonormal with respect to `e^{−γx²}`:
/// `φ_k(x) = γ^{1/4} ĥ_k(√γ x)` where `ĥ_k` are orthonormal with respect to
/// `e^{−u²}` (`ĥ_0 = π^{−1/4}`).
fn hermite_gauss_column(n: usize, x: f64, gamma: f64) -> Vec<f64> {
    let u = gamma.sqrt() * x;
    let scale = gamma.powf(0.25);
    let mut out = Vec::with_capacity(n + 1);
    let (mut hm, mut hc) = (0.0f64, std::f64::consts::PI.powf(-0.25));
    for k in 0..=n {
        out.push(scale * hc);
        let kf = k as f64;
        let hn = u * hc * (2.0 / (kf + 1.0)).sqrt() - hm * (kf / (kf + 1.0)).sqrt();
        hm = hc;
        hc = hn;
    }
    out
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

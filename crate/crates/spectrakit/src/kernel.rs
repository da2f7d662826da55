//! Catalog of covariance kernels with pointwise evaluation, support and
//! weight metadata, and a separable (sum of rank-1 tensor terms)
//! description for the multivariate kernel.

use crate::basis::Support;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelId {
    /// Brownian bridge kernel `s∧t − st` on `[0,1]`.
    #[serde(rename = "cvm")]
    CvM,
    /// `st(s∧t)/2 − (s∧t)³/6 − s²t²/4` on `[0,1]`.
    #[serde(rename = "hn2000")]
    HN2000,
    /// `(1 − (2(s∨t) − 1)³)/6 − st(1−s)(1−t)` on `[0,1]`.
    #[serde(rename = "eks2021")]
    EKS2021,
    /// `(1−e^{−s})∧(1−e^{−t}) − (1−e^{−s})(1−e^{−t})` on `[0,∞)`.
    #[serde(rename = "bh_rho")]
    BhRho,
    /// `e^{−s∨t} − e^{−(s+t)}` on `[0,∞)`.
    #[serde(rename = "k0_exp")]
    K0Exp,
    /// `(|s−t|+2)e^{−s∨t} − (s+t+st+2)e^{−(s+t)}` on `[0,∞)`.
    #[serde(rename = "k2001")]
    K2001,
    /// `(st+1)e^{−(s−t)²/2} − (2st+1)e^{−(s²+t²)/2}` on `ℝ`.
    #[serde(rename = "ebnerkz")]
    EbnerKZ,
    /// `(3/2)e^{st} + e^{−st}/2 + 2cos(st) − st − 4` on `ℝ`.
    #[serde(rename = "hjm_c")]
    HjmC,
    /// Sixth-moment normality kernel on `ℝ` (three exponential-weighted
    /// polynomial groups).
    #[serde(rename = "deh_k")]
    DehK,
    /// Circular-uniformity kernel on `ℕ₀` built from modified Bessel
    /// ratios; parameter `τ`, location `μ = 0`.
    #[serde(rename = "vonmises")]
    VonMises,
    /// Multivariate normality kernel on `ℝ^d`.
    #[serde(rename = "bhep")]
    Bhep,
}

impl KernelId {
    pub fn name(&self) -> &'static str {
        match self {
            KernelId::CvM => "cvm",
            KernelId::HN2000 => "hn2000",
            KernelId::EKS2021 => "eks2021",
            KernelId::BhRho => "bh_rho",
            KernelId::K0Exp => "k0_exp",
            KernelId::K2001 => "k2001",
            KernelId::EbnerKZ => "ebnerkz",
            KernelId::HjmC => "hjm_c",
            KernelId::DehK => "deh_k",
            KernelId::VonMises => "vonmises",
            KernelId::Bhep => "bhep",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "cvm" => KernelId::CvM,
            "hn2000" => KernelId::HN2000,
            "eks2021" => KernelId::EKS2021,
            "bh_rho" | "bhrho" => KernelId::BhRho,
            "k0_exp" | "k0exp" => KernelId::K0Exp,
            "k2001" => KernelId::K2001,
            "ebnerkz" => KernelId::EbnerKZ,
            "hjm_c" | "hjmc" => KernelId::HjmC,
            "deh_k" | "dehk" => KernelId::DehK,
            "vonmises" => KernelId::VonMises,
            "bhep" => KernelId::Bhep,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub id: KernelId,
    /// Concentration for VonMises.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Location for VonMises; only 0 is supported (the kernel is complex
    /// Hermitian otherwise).
    #[serde(default)]
    pub mu: f64,
    /// Dimension for Bhep.
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

impl KernelSpec {
    pub fn new(id: KernelId) -> Result<Self> {
        match id {
            KernelId::VonMises => Err(Error::invalid("tau", "VonMises requires tau")),
            _ => Ok(KernelSpec {
                id,
                tau: None,
                mu: 0.0,
                d: 1,
            }),
        }
    }

    pub fn von_mises(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(KernelSpec {
            id: KernelId::VonMises,
            tau: Some(tau),
            mu: 0.0,
            d: 1,
        })
    }

    pub fn bhep(d: usize) -> Result<Self> {
        if d < 1 || d > 3 {
            return Err(Error::invalid("d", format!("must be in 1..=3, got {d}")));
        }
        Ok(KernelSpec {
            id: KernelId::Bhep,
            tau: None,
            mu: 0.0,
            d,
        })
    }

    pub fn support(&self) -> Support {
        match self.id {
            KernelId::CvM | KernelId::HN2000 | KernelId::EKS2021 => Support::Unit,
            KernelId::BhRho | KernelId::K0Exp | KernelId::K2001 => Support::HalfLine,
            KernelId::EbnerKZ | KernelId::HjmC | KernelId::DehK => Support::Real,
            KernelId::VonMises => Support::Naturals,
            KernelId::Bhep => {
                if self.d == 1 {
                    Support::Real
                } else {
                    Support::RealD(self.d)
                }
            }
        }
    }

    /// Whether the kernel has a C⁰ kink along the diagonal (contains
    /// `s∧t`, `s∨t` or `|s−t|`); Gram assembly then splits the inner
    /// integral at the kink.
    pub fn kinked(&self) -> bool {
        matches!(
            self.id,
            KernelId::CvM
                | KernelId::HN2000
                | KernelId::EKS2021
                | KernelId::BhRho
                | KernelId::K0Exp
                | KernelId::K2001
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Pointwise evaluation for univariate kernels.
    pub fn eval1(&self, s: f64, t: f64) -> f64 {
        match self.id {
            KernelId::CvM => s.min(t) - s * t,
            KernelId::HN2000 => {
                let m = s.min(t);
                s * t * m / 2.0 - m * m * m / 6.0 - s * s * t * t / 4.0
            }
            KernelId::EKS2021 => {
                let m = s.max(t);
                let c = 2.0 * m - 1.0;
                (1.0 - c * c * c) / 6.0 - s * t * (1.0 - s) * (1.0 - t)
            }
            KernelId::BhRho => {
                let a = 1.0 - (-s).exp();
                let b = 1.0 - (-t).exp();
                a.min(b) - a * b
            }
            KernelId::K0Exp => (-s.max(t)).exp() - (-(s + t)).exp(),
            KernelId::K2001 => {
                ((s - t).abs() + 2.0) * (-s.max(t)).exp()
                    - (s + t + s * t + 2.0) * (-(s + t)).exp()
            }
            KernelId::EbnerKZ => {
                let d = s - t;
                (s * t + 1.0) * (-d * d / 2.0).exp()
                    - (2.0 * s * t + 1.0) * (-(s * s + t * t) / 2.0).exp()
            }
            KernelId::HjmC => {
                let p = s * t;
                p.exp() + 0.5 * (p.exp() + (-p).exp()) + 2.0 * p.cos() - p - 4.0
            }
            KernelId::DehK => {
                let d = s - t;
                let g1 = (-d * d / 2.0).exp() * ((d * d - 3.0).powi(2) - 6.0);
                let (s2, t2) = (s * s, t * t);
                let g2 = (-(s2 + t2) / 2.0).exp()
                    * (-s2 * t2 * (s2 - 5.0) * (t2 - 5.0) / 2.0 + 6.0 * (s2 + t2)
                        - s2 * s2
                        - t2 * t2
                        - s2 * t2
                        - s * t * (s2 - 3.0) * (t2 - 3.0)
                        - 3.0);
                g1 + g2
            }
            KernelId::VonMises => von_mises_eval(s, t, self.tau.unwrap()),
            KernelId::Bhep => self.eval(&[s], &[t]),
        }
    }

    /// Pointwise evaluation, any dimension.
    pub fn eval(&self, s: &[f64], t: &[f64]) -> f64 {
        if self.id != KernelId::Bhep {
            return self.eval1(s[0], t[0]);
        }
        let mut d2 = 0.0;
        let mut ns = 0.0;
        let mut nt = 0.0;
        let mut dot = 0.0;
        for (si, ti) in s.iter().zip(t) {
            d2 += (si - ti) * (si - ti);
            ns += si * si;
            nt += ti * ti;
            dot += si * ti;
        }
        (-d2 / 2.0).exp() - (1.0 + dot + dot * dot / 2.0) * (-(ns + nt) / 2.0).exp()
    }

    /// Sum-of-products description used for multivariate Gram assembly.
    pub fn separable_form(&self) -> Result<SeparableForm> {
        if self.id != KernelId::Bhep {
            if self.d != 1 {
                return Err(Error::Unsupported(format!(
                    "no separable form for {} with d > 1",
                    self.id.name()
                )));
            }
            return Ok(SeparableForm {
                terms: vec![SeparableTerm {
                    coeff: 1.0,
                    factors: vec![Factor::Whole],
                }],
            });
        }
        let d = self.d;
        let mut terms = Vec::with_capacity(2 + d + d * d);
        terms.push(SeparableTerm {
            coeff: 1.0,
            factors: vec![Factor::GaussDiff; d],
        });
        let zero = vec![Factor::PolyGauss { s_exp: 0, t_exp: 0 }; d];
        terms.push(SeparableTerm {
            coeff: -1.0,
            factors: zero.clone(),
        });
        for i in 0..d {
            let mut f = zero.clone();
            f[i] = Factor::PolyGauss { s_exp: 1, t_exp: 1 };
            terms.push(SeparableTerm {
                coeff: -1.0,
                factors: f,
            });
        }
        for i in 0..d {
            for j in 0..d {
                let mut f = zero.clone();
                if i == j {
                    f[i] = Factor::PolyGauss { s_exp: 2, t_exp: 2 };
                } else {
                    f[i] = Factor::PolyGauss { s_exp: 1, t_exp: 1 };
                    f[j] = Factor::PolyGauss { s_exp: 1, t_exp: 1 };
                }
                terms.push(SeparableTerm {
                    coeff: -0.5,
                    factors: f,
                });
            }
        }
        Ok(SeparableForm { terms })
    }
}

/// One univariate bivariate factor of a rank-1 tensor term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// The whole (univariate) kernel itself; used for the trivial d=1 form.
    Whole,
    /// Closed-form bivariate factor `e^{−(s−t)²/2}`.
    GaussDiff,
    /// Product factor `s^a e^{−s²/2} · t^b e^{−t²/2}`.
    PolyGauss { s_exp: u8, t_exp: u8 },
}

#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub coeff: f64,
    /// One factor per dimension.
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone)]
pub struct SeparableForm {
    pub terms: Vec<SeparableTerm>,
}

impl SeparableForm {
    /// Pointwise reconstruction; must agree with direct kernel evaluation.
    pub fn eval(&self, spec: &KernelSpec, s: &[f64], t: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let mut prod = term.coeff;
                for (i, factor) in term.factors.iter().enumerate() {
                    prod *= match factor {
                        Factor::Whole => spec.eval1(s[i], t[i]),
                        Factor::GaussDiff => {
                            let d = s[i] - t[i];
                            (-d * d / 2.0).exp()
                        }
                        Factor::PolyGauss { s_exp, t_exp } => {
                            s[i].powi(*s_exp as i32)
                                * (-s[i] * s[i] / 2.0).exp()
                                * t[i].powi(*t_exp as i32)
                                * (-t[i] * t[i] / 2.0).exp()
                        }
                    };
                }
                prod
            })
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Modified Bessel machinery for the VonMises kernel.
// ---------------------------------------------------------------------------

/// Lanczos approximation of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Modified Bessel function `I_ν(τ)` for real order `ν > −1`, by the
/// ascending series `Σ_m (τ/2)^{2m+ν} / (m! Γ(m+ν+1))`, truncated when a
/// term drops below `1e-17` of the partial sum.
pub fn bessel_i(nu: f64, tau: f64) -> f64 {
    let lh = (tau / 2.0).ln();
    let mut sum = 0.0;
    for m in 0..400 {
        let mf = m as f64;
        let term = ((2.0 * mf + nu) * lh - ln_gamma(mf + 1.0) - ln_gamma(mf + nu + 1.0)).exp();
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `q(s;τ) = I_|s|(τ)/I_0(τ)` (integer-order reflection `I_{−n} = I_n`).
pub fn bessel_ratio(s: f64, tau: f64) -> f64 {
    bessel_i(s.abs(), tau) / bessel_i(0.0, tau)
}

/// `∂q/∂s` by central finite difference in the order variable
/// (step `h = 1e-5`) on the plain real-order series, without the `|s|`
/// reflection.
pub fn bessel_ratio_dorder(s: f64, tau: f64) -> f64 {
    let h = 1e-5;
    (bessel_i(s + h, tau) - bessel_i(s - h, tau)) / (2.0 * h * bessel_i(0.0, tau))
}

/// `∂q/∂τ`, from `I'_ν(τ) = (I_{ν−1}(τ) + I_{ν+1}(τ))/2`:
/// `q̇(s;τ) = (q(s+1;τ) + q(|s−1|;τ))/2 − q(s;τ) q(1;τ)`.
pub fn bessel_ratio_dtau(s: f64, tau: f64) -> f64 {
    0.5 * (bessel_ratio(s + 1.0, tau) + bessel_ratio((s - 1.0).abs(), tau))
        - bessel_ratio(s, tau) * bessel_ratio(1.0, tau)
}

fn von_mises_eval(s: f64, t: f64, tau: f64) -> f64 {
    let q1 = bessel_ratio(1.0, tau);
    let den = 1.0 - q1 * q1 - q1 / tau;
    bessel_ratio((s - t).abs(), tau)
        - bessel_ratio(s, tau) * bessel_ratio(t, tau) * (1.0 + s * t / (tau * q1))
        - bessel_ratio_dtau(s, tau) * bessel_ratio_dtau(t, tau) / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trivial_values() {
        let k = KernelSpec::new(KernelId::CvM).unwrap();
        assert_abs_diff_eq!(k.eval1(0.3, 0.5), 0.15, epsilon = 1e-15);
        let k = KernelSpec::new(KernelId::K0Exp).unwrap();
        let l2 = 2f64.ln();
        assert_abs_diff_eq!(k.eval1(l2, l2), 0.25, epsilon = 1e-15);
        let k = KernelSpec::bhep(2).unwrap();
        assert_abs_diff_eq!(k.eval(&[0.0, 0.0], &[0.0, 0.0]), 0.0, epsilon = 1e-15);
        let k = KernelSpec::new(KernelId::HjmC).unwrap();
        assert_abs_diff_eq!(k.eval1(0.0, 0.0), 0.0, epsilon = 1e-15);
        let k = KernelSpec::new(KernelId::EbnerKZ).unwrap();
        assert_abs_diff_eq!(k.eval1(0.0, 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bessel_ratio_values() {
        assert_abs_diff_eq!(bessel_ratio(0.0, 3.7), 1.0, epsilon = 1e-15);
        // I_1(1)/I_0(1)
        assert_abs_diff_eq!(bessel_ratio(1.0, 1.0), 0.44639, epsilon = 1e-5);
        assert_abs_diff_eq!(bessel_i(1.0, 1.0), 0.565159, epsilon = 1e-6);
        assert_abs_diff_eq!(bessel_i(0.0, 1.0), 1.266066, epsilon = 1e-6);
        // I_s(tau) -> 0 as tau -> 0 for s > 0
        assert!(bessel_ratio(5.0, 1e-8) < 1e-30);
    }

    #[test]
    fn bessel_dorder_matches_richardson() {
        for &(s, tau) in &[(1.0, 1.0), (1.0, 5.0)] {
            let d = bessel_ratio_dorder(s, tau);
            let i0 = bessel_i(0.0, tau);
            let rich = |h: f64| (bessel_i(s + h, tau) - bessel_i(s - h, tau)) / (2.0 * h * i0);
            let refined = (4.0 * rich(5e-6) - rich(1e-5)) / 3.0;
            assert_abs_diff_eq!(d, refined, epsilon = 1e-8);
        }
    }

    #[test]
    fn symmetry_random_pairs() {
        let specs = [
            KernelSpec::new(KernelId::CvM).unwrap(),
            KernelSpec::new(KernelId::HN2000).unwrap(),
            KernelSpec::new(KernelId::EKS2021).unwrap(),
            KernelSpec::new(KernelId::BhRho).unwrap(),
            KernelSpec::new(KernelId::K0Exp).unwrap(),
            KernelSpec::new(KernelId::K2001).unwrap(),
            KernelSpec::new(KernelId::EbnerKZ).unwrap(),
            KernelSpec::new(KernelId::HjmC).unwrap(),
            KernelSpec::new(KernelId::DehK).unwrap(),
            KernelSpec::von_mises(2.0).unwrap(),
        ];
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for spec in &specs {
            for _ in 0..1000 {
                let (mut s, mut t) = (next(), next());
                match spec.support() {
                    Support::Unit => {}
                    Support::HalfLine => {
                        s *= 5.0;
                        t *= 5.0;
                    }
                    Support::Real => {
                        s = 6.0 * s - 3.0;
                        t = 6.0 * t - 3.0;
                    }
                    Support::Naturals => {
                        s = (s * 12.0).floor();
                        t = (t * 12.0).floor();
                    }
                    Support::RealD(_) => unreachable!(),
                }
                let a = spec.eval1(s, t);
                let b = spec.eval1(t, s);
                assert!(
                    (a - b).abs() <= 1e-13 * (1.0 + a.abs()),
                    "{} not symmetric at ({s},{t}): {a} vs {b}",
                    spec.id.name()
                );
                let diag = spec.eval1(s, s);
                assert!(diag >= -1e-13, "{} diagonal negative", spec.id.name());
            }
        }
    }

    #[test]
    fn separable_reconstruction() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for d in [2usize, 3] {
            let spec = KernelSpec::bhep(d).unwrap();
            let form = spec.separable_form().unwrap();
            assert_eq!(form.terms.len(), 2 + d + d * d);
            for _ in 0..50 {
                let s: Vec<f64> = (0..d).map(|_| next()).collect();
                let t: Vec<f64> = (0..d).map(|_| next()).collect();
                let a = spec.eval(&s, &t);
                let b = form.eval(&spec, &s, &t);
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
        let spec = KernelSpec::new(KernelId::CvM).unwrap();
        let form = spec.separable_form().unwrap();
        assert_eq!(form.terms.len(), 1);
        assert_abs_diff_eq!(form.eval(&spec, &[0.3], &[0.5]), 0.15, epsilon = 1e-15);
    }

    #[test]
    fn invalid_params() {
        assert!(KernelSpec::von_mises(-1.0).is_err());
        assert!(KernelSpec::bhep(4).is_err());
        assert!(KernelSpec::new(KernelId::VonMises).is_err());
    }
}

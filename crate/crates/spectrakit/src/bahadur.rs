//! Approximate Bahadur slopes and local approximate efficiencies from a
//! leading eigenvalue and a caller-supplied limit function `b(θ)`.
//!
//! The approximate slope of a weighted-L² statistic is
//! `c*(θ) = b(θ)²/λ₁`; the local slope is `b''(0)θ²/(2λ₁)`; the local
//! efficiency divides by the likelihood-ratio benchmark `2K(θ)` with `K`
//! the Kullback-Leibler distance to the null class.
//!
//! Two normalization conventions for `b` appear in the literature: the
//! limit in probability of `T_n/n`, and of `T_n/√n`. The machinery here is
//! agnostic: the caller chooses the normalization of `b`, and all outputs
//! scale accordingly (the slope is quadratic in `b`).

use crate::{Error, Result};

pub struct SlopeInputs<B, K>
where
    B: Fn(f64) -> f64,
    K: Fn(f64) -> f64,
{
    /// Largest eigenvalue of the covariance operator under the null.
    pub lambda1: f64,
    /// Limit in probability of the normalized statistic under the
    /// alternative with parameter θ; `b(0)` should be 0.
    pub b: B,
    /// Kullback-Leibler distance `K(θ)` from the alternative to the null
    /// class.
    pub kl: K,
    /// Finite-difference step for derivatives of `b` at 0.
    pub h: f64,
}

impl<B: Fn(f64) -> f64, K: Fn(f64) -> f64> SlopeInputs<B, K> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0) {
            return Err(Error::invalid("lambda1", "must be positive"));
        }
        if !(self.h > 0.0) {
            return Err(Error::invalid("h", "must be positive"));
        }
        Ok(())
    }

    /// Whether `b(0)` deviates visibly from 0; slope formulas assume it
    /// vanishes.
    pub fn b0_warning(&self) -> bool {
        (self.b)(0.0).abs() > 1e-10
    }

    /// Approximate Bahadur slope `c*(θ) = b(θ)²/λ₁`.
    pub fn approx_slope(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        let b = (self.b)(theta);
        Ok(b * b / self.lambda1)
    }

    /// Local approximate slope `b''(0)θ²/(2λ₁)` with `b''(0)` by central
    /// second difference, Richardson-refined over steps `h` and `h/2`.
    /// Errors out if the two step sizes disagree by more than 1e-4
    /// relative (unstable second difference).
    pub fn local_slope(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        let d2 = |h: f64| ((self.b)(h) - 2.0 * (self.b)(0.0) + (self.b)(-h)) / (h * h);
        let coarse = d2(self.h);
        let fine = d2(self.h / 2.0);
        let scale = coarse.abs().max(fine.abs());
        if scale > 1e-12 && (coarse - fine).abs() > 1e-4 * scale {
            return Err(Error::Unstable(format!(
                "second difference of b at 0 disagrees between steps {} and {}: {coarse} vs {fine}",
                self.h,
                self.h / 2.0
            )));
        }
        let b2 = (4.0 * fine - coarse) / 3.0;
        Ok(b2 * theta * theta / (2.0 * self.lambda1))
    }

    /// `local_slope(θ) / (2 K(θ))`; values above `1 + 1e-6` indicate
    /// inconsistent inputs (the LR test is optimal) and are returned
    /// as-is for the caller to flag.
    pub fn local_efficiency(&self, theta: f64) -> Result<f64> {
        let kl = (self.kl)(theta);
        if !(kl > 0.0) {
            return Err(Error::invalid("kl", format!("K(θ) must be positive, got {kl}")));
        }
        Ok(self.local_slope(theta)? / (2.0 * kl))
    }
}

/// Alternative densities commonly paired with the exponentiality and
/// normality statistics; provided for callers deriving `b(θ)` and `K(θ)`
/// pipelines externally. All take the alternative parameter `θ`.
pub mod alternatives {
    use crate::kernel::ln_gamma;

    /// Weibull: `e^{−x^{1+θ}} (1+θ) x^θ`, x ≥ 0.
    pub fn weibull(x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (-x.powf(1.0 + theta)).exp() * (1.0 + theta) * x.powf(theta)
    }

    /// Gamma: `x^θ e^{−x} / Γ(θ+1)`, x ≥ 0.
    pub fn gamma(x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (theta * x.ln() - x - ln_gamma(theta + 1.0)).exp()
    }

    /// Makeham: `e^{−x−θ(e^x−1)} (1+θ e^x)`, x ≥ 0.
    pub fn makeham(x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (-x - theta * (x.exp() - 1.0)).exp() * (1.0 + theta * x.exp())
    }

    /// Linear failure rate: `e^{−x−θx²/2} (1+θx)`, x ≥ 0.
    pub fn lfr(x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (-x - theta * x * x / 2.0).exp() * (1.0 + theta * x)
    }

    /// Mixture of exponentials with negative weights, EMNW(β):
    /// `(1+θ)e^{−x} − θβ e^{−βx}`, θ ∈ (0, 1/(β−1)], x ≥ 0.
    pub fn emnw(x: f64, theta: f64, beta: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (1.0 + theta) * (-x).exp() - theta * beta * (-beta * x).exp()
    }

    /// Lehmann: `(1+θ) F₀(x)^θ f₀(x)` for a null density/cdf pair.
    pub fn lehmann(x: f64, theta: f64, f0: impl Fn(f64) -> f64, cdf0: impl Fn(f64) -> f64) -> f64 {
        (1.0 + theta) * cdf0(x).powf(theta) * f0(x)
    }

    /// First Ley-Paindaveine:
    /// `f₀(x) e^{−θ(1−F₀(x))} (1+θF₀(x))`.
    pub fn ley_paindaveine1(
        x: f64,
        theta: f64,
        f0: impl Fn(f64) -> f64,
        cdf0: impl Fn(f64) -> f64,
    ) -> f64 {
        f0(x) * (-theta * (1.0 - cdf0(x))).exp() * (1.0 + theta * cdf0(x))
    }

    /// Second Ley-Paindaveine: `f₀(x)(1 − θπ cos(πF₀(x)))`.
    pub fn ley_paindaveine2(
        x: f64,
        theta: f64,
        f0: impl Fn(f64) -> f64,
        cdf0: impl Fn(f64) -> f64,
    ) -> f64 {
        let pi = std::f64::consts::PI;
        f0(x) * (1.0 - theta * pi * (pi * cdf0(x)).cos())
    }

    /// Contamination: `(1−θ)f₀(x) + (θ/σ) f₀((x−μ)/σ)`.
    pub fn contamination(
        x: f64,
        theta: f64,
        mu: f64,
        sigma: f64,
        f0: impl Fn(f64) -> f64,
    ) -> f64 {
        (1.0 - theta) * f0(x) + theta / sigma * f0((x - mu) / sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn inputs(
        lambda1: f64,
        b: impl Fn(f64) -> f64,
        kl: impl Fn(f64) -> f64,
    ) -> SlopeInputs<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
        SlopeInputs {
            lambda1,
            b,
            kl,
            h: 1e-4,
        }
    }

    #[test]
    fn approx_slope_basics() {
        let s = inputs(1.0, |t| t, |t| t * t);
        assert_abs_diff_eq!(s.approx_slope(0.5).unwrap(), 0.25);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let s = inputs(1.0 / pi2, |t| t, |t| t * t);
        // a_T = 1/λ₁ = π²
        assert_abs_diff_eq!(s.approx_slope(1.0).unwrap(), pi2, epsilon = 1e-12);
        let s = inputs(2.0, |_| 0.0, |t| t * t);
        assert_abs_diff_eq!(s.approx_slope(3.0).unwrap(), 0.0);
    }

    #[test]
    fn local_slope_values() {
        let s = inputs(1.0, |t| t * t, |t| t * t);
        assert_abs_diff_eq!(s.local_slope(0.1).unwrap(), 0.01, epsilon = 1e-10);
        let s = inputs(2.0, |t| t.sin() * t.sin(), |t| t * t);
        assert_abs_diff_eq!(s.local_slope(0.1).unwrap(), 0.005, epsilon = 1e-6);
        let s = inputs(1.0, |t| t * t * t, |t| t * t);
        assert_abs_diff_eq!(s.local_slope(0.1).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn efficiency_values() {
        let s = inputs(1.0, |t| t * t, |t| t * t / 2.0);
        assert_abs_diff_eq!(s.local_efficiency(0.2).unwrap(), 1.0, epsilon = 1e-9);
        let s = inputs(1.0, |t| t * t, |t| t * t);
        assert_abs_diff_eq!(s.local_efficiency(0.2).unwrap(), 0.5, epsilon = 1e-9);
        // stability in θ for smooth inputs
        let s = inputs(0.7, |t| (2.0 * t).cosh() - 1.0, |t| t * t);
        let e2 = s.local_efficiency(1e-2).unwrap();
        let e3 = s.local_efficiency(1e-3).unwrap();
        assert!((e2 - e3).abs() / e2.abs() < 1e-3);
    }

    #[test]
    fn scale_equivariance() {
        let c = 2.5f64;
        let base = inputs(1.3, |t| t + t * t, |t| t * t);
        let scaled_b = inputs(1.3, move |t| c * (t + t * t), |t| t * t);
        let scaled_l = inputs(1.3 * c, |t| t + t * t, |t| t * t);
        let th = 0.4;
        assert_abs_diff_eq!(
            scaled_b.approx_slope(th).unwrap(),
            c * c * base.approx_slope(th).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            scaled_l.approx_slope(th).unwrap(),
            base.approx_slope(th).unwrap() / c,
            epsilon = 1e-12
        );
    }

    #[test]
    fn error_paths() {
        let s = inputs(-1.0, |t| t, |t| t * t);
        assert!(s.approx_slope(0.1).is_err());
        let s = inputs(1.0, |t| t, |_| 0.0);
        assert!(s.local_efficiency(0.1).is_err());
        // |t| has no stable second derivative at 0
        let s = inputs(1.0, |t: f64| t.abs(), |t| t * t);
        assert!(s.local_slope(0.1).is_err());
    }

    #[test]
    fn alternative_densities_integrate_to_one() {
        let rule = crate::quad::legendre_rule_on(200, 0.0, 60.0);
        for theta in [0.2, 0.7] {
            // x^θ is singular at 0 for non-integer θ, capping the rule's
            // accuracy for these two families
            let total = rule.integrate(|x| alternatives::weibull(x, theta));
            assert_abs_diff_eq!(total, 1.0, epsilon = 2e-4);
            let total = rule.integrate(|x| alternatives::gamma(x, theta));
            assert_abs_diff_eq!(total, 1.0, epsilon = 2e-4);
            let total = rule.integrate(|x| alternatives::lfr(x, theta));
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
            let total = rule.integrate(|x| alternatives::emnw(x, theta, 3.0));
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
        let total = rule.integrate(|x| alternatives::makeham(x, 0.5));
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }
}

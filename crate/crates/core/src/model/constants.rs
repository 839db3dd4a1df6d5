//! Closed-form constants for the moment envelope and the extinction rates.

use thiserror::Error;

use super::{classify_hypothesis, inf_over_time, sup_over_time, CoefficientSet, Hypothesis};

/// Raised when an operation requires a specific noise hypothesis.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisError {
    #[error("operation requires hypothesis H1 (noise on growth rates only)")]
    NotH1,
    #[error("operation requires hypothesis H2 (noise on growth and inhibition)")]
    NotH2,
}

/// Constants of the exponential moment envelope
/// `E(x_t^t1 y_t^t2) <= exp(lambda1 + lambda2 exp(-d2 t))` under H1.
///
/// With `s = t1 + t2`:
///
/// ```text
/// d2      = min(t1 inf b1, t2 inf b2)
/// d1      = sup_t [ s1^2 t1 (t1-1)/2 + r1^2 t2 (t2-1)/2 + s1 r1 t1 t2 + t1 a1 + (c2 - a2) t2 ]
/// theta   = 1 / s
/// lambda1 = d1/d2 - s (1 - ln s)
/// lambda2 = t1 ln x0 + t2 ln y0 + s (1 - ln s) - d1/d2
/// ```
///
/// so `lambda1 + lambda2 = t1 ln x0 + t2 ln y0` identically, which pins the
/// envelope to the initial moment at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Constants {
    pub d1: f64,
    pub d2: f64,
    pub theta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Resolution of the time grid used for `d1` (0 when exact).
    pub d1_grid_spacing: f64,
}

impl Theorem2Constants {
    /// Envelope value at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        (self.lambda1 + self.lambda2 * (-self.d2 * t).exp()).exp()
    }

    /// Asymptotic envelope level `exp(lambda1)`.
    pub fn asymptote(&self) -> f64 {
        self.lambda1.exp()
    }
}

/// Computes the envelope constants for exponents `theta1, theta2 > 0` and
/// initial densities `x0, y0 > 0`. Requires H1.
pub fn theorem2_constants(
    c: &CoefficientSet,
    theta1: f64,
    theta2: f64,
    x0: f64,
    y0: f64,
) -> Result<Theorem2Constants, HypothesisError> {
    if classify_hypothesis(c) != Hypothesis::H1 {
        return Err(HypothesisError::NotH1);
    }
    assert!(
        theta1 > 0.0 && theta2 > 0.0 && x0 > 0.0 && y0 > 0.0,
        "theorem2_constants requires positive exponents and initial densities"
    );

    let d1 = sup_over_time(&[&c.sigma1, &c.rho1, &c.a1, &c.a2, &c.c2], |t| {
        let s1 = c.sigma1.eval(t);
        let r1 = c.rho1.eval(t);
        0.5 * s1 * s1 * theta1 * (theta1 - 1.0)
            + 0.5 * r1 * r1 * theta2 * (theta2 - 1.0)
            + s1 * r1 * theta1 * theta2
            + theta1 * c.a1.eval(t)
            + (c.c2.eval(t) - c.a2.eval(t)) * theta2
    });
    let d2 = (theta1 * c.b1.inf()).min(theta2 * c.b2.inf());
    let s = theta1 + theta2;
    let entropy = s * (1.0 - s.ln());
    // Computed so that lambda1 + lambda2 telescopes to the initial log-moment
    // exactly when x0 = y0 = 1, and to 1 ulp otherwise.
    let shift = entropy - d1.value / d2;
    let lambda1 = -shift;
    let lambda2 = theta1 * x0.ln() + theta2 * y0.ln() + shift;

    Ok(Theorem2Constants {
        d1: d1.value,
        d2,
        theta: 1.0 / s,
        lambda1,
        lambda2,
        d1_grid_spacing: d1.grid_spacing,
    })
}

/// Almost-sure exponential bound on the predator decay rate when prey is
/// absent: `limsup ln(y_t)/t <= -inf_t [a2(t) + rho1(t)^2 / 2]`. Requires H1.
pub fn predator_extinction_rate(c: &CoefficientSet) -> Result<f64, HypothesisError> {
    if classify_hypothesis(c) != Hypothesis::H1 {
        return Err(HypothesisError::NotH1);
    }
    let inf = inf_over_time(&[&c.a2, &c.rho1], |t| {
        let r1 = c.rho1.eval(t);
        c.a2.eval(t) + 0.5 * r1 * r1
    });
    Ok(-inf.value)
}

/// Which asymptotic regime the predator-free prey equation falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreySoloCase {
    /// `sup_t [a1 - sigma1^2/2] < 0`: almost-sure extinction at that rate.
    ExtinctionExponential,
    /// The supremum is zero (within tolerance): extinction in mean.
    ExtinctionMean,
    /// Positive supremum: only the logarithmic growth bound
    /// `limsup ln(x_t)/ln(t) <= 1` applies.
    LogGrowth,
}

/// Tolerance for declaring the criterion exactly critical. The zero case is
/// measure-zero and only meaningful for analytically constructed inputs.
pub const CRITICALITY_TOLERANCE: f64 = 1e-12;

/// Classifies the predator-free prey dynamics by `sup_t [a1(t) - sigma1(t)^2/2]`.
/// Requires H1. Returns the supremum together with the case.
pub fn prey_solo_criterion(c: &CoefficientSet) -> Result<(f64, PreySoloCase), HypothesisError> {
    if classify_hypothesis(c) != Hypothesis::H1 {
        return Err(HypothesisError::NotH1);
    }
    let sup = sup_over_time(&[&c.a1, &c.sigma1], |t| {
        let s1 = c.sigma1.eval(t);
        c.a1.eval(t) - 0.5 * s1 * s1
    });
    let case = if sup.value.abs() <= CRITICALITY_TOLERANCE {
        PreySoloCase::ExtinctionMean
    } else if sup.value < 0.0 {
        PreySoloCase::ExtinctionExponential
    } else {
        PreySoloCase::LogGrowth
    };
    Ok((sup.value, case))
}

/// Exponent/weight bundle for the H2 moment-boundedness check.
///
/// `theta1, theta2` are the moment exponents (must lie in `(0, 1]`),
/// `varsigma1, varsigma2` the positive weights, and `varrho1, varrho2` the
/// time-average exponents (must lie in `[0, 3)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    pub theta1: f64,
    pub theta2: f64,
    pub varsigma1: f64,
    pub varsigma2: f64,
    pub varrho1: f64,
    pub varrho2: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentSpecError {
    #[error("moment exponent theta{index} = {value} outside (0, 1]")]
    ThetaOutOfRange { index: u8, value: f64 },
    #[error("weight varsigma{index} = {value} must be positive")]
    NonPositiveWeight { index: u8, value: f64 },
    #[error("time-average exponent varrho{index} = {value} outside [0, 3)")]
    VarrhoOutOfRange { index: u8, value: f64 },
}

impl MomentSpec {
    pub fn validate(&self) -> Result<(), MomentSpecError> {
        for (i, theta) in [(1u8, self.theta1), (2, self.theta2)] {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(MomentSpecError::ThetaOutOfRange {
                    index: i,
                    value: theta,
                });
            }
        }
        for (i, w) in [(1u8, self.varsigma1), (2, self.varsigma2)] {
            if !(w > 0.0) {
                return Err(MomentSpecError::NonPositiveWeight { index: i, value: w });
            }
        }
        for (i, r) in [(1u8, self.varrho1), (2, self.varrho2)] {
            if !(0.0..3.0).contains(&r) {
                return Err(MomentSpecError::VarrhoOutOfRange { index: i, value: r });
            }
        }
        Ok(())
    }
}

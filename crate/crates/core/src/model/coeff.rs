//! Time-varying coefficients with exact analytic bounds.
//!
//! Every coefficient is restricted to one of three analytic shapes so that
//! its infimum and supremum over `t >= 0` are exact, never grid-approximated.
//! The bound checks consume those extrema directly, so grid error here would
//! contaminate every downstream verdict.

use thiserror::Error;

/// Shape tag of a [`CoefficientFn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    Constant,
    PiecewiseConstant,
    Sinusoidal,
}

/// A bounded coefficient function of time.
///
/// `PiecewiseConstant` is right-continuous: `values[i]` applies on
/// `[breakpoints[i-1], breakpoints[i])`, with `values[0]` before the first
/// breakpoint and the last value from the last breakpoint on.
/// `Sinusoidal` is `mean + amplitude * sin(2 pi t / period + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFn {
    Constant {
        value: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
}

/// Construction-time structural error (shape, not sign, problems).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidCoefficient {
    #[error("non-finite parameter in coefficient function")]
    NonFinite,
    #[error("sinusoidal period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("piecewise coefficient needs exactly one more value than breakpoints (got {values} values, {breakpoints} breakpoints)")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("piecewise breakpoints must be strictly increasing and nonnegative")]
    UnsortedBreakpoints,
}

impl CoefficientFn {
    pub fn constant(value: f64) -> Self {
        CoefficientFn::Constant { value }
    }

    pub fn sinusoidal(
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    ) -> Result<Self, InvalidCoefficient> {
        if !(mean.is_finite() && amplitude.is_finite() && period.is_finite() && phase.is_finite()) {
            return Err(InvalidCoefficient::NonFinite);
        }
        if period <= 0.0 {
            return Err(InvalidCoefficient::NonPositivePeriod(period));
        }
        Ok(CoefficientFn::Sinusoidal {
            mean,
            amplitude,
            period,
            phase,
        })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, InvalidCoefficient> {
        if breakpoints
            .iter()
            .chain(values.iter())
            .any(|v| !v.is_finite())
        {
            return Err(InvalidCoefficient::NonFinite);
        }
        if values.len() != breakpoints.len() + 1 {
            return Err(InvalidCoefficient::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        let sorted = breakpoints.windows(2).all(|w| w[0] < w[1])
            && breakpoints.first().is_none_or(|&b| b >= 0.0);
        if !sorted {
            return Err(InvalidCoefficient::UnsortedBreakpoints);
        }
        Ok(CoefficientFn::PiecewiseConstant {
            breakpoints,
            values,
        })
    }

    pub fn kind(&self) -> CoefficientKind {
        match self {
            CoefficientFn::Constant { .. } => CoefficientKind::Constant,
            CoefficientFn::PiecewiseConstant { .. } => CoefficientKind::PiecewiseConstant,
            CoefficientFn::Sinusoidal { .. } => CoefficientKind::Sinusoidal,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let seg = breakpoints.partition_point(|&b| b <= t);
                values[seg]
            }
            CoefficientFn::Sinusoidal {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (std::f64::consts::TAU * t / period + phase).sin(),
        }
    }

    /// Exact infimum over `t >= 0`.
    pub fn inf(&self) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            CoefficientFn::Sinusoidal {
                mean, amplitude, ..
            } => mean - amplitude.abs(),
        }
    }

    /// Exact supremum over `t >= 0`.
    pub fn sup(&self) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            CoefficientFn::Sinusoidal {
                mean, amplitude, ..
            } => mean + amplitude.abs(),
        }
    }

    /// True iff the function is identically zero.
    pub fn is_zero(&self) -> bool {
        self.inf() == 0.0 && self.sup() == 0.0
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientFn::Constant { .. })
    }

    fn period(&self) -> Option<f64> {
        match self {
            CoefficientFn::Sinusoidal { period, .. } => Some(*period),
            _ => None,
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            CoefficientFn::PiecewiseConstant { breakpoints, .. } => breakpoints,
            _ => &[],
        }
    }
}

/// The eleven coefficient functions of the model.
///
/// `a1, a2, b1, b2, c1, c2, e` are the deterministic rates (all required to
/// have a positive infimum); `sigma1, sigma2, rho1, rho2` are the noise
/// intensities (nonnegative and bounded).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a1: CoefficientFn,
    pub a2: CoefficientFn,
    pub b1: CoefficientFn,
    pub b2: CoefficientFn,
    pub c1: CoefficientFn,
    pub c2: CoefficientFn,
    pub e: CoefficientFn,
    pub sigma1: CoefficientFn,
    pub sigma2: CoefficientFn,
    pub rho1: CoefficientFn,
    pub rho2: CoefficientFn,
}

impl CoefficientSet {
    /// All eleven coefficients with their canonical names, in declaration
    /// order.
    pub fn all(&self) -> [(&'static str, &CoefficientFn); 11] {
        [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("e", &self.e),
            ("sigma1", &self.sigma1),
            ("sigma2", &self.sigma2),
            ("rho1", &self.rho1),
            ("rho2", &self.rho2),
        ]
    }
}

/// A single validation failure, naming the offending coefficient and bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub coefficient: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.coefficient, self.message)
    }
}

/// Outcome of [`validate_coefficients`]; OK iff no violations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "OK")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks the boundedness and sign invariants of a coefficient set.
///
/// The deterministic rates must have `inf > 0`; the noise intensities must be
/// nonnegative; every declared bound must be finite.
pub fn validate_coefficients(c: &CoefficientSet) -> ValidationReport {
    let mut violations = Vec::new();
    for (name, f) in c.all() {
        if !f.inf().is_finite() || !f.sup().is_finite() {
            violations.push(Violation {
                coefficient: name,
                message: "declared bounds must be finite".into(),
            });
        }
    }
    for (name, f) in [
        ("a1", &c.a1),
        ("a2", &c.a2),
        ("b1", &c.b1),
        ("b2", &c.b2),
        ("c1", &c.c1),
        ("c2", &c.c2),
        ("e", &c.e),
    ] {
        if !(f.inf() > 0.0) {
            violations.push(Violation {
                coefficient: name,
                message: format!("{name} infimum {} <= 0 (must be positive)", f.inf()),
            });
        }
    }
    for (name, f) in [
        ("sigma1", &c.sigma1),
        ("sigma2", &c.sigma2),
        ("rho1", &c.rho1),
        ("rho2", &c.rho2),
    ] {
        if f.inf() < 0.0 {
            violations.push(Violation {
                coefficient: name,
                message: format!("{name} infimum {} < 0 (noise must be nonnegative)", f.inf()),
            });
        }
    }
    ValidationReport { violations }
}

/// Noise structure of a coefficient set.
///
/// `H1`: noise acts only on the growth rates (`sigma2 = rho2 = 0`,
/// `inf sigma1 > 0`, `inf rho1 > 0`). `H2`: noise also acts on the inhibition
/// terms (all four intensities have positive infimum). The two are mutually
/// exclusive by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H1,
    H2,
    Neither,
}

pub fn classify_hypothesis(c: &CoefficientSet) -> Hypothesis {
    if c.sigma2.is_zero() && c.rho2.is_zero() && c.sigma1.inf() > 0.0 && c.rho1.inf() > 0.0 {
        Hypothesis::H1
    } else if c.sigma1.inf() > 0.0
        && c.sigma2.inf() > 0.0
        && c.rho1.inf() > 0.0
        && c.rho2.inf() > 0.0
    {
        Hypothesis::H2
    } else {
        Hypothesis::Neither
    }
}

/// A numerically evaluated extremum over `t >= 0`.
///
/// `grid_spacing == 0` marks an exact value (constant or piecewise-constant
/// inputs, where sampling every segment is exhaustive); otherwise it reports
/// the time-grid resolution the extremum was taken over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeExtremum {
    pub value: f64,
    pub grid_spacing: f64,
}

// Dense enough for sinusoidal mixtures: 1e4 points per period.
const POINTS_PER_PERIOD: f64 = 1e4;
const MAX_GRID_POINTS: usize = 4_000_000;

/// Sample times sufficient to take extrema of any combination of the given
/// coefficients: exact for constant/piecewise inputs, dense per-period
/// sampling (plus breakpoints) once a sinusoid is involved.
pub(crate) fn extremum_times(coeffs: &[&CoefficientFn]) -> (Vec<f64>, f64) {
    let mut times = vec![0.0];
    let last_bp = coeffs
        .iter()
        .flat_map(|f| f.breakpoints().iter().copied())
        .fold(0.0f64, f64::max);
    for f in coeffs {
        times.extend_from_slice(f.breakpoints());
    }

    let periods: Vec<f64> = coeffs.iter().filter_map(|f| f.period()).collect();
    let mut spacing = 0.0;
    if let Some(&min_period) = periods
        .iter()
        .min_by(|a, b| a.partial_cmp(b).expect("finite period"))
    {
        let max_period = periods.iter().copied().fold(0.0f64, f64::max);
        // Cover several periods beyond the last breakpoint so phase
        // combinations of incommensurate sinusoids are well sampled.
        let horizon = last_bp + 4.0 * max_period;
        let step = min_period / POINTS_PER_PERIOD;
        let n = ((horizon / step).ceil() as usize).min(MAX_GRID_POINTS);
        let step = horizon / n as f64;
        times.extend((1..=n).map(|i| i as f64 * step));
        spacing = step;
    }
    (times, spacing)
}

/// Supremum of `f(t)` over `t >= 0`, where `f` is built from the given
/// coefficients only.
pub(crate) fn sup_over_time(coeffs: &[&CoefficientFn], f: impl Fn(f64) -> f64) -> TimeExtremum {
    let (times, grid_spacing) = extremum_times(coeffs);
    let value = times
        .iter()
        .map(|&t| f(t))
        .fold(f64::NEG_INFINITY, f64::max);
    TimeExtremum {
        value,
        grid_spacing,
    }
}

/// Infimum counterpart of [`sup_over_time`].
pub(crate) fn inf_over_time(coeffs: &[&CoefficientFn], f: impl Fn(f64) -> f64) -> TimeExtremum {
    let sup = sup_over_time(coeffs, |t| -f(t));
    TimeExtremum {
        value: -sup.value,
        grid_spacing: sup.grid_spacing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::constant_set;

    #[test]
    fn constant_bounds_are_the_value() {
        let f = CoefficientFn::constant(0.7);
        assert_eq!(f.inf(), 0.7);
        assert_eq!(f.sup(), 0.7);
        assert_eq!(f.eval(12.3), 0.7);
    }

    #[test]
    fn sinusoidal_bounds() {
        let f = CoefficientFn::sinusoidal(0.5, -0.2, 3.0, 1.0).unwrap();
        assert!((f.inf() - 0.3).abs() < 1e-15);
        assert!((f.sup() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn piecewise_eval_is_right_continuous() {
        let f = CoefficientFn::piecewise(vec![1.0, 2.0], vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(f.eval(0.0), 0.1);
        assert_eq!(f.eval(0.999), 0.1);
        assert_eq!(f.eval(1.0), 0.2);
        assert_eq!(f.eval(2.0), 0.3);
        assert_eq!(f.eval(100.0), 0.3);
        assert_eq!(f.inf(), 0.1);
        assert_eq!(f.sup(), 0.3);
    }

    #[test]
    fn piecewise_structural_errors() {
        assert!(matches!(
            CoefficientFn::piecewise(vec![1.0], vec![0.1]),
            Err(InvalidCoefficient::LengthMismatch { .. })
        ));
        assert!(matches!(
            CoefficientFn::piecewise(vec![2.0, 1.0], vec![0.1, 0.2, 0.3]),
            Err(InvalidCoefficient::UnsortedBreakpoints)
        ));
        assert!(matches!(
            CoefficientFn::sinusoidal(1.0, 0.1, 0.0, 0.0),
            Err(InvalidCoefficient::NonPositivePeriod(_))
        ));
    }

    #[test]
    fn validate_accepts_positive_constants() {
        let c = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.1, 0.0);
        assert!(validate_coefficients(&c).is_ok());
    }

    #[test]
    fn validate_rejects_nonpositive_rate() {
        let mut c = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.1, 0.0);
        c.a1 = CoefficientFn::constant(-1.0);
        let report = validate_coefficients(&c);
        assert!(!report.is_ok());
        assert!(report
            .violations
            .iter()
            .any(|v| v.coefficient == "a1" && v.message.contains("infimum")));
    }

    #[test]
    fn validate_rejects_negative_noise_infimum() {
        let mut c = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.1, 0.0);
        c.sigma1 = CoefficientFn::sinusoidal(0.2, 0.3, 1.0, 0.0).unwrap();
        let report = validate_coefficients(&c);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].coefficient, "sigma1");
    }

    #[test]
    fn classify_examples() {
        let h1 = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.1, 0.0);
        assert_eq!(classify_hypothesis(&h1), Hypothesis::H1);

        let h2 = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.1, 0.1, 0.1);
        assert_eq!(classify_hypothesis(&h2), Hypothesis::H2);

        let neither = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.0, 0.0);
        assert_eq!(classify_hypothesis(&neither), Hypothesis::Neither);
    }

    #[test]
    fn hypotheses_are_mutually_exclusive() {
        // H1 forces sigma2 == 0 while H2 requires inf sigma2 > 0, so no set
        // can satisfy both; spot-check a few random-ish combinations.
        for s2 in [0.0, 0.05, 0.2] {
            let c = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, s2, 0.1, s2);
            let h = classify_hypothesis(&c);
            assert!(h == Hypothesis::H1 || h == Hypothesis::H2);
            assert_eq!(h == Hypothesis::H1, s2 == 0.0);
        }
    }

    #[test]
    fn sup_over_time_exact_for_piecewise_combinations() {
        let f = CoefficientFn::piecewise(vec![1.0], vec![1.0, 3.0]).unwrap();
        let g = CoefficientFn::piecewise(vec![2.0], vec![5.0, 0.5]).unwrap();
        // f + g takes values 6.0, 8.0, 3.5 on its three segments.
        let ext = sup_over_time(&[&f, &g], |t| f.eval(t) + g.eval(t));
        assert_eq!(ext.value, 8.0);
        assert_eq!(ext.grid_spacing, 0.0);
    }

    #[test]
    fn sup_over_time_dense_for_sinusoids() {
        let f = CoefficientFn::sinusoidal(1.0, 0.5, 2.0, 0.3).unwrap();
        let ext = sup_over_time(&[&f], |t| f.eval(t));
        assert!(ext.grid_spacing > 0.0);
        assert!((ext.value - 1.5).abs() < 1e-6);
    }
}

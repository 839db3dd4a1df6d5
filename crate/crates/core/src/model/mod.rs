//! Model definition: coefficients, vector fields and closed-form constants.
//!
//! The drift and diffusion fields are provided both in the original density
//! coordinates `(x, y)` and in logarithmic coordinates `(xi, eta) = (ln x, ln y)`.
//! The two are related by Ito's formula: for `x = exp(xi)`,
//!
//! ```text
//! d xi = (drift_x / x - diffusion_x^2 / (2 x^2)) dt + (diffusion_x / x) dw
//! ```
//!
//! and this identity is property-tested to 1e-12 over random states.

mod coeff;
mod constants;

pub use coeff::{
    classify_hypothesis, validate_coefficients, CoefficientFn, CoefficientKind, CoefficientSet,
    Hypothesis, InvalidCoefficient, ValidationReport, Violation,
};
pub use constants::{
    predator_extinction_rate, prey_solo_criterion, theorem2_constants, HypothesisError, MomentSpec,
    MomentSpecError, PreySoloCase, Theorem2Constants,
};

pub(crate) use coeff::{inf_over_time, sup_over_time};

/// Population densities; both strictly positive in any reachable state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

/// Log coordinates `(xi, eta) = (ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogState {
    pub xi: f64,
    pub eta: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_log(self) -> LogState {
        LogState {
            xi: self.x.ln(),
            eta: self.y.ln(),
        }
    }
}

impl LogState {
    pub fn new(xi: f64, eta: f64) -> Self {
        Self { xi, eta }
    }

    pub fn to_state(self) -> State {
        State {
            x: self.xi.exp(),
            y: self.eta.exp(),
        }
    }
}

/// Ratio-dependent interaction pressure on the prey, `c1 y / (x + e y)`.
///
/// The value at the origin is defined as 0: it is only reachable in the
/// absent-species reductions, where the multiplying density vanishes as well.
#[inline]
pub(crate) fn prey_pressure(x: f64, y: f64, c1: f64, e: f64) -> f64 {
    let denom = x + e * y;
    if denom > 0.0 {
        c1 * y / denom
    } else {
        0.0
    }
}

/// Ratio-dependent growth contribution to the predator, `c2 x / (x + e y)`.
#[inline]
pub(crate) fn predator_gain(x: f64, y: f64, c2: f64, e: f64) -> f64 {
    let denom = x + e * y;
    if denom > 0.0 {
        c2 * x / denom
    } else {
        0.0
    }
}

/// Drift of the density system: rates of change of `x` and `y`.
pub fn drift_xy(s: State, t: f64, c: &CoefficientSet) -> (f64, f64) {
    let (x, y) = (s.x, s.y);
    let dx = (c.a1.eval(t) - c.b1.eval(t) * x - prey_pressure(x, y, c.c1.eval(t), c.e.eval(t))) * x;
    let dy =
        (-c.a2.eval(t) - c.b2.eval(t) * y + predator_gain(x, y, c.c2.eval(t), c.e.eval(t))) * y;
    (dx, dy)
}

/// Diffusion of the density system. Both components multiply the same
/// scalar Brownian increment.
pub fn diffusion_xy(s: State, t: f64, c: &CoefficientSet) -> (f64, f64) {
    let gx = (c.sigma1.eval(t) + c.sigma2.eval(t) * s.x) * s.x;
    let gy = (c.rho1.eval(t) + c.rho2.eval(t) * s.y) * s.y;
    (gx, gy)
}

/// Per-capita prey drift in log coordinates, including the Ito correction.
///
/// Shared by the full system (`y = exp(eta)`) and the predator-absent
/// reduction (`y = 0`, which kills the interaction term).
#[inline]
pub(crate) fn prey_log_drift(x: f64, y: f64, t: f64, c: &CoefficientSet) -> f64 {
    let g = c.sigma1.eval(t) + c.sigma2.eval(t) * x;
    c.a1.eval(t) - 0.5 * g * g - c.b1.eval(t) * x - prey_pressure(x, y, c.c1.eval(t), c.e.eval(t))
}

/// Per-capita predator drift in log coordinates, including the Ito correction.
#[inline]
pub(crate) fn predator_log_drift(x: f64, y: f64, t: f64, c: &CoefficientSet) -> f64 {
    let h = c.rho1.eval(t) + c.rho2.eval(t) * y;
    -c.a2.eval(t) - 0.5 * h * h - c.b2.eval(t) * y + predator_gain(x, y, c.c2.eval(t), c.e.eval(t))
}

/// Drift of the log-transformed system.
pub fn drift_log(ls: LogState, t: f64, c: &CoefficientSet) -> (f64, f64) {
    let x = ls.xi.exp();
    let y = ls.eta.exp();
    (prey_log_drift(x, y, t, c), predator_log_drift(x, y, t, c))
}

/// Diffusion of the log-transformed system, `(s1 + s2 x, r1 + r2 y)`.
pub fn diffusion_log(ls: LogState, t: f64, c: &CoefficientSet) -> (f64, f64) {
    (
        c.sigma1.eval(t) + c.sigma2.eval(t) * ls.xi.exp(),
        c.rho1.eval(t) + c.rho2.eval(t) * ls.eta.exp(),
    )
}

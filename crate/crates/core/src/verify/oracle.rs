//! Closed-form and high-order reference solutions used as independent checks.

use crate::integrate::{simulate_path, BrownianDriver, PathRecord, Scheme, SimConfig};
use crate::model::CoefficientSet;

use super::VerifyError;

/// Moment of geometric Brownian motion `dx = a1 x dt + s1 x dw`:
/// `E[x_t^theta] = x0^theta exp(theta a1 t + theta (theta - 1) s1^2 t / 2)`.
///
/// Matches the model's prey equation when `b1 = c1 = 0` with constant
/// coefficients, giving the ensemble estimators an exact target.
pub fn gbm_oracle_moment(a1: f64, sigma1: f64, x0: f64, theta: f64, t: f64) -> f64 {
    x0.powf(theta) * (theta * a1 * t + 0.5 * theta * (theta - 1.0) * sigma1 * sigma1 * t).exp()
}

/// Zero-noise reference trajectory: classical RK4 on the log-coordinate ODE
/// at `dt/10`, sampled on the same save grid as `cfg`.
pub fn deterministic_oracle(
    cfg: &SimConfig,
    c: &CoefficientSet,
) -> Result<PathRecord, VerifyError> {
    let noiseless =
        c.sigma1.is_zero() && c.sigma2.is_zero() && c.rho1.is_zero() && c.rho2.is_zero();
    if !noiseless {
        return Err(VerifyError::NoisyOracleConfig);
    }
    let fine = SimConfig {
        dt: cfg.dt / 10.0,
        save_every: cfg.save_every * 10,
        scheme: Scheme::Rk4Deterministic,
        ..cfg.clone()
    };
    let mut noise = BrownianDriver::new(0, 0, fine.dt);
    Ok(simulate_path(&fine, c, 0, &mut noise)?)
}

//! Numerically certified suprema over the state space.
//!
//! Several bounds are only proved to exist, with no closed form. The harness
//! stands in a grid supremum over `(x, y) in [1e-4, X]^2` (log-spaced) and one
//! coefficient period in `t`, growing `X` until doubling both the extent and
//! the density moves the supremum by less than 1%. A supremum that keeps
//! growing is reported as unbounded rather than silently truncated.

use thiserror::Error;

use crate::model::CoefficientSet;

/// A stabilized grid supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surrogate {
    pub value: f64,
    /// Extent at which the value stabilized.
    pub x_max: f64,
    /// Spatial grid points per axis at the final refinement.
    pub points_per_axis: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("grid supremum did not stabilize: still {last:.6e} at extent {x_max:.1e} (previous {previous:.6e})")]
pub struct UnboundedSurrogate {
    pub last: f64,
    pub previous: f64,
    pub x_max: f64,
}

const X_MIN: f64 = 1e-4;
const X_MAX_CAP: f64 = 1.0e7;
const INITIAL_EXTENT: f64 = 100.0;
const INITIAL_PER_DECADE: usize = 16;
const MAX_PER_DECADE: usize = 64;
const TIME_POINTS: usize = 101;

/// Time samples covering one period of the coefficient set (plus its
/// breakpoints); a single sample for all-constant sets.
pub(crate) fn surrogate_time_grid(c: &CoefficientSet) -> Vec<f64> {
    let mut horizon = 0.0f64;
    let mut times = vec![0.0];
    for (_, f) in c.all() {
        match f {
            crate::model::CoefficientFn::Sinusoidal { period, .. } => {
                horizon = horizon.max(*period)
            }
            crate::model::CoefficientFn::PiecewiseConstant { breakpoints, .. } => {
                times.extend_from_slice(breakpoints);
                horizon = horizon.max(breakpoints.last().copied().unwrap_or(0.0));
            }
            crate::model::CoefficientFn::Constant { .. } => {}
        }
    }
    if horizon > 0.0 {
        let step = horizon / (TIME_POINTS - 1) as f64;
        times.extend((1..TIME_POINTS).map(|i| i as f64 * step));
    }
    times
}

fn eval_sup(
    f: &(impl Fn(f64, f64, f64) -> f64 + Sync),
    x_max: f64,
    per_decade: usize,
    tgrid: &[f64],
) -> f64 {
    let decades = (x_max / X_MIN).log10();
    let n = (decades * per_decade as f64).ceil() as usize + 1;
    let log_lo = X_MIN.ln();
    let log_hi = x_max.ln();
    let grid: Vec<f64> = (0..n)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let mut best = f64::NEG_INFINITY;
    for &t in tgrid {
        for &x in &grid {
            for &y in &grid {
                let v = f(x, y, t);
                if v > best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Supremum of `f(x, y, t)` with self-certified stabilization.
pub fn grid_supremum(
    c: &CoefficientSet,
    f: impl Fn(f64, f64, f64) -> f64 + Sync,
) -> Result<Surrogate, UnboundedSurrogate> {
    let tgrid = surrogate_time_grid(c);
    let mut x_max = INITIAL_EXTENT;
    let mut per_decade = INITIAL_PER_DECADE;
    let mut previous = eval_sup(&f, x_max, per_decade, &tgrid);
    loop {
        let next_extent = 2.0 * x_max;
        let next_density = (per_decade * 2).min(MAX_PER_DECADE);
        let value = eval_sup(&f, next_extent, next_density, &tgrid);
        if (value - previous).abs() <= 0.01 * value.abs().max(previous.abs()).max(0.01) {
            return Ok(Surrogate {
                value,
                x_max: next_extent,
                points_per_axis: ((next_extent / X_MIN).log10() * next_density as f64).ceil()
                    as usize
                    + 1,
            });
        }
        if next_extent >= X_MAX_CAP {
            return Err(UnboundedSurrogate {
                last: value,
                previous,
                x_max: next_extent,
            });
        }
        previous = value;
        x_max = next_extent;
        per_decade = next_density;
    }
}

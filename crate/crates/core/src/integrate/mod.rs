//! Pathwise integration in log coordinates.
//!
//! All schemes advance `(xi, eta) = (ln x, ln y)`, so every recorded density
//! `exp(xi)` is strictly positive by construction. A guard on the log
//! magnitude marks numerically exploding paths instead of crashing: moment
//! harnesses must count divergent paths, not die on them.

mod driver;

pub use driver::{BrownianDriver, NoiseSource};

use thiserror::Error;

use crate::model::{
    diffusion_log, drift_log, predator_log_drift, prey_log_drift, CoefficientSet, LogState,
};

/// Integration scheme. The Milstein correction only differs from
/// Euler-Maruyama when the log-space diffusion is state-dependent
/// (`sigma2` or `rho2` nonzero); `Rk4Deterministic` is the zero-noise
/// reference integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyamaLog,
    MilsteinLog,
    Rk4Deterministic,
}

/// Which subsystem to integrate. The absent-species modes integrate the
/// one-dimensional reduced equations (with the interaction term dropped),
/// not a clamped two-dimensional state: log coordinates cannot represent 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Full,
    PreyAbsent,
    PredatorAbsent,
}

pub const DEFAULT_BLOWUP_GUARD: f64 = 400.0;
pub const DEFAULT_SAVE_EVERY: u64 = 100;
const MAX_STEPS: f64 = 1e9;

/// Simulation parameters for a single path or ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Record every `save_every`-th step (step 0 is always recorded).
    pub save_every: u64,
    pub x0: f64,
    pub y0: f64,
    pub scheme: Scheme,
    pub mode: SimMode,
    /// Cap on |log state| beyond which a path is marked as blown up.
    pub blowup_guard: f64,
}

impl SimConfig {
    pub fn new(t_end: f64, dt: f64, x0: f64, y0: f64) -> Self {
        Self {
            t_end,
            dt,
            save_every: DEFAULT_SAVE_EVERY,
            x0,
            y0,
            scheme: Scheme::EulerMaruyamaLog,
            mode: SimMode::Full,
            blowup_guard: DEFAULT_BLOWUP_GUARD,
        }
    }

    /// Number of fixed-size steps to reach `t_end`.
    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    pub fn validate(&self, c: &CoefficientSet) -> Result<(), InvalidConfig> {
        if !(self.dt > 0.0) || self.dt > self.t_end || !self.t_end.is_finite() {
            return Err(InvalidConfig::BadStep {
                dt: self.dt,
                t_end: self.t_end,
            });
        }
        let ratio = self.t_end / self.dt;
        if ratio > MAX_STEPS {
            return Err(InvalidConfig::TooManySteps(ratio));
        }
        if (ratio.round() * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(InvalidConfig::NonCommensurate {
                t_end: self.t_end,
                dt: self.dt,
            });
        }
        if self.save_every == 0 {
            return Err(InvalidConfig::BadSaveEvery);
        }
        if !(self.x0 > 0.0 && self.y0 > 0.0) {
            return Err(InvalidConfig::BadInitial {
                x0: self.x0,
                y0: self.y0,
            });
        }
        if !(self.blowup_guard > 0.0) {
            return Err(InvalidConfig::BadGuard);
        }
        if self.scheme == Scheme::Rk4Deterministic {
            let noisy =
                !(c.sigma1.is_zero() && c.sigma2.is_zero() && c.rho1.is_zero() && c.rho2.is_zero());
            if noisy {
                return Err(InvalidConfig::Rk4WithNoise);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidConfig {
    #[error("dt must be positive and at most t_end (dt = {dt}, t_end = {t_end})")]
    BadStep { dt: f64, t_end: f64 },
    #[error("t_end/dt = {0:.3e} exceeds the 1e9 step budget")]
    TooManySteps(f64),
    #[error("t_end = {t_end} is not an integer multiple of dt = {dt}")]
    NonCommensurate { t_end: f64, dt: f64 },
    #[error("save_every must be at least 1")]
    BadSaveEvery,
    #[error("initial densities must be positive (x0 = {x0}, y0 = {y0})")]
    BadInitial { x0: f64, y0: f64 },
    #[error("blow-up guard must be positive")]
    BadGuard,
    #[error("RK4_DETERMINISTIC requires all noise coefficients identically zero")]
    Rk4WithNoise,
}

/// Signals that a step left the guarded log-magnitude box.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("log state exceeded the blow-up guard at t = {time}")]
pub struct BlowUp {
    pub time: f64,
}

#[inline]
fn guard_ok(v: f64, guard: f64) -> bool {
    // Written so that NaN fails the check.
    v.abs() <= guard
}

/// One Euler-Maruyama step of the full log system. Both components consume
/// the same scalar increment `dw`.
pub fn em_step_log(
    ls: LogState,
    t: f64,
    dt: f64,
    dw: f64,
    c: &CoefficientSet,
    guard: f64,
) -> Result<LogState, BlowUp> {
    let (dxi, deta) = drift_log(ls, t, c);
    let (hxi, heta) = diffusion_log(ls, t, c);
    let next = LogState::new(ls.xi + dxi * dt + hxi * dw, ls.eta + deta * dt + heta * dw);
    if guard_ok(next.xi, guard) && guard_ok(next.eta, guard) {
        Ok(next)
    } else {
        Err(BlowUp { time: t + dt })
    }
}

/// One Milstein step of the full log system.
///
/// The correction per component is `h (dh/dstate) (dw^2 - dt) / 2` with
/// `dh/dxi = sigma2 exp(xi)` (resp. `rho2 exp(eta)`); under H1 it vanishes
/// and the step coincides with [`em_step_log`].
pub fn milstein_step_log(
    ls: LogState,
    t: f64,
    dt: f64,
    dw: f64,
    c: &CoefficientSet,
    guard: f64,
) -> Result<LogState, BlowUp> {
    let x = ls.xi.exp();
    let y = ls.eta.exp();
    let hxi = c.sigma1.eval(t) + c.sigma2.eval(t) * x;
    let heta = c.rho1.eval(t) + c.rho2.eval(t) * y;
    let bracket = dw * dw - dt;
    let xi = ls.xi
        + prey_log_drift(x, y, t, c) * dt
        + hxi * dw
        + 0.5 * hxi * (c.sigma2.eval(t) * x) * bracket;
    let eta = ls.eta
        + predator_log_drift(x, y, t, c) * dt
        + heta * dw
        + 0.5 * heta * (c.rho2.eval(t) * y) * bracket;
    if guard_ok(xi, guard) && guard_ok(eta, guard) {
        Ok(LogState::new(xi, eta))
    } else {
        Err(BlowUp { time: t + dt })
    }
}

/// First blow-up of a path, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpInfo {
    pub time: f64,
    pub step: u64,
}

/// A sampled trajectory on the save grid.
///
/// In the absent-species modes the missing component is `None`. Recorded
/// densities are strictly positive; times are strictly increasing from 0.
/// When the path blew up the record is truncated at the last valid save
/// point and `blowup` reports the first offending time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub path_index: u64,
    pub mode: SimMode,
    pub times: Vec<f64>,
    pub xs: Option<Vec<f64>>,
    pub ys: Option<Vec<f64>>,
    pub blowup: Option<BlowUpInfo>,
    /// Last valid log state (at `t_end`, or just before the blow-up).
    pub terminal: LogState,
}

impl PathRecord {
    pub fn blew_up(&self) -> bool {
        self.blowup.is_some()
    }

    /// Density series of the given component, when present.
    pub fn xs(&self) -> Option<&[f64]> {
        self.xs.as_deref()
    }

    pub fn ys(&self) -> Option<&[f64]> {
        self.ys.as_deref()
    }
}

// State of whichever subsystem is being integrated.
#[derive(Clone, Copy)]
enum ModeState {
    Full(LogState),
    PreyAbsent { eta: f64 },
    PredatorAbsent { xi: f64 },
}

impl ModeState {
    fn initial(cfg: &SimConfig) -> Self {
        match cfg.mode {
            SimMode::Full => ModeState::Full(LogState::new(cfg.x0.ln(), cfg.y0.ln())),
            SimMode::PreyAbsent => ModeState::PreyAbsent { eta: cfg.y0.ln() },
            SimMode::PredatorAbsent => ModeState::PredatorAbsent { xi: cfg.x0.ln() },
        }
    }

    fn terminal(self) -> LogState {
        match self {
            ModeState::Full(ls) => ls,
            ModeState::PreyAbsent { eta } => LogState::new(f64::NEG_INFINITY, eta),
            ModeState::PredatorAbsent { xi } => LogState::new(xi, f64::NEG_INFINITY),
        }
    }
}

#[inline]
fn rk4_step(f: impl Fn(f64, f64) -> f64, v: f64, t: f64, dt: f64) -> f64 {
    let k1 = f(t, v);
    let k2 = f(t + 0.5 * dt, v + 0.5 * dt * k1);
    let k3 = f(t + 0.5 * dt, v + 0.5 * dt * k2);
    let k4 = f(t + dt, v + dt * k3);
    v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn step_state(
    state: ModeState,
    t: f64,
    dt: f64,
    dw: f64,
    c: &CoefficientSet,
    scheme: Scheme,
    guard: f64,
) -> Result<ModeState, BlowUp> {
    match state {
        ModeState::Full(ls) => {
            let next = match scheme {
                Scheme::EulerMaruyamaLog => em_step_log(ls, t, dt, dw, c, guard)?,
                Scheme::MilsteinLog => milstein_step_log(ls, t, dt, dw, c, guard)?,
                Scheme::Rk4Deterministic => {
                    let (xi, eta) = rk4_step_pair(ls, t, dt, c);
                    LogState::new(xi, eta)
                }
            };
            if !(guard_ok(next.xi, guard) && guard_ok(next.eta, guard)) {
                return Err(BlowUp { time: t + dt });
            }
            Ok(ModeState::Full(next))
        }
        ModeState::PreyAbsent { eta } => {
            let y = eta.exp();
            let h = c.rho1.eval(t) + c.rho2.eval(t) * y;
            let next = match scheme {
                Scheme::EulerMaruyamaLog => predator_log_drift(0.0, y, t, c) * dt + h * dw,
                Scheme::MilsteinLog => {
                    predator_log_drift(0.0, y, t, c) * dt
                        + h * dw
                        + 0.5 * h * (c.rho2.eval(t) * y) * (dw * dw - dt)
                }
                Scheme::Rk4Deterministic => {
                    return Ok(ModeState::PreyAbsent {
                        eta: rk4_guarded(
                            |s, v| predator_log_drift(0.0, v.exp(), s, c),
                            eta,
                            t,
                            dt,
                            guard,
                        )?,
                    })
                }
            };
            let eta = eta + next;
            if guard_ok(eta, guard) {
                Ok(ModeState::PreyAbsent { eta })
            } else {
                Err(BlowUp { time: t + dt })
            }
        }
        ModeState::PredatorAbsent { xi } => {
            let x = xi.exp();
            let g = c.sigma1.eval(t) + c.sigma2.eval(t) * x;
            let next = match scheme {
                Scheme::EulerMaruyamaLog => prey_log_drift(x, 0.0, t, c) * dt + g * dw,
                Scheme::MilsteinLog => {
                    prey_log_drift(x, 0.0, t, c) * dt
                        + g * dw
                        + 0.5 * g * (c.sigma2.eval(t) * x) * (dw * dw - dt)
                }
                Scheme::Rk4Deterministic => {
                    return Ok(ModeState::PredatorAbsent {
                        xi: rk4_guarded(
                            |s, v| prey_log_drift(v.exp(), 0.0, s, c),
                            xi,
                            t,
                            dt,
                            guard,
                        )?,
                    })
                }
            };
            let xi = xi + next;
            if guard_ok(xi, guard) {
                Ok(ModeState::PredatorAbsent { xi })
            } else {
                Err(BlowUp { time: t + dt })
            }
        }
    }
}

fn rk4_step_pair(ls: LogState, t: f64, dt: f64, c: &CoefficientSet) -> (f64, f64) {
    let f = |s: f64, v: LogState| {
        let x = v.xi.exp();
        let y = v.eta.exp();
        (prey_log_drift(x, y, s, c), predator_log_drift(x, y, s, c))
    };
    let k1 = f(t, ls);
    let at = |k: (f64, f64), h: f64| LogState::new(ls.xi + h * k.0, ls.eta + h * k.1);
    let k2 = f(t + 0.5 * dt, at(k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, at(k2, 0.5 * dt));
    let k4 = f(t + dt, at(k3, dt));
    (
        ls.xi + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        ls.eta + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

fn rk4_guarded(
    f: impl Fn(f64, f64) -> f64,
    v: f64,
    t: f64,
    dt: f64,
    guard: f64,
) -> Result<f64, BlowUp> {
    let next = rk4_step(f, v, t, dt);
    if guard_ok(next, guard) {
        Ok(next)
    } else {
        Err(BlowUp { time: t + dt })
    }
}

/// Integrates one path from `t = 0` to `t_end`, recording densities every
/// `save_every` steps.
///
/// Validates the simulation parameters but, deliberately, not the
/// coefficient invariants: oracle configurations (zero inhibition, zero
/// noise on one species) are exercised by tests through this same entry
/// point. Callers holding user input should run
/// [`crate::model::validate_coefficients`] first.
pub fn simulate_path(
    cfg: &SimConfig,
    c: &CoefficientSet,
    path_index: u64,
    noise: &mut impl NoiseSource,
) -> Result<PathRecord, InvalidConfig> {
    cfg.validate(c)?;
    let n_steps = cfg.n_steps();
    let n_saves = (n_steps / cfg.save_every) as usize + 1;

    let mut times = Vec::with_capacity(n_saves);
    let record_x = cfg.mode != SimMode::PreyAbsent;
    let record_y = cfg.mode != SimMode::PredatorAbsent;
    let mut xs = record_x.then(|| Vec::with_capacity(n_saves));
    let mut ys = record_y.then(|| Vec::with_capacity(n_saves));

    let mut state = ModeState::initial(cfg);
    let mut blowup = None;
    let deterministic = cfg.scheme == Scheme::Rk4Deterministic;

    let mut save = |state: &ModeState, t: f64| {
        times.push(t);
        match *state {
            ModeState::Full(ls) => {
                xs.as_mut().expect("full mode records x").push(ls.xi.exp());
                ys.as_mut().expect("full mode records y").push(ls.eta.exp());
            }
            ModeState::PreyAbsent { eta } => {
                ys.as_mut().expect("prey-absent records y").push(eta.exp())
            }
            ModeState::PredatorAbsent { xi } => xs
                .as_mut()
                .expect("predator-absent records x")
                .push(xi.exp()),
        }
    };

    save(&state, 0.0);
    for step in 0..n_steps {
        let t = step as f64 * cfg.dt;
        let dw = if deterministic {
            0.0
        } else {
            noise.increment(step)
        };
        match step_state(state, t, cfg.dt, dw, c, cfg.scheme, cfg.blowup_guard) {
            Ok(next) => {
                state = next;
                if (step + 1) % cfg.save_every == 0 {
                    save(&state, (step + 1) as f64 * cfg.dt);
                }
            }
            Err(b) => {
                blowup = Some(BlowUpInfo {
                    time: b.time,
                    step: step + 1,
                });
                break;
            }
        }
    }

    Ok(PathRecord {
        path_index,
        mode: cfg.mode,
        times,
        xs,
        ys,
        blowup,
        terminal: state.terminal(),
    })
}

/// Strong-convergence-order estimate from coupled dyadic refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    /// Fitted slope of `log2(strong error)` against `log2(dt)`.
    pub order: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    /// `(dt, strong error at t_end)` per level, coarsest first.
    pub levels: Vec<(f64, f64)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("need between 3 and 6 dyadic levels, got {0}")]
    InsufficientLevels(usize),
    #[error(transparent)]
    Config(#[from] InvalidConfig),
    #[error("every sample path blew up; no error statistics available")]
    AllPathsBlewUp,
}

// The reference grid refines the coarsest level by 2^6.
const REFERENCE_REFINEMENT: usize = 64;

/// Estimates the strong order of `cfg.scheme` at `t_end` by integrating the
/// same Brownian paths at `n_levels` dyadic step sizes below `dt_coarse` and
/// comparing against a reference at `dt_coarse / 64`. Coarse increments are
/// sums of the fine ones, so all levels share one underlying path.
pub fn estimate_strong_order(
    cfg: &SimConfig,
    c: &CoefficientSet,
    master_seed: u64,
    n_paths: u64,
    dt_coarse: f64,
    n_levels: usize,
) -> Result<OrderEstimate, OrderError> {
    if !(3..=6).contains(&n_levels) {
        return Err(OrderError::InsufficientLevels(n_levels));
    }
    let coarse_cfg = SimConfig {
        dt: dt_coarse,
        ..cfg.clone()
    };
    coarse_cfg.validate(c)?;
    let n_coarse = coarse_cfg.n_steps() as usize;
    let n_fine = n_coarse * REFERENCE_REFINEMENT;
    let dt_fine = dt_coarse / REFERENCE_REFINEMENT as f64;

    let mut error_sums = vec![0.0f64; n_levels];
    let mut used = 0u64;

    let mut fine = vec![0.0f64; n_fine];
    let mut level_incs = vec![0.0f64; n_fine];
    for path in 0..n_paths {
        let mut driver = BrownianDriver::new(master_seed, path, dt_fine);
        for (k, slot) in fine.iter_mut().enumerate() {
            *slot = driver.increment(k as u64);
        }
        let Some(reference) = integrate_with_increments(cfg, c, dt_fine, &fine) else {
            continue;
        };
        let mut level_states = Vec::with_capacity(n_levels);
        for level in 0..n_levels {
            let stride = REFERENCE_REFINEMENT >> level;
            let dt_level = dt_coarse / (1 << level) as f64;
            let n_level = n_fine / stride;
            for (i, slot) in level_incs[..n_level].iter_mut().enumerate() {
                *slot = fine[i * stride..(i + 1) * stride].iter().sum();
            }
            level_states.push((
                dt_level,
                integrate_with_increments(cfg, c, dt_level, &level_incs[..n_level]),
            ));
        }
        if level_states.iter().any(|(_, s)| s.is_none()) {
            continue;
        }
        used += 1;
        for (level, (_, state)) in level_states.iter().enumerate() {
            error_sums[level] += density_distance(cfg.mode, state.unwrap(), reference);
        }
    }
    if used == 0 {
        return Err(OrderError::AllPathsBlewUp);
    }

    let levels: Vec<(f64, f64)> = (0..n_levels)
        .map(|level| {
            (
                dt_coarse / (1 << level) as f64,
                error_sums[level] / used as f64,
            )
        })
        .collect();

    let pts: Vec<(f64, f64)> = levels
        .iter()
        .map(|&(dt, err)| (dt.log2(), err.max(f64::MIN_POSITIVE).log2()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let order = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - my - order * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(OrderEstimate {
        order,
        fit_residual: residual,
        levels,
    })
}

/// Terminal state after consuming the given increments, or `None` on blow-up.
fn integrate_with_increments(
    cfg: &SimConfig,
    c: &CoefficientSet,
    dt: f64,
    increments: &[f64],
) -> Option<ModeState> {
    let mut state = ModeState::initial(cfg);
    for (k, &dw) in increments.iter().enumerate() {
        let t = k as f64 * dt;
        state = step_state(state, t, dt, dw, c, cfg.scheme, cfg.blowup_guard).ok()?;
    }
    Some(state)
}

fn density_distance(mode: SimMode, a: ModeState, b: ModeState) -> f64 {
    match (mode, a, b) {
        (SimMode::Full, ModeState::Full(u), ModeState::Full(v)) => {
            let dx = u.xi.exp() - v.xi.exp();
            let dy = u.eta.exp() - v.eta.exp();
            (dx * dx + dy * dy).sqrt()
        }
        (
            SimMode::PreyAbsent,
            ModeState::PreyAbsent { eta: u },
            ModeState::PreyAbsent { eta: v },
        ) => (u.exp() - v.exp()).abs(),
        (
            SimMode::PredatorAbsent,
            ModeState::PredatorAbsent { xi: u },
            ModeState::PredatorAbsent { xi: v },
        ) => (u.exp() - v.exp()).abs(),
        _ => unreachable!("mode and state variant always agree"),
    }
}

//! Deterministic parallel ensembles and pathwise estimators.
//!
//! Paths are simulated in fixed-size chunks; chunks run in parallel but are
//! reduced strictly in path-index order, so every statistic is bit-identical
//! regardless of thread count. Blown-up paths are excluded from statistics
//! and counted in `n_blowups` (never silently dropped).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::integrate::{
    simulate_path, BrownianDriver, InvalidConfig, PathRecord, SimConfig, SimMode,
};
use crate::model::CoefficientSet;

/// 95% normal quantile used for all confidence intervals.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Prey,
    Predator,
}

/// A per-save-time scalar functional of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `x^theta1 * y^theta2`; a zero exponent drops that factor, which is the
    /// only form allowed for an absent species.
    Moment { theta1: f64, theta2: f64 },
    /// `w1 * x^theta1 + w2 * y^theta2`.
    WeightedPower {
        theta1: f64,
        theta2: f64,
        w1: f64,
        w2: f64,
    },
    /// `ln x` or `ln y`.
    LogDensity(Species),
}

impl Functional {
    fn check_mode(&self, mode: SimMode) -> Result<(), EnsembleError> {
        let needs_x = match self {
            Functional::Moment { theta1, .. } => *theta1 != 0.0,
            Functional::WeightedPower { w1, .. } => *w1 != 0.0,
            Functional::LogDensity(s) => *s == Species::Prey,
        };
        let needs_y = match self {
            Functional::Moment { theta2, .. } => *theta2 != 0.0,
            Functional::WeightedPower { w2, .. } => *w2 != 0.0,
            Functional::LogDensity(s) => *s == Species::Predator,
        };
        if needs_x && mode == SimMode::PreyAbsent {
            return Err(EnsembleError::IncompatibleFunctional(
                "functional needs prey density but mode is PREY_ABSENT".into(),
            ));
        }
        if needs_y && mode == SimMode::PredatorAbsent {
            return Err(EnsembleError::IncompatibleFunctional(
                "functional needs predator density but mode is PREDATOR_ABSENT".into(),
            ));
        }
        Ok(())
    }

    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        #[inline]
        fn pow(base: f64, exp: f64) -> f64 {
            if exp == 0.0 {
                1.0
            } else if exp == 1.0 {
                base
            } else {
                base.powf(exp)
            }
        }
        match *self {
            Functional::Moment { theta1, theta2 } => pow(x, theta1) * pow(y, theta2),
            Functional::WeightedPower {
                theta1,
                theta2,
                w1,
                w2,
            } => {
                let px = if w1 == 0.0 { 0.0 } else { w1 * pow(x, theta1) };
                let py = if w2 == 0.0 { 0.0 } else { w2 * pow(y, theta2) };
                px + py
            }
            Functional::LogDensity(Species::Prey) => x.ln(),
            Functional::LogDensity(Species::Predator) => y.ln(),
        }
    }
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeStat {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl TimeStat {
    #[inline]
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Standard error of the mean; 0 for fewer than two samples.
    pub fn standard_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n as f64 - 1.0) / self.n as f64).sqrt()
        }
    }
}

/// Per-save-time statistics of the requested functionals over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub n_paths: u64,
    pub n_blowups: u64,
    pub stats: Vec<(Functional, Vec<TimeStat>)>,
    pub wall_time: Duration,
}

/// Moment estimate at one save time with a 95% normal confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub time: f64,
    pub point_estimate: f64,
    pub standard_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_effective: u64,
}

/// Least-squares slope of a log-density regression over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub window: Window,
    pub r_squared: f64,
}

/// Closed time window `[t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Self { t_lo, t_hi }
    }

    /// The tail window `[t_end/2, t_end]` over which limsup-type statistics
    /// are taken at finite horizon.
    pub fn tail(t_end: f64) -> Self {
        Self {
            t_lo: 0.5 * t_end,
            t_hi: t_end,
        }
    }

    #[inline]
    fn contains(&self, t: f64) -> bool {
        let eps = 1e-9 * self.t_hi.abs().max(1.0);
        t >= self.t_lo - eps && t <= self.t_hi + eps
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error(transparent)]
    Config(#[from] InvalidConfig),
    #[error("need at least one path")]
    NoPaths,
    #[error("{0}")]
    IncompatibleFunctional(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("functional was not registered with the ensemble")]
    UnknownFunctional,
    #[error("time {0} is not on the save grid")]
    OffGrid(f64),
    #[error("path blew up; statistic undefined")]
    BlownUpPath,
    #[error("no save points in the requested window")]
    EmptyWindow,
    #[error("window [{0}, {1}] is invalid here")]
    InvalidWindow(f64, f64),
    #[error("species not simulated in this mode")]
    SpeciesAbsent,
    #[error("statistic requires FULL mode")]
    WrongMode,
    #[error("log regression needs strictly positive values")]
    NonPositiveValue,
}

// Chunk size for parallel execution; fixed so that reduction order (and
// therefore every statistic) is independent of thread scheduling.
const CHUNK: u64 = 256;

/// Runs `n_paths` paths under one master seed, accumulating the requested
/// functionals per save time and collecting `per_path` for every non-blown
/// path (`None` marks a blown-up slot).
pub fn run_ensemble_with<T: Send>(
    cfg: &SimConfig,
    c: &CoefficientSet,
    master_seed: u64,
    n_paths: u64,
    functionals: &[Functional],
    per_path: impl Fn(&PathRecord) -> T + Sync,
) -> Result<(EnsembleSummary, Vec<Option<T>>), EnsembleError> {
    if n_paths == 0 {
        return Err(EnsembleError::NoPaths);
    }
    cfg.validate(c)?;
    for f in functionals {
        f.check_mode(cfg.mode)?;
    }
    let start = Instant::now();

    let times: Vec<f64> = {
        let n_steps = cfg.n_steps();
        (0..=n_steps / cfg.save_every)
            .map(|k| (k * cfg.save_every) as f64 * cfg.dt)
            .collect()
    };
    let mut stats: Vec<(Functional, Vec<TimeStat>)> = functionals
        .iter()
        .map(|&f| (f, vec![TimeStat::default(); times.len()]))
        .collect();
    let mut extras: Vec<Option<T>> = Vec::with_capacity(n_paths as usize);
    let mut n_blowups = 0u64;

    let mut chunk_start = 0u64;
    while chunk_start < n_paths {
        let chunk_end = (chunk_start + CHUNK).min(n_paths);
        let records: Vec<(PathRecord, Option<T>)> = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|p| {
                let mut noise = BrownianDriver::new(master_seed, p, cfg.dt);
                let rec =
                    simulate_path(cfg, c, p, &mut noise).expect("config validated before the run");
                let extra = (!rec.blew_up()).then(|| per_path(&rec));
                (rec, extra)
            })
            .collect();
        for (rec, extra) in records {
            if rec.blew_up() {
                n_blowups += 1;
                extras.push(None);
                continue;
            }
            accumulate(&mut stats, &rec);
            extras.push(extra);
        }
        chunk_start = chunk_end;
    }

    Ok((
        EnsembleSummary {
            times,
            n_paths,
            n_blowups,
            stats,
            wall_time: start.elapsed(),
        },
        extras,
    ))
}

/// [`run_ensemble_with`] without per-path extras.
pub fn run_ensemble(
    cfg: &SimConfig,
    c: &CoefficientSet,
    master_seed: u64,
    n_paths: u64,
    functionals: &[Functional],
) -> Result<EnsembleSummary, EnsembleError> {
    run_ensemble_with(cfg, c, master_seed, n_paths, functionals, |_| ()).map(|(s, _)| s)
}

/// Simulates and keeps all path records (parallel, index order preserved).
pub fn run_paths(
    cfg: &SimConfig,
    c: &CoefficientSet,
    master_seed: u64,
    n_paths: u64,
) -> Result<Vec<PathRecord>, EnsembleError> {
    if n_paths == 0 {
        return Err(EnsembleError::NoPaths);
    }
    cfg.validate(c)?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut noise = BrownianDriver::new(master_seed, p, cfg.dt);
            simulate_path(cfg, c, p, &mut noise).expect("config validated before the run")
        })
        .collect())
}

/// Aggregates prebuilt records into an [`EnsembleSummary`]. Records are
/// processed in increasing `path_index` order, making the result invariant
/// under permutations of the input.
pub fn summarize_paths(
    paths: &[PathRecord],
    functionals: &[Functional],
) -> Result<EnsembleSummary, EnsembleError> {
    let Some(first_live) = paths.iter().find(|p| !p.blew_up()) else {
        return Err(EnsembleError::NoPaths);
    };
    for f in functionals {
        f.check_mode(first_live.mode)?;
    }
    let start = Instant::now();
    let times = first_live.times.clone();
    let mut stats: Vec<(Functional, Vec<TimeStat>)> = functionals
        .iter()
        .map(|&f| (f, vec![TimeStat::default(); times.len()]))
        .collect();

    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by_key(|&i| paths[i].path_index);

    let mut n_blowups = 0;
    for i in order {
        let rec = &paths[i];
        if rec.blew_up() {
            n_blowups += 1;
            continue;
        }
        accumulate(&mut stats, rec);
    }
    Ok(EnsembleSummary {
        times,
        n_paths: paths.len() as u64,
        n_blowups,
        stats,
        wall_time: start.elapsed(),
    })
}

fn accumulate(stats: &mut [(Functional, Vec<TimeStat>)], rec: &PathRecord) {
    let n = rec.times.len();
    for (f, series) in stats.iter_mut() {
        debug_assert_eq!(series.len(), n, "all live paths share the save grid");
        for i in 0..n {
            let x = rec.xs.as_ref().map_or(f64::NAN, |v| v[i]);
            let y = rec.ys.as_ref().map_or(f64::NAN, |v| v[i]);
            series[i].push(f.eval(x, y));
        }
    }
}

/// Sample moment `E[x_t^theta1 y_t^theta2]` at a save time, with CI.
pub fn estimate_moment(
    summary: &EnsembleSummary,
    theta1: f64,
    theta2: f64,
    t: f64,
) -> Result<MomentEstimate, EstimatorError> {
    let series = summary
        .stats
        .iter()
        .find_map(|(f, s)| match f {
            Functional::Moment {
                theta1: a,
                theta2: b,
            } if *a == theta1 && *b == theta2 => Some(s),
            _ => None,
        })
        .ok_or(EstimatorError::UnknownFunctional)?;
    let eps = 1e-9 * t.abs().max(1.0);
    let idx = summary
        .times
        .iter()
        .position(|&ti| (ti - t).abs() <= eps)
        .ok_or(EstimatorError::OffGrid(t))?;
    let stat = &series[idx];
    let se = stat.standard_error();
    Ok(MomentEstimate {
        time: summary.times[idx],
        point_estimate: stat.mean,
        standard_error: se,
        ci_low: stat.mean - Z95 * se,
        ci_high: stat.mean + Z95 * se,
        n_effective: stat.n,
    })
}

/// Trapezoidal time average `(1/T) \int_0^T (w1 x^r1 + w2 y^r2) ds` on the
/// save grid.
pub fn time_average_moment(
    path: &PathRecord,
    varrho1: f64,
    varrho2: f64,
    varsigma1: f64,
    varsigma2: f64,
) -> Result<f64, EstimatorError> {
    if path.blew_up() {
        return Err(EstimatorError::BlownUpPath);
    }
    if path.times.len() < 2 {
        return Err(EstimatorError::EmptyWindow);
    }
    if varsigma1 != 0.0 && path.xs.is_none() {
        return Err(EstimatorError::SpeciesAbsent);
    }
    if varsigma2 != 0.0 && path.ys.is_none() {
        return Err(EstimatorError::SpeciesAbsent);
    }
    let f = Functional::WeightedPower {
        theta1: varrho1,
        theta2: varrho2,
        w1: varsigma1,
        w2: varsigma2,
    };
    let value = |i: usize| {
        let x = path.xs.as_ref().map_or(f64::NAN, |v| v[i]);
        let y = path.ys.as_ref().map_or(f64::NAN, |v| v[i]);
        f.eval(x, y)
    };
    let mut integral = 0.0;
    for i in 1..path.times.len() {
        integral += 0.5 * (value(i - 1) + value(i)) * (path.times[i] - path.times[i - 1]);
    }
    let horizon = path.times[path.times.len() - 1] - path.times[0];
    Ok(integral / horizon)
}

/// Least-squares slope of `ln(density)` against `t` over the window.
pub fn log_slope(
    path: &PathRecord,
    species: Species,
    window: Window,
) -> Result<SlopeEstimate, EstimatorError> {
    if path.blew_up() {
        return Err(EstimatorError::BlownUpPath);
    }
    let series = match species {
        Species::Prey => path.xs.as_ref(),
        Species::Predator => path.ys.as_ref(),
    }
    .ok_or(EstimatorError::SpeciesAbsent)?;

    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (i, &t) in path.times.iter().enumerate() {
        if window.contains(t) {
            let v = series[i];
            if !(v > 0.0) {
                return Err(EstimatorError::NonPositiveValue);
            }
            pts.push((t, v.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(EstimatorError::EmptyWindow);
    }

    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stv: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let slope = stv / stt;
    let intercept = mv - slope * mt;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mv).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(SlopeEstimate {
        slope,
        intercept,
        window,
        r_squared,
    })
}

/// Log-growth statistic: maximum of `(t1 ln x_t + t2 ln y_t) / ln t` over the
/// windowed save grid. The window must start at `t >= e` so `ln t >= 1`.
pub fn loggrowth_stat(
    path: &PathRecord,
    theta1: f64,
    theta2: f64,
    window: Window,
) -> Result<f64, EstimatorError> {
    if path.blew_up() {
        return Err(EstimatorError::BlownUpPath);
    }
    if path.mode != SimMode::Full {
        return Err(EstimatorError::WrongMode);
    }
    if window.t_lo < std::f64::consts::E {
        return Err(EstimatorError::InvalidWindow(window.t_lo, window.t_hi));
    }
    let xs = path.xs.as_ref().ok_or(EstimatorError::SpeciesAbsent)?;
    let ys = path.ys.as_ref().ok_or(EstimatorError::SpeciesAbsent)?;
    let mut best = f64::NEG_INFINITY;
    for (i, &t) in path.times.iter().enumerate() {
        if window.contains(t) {
            best = best.max((theta1 * xs[i].ln() + theta2 * ys[i].ln()) / t.ln());
        }
    }
    if best.is_infinite() {
        return Err(EstimatorError::EmptyWindow);
    }
    Ok(best)
}

/// Empirical `p`-quantile: smallest sample value with at least a `p` fraction
/// of the sample at or below it.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=1.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in sample"));
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::BlowUpInfo;
    use crate::model::LogState;
    use crate::testkit::{benchmark_h1, constant_set};

    fn synthetic_path(times: Vec<f64>, xs: Vec<f64>, ys: Vec<f64>, index: u64) -> PathRecord {
        PathRecord {
            path_index: index,
            mode: SimMode::Full,
            terminal: LogState::new(
                xs.last().copied().unwrap_or(1.0).ln(),
                ys.last().copied().unwrap_or(1.0).ln(),
            ),
            times,
            xs: Some(xs),
            ys: Some(ys),
            blowup: None,
        }
    }

    #[test]
    fn single_path_summary_has_zero_variance() {
        let c = benchmark_h1();
        let cfg = SimConfig::new(1.0, 1e-2, 1.0, 1.0);
        let f = Functional::Moment {
            theta1: 1.0,
            theta2: 1.0,
        };
        let summary = run_ensemble(&cfg, &c, 0, 1, &[f]).unwrap();
        let m = estimate_moment(&summary, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.standard_error, 0.0);
        assert_eq!(m.n_effective, 1);
        assert_eq!(m.ci_low, m.point_estimate);
    }

    #[test]
    fn zero_noise_ensemble_is_degenerate() {
        let c = constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.0, 0.0, 0.0, 0.0);
        let cfg = SimConfig {
            save_every: 10,
            ..SimConfig::new(1.0, 1e-2, 1.0, 1.0)
        };
        let f = Functional::Moment {
            theta1: 1.0,
            theta2: 0.0,
        };
        let summary = run_ensemble(&cfg, &c, 9, 100, &[f]).unwrap();
        for t in [0.0, 0.5, 1.0] {
            let m = estimate_moment(&summary, 1.0, 0.0, t).unwrap();
            assert_eq!(m.standard_error, 0.0, "all paths identical at t = {t}");
        }
    }

    #[test]
    fn doubling_paths_preserves_prefix() {
        let c = benchmark_h1();
        let cfg = SimConfig::new(0.5, 1e-2, 1.0, 1.0);
        let half = run_paths(&cfg, &c, 31, 8).unwrap();
        let full = run_paths(&cfg, &c, 31, 16).unwrap();
        assert_eq!(&full[..8], &half[..]);
    }

    #[test]
    fn moment_of_zeroth_power_is_one() {
        let c = benchmark_h1();
        let cfg = SimConfig {
            save_every: 10,
            ..SimConfig::new(0.5, 1e-2, 1.0, 1.0)
        };
        let f = Functional::Moment {
            theta1: 0.0,
            theta2: 0.0,
        };
        let summary = run_ensemble(&cfg, &c, 0, 50, &[f]).unwrap();
        let m = estimate_moment(&summary, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(m.point_estimate, 1.0);
        assert_eq!(m.ci_high - m.ci_low, 0.0);
    }

    #[test]
    fn unknown_functional_and_off_grid_errors() {
        let c = benchmark_h1();
        let cfg = SimConfig::new(0.5, 1e-2, 1.0, 1.0);
        let f = Functional::Moment {
            theta1: 1.0,
            theta2: 0.0,
        };
        let summary = run_ensemble(&cfg, &c, 0, 4, &[f]).unwrap();
        assert_eq!(
            estimate_moment(&summary, 2.0, 0.0, 0.5),
            Err(EstimatorError::UnknownFunctional)
        );
        assert_eq!(
            estimate_moment(&summary, 1.0, 0.0, 0.123),
            Err(EstimatorError::OffGrid(0.123))
        );
    }

    #[test]
    fn functional_mode_compatibility() {
        let c = benchmark_h1();
        let cfg = SimConfig {
            mode: SimMode::PreyAbsent,
            ..SimConfig::new(0.5, 1e-2, 1.0, 1.0)
        };
        let needs_x = Functional::Moment {
            theta1: 1.0,
            theta2: 0.0,
        };
        assert!(matches!(
            run_ensemble(&cfg, &c, 0, 2, &[needs_x]),
            Err(EnsembleError::IncompatibleFunctional(_))
        ));
        let y_only = Functional::Moment {
            theta1: 0.0,
            theta2: 2.0,
        };
        assert!(run_ensemble(&cfg, &c, 0, 2, &[y_only]).is_ok());
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let c = benchmark_h1();
        let cfg = SimConfig::new(0.5, 1e-2, 1.0, 1.0);
        let mut paths = run_paths(&cfg, &c, 5, 64).unwrap();
        let f = [Functional::Moment {
            theta1: 1.0,
            theta2: 1.0,
        }];
        let forward = summarize_paths(&paths, &f).unwrap();
        paths.reverse();
        paths.swap(3, 40);
        let shuffled = summarize_paths(&paths, &f).unwrap();
        assert_eq!(forward.stats, shuffled.stats);
    }

    #[test]
    fn blowup_injection_changes_count_not_statistics() {
        let c = benchmark_h1();
        let cfg = SimConfig::new(0.5, 1e-2, 1.0, 1.0);
        let mut paths = run_paths(&cfg, &c, 5, 32).unwrap();
        let f = [Functional::Moment {
            theta1: 1.0,
            theta2: 1.0,
        }];
        let base = summarize_paths(&paths, &f).unwrap();
        for k in 0..3u64 {
            paths.push(PathRecord {
                path_index: 1000 + k,
                mode: SimMode::Full,
                times: vec![0.0],
                xs: Some(vec![1.0]),
                ys: Some(vec![1.0]),
                blowup: Some(BlowUpInfo {
                    time: 0.1,
                    step: 10,
                }),
                terminal: LogState::new(0.0, 0.0),
            });
        }
        let injected = summarize_paths(&paths, &f).unwrap();
        assert_eq!(injected.n_blowups, base.n_blowups + 3);
        assert_eq!(injected.stats, base.stats);
    }

    #[test]
    fn gbm_moments_within_ci() {
        // Interaction-free prey: dx = a1 x dt + s1 x dw (b1 = c1 = 0,
        // test-only). Log-space Euler is exact for this equation, so the
        // estimates are unbiased at any dt.
        let c = constant_set(1.0, 0.5, 0.0, 1.0, 0.0, 0.8, 1.0, 0.2, 0.0, 0.1, 0.0);
        let cfg = SimConfig {
            mode: SimMode::PredatorAbsent,
            save_every: 10,
            ..SimConfig::new(1.0, 1e-2, 1.0, 1.0)
        };
        let fs = [
            Functional::Moment {
                theta1: 1.0,
                theta2: 0.0,
            },
            Functional::Moment {
                theta1: 2.0,
                theta2: 0.0,
            },
        ];
        let summary = run_ensemble(&cfg, &c, 0, 20_000, &fs).unwrap();
        let m1 = estimate_moment(&summary, 1.0, 0.0, 1.0).unwrap();
        let truth1 = 1f64.exp();
        assert!(
            m1.ci_low <= truth1 && truth1 <= m1.ci_high,
            "E[x_1] CI [{}, {}] vs {truth1}",
            m1.ci_low,
            m1.ci_high
        );
        let m2 = estimate_moment(&summary, 2.0, 0.0, 1.0).unwrap();
        let truth2 = 2.04f64.exp();
        assert!(
            m2.ci_low <= truth2 && truth2 <= m2.ci_high,
            "E[x_1^2] CI [{}, {}] vs {truth2}",
            m2.ci_low,
            m2.ci_high
        );
    }

    #[test]
    fn time_average_exact_cases() {
        let p = synthetic_path(vec![0.0, 1.0, 2.0], vec![1.0; 3], vec![1.0; 3], 0);
        let v = time_average_moment(&p, 1.0, 1.0, 0.3, 0.7).unwrap();
        assert!((v - 1.0).abs() < 1e-15);

        // Zero exponents give w1 + w2 for any path.
        let p2 = synthetic_path(vec![0.0, 1.0, 2.0], vec![0.2, 5.0, 3.3], vec![1.0; 3], 0);
        let v2 = time_average_moment(&p2, 0.0, 0.0, 0.4, 0.6).unwrap();
        assert!((v2 - 1.0).abs() < 1e-15);

        // Linear data: trapezoid is exact, (1/2) \int_0^2 s ds = 1.
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let xs = times.clone();
        let p3 = synthetic_path(times.clone(), xs, vec![1.0; 21], 0);
        let v3 = time_average_moment(&p3, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((v3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_slope_recovers_planted_rate() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = times.iter().map(|t| (-0.52 * t).exp()).collect();
        let p = synthetic_path(times.clone(), vec![1.0; 101], ys, 0);
        let s = log_slope(&p, Species::Predator, Window::new(10.0, 50.0)).unwrap();
        assert!((s.slope + 0.52).abs() < 1e-10);
        assert!((s.r_squared - 1.0).abs() < 1e-10);

        let flat = synthetic_path(times, vec![2.0; 101], vec![2.0; 101], 0);
        let s = log_slope(&flat, Species::Prey, Window::new(10.0, 50.0)).unwrap();
        assert_eq!(s.slope, 0.0);
    }

    #[test]
    fn log_slope_errors() {
        let p = synthetic_path(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], 0);
        assert_eq!(
            log_slope(&p, Species::Prey, Window::new(5.0, 6.0)),
            Err(EstimatorError::EmptyWindow)
        );
        let mut blown = p.clone();
        blown.blowup = Some(BlowUpInfo { time: 0.5, step: 1 });
        assert_eq!(
            log_slope(&blown, Species::Prey, Window::new(0.0, 1.0)),
            Err(EstimatorError::BlownUpPath)
        );
    }

    #[test]
    fn loggrowth_stat_synthetic() {
        let times: Vec<f64> = (0..=50).map(|i| 3.0 + i as f64).collect();
        let xs = times.clone();
        let p = synthetic_path(times.clone(), xs, vec![1.0; 51], 0);
        // x_t = t, y = 1: statistic is exactly 1 on any window.
        let v = loggrowth_stat(&p, 1.0, 0.0, Window::new(3.0, 53.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let ones = synthetic_path(times, vec![1.0; 51], vec![1.0; 51], 0);
        let v = loggrowth_stat(&ones, 1.0, 1.0, Window::new(3.0, 53.0)).unwrap();
        assert_eq!(v, 0.0);

        assert_eq!(
            loggrowth_stat(&ones, 1.0, 1.0, Window::new(1.0, 53.0)),
            Err(EstimatorError::InvalidWindow(1.0, 53.0))
        );
    }

    #[test]
    fn quantile_picks_order_statistics() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(quantile(&values, 0.95), 95.0);
        assert_eq!(quantile(&values, 0.99), 99.0);
        assert_eq!(quantile(&values, 1.0), 100.0);
        assert_eq!(quantile(&values, 0.0), 1.0);
    }
}

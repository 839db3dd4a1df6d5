//! Subcommand implementations and file emission.
//!
//! Every emitted file starts with `# fingerprint=<hex>` so results can be
//! traced back to the exact configuration (including seed) that produced
//! them. CSV schemas are fixed per subcommand; floats use 17 significant
//! digits (see [`crate::fmt`]).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

use rdpp::integrate::{estimate_strong_order, simulate_path, BrownianDriver, OrderError, SimMode};
use rdpp::model::MomentSpec;
use rdpp::montecarlo::{run_ensemble, EnsembleError, Functional};
use rdpp::verify::{
    check_loggrowth, check_moment_bound, check_moment_envelope, check_positivity,
    check_predator_extinction, check_prey_solo, TheoremId, TheoremReport, VerifyError,
};

use crate::config::RunManifest;
use crate::fmt::fmt_f64;

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Sim(#[from] rdpp::integrate::InvalidConfig),
}

impl CmdError {
    /// Exit status for command failures; always above the 0/1/2 verdict band.
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Io { .. } => 6,
            _ => 5,
        }
    }
}

fn write_file(manifest: &RunManifest, name: &str, contents: &str) -> Result<PathBuf, CmdError> {
    let path = manifest.out_dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CmdError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, contents).map_err(|source| CmdError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn header(manifest: &RunManifest) -> String {
    format!("# fingerprint={}\n", manifest.fingerprint)
}

/// Writes `path.csv`: one trajectory on the save grid (`t,x,y`, or the
/// single-species variants in the absent modes).
pub fn cmd_simulate(manifest: &RunManifest) -> Result<PathBuf, CmdError> {
    let cfg = &manifest.config.sim;
    let c = &manifest.config.coefficients;
    let mut noise = BrownianDriver::new(manifest.config.seed, 0, cfg.dt);
    let rec = simulate_path(cfg, c, 0, &mut noise)?;

    let mut out = header(manifest);
    match cfg.mode {
        SimMode::Full => out.push_str("t,x,y\n"),
        SimMode::PreyAbsent => out.push_str("t,y\n"),
        SimMode::PredatorAbsent => out.push_str("t,x\n"),
    }
    for (i, &t) in rec.times.iter().enumerate() {
        let _ = write!(out, "{}", fmt_f64(t));
        if let Some(xs) = rec.xs() {
            let _ = write!(out, ",{}", fmt_f64(xs[i]));
        }
        if let Some(ys) = rec.ys() {
            let _ = write!(out, ",{}", fmt_f64(ys[i]));
        }
        out.push('\n');
    }
    if let Some(b) = rec.blowup {
        let _ = writeln!(out, "# blowup_at={}", fmt_f64(b.time));
    }
    write_file(manifest, "path.csv", &out)
}

/// Writes `moments.csv`: per-save-time means of `x`, `y` and the configured
/// moment `x^theta1 y^theta2` with standard error and 95% CI.
pub fn cmd_ensemble(manifest: &RunManifest) -> Result<PathBuf, CmdError> {
    let cfg = &manifest.config.sim;
    let c = &manifest.config.coefficients;
    let h = &manifest.config.harness;

    let mut functionals = vec![Functional::Moment {
        theta1: h.theta1,
        theta2: h.theta2,
    }];
    let mean_x = (cfg.mode != SimMode::PreyAbsent).then(|| {
        functionals.push(Functional::Moment {
            theta1: 1.0,
            theta2: 0.0,
        });
        functionals.len() - 1
    });
    let mean_y = (cfg.mode != SimMode::PredatorAbsent).then(|| {
        functionals.push(Functional::Moment {
            theta1: 0.0,
            theta2: 1.0,
        });
        functionals.len() - 1
    });

    let summary = run_ensemble(cfg, c, manifest.config.seed, h.n_paths, &functionals)?;

    let mut out = header(manifest);
    out.push_str("t,mean_x,mean_y,moment,se,ci_low,ci_high,n_blowups\n");
    for (i, &t) in summary.times.iter().enumerate() {
        let moment = &summary.stats[0].1[i];
        let se = moment.standard_error();
        let mx = mean_x.map_or(f64::NAN, |k| summary.stats[k].1[i].mean);
        let my = mean_y.map_or(f64::NAN, |k| summary.stats[k].1[i].mean);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(mx),
            fmt_f64(my),
            fmt_f64(moment.mean),
            fmt_f64(se),
            fmt_f64(moment.mean - rdpp::montecarlo::Z95 * se),
            fmt_f64(moment.mean + rdpp::montecarlo::Z95 * se),
            summary.n_blowups
        );
    }
    write_file(manifest, "moments.csv", &out)
}

/// Runs one verification harness; writes `report_<id>.txt` and, where the
/// harness produces envelope data, `envelope.csv`.
pub fn cmd_verify(
    manifest: &RunManifest,
    id: TheoremId,
) -> Result<(TheoremReport, Vec<PathBuf>), CmdError> {
    let cfg = &manifest.config.sim;
    let c = &manifest.config.coefficients;
    let h = &manifest.config.harness;
    let seed = manifest.config.seed;

    let mut report = match id {
        TheoremId::Positivity => check_positivity(cfg, c, seed, h.n_paths)?,
        TheoremId::MomentEnvelope => {
            check_moment_envelope(cfg, c, seed, h.theta1, h.theta2, h.n_paths)?
        }
        TheoremId::MomentBound => {
            let spec = MomentSpec {
                theta1: h.theta1,
                theta2: h.theta2,
                varsigma1: h.varsigma1,
                varsigma2: h.varsigma2,
                varrho1: h.varrho1,
                varrho2: h.varrho2,
            };
            check_moment_bound(cfg, c, seed, spec, h.n_paths)?
        }
        TheoremId::LogGrowth => check_loggrowth(cfg, c, seed, h.theta1, h.theta2, h.n_paths)?,
        TheoremId::PredatorExtinction => check_predator_extinction(cfg, c, seed, h.n_paths)?,
        TheoremId::PreySolo => check_prey_solo(cfg, c, seed, h.n_paths)?,
    };
    report.fingerprint = manifest.fingerprint.clone();

    let mut files = Vec::new();
    files.push(write_file(
        manifest,
        &format!("report_{}.txt", id.token()),
        &render_report(&report),
    )?);
    if !report.envelope.is_empty() {
        let mut out = header(manifest);
        out.push_str("t,bound,estimate,ci_low,ci_high\n");
        for row in &report.envelope {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(row.t),
                fmt_f64(row.bound),
                fmt_f64(row.estimate),
                fmt_f64(row.ci_low),
                fmt_f64(row.ci_high)
            );
        }
        files.push(write_file(manifest, "envelope.csv", &out)?);
    }
    Ok((report, files))
}

/// Structured key-value rendering of a report. Every failing or inconclusive
/// clause carries its offending time, bound, estimate and CI.
pub fn render_report(report: &TheoremReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# fingerprint={}", report.fingerprint);
    let _ = writeln!(out, "theorem = {}", report.theorem);
    let _ = writeln!(out, "verdict = {}", report.verdict);
    let _ = writeln!(out, "n_paths = {}", report.n_paths);
    let _ = writeln!(out, "n_blowups = {}", report.n_blowups);
    let _ = writeln!(out, "runtime_s = {}", fmt_f64(report.runtime.as_secs_f64()));
    if let Some((lo, hi)) = report.tail_window {
        let _ = writeln!(out, "tail_window_lo = {}", fmt_f64(lo));
        let _ = writeln!(out, "tail_window_hi = {}", fmt_f64(hi));
    }
    for (i, check) in report.checks.iter().enumerate() {
        let _ = writeln!(out, "check.{i}.name = {}", check.name);
        let _ = writeln!(out, "check.{i}.verdict = {}", check.verdict);
        let _ = writeln!(out, "check.{i}.bound = {}", fmt_f64(check.bound));
        let _ = writeln!(out, "check.{i}.estimate = {}", fmt_f64(check.estimate));
        if let Some(t) = check.time {
            let _ = writeln!(out, "check.{i}.time = {}", fmt_f64(t));
        }
        if let Some((lo, hi)) = check.ci {
            let _ = writeln!(out, "check.{i}.ci_low = {}", fmt_f64(lo));
            let _ = writeln!(out, "check.{i}.ci_high = {}", fmt_f64(hi));
        }
        if let Some(note) = &check.note {
            let _ = writeln!(out, "check.{i}.note = {note}");
        }
    }
    for (i, note) in report.notes.iter().enumerate() {
        let _ = writeln!(out, "note.{i} = {note}");
    }
    out
}

/// Writes `order.csv`: strong error per dyadic step size, with the fitted
/// slope as a footer comment.
pub fn cmd_convergence(manifest: &RunManifest) -> Result<PathBuf, CmdError> {
    let cfg = &manifest.config.sim;
    let c = &manifest.config.coefficients;
    let h = &manifest.config.harness;
    let est = estimate_strong_order(
        cfg,
        c,
        manifest.config.seed,
        h.n_paths,
        h.dt_coarse,
        h.order_levels,
    )?;

    let mut out = header(manifest);
    out.push_str("dt,strong_error\n");
    for &(dt, err) in &est.levels {
        let _ = writeln!(out, "{},{}", fmt_f64(dt), fmt_f64(err));
    }
    let _ = writeln!(
        out,
        "# fitted_order={} fit_residual={}",
        fmt_f64(est.order),
        fmt_f64(est.fit_residual)
    );
    write_file(manifest, "order.csv", &out)
}

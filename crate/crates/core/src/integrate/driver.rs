//! Counter-based Brownian increments.
//!
//! Each increment is a pure function of `(master_seed, path_index, step_index)`:
//! a ChaCha8 stream keyed by the master seed, with the path index selecting the
//! stream and the step index selecting the word position, feeds one 64-bit
//! uniform through the inverse normal CDF. This gives per-path reproducibility
//! independent of scheduling order, and lets coarse increments be rebuilt as
//! sums of fine ones in convergence studies.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::LazyLock;

static STD_NORMAL: LazyLock<Normal> = LazyLock::new(Normal::standard);

/// Maps a 64-bit word to the open interval (0, 1); the endpoints are excluded
/// so the inverse CDF below stays finite.
#[inline]
fn u64_to_open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

#[inline]
fn standard_normal_from(word: u64) -> f64 {
    STD_NORMAL.inverse_cdf(u64_to_open_unit(word))
}

/// Source of the per-step Gaussian increments consumed by the integrator.
///
/// Within a step of the full system, the same increment feeds both the prey
/// and the predator equation (the driving noise is one-dimensional).
pub trait NoiseSource {
    /// Gaussian increment with mean 0 and variance `dt` for the given step.
    fn increment(&mut self, step_index: u64) -> f64;
}

/// Reproducible Brownian increment stream for one path.
#[derive(Debug, Clone)]
pub struct BrownianDriver {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
    next_step: u64,
}

// One increment consumes one u64 = two 32-bit stream words.
const WORDS_PER_INCREMENT: u128 = 2;

impl BrownianDriver {
    pub fn new(master_seed: u64, path_index: u64, dt: f64) -> Self {
        assert!(dt > 0.0, "step size must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(path_index);
        Self {
            rng,
            sqrt_dt: dt.sqrt(),
            next_step: 0,
        }
    }

    /// The increment for `(master_seed, path_index, step_index)` without
    /// constructing a driver; used to check random access against the
    /// sequential stream.
    pub fn increment_at(master_seed: u64, path_index: u64, step_index: u64, dt: f64) -> f64 {
        let mut driver = Self::new(master_seed, path_index, dt);
        driver.increment(step_index)
    }
}

impl NoiseSource for BrownianDriver {
    fn increment(&mut self, step_index: u64) -> f64 {
        if step_index != self.next_step {
            self.rng
                .set_word_pos(step_index as u128 * WORDS_PER_INCREMENT);
        }
        self.next_step = step_index + 1;
        self.sqrt_dt * standard_normal_from(self.rng.next_u64())
    }
}

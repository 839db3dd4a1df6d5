//! Support code for tests, benchmarks and fuzzing: compact constructors and
//! a seeded generator of random valid coefficient sets.
//!
//! Lives in the library (not `#[cfg(test)]`) so integration tests, the
//! acceptance suite and fuzz targets can share it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{validate_coefficients, CoefficientFn, CoefficientSet};

/// Coefficient set with all eleven entries constant, in declaration order
/// `a1, a2, b1, b2, c1, c2, e, sigma1, sigma2, rho1, rho2`.
#[allow(clippy::too_many_arguments)]
pub fn constant_set(
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    e: f64,
    sigma1: f64,
    sigma2: f64,
    rho1: f64,
    rho2: f64,
) -> CoefficientSet {
    let c = CoefficientFn::constant;
    CoefficientSet {
        a1: c(a1),
        a2: c(a2),
        b1: c(b1),
        b2: c(b2),
        c1: c(c1),
        c2: c(c2),
        e: c(e),
        sigma1: c(sigma1),
        sigma2: c(sigma2),
        rho1: c(rho1),
        rho2: c(rho2),
    }
}

/// The constant benchmark set used throughout the test suite:
/// `a1=1, a2=0.5, b1=b2=1, c1=0.5, c2=0.8, e=1, sigma1=rho1=0.1`.
pub fn benchmark_h1() -> CoefficientSet {
    constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.0, 0.1, 0.0)
}

/// Benchmark set with inhibition noise `sigma2 = rho2 = 0.05` added.
pub fn benchmark_h2() -> CoefficientSet {
    constant_set(1.0, 0.5, 1.0, 1.0, 0.5, 0.8, 1.0, 0.1, 0.05, 0.1, 0.05)
}

/// Deterministic generator of random *valid* coefficient sets, mixing the
/// three coefficient shapes. Drawn parameters keep rates in [0.05, 2.5] and
/// noise intensities in [0, 0.5] so that short-horizon paths stay far from
/// the blow-up guard.
pub struct ConfigSampler {
    rng: ChaCha8Rng,
}

impl ConfigSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        lo + (hi - lo) * u
    }

    fn positive_coeff(&mut self) -> CoefficientFn {
        match self.rng.next_u64() % 5 {
            0..=2 => CoefficientFn::constant(self.uniform(0.05, 2.0)),
            3 => {
                let mean = self.uniform(0.2, 2.0);
                let amplitude = self.uniform(0.0, 0.9) * mean;
                let period = self.uniform(0.5, 20.0);
                let phase = self.uniform(0.0, std::f64::consts::TAU);
                CoefficientFn::sinusoidal(mean, amplitude, period, phase).unwrap()
            }
            _ => {
                let n_breaks = 1 + (self.rng.next_u64() % 3) as usize;
                let mut breakpoints: Vec<f64> =
                    (0..n_breaks).map(|_| self.uniform(0.1, 9.9)).collect();
                breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
                breakpoints.dedup();
                let values = (0..breakpoints.len() + 1)
                    .map(|_| self.uniform(0.05, 2.5))
                    .collect();
                CoefficientFn::piecewise(breakpoints, values).unwrap()
            }
        }
    }

    fn noise_coeff(&mut self, allow_zero: bool) -> CoefficientFn {
        if allow_zero && self.rng.next_u64().is_multiple_of(2) {
            return CoefficientFn::constant(0.0);
        }
        match self.rng.next_u64() % 4 {
            0..=2 => CoefficientFn::constant(self.uniform(0.01, 0.5)),
            _ => {
                let mean = self.uniform(0.05, 0.4);
                let amplitude = self.uniform(0.0, 0.9) * mean;
                let period = self.uniform(0.5, 20.0);
                CoefficientFn::sinusoidal(mean, amplitude, period, 0.0).unwrap()
            }
        }
    }

    /// Draws a coefficient set satisfying every validation invariant.
    pub fn coefficient_set(&mut self) -> CoefficientSet {
        let set = CoefficientSet {
            a1: self.positive_coeff(),
            a2: self.positive_coeff(),
            b1: self.positive_coeff(),
            b2: self.positive_coeff(),
            c1: self.positive_coeff(),
            c2: self.positive_coeff(),
            e: self.positive_coeff(),
            sigma1: self.noise_coeff(false),
            sigma2: self.noise_coeff(true),
            rho1: self.noise_coeff(false),
            rho2: self.noise_coeff(true),
        };
        debug_assert!(validate_coefficients(&set).is_ok());
        set
    }

    /// Random initial densities in [0.05, 5].
    pub fn initial_densities(&mut self) -> (f64, f64) {
        (self.uniform(0.05, 5.0), self.uniform(0.05, 5.0))
    }
}

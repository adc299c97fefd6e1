//! Counter-based random streams and a deterministic parallel Monte Carlo
//! driver.
//!
//! Every draw is a pure function of `(seed, trial index, draw index)`: the
//! seed keys a ChaCha8 generator, the trial index selects its stream, and the
//! draw index is the position within that stream. Trials can therefore run
//! on any thread in any order and still see exactly the same numbers.
//!
//! Per-trial results land in a buffer indexed by trial and are reduced
//! sequentially, so estimates are bit-identical for every thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Random stream for one Monte Carlo trial.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Unit-mean exponential.
    pub fn exponential(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
}

impl ErgodicEstimate {
    pub(crate) fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            trials: n as u64,
        }
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_std_error(&self, other: &Self) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

/// Runs `trial` once per index in `0..trials`, each with its own stream.
pub(crate) fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<Vec<f64>>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let mut samples = vec![0.0; trials as usize];
    samples.par_iter_mut().enumerate().for_each(|(i, slot)| {
        let mut stream = RngStream::new(seed, i as u64);
        *slot = trial(&mut stream);
    });
    Ok(samples)
}

pub(crate) fn estimate<F>(trials: u64, seed: u64, trial: F) -> Result<ErgodicEstimate>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    let samples = run_trials(trials, seed, trial)?;
    Ok(ErgodicEstimate::from_samples(&samples))
}

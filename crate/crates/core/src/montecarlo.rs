//! Reproducible Monte Carlo averaging over independent noise realizations.
//!
//! Realization `j` draws from a ChaCha8 stream keyed by `(seed, j)`, so a
//! sample depends only on the seed, the realization index and its position
//! within that realization. Realizations are grouped into fixed blocks whose
//! partial statistics are merged in block order, which makes the estimate
//! bit-identical for any number of worker threads.
//!
//! Normal deviates use the Box–Muller transform on uniforms from
//! `(0, 1]` × `[0, 1)`; both outputs of each pair are consumed in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};

const BLOCK: usize = 64;

/// Random source for one realization.
pub struct RealizationRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RealizationRng {
    pub fn new(seed: u64, realization: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(realization);
        RealizationRng { rng, spare: None }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Sample mean and standard error of a quantity on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Fraction of grid points where |mean − reference| ≤ k·std_err.
    pub fn fraction_within(&self, reference: &[f64], k: f64) -> f64 {
        let hits = self
            .mean
            .iter()
            .zip(&self.std_err)
            .zip(reference)
            .filter(|((m, se), r)| (*m - *r).abs() <= k * *se)
            .count();
        hits as f64 / self.mean.len() as f64
    }
}

/// Running mean and sum of squared deviations (Welford / Chan).
#[derive(Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments { count: 0.0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            *s += d * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        let n = self.count + other.count;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * other.count / n;
            self.m2[i] += other.m2[i] + d * d * self.count * other.count / n;
        }
        self.count = n;
    }
}

pub(crate) fn check_grid(times: &[f64], realizations: usize) -> Result<()> {
    if realizations < 2 {
        return domain("at least two realizations are needed for a standard error");
    }
    if times.is_empty() {
        return domain("time grid is empty");
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("time grid must be finite, non-negative and strictly ascending");
    }
    Ok(())
}

/// Averages `width` values per realization. `sample` fills its output
/// buffer from the given random source.
pub(crate) fn average<F>(realizations: usize, seed: u64, width: usize, sample: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&mut RealizationRng, &mut [f64]) + Sync,
{
    let blocks = realizations.div_ceil(BLOCK);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Moments::new(width);
            let mut buf = vec![0.0; width];
            for j in b * BLOCK..((b + 1) * BLOCK).min(realizations) {
                let mut rng = RealizationRng::new(seed, j as u64);
                sample(&mut rng, &mut buf);
                acc.push(&buf);
            }
            acc
        })
        .collect();
    let mut total = Moments::new(width);
    for p in &partial {
        total.merge(p);
    }
    let n = total.count;
    let se = total.m2.iter().map(|s| (s / (n - 1.0) / n).max(0.0).sqrt()).collect();
    (total.mean, se)
}

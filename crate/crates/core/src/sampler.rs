//! Reproducible Gaussian sampling and Monte Carlo moment accumulation.
//!
//! Sample `j` of chunk `c` reads its coordinates, in order, from a ChaCha8
//! stream keyed by the seed, with stream id `c` and word offset `j << 32`.
//! Coordinate `i` therefore never depends on how many coordinates are drawn
//! after it, so a body and its embedding see the same leading coordinates.
//! Chunks are evaluated in parallel and merged in chunk order, which makes
//! every result a function of `(seed, chunk_size, n_samples)` only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("chunk size must be positive")]
    ZeroChunk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Gaussian vectors drawn; with antithetic sampling each unit uses two.
    pub n_samples: usize,
    pub antithetic: bool,
    /// Sampling units per chunk.
    pub chunk_size: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 100_000,
            antithetic: true,
            chunk_size: 4096,
        }
    }
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self {
            seed,
            n_samples,
            ..Self::default()
        }
    }

    pub fn with_samples(self, n_samples: usize) -> Self {
        Self { n_samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_samples < 2 {
            return Err(SamplerError::TooFewSamples(self.n_samples));
        }
        if self.chunk_size == 0 {
            return Err(SamplerError::ZeroChunk);
        }
        Ok(())
    }

    /// Number of independent sampling units.
    pub fn units(&self) -> usize {
        if self.antithetic {
            self.n_samples.div_ceil(2)
        } else {
            self.n_samples
        }
    }

    /// Gaussian vectors actually evaluated.
    pub fn draws(&self) -> usize {
        self.units() * if self.antithetic { 2 } else { 1 }
    }
}

/// Positioned view of the Gaussian stream for one chunk.
pub struct ChunkStream {
    rng: ChaCha8Rng,
}

impl ChunkStream {
    pub fn new(seed: u64, chunk: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        Self { rng }
    }

    /// Fills `out` with the leading coordinates of sample `index`.
    pub fn fill(&mut self, index: u64, out: &mut [f64]) {
        self.rng.set_word_pos(u128::from(index) << 32);
        for x in out.iter_mut() {
            *x = StandardNormal.sample(&mut self.rng);
        }
    }
}

/// Convenience accessor for a single Gaussian vector of the stream.
pub fn gaussian_vector(seed: u64, chunk: u64, index: u64, out: &mut [f64]) {
    ChunkStream::new(seed, chunk).fill(index, out);
}

/// Means and centered second moments of several statistics over the
/// sampling units.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub units: usize,
    pub draws: usize,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SampleMoments {
    fn empty(k: usize) -> Self {
        Self {
            units: 0,
            draws: 0,
            mean: vec![0.0; k],
            m2: vec![0.0; k],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.units += 1;
        let n = self.units as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    fn merge(&mut self, other: &SampleMoments) {
        if other.units == 0 {
            return;
        }
        let (na, nb) = (self.units as f64, other.units as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.units += other.units;
        self.draws += other.draws;
    }

    /// Unbiased variance of one unit's statistic.
    pub fn variance(&self, i: usize) -> f64 {
        if self.units < 2 {
            return 0.0;
        }
        (self.m2[i] / (self.units as f64 - 1.0)).max(0.0)
    }

    /// Standard error of the mean of statistic `i`.
    pub fn std_error(&self, i: usize) -> f64 {
        if self.units == 0 {
            return 0.0;
        }
        (self.variance(i) / self.units as f64).sqrt()
    }
}

/// Runs `f(z, out)` on Gaussian vectors `z` of length `dim`, writing
/// `n_stats` statistics per vector, and accumulates their moments. With
/// antithetic sampling a unit is the average over `z` and `-z`.
pub fn sample_moments<F>(cfg: &SamplerConfig, dim: usize, n_stats: usize, f: F) -> SampleMoments
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let units = cfg.units();
    let chunk = cfg.chunk_size.max(1);
    let n_chunks = units.div_ceil(chunk);
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let parts: Vec<SampleMoments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = ChunkStream::new(cfg.seed, c as u64);
            let mut acc = SampleMoments::empty(n_stats);
            let mut z = vec![0.0; dim];
            let mut neg = vec![0.0; dim];
            let mut a = vec![0.0; n_stats];
            let mut b = vec![0.0; n_stats];
            let len = chunk.min(units - c * chunk);
            for j in 0..len {
                stream.fill(j as u64, &mut z);
                f(&z, &mut a);
                if cfg.antithetic {
                    neg.iter_mut().zip(&z).for_each(|(n, v)| *n = -v);
                    f(&neg, &mut b);
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x = 0.5 * (*x + y));
                }
                acc.push(&a);
            }
            acc.draws = len * per_unit;
            acc
        })
        .collect();
    let mut total = SampleMoments::empty(n_stats);
    for p in &parts {
        total.merge(p);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
    Exact,
    Bracket,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
            Method::Exact => "exact",
            Method::Bracket => "bracket",
        }
    }
}

/// A numerical result with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: Method,
    pub bracket_width: f64,
    /// False when a refinement cap stopped the computation early.
    pub converged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: 0,
            ci_low: value,
            ci_high: value,
            method: Method::Exact,
            bracket_width: 0.0,
            converged: true,
        }
    }

    pub fn quadrature(value: f64, nodes: u64, converged: bool) -> Self {
        Self {
            n_samples: nodes,
            method: Method::Quadrature,
            converged,
            ..Self::exact(value)
        }
    }

    /// Certified interval `[low, high]`, reported at its midpoint.
    pub fn bracket(low: f64, high: f64, evaluations: u64, converged: bool) -> Self {
        Self {
            value: 0.5 * (low + high),
            std_error: 0.0,
            n_samples: evaluations,
            ci_low: low,
            ci_high: high,
            method: Method::Bracket,
            bracket_width: high - low,
            converged,
        }
    }

    /// Normal-theory 99% interval around a sample mean.
    pub fn from_mean(mean: f64, std_error: f64, n_samples: u64) -> Self {
        Self {
            value: mean,
            std_error,
            n_samples,
            ci_low: mean - Z99 * std_error,
            ci_high: mean + Z99 * std_error,
            method: Method::MonteCarlo,
            bracket_width: 0.0,
            converged: true,
        }
    }

    /// Estimate of `(scale * mean)^(1/p)` from a nonnegative sample mean.
    /// The standard error follows the delta method; the interval is the
    /// image of the mean's interval (clipped at zero) under the same
    /// monotone map, so it always contains the value.
    pub fn power_root(mean: f64, std_error: f64, n_samples: u64, scale: f64, p: f64) -> Self {
        let root = |x: f64| (scale * x.max(0.0)).powf(1.0 / p);
        let value = root(mean);
        let ci_low = root(mean - Z99 * std_error);
        let ci_high = root(mean + Z99 * std_error);
        let se = if std_error == 0.0 {
            0.0
        } else if value > 0.0 {
            scale * std_error / (p * value.powf(p - 1.0))
        } else {
            ci_high / Z99
        };
        Self {
            value,
            std_error: se,
            n_samples,
            ci_low,
            ci_high,
            method: Method::MonteCarlo,
            bracket_width: 0.0,
            converged: true,
        }
    }

    /// Multiplies value, error and interval by a positive constant.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: factor * self.value,
            std_error: factor * self.std_error,
            ci_low: factor * self.ci_low,
            ci_high: factor * self.ci_high,
            bracket_width: factor * self.bracket_width,
            ..self
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stream_is_prefix_stable() {
        let mut short = vec![0.0; 3];
        let mut long = vec![0.0; 40];
        gaussian_vector(11, 5, 77, &mut short);
        gaussian_vector(11, 5, 77, &mut long);
        assert_eq!(&long[..3], &short[..]);
        let mut other = vec![0.0; 3];
        gaussian_vector(11, 5, 78, &mut other);
        assert_ne!(other, short);
    }

    #[test]
    fn moments_of_coordinates() {
        let cfg = SamplerConfig {
            antithetic: false,
            ..SamplerConfig::new(3, 200_000)
        };
        let m = sample_moments(&cfg, 2, 3, |z, out| {
            out[0] = z[0];
            out[1] = z[1] * z[1];
            out[2] = z[0] * z[1];
        });
        assert_eq!(m.units, 200_000);
        assert!(m.mean[0].abs() < 4.0 * m.std_error(0));
        assert!((m.mean[1] - 1.0).abs() < 4.0 * m.std_error(1));
        assert!(m.mean[2].abs() < 4.0 * m.std_error(2));
        assert!((m.variance(1) - 2.0).abs() < 0.05);
    }

    #[test]
    fn antithetic_cancels_odd_statistics() {
        let cfg = SamplerConfig::new(1, 1000);
        let m = sample_moments(&cfg, 3, 1, |z, out| out[0] = z[0] - 2.0 * z[2]);
        assert_eq!(m.mean[0], 0.0);
        assert_eq!(m.std_error(0), 0.0);
        assert_eq!(m.draws, 1000);
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = SamplerConfig {
            chunk_size: 100,
            ..SamplerConfig::new(9, 5001)
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    sample_moments(&cfg, 4, 1, |z, o| o[0] = z.iter().map(|x| x.abs()).sum())
                })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mean[0].to_bits(), b.mean[0].to_bits());
        assert_eq!(a.std_error(0).to_bits(), b.std_error(0).to_bits());
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(0, 1).validate().is_err());
        assert!(SamplerConfig {
            chunk_size: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(SamplerConfig::new(0, 7).units(), 4);
        assert_eq!(SamplerConfig::new(0, 7).draws(), 8);
    }

    proptest! {
        #[test]
        fn power_root_interval_contains_value(
            mean in 0.0f64..10.0, se in 0.0f64..3.0, p in 1.0f64..8.0, c in 0.1f64..3.0
        ) {
            let e = Estimate::power_root(mean, se, 100, c, p);
            prop_assert!(e.ci_low <= e.value && e.value <= e.ci_high);
            prop_assert!(e.std_error >= 0.0);
            prop_assert!(e.ci_low >= 0.0);
        }

        #[test]
        fn chunked_merge_matches_single_chunk(seed in 0u64..1000) {
            let base = SamplerConfig { antithetic: false, ..SamplerConfig::new(seed, 300) };
            let one = sample_moments(&SamplerConfig { chunk_size: 300, ..base }, 2, 1, |z, o| o[0] = z[0] * z[1]);
            // one chunk of 300 units vs the same units accumulated directly
            let mut direct = SampleMoments::empty(1);
            let mut s = ChunkStream::new(seed, 0);
            let mut z = [0.0; 2];
            for j in 0..300 {
                s.fill(j, &mut z);
                direct.push(&[z[0] * z[1]]);
            }
            prop_assert!((one.mean[0] - direct.mean[0]).abs() < 1e-15);
            prop_assert!((one.variance(0) - direct.variance(0)).abs() < 1e-12);
        }
    }
}

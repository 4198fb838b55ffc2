//! Seeded experiment suites: random bodies, dimension and rotation
//! invariance, bound sweeps and the coordinate-hull truncation study.
//!
//! Work items run in parallel but rows are always returned in index order,
//! so outputs depend only on the configuration.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bodies::{coord_weight, Body, BodyError};
use crate::bounds::{self, BoundConfig, BoundError, Verdict};
use crate::metrics::{self, Estimate, Method, MetricError, SamplerConfig};
use crate::num_kernels::{self, INV_SQRT_2PI};
use crate::sampler::sample_moments;

/// Largest truncation dimension for the coordinate-hull study.
pub const MAX_WORK_DIM: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("unknown body kind '{0}'")]
    UnknownKind(String),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{0} must be strictly increasing and start at 1 or more")]
    NotIncreasing(&'static str),
    #[error("index {index} exceeds the working dimension {work_dim}")]
    IndexTooLarge { index: usize, work_dim: usize },
    #[error("working dimension {0} exceeds the cap {MAX_WORK_DIM}")]
    WorkDimTooLarge(usize),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Families of random bodies. `None` counts pick a size from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Point,
    Ball,
    Polytope(Option<usize>),
    Zonotope(Option<usize>),
    /// `0.5·P ⊕ Z` with `P` a `(d+1)`-vertex polytope and `Z` a
    /// two-generator zonotope.
    Mixed,
}

impl FromStr for BodyKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        let sized = |prefix: &str| -> Option<std::result::Result<Option<usize>, ()>> {
            let rest = s.strip_prefix(prefix)?;
            if rest.is_empty() {
                return Some(Ok(None));
            }
            let n = rest.strip_prefix('_')?;
            Some(
                n.parse::<usize>()
                    .ok()
                    .filter(|&k| k > 0)
                    .map(Some)
                    .ok_or(()),
            )
        };
        let unknown = || ExperimentError::UnknownKind(s.to_string());
        match s {
            "point" => return Ok(BodyKind::Point),
            "ball" => return Ok(BodyKind::Ball),
            "mixed" => return Ok(BodyKind::Mixed),
            _ => {}
        }
        if let Some(k) = sized("polytope") {
            return k.map(BodyKind::Polytope).map_err(|_| unknown());
        }
        if let Some(k) = sized("zonotope") {
            return k.map(BodyKind::Zonotope).map_err(|_| unknown());
        }
        Err(unknown())
    }
}

impl fmt::Display for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyKind::Point => f.write_str("point"),
            BodyKind::Ball => f.write_str("ball"),
            BodyKind::Polytope(None) => f.write_str("polytope"),
            BodyKind::Polytope(Some(k)) => write!(f, "polytope_{k}"),
            BodyKind::Zonotope(None) => f.write_str("zonotope"),
            BodyKind::Zonotope(Some(k)) => write!(f, "zonotope_{k}"),
            BodyKind::Mixed => f.write_str("mixed"),
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            scale * z
        })
        .collect::<Vec<f64>>()
}

fn random_polytope(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Body {
    Body::Polytope((0..k).map(|_| gaussian_vec(rng, d, 1.0)).collect())
}

fn random_zonotope(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Body {
    let generators: Vec<Vec<f64>> = (0..k)
        .map(|_| gaussian_vec(rng, d, 1.5 / k as f64))
        .collect();
    let mut base = gaussian_vec(rng, d, 0.5);
    for g in &generators {
        base.iter_mut().zip(g).for_each(|(b, gi)| *b -= 0.5 * gi);
    }
    Body::Zonotope { base, generators }
}

/// A random body of the given kind, deterministic in `(d, kind, seed)`.
///
/// Polytopes have standard Gaussian vertices (default count uniform in
/// `[d+1, 3d]`); balls a Gaussian center and radius `|N(0,1)|`; zonotopes
/// (default `min(d+1, 6)` generators) Gaussian generators of total scale
/// about 1.5 around a roughly centered base.
pub fn random_body(d: usize, kind: BodyKind, seed: u64) -> Result<Body> {
    if d == 0 {
        return Err(ExperimentError::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        BodyKind::Point => Body::Point(gaussian_vec(&mut rng, d, 1.0)),
        BodyKind::Ball => {
            let center = gaussian_vec(&mut rng, d, 1.0);
            let r: f64 = StandardNormal.sample(&mut rng);
            Body::Ball {
                center,
                radius: r.abs(),
            }
        }
        BodyKind::Polytope(k) => {
            let k = k.unwrap_or_else(|| rng.random_range(d + 1..=3 * d));
            random_polytope(&mut rng, d, k)
        }
        BodyKind::Zonotope(k) => {
            let k = k.unwrap_or((d + 1).min(6));
            random_zonotope(&mut rng, d, k)
        }
        BodyKind::Mixed => {
            let p = random_polytope(&mut rng, d, d + 1);
            let z = random_zonotope(&mut rng, d, 2);
            Body::MinkowskiSum(Box::new(Body::Scale(0.5, Box::new(p))), Box::new(z))
        }
    })
}

/// Mixes several integers into one seed (SplitMix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &x in parts {
        h ^= x;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// A random `d × d` orthogonal matrix (QR of a Gaussian matrix with the
/// sign convention that makes the distribution Haar).
pub fn random_orthogonal(d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    (0..d)
        .map(|i| (0..d).map(|j| q[(i, j)]).collect())
        .collect()
}

/// Pair kinds cycled through by the sweeps. Every pair here has an exact
/// Hausdorff distance (finite vertex sets, or balls against balls/points).
pub const PAIR_SCHEDULE: [(BodyKind, BodyKind); 8] = [
    (BodyKind::Polytope(None), BodyKind::Polytope(None)),
    (BodyKind::Point, BodyKind::Point),
    (BodyKind::Polytope(None), BodyKind::Point),
    (BodyKind::Zonotope(None), BodyKind::Polytope(None)),
    (BodyKind::Ball, BodyKind::Ball),
    (BodyKind::Mixed, BodyKind::Polytope(None)),
    (BodyKind::Ball, BodyKind::Point),
    (BodyKind::Zonotope(None), BodyKind::Zonotope(None)),
];

/// The `i`-th scheduled pair for a sweep identified by `parts`.
pub fn scheduled_pair(d: usize, i: usize, parts: &[u64]) -> Result<(Body, Body, String)> {
    let (ka, kb) = PAIR_SCHEDULE[i % PAIR_SCHEDULE.len()];
    let mut key = parts.to_vec();
    key.extend([d as u64, i as u64]);
    let mut ka_key = key.clone();
    ka_key.push(0);
    key.push(1);
    let a = random_body(d, ka, derive_seed(&ka_key))?;
    let b = random_body(d, kb, derive_seed(&key))?;
    Ok((a, b, format!("{ka}/{kb}")))
}

/// One comparison of the invariance suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    /// `embed` or `rotation`.
    pub check: String,
    /// Extra dimensions for `embed`, rotation number for `rotation`.
    pub index: usize,
    pub base_dim: usize,
    pub target_dim: usize,
    pub method: Method,
    pub base_value: f64,
    pub transformed_value: f64,
    pub abs_diff: f64,
    pub bit_identical: bool,
    pub passes: bool,
}

/// Quadrature rows must agree to this absolute tolerance.
pub const INVARIANCE_TOL: f64 = 1e-6;

fn invariance_value(k: &Body, l: &Body, p: f64, cfg: &SamplerConfig) -> Result<Estimate> {
    if k.dim() <= metrics::MAX_QUADRATURE_DIM {
        Ok(metrics::intrinsic_lp_quadrature(k, l, p)?)
    } else {
        Ok(metrics::intrinsic_lp(k, l, p, cfg)?)
    }
}

/// Compares `δ*_p(K, L)` with the value after embedding into `d + k`
/// dimensions for each `k` in `extra_dims`, and after `n_rotations` random
/// rotations (only for `d >= 2`).
///
/// Quadrature is used whenever the dimension allows; embedded Monte Carlo
/// rows reuse the stream (the embedded bodies see the same leading
/// coordinates) and must match bit for bit. Rotated Monte Carlo rows must
/// agree within three combined standard errors.
pub fn invariance_suite(
    k: &Body,
    l: &Body,
    p: f64,
    extra_dims: &[usize],
    n_rotations: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<InvarianceRow>> {
    let d = k.dim();
    if l.dim() != d {
        return Err(BodyError::DimensionMismatch {
            expected: d,
            found: l.dim(),
        }
        .into());
    }
    let base_q = (d <= metrics::MAX_QUADRATURE_DIM)
        .then(|| metrics::intrinsic_lp_quadrature(k, l, p))
        .transpose()?;
    let base_mc = std::cell::OnceCell::new();
    let base_mc = |cfg: &SamplerConfig| -> Result<Estimate> {
        if let Some(e) = base_mc.get() {
            return Ok(*e);
        }
        let e = metrics::intrinsic_lp(k, l, p, cfg)?;
        Ok(*base_mc.get_or_init(|| e))
    };

    let mut rows = Vec::new();
    for &extra in extra_dims {
        let target = d + extra;
        let ek = Body::embed(k.clone(), target)?;
        let el = Body::embed(l.clone(), target)?;
        let (base, other, method) = match base_q {
            Some(b) if target <= metrics::MAX_QUADRATURE_DIM => (
                b.value,
                metrics::intrinsic_lp_quadrature(&ek, &el, p)?.value,
                Method::Quadrature,
            ),
            _ => (
                base_mc(cfg)?.value,
                metrics::intrinsic_lp(&ek, &el, p, cfg)?.value,
                Method::MonteCarlo,
            ),
        };
        let bit_identical = base.to_bits() == other.to_bits();
        let abs_diff = (base - other).abs();
        let passes = match method {
            Method::Quadrature => abs_diff <= INVARIANCE_TOL,
            _ => bit_identical,
        };
        rows.push(InvarianceRow {
            check: "embed".into(),
            index: extra,
            base_dim: d,
            target_dim: target,
            method,
            base_value: base,
            transformed_value: other,
            abs_diff,
            bit_identical,
            passes,
        });
    }
    if d >= 2 {
        for r in 0..n_rotations {
            let q = random_orthogonal(d, derive_seed(&[cfg.seed, 0x0052_4f54, r as u64]));
            let qk = k.rotate(&q)?;
            let ql = l.rotate(&q)?;
            let before = match base_q {
                Some(b) => b,
                None => base_mc(cfg)?,
            };
            let after = invariance_value(&qk, &ql, p, cfg)?;
            let abs_diff = (before.value - after.value).abs();
            let passes = match before.method {
                Method::Quadrature => abs_diff <= INVARIANCE_TOL,
                _ => {
                    abs_diff
                        <= 3.0 * (before.std_error.powi(2) + after.std_error.powi(2)).sqrt() + 1e-12
                }
            };
            rows.push(InvarianceRow {
                check: "rotation".into(),
                index: r,
                base_dim: d,
                target_dim: d,
                method: before.method,
                base_value: before.value,
                transformed_value: after.value,
                abs_diff,
                bit_identical: before.value.to_bits() == after.value.to_bits(),
                passes,
            });
        }
    }
    Ok(rows)
}

/// One instance of the bound in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pair_id: usize,
    pub d: usize,
    pub p: f64,
    pub body_kinds: String,
    pub delta: f64,
    pub delta_method: Method,
    pub v1_hull: f64,
    pub v1_used: f64,
    pub lhs: f64,
    pub lhs_ci_low: f64,
    pub rhs_eq3: f64,
    pub rhs_eq5: f64,
    pub ratio: Option<f64>,
    pub m_value: Option<f64>,
    pub raw_mean: f64,
    pub raw_std_error: f64,
    pub chain_lower: f64,
    pub holds_chain: bool,
    pub n_samples: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub holds: usize,
    pub violated: usize,
    pub undecided: usize,
    pub vacuous: usize,
    pub chain_failures: usize,
    pub min_ratio: Option<f64>,
}

impl SweepSummary {
    pub fn of(rows: &[SweepRow]) -> Self {
        let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
        Self {
            rows: rows.len(),
            holds: count(Verdict::Holds),
            violated: count(Verdict::Violated),
            undecided: count(Verdict::Undecided),
            vacuous: count(Verdict::Vacuous),
            chain_failures: rows.iter().filter(|r| !r.holds_chain).count(),
            min_ratio: rows
                .iter()
                .filter(|r| matches!(r.verdict, Verdict::Holds | Verdict::Violated))
                .filter_map(|r| r.ratio)
                .min_by(f64::total_cmp),
        }
    }
}

/// Runs [`bounds::check_theorem2_with`] on `n_pairs` scheduled random pairs
/// for every `(d, p)`. Pair ids run over `dims × ps × pairs` in that order.
pub fn bound_sweep(
    dims: &[usize],
    ps: &[f64],
    n_pairs: usize,
    cfg: &BoundConfig,
) -> Result<Vec<SweepRow>> {
    let mut tasks = Vec::new();
    for &d in dims {
        for (pi, &p) in ps.iter().enumerate() {
            for i in 0..n_pairs {
                tasks.push((d, pi, p, i));
            }
        }
    }
    tasks
        .par_iter()
        .enumerate()
        .map(|(pair_id, &(d, pi, p, i))| {
            let (a, b, kinds) = scheduled_pair(d, i, &[cfg.sampler.seed, pi as u64])?;
            let sampler = cfg.sampler.with_seed(derive_seed(&[
                cfg.sampler.seed,
                d as u64,
                pi as u64,
                i as u64,
            ]));
            let r = bounds::check_theorem2_with(&a, &b, p, &BoundConfig { sampler, ..*cfg })?;
            Ok(SweepRow {
                pair_id,
                d,
                p,
                body_kinds: kinds,
                delta: r.delta.value,
                delta_method: r.delta.method,
                v1_hull: r.v1_hull.value,
                v1_used: r.v1_used,
                lhs: r.lhs.value,
                lhs_ci_low: r.lhs.ci_low,
                rhs_eq3: r.rhs_eq3,
                rhs_eq5: r.rhs_eq5,
                ratio: r.ratio,
                m_value: r.m.map(|m| m.m_value),
                raw_mean: r.raw_mean,
                raw_std_error: r.raw_std_error,
                chain_lower: r.chain_lower,
                holds_chain: r.holds_chain,
                n_samples: r.lhs.n_samples,
                verdict: r.verdict,
            })
        })
        .collect()
}

/// One row of the Gaussian-process sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpRow {
    pub pair_id: usize,
    pub d: usize,
    pub body_kinds: String,
    pub delta: f64,
    pub b_value: f64,
    pub lhs_l1: f64,
    pub lhs_ci_low: f64,
    pub rhs: f64,
    pub v1_hull: f64,
    pub b_consistent: bool,
    pub verdict: Verdict,
}

/// [`bounds::remark2_check_with`] on `n_pairs` scheduled pairs per dimension.
pub fn gp_sweep(dims: &[usize], n_pairs: usize, cfg: &BoundConfig) -> Result<Vec<GpRow>> {
    let tasks: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..n_pairs).map(move |i| (d, i)))
        .collect();
    tasks
        .par_iter()
        .enumerate()
        .map(|(pair_id, &(d, i))| {
            let (a, b, kinds) = scheduled_pair(d, i, &[cfg.sampler.seed, 0x4750])?;
            let sampler =
                cfg.sampler
                    .with_seed(derive_seed(&[cfg.sampler.seed, 0x4750, d as u64, i as u64]));
            let r = bounds::remark2_check_with(&a, &b, &BoundConfig { sampler, ..*cfg })?;
            Ok(GpRow {
                pair_id,
                d,
                body_kinds: kinds,
                delta: r.delta.value,
                b_value: r.b_value.value,
                lhs_l1: r.lhs_l1.value,
                lhs_ci_low: r.lhs_l1.ci_low,
                rhs: r.rhs,
                v1_hull: r.v1_hull.value,
                b_consistent: r.b_consistent,
                verdict: r.verdict,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Head,
    Tail,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Head => "head",
            Variant::Tail => "tail",
        }
    }
}

/// Statistics of one truncated coordinate hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRow {
    pub variant: Variant,
    pub n_index: usize,
    pub work_dim: usize,
    /// Estimate of `E h(Z)`.
    pub mean_support: Estimate,
    /// Standard deviation of `h(Z)`.
    pub std_support: f64,
    /// Head rows: the index of the next body in the sequence.
    pub partner: Option<usize>,
    /// Head rows: `δ*_p` between this body and its partner.
    pub pairwise_metric: Option<Estimate>,
}

fn check_increasing(ns: &[usize], what: &'static str, work_dim: usize) -> Result<()> {
    if ns.first().is_some_and(|&n| n == 0) || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::NotIncreasing(what));
    }
    if let Some(&last) = ns.last() {
        if last > work_dim {
            return Err(ExperimentError::IndexTooLarge {
                index: last,
                work_dim,
            });
        }
    }
    Ok(())
}

/// Head bodies `conv{a_n e_n : n <= N}` and tail bodies
/// `conv{a_n e_n : N <= n <= work_dim}` inside `R^work_dim`.
///
/// Head rows pair each `N` with the next entry of `head_ns` (the last entry
/// with `min(2N, work_dim)`) and report `δ*_p` between the two; tail rows
/// report the mean and spread of `h(Z)`. All statistics come from one pass
/// over the Gaussian stream.
pub fn completion_experiment(
    head_ns: &[usize],
    tail_ns: &[usize],
    work_dim: usize,
    p: f64,
    cfg: &SamplerConfig,
) -> Result<Vec<CompletionRow>> {
    if work_dim > MAX_WORK_DIM {
        return Err(ExperimentError::WorkDimTooLarge(work_dim));
    }
    if work_dim == 0 {
        return Err(ExperimentError::ZeroDimension);
    }
    check_increasing(head_ns, "head indices", work_dim)?;
    check_increasing(tail_ns, "tail indices", work_dim)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(MetricError::InvalidExponent(p).into());
    }
    cfg.validate().map_err(MetricError::from)?;
    let cp = num_kernels::cp_constant(p).map_err(MetricError::from)?;

    let partners: Vec<Option<usize>> = head_ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let next = head_ns.get(i + 1).copied().unwrap_or((2 * n).min(work_dim));
            (next > n).then_some(next)
        })
        .collect();
    // prefix maxima are needed at every head index and partner
    let mut prefix_at: Vec<usize> = head_ns
        .iter()
        .copied()
        .chain(partners.iter().flatten().copied())
        .collect();
    prefix_at.sort_unstable();
    prefix_at.dedup();
    let prefix_slot = |n: usize| prefix_at.binary_search(&n).expect("listed");

    let weights: Vec<f64> = (1..=work_dim).map(coord_weight).collect();
    let h = head_ns.len();
    let t = tail_ns.len();
    // per head: |Δ|^p, h, h²; per tail: h, h²
    let n_stats = 3 * h + 2 * t;
    let m = sample_moments(cfg, work_dim, n_stats, |z, out| {
        let mut prefix = vec![0.0; prefix_at.len()];
        let mut run = f64::NEG_INFINITY;
        let mut next = 0;
        for (i, (&w, &zi)) in weights.iter().zip(z).enumerate() {
            run = run.max(w * zi);
            if next < prefix_at.len() && prefix_at[next] == i + 1 {
                prefix[next] = run;
                next += 1;
            }
        }
        for (j, &n) in head_ns.iter().enumerate() {
            let a = prefix[prefix_slot(n)];
            out[3 * j] = match partners[j] {
                Some(q) => metrics::abs_pow(prefix[prefix_slot(q)] - a, p),
                None => 0.0,
            };
            out[3 * j + 1] = a;
            out[3 * j + 2] = a * a;
        }
        let mut run = f64::NEG_INFINITY;
        let mut idx = work_dim;
        for (j, &n) in tail_ns.iter().enumerate().rev() {
            while idx >= n {
                run = run.max(weights[idx - 1] * z[idx - 1]);
                idx -= 1;
            }
            out[3 * h + 2 * j] = run;
            out[3 * h + 2 * j + 1] = run * run;
        }
    });
    let draws = m.draws as u64;
    let spread = |mean: f64, sq: f64| (sq - mean * mean).max(0.0).sqrt();
    let mut rows = Vec::with_capacity(h + t);
    for (j, &n) in head_ns.iter().enumerate() {
        let mean = m.mean[3 * j + 1];
        rows.push(CompletionRow {
            variant: Variant::Head,
            n_index: n,
            work_dim,
            mean_support: Estimate::from_mean(mean, m.std_error(3 * j + 1), draws),
            std_support: spread(mean, m.mean[3 * j + 2]),
            partner: partners[j],
            pairwise_metric: partners[j]
                .map(|_| Estimate::power_root(m.mean[3 * j], m.std_error(3 * j), draws, cp, p)),
        });
    }
    for (j, &n) in tail_ns.iter().enumerate() {
        let mean = m.mean[3 * h + 2 * j];
        rows.push(CompletionRow {
            variant: Variant::Tail,
            n_index: n,
            work_dim,
            mean_support: Estimate::from_mean(mean, m.std_error(3 * h + 2 * j), draws),
            std_support: spread(mean, m.mean[3 * h + 2 * j + 1]),
            partner: None,
            pairwise_metric: None,
        });
    }
    Ok(rows)
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// `E h(Z)` of a single point `a_N e_N` is zero and its spread is `a_N`;
/// exposed for sanity checks on tail rows.
pub fn singleton_spread(n: usize) -> f64 {
    coord_weight(n)
}

/// `V_1` of the hull implied by a `B` value.
pub fn v1_from_b(b: f64) -> f64 {
    b / INV_SQRT_2PI
}

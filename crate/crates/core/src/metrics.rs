//! Distances between convex bodies and the first intrinsic volume.
//!
//! * intrinsic L_p: `[c_p E|h_K(Z) - h_L(Z)|^p]^{1/p}` for standard Gaussian `Z`;
//! * classical L_p: the same `L_p` norm over the unit sphere with its uniform
//!   probability measure;
//! * Hausdorff: `sup_{|u|=1} |h_K(u) - h_L(u)|`;
//! * `V_1(K) = sqrt(2π) E h_K(Z)`.
//!
//! Monte Carlo estimators share the stream in [`crate::sampler`]; in
//! dimensions up to three there are deterministic quadrature versions.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::bodies::{norm, Body, BodyError};
use crate::distance::min_norm_point;
use crate::num_kernels::{self, KernelError, SQRT_2PI};
use crate::quadrature;
use crate::sampler::{sample_moments, SampleMoments};
pub use crate::sampler::{Estimate, Method, SamplerConfig, SamplerError};

/// Largest dimension handled by the quadrature paths.
pub const MAX_QUADRATURE_DIM: usize = 3;
/// Default bracket width target for the Hausdorff bracket.
pub const DEFAULT_MESH_TARGET: f64 = 1e-3;
/// Default cap on support evaluations spent by one Hausdorff bracket.
pub const DEFAULT_BRACKET_EVALUATIONS: u64 = 4_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("p must be at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("quadrature supports dimension at most {MAX_QUADRATURE_DIM}, got {0}")]
    DimensionTooLarge(usize),
    #[error("mesh target must be positive, got {0}")]
    InvalidMeshTarget(f64),
}

pub type Result<T> = std::result::Result<T, MetricError>;

fn check_pair(k: &Body, l: &Body) -> Result<usize> {
    let (a, b) = (k.dim(), l.dim());
    if a != b {
        return Err(BodyError::DimensionMismatch {
            expected: a,
            found: b,
        }
        .into());
    }
    Ok(a)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(MetricError::InvalidExponent(p))
    }
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// Sample means gathered in a single pass over a body pair:
/// `|Δ|^p`, `|Δ|` and `max(h_K, h_L)` where `Δ = h_K(Z) - h_L(Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMoments {
    pub p: f64,
    pub n_samples: u64,
    pub pow_mean: f64,
    pub pow_se: f64,
    pub abs_mean: f64,
    pub abs_se: f64,
    pub max_mean: f64,
    pub max_se: f64,
}

impl PairMoments {
    fn from_moments(p: f64, m: &SampleMoments) -> Self {
        Self {
            p,
            n_samples: m.draws as u64,
            pow_mean: m.mean[0],
            pow_se: m.std_error(0),
            abs_mean: m.mean[1],
            abs_se: m.std_error(1),
            max_mean: m.mean[2],
            max_se: m.std_error(2),
        }
    }

    /// The intrinsic L_p estimate.
    pub fn intrinsic(&self) -> Result<Estimate> {
        let cp = num_kernels::cp_constant(self.p)?;
        Ok(Estimate::power_root(
            self.pow_mean,
            self.pow_se,
            self.n_samples,
            cp,
            self.p,
        ))
    }

    /// `E|h_K(Z) - h_L(Z)|`, without normalization.
    pub fn l1_raw(&self) -> Estimate {
        Estimate::from_mean(self.abs_mean, self.abs_se, self.n_samples)
    }

    /// `E max(h_K(Z), h_L(Z)) = E h_{clconv(K ∪ L)}(Z)`.
    pub fn hull_mean(&self) -> Estimate {
        Estimate::from_mean(self.max_mean, self.max_se, self.n_samples)
    }

    /// `V_1` of the hull of the union.
    pub fn v1_hull(&self) -> Estimate {
        self.hull_mean().scaled(SQRT_2PI)
    }
}

pub fn pair_moments(k: &Body, l: &Body, p: f64, cfg: &SamplerConfig) -> Result<PairMoments> {
    let d = check_pair(k, l)?;
    check_p(p)?;
    cfg.validate()?;
    let m = sample_moments(cfg, d, 3, |z, out| {
        let a = k.support_unchecked(z);
        let b = l.support_unchecked(z);
        let diff = a - b;
        out[0] = abs_pow(diff, p);
        out[1] = diff.abs();
        out[2] = a.max(b);
    });
    Ok(PairMoments::from_moments(p, &m))
}

/// Monte Carlo estimate of the intrinsic L_p distance.
pub fn intrinsic_lp(k: &Body, l: &Body, p: f64, cfg: &SamplerConfig) -> Result<Estimate> {
    let d = check_pair(k, l)?;
    check_p(p)?;
    cfg.validate()?;
    let m = sample_moments(cfg, d, 1, |z, out| {
        out[0] = abs_pow(k.support_unchecked(z) - l.support_unchecked(z), p);
    });
    Ok(Estimate::power_root(
        m.mean[0],
        m.std_error(0),
        m.draws as u64,
        num_kernels::cp_constant(p)?,
        p,
    ))
}

/// Monte Carlo estimate of the classical L_p distance (uniform probability
/// measure on the sphere, sampled as `Z/|Z|`).
pub fn classical_lp(k: &Body, l: &Body, p: f64, cfg: &SamplerConfig) -> Result<Estimate> {
    let d = check_pair(k, l)?;
    check_p(p)?;
    cfg.validate()?;
    let m = sample_moments(cfg, d, 1, |z, out| {
        let r = norm(z);
        out[0] = if r > 0.0 {
            abs_pow((k.support_unchecked(z) - l.support_unchecked(z)) / r, p)
        } else {
            0.0
        };
    });
    Ok(Estimate::power_root(
        m.mean[0],
        m.std_error(0),
        m.draws as u64,
        1.0,
        p,
    ))
}

/// Monte Carlo estimate of `V_1(K)`.
pub fn v1(k: &Body, cfg: &SamplerConfig) -> Result<Estimate> {
    cfg.validate()?;
    let m = sample_moments(cfg, k.dim(), 1, |z, out| out[0] = k.support_unchecked(z));
    Ok(Estimate::from_mean(m.mean[0], m.std_error(0), m.draws as u64).scaled(SQRT_2PI))
}

/// `V_1` from the structure of the body, when a closed form applies.
pub fn v1_exact(k: &Body) -> Option<f64> {
    match k {
        Body::Point(_) => Some(0.0),
        Body::Segment(a, b) => Some(
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt(),
        ),
        Body::Ball { center, radius } => Some(radius * ball_v1_factor(center.len())),
        Body::Zonotope { generators, .. } => Some(generators.iter().map(|g| norm(g)).sum()),
        Body::MinkowskiSum(a, b) => Some(v1_exact(a)? + v1_exact(b)?),
        Body::Scale(f, inner) => Some(f * v1_exact(inner)?),
        Body::Translate(_, inner) | Body::Embed(inner, _) => v1_exact(inner),
        _ => None,
    }
}

/// `V_1` of the unit ball in `d` dimensions, `d κ_d / κ_{d-1}`.
pub fn ball_v1_factor(d: usize) -> f64 {
    let d = d as f64;
    d * PI.sqrt() * (libm::lgamma(0.5 * (d + 1.0)) - libm::lgamma(0.5 * d + 1.0)).exp()
}

/// A sphere average with its cost and convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereAverage {
    pub value: f64,
    pub evaluations: u64,
    pub converged: bool,
}

const SPHERE_REL_TOL: f64 = 1e-11;
const SPHERE_ABS_TOL: f64 = 1e-13;
const SPHERE_MAX_INTERVALS: usize = 20_000;
/// Initial pieces of a full circle and of the polar range `[0, π]`.
const RING_PIECES: usize = 128;
const POLAR_PIECES: usize = 64;

fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Average of `f` over the unit sphere `S^{d-1}` (uniform probability
/// measure) for `d <= 3`.
///
/// Circles are integrated by adaptive Gauss–Kronrod starting from
/// [`RING_PIECES`] equal pieces; in `d = 3` the polar angle is handled the
/// same way with weight `sin θ`. The fine initial partition matters: a kink
/// lying between the outermost Kronrod node and the end of a piece is
/// invisible to the error estimate, and its contribution shrinks with the
/// square of the piece width.
pub fn sphere_average<F: Fn(&[f64]) -> f64>(d: usize, f: F) -> Result<SphereAverage> {
    let count = Cell::new(0u64);
    let eval = |u: &[f64]| {
        count.set(count.get() + 1);
        f(u)
    };
    let ring = uniform_breaks(0.0, TAU, RING_PIECES);
    let (value, converged) = match d {
        1 => (0.5 * (eval(&[1.0]) + eval(&[-1.0])), true),
        2 => {
            let r = quadrature::integrate(
                |t: f64| eval(&[t.cos(), t.sin()]),
                &ring,
                SPHERE_ABS_TOL,
                SPHERE_REL_TOL,
                SPHERE_MAX_INTERVALS,
            );
            (r.value / TAU, r.abs_error <= 1e-7 * r.value.abs().max(1.0))
        }
        3 => {
            let inner_ok = Cell::new(true);
            let r = quadrature::integrate(
                |theta: f64| {
                    let (s, c) = theta.sin_cos();
                    let circle = quadrature::integrate(
                        |phi: f64| eval(&[s * phi.cos(), s * phi.sin(), c]),
                        &ring,
                        SPHERE_ABS_TOL,
                        SPHERE_REL_TOL,
                        SPHERE_MAX_INTERVALS,
                    );
                    if circle.abs_error > 1e-8 * circle.value.abs().max(1.0) {
                        inner_ok.set(false);
                    }
                    s * circle.value
                },
                &uniform_breaks(0.0, PI, POLAR_PIECES),
                SPHERE_ABS_TOL,
                SPHERE_REL_TOL,
                SPHERE_MAX_INTERVALS,
            );
            (
                r.value / (2.0 * TAU),
                inner_ok.get() && r.abs_error <= 1e-7 * r.value.abs().max(1.0),
            )
        }
        _ => return Err(MetricError::DimensionTooLarge(d)),
    };
    Ok(SphereAverage {
        value,
        evaluations: count.get(),
        converged,
    })
}

/// Deterministic intrinsic L_p distance for `d <= 3`, using
/// `E|Δ(Z)|^p = E|Z|^p · (sphere average of |Δ|^p)`.
pub fn intrinsic_lp_quadrature(k: &Body, l: &Body, p: f64) -> Result<Estimate> {
    let d = check_pair(k, l)?;
    check_p(p)?;
    let avg = sphere_average(d, |u| {
        abs_pow(k.support_unchecked(u) - l.support_unchecked(u), p)
    })?;
    let scale = num_kernels::cp_constant(p)? * num_kernels::gaussian_norm_moment(p, d)?;
    let value = (scale * avg.value.max(0.0)).powf(1.0 / p);
    Ok(Estimate::quadrature(value, avg.evaluations, avg.converged))
}

/// Deterministic classical L_p distance for `d <= 3`.
pub fn classical_lp_quadrature(k: &Body, l: &Body, p: f64) -> Result<Estimate> {
    let d = check_pair(k, l)?;
    check_p(p)?;
    let avg = sphere_average(d, |u| {
        abs_pow(k.support_unchecked(u) - l.support_unchecked(u), p)
    })?;
    Ok(Estimate::quadrature(
        avg.value.max(0.0).powf(1.0 / p),
        avg.evaluations,
        avg.converged,
    ))
}

/// Deterministic `V_1` for `d <= 3`.
pub fn v1_quadrature(k: &Body) -> Result<Estimate> {
    let d = k.dim();
    let avg = sphere_average(d, |u| k.support_unchecked(u))?;
    let value = SQRT_2PI * num_kernels::gaussian_norm_moment(1.0, d)? * avg.value;
    Ok(Estimate::quadrature(value, avg.evaluations, avg.converged))
}

/// Hausdorff distance: exact when a closed form or a finite vertex
/// description is available, otherwise a certified bracket of width at most
/// `mesh_target` (see [`hausdorff_bracket`]).
pub fn hausdorff(k: &Body, l: &Body, mesh_target: f64) -> Result<Estimate> {
    if let Some(v) = hausdorff_exact(k, l)? {
        return Ok(Estimate::exact(v));
    }
    hausdorff_bracket(k, l, mesh_target, DEFAULT_BRACKET_EVALUATIONS)
}

/// Exact Hausdorff distance for structurally equal bodies, `d = 1`,
/// ball/point pairs and pairs of bodies with finite vertex descriptions.
pub fn hausdorff_exact(k: &Body, l: &Body) -> Result<Option<f64>> {
    let d = check_pair(k, l)?;
    if k == l {
        return Ok(Some(0.0));
    }
    if d == 1 {
        let up = (k.support_unchecked(&[1.0]) - l.support_unchecked(&[1.0])).abs();
        let down = (k.support_unchecked(&[-1.0]) - l.support_unchecked(&[-1.0])).abs();
        return Ok(Some(up.max(down)));
    }
    if let (Some((c1, r1)), Some((c2, r2))) = (round_part(k), round_part(l)) {
        let gap: f64 = c1
            .iter()
            .zip(c2)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        return Ok(Some(gap + (r1 - r2).abs()));
    }
    match (k.vertex_candidates(), l.vertex_candidates()) {
        (Some(a), Some(b)) => Ok(Some(directed(&a, &b).max(directed(&b, &a)))),
        _ => Ok(None),
    }
}

fn round_part(b: &Body) -> Option<(&[f64], f64)> {
    match b {
        Body::Point(p) => Some((p, 0.0)),
        Body::Ball { center, radius } => Some((center, *radius)),
        _ => None,
    }
}

/// `max_{a ∈ from} dist(a, conv(to))`. Candidates are visited in decreasing
/// order of the cheap bound `min_v |a - v|` and skipped once that bound
/// cannot beat the current maximum.
fn directed(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let mut order: Vec<(f64, usize)> = from
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let ub = to
                .iter()
                .map(|v| a.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            (ub, i)
        })
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut best: f64 = 0.0;
    let mut shifted = vec![vec![0.0; from[0].len()]; to.len()];
    for (ub, i) in order {
        if ub <= best {
            break;
        }
        let a = &from[i];
        for (s, v) in shifted.iter_mut().zip(to) {
            s.iter_mut()
                .zip(v.iter().zip(a))
                .for_each(|(si, (vi, ai))| *si = vi - ai);
        }
        best = best.max(norm(&min_norm_point(&shifted)));
    }
    best
}

#[derive(Debug, Clone)]
struct Cell2 {
    upper: f64,
    face: usize,
    center: Vec<f64>,
    half: f64,
}

impl PartialEq for Cell2 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell2 {}
impl PartialOrd for Cell2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell2 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.face.cmp(&self.face))
            .then_with(|| {
                for (a, b) in other.center.iter().zip(&self.center) {
                    match a.total_cmp(b) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

/// Certified bracket for the Hausdorff distance by branch and bound over the
/// faces of the cube `[-1, 1]^d`, mapped radially onto the sphere.
///
/// `|h_K - h_L|` is `(R_K + R_L)`-Lipschitz on the sphere, with `R` the
/// structural outer radii, and radial projection from the cube surface
/// onto the sphere does not increase distances. A cell with centre value
/// `g` and half side `s` is therefore bounded by `g + (R_K + R_L) s sqrt(d-1)`.
/// The cell with the largest bound is split until the best bound is within
/// `mesh_target` of the best value seen, or until `max_evaluations` support
/// differences have been computed (then `converged` is false). Both ends
/// are widened by `8 d ε (R_K + R_L)` to cover rounding in the evaluations.
pub fn hausdorff_bracket(
    k: &Body,
    l: &Body,
    mesh_target: f64,
    max_evaluations: u64,
) -> Result<Estimate> {
    let d = check_pair(k, l)?;
    if !(mesh_target > 0.0 && mesh_target.is_finite()) {
        return Err(MetricError::InvalidMeshTarget(mesh_target));
    }
    let gap = |u: &[f64]| (k.support_unchecked(u) - l.support_unchecked(u)).abs();
    if d == 1 {
        let v = gap(&[1.0]).max(gap(&[-1.0]));
        return Ok(Estimate::bracket(v, v, 2, true));
    }
    let lip = k.outer_radius() + l.outer_radius();
    let reach = ((d - 1) as f64).sqrt();
    let mut u = vec![0.0; d];
    let evaluations = Cell::new(0u64);
    let mut evaluate = |face: usize, center: &[f64]| -> f64 {
        let axis = face / 2;
        let sign = if face.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut j = 0;
        for (i, ui) in u.iter_mut().enumerate() {
            if i == axis {
                *ui = sign;
            } else {
                *ui = center[j];
                j += 1;
            }
        }
        let n = norm(&u);
        u.iter_mut().for_each(|x| *x /= n);
        evaluations.set(evaluations.get() + 1);
        gap(&u)
    };

    let mut lower: f64 = 0.0;
    let mut dropped: f64 = 0.0;
    let mut heap = BinaryHeap::new();
    for face in 0..2 * d {
        let center = vec![0.0; d - 1];
        let g = evaluate(face, &center);
        lower = lower.max(g);
        heap.push(Cell2 {
            upper: g + lip * (reach).min(2.0),
            face,
            center,
            half: 1.0,
        });
    }
    let children = 1usize << (d - 1);
    let mut converged = true;
    while let Some(top) = heap.peek() {
        if top.upper - lower <= mesh_target {
            break;
        }
        if evaluations.get() >= max_evaluations {
            converged = false;
            break;
        }
        let cell = heap.pop().expect("peeked");
        let half = 0.5 * cell.half;
        let radius = (half * reach).min(2.0);
        for mask in 0..children {
            let center: Vec<f64> = cell
                .center
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if mask >> i & 1 == 1 {
                        c + half
                    } else {
                        c - half
                    }
                })
                .collect();
            let g = evaluate(cell.face, &center);
            lower = lower.max(g);
            let upper = g + lip * radius;
            if upper <= lower + mesh_target {
                dropped = dropped.max(upper);
            } else {
                heap.push(Cell2 {
                    upper,
                    face: cell.face,
                    center,
                    half,
                });
            }
        }
    }
    let upper = heap
        .peek()
        .map_or(lower, |c| c.upper)
        .max(dropped)
        .max(lower);
    let rounding = 8.0 * d as f64 * f64::EPSILON * lip;
    Ok(Estimate::bracket(
        (lower - rounding).max(0.0),
        upper + rounding,
        evaluations.get(),
        converged,
    ))
}

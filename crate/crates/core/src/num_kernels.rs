//! Scalar kernels: normal pdf/cdf, Γ, the normalizing constant `c_p`,
//! Gaussian norm moments, plus-part expectations of a shifted normal,
//! truncated upper moments, the root `M` of the plus-part equation and the
//! classical-to-intrinsic conversion factor.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

/// `1 / sqrt(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_87;
/// `sqrt(2π)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_502_415_765_284_811_045_3;

/// Largest argument accepted by [`gamma`].
pub const GAMMA_MAX_ARG: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("exponent p must be a positive finite number, got {0}")]
    InvalidExponent(f64),
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("scale delta must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("gamma argument {0} outside (0, {GAMMA_MAX_ARG}]")]
    GammaDomain(f64),
    #[error("v1 = {v1} is smaller than delta = {delta}; inconsistent input")]
    InconsistentV1 { delta: f64, v1: f64 },
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, computed from `erfc` so both tails
/// keep full relative precision.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Γ(x) for `0 < x <= 50`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= GAMMA_MAX_ARG) {
        return Err(KernelError::GammaDomain(x));
    }
    Ok(libm::tgamma(x))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(KernelError::GammaDomain(x));
    }
    Ok(libm::lgamma_r(x).0)
}

/// Γ(a) / Γ(b), switching to log-gamma once either argument leaves the
/// direct range.
fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a <= GAMMA_MAX_ARG && b <= GAMMA_MAX_ARG {
        Ok(gamma(a)? / gamma(b)?)
    } else {
        Ok((ln_gamma(a)? - ln_gamma(b)?).exp())
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(KernelError::InvalidExponent(p))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(KernelError::InvalidDelta(delta))
    }
}

/// `c_p = 1 / E|Z|^p = sqrt(π) / (2^{p/2} Γ((p+1)/2))`.
pub fn cp_constant(p: f64) -> Result<f64> {
    check_exponent(p)?;
    let a = 0.5 * (p + 1.0);
    if a <= GAMMA_MAX_ARG {
        Ok(PI.sqrt() / (2f64.powf(0.5 * p) * gamma(a)?))
    } else {
        Ok((0.5 * PI.ln() - 0.5 * p * std::f64::consts::LN_2 - ln_gamma(a)?).exp())
    }
}

/// `E‖Z‖^p` for a standard Gaussian vector in `d` dimensions:
/// `2^{p/2} Γ((d+p)/2) / Γ(d/2)`.
pub fn gaussian_norm_moment(p: f64, d: usize) -> Result<f64> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(KernelError::InvalidExponent(p));
    }
    if d == 0 {
        return Err(KernelError::InvalidDimension);
    }
    let half_d = 0.5 * d as f64;
    Ok(2f64.powf(0.5 * p) * gamma_ratio(half_d + 0.5 * p, half_d)?)
}

/// `E(M - δZ)_+ = δ [mΦ(m) + φ(m)]` with `m = M/δ`.
pub fn plus_part_mean(m_shift: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !m_shift.is_finite() {
        return Err(KernelError::NonFinite(m_shift));
    }
    Ok(delta * unit_plus_part_mean(m_shift / delta))
}

#[inline]
fn unit_plus_part_mean(m: f64) -> f64 {
    if m >= 0.0 {
        m * std_normal_cdf(m) + std_normal_pdf(m)
    } else if m >= -2.0 {
        // φ(x) - x(1-Φ(x)) with x = -m; at most a few digits cancel here.
        let x = -m;
        (std_normal_pdf(x) - x * std_normal_sf(x)).max(0.0)
    } else {
        // (1-Φ(x)) * Hh_1(x)/Hh_0(x), the ratio of repeated normal tail
        // integrals, as the continued fraction 1/(x + 2/(x + 3/(x + ...))).
        let x = -m;
        std_normal_sf(x) * tail_ratio_cf(x)
    }
}

/// `1/(x + 2/(x + 3/(x + ...)))` by the modified Lentz method, `x >= 2`.
fn tail_ratio_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 2..10_000 {
        let a = n as f64;
        d = x + a * d;
        d = if d.abs() < TINY { TINY } else { d };
        c = x + a / c;
        c = if c.abs() < TINY { TINY } else { c };
        d = 1.0 / d;
        let step = c * d;
        f *= step;
        if (step - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `T(p, m) = ∫_m^∞ (z - m)^p φ(z) dz`, so that
/// `E[(δZ - M)_+]^p = δ^p T(p, M/δ)`.
///
/// Evaluated as `∫_0^U y^p φ(y + m) dy` by adaptive Gauss–Kronrod, where the
/// integrand peaks at `y* = (sqrt(m² + 4p) - m)/2` and `U = y* + 40`; the
/// neglected tail is below `e^{-800}` relative to the peak. For `m >= 0` the
/// factor `φ(m)` is pulled out so the quadrature never sees underflow.
pub fn truncated_upper_moment(p: f64, m: f64) -> Result<f64> {
    check_exponent(p)?;
    if !m.is_finite() {
        return Err(KernelError::NonFinite(m));
    }
    let peak = 0.5 * ((m * m + 4.0 * p).sqrt() - m);
    let upper = peak + 40.0;
    // Width of the log-integrand at its peak; breakpoints grow geometrically
    // from there so narrow peaks are never stepped over.
    let width = 1.0 / (p / (peak * peak) + 1.0).sqrt();
    let mut breaks = vec![0.0, 0.5 * peak, peak];
    let mut step = width;
    while peak + step < upper {
        breaks.push(peak + step);
        step *= 2.0;
    }
    breaks.push(upper);
    let rel_tol = 1e-13;
    let value = if m >= 0.0 {
        let r = quadrature::integrate(
            |y: f64| y.powf(p) * (-(m * y) - 0.5 * y * y).exp(),
            &breaks,
            0.0,
            rel_tol,
            4000,
        );
        std_normal_pdf(m) * r.value
    } else {
        quadrature::integrate(
            |y: f64| y.powf(p) * std_normal_pdf(y + m),
            &breaks,
            0.0,
            rel_tol,
            4000,
        )
        .value
    };
    Ok(value)
}

/// Root of `E(M - δZ)_+ = v1 / sqrt(2π)` with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSolution {
    pub m_value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket_low: f64,
    pub bracket_high: f64,
}

const SOLVE_M_MAX_ITER: usize = 200;

/// Solves `plus_part_mean(M, δ) = v1/sqrt(2π)` for `M`.
///
/// The left side is convex and increasing in `M` with derivative `Φ(M/δ)`,
/// `plus_part_mean(0, δ) = δ/sqrt(2π) <= v1/sqrt(2π)` and
/// `plus_part_mean(M, δ) >= M`, so the root lies in `[0, v1/sqrt(2π)]`.
/// Newton steps start from the upper end and fall back to bisection when a
/// step leaves the current bracket.
pub fn solve_m(delta: f64, v1: f64) -> Result<MSolution> {
    check_delta(delta)?;
    if !v1.is_finite() {
        return Err(KernelError::NonFinite(v1));
    }
    if v1 < delta {
        return Err(KernelError::InconsistentV1 { delta, v1 });
    }
    let target = v1 * INV_SQRT_2PI;
    let scale = v1.max(1.0);
    let accept = 1e-13 * scale;
    let f = |m: f64| delta * unit_plus_part_mean(m / delta) - target;

    let mut lo = 0.0;
    let mut hi = target;
    let f_lo = f(lo);
    if f_lo >= -accept {
        return Ok(MSolution {
            m_value: 0.0,
            residual: f_lo.abs(),
            iterations: 0,
            bracket_low: 0.0,
            bracket_high: hi,
        });
    }

    let mut x = hi;
    let mut fx = f(x);
    let mut best = (x, fx.abs());
    let mut iterations = 0;
    while iterations < SOLVE_M_MAX_ITER {
        iterations += 1;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.abs() <= accept {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let slope = std_normal_cdf(x / delta);
        let newton = if slope > 0.0 {
            x - fx / slope
        } else {
            f64::NAN
        };
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        fx = f(x);
    }
    if fx.abs() < best.1 {
        best = (x, fx.abs());
    }
    Ok(MSolution {
        m_value: best.0,
        residual: best.1,
        iterations,
        bracket_low: lo.min(best.0),
        bracket_high: hi.max(best.0),
    })
}

/// `λ(p, d) = [c_p E‖Z^{(d)}‖^p]^{1/p}`: the exact ratio between the
/// Gaussian-weighted metric and the sphere-averaged L_p metric taken with
/// the uniform probability measure on `S^{d-1}`.
pub fn intrinsic_factor(p: f64, d: usize) -> Result<f64> {
    Ok((cp_constant(p)? * gaussian_norm_moment(p, d)?).powf(1.0 / p))
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::too_many_arguments)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: recursive adaptive Simpson.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64 + Copy>(
            f: F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 30)
    }

    /// Simpson on unit panels so no mass is stepped over.
    fn simpson_panels<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> f64 {
        let n = (b - a).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| simpson(f, a + i as f64 * h, a + (i + 1) as f64 * h, 1e-14))
            .sum()
    }

    fn pdf_oracle(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn pdf_values() {
        assert!((std_normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        // 40-digit reference
        assert!((std_normal_pdf(1.0) - 0.241_970_724_519_143_35).abs() < 1e-15);
        for x in [0.3, 1.7, 5.0] {
            assert_eq!(std_normal_pdf(x), std_normal_pdf(-x));
        }
    }

    #[test]
    fn cdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(38.0) - 1.0).abs() < 1e-15);
        // high-precision references
        let refs = [
            (1.0, 0.841_344_746_068_542_948_585_232_5),
            (-1.0, 0.158_655_253_931_457_051_414_767_5),
            (2.5, 0.993_790_334_674_223_864_833_021_9),
            (-5.0, 2.866_515_718_791_939_116_7e-7),
            (-8.0, 6.220_960_574_271_784_123_5e-16),
            (0.3, 0.617_911_422_188_952_633_072_273_6),
        ];
        for (x, v) in refs {
            assert!((std_normal_cdf(x) - v).abs() < 1e-12, "x={x}");
        }
        // quadrature oracle for Φ(1)
        let q = 0.5 + simpson(pdf_oracle, 0.0, 1.0, 1e-15);
        assert!((std_normal_cdf(1.0) - q).abs() < 1e-12);
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let mut prev = 0.0;
        for i in -8000..=8000 {
            let v = std_normal_cdf(i as f64 * 1e-3);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn gamma_domain() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(50.5).is_err());
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn cp_examples() {
        assert!((cp_constant(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((cp_constant(4.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_relative_eq!(
            cp_constant(1.0).unwrap(),
            (PI / 2.0).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cp_constant(1.5).unwrap(),
            1.162_736_634_038_237_2,
            max_relative = 1e-12
        );
        assert!(cp_constant(0.0).is_err());
        assert!(cp_constant(-1.0).is_err());
    }

    #[test]
    fn cp_inverts_first_absolute_moment() {
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0] {
            let prod = cp_constant(p).unwrap() * gaussian_norm_moment(p, 1).unwrap();
            assert!((prod - 1.0).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn norm_moment_examples() {
        for d in 1..=12 {
            assert_relative_eq!(
                gaussian_norm_moment(2.0, d).unwrap(),
                d as f64,
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(
            gaussian_norm_moment(1.0, 1).unwrap(),
            (2.0 / PI).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            gaussian_norm_moment(1.0, 2).unwrap(),
            (PI / 2.0).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            gaussian_norm_moment(3.0, 7).unwrap(),
            20.425_844_756_553_353,
            max_relative = 1e-12
        );
        // large d goes through log-gamma
        let big = gaussian_norm_moment(2.0, 500).unwrap();
        assert_relative_eq!(big, 500.0, max_relative = 1e-10);
    }

    #[test]
    fn norm_moment_monte_carlo_oracle() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 2_000_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let r = (a * a + b * b).sqrt();
            sum += r;
            sum2 += r * r;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = gaussian_norm_moment(1.0, 2).unwrap();
        assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact}");
    }

    #[test]
    fn plus_part_mean_examples() {
        let v = plus_part_mean(0.0, 1.0).unwrap();
        assert!((v - INV_SQRT_2PI).abs() < 1e-15);
        let refs = [
            (1.0, 1.0, 1.083_315_470_587_686_3),
            (-3.0, 1.0, 3.821_543_170_477_236e-4),
            (2.5, 0.7, 2.500_030_740_843_659_2),
            (-12.0, 1.0, 1.460_520_116_984_554_8e-34),
        ];
        for (m, d, r) in refs {
            let v = plus_part_mean(m, d).unwrap();
            assert!(((v - r) / r).abs() < 1e-12, "M={m}: {v} vs {r}");
        }
        assert!(plus_part_mean(1.0, 0.0).is_err());
        assert!(plus_part_mean(1.0, -2.0).is_err());
    }

    #[test]
    fn plus_part_mean_quadrature_oracle() {
        for (m, d) in [(1.0, 1.0), (-3.0, 1.0), (0.4, 2.0), (-0.7, 0.5)] {
            let oracle =
                simpson_panels(|z: f64| (m - d * z).max(0.0) * pdf_oracle(z), -40.0, m / d);
            let v = plus_part_mean(m, d).unwrap();
            assert!((v - oracle).abs() < 1e-11, "M={m}, d={d}: {v} vs {oracle}");
        }
    }

    #[test]
    fn plus_part_mean_limits() {
        for d in [0.5, 1.0, 3.0] {
            assert!((plus_part_mean(12.0 * d, d).unwrap() - 12.0 * d).abs() < 1e-8);
            assert!(plus_part_mean(-12.0 * d, d).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn truncated_moment_examples() {
        let refs = [
            (1.0, 0.0, 0.398_942_280_401_432_7),
            (2.0, 0.0, 0.5),
            (1.0, 1.0, 0.083_315_470_587_686_3),
            (2.0, 1.5, 0.022_847_010_624_951_123),
            (1.5, 0.3, 0.272_569_907_605_583_4),
            (4.0, -2.0, 42.993_581_723_465_68),
            (8.0, 0.0, 52.5),
            (3.0, 5.0, 1.020_683_473_889_047_9e-8),
            (2.5, 10.0, 7.501_244_003_924_727e-26),
            (1.0, 30.0, 1.631_956_734_091_401_2e-199),
        ];
        for (p, m, r) in refs {
            let v = truncated_upper_moment(p, m).unwrap();
            assert!(((v - r) / r).abs() < 1e-10, "p={p} m={m}: {v} vs {r}");
        }
    }

    #[test]
    fn truncated_moment_closed_forms() {
        // p = 1: φ(m) - m(1-Φ(m)); p = 2: (1+m²)(1-Φ(m)) - mφ(m).
        for m in [-4.0, -1.0, 0.0, 0.5, 2.0, 6.0] {
            let q = std_normal_sf(m);
            let p1 = std_normal_pdf(m) - m * q;
            let p2 = (1.0 + m * m) * q - m * std_normal_pdf(m);
            assert_relative_eq!(
                truncated_upper_moment(1.0, m).unwrap(),
                p1,
                max_relative = 1e-9
            );
            assert_relative_eq!(
                truncated_upper_moment(2.0, m).unwrap(),
                p2,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn truncated_moment_positive_and_decreasing() {
        for p in [1.0, 1.5, 2.0, 4.0, 8.0] {
            let mut prev = f64::INFINITY;
            for i in -40..=70 {
                let m = i as f64 * 0.5;
                let v = truncated_upper_moment(p, m).unwrap();
                assert!(v > 0.0 && v < prev, "p={p} m={m}");
                prev = v;
            }
        }
    }

    #[test]
    fn solve_m_examples() {
        let s = solve_m(1.0, 1.0).unwrap();
        assert_eq!(s.m_value, 0.0);
        let s = solve_m(2.0, 2.0).unwrap();
        assert_eq!(s.m_value, 0.0);
        // Forward-evaluate at M = 1 with the quadrature oracle, then invert.
        let forward =
            SQRT_2PI * simpson_panels(|z: f64| (1.0 - z).max(0.0) * pdf_oracle(z), -40.0, 1.0);
        assert!((forward - 2.715_469_188_920_282_5).abs() < 1e-11);
        let s = solve_m(1.0, forward).unwrap();
        assert!((s.m_value - 1.0).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn solve_m_errors() {
        assert!(matches!(
            solve_m(1.0, 0.5),
            Err(KernelError::InconsistentV1 { .. })
        ));
        assert!(solve_m(0.0, 1.0).is_err());
        assert!(solve_m(-1.0, 1.0).is_err());
    }

    #[test]
    fn intrinsic_factor_examples() {
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((intrinsic_factor(p, 1).unwrap() - 1.0).abs() < 1e-12);
        }
        for d in 1..=10 {
            assert!((intrinsic_factor(2.0, d).unwrap() - (d as f64).sqrt()).abs() < 1e-10);
        }
        assert!((intrinsic_factor(1.0, 2).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((intrinsic_factor(1.0, 3).unwrap() - 2.0).abs() < 1e-12);
        assert_relative_eq!(
            intrinsic_factor(4.0, 5).unwrap(),
            1.848_147_790_443_141_5,
            max_relative = 1e-12
        );
    }

    proptest! {
        #[test]
        fn plus_part_mean_strictly_increasing(a in -8.0f64..8.0, gap in 1e-3f64..5.0, d in 0.05f64..5.0) {
            let lo = plus_part_mean(a * d, d).unwrap();
            let hi = plus_part_mean((a + gap) * d, d).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn reflection_identity(m in -6.0f64..6.0) {
            let t = truncated_upper_moment(1.0, m).unwrap();
            let r = plus_part_mean(-m, 1.0).unwrap();
            prop_assert!((t - r).abs() < 1e-9);
        }

        #[test]
        fn solve_m_round_trip_and_bounds(delta in 1e-3f64..50.0, ratio in 1.0f64..40.0) {
            let v1 = delta * ratio;
            let s = solve_m(delta, v1).unwrap();
            let back = plus_part_mean(s.m_value, delta).unwrap();
            prop_assert!((back - v1 * INV_SQRT_2PI).abs() <= 1e-10 * v1.max(1.0));
            prop_assert!(s.residual <= 1e-10 * v1.max(1.0));
            prop_assert!(s.m_value >= 0.0);
            prop_assert!(s.m_value <= v1 * INV_SQRT_2PI + 1e-9);
            prop_assert!(s.bracket_low <= s.m_value && s.m_value <= s.bracket_high);
        }

        #[test]
        fn solve_m_homogeneous(delta in 0.01f64..10.0, ratio in 1.0f64..20.0, c in 0.01f64..100.0) {
            let a = solve_m(delta, delta * ratio).unwrap().m_value;
            let b = solve_m(c * delta, c * delta * ratio).unwrap().m_value;
            prop_assert!((b - c * a).abs() <= 1e-9 * (c * a).max(1.0));
        }
    }
}

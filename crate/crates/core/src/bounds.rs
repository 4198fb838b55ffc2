//! Lower bounds on the intrinsic metric in terms of the Hausdorff distance
//! `δ` and the first intrinsic volume of the hull of the union, and their
//! statistical verification on concrete body pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bodies::Body;
use crate::metrics::{self, hausdorff, pair_moments, Estimate, MetricError, SamplerConfig};
use crate::num_kernels::{self, KernelError, MSolution, INV_SQRT_2PI};

/// Bodies whose Hausdorff upper bound falls below this are treated as equal.
pub const VACUOUS_DELTA: f64 = 1e-12;
/// Default cap for automatic sample doubling.
pub const DEFAULT_MAX_SAMPLES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("delta must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = std::result::Result<T, BoundError>;

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(BoundError::InvalidDelta(delta))
    }
}

/// `(δ/4) exp(-(v1/δ)² / (2π))`.
pub fn theorem2_rhs(delta: f64, v1: f64) -> Result<f64> {
    check_delta(delta)?;
    if !v1.is_finite() {
        return Err(BoundError::InvalidArgument("v1 must be finite"));
    }
    let r = v1 / delta;
    Ok(0.25 * delta * (-(r * r) * 0.5 / std::f64::consts::PI).exp())
}

/// `(δ/4) exp(-(m/δ)²)`.
pub fn eq5_rhs(delta: f64, m_value: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(m_value >= 0.0 && m_value.is_finite()) {
        return Err(BoundError::InvalidArgument(
            "m must be nonnegative and finite",
        ));
    }
    let r = m_value / delta;
    Ok(0.25 * delta * (-(r * r)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Undecided,
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Undecided => "undecided",
            Verdict::Vacuous => "vacuous",
        }
    }
}

/// Settings shared by the bound checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    pub sampler: SamplerConfig,
    /// Sample doubling stops once this many would be exceeded.
    pub max_samples: usize,
    /// Width target when the Hausdorff distance needs a bracket.
    pub mesh_target: f64,
}

impl BoundConfig {
    pub fn new(sampler: SamplerConfig) -> Self {
        Self {
            sampler,
            max_samples: DEFAULT_MAX_SAMPLES.max(sampler.n_samples),
            mesh_target: metrics::DEFAULT_MESH_TARGET,
        }
    }
}

/// Everything that enters the bound for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub delta: Estimate,
    pub v1_hull: Estimate,
    /// `V_1` passed to the solver: the point estimate, raised to the lower `δ` if below it.
    pub v1_used: f64,
    /// The intrinsic L_p estimate.
    pub lhs: Estimate,
    /// Sample mean of `|h_K(Z) - h_L(Z)|^p` and its standard error.
    pub raw_mean: f64,
    pub raw_std_error: f64,
    /// `M` from the lower `δ` and the `V_1` point estimate (clamped to `δ`).
    pub m: Option<MSolution>,
    /// `M` from the lower `δ` and the upper end of the `V_1` interval.
    pub m_conservative: Option<MSolution>,
    pub rhs_eq3: f64,
    pub rhs_eq5: f64,
    /// `δ^p T(p, M/δ)`, the lower bound for `raw_mean`.
    pub chain_lower: f64,
    pub holds_eq3: bool,
    pub holds_eq5: bool,
    pub holds_chain: bool,
    pub margin_eq3: f64,
    /// `lhs / rhs_eq3`; absent when the right side underflows to zero.
    pub ratio: Option<f64>,
    pub inconsistent_v1: bool,
    pub verdict: Verdict,
}

fn vacuous_report(
    p: f64,
    delta: Estimate,
    lhs: Estimate,
    v1_hull: Estimate,
    raw: (f64, f64),
) -> BoundReport {
    BoundReport {
        p,
        delta,
        v1_used: v1_hull.value,
        v1_hull,
        lhs,
        raw_mean: raw.0,
        raw_std_error: raw.1,
        m: None,
        m_conservative: None,
        rhs_eq3: 0.0,
        rhs_eq5: 0.0,
        chain_lower: 0.0,
        holds_eq3: true,
        holds_eq5: true,
        holds_chain: true,
        margin_eq3: lhs.ci_low,
        ratio: None,
        inconsistent_v1: false,
        verdict: Verdict::Vacuous,
    }
}

/// Checks the bound with default settings.
pub fn check_theorem2(k: &Body, l: &Body, p: f64, cfg: &SamplerConfig) -> Result<BoundReport> {
    check_theorem2_with(k, l, p, &BoundConfig::new(*cfg))
}

/// Checks `δ*_p(K, L) >= (δ/4) exp(-(V_1/δ)²/(2π))` and the intermediate
/// quantities of its proof on one pair.
///
/// `δ` comes from [`hausdorff`]; with a bracket the right sides are taken at
/// whichever end is larger. The verdict is `holds` when the 99% lower
/// confidence limit of the estimate clears the right side and `violated`
/// when the upper limit falls short; otherwise the sample count doubles
/// until `max_samples`, after which the pair is `undecided`.
pub fn check_theorem2_with(k: &Body, l: &Body, p: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    let delta = hausdorff(k, l, cfg.mesh_target)?;
    let (d_low, d_high) = (delta.ci_low, delta.ci_high);
    let mut n = cfg.sampler.n_samples;
    if d_high <= VACUOUS_DELTA || d_low <= VACUOUS_DELTA {
        let pm = pair_moments(k, l, p, &cfg.sampler)?;
        return Ok(vacuous_report(
            p,
            delta,
            pm.intrinsic()?,
            pm.v1_hull(),
            (pm.pow_mean, pm.pow_se),
        ));
    }
    loop {
        let pm = pair_moments(k, l, p, &cfg.sampler.with_samples(n))?;
        let lhs = pm.intrinsic()?;
        let v1_hull = pm.v1_hull();
        let inconsistent_v1 = v1_hull.ci_high < d_low;
        let v1_used = v1_hull.value.max(d_low);
        let m = num_kernels::solve_m(d_low, v1_used)?;
        let m_conservative = num_kernels::solve_m(d_low, v1_hull.ci_high.max(d_low))?;
        let rhs_eq3 = theorem2_rhs(d_low, v1_used)?.max(theorem2_rhs(d_high, v1_used)?);
        let rhs_eq5 = eq5_rhs(d_low, m.m_value)?.max(eq5_rhs(d_high, m.m_value)?);
        let chain_lower =
            d_low.powf(p) * num_kernels::truncated_upper_moment(p, m.m_value / d_low)?;
        let holds_eq3 = lhs.ci_low >= rhs_eq3;
        let violated = lhs.ci_high < rhs_eq3;
        let holds_chain = pm.pow_mean + 3.0 * pm.pow_se >= chain_lower;
        let settled = (holds_eq3 || violated) && holds_chain && !inconsistent_v1;
        let can_double = n.checked_mul(2).is_some_and(|m| m <= cfg.max_samples);
        if settled || !can_double {
            let verdict = if holds_eq3 {
                Verdict::Holds
            } else if violated {
                Verdict::Violated
            } else {
                Verdict::Undecided
            };
            return Ok(BoundReport {
                p,
                delta,
                v1_hull,
                v1_used,
                lhs,
                raw_mean: pm.pow_mean,
                raw_std_error: pm.pow_se,
                m: Some(m),
                m_conservative: Some(m_conservative),
                rhs_eq3,
                rhs_eq5,
                chain_lower,
                holds_eq3,
                holds_eq5: lhs.ci_low >= rhs_eq5,
                holds_chain,
                margin_eq3: lhs.ci_low - rhs_eq3,
                ratio: (rhs_eq3 > 0.0).then(|| lhs.value / rhs_eq3),
                inconsistent_v1,
                verdict,
            });
        }
        n *= 2;
    }
}

/// The Gaussian-process form of the bound, for the process `X_t = <t, Z>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpReport {
    pub delta: Estimate,
    /// `B = E max(h_K(Z), h_L(Z))`.
    pub b_value: Estimate,
    /// `E|h_K(Z) - h_L(Z)|`, not normalized.
    pub lhs_l1: Estimate,
    /// `(δ/4) exp(-B²/δ²)` at the upper end of `δ`.
    pub rhs: f64,
    pub holds: bool,
    /// `V_1` of the hull from an independent stream.
    pub v1_hull: Estimate,
    /// `sqrt(2π) B` agrees with `v1_hull` within three combined standard errors.
    pub b_consistent: bool,
    pub verdict: Verdict,
}

/// Checks `E|h_K(Z) - h_L(Z)| >= (δ/4) exp(-B²/δ²)`.
pub fn remark2_check(k: &Body, l: &Body, cfg: &SamplerConfig) -> Result<GpReport> {
    remark2_check_with(k, l, &BoundConfig::new(*cfg))
}

pub fn remark2_check_with(k: &Body, l: &Body, cfg: &BoundConfig) -> Result<GpReport> {
    let delta = hausdorff(k, l, cfg.mesh_target)?;
    let hull = Body::hull_union(k.clone(), l.clone()).map_err(MetricError::from)?;
    let v1_cfg = cfg.sampler.with_seed(cfg.sampler.seed.wrapping_add(1));
    let mut n = cfg.sampler.n_samples;
    loop {
        let pm = pair_moments(k, l, 1.0, &cfg.sampler.with_samples(n))?;
        let lhs_l1 = pm.l1_raw();
        let b_value = pm.hull_mean();
        let v1_hull = metrics::v1(&hull, &v1_cfg.with_samples(n))?;
        let combined = (2.0 * std::f64::consts::PI * b_value.std_error.powi(2)
            + v1_hull.std_error.powi(2))
        .sqrt();
        let b_consistent =
            (b_value.value / INV_SQRT_2PI - v1_hull.value).abs() <= 3.0 * combined + 1e-12;
        if delta.ci_high <= VACUOUS_DELTA || delta.ci_low <= VACUOUS_DELTA {
            return Ok(GpReport {
                delta,
                b_value,
                lhs_l1,
                rhs: 0.0,
                holds: true,
                v1_hull,
                b_consistent,
                verdict: Verdict::Vacuous,
            });
        }
        let dh = delta.ci_high;
        let rhs = 0.25 * dh * (-(b_value.value / dh).powi(2)).exp();
        let holds = lhs_l1.ci_low >= rhs;
        let violated = lhs_l1.ci_high < rhs;
        let can_double = n.checked_mul(2).is_some_and(|m| m <= cfg.max_samples);
        if holds || violated || !can_double {
            let verdict = if holds {
                Verdict::Holds
            } else if violated {
                Verdict::Violated
            } else {
                Verdict::Undecided
            };
            return Ok(GpReport {
                delta,
                b_value,
                lhs_l1,
                rhs,
                holds,
                v1_hull,
                b_consistent,
                verdict,
            });
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> Body {
        Body::point(v.to_vec()).unwrap()
    }

    #[test]
    fn rhs_examples() {
        // 0.25 e^{-1/(2π)}
        let direct = 0.25 * (-1.0 / (2.0 * std::f64::consts::PI)).exp();
        assert!((theorem2_rhs(1.0, 1.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.213_216_050_8).abs() < 1e-10);
        assert!((theorem2_rhs(2.0, 2.0).unwrap() - 2.0 * direct).abs() < 1e-15);
        assert!(theorem2_rhs(1.0, 20.0).unwrap() < 1e-27);
        assert_eq!(eq5_rhs(1.0, 0.0).unwrap(), 0.25);
        assert!((eq5_rhs(1.0, 1.0).unwrap() - (-1f64).exp() / 4.0).abs() < 1e-15);
        assert!(theorem2_rhs(0.0, 1.0).is_err());
        assert!(eq5_rhs(-1.0, 1.0).is_err());
    }

    #[test]
    fn point_pair_report() {
        let r = check_theorem2(
            &pt(&[0.0, 0.0]),
            &pt(&[1.0, 0.0]),
            1.0,
            &SamplerConfig::new(0, 100_000),
        )
        .unwrap();
        assert_eq!(r.delta.value, 1.0);
        assert!(r.lhs.contains(1.0), "{r:?}");
        assert!(r.holds_eq3 && r.holds_chain);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.margin_eq3 - (1.0 - 0.2132)).abs() < 0.02);
        let m = r.m.unwrap();
        assert!(m.m_value <= r.v1_hull.value.max(1.0) * INV_SQRT_2PI + 1e-9);
    }

    #[test]
    fn point_and_segment_in_one_dimension() {
        let r = check_theorem2(
            &pt(&[0.0]),
            &Body::segment(vec![0.0], vec![1.0]).unwrap(),
            1.0,
            &SamplerConfig::new(1, 100_000),
        )
        .unwrap();
        assert_eq!(r.delta.value, 1.0);
        assert!(r.lhs.contains(0.5), "{r:?}");
        assert!((r.v1_hull.value - 1.0).abs() < 3.0 * r.v1_hull.std_error + 1e-12);
        assert!(r.holds_eq3);
    }

    #[test]
    fn concentric_balls() {
        let k = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
        let l = Body::ball(vec![0.0, 0.0], 3.0).unwrap();
        let r = check_theorem2(&k, &l, 2.0, &SamplerConfig::new(2, 100_000)).unwrap();
        assert_eq!(r.delta.value, 2.0);
        assert!(r.lhs.contains(8f64.sqrt()), "{r:?}");
        assert!(r.holds_eq3);
        // with V_1 = 3π exactly the right side is about 0.0146
        let exact = theorem2_rhs(2.0, 3.0 * std::f64::consts::PI).unwrap();
        assert!((exact - 0.5 * (-9.0 * std::f64::consts::PI / 8.0).exp()).abs() < 1e-15);
        assert!((r.rhs_eq3 - exact).abs() < 0.01);
    }

    #[test]
    fn identical_bodies_are_vacuous() {
        let k = Body::ball(vec![1.0, 2.0], 0.5).unwrap();
        let r = check_theorem2(&k, &k, 1.0, &SamplerConfig::new(0, 1000)).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
        let g = remark2_check(&k, &k, &SamplerConfig::new(0, 1000)).unwrap();
        assert_eq!(g.verdict, Verdict::Vacuous);
        assert_eq!(g.lhs_l1.value, 0.0);
        assert_eq!(g.rhs, 0.0);
    }

    #[test]
    fn gp_form_for_point_pair() {
        let g = remark2_check(
            &pt(&[0.0, 0.0]),
            &pt(&[1.0, 0.0]),
            &SamplerConfig::new(3, 100_000),
        )
        .unwrap();
        assert!(g.b_value.contains(INV_SQRT_2PI), "{g:?}");
        assert!(g.lhs_l1.contains((2.0 / std::f64::consts::PI).sqrt()));
        assert!((g.rhs - theorem2_rhs(1.0, 1.0).unwrap()).abs() < 0.01);
        assert!(g.holds && g.b_consistent);
    }

    proptest! {
        #[test]
        fn eq5_dominates_eq3(delta in 0.01f64..10.0, extra in 0.0f64..20.0) {
            let v1 = delta * (1.0 + extra);
            let m = num_kernels::solve_m(delta, v1).unwrap();
            let a = eq5_rhs(delta, m.m_value).unwrap();
            let b = theorem2_rhs(delta, v1).unwrap();
            prop_assert!(a >= b - 1e-12);
            prop_assert!(b <= 0.25 * delta);
        }

        #[test]
        fn homogeneous(delta in 0.01f64..10.0, ratio in 0.0f64..5.0, c in 0.01f64..100.0) {
            let v = ratio * delta;
            let a = theorem2_rhs(c * delta, c * v).unwrap();
            let b = c * theorem2_rhs(delta, v).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-300);
            let a = eq5_rhs(c * delta, c * v).unwrap();
            let b = c * eq5_rhs(delta, v).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-300);
        }
    }
}

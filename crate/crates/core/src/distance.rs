//! Euclidean distance from a point to a body.
//!
//! Bodies with a finite vertex description go through Wolfe's min-norm-point
//! algorithm; balls and ellipsoids are projected onto directly. Translations,
//! scalings and embeddings are peeled off structurally.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::bodies::{dot, norm, Body, BodyError, Result};

/// Distance and a nearest point in the body.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub distance: f64,
    pub nearest: Vec<f64>,
}

/// Distance from `x` to `body`.
pub fn point_distance(x: &[f64], body: &Body) -> Result<Projection> {
    let d = body.dim();
    if x.len() != d {
        return Err(BodyError::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    if let Some(vs) = body.vertex_candidates() {
        let shifted: Vec<Vec<f64>> = vs
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| a - b).collect())
            .collect();
        let y = min_norm_point(&shifted);
        return Ok(Projection {
            distance: norm(&y),
            nearest: y.iter().zip(x).map(|(a, b)| a + b).collect(),
        });
    }
    match body {
        Body::Ball { center, radius } => {
            let diff: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
            let r = norm(&diff);
            if r <= *radius {
                Ok(Projection {
                    distance: 0.0,
                    nearest: x.to_vec(),
                })
            } else {
                Ok(Projection {
                    distance: r - radius,
                    nearest: center
                        .iter()
                        .zip(&diff)
                        .map(|(c, v)| c + radius * v / r)
                        .collect(),
                })
            }
        }
        Body::Ellipsoid { center, shape } => Ok(ellipsoid_projection(x, center, shape)),
        Body::Translate(t, inner) => {
            let y: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
            let mut p = point_distance(&y, inner)?;
            p.nearest.iter_mut().zip(t).for_each(|(a, b)| *a += b);
            Ok(p)
        }
        Body::Scale(f, inner) => {
            if *f == 0.0 {
                return point_distance(x, &Body::Point(vec![0.0; d]));
            }
            let y: Vec<f64> = x.iter().map(|a| a / f).collect();
            let p = point_distance(&y, inner)?;
            Ok(Projection {
                distance: f * p.distance,
                nearest: p.nearest.into_iter().map(|a| f * a).collect(),
            })
        }
        Body::Embed(inner, _) => {
            let k = inner.dim();
            let p = point_distance(&x[..k], inner)?;
            let tail = norm(&x[k..]);
            let mut nearest = p.nearest;
            nearest.resize(d, 0.0);
            Ok(Projection {
                distance: p.distance.hypot(tail),
                nearest,
            })
        }
        Body::MinkowskiSum(l, r) => match (ball_part(l), ball_part(r)) {
            (_, Some((c, rad))) => sum_with_ball(x, l, &c, rad),
            (Some((c, rad)), _) => sum_with_ball(x, r, &c, rad),
            _ => Err(BodyError::Unsupported("distance to this Minkowski sum")),
        },
        _ => Err(BodyError::Unsupported("distance to this body")),
    }
}

fn ball_part(b: &Body) -> Option<(Vec<f64>, f64)> {
    match b {
        Body::Ball { center, radius } => Some((center.clone(), *radius)),
        _ => None,
    }
}

/// `d(x, K + B(c, r)) = max(d(x - c, K) - r, 0)`.
fn sum_with_ball(x: &[f64], k: &Body, c: &[f64], r: f64) -> Result<Projection> {
    let y: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
    let p = point_distance(&y, k)?;
    if p.distance <= r {
        return Ok(Projection {
            distance: 0.0,
            nearest: x.to_vec(),
        });
    }
    let s = r / p.distance;
    let nearest = p
        .nearest
        .iter()
        .zip(&y)
        .zip(c)
        .map(|((q, yi), ci)| q + s * (yi - q) + ci)
        .collect();
    Ok(Projection {
        distance: p.distance - r,
        nearest,
    })
}

/// Nearest point of `c + A·B` to `x`, via the secular equation in the
/// eigenbasis of `AᵀA`.
fn ellipsoid_projection(x: &[f64], center: &[f64], shape: &[Vec<f64>]) -> Projection {
    let d = center.len();
    let k = shape[0].len();
    let a = DMatrix::from_fn(d, k, |i, j| shape[i][j]);
    let xc = DVector::from_iterator(d, x.iter().zip(center).map(|(p, c)| p - c));
    let b = a.transpose() * &xc;
    let eig = SymmetricEigen::new(a.transpose() * &a);
    let s = eig.eigenvalues;
    let v = eig.eigenvectors;
    let bt = v.transpose() * &b;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let floor = 1e-13 * smax.max(f64::MIN_POSITIVE);

    let w_of = |lambda: f64| -> DVector<f64> {
        let scaled = DVector::from_iterator(
            k,
            (0..k).map(|i| {
                let den = s[i] + lambda;
                if den > floor {
                    bt[i] / den
                } else {
                    0.0
                }
            }),
        );
        &v * scaled
    };

    let mut w = w_of(0.0);
    if w.norm() > 1.0 {
        // ‖w(λ)‖ is decreasing in λ and ‖w(‖b‖)‖ <= 1.
        let (mut lo, mut hi) = (0.0, b.norm());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if w_of(mid).norm() > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        w = w_of(hi);
        let n = w.norm();
        if n > 1.0 {
            w /= n;
        }
    }
    let y = &a * &w;
    let nearest: Vec<f64> = center.iter().zip(y.iter()).map(|(c, yi)| c + yi).collect();
    let dist = x
        .iter()
        .zip(&nearest)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    Projection {
        distance: dist,
        nearest,
    }
}

/// Minimum-norm point of `conv(points)` by Wolfe's algorithm.
pub fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    wolfe(points).0
}

/// Wolfe's algorithm, also returning the active points and their convex
/// weights.
fn wolfe(points: &[Vec<f64>]) -> (Vec<f64>, Vec<usize>, Vec<f64>) {
    assert!(!points.is_empty());
    let scale2 = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max);
    if scale2 == 0.0 {
        return (points[0].clone(), vec![0], vec![1.0]);
    }
    let tol = 1e-12 * scale2;
    let weight_floor = 1e-14;

    let start = (0..points.len())
        .min_by(|&i, &j| dot(&points[i], &points[i]).total_cmp(&dot(&points[j], &points[j])))
        .expect("non-empty");
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut y = points[start].clone();

    let max_major = 50 * points.len() + 1000;
    for _ in 0..max_major {
        let (j, low) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dot(&y, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if dot(&y, &y) - low <= tol || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);
        loop {
            let alpha = affine_minimizer(points, &active);
            if alpha.iter().all(|&a| a > weight_floor) {
                weights = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= weight_floor && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let before = active.len();
            let mut keep_active = Vec::with_capacity(before);
            let mut keep_weights = Vec::with_capacity(before);
            for (&i, &w) in active.iter().zip(&weights) {
                if w > weight_floor {
                    keep_active.push(i);
                    keep_weights.push(w);
                }
            }
            if keep_active.len() == before {
                // numerical stall: drop the smallest weight
                let (m, _) = weights
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("non-empty");
                keep_active.remove(m);
                keep_weights.remove(m);
            }
            if keep_active.is_empty() {
                keep_active.push(j);
                keep_weights.push(1.0);
            }
            let total: f64 = keep_weights.iter().sum();
            keep_weights.iter_mut().for_each(|w| *w /= total);
            active = keep_active;
            weights = keep_weights;
            if active.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
        y = combine(points, &active, &weights);
    }
    (y, active, weights)
}

fn combine(points: &[Vec<f64>], active: &[usize], weights: &[f64]) -> Vec<f64> {
    let d = points[0].len();
    let mut y = vec![0.0; d];
    for (&i, &w) in active.iter().zip(weights) {
        y.iter_mut().zip(&points[i]).for_each(|(a, b)| *a += w * b);
    }
    y
}

/// Weights (summing to one) of the minimum-norm point of the affine hull of
/// the active points.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let n = active.len();
    if n == 1 {
        return vec![1.0];
    }
    let d = points[0].len();
    let p0 = &points[active[0]];
    let b = DMatrix::from_fn(d, n - 1, |r, c| points[active[c + 1]][r] - p0[r]);
    let rhs = DVector::from_iterator(d, p0.iter().map(|x| -x));
    let svd = b.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let beta = svd
        .solve(&rhs, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(n - 1));
    let mut out = Vec::with_capacity(n);
    out.push(1.0 - beta.sum());
    out.extend(beta.iter());
    out
}

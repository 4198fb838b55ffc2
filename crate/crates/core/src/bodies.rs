//! Convex bodies as immutable algebraic expressions over a few primitives.
//!
//! Every body exposes its support function `h_K(u) = sup_{x∈K} <x, u>`,
//! evaluated structurally: Minkowski sums add supports, hulls of unions take
//! the maximum, and so on. Nothing is ever converted to a common
//! representation.

use std::cmp::Ordering;

use thiserror::Error;

/// Upper limit on explicitly enumerated vertex candidates.
pub const MAX_ENUMERATED_VERTICES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BodyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bodies must have dimension at least 1")]
    ZeroDimension,
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("scale factor must be non-negative, got {0}")]
    NegativeScale(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("ellipsoid shape must have one row per coordinate, all of equal nonzero length")]
    RaggedShape,
    #[error("cannot embed a {inner}-dimensional body into {target} dimensions")]
    InvalidEmbed { inner: usize, target: usize },
    #[error(
        "coordinate hull index range {first}..={last} invalid for ambient dimension {ambient}"
    )]
    InvalidCoordRange {
        first: usize,
        last: usize,
        ambient: usize,
    },
    #[error("cannot keep {keep} of {dim} coordinates")]
    InvalidKeepDims { keep: usize, dim: usize },
    #[error("operation not supported for this body: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, BodyError>;

/// `clconv{a_n e_n : first <= n <= last}` in `R^ambient` with
/// `a_n = (ln(n+1))^{-1/2}` and 1-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordHull {
    first: usize,
    last: usize,
    ambient: usize,
    weights: Vec<f64>,
}

/// `a_n = (ln(n+1))^{-1/2}` for 1-based `n`.
#[inline]
pub fn coord_weight(n: usize) -> f64 {
    1.0 / ((n as f64 + 1.0).ln()).sqrt()
}

impl CoordHull {
    pub fn new(first: usize, last: usize, ambient: usize) -> Result<Self> {
        if first == 0 || first > last || last > ambient {
            return Err(BodyError::InvalidCoordRange {
                first,
                last,
                ambient,
            });
        }
        Ok(Self {
            first,
            last,
            ambient,
            weights: (first..=last).map(coord_weight).collect(),
        })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// The weights `a_first, ..., a_last`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn support(&self, u: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&u[self.first - 1..self.last])
            .map(|(a, z)| a * z)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (self.first..=self.last).zip(&self.weights).map(|(n, &a)| {
            let mut p = vec![0.0; self.ambient];
            p[n - 1] = a;
            p
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Point(Vec<f64>),
    Polytope(Vec<Vec<f64>>),
    Segment(Vec<f64>, Vec<f64>),
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `center + A·B` where `A` has one row per ambient coordinate.
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    /// `base ⊕ Σ [0, g_i]`.
    Zonotope {
        base: Vec<f64>,
        generators: Vec<Vec<f64>>,
    },
    MinkowskiSum(Box<Body>, Box<Body>),
    /// `clconv(K ∪ L)`.
    HullUnion(Box<Body>, Box<Body>),
    Scale(f64, Box<Body>),
    Translate(Vec<f64>, Box<Body>),
    /// Pads the inner body with trailing zero coordinates.
    Embed(Box<Body>, usize),
    CoordHull(CoordHull),
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn check_vector(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(BodyError::ZeroDimension);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(BodyError::NonFinite);
    }
    Ok(())
}

fn check_same_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(BodyError::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    check_vector(v)
}

fn tie_tolerance(best: f64) -> f64 {
    1e-12 * (1.0 + best.abs())
}

/// Index of the maximal dot product; near-ties go to the lexicographically
/// smallest point.
fn argmax_lex<'a, I>(points: I, u: &[f64]) -> Option<&'a [f64]>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let best = points
        .clone()
        .map(|p| dot(p, u))
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = tie_tolerance(best);
    points
        .filter(|p| dot(p, u) >= best - tol)
        .min_by(|a, b| lex_cmp(a, b))
}

impl Body {
    pub fn point(coords: Vec<f64>) -> Result<Self> {
        check_vector(&coords)?;
        Ok(Body::Point(coords))
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let first = vertices.first().ok_or(BodyError::EmptyPolytope)?;
        let d = first.len();
        for v in &vertices {
            check_same_dim(d, v)?;
        }
        Ok(Body::Polytope(vertices))
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_vector(&a)?;
        check_same_dim(a.len(), &b)?;
        Ok(Body::Segment(a, b))
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_vector(&center)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(BodyError::NegativeRadius(radius));
        }
        Ok(Body::Ball { center, radius })
    }

    pub fn ellipsoid(center: Vec<f64>, shape: Vec<Vec<f64>>) -> Result<Self> {
        check_vector(&center)?;
        if shape.len() != center.len() {
            return Err(BodyError::RaggedShape);
        }
        let k = shape[0].len();
        if k == 0 || shape.iter().any(|r| r.len() != k) {
            return Err(BodyError::RaggedShape);
        }
        if shape.iter().flatten().any(|x| !x.is_finite()) {
            return Err(BodyError::NonFinite);
        }
        Ok(Body::Ellipsoid { center, shape })
    }

    pub fn zonotope(base: Vec<f64>, generators: Vec<Vec<f64>>) -> Result<Self> {
        check_vector(&base)?;
        for g in &generators {
            check_same_dim(base.len(), g)?;
        }
        Ok(Body::Zonotope { base, generators })
    }

    pub fn minkowski_sum(left: Body, right: Body) -> Result<Self> {
        same_dims(&left, &right)?;
        Ok(Body::MinkowskiSum(Box::new(left), Box::new(right)))
    }

    pub fn hull_union(left: Body, right: Body) -> Result<Self> {
        same_dims(&left, &right)?;
        Ok(Body::HullUnion(Box::new(left), Box::new(right)))
    }

    pub fn scale(factor: f64, inner: Body) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(BodyError::NegativeScale(factor));
        }
        Ok(Body::Scale(factor, Box::new(inner)))
    }

    pub fn translate(offset: Vec<f64>, inner: Body) -> Result<Self> {
        check_same_dim(inner.dim(), &offset)?;
        Ok(Body::Translate(offset, Box::new(inner)))
    }

    pub fn embed(inner: Body, target_dim: usize) -> Result<Self> {
        let d = inner.dim();
        if target_dim < d {
            return Err(BodyError::InvalidEmbed {
                inner: d,
                target: target_dim,
            });
        }
        Ok(Body::Embed(Box::new(inner), target_dim))
    }

    pub fn coord_hull(first: usize, last: usize, ambient: usize) -> Result<Self> {
        Ok(Body::CoordHull(CoordHull::new(first, last, ambient)?))
    }

    /// Re-checks every invariant of a body that may have been assembled
    /// directly from the enum variants.
    pub fn validate(&self) -> Result<()> {
        match self {
            Body::Point(p) => check_vector(p),
            Body::Polytope(vs) => Body::polytope(vs.clone()).map(|_| ()),
            Body::Segment(a, b) => {
                check_vector(a)?;
                check_same_dim(a.len(), b)
            }
            Body::Ball { center, radius } => Body::ball(center.clone(), *radius).map(|_| ()),
            Body::Ellipsoid { center, shape } => {
                Body::ellipsoid(center.clone(), shape.clone()).map(|_| ())
            }
            Body::Zonotope { base, generators } => {
                check_vector(base)?;
                generators
                    .iter()
                    .try_for_each(|g| check_same_dim(base.len(), g))
            }
            Body::MinkowskiSum(l, r) | Body::HullUnion(l, r) => {
                l.validate()?;
                r.validate()?;
                same_dims(l, r)
            }
            Body::Scale(f, inner) => {
                if !(*f >= 0.0 && f.is_finite()) {
                    return Err(BodyError::NegativeScale(*f));
                }
                inner.validate()
            }
            Body::Translate(t, inner) => {
                inner.validate()?;
                check_same_dim(inner.dim(), t)
            }
            Body::Embed(inner, target) => {
                inner.validate()?;
                if *target < inner.dim() {
                    return Err(BodyError::InvalidEmbed {
                        inner: inner.dim(),
                        target: *target,
                    });
                }
                Ok(())
            }
            Body::CoordHull(c) => {
                let fresh = CoordHull::new(c.first, c.last, c.ambient)?;
                if fresh != *c {
                    return Err(BodyError::NonFinite);
                }
                Ok(())
            }
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Body::Point(p) => p.len(),
            Body::Polytope(vs) => vs.first().map_or(0, Vec::len),
            Body::Segment(a, _) => a.len(),
            Body::Ball { center, .. } | Body::Ellipsoid { center, .. } => center.len(),
            Body::Zonotope { base, .. } => base.len(),
            Body::MinkowskiSum(l, _) | Body::HullUnion(l, _) => l.dim(),
            Body::Scale(_, inner) => inner.dim(),
            Body::Translate(t, _) => t.len(),
            Body::Embed(_, target) => *target,
            Body::CoordHull(c) => c.ambient,
        }
    }

    fn check_direction(&self, u: &[f64]) -> Result<()> {
        let d = self.dim();
        if u.len() != d {
            return Err(BodyError::DimensionMismatch {
                expected: d,
                found: u.len(),
            });
        }
        Ok(())
    }

    /// Support function `h(u)` for any (not necessarily unit) direction.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.check_direction(u)?;
        Ok(self.support_unchecked(u))
    }

    /// Support function without the dimension check; `u` must have length
    /// `self.dim()`.
    pub fn support_unchecked(&self, u: &[f64]) -> f64 {
        match self {
            Body::Point(p) => dot(p, u),
            Body::Polytope(vs) => vs
                .iter()
                .map(|v| dot(v, u))
                .fold(f64::NEG_INFINITY, f64::max),
            Body::Segment(a, b) => dot(a, u).max(dot(b, u)),
            Body::Ball { center, radius } => dot(center, u) + radius * norm(u),
            Body::Ellipsoid { center, shape } => dot(center, u) + transpose_apply_norm(shape, u),
            Body::Zonotope { base, generators } => {
                dot(base, u) + generators.iter().map(|g| dot(g, u).max(0.0)).sum::<f64>()
            }
            Body::MinkowskiSum(l, r) => l.support_unchecked(u) + r.support_unchecked(u),
            Body::HullUnion(l, r) => l.support_unchecked(u).max(r.support_unchecked(u)),
            Body::Scale(f, inner) => f * inner.support_unchecked(u),
            Body::Translate(t, inner) => dot(t, u) + inner.support_unchecked(u),
            Body::Embed(inner, _) => inner.support_unchecked(&u[..inner.dim()]),
            Body::CoordHull(c) => c.support(u),
        }
    }

    /// A maximizer of `<x, u>` over the body. Near-ties between candidate
    /// vertices (or generator sign choices) resolve to the lexicographically
    /// smallest point; smooth bodies return their unique boundary maximizer,
    /// or the center when `u = 0`.
    pub fn support_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_direction(u)?;
        Ok(self.support_point_unchecked(u))
    }

    fn support_point_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Body::Point(p) => p.clone(),
            Body::Polytope(vs) => argmax_lex(vs.iter().map(Vec::as_slice), u)
                .expect("non-empty polytope")
                .to_vec(),
            Body::Segment(a, b) => argmax_lex([a.as_slice(), b.as_slice()].into_iter(), u)
                .expect("two endpoints")
                .to_vec(),
            Body::Ball { center, radius } => {
                let n = norm(u);
                if n == 0.0 {
                    center.clone()
                } else {
                    center
                        .iter()
                        .zip(u)
                        .map(|(c, ui)| c + radius * ui / n)
                        .collect()
                }
            }
            Body::Ellipsoid { center, shape } => {
                let k = shape[0].len();
                let w: Vec<f64> = (0..k)
                    .map(|j| shape.iter().zip(u).map(|(row, ui)| row[j] * ui).sum())
                    .collect();
                let n = norm(&w);
                if n == 0.0 {
                    center.clone()
                } else {
                    center
                        .iter()
                        .zip(shape)
                        .map(|(c, row)| c + dot(row, &w) / n)
                        .collect()
                }
            }
            Body::Zonotope { base, generators } => {
                let mut x = base.clone();
                for g in generators {
                    let s = dot(g, u);
                    let tol = tie_tolerance(0.0) * (1.0 + norm(g) * norm(u));
                    let take = if s.abs() <= tol {
                        lex_cmp(g, &vec![0.0; g.len()]) == Ordering::Less
                    } else {
                        s > 0.0
                    };
                    if take {
                        x.iter_mut().zip(g).for_each(|(xi, gi)| *xi += gi);
                    }
                }
                x
            }
            Body::MinkowskiSum(l, r) => {
                let a = l.support_point_unchecked(u);
                let b = r.support_point_unchecked(u);
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            }
            Body::HullUnion(l, r) => {
                let a = l.support_point_unchecked(u);
                let b = r.support_point_unchecked(u);
                let (ha, hb) = (dot(&a, u), dot(&b, u));
                let tol = tie_tolerance(ha.max(hb));
                if (ha - hb).abs() <= tol {
                    if lex_cmp(&a, &b) != Ordering::Greater {
                        a
                    } else {
                        b
                    }
                } else if ha > hb {
                    a
                } else {
                    b
                }
            }
            Body::Scale(f, inner) => inner
                .support_point_unchecked(u)
                .into_iter()
                .map(|x| f * x)
                .collect(),
            Body::Translate(t, inner) => inner
                .support_point_unchecked(u)
                .into_iter()
                .zip(t)
                .map(|(x, ti)| x + ti)
                .collect(),
            Body::Embed(inner, target) => {
                let mut x = inner.support_point_unchecked(&u[..inner.dim()]);
                x.resize(*target, 0.0);
                x
            }
            Body::CoordHull(c) => {
                // Lexicographic order on {a_n e_n} prefers larger n.
                let best = c.support(u);
                let tol = tie_tolerance(best);
                let n = (c.first..=c.last)
                    .rev()
                    .find(|&n| c.weights[n - c.first] * u[n - 1] >= best - tol)
                    .expect("non-empty range");
                let mut x = vec![0.0; c.ambient];
                x[n - 1] = c.weights[n - c.first];
                x
            }
        }
    }

    /// The image under the coordinate projection onto the first `keep`
    /// coordinates, built structurally.
    pub fn project(&self, keep: usize) -> Result<Body> {
        let d = self.dim();
        if keep == 0 || keep > d {
            return Err(BodyError::InvalidKeepDims { keep, dim: d });
        }
        let cut = |v: &Vec<f64>| v[..keep].to_vec();
        Ok(match self {
            Body::Point(p) => Body::Point(cut(p)),
            Body::Polytope(vs) => Body::Polytope(vs.iter().map(cut).collect()),
            Body::Segment(a, b) => Body::Segment(cut(a), cut(b)),
            Body::Ball { center, radius } => Body::Ball {
                center: cut(center),
                radius: *radius,
            },
            Body::Ellipsoid { center, shape } => Body::Ellipsoid {
                center: cut(center),
                shape: shape[..keep].to_vec(),
            },
            Body::Zonotope { base, generators } => Body::Zonotope {
                base: cut(base),
                generators: generators.iter().map(cut).collect(),
            },
            Body::MinkowskiSum(l, r) => {
                Body::MinkowskiSum(Box::new(l.project(keep)?), Box::new(r.project(keep)?))
            }
            Body::HullUnion(l, r) => {
                Body::HullUnion(Box::new(l.project(keep)?), Box::new(r.project(keep)?))
            }
            Body::Scale(f, inner) => Body::Scale(*f, Box::new(inner.project(keep)?)),
            Body::Translate(t, inner) => Body::Translate(cut(t), Box::new(inner.project(keep)?)),
            Body::Embed(inner, _) => {
                let k = inner.dim();
                match keep.cmp(&k) {
                    Ordering::Equal => (**inner).clone(),
                    Ordering::Less => inner.project(keep)?,
                    Ordering::Greater => Body::Embed(inner.clone(), keep),
                }
            }
            Body::CoordHull(c) => {
                if c.last <= keep {
                    Body::CoordHull(CoordHull::new(c.first, c.last, keep)?)
                } else if c.first > keep {
                    // every listed point projects to the origin
                    Body::Point(vec![0.0; keep])
                } else {
                    Body::HullUnion(
                        Box::new(Body::CoordHull(CoordHull::new(c.first, keep, keep)?)),
                        Box::new(Body::Point(vec![0.0; keep])),
                    )
                }
            }
        })
    }

    /// A cheap structural upper bound on `max_{x∈K} ‖x‖`.
    pub fn outer_radius(&self) -> f64 {
        match self {
            Body::Point(p) => norm(p),
            Body::Polytope(vs) => vs.iter().map(|v| norm(v)).fold(0.0, f64::max),
            Body::Segment(a, b) => norm(a).max(norm(b)),
            Body::Ball { center, radius } => norm(center) + radius,
            Body::Ellipsoid { center, shape } => {
                norm(center) + shape.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
            }
            Body::Zonotope { base, generators } => {
                norm(base) + generators.iter().map(|g| norm(g)).sum::<f64>()
            }
            Body::MinkowskiSum(l, r) => l.outer_radius() + r.outer_radius(),
            Body::HullUnion(l, r) => l.outer_radius().max(r.outer_radius()),
            Body::Scale(f, inner) => f * inner.outer_radius(),
            Body::Translate(t, inner) => norm(t) + inner.outer_radius(),
            Body::Embed(inner, _) => inner.outer_radius(),
            Body::CoordHull(c) => c.weights.iter().copied().fold(0.0, f64::max),
        }
    }

    /// A finite point set whose convex hull is the body, when one exists and
    /// has at most [`MAX_ENUMERATED_VERTICES`] elements. Not all returned
    /// points need be extreme.
    pub fn vertex_candidates(&self) -> Option<Vec<Vec<f64>>> {
        let out = match self {
            Body::Point(p) => vec![p.clone()],
            Body::Polytope(vs) => vs.clone(),
            Body::Segment(a, b) => vec![a.clone(), b.clone()],
            Body::Ball { center, radius } if *radius == 0.0 => vec![center.clone()],
            Body::Ball { .. } | Body::Ellipsoid { .. } => return None,
            Body::Zonotope { base, generators } => {
                if generators.len() > 20 {
                    return None;
                }
                let mut pts = vec![base.clone()];
                for g in generators {
                    let shifted: Vec<Vec<f64>> = pts
                        .iter()
                        .map(|p| p.iter().zip(g).map(|(a, b)| a + b).collect())
                        .collect();
                    pts.extend(shifted);
                }
                pts
            }
            Body::MinkowskiSum(l, r) => {
                let a = l.vertex_candidates()?;
                let b = r.vertex_candidates()?;
                if a.len().checked_mul(b.len())? > MAX_ENUMERATED_VERTICES {
                    return None;
                }
                a.iter()
                    .flat_map(|x| {
                        b.iter()
                            .map(move |y| x.iter().zip(y).map(|(p, q)| p + q).collect())
                    })
                    .collect()
            }
            Body::HullUnion(l, r) => {
                let mut a = l.vertex_candidates()?;
                a.extend(r.vertex_candidates()?);
                a
            }
            Body::Scale(f, inner) => inner
                .vertex_candidates()?
                .into_iter()
                .map(|v| v.into_iter().map(|x| f * x).collect())
                .collect(),
            Body::Translate(t, inner) => inner
                .vertex_candidates()?
                .into_iter()
                .map(|v| v.into_iter().zip(t).map(|(x, ti)| x + ti).collect())
                .collect(),
            Body::Embed(inner, target) => inner
                .vertex_candidates()?
                .into_iter()
                .map(|mut v| {
                    v.resize(*target, 0.0);
                    v
                })
                .collect(),
            Body::CoordHull(c) => c.points().collect(),
        };
        (out.len() <= MAX_ENUMERATED_VERTICES).then_some(out)
    }

    /// The same body expressed with explicit coordinates in `target`
    /// dimensions (trailing zeros), with no `Embed` nodes left.
    pub fn pad(&self, target: usize) -> Result<Body> {
        let d = self.dim();
        if target < d {
            return Err(BodyError::InvalidEmbed { inner: d, target });
        }
        let grow = |v: &Vec<f64>| {
            let mut w = v.clone();
            w.resize(target, 0.0);
            w
        };
        Ok(match self {
            Body::Point(p) => Body::Point(grow(p)),
            Body::Polytope(vs) => Body::Polytope(vs.iter().map(grow).collect()),
            Body::Segment(a, b) => Body::Segment(grow(a), grow(b)),
            Body::Ball { center, radius } if target == d => Body::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Body::Ball { center, radius } => {
                // a lower-dimensional disk, written as a flat ellipsoid
                let shape = (0..target)
                    .map(|i| (0..d).map(|j| if i == j { *radius } else { 0.0 }).collect())
                    .collect();
                Body::Ellipsoid {
                    center: grow(center),
                    shape,
                }
            }
            Body::Ellipsoid { center, shape } => {
                let k = shape[0].len();
                let mut rows = shape.clone();
                rows.resize(target, vec![0.0; k]);
                Body::Ellipsoid {
                    center: grow(center),
                    shape: rows,
                }
            }
            Body::Zonotope { base, generators } => Body::Zonotope {
                base: grow(base),
                generators: generators.iter().map(grow).collect(),
            },
            Body::MinkowskiSum(l, r) => {
                Body::MinkowskiSum(Box::new(l.pad(target)?), Box::new(r.pad(target)?))
            }
            Body::HullUnion(l, r) => {
                Body::HullUnion(Box::new(l.pad(target)?), Box::new(r.pad(target)?))
            }
            Body::Scale(f, inner) => Body::Scale(*f, Box::new(inner.pad(target)?)),
            Body::Translate(t, inner) => Body::Translate(grow(t), Box::new(inner.pad(target)?)),
            Body::Embed(inner, _) => inner.pad(target)?,
            Body::CoordHull(c) => Body::CoordHull(CoordHull::new(c.first, c.last, target)?),
        })
    }

    /// Image under an orthogonal matrix `q` (rows of length `dim`).
    pub fn rotate(&self, q: &[Vec<f64>]) -> Result<Body> {
        let d = self.dim();
        if q.len() != d || q.iter().any(|r| r.len() != d) {
            return Err(BodyError::DimensionMismatch {
                expected: d,
                found: q.len(),
            });
        }
        let apply = |v: &Vec<f64>| -> Vec<f64> { q.iter().map(|row| dot(row, v)).collect() };
        Ok(match self {
            Body::Point(p) => Body::Point(apply(p)),
            Body::Polytope(vs) => Body::Polytope(vs.iter().map(apply).collect()),
            Body::Segment(a, b) => Body::Segment(apply(a), apply(b)),
            Body::Ball { center, radius } => Body::Ball {
                center: apply(center),
                radius: *radius,
            },
            Body::Ellipsoid { center, shape } => {
                let k = shape[0].len();
                let rows = q
                    .iter()
                    .map(|qrow| {
                        (0..k)
                            .map(|j| qrow.iter().zip(shape).map(|(a, s)| a * s[j]).sum())
                            .collect()
                    })
                    .collect();
                Body::Ellipsoid {
                    center: apply(center),
                    shape: rows,
                }
            }
            Body::Zonotope { base, generators } => Body::Zonotope {
                base: apply(base),
                generators: generators.iter().map(apply).collect(),
            },
            Body::MinkowskiSum(l, r) => {
                Body::MinkowskiSum(Box::new(l.rotate(q)?), Box::new(r.rotate(q)?))
            }
            Body::HullUnion(l, r) => {
                Body::HullUnion(Box::new(l.rotate(q)?), Box::new(r.rotate(q)?))
            }
            Body::Scale(f, inner) => Body::Scale(*f, Box::new(inner.rotate(q)?)),
            Body::Translate(t, inner) => Body::Translate(apply(t), Box::new(inner.rotate(q)?)),
            Body::Embed(..) => self.pad(d)?.rotate(q)?,
            Body::CoordHull(c) => Body::Polytope(c.points().map(|p| apply(&p)).collect()),
        })
    }

    /// A short tag naming the outermost variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Point(_) => "point",
            Body::Polytope(_) => "polytope",
            Body::Segment(..) => "segment",
            Body::Ball { .. } => "ball",
            Body::Ellipsoid { .. } => "ellipsoid",
            Body::Zonotope { .. } => "zonotope",
            Body::MinkowskiSum(..) => "minkowski",
            Body::HullUnion(..) => "hull_union",
            Body::Scale(..) => "scale",
            Body::Translate(..) => "translate",
            Body::Embed(..) => "embed",
            Body::CoordHull(_) => "coord_hull",
        }
    }
}

fn same_dims(a: &Body, b: &Body) -> Result<()> {
    let (da, db) = (a.dim(), b.dim());
    if da != db {
        return Err(BodyError::DimensionMismatch {
            expected: da,
            found: db,
        });
    }
    Ok(())
}

/// `‖Aᵀu‖` for a row-major `A`.
fn transpose_apply_norm(shape: &[Vec<f64>], u: &[f64]) -> f64 {
    let k = shape[0].len();
    (0..k)
        .map(|j| {
            let s: f64 = shape.iter().zip(u).map(|(row, ui)| row[j] * ui).sum();
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

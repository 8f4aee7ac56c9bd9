//! Geodesic spaces: a metric `d`, a convex-combination operator
//! `W(x, y, λ) = (1-λ)x + λy`, and optionally a monotone modulus of uniform
//! convexity `η`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

use crate::error::{domain, Error, Result};

mod axioms;
mod euclidean;
mod lp;
mod modulus;
mod spider;

pub use axioms::{check_ucw_inequality, check_w_axioms};
pub use euclidean::Euclidean;
pub use lp::Lp;
pub use modulus::UcModulus;
pub use spider::SpiderTree;

/// A point of one of the built-in spaces.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(untagged)
)]
pub enum Point {
    /// Coordinates in a finite-dimensional normed space.
    Vector(Vec<f64>),
    /// A point of a spider tree (rays glued at a common center).
    Spider(SpiderPoint),
}

/// A point at distance `r` from the center along ray `ray`.
///
/// The center is canonically `ray = 0, r = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpiderPoint {
    pub ray: usize,
    pub r: f64,
}

impl SpiderPoint {
    pub fn new(ray: usize, r: f64) -> Self {
        if r == 0.0 {
            SpiderPoint { ray: 0, r: 0.0 }
        } else {
            SpiderPoint { ray, r }
        }
    }

    pub fn center() -> Self {
        SpiderPoint { ray: 0, r: 0.0 }
    }
}

impl Point {
    pub fn vector(coords: impl Into<Vec<f64>>) -> Self {
        Point::Vector(coords.into())
    }

    pub fn spider(ray: usize, r: f64) -> Self {
        Point::Spider(SpiderPoint::new(ray, r))
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Spider(_) => None,
        }
    }

    pub fn as_spider(&self) -> Option<SpiderPoint> {
        match self {
            Point::Spider(p) => Some(*p),
            Point::Vector(_) => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Vector(v) => {
                f.write_str("(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Point::Spider(p) => write!(f, "(ray {}, r={})", p.ray, p.r),
        }
    }
}

/// What kind of space a handle is, for compatibility checks between spaces,
/// maps and points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceKind {
    Euclidean { dim: usize },
    Spider { rays: usize },
    Lp { dim: usize, p: f64 },
    Other,
}

impl SpaceKind {
    /// Dimension of a vector space, `None` for trees.
    pub fn dim(&self) -> Option<usize> {
        match *self {
            SpaceKind::Euclidean { dim } | SpaceKind::Lp { dim, .. } => Some(dim),
            _ => None,
        }
    }
}

/// A W-space: metric plus convex-combination operator.
///
/// Implementations must be immutable; samplers draw all randomness from the
/// generator they are handed.
pub trait Space: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn kind(&self) -> SpaceKind;

    /// Rejects points of the wrong shape for this space.
    fn validate(&self, x: &Point) -> Result<()>;

    fn dist(&self, x: &Point, y: &Point) -> Result<f64>;

    /// `W(x, y, λ)`: the point at parameter `λ` on the geodesic from `x` to
    /// `y`, so that `d(x, W(x, y, λ)) = λ d(x, y)`.
    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point>;

    fn modulus(&self) -> Option<&UcModulus> {
        None
    }

    fn is_cat0(&self) -> bool {
        false
    }

    /// Distinguished base point (the origin or the center).
    fn origin(&self) -> Point;

    /// Draws a point from a bounded region of diameter at most 100.
    fn sample(&self, rng: &mut dyn RngCore) -> Point;
}

pub type SpaceHandle = Arc<dyn Space>;

pub fn dist(space: &dyn Space, x: &Point, y: &Point) -> Result<f64> {
    space.dist(x, y)
}

pub fn comb(space: &dyn Space, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
    space.comb(x, y, lambda)
}

/// Evaluates the space's modulus of uniform convexity `η(r, ε)`.
pub fn modulus_eval(space: &dyn Space, r: f64, eps: f64) -> Result<f64> {
    let modulus = space.modulus().ok_or_else(|| {
        Error::Unsupported(alloc::format!(
            "{} has no modulus of uniform convexity",
            space.name()
        ))
    })?;
    modulus.eval_checked(r, eps)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(domain!(
            "convex-combination parameter {lambda} outside [0, 1]"
        ))
    }
}

/// `(1-λ)a + λb` on scalars, exact at `λ ∈ {0, 1}` and when `a == b`.
#[inline]
pub(crate) fn lerp(a: f64, b: f64, lambda: f64) -> f64 {
    if lambda <= 0.5 {
        a + lambda * (b - a)
    } else {
        b + (1.0 - lambda) * (a - b)
    }
}

/// Uniform draw from `[0, 1)`.
pub(crate) fn unit(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Space wrapper that replaces (or adds) the modulus of uniform convexity.
///
/// Used to test the uniform-convexity checks against deliberately wrong
/// moduli.
#[derive(Debug)]
pub struct WithModulus {
    inner: SpaceHandle,
    modulus: UcModulus,
}

impl WithModulus {
    pub fn new(inner: SpaceHandle, modulus: UcModulus) -> Self {
        WithModulus { inner, modulus }
    }
}

impl Space for WithModulus {
    fn name(&self) -> String {
        alloc::format!(
            "{} with modulus {}",
            self.inner.name(),
            self.modulus.label()
        )
    }
    fn kind(&self) -> SpaceKind {
        self.inner.kind()
    }
    fn validate(&self, x: &Point) -> Result<()> {
        self.inner.validate(x)
    }
    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        self.inner.dist(x, y)
    }
    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        self.inner.comb(x, y, lambda)
    }
    fn modulus(&self) -> Option<&UcModulus> {
        Some(&self.modulus)
    }
    fn is_cat0(&self) -> bool {
        false
    }
    fn origin(&self) -> Point {
        self.inner.origin()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        self.inner.sample(rng)
    }
}

/// A space whose convex combination ignores its second argument.
///
/// Violates (W7); kept as a negative control for the axiom checks.
#[derive(Debug)]
pub struct CollapsedComb {
    inner: SpaceHandle,
}

impl CollapsedComb {
    pub fn new(inner: SpaceHandle) -> Self {
        CollapsedComb { inner }
    }
}

impl Space for CollapsedComb {
    fn name(&self) -> String {
        alloc::format!("{} with collapsed comb", self.inner.name())
    }
    fn kind(&self) -> SpaceKind {
        SpaceKind::Other
    }
    fn validate(&self, x: &Point) -> Result<()> {
        self.inner.validate(x)
    }
    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        self.inner.dist(x, y)
    }
    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        check_lambda(lambda)?;
        self.inner.validate(y)?;
        self.inner.validate(x)?;
        Ok(x.clone())
    }
    fn origin(&self) -> Point {
        self.inner.origin()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        self.inner.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lerp_is_exact_at_endpoints() {
        for &(a, b) in &[(0.1, 0.7), (-3.3, 1e-7), (5.0, 5.0)] {
            assert_eq!(lerp(a, b, 0.0), a);
            assert_eq!(lerp(a, b, 1.0), b);
            assert_eq!(lerp(a, a, 0.37), a);
        }
    }

    #[test]
    fn spider_center_is_canonical() {
        assert_eq!(SpiderPoint::new(3, 0.0), SpiderPoint::center());
    }

    #[test]
    fn modulus_eval_needs_a_modulus() {
        let broken = CollapsedComb::new(Arc::new(Euclidean::new(2)));
        assert!(matches!(
            modulus_eval(&broken, 1.0, 1.0),
            Err(Error::Unsupported(_))
        ));
        let e = Euclidean::new(2);
        assert_eq!(modulus_eval(&e, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(modulus_eval(&e, 7.0, 1.0).unwrap(), 0.125);
        assert!(modulus_eval(&e, 0.0, 1.0).is_err());
        assert!(modulus_eval(&e, 1.0, 2.5).is_err());
    }
}

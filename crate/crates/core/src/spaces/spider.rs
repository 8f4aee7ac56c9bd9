use alloc::string::String;

use rand::RngCore;

use super::{check_lambda, lerp, unit, Point, Space, SpaceKind, SpiderPoint, UcModulus};
use crate::error::{domain, structural, Result};

/// `rays` copies of `[0, ∞)` glued at 0: the simplest non-linear R-tree.
///
/// Distance is `|r - s|` along one ray and `r + s` across rays. As an
/// R-tree it is CAT(0) with modulus `ε²/8`.
#[derive(Debug, Clone)]
pub struct SpiderTree {
    rays: usize,
    modulus: UcModulus,
}

impl SpiderTree {
    pub fn new(rays: usize) -> Result<Self> {
        if rays == 0 {
            return Err(domain!("a spider tree needs at least one ray"));
        }
        Ok(SpiderTree {
            rays,
            modulus: UcModulus::Cat0,
        })
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    fn point(&self, x: &Point) -> Result<SpiderPoint> {
        match x {
            Point::Spider(p) if p.ray < self.rays && p.r >= 0.0 && p.r.is_finite() => {
                Ok(SpiderPoint::new(p.ray, p.r))
            }
            Point::Spider(p) => Err(structural!(
                "spider point (ray {}, r={}) invalid for a tree with {} rays",
                p.ray,
                p.r,
                self.rays
            )),
            Point::Vector(_) => Err(structural!("spider tree cannot hold vector point {x}")),
        }
    }
}

impl Space for SpiderTree {
    fn name(&self) -> String {
        alloc::format!("SpiderTree({})", self.rays)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Spider { rays: self.rays }
    }

    fn validate(&self, x: &Point) -> Result<()> {
        self.point(x).map(|_| ())
    }

    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        let a = self.point(x)?;
        let b = self.point(y)?;
        if a.ray == b.ray || a.r == 0.0 || b.r == 0.0 {
            Ok(libm::fabs(a.r - b.r))
        } else {
            Ok(a.r + b.r)
        }
    }

    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        check_lambda(lambda)?;
        let a = self.point(x)?;
        let b = self.point(y)?;
        if a.r == 0.0 || b.r == 0.0 || a.ray == b.ray {
            let ray = if a.r == 0.0 { b.ray } else { a.ray };
            return Ok(Point::spider(ray, lerp(a.r, b.r, lambda)));
        }
        // The geodesic runs down ray a.ray to the center, then up ray b.ray.
        // Measure from the nearer endpoint so λ ∈ {0, 1} is exact.
        let total = a.r + b.r;
        let (near, far, t) = if lambda <= 0.5 {
            (a, b, lambda * total)
        } else {
            (b, a, (1.0 - lambda) * total)
        };
        if t <= near.r {
            Ok(Point::spider(near.ray, near.r - t))
        } else {
            Ok(Point::spider(far.ray, t - near.r))
        }
    }

    fn modulus(&self) -> Option<&UcModulus> {
        Some(&self.modulus)
    }

    fn is_cat0(&self) -> bool {
        true
    }

    fn origin(&self) -> Point {
        Point::Spider(SpiderPoint::center())
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        if unit(rng) < 0.05 {
            return self.origin();
        }
        let ray = (rng.next_u64() % self.rays as u64) as usize;
        Point::spider(ray, 50.0 * unit(rng))
    }
}

use alloc::string::String;
use alloc::vec::Vec;

use rand::RngCore;

use super::{check_lambda, lerp, unit, Point, Space, SpaceKind, UcModulus};
use crate::error::{structural, Result};

/// `ℝ^dim` with the Euclidean norm. CAT(0), modulus `ε²/8`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
    modulus: UcModulus,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Euclidean {
            dim,
            modulus: UcModulus::Cat0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub(super) fn coords<'a>(x: &'a Point, dim: usize, space: &str) -> Result<&'a [f64]> {
    match x {
        Point::Vector(v) if v.len() == dim => Ok(v),
        Point::Vector(v) => Err(structural!(
            "{space} expects {dim} coordinates, got {}",
            v.len()
        )),
        Point::Spider(_) => Err(structural!("{space} cannot hold spider-tree point {x}")),
    }
}

pub(super) fn lerp_vec(a: &[f64], b: &[f64], lambda: f64) -> Point {
    Point::Vector(a.iter().zip(b).map(|(&p, &q)| lerp(p, q, lambda)).collect())
}

/// Uniform point of the cube `[-h, h]^dim` with `h = 50/√dim`, whose
/// diameter is exactly 100.
pub(super) fn sample_cube(dim: usize, rng: &mut dyn RngCore) -> Point {
    let half = 50.0 / libm::sqrt(dim as f64);
    Point::Vector(
        (0..dim)
            .map(|_| (2.0 * unit(rng) - 1.0) * half)
            .collect::<Vec<_>>(),
    )
}

impl Space for Euclidean {
    fn name(&self) -> String {
        alloc::format!("Euclidean({})", self.dim)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Euclidean { dim: self.dim }
    }

    fn validate(&self, x: &Point) -> Result<()> {
        coords(x, self.dim, "Euclidean space").map(|_| ())
    }

    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        let a = coords(x, self.dim, "Euclidean space")?;
        let b = coords(y, self.dim, "Euclidean space")?;
        if self.dim == 1 {
            return Ok(libm::fabs(a[0] - b[0]));
        }
        let sq: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
        Ok(libm::sqrt(sq))
    }

    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        check_lambda(lambda)?;
        let a = coords(x, self.dim, "Euclidean space")?;
        let b = coords(y, self.dim, "Euclidean space")?;
        Ok(lerp_vec(a, b, lambda))
    }

    fn modulus(&self) -> Option<&UcModulus> {
        Some(&self.modulus)
    }

    fn is_cat0(&self) -> bool {
        true
    }

    fn origin(&self) -> Point {
        Point::Vector(alloc::vec![0.0; self.dim])
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        sample_cube(self.dim, rng)
    }
}

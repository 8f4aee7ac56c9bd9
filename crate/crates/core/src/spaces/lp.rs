use alloc::string::String;

use rand::RngCore;

use super::euclidean::{coords, lerp_vec, sample_cube};
use super::{check_lambda, Point, Space, SpaceKind, UcModulus};
use crate::error::{domain, Result};

/// `ℝ^dim` with the `ℓ_p` norm, `p ≥ 2`.
///
/// Carries the Clarkson-type modulus `ε^p / (p 2^p)`.
#[derive(Debug, Clone)]
pub struct Lp {
    dim: usize,
    p: f64,
    modulus: UcModulus,
}

impl Lp {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(domain!("dimension must be positive"));
        }
        if !(p >= 2.0) || !p.is_finite() {
            return Err(domain!(
                "l_p spaces are supported for finite p >= 2, got {p}"
            ));
        }
        Ok(Lp {
            dim,
            p,
            modulus: UcModulus::Power { p },
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Space for Lp {
    fn name(&self) -> String {
        alloc::format!("Lp(dim={}, p={})", self.dim, self.p)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Lp {
            dim: self.dim,
            p: self.p,
        }
    }

    fn validate(&self, x: &Point) -> Result<()> {
        coords(x, self.dim, "l_p space").map(|_| ())
    }

    fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        let a = coords(x, self.dim, "l_p space")?;
        let b = coords(y, self.dim, "l_p space")?;
        // Scale by the largest component so the p-th powers neither
        // overflow nor underflow.
        let top = a
            .iter()
            .zip(b)
            .map(|(p, q)| libm::fabs(p - q))
            .fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let s: f64 = a
            .iter()
            .zip(b)
            .map(|(p, q)| libm::pow(libm::fabs(p - q) / top, self.p))
            .sum();
        Ok(top * libm::pow(s, 1.0 / self.p))
    }

    fn comb(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        check_lambda(lambda)?;
        let a = coords(x, self.dim, "l_p space")?;
        let b = coords(y, self.dim, "l_p space")?;
        Ok(lerp_vec(a, b, lambda))
    }

    fn modulus(&self) -> Option<&UcModulus> {
        Some(&self.modulus)
    }

    fn is_cat0(&self) -> bool {
        self.p == 2.0
    }

    fn origin(&self) -> Point {
        Point::Vector(alloc::vec![0.0; self.dim])
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        // The ℓ_p diameter of the cube is at most its Euclidean one for p ≥ 2.
        sample_cube(self.dim, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l4_distance() {
        let s = Lp::new(2, 4.0).unwrap();
        let d = s
            .dist(&Point::vector([0.0, 0.0]), &Point::vector([1.0, 1.0]))
            .unwrap();
        assert!((d - libm::pow(2.0, 0.25)).abs() < 1e-15);
    }

    #[test]
    fn l2_reduces_to_hilbert_modulus() {
        let s = Lp::new(3, 2.0).unwrap();
        assert_eq!(s.modulus().unwrap().eval(1.0, 2.0), 0.5);
        assert!(s.is_cat0());
    }

    #[test]
    fn rejects_small_p() {
        assert!(Lp::new(2, 1.5).is_err());
        assert!(Lp::new(0, 3.0).is_err());
    }
}

//! Small iteration problems with a known common fixed point and `M_p ≤ 1`,
//! so that `K = 1`. All use `α_n = 2/(n+2)`, `β_n ≡ 1/2`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Result;
use crate::iterate::IterationProblem;
use crate::maps::{make_map, MapSpec};
use crate::schedules::canonical_linear_schedule;
use crate::spaces::{Euclidean, Lp, Point, SpaceHandle, SpiderTree};

const TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: String,
    pub problem: IterationProblem,
}

impl Benchmark {
    pub fn is_cat0(&self) -> bool {
        self.problem.space.is_cat0()
    }
}

fn problem(
    space: SpaceHandle,
    t: MapSpec,
    u: MapSpec,
    anchor: Point,
    start: Point,
    p: Point,
) -> Result<IterationProblem> {
    IterationProblem::new(
        space.clone(),
        make_map(&space, &t)?,
        make_map(&space, &u)?,
        anchor,
        start,
        p,
        canonical_linear_schedule(0.5)?,
        TOL,
    )
}

/// `ℝ`, `T x = -x`, `U = Id`, `u = x_0 = 1`, `p = 0`. The iterates are
/// `x = 1, 1, 1/3, 1/3, 1/5, ...`.
pub fn real_line() -> Result<IterationProblem> {
    problem(
        Arc::new(Euclidean::new(1)),
        MapSpec::Homothety {
            factor: -1.0,
            center: None,
        },
        MapSpec::Identity,
        Point::vector([1.0]),
        Point::vector([1.0]),
        Point::vector([0.0]),
    )
}

/// Two rotations of the plane about the origin.
pub fn plane_rotations() -> Result<IterationProblem> {
    problem(
        Arc::new(Euclidean::new(2)),
        MapSpec::Rotation2d {
            theta: PI / 2.0,
            center: None,
        },
        MapSpec::Rotation2d {
            theta: PI / 3.0,
            center: None,
        },
        Point::vector([1.0, 0.0]),
        Point::vector([0.0, 1.0]),
        Point::vector([0.0, 0.0]),
    )
}

/// Projection onto `B(0, 1/2)` alternated with a rotation by `2π/3`.
pub fn plane_projection() -> Result<IterationProblem> {
    problem(
        Arc::new(Euclidean::new(2)),
        MapSpec::ProjectionBall {
            center: None,
            radius: 0.5,
        },
        MapSpec::Rotation2d {
            theta: 2.0 * PI / 3.0,
            center: None,
        },
        Point::vector([1.0, 0.0]),
        Point::vector([-0.6, 0.8]),
        Point::vector([0.0, 0.0]),
    )
}

/// Three-ray spider: cyclic ray relabeling and halving towards the center.
pub fn spider3() -> Result<IterationProblem> {
    problem(
        Arc::new(SpiderTree::new(3)?),
        MapSpec::RayPermutation {
            perm: vec![1, 2, 0],
        },
        MapSpec::RadialScale {
            lambda: 0.5,
            center: None,
        },
        Point::spider(0, 1.0),
        Point::spider(1, 1.0),
        Point::spider(0, 0.0),
    )
}

/// Five-ray spider: a shrinking rotation of the rays and the projection
/// onto a small ball about the center.
pub fn spider5() -> Result<IterationProblem> {
    problem(
        Arc::new(SpiderTree::new(5)?),
        MapSpec::Compose {
            f: Box::new(MapSpec::RadialScale {
                lambda: 0.8,
                center: None,
            }),
            g: Box::new(MapSpec::RayPermutation {
                perm: vec![1, 2, 3, 4, 0],
            }),
        },
        MapSpec::ProjectionBall {
            center: None,
            radius: 0.3,
        },
        Point::spider(2, 1.0),
        Point::spider(4, 0.7),
        Point::spider(0, 0.0),
    )
}

/// `ℓ_4` in three dimensions; uniformly convex but not CAT(0).
pub fn lp4() -> Result<IterationProblem> {
    problem(
        Arc::new(Lp::new(3, 4.0)?),
        MapSpec::Homothety {
            factor: -1.0,
            center: None,
        },
        MapSpec::RadialScale {
            lambda: 0.5,
            center: None,
        },
        Point::vector([1.0, 0.0, 0.0]),
        Point::vector([0.0, 0.6, -0.6]),
        Point::vector([0.0, 0.0, 0.0]),
    )
}

/// Every benchmark, in a fixed order.
pub fn all() -> Result<Vec<Benchmark>> {
    type Builder = fn() -> Result<IterationProblem>;
    let named: [(&str, Builder); 6] = [
        ("real_line", real_line),
        ("plane_rotations", plane_rotations),
        ("plane_projection", plane_projection),
        ("spider3", spider3),
        ("spider5", spider5),
        ("lp4", lp4),
    ];
    named
        .iter()
        .map(|(name, f)| {
            Ok(Benchmark {
                name: (*name).into(),
                problem: f()?,
            })
        })
        .collect()
}

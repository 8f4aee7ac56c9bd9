//! Catalog of nonexpansive self-maps with declared fixed points.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, structural, Result};
use crate::report::{AxiomReport, Recorder};
use crate::spaces::{unit, Point, Space, SpaceHandle, SpaceKind};

/// Tolerance used when deciding whether a composed map keeps a fixed point.
const FIXED_POINT_TOL: f64 = 1e-9;

type EvalFn = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// Declarative description of a map, as read from configuration files.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum MapSpec {
    Identity,
    Constant {
        point: Point,
    },
    /// Rotation of the Euclidean plane by `theta` about `center` (default origin).
    Rotation2d {
        theta: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        center: Option<Point>,
    },
    /// `x ↦ (1-λ)c + λx`: contraction towards `center` by factor `λ ∈ [0, 1]`.
    RadialScale {
        lambda: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        center: Option<Point>,
    },
    /// Relabels the rays of a spider tree.
    RayPermutation {
        perm: Vec<usize>,
    },
    /// Metric projection onto the closed ball `B(center, radius)`; CAT(0) only.
    ProjectionBall {
        #[cfg_attr(feature = "serde", serde(default))]
        center: Option<Point>,
        radius: f64,
    },
    /// `x ↦ c + factor (x - c)` on a vector space. Nonexpansive iff
    /// `|factor| ≤ 1`; the constructor does not enforce it.
    Homothety {
        factor: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        center: Option<Point>,
    },
    /// `f ∘ g`.
    Compose {
        f: Box<MapSpec>,
        g: Box<MapSpec>,
    },
    /// `x ↦ (1-λ)x + λ f(x)`.
    Average {
        f: Box<MapSpec>,
        lambda: f64,
    },
}

/// A self-map of a space together with a declared fixed point.
#[derive(Clone)]
pub struct MapHandle {
    label: String,
    space: SpaceHandle,
    fixed_point: Option<Point>,
    eval: EvalFn,
}

impl fmt::Debug for MapHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapHandle")
            .field("label", &self.label)
            .field("space", &self.space.name())
            .field("fixed_point", &self.fixed_point)
            .finish()
    }
}

impl MapHandle {
    /// Wraps an arbitrary function. Nothing about it is checked here; use
    /// [`check_nonexpansive`] for that.
    pub fn from_fn(
        space: SpaceHandle,
        label: impl Into<String>,
        fixed_point: Option<Point>,
        f: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        MapHandle {
            label: label.into(),
            space,
            fixed_point,
            eval: Arc::new(f),
        }
    }

    pub fn identity(space: SpaceHandle) -> Self {
        let origin = space.origin();
        MapHandle::from_fn(space, "identity", Some(origin), |x| Ok(x.clone()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &SpaceHandle {
        &self.space
    }

    pub fn declared_fixed_point(&self) -> Option<&Point> {
        self.fixed_point.as_ref()
    }

    /// Applies the map without validating the argument.
    #[inline]
    pub fn eval(&self, x: &Point) -> Result<Point> {
        (self.eval)(x)
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.space.validate(x)?;
        (self.eval)(x)
    }
}

pub fn apply(map: &MapHandle, x: &Point) -> Result<Point> {
    map.apply(x)
}

fn center_or_origin(space: &dyn Space, center: &Option<Point>) -> Result<Point> {
    let c = center.clone().unwrap_or_else(|| space.origin());
    space.validate(&c)?;
    Ok(c)
}

fn require_vector(space: &dyn Space, what: &str) -> Result<usize> {
    match space.kind() {
        SpaceKind::Euclidean { dim } | SpaceKind::Lp { dim, .. } => Ok(dim),
        _ => Err(structural!(
            "{what} needs a vector space, not {}",
            space.name()
        )),
    }
}

fn vector_of(x: &Point) -> Result<&[f64]> {
    x.as_vector()
        .ok_or_else(|| structural!("expected a vector point, got {x}"))
}

/// Builds a map on `space` from its declarative description.
pub fn make_map(space: &SpaceHandle, spec: &MapSpec) -> Result<MapHandle> {
    let sp = space.clone();
    match spec {
        MapSpec::Identity => Ok(MapHandle::identity(sp)),
        MapSpec::Constant { point } => {
            space.validate(point)?;
            let c = point.clone();
            Ok(MapHandle::from_fn(
                sp,
                format!("constant{point}"),
                Some(point.clone()),
                move |_| Ok(c.clone()),
            ))
        }
        MapSpec::Rotation2d { theta, center } => {
            if space.kind() != (SpaceKind::Euclidean { dim: 2 }) {
                return Err(structural!(
                    "rotation2d needs the Euclidean plane, not {}",
                    space.name()
                ));
            }
            let c = center_or_origin(space.as_ref(), center)?;
            let (sin, cos) = (libm::sin(*theta), libm::cos(*theta));
            let cv: Vec<f64> = vector_of(&c)?.to_vec();
            Ok(MapHandle::from_fn(
                sp,
                format!("rotation2d({theta})"),
                Some(c),
                move |x| {
                    let v = vector_of(x)?;
                    let (dx, dy) = (v[0] - cv[0], v[1] - cv[1]);
                    Ok(Point::vector([
                        cv[0] + cos * dx - sin * dy,
                        cv[1] + sin * dx + cos * dy,
                    ]))
                },
            ))
        }
        MapSpec::RadialScale { lambda, center } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(domain!("radial_scale factor {lambda} outside [0, 1]"));
            }
            let c = center_or_origin(space.as_ref(), center)?;
            let (lambda, cc, inner) = (*lambda, c.clone(), space.clone());
            Ok(MapHandle::from_fn(
                sp,
                format!("radial_scale({lambda})"),
                Some(c),
                move |x| inner.comb(&cc, x, lambda),
            ))
        }
        MapSpec::RayPermutation { perm } => {
            let SpaceKind::Spider { rays } = space.kind() else {
                return Err(structural!(
                    "ray_permutation needs a spider tree, not {}",
                    space.name()
                ));
            };
            let mut seen = alloc::vec![false; rays];
            if perm.len() != rays
                || perm
                    .iter()
                    .any(|&i| i >= rays || core::mem::replace(&mut seen[i], true))
            {
                return Err(domain!("{perm:?} is not a permutation of 0..{rays}"));
            }
            let perm = perm.clone();
            Ok(MapHandle::from_fn(
                sp,
                format!("ray_permutation({perm:?})"),
                Some(space.origin()),
                move |x| {
                    let p = x
                        .as_spider()
                        .ok_or_else(|| structural!("expected a spider point, got {x}"))?;
                    Ok(Point::spider(perm[p.ray], p.r))
                },
            ))
        }
        MapSpec::ProjectionBall { center, radius } => {
            if !space.is_cat0() {
                return Err(structural!(
                    "projection_ball needs a CAT(0) space, not {}",
                    space.name()
                ));
            }
            if !(*radius > 0.0) {
                return Err(domain!("projection radius must be positive, got {radius}"));
            }
            let c = center_or_origin(space.as_ref(), center)?;
            let (radius, cc, inner) = (*radius, c.clone(), space.clone());
            Ok(MapHandle::from_fn(
                sp,
                format!("projection_ball({radius})"),
                Some(c),
                move |x| {
                    let d = inner.dist(&cc, x)?;
                    if d <= radius {
                        Ok(x.clone())
                    } else {
                        inner.comb(&cc, x, radius / d)
                    }
                },
            ))
        }
        MapSpec::Homothety { factor, center } => {
            let dim = require_vector(space.as_ref(), "homothety")?;
            let c = center_or_origin(space.as_ref(), center)?;
            let cv: Vec<f64> = vector_of(&c)?.to_vec();
            let factor = *factor;
            Ok(MapHandle::from_fn(
                sp,
                format!("homothety({factor})"),
                Some(c),
                move |x| {
                    let v = vector_of(x)?;
                    Ok(Point::Vector(
                        (0..dim).map(|i| cv[i] + factor * (v[i] - cv[i])).collect(),
                    ))
                },
            ))
        }
        MapSpec::Compose { f, g } => {
            let f = make_map(space, f)?;
            let g = make_map(space, g)?;
            let fixed = common_fixed_point(space.as_ref(), &f, &g);
            let label = format!("{} o {}", f.label, g.label);
            Ok(MapHandle::from_fn(sp, label, fixed, move |x| {
                f.eval(&g.eval(x)?)
            }))
        }
        MapSpec::Average { f, lambda } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(domain!("average weight {lambda} outside [0, 1]"));
            }
            let f = make_map(space, f)?;
            let fixed = f.fixed_point.clone();
            let (lambda, inner) = (*lambda, space.clone());
            let label = format!("average({}, {lambda})", f.label);
            Ok(MapHandle::from_fn(sp, label, fixed, move |x| {
                inner.comb(x, &f.eval(x)?, lambda)
            }))
        }
    }
}

/// A declared fixed point of `g` (or `f`) that the other map also fixes.
fn common_fixed_point(space: &dyn Space, f: &MapHandle, g: &MapHandle) -> Option<Point> {
    let fixes = |m: &MapHandle, p: &Point| {
        m.eval(p)
            .and_then(|q| space.dist(&q, p))
            .is_ok_and(|d| d <= FIXED_POINT_TOL)
    };
    [g.declared_fixed_point(), f.declared_fixed_point()]
        .into_iter()
        .flatten()
        .find(|p| fixes(f, p) && fixes(g, p))
        .cloned()
}

/// Samples pairs and checks `d(f(x), f(y)) ≤ d(x, y) + tol`, and that the
/// declared fixed point (if any) is fixed within `tol`.
pub fn check_nonexpansive(
    space: &dyn Space,
    map: &MapHandle,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new(
        format!("{} on {}", map.label, space.name()),
        Some(seed),
        tol,
        &["nonexpansive", "fixed_point"],
    );
    rec.set_samples(n_samples as u64);
    for _ in 0..n_samples.max(1) {
        let x = space.sample(&mut rng);
        let mut y = space.sample(&mut rng);
        // A third of the pairs are close together.
        if unit(&mut rng) < 1.0 / 3.0 {
            match space.comb(&x, &y, 1e-3 * unit(&mut rng)) {
                Ok(p) => y = p,
                Err(e) => rec.fail("nonexpansive", None, format!("{e}")),
            }
        }
        let outcome = (|| -> Result<(f64, f64)> {
            let lhs = space.dist(&map.eval(&x)?, &map.eval(&y)?)?;
            Ok((lhs, space.dist(&x, &y)?))
        })();
        match outcome {
            Ok((lhs, rhs)) => rec.le("nonexpansive", None, lhs, rhs, || format!("x={x}, y={y}")),
            Err(e) => rec.fail("nonexpansive", None, format!("{e} at x={x}, y={y}")),
        }
    }
    if let Some(p) = map.declared_fixed_point() {
        match map.eval(p).and_then(|q| space.dist(&q, p)) {
            Ok(d) => rec.le("fixed_point", None, d, 0.0, || format!("p={p}")),
            Err(e) => rec.fail("fixed_point", None, format!("{e}")),
        }
    }
    rec.finish()
}

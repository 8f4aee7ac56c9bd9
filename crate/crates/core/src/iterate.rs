//! The alternating Halpern-Mann recursion
//!
//! ```text
//! y_n     = (1-α_n) T x_n + α_n u
//! x_{n+1} = (1-β_n) U y_n + β_n y_n
//! ```
//!
//! and the distance sequences recorded along it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::maps::MapHandle;
use crate::report::{InequalityReport, Recorder};
use crate::schedules::Schedule;
use crate::spaces::{Point, SpaceHandle};
use crate::Nat;

#[derive(Clone, Debug)]
pub struct IterationProblem {
    pub space: SpaceHandle,
    pub t: MapHandle,
    pub u: MapHandle,
    /// Anchor point of the Halpern step.
    pub anchor: Point,
    pub start: Point,
    /// Declared common fixed point of `T` and `U`.
    pub fixed_point: Point,
    pub schedule: Schedule,
    /// Integer bound `K ≥ M_p`; defaults to `⌈max(M_p, 1)⌉`.
    pub k_override: Option<Nat>,
}

impl IterationProblem {
    /// Checks point shapes and that `p` is fixed by both maps within `tol`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: SpaceHandle,
        t: MapHandle,
        u: MapHandle,
        anchor: Point,
        start: Point,
        fixed_point: Point,
        schedule: Schedule,
        tol: f64,
    ) -> Result<Self> {
        for p in [&anchor, &start, &fixed_point] {
            space.validate(p)?;
        }
        for (name, m) in [("T", &t), ("U", &u)] {
            let moved = space.dist(&m.eval(&fixed_point)?, &fixed_point)?;
            if moved > tol {
                return Err(Error::Validation(format!(
                    "{fixed_point} is not fixed by {name} = {} (moved by {moved})",
                    m.label()
                )));
            }
        }
        Ok(IterationProblem {
            space,
            t,
            u,
            anchor,
            start,
            fixed_point,
            schedule,
            k_override: None,
        })
    }

    pub fn with_k(mut self, k: Nat) -> Self {
        self.k_override = Some(k);
        self
    }

    /// `M_p = max{d(x_0, p), d(u, p)}`.
    pub fn m_p(&self) -> Result<f64> {
        let a = self.space.dist(&self.start, &self.fixed_point)?;
        let b = self.space.dist(&self.anchor, &self.fixed_point)?;
        Ok(a.max(b))
    }

    /// The integer bound `K` used by every rate.
    pub fn k_bound(&self) -> Result<Nat> {
        let m_p = self.m_p()?;
        match self.k_override {
            Some(k) if k == 0 || (k as f64) < m_p => Err(Error::Validation(format!(
                "K = {k} must be a positive integer with K >= M_p = {m_p}"
            ))),
            Some(k) => Ok(k),
            None => Ok(libm::ceil(m_p.max(1.0)) as Nat),
        }
    }
}

/// Specializations of the scheme obtained by fixing one of the maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Variant {
    #[default]
    HalpernMann,
    /// `U = Id`: `(y_n)` is the Halpern iteration and `x_{n+1} = y_n`.
    Halpern,
    /// `T = Id`: `(x_n)` is the Tikhonov-Mann iteration.
    TikhonovMann,
    /// `T = Id`: `(y_n)` is the modified Halpern iteration.
    ModifiedHalpern,
    /// `T = Id`, `α_n ≡ 0`: `(x_n)` is the Mann iteration and `y_n = x_n`.
    Mann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primary {
    X,
    Y,
}

impl Variant {
    pub fn primary(self) -> Primary {
        match self {
            Variant::HalpernMann | Variant::TikhonovMann | Variant::Mann => Primary::X,
            Variant::Halpern | Variant::ModifiedHalpern => Primary::Y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::HalpernMann => "halpern_mann",
            Variant::Halpern => "halpern",
            Variant::TikhonovMann => "tikhonov_mann",
            Variant::ModifiedHalpern => "modified_halpern",
            Variant::Mann => "mann",
        }
    }
}

/// The distance sequences of one run. Index `n` ranges over `0..n_max`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceSeries {
    pub n_max: u64,
    pub d_xx: Vec<f64>,
    pub d_yy: Vec<f64>,
    pub d_xy: Vec<f64>,
    pub d_tx: Vec<f64>,
    pub d_ux: Vec<f64>,
    pub d_ty: Vec<f64>,
    pub d_uy: Vec<f64>,
    pub d_xp: Vec<f64>,
    pub d_yp: Vec<f64>,
    pub m_p: f64,
    pub k: Nat,
}

impl TraceSeries {
    fn with_capacity(n_max: u64, m_p: f64, k: Nat) -> Self {
        let v = || Vec::with_capacity(n_max as usize);
        TraceSeries {
            n_max,
            d_xx: v(),
            d_yy: v(),
            d_xy: v(),
            d_tx: v(),
            d_ux: v(),
            d_ty: v(),
            d_uy: v(),
            d_xp: v(),
            d_yp: v(),
            m_p,
            k,
        }
    }
}

/// Full record of a run: points, parameters and derived distances.
///
/// `x` and `y` both hold indices `0..=n_max`; `y_{n_max}` is determined by
/// `x_{n_max}` and is kept so that `d(y_n, y_{n+1})` exists for every
/// recorded `n`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub problem: IterationProblem,
    pub variant: Variant,
    pub x: Vec<Point>,
    pub y: Vec<Point>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `d(T x_n, u)`, needed by the step inequalities.
    pub d_tx_anchor: Vec<f64>,
    pub series: TraceSeries,
}

impl Trace {
    pub fn n_max(&self) -> u64 {
        self.series.n_max
    }

    pub fn primary(&self) -> Primary {
        self.variant.primary()
    }

    /// Recomputes every derived sequence from the stored points.
    pub fn rederive(&mut self) -> Result<()> {
        let pr = &self.problem;
        let d = |a: &Point, b: &Point| pr.space.dist(a, b);
        let n_max = self.series.n_max;
        let mut s = TraceSeries::with_capacity(n_max, self.series.m_p, self.series.k);
        let mut anchor = Vec::with_capacity(n_max as usize);
        for n in 0..n_max as usize {
            let (x, y) = (&self.x[n], &self.y[n]);
            let tx = pr.t.eval(x)?;
            let ux = pr.u.eval(x)?;
            let ty = pr.t.eval(y)?;
            let uy = pr.u.eval(y)?;
            s.d_xx.push(d(x, &self.x[n + 1])?);
            s.d_yy.push(d(y, &self.y[n + 1])?);
            s.d_xy.push(d(x, y)?);
            s.d_tx.push(d(&tx, x)?);
            s.d_ux.push(d(&ux, x)?);
            s.d_ty.push(d(&ty, y)?);
            s.d_uy.push(d(&uy, y)?);
            s.d_xp.push(d(x, &pr.fixed_point)?);
            s.d_yp.push(d(y, &pr.fixed_point)?);
            anchor.push(d(&tx, &pr.anchor)?);
        }
        self.series = s;
        self.d_tx_anchor = anchor;
        Ok(())
    }
}

fn param(name: &str, n: u64, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(domain!("{name}_{n} = {v} outside [0, 1]"))
    }
}

fn run(problem: &IterationProblem, variant: Variant, n_max: u64) -> Result<Trace> {
    if n_max == 0 {
        return Err(domain!("n_max must be at least 1"));
    }
    let m_p = problem.m_p()?;
    let k = problem.k_bound()?;
    let sp = &problem.space;
    let mut x = Vec::with_capacity(n_max as usize + 1);
    let mut y = Vec::with_capacity(n_max as usize + 1);
    let mut alpha = Vec::with_capacity(n_max as usize + 1);
    let mut beta = Vec::with_capacity(n_max as usize + 1);
    let mut current = problem.start.clone();
    for n in 0..=n_max {
        let a = param("alpha", n, problem.schedule.alpha(n))?;
        let b = param("beta", n, problem.schedule.beta(n))?;
        let yn = sp.comb(&problem.t.eval(&current)?, &problem.anchor, a)?;
        let next = if n < n_max {
            Some(sp.comb(&problem.u.eval(&yn)?, &yn, b)?)
        } else {
            None
        };
        alpha.push(a);
        beta.push(b);
        x.push(current);
        y.push(yn);
        match next {
            Some(p) => current = p,
            None => break,
        }
    }
    let mut trace = Trace {
        problem: problem.clone(),
        variant,
        x,
        y,
        alpha,
        beta,
        d_tx_anchor: Vec::new(),
        series: TraceSeries {
            n_max,
            m_p,
            k,
            ..TraceSeries::default()
        },
    };
    trace.rederive()?;
    Ok(trace)
}

/// Runs `n_max` steps of the alternating Halpern-Mann iteration.
pub fn run_hm(problem: &IterationProblem, n_max: u64) -> Result<Trace> {
    run(problem, Variant::HalpernMann, n_max)
}

/// Runs one of the specializations by replacing `T`, `U` or `α` and then
/// delegating to the general recursion.
pub fn run_variant(variant: Variant, problem: &IterationProblem, n_max: u64) -> Result<Trace> {
    let mut pr = problem.clone();
    let identity = || MapHandle::identity(problem.space.clone());
    match variant {
        Variant::HalpernMann => {}
        Variant::Halpern => pr.u = identity(),
        Variant::TikhonovMann | Variant::ModifiedHalpern => pr.t = identity(),
        Variant::Mann => {
            pr.t = identity();
            pr.schedule = pr.schedule.without_alpha();
        }
    }
    run(&pr, variant, n_max)
}

/// Names of the trace-wide checks, in report order.
pub const TRACE_CHECKS: [&str; 14] = [
    "y_step",
    "x_step",
    "y_step_mp",
    "x_step_mp",
    "x_bounded",
    "y_bounded",
    "x_step_bounded",
    "y_step_bounded",
    "tx_anchor_bounded",
    "uy_bounded",
    "xy_gap",
    "ty_chain",
    "ux_chain",
    "tx_chain",
];

/// Checks, for every recorded `n`, the one-step inequalities of the scheme
/// and the boundedness lemma, each with additive slack `tol`:
///
/// * `d(y_{n+1}, y_n) ≤ (1-α_{n+1}) d(x_{n+1}, x_n) + |α_{n+1}-α_n| d(Tx_n, u)`
/// * `d(x_{n+2}, x_{n+1}) ≤ d(y_{n+1}, y_n) + |β_{n+1}-β_n| d(Uy_n, y_n)`
/// * the same two with `d(Tx_n, u)`, `d(Uy_n, y_n)` replaced by `2M_p`
/// * `d(x_n, p), d(y_n, p) ≤ M_p`; consecutive steps, `d(Tx_n, u)` and
///   `d(Uy_n, y_n)` at most `2M_p`
/// * the chain `d(x_n,y_n) ≤ d(x_{n+1},x_n) + d(Uy_n,y_n)`,
///   `d(Ty_n,y_n) ≤ d(x_n,y_n) + 2Kα_n`, `d(Ux_n,x_n) ≤ 2d(x_n,y_n) + d(Uy_n,y_n)`,
///   `d(Tx_n,x_n) ≤ 2d(x_n,y_n) + d(Ty_n,y_n)`.
pub fn check_trace_inequalities(trace: &Trace, tol: f64) -> InequalityReport {
    let s = &trace.series;
    let mut rec = Recorder::new(
        format!("{} trace of {} steps", trace.variant.name(), s.n_max),
        None,
        tol,
        &TRACE_CHECKS,
    );
    let (a, b) = (&trace.alpha, &trace.beta);
    let m_p = s.m_p;
    let k = s.k as f64;
    let n_max = s.n_max as usize;
    rec.set_samples(n_max as u64);
    let at = |n: usize| Some(n as u64);
    let none = String::new;
    for n in 0..n_max {
        let da = libm::fabs(a[n + 1] - a[n]);
        let db = libm::fabs(b[n + 1] - b[n]);
        let shrink = (1.0 - a[n + 1]) * s.d_xx[n];
        rec.le(
            "y_step",
            at(n),
            s.d_yy[n],
            shrink + da * trace.d_tx_anchor[n],
            none,
        );
        rec.le("y_step_mp", at(n), s.d_yy[n], shrink + 2.0 * m_p * da, none);
        if n + 1 < n_max {
            rec.le(
                "x_step",
                at(n),
                s.d_xx[n + 1],
                s.d_yy[n] + db * s.d_uy[n],
                none,
            );
            rec.le(
                "x_step_mp",
                at(n),
                s.d_xx[n + 1],
                shrink + 2.0 * m_p * (da + db),
                none,
            );
        }
        rec.le("x_bounded", at(n), s.d_xp[n], m_p, none);
        rec.le("y_bounded", at(n), s.d_yp[n], m_p, none);
        rec.le("x_step_bounded", at(n), s.d_xx[n], 2.0 * m_p, none);
        rec.le("y_step_bounded", at(n), s.d_yy[n], 2.0 * m_p, none);
        rec.le(
            "tx_anchor_bounded",
            at(n),
            trace.d_tx_anchor[n],
            2.0 * m_p,
            none,
        );
        rec.le("uy_bounded", at(n), s.d_uy[n], 2.0 * m_p, none);
        rec.le("xy_gap", at(n), s.d_xy[n], s.d_xx[n] + s.d_uy[n], none);
        rec.le(
            "ty_chain",
            at(n),
            s.d_ty[n],
            s.d_xy[n] + 2.0 * k * a[n],
            none,
        );
        rec.le(
            "ux_chain",
            at(n),
            s.d_ux[n],
            2.0 * s.d_xy[n] + s.d_uy[n],
            none,
        );
        rec.le(
            "tx_chain",
            at(n),
            s.d_tx[n],
            2.0 * s.d_xy[n] + s.d_ty[n],
            none,
        );
    }
    rec.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{make_map, MapSpec};
    use crate::schedules::canonical_linear_schedule;
    use crate::spaces::Euclidean;
    use alloc::sync::Arc;

    fn real_line() -> IterationProblem {
        let space: SpaceHandle = Arc::new(Euclidean::new(1));
        let t = make_map(
            &space,
            &MapSpec::Homothety {
                factor: -1.0,
                center: None,
            },
        )
        .unwrap();
        let u = make_map(&space, &MapSpec::Identity).unwrap();
        let one = Point::vector([1.0]);
        IterationProblem::new(
            space,
            t,
            u,
            one.clone(),
            one,
            Point::vector([0.0]),
            canonical_linear_schedule(0.5).unwrap(),
            1e-9,
        )
        .unwrap()
    }

    fn coord(p: &Point) -> f64 {
        p.as_vector().unwrap()[0]
    }

    #[test]
    fn hand_computed_trace() {
        let tr = run_hm(&real_line(), 4).unwrap();
        let xs: Vec<f64> = tr.x.iter().map(coord).collect();
        let ys: Vec<f64> = tr.y.iter().take(4).map(coord).collect();
        let third = 1.0 / 3.0;
        let fifth = 1.0 / 5.0;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        for (got, want) in xs.iter().zip([1.0, 1.0, third, third, fifth]) {
            assert!(close(*got, want), "{xs:?}");
        }
        for (got, want) in ys.iter().zip([1.0, third, third, fifth]) {
            assert!(close(*got, want), "{ys:?}");
        }
        assert_eq!(tr.series.m_p, 1.0);
        assert_eq!(tr.series.k, 1);
        assert!(close(tr.series.d_xx[1], 2.0 / 3.0));
    }

    #[test]
    fn identity_maps_with_zero_alpha_stand_still() {
        let space: SpaceHandle = Arc::new(Euclidean::new(2));
        let id = MapHandle::identity(space.clone());
        let sched = crate::schedules::Schedule::custom("zero", |_| 0.0, |_| 0.3);
        let x0 = Point::vector([0.4, -0.2]);
        let pr = IterationProblem::new(
            space.clone(),
            id.clone(),
            id,
            Point::vector([1.0, 1.0]),
            x0.clone(),
            space.origin(),
            sched,
            1e-9,
        )
        .unwrap();
        let tr = run_hm(&pr, 50).unwrap();
        assert!(tr.x.iter().all(|p| *p == x0));
    }

    #[test]
    fn k_override_is_validated() {
        let pr = real_line();
        assert!(run_hm(&pr.clone().with_k(3), 2).is_ok());
        let space: SpaceHandle = Arc::new(Euclidean::new(1));
        let id = MapHandle::identity(space.clone());
        let far = IterationProblem::new(
            space,
            id.clone(),
            id,
            Point::vector([2.5]),
            Point::vector([0.0]),
            Point::vector([0.0]),
            canonical_linear_schedule(0.5).unwrap(),
            1e-9,
        )
        .unwrap();
        assert_eq!(far.k_bound().unwrap(), 3);
        assert!(matches!(
            run_hm(&far.with_k(2), 2),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn rejects_bad_schedule_values() {
        let mut pr = real_line();
        pr.schedule = crate::schedules::Schedule::custom("bad", |_| 0.5, |_| 1.5);
        assert!(matches!(run_hm(&pr, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_undeclared_fixed_point() {
        let pr = real_line();
        let bad = IterationProblem::new(
            pr.space.clone(),
            pr.t.clone(),
            pr.u.clone(),
            pr.anchor.clone(),
            pr.start.clone(),
            Point::vector([1.0]),
            pr.schedule.clone(),
            1e-9,
        );
        assert!(matches!(bad, Err(Error::Validation(_))));
    }

    #[test]
    fn inequalities_hold_and_corruption_is_caught() {
        let mut tr = run_hm(&real_line(), 200).unwrap();
        assert!(check_trace_inequalities(&tr, 1e-9).passed());
        tr.x[5] = Point::vector([40.0]);
        tr.rederive().unwrap();
        let report = check_trace_inequalities(&tr, 1e-9);
        let bounded = report.check("x_bounded").unwrap();
        assert_eq!(bounded.witness.as_ref().unwrap().n, Some(5));
    }

    #[test]
    fn specializations() {
        let pr = real_line();
        let h = run_variant(Variant::Halpern, &pr, 100).unwrap();
        assert!((0..100).all(|n| h.x[n + 1] == h.y[n]));
        let m = run_variant(Variant::Mann, &pr, 100).unwrap();
        assert!((0..=100).all(|n| m.x[n] == m.y[n]));
        assert!(m.series.d_xy.iter().all(|&d| d == 0.0));
    }
}

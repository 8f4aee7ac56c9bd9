//! Certification of rates against traces and synthetic sequences.
//!
//! Every check certifies the bound direction only: a rate is verified when
//! the quantity stays below `1/(k+1)` from the rate onward.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{structural, Error, Result};
use crate::iterate::TraceSeries;
use crate::rates::{
    quadratic_rate, qxu_rate, sabach_bound, sigma1_rate, sigma2_rate, PSource, QuadraticRate,
    QuadraticRates, RateContext, UcwFamily,
};
use crate::report::{Status, VerifyReport};
use crate::schedules::{check_divergence, check_series_cauchy, Modulus, ModulusCheck, ModulusKind};
use crate::spaces::UcModulus;
use crate::Nat;

/// Default relative tolerance for rate checks: the slack at a value `v` is
/// `RATE_TOL * (1 + v)`.
pub const RATE_TOL: f64 = 1e-12;

/// A derived distance sequence of a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Quantity {
    #[cfg_attr(feature = "serde", serde(rename = "d_xx"))]
    DXx,
    #[cfg_attr(feature = "serde", serde(rename = "d_yy"))]
    DYy,
    #[cfg_attr(feature = "serde", serde(rename = "d_xy"))]
    DXy,
    #[cfg_attr(feature = "serde", serde(rename = "d_Tx"))]
    DTx,
    #[cfg_attr(feature = "serde", serde(rename = "d_Ux"))]
    DUx,
    #[cfg_attr(feature = "serde", serde(rename = "d_Ty"))]
    DTy,
    #[cfg_attr(feature = "serde", serde(rename = "d_Uy"))]
    DUy,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::DXx,
        Quantity::DYy,
        Quantity::DXy,
        Quantity::DTx,
        Quantity::DUx,
        Quantity::DTy,
        Quantity::DUy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::DXx => "d_xx",
            Quantity::DYy => "d_yy",
            Quantity::DXy => "d_xy",
            Quantity::DTx => "d_Tx",
            Quantity::DUx => "d_Ux",
            Quantity::DTy => "d_Ty",
            Quantity::DUy => "d_Uy",
        }
    }

    pub fn of(self, series: &TraceSeries) -> &[f64] {
        match self {
            Quantity::DXx => &series.d_xx,
            Quantity::DYy => &series.d_yy,
            Quantity::DXy => &series.d_xy,
            Quantity::DTx => &series.d_tx,
            Quantity::DUx => &series.d_ux,
            Quantity::DTy => &series.d_ty,
            Quantity::DUy => &series.d_uy,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    /// Accepts the column names, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| structural!("unknown quantity {s:?}"))
    }
}

/// "`quantity` is asymptotically regular with rate `rate`".
#[derive(Clone, Debug)]
pub struct RateClaim {
    pub quantity: Quantity,
    pub rate: Modulus,
    pub label: String,
}

impl RateClaim {
    pub fn new(quantity: Quantity, rate: Modulus) -> Self {
        let label = format!("{} by {}", quantity, rate.label());
        RateClaim {
            quantity,
            rate,
            label,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// The claims that hold on every problem with constant `β`, `α_n = 2/(n+2)`
/// and the given `K`: linear rates for `d_xx`, `d_yy` and, when `lambda` is
/// given (CAT(0) only), the quadratic rates for the remaining quantities.
pub fn standard_claims(big_k: Nat, lambda: Option<Nat>) -> Vec<RateClaim> {
    let mut claims = alloc::vec![
        RateClaim::new(Quantity::DXx, sigma1_rate(big_k)),
        RateClaim::new(Quantity::DYy, sigma2_rate(big_k)),
    ];
    if let Some(l) = lambda {
        for (q, r) in [
            (Quantity::DUy, QuadraticRate::Sigma3),
            (Quantity::DXy, QuadraticRate::Theta),
            (Quantity::DTy, QuadraticRate::Sigma4),
            (Quantity::DTx, QuadraticRate::Sigma5),
            (Quantity::DUx, QuadraticRate::Sigma5),
        ] {
            claims.push(RateClaim::new(q, quadratic_rate(big_k, l, r)));
        }
    }
    claims
}

/// Checks `claim` for every `k ≤ k_max`. A rate pointing past the last
/// recorded index (or not representable) is `skipped_budget`; otherwise
/// every `n` from the rate to the end must satisfy
/// `q[n] ≤ 1/(k+1) + tol·(1 + q[n])`. The witness of a violation is the
/// first offending index.
pub fn check_rate(
    series: &TraceSeries,
    claim: &RateClaim,
    k_max: u64,
    tol: f64,
) -> Result<VerifyReport> {
    let q = claim.quantity.of(series);
    let len = q.len();
    let mut report = VerifyReport::new(claim.label.clone(), k_max, len as u64, tol);
    // suffix maxima: the largest value from n onward decides the verdict
    let mut suffix = alloc::vec![f64::NEG_INFINITY; len + 1];
    for n in (0..len).rev() {
        suffix[n] = if q[n].is_nan() {
            f64::INFINITY
        } else {
            q[n].max(suffix[n + 1])
        };
    }
    let exceeds = |v: f64, bound: f64| !v.is_finite() || v - tol * (1.0 + v.abs()) > bound;
    for k in 0..=k_max {
        let rate = match claim.rate.eval(k as Nat) {
            Ok(r) => r,
            Err(e) if e.is_beyond_budget() => {
                report.push(k, None, Status::SkippedBudget);
                continue;
            }
            Err(e) => return Err(e),
        };
        if rate >= len as Nat {
            report.push(k, Some(rate), Status::SkippedBudget);
            continue;
        }
        let start = rate as usize;
        let bound = 1.0 / (k as f64 + 1.0);
        let status = if exceeds(suffix[start], bound) {
            let n = (start..len)
                .find(|&n| exceeds(q[n], bound))
                .unwrap_or(start);
            Status::Violated {
                n: Some(n as u64),
                value: q[n],
                bound,
                note: Some(format!(
                    "{}[{n}] > 1/(k+1) although n >= rate({k}) = {rate}",
                    claim.quantity
                )),
            }
        } else {
            Status::Verified
        };
        report.push(k, Some(rate), status);
    }
    Ok(report)
}

fn precondition(report: &mut VerifyReport, what: &str, check: &ModulusCheck) {
    if let Some(w) = &check.failure {
        report.precondition_failed(format!(
            "{what}: {} (lhs={}, rhs={})",
            w.detail, w.lhs, w.rhs
        ));
    }
}

/// Runs `s_{n+1} = (1 - a_n)s_n + c_n` up to `budget` and certifies the
/// rate of convergence `Σ(k) = qxu_rate(θ, χ, L, k)` for `k ≤ k_max`.
///
/// The hypotheses (`a_n ∈ [0,1]`, `c_n ≥ 0`, `s_n ≤ L`, `θ` a rate of
/// divergence of `Σ a_n`, `χ` a Cauchy modulus of `Σ c_n`) are validated by
/// brute force up to `budget`; failures are recorded as precondition
/// failures, separately from rate violations.
#[allow(clippy::too_many_arguments)]
pub fn qxu_synthetic_check(
    a: &dyn Fn(u64) -> f64,
    c: &dyn Fn(u64) -> f64,
    s0: f64,
    theta: &Modulus,
    chi: &Modulus,
    bound: Nat,
    k_max: u64,
    budget: u64,
    tol: f64,
) -> Result<VerifyReport> {
    let claim = format!(
        "s_n -> 0 with rate Sigma from theta={}, chi={}, L={bound}",
        theta.label(),
        chi.label()
    );
    let mut report = VerifyReport::new(claim, k_max, budget, tol);
    let n_len = budget as usize + 1;
    let mut s = Vec::with_capacity(n_len);
    s.push(s0);
    for n in 0..budget {
        let (an, cn) = (a(n), c(n));
        if !(0.0..=1.0).contains(&an) {
            report.precondition_failed(format!("a_{n} = {an} outside [0, 1]"));
        }
        if !(cn >= 0.0) {
            report.precondition_failed(format!("c_{n} = {cn} is negative"));
        }
        s.push((1.0 - an) * s[n as usize] + cn);
        if report.summary.precondition_failures > 0 {
            break;
        }
    }
    if let Some(n) = s.iter().position(|&v| !(v >= 0.0 && v <= bound as f64)) {
        report.precondition_failed(format!("s_{n} = {} outside [0, L]", s[n]));
    }
    let mut div = ModulusCheck::new("theta", true);
    check_divergence(&mut div, theta, a, budget);
    precondition(
        &mut report,
        "theta is not a rate of divergence of sum a_n",
        &div,
    );
    let mut cauchy = ModulusCheck::new("chi", true);
    check_series_cauchy(&mut cauchy, chi, c, budget);
    precondition(
        &mut report,
        "chi is not a Cauchy modulus of sum c_n",
        &cauchy,
    );
    if !report.preconditions.is_empty() {
        return Ok(report);
    }

    let series = TraceSeries {
        n_max: s.len() as u64,
        d_xx: s,
        ..TraceSeries::default()
    };
    let rate = {
        let (theta, chi) = (theta.clone(), chi.clone());
        Modulus::new("Sigma", ModulusKind::Rate, false, move |k| {
            qxu_rate(&theta, &chi, bound, k)
        })
    };
    let checked = check_rate(&series, &RateClaim::new(Quantity::DXx, rate), k_max, tol)?;
    for e in checked.entries {
        report.push(e.k, e.rate, e.status);
    }
    Ok(report)
}

/// Runs the extremal recursion
/// `s_{n+1} = (1 - γ a_{n+1}) s_n + (a_n - a_{n+1}) c_n`,
/// `a_n = N/(γ(n+J))`, with equality and checks
/// `s_n ≤ JL/(γ(n+J)) + tol·(1 + bound)` for all `n ≤ budget`.
///
/// The result has a single entry at `k = 0` whose witness, if any, is the
/// first `n` past the bound.
#[allow(clippy::too_many_arguments)]
pub fn sabach_synthetic_check(
    bound: f64,
    big_n: u64,
    j: u64,
    gamma: f64,
    c: &dyn Fn(u64) -> f64,
    s0: f64,
    budget: u64,
    tol: f64,
) -> Result<VerifyReport> {
    if big_n < 2 || j < big_n {
        return Err(crate::error::domain!(
            "need J >= N >= 2, got N={big_n}, J={j}"
        ));
    }
    // validates γ and L
    sabach_bound(bound, j, gamma, 0)?;
    let claim = format!("s_n <= JL/(gamma(n+J)) with L={bound}, N={big_n}, J={j}, gamma={gamma}");
    let mut report = VerifyReport::new(claim, 0, budget, tol);
    if !(s0 >= 0.0 && s0 <= bound) {
        report.precondition_failed(format!("s_0 = {s0} outside [0, L]"));
    }
    let a = |n: u64| big_n as f64 / (gamma * (n + j) as f64);
    let mut s = s0;
    for n in 0..=budget {
        let limit = sabach_bound(bound, j, gamma, n)?;
        if s - tol * (1.0 + limit) > limit || s.is_nan() {
            report.push(
                0,
                None,
                Status::Violated {
                    n: Some(n),
                    value: s,
                    bound: limit,
                    note: None,
                },
            );
            return Ok(report);
        }
        let cn = c(n);
        if !(cn <= bound) {
            report.precondition_failed(format!("c_{n} = {cn} exceeds L"));
            return Ok(report);
        }
        s = (1.0 - gamma * a(n + 1)) * s + (a(n) - a(n + 1)) * cn;
    }
    report.push(0, None, Status::Verified);
    Ok(report)
}

/// Names of the exact identities checked by [`cross_consistency_suite`].
pub const CROSS_IDENTITIES: [&str; 7] = [
    "Gamma0 = Sigma3",
    "Omega = Theta",
    "Gamma4 = Sigma4",
    "Gamma5 = Sigma5",
    "Gamma6 = Sigma5",
    "P = 8K²Λ²(k+1)²",
    "P~ = P0",
];

fn cross_at(big_k: Nat, lambda: Nat, k: Nat) -> Result<Option<String>> {
    let mut ctx = RateContext::new(big_k)?
        .with_lambda(lambda)
        .with_eta(UcModulus::Cat0)
        .with_delta(sigma1_rate(big_k));
    ctx.sigma1 = Some(Modulus::affine("2k", ModulusKind::RateOfConvergence, 2, 0));
    let quad = QuadraticRates::from_lambda(big_k, lambda, k)?;
    let cat0 = UcwFamily::new(&ctx, PSource::Cat0);
    let general = UcwFamily::new(&ctx, PSource::Eta);
    let tilde = UcwFamily::new(&ctx, PSource::EtaTilde);
    let k1 = k + 1;
    let pairs: [(usize, Nat, Nat); 7] = [
        (0, cat0.gamma3(k)?, quad.sigma3),
        (1, cat0.omega(k)?, quad.theta),
        (2, cat0.gamma4(k)?, quad.sigma4),
        (3, cat0.gamma5(k)?, quad.sigma5),
        (4, cat0.gamma6(k)?, quad.sigma5),
        (
            5,
            general.p(k)?,
            8 * big_k * big_k * lambda * lambda * k1 * k1,
        ),
        (6, tilde.p(k)?, cat0.p(k)?),
    ];
    Ok(pairs.iter().find(|(_, l, r)| l != r).map(|&(i, l, r)| {
        format!(
            "{} fails at K={big_k}, Lambda={lambda}, k={k}: {l} != {r}",
            CROSS_IDENTITIES[i]
        )
    }))
}

/// Checks, exactly, that the general UCW rates instantiated with
/// `Δ = Σ1`, `σ1(k) = 2k` and `P0` reproduce the quadratic rates, and that
/// the CAT(0) modulus yields the expected `P` and `P̃`, for all
/// `1 ≤ K ≤ K_max`, `2 ≤ Λ ≤ Λ_max`, `0 ≤ k ≤ k_max`. One entry per `k`.
pub fn cross_consistency_suite(
    k_big_max: Nat,
    lambda_max: Nat,
    k_max: u64,
) -> Result<VerifyReport> {
    if k_big_max < 1 || lambda_max < 2 {
        return Err(crate::error::domain!("need K_max >= 1 and Lambda_max >= 2"));
    }
    let mut report = VerifyReport::new("instantiation equivalence", k_max, 0, 0.0);
    for k in 0..=k_max {
        let mut status = Status::Verified;
        'grid: for big_k in 1..=k_big_max {
            for lambda in 2..=lambda_max {
                match cross_at(big_k, lambda, k as Nat) {
                    Ok(None) => {}
                    Ok(Some(note)) => {
                        status = Status::Violated {
                            n: None,
                            value: f64::NAN,
                            bound: f64::NAN,
                            note: Some(note),
                        };
                        break 'grid;
                    }
                    Err(e) if e.is_beyond_budget() => {
                        status = Status::SkippedBudget;
                        break 'grid;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        report.push(k, None, status);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::real_line;
    use crate::iterate::run_hm;
    use crate::schedules::canonical_linear_schedule;

    fn real_line_series(n_max: u64) -> TraceSeries {
        run_hm(&real_line().unwrap(), n_max).unwrap().series
    }

    #[test]
    fn quantity_names() {
        assert_eq!("d_Tx".parse::<Quantity>().unwrap(), Quantity::DTx);
        assert_eq!("D_UY".parse::<Quantity>().unwrap(), Quantity::DUy);
        assert!(matches!(
            "d_zz".parse::<Quantity>(),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn linear_claim_verifies() {
        let series = real_line_series(2000);
        let r = check_rate(
            &series,
            &RateClaim::new(Quantity::DXx, sigma1_rate(1)),
            200,
            RATE_TOL,
        )
        .unwrap();
        assert_eq!(r.summary.verified, 201);
        assert!(r.passed());
    }

    #[test]
    fn zero_rate_is_violated() {
        let series = real_line_series(100);
        let zero = Modulus::constant("0", ModulusKind::Rate, 0);
        let r = check_rate(&series, &RateClaim::new(Quantity::DXx, zero), 5, RATE_TOL).unwrap();
        // d_xx = 0, 2/3, 0, 2/5, ...: k = 0 holds, k = 1 fails at n = 1.
        assert_eq!(r.status_at(0), Some(&Status::Verified));
        let v = r.first_violation().unwrap();
        assert_eq!(v.k, 1);
        match &v.status {
            Status::Violated { n, value, .. } => {
                assert_eq!(*n, Some(1));
                assert!((value - 2.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_values_violate() {
        for bad in [f64::INFINITY, f64::NAN] {
            let mut series = real_line_series(100);
            series.d_xx[50] = bad;
            let r = check_rate(
                &series,
                &RateClaim::new(Quantity::DXx, sigma1_rate(1)),
                3,
                RATE_TOL,
            )
            .unwrap();
            assert!(!r.passed(), "{bad}");
            match &r.first_violation().unwrap().status {
                Status::Violated { n, .. } => assert_eq!(*n, Some(50)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn long_rate_is_skipped() {
        let series = real_line_series(50);
        let big = Modulus::constant("50", ModulusKind::Rate, 50);
        let r = check_rate(&series, &RateClaim::new(Quantity::DXx, big), 3, RATE_TOL).unwrap();
        assert_eq!(r.summary.skipped_budget, 4);
    }

    #[test]
    fn qxu_examples() {
        let id = Modulus::affine("n", ModulusKind::RateOfDivergence, 1, 0);
        let zero = Modulus::constant("0", ModulusKind::CauchyModulus, 0);
        let r = qxu_synthetic_check(&|_| 1.0, &|_| 0.0, 1.0, &id, &zero, 1, 100, 1000, RATE_TOL)
            .unwrap();
        assert!(r.passed());
        assert_eq!(r.entries[0].rate, Some(3));

        let sched = canonical_linear_schedule(0.5).unwrap();
        let alpha = move |n: u64| 2.0 / (n as f64 + 2.0);
        let c = move |n: u64| 2.0 * (alpha(n + 1) - alpha(n)).abs();
        let chi = Modulus::affine("4k+1", ModulusKind::CauchyModulus, 4, 1);
        let theta = sched.sigma2.clone().unwrap();
        let r =
            qxu_synthetic_check(&alpha, &c, 2.0, &theta, &chi, 2, 0, 100_000, RATE_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.summary.verified, 1);

        let r =
            qxu_synthetic_check(&|_| 0.0, &|_| 0.0, 1.0, &id, &zero, 1, 10, 100, RATE_TOL).unwrap();
        assert_eq!(r.summary.precondition_failures, 1);
        assert!(r.entries.is_empty());
    }

    #[test]
    fn sabach_examples() {
        for (l, n, j, g) in [(2.0, 2, 2, 1.0), (1.0, 2, 3, 1.0), (5.0, 2, 4, 0.5)] {
            let r = sabach_synthetic_check(l, n, j, g, &|_| l, l, 10_000, 1e-12).unwrap();
            assert!(r.passed(), "{r:?}");
            let r = sabach_synthetic_check(l, n, j, g, &|_| 0.0, l, 1000, 1e-12).unwrap();
            assert!(r.passed());
        }
        assert!(sabach_synthetic_check(2.0, 3, 2, 1.0, &|_| 0.0, 1.0, 10, 0.0).is_err());
        assert!(sabach_synthetic_check(2.0, 1, 2, 1.0, &|_| 0.0, 1.0, 10, 0.0).is_err());
        // doubling c breaks the hypothesis c_n <= L
        let r = sabach_synthetic_check(2.0, 2, 2, 1.0, &|_| 4.0, 2.0, 10, 0.0).unwrap();
        assert_eq!(r.summary.precondition_failures, 1);
    }

    #[test]
    fn cross_small_grid() {
        let r = cross_consistency_suite(3, 4, 10).unwrap();
        assert!(r.passed());
        assert_eq!(r.summary.verified, 11);
    }
}

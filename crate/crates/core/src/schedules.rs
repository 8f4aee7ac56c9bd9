//! Parameter sequences `(α_n)`, `(β_n)` with their quantitative moduli.
//!
//! The moduli certify the hypotheses used by every rate:
//!
//! * `σ1`: rate of convergence of `α_n → 0`,
//! * `σ2`: rate of divergence of `Σ α_n`,
//! * `σ3`: Cauchy modulus of `Σ |α_{n+1} - α_n|`,
//! * `σ4`: Cauchy modulus of `Σ |β_{n+1} - β_n|`,
//! * `Λ ≥ 2` with `1/Λ ≤ β_n ≤ 1 - 1/Λ`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::exact::{ceil_exp, ceil_exp_half};
use crate::report::Witness;
use crate::Nat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum ModulusKind {
    RateOfConvergence,
    RateOfDivergence,
    CauchyModulus,
    /// A rate of asymptotic regularity or of convergence of distances.
    Rate,
}

#[derive(Clone)]
enum Repr {
    Func(Arc<dyn Fn(Nat) -> Result<Nat> + Send + Sync>),
    Table(Arc<[Nat]>),
}

/// A function `ℕ → ℕ` in exact arithmetic. Evaluation may fail with an
/// overflow (value too large to represent) or, for tables, when the
/// argument lies past the table.
#[derive(Clone)]
pub struct Modulus {
    label: String,
    kind: ModulusKind,
    nondecreasing: bool,
    repr: Repr,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({}, {:?})", self.label, self.kind)
    }
}

impl Modulus {
    pub fn new(
        label: impl Into<String>,
        kind: ModulusKind,
        nondecreasing: bool,
        f: impl Fn(Nat) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        Modulus {
            label: label.into(),
            kind,
            nondecreasing,
            repr: Repr::Func(Arc::new(f)),
        }
    }

    /// `k ↦ a·k + b`.
    pub fn affine(label: impl Into<String>, kind: ModulusKind, a: Nat, b: Nat) -> Self {
        Modulus::new(label, kind, true, move |k| {
            a.checked_mul(k)
                .and_then(|v| v.checked_add(b))
                .ok_or(Error::Overflow("affine modulus"))
        })
    }

    pub fn constant(label: impl Into<String>, kind: ModulusKind, c: Nat) -> Self {
        Modulus::new(label, kind, true, move |_| Ok(c))
    }

    /// Explicit values for `k = 0, 1, …, len-1`; undefined beyond.
    pub fn table(label: impl Into<String>, kind: ModulusKind, values: Vec<Nat>) -> Self {
        let nondecreasing = values.windows(2).all(|w| w[0] <= w[1]);
        Modulus {
            label: label.into(),
            kind,
            nondecreasing,
            repr: Repr::Table(values.into()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> ModulusKind {
        self.kind
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_kind(mut self, kind: ModulusKind) -> Self {
        self.kind = kind;
        self
    }

    /// Whether the modulus is known to be nondecreasing.
    pub fn is_nondecreasing(&self) -> bool {
        self.nondecreasing
    }

    pub fn eval(&self, k: Nat) -> Result<Nat> {
        match &self.repr {
            Repr::Func(f) => f(k),
            Repr::Table(t) => usize::try_from(k)
                .ok()
                .and_then(|i| t.get(i).copied())
                .ok_or_else(|| Error::Untabulated {
                    label: self.label.clone(),
                    arg: k,
                }),
        }
    }
}

/// `k ↦ max{σ(i) : i ≤ k}`: nondecreasing, pointwise `≥ σ`, and still a
/// modulus of the same kind since each of those notions is upward closed.
pub fn monotonize(sigma: &Modulus) -> Modulus {
    if sigma.nondecreasing {
        return sigma.clone();
    }
    let label = format!("{}^M", sigma.label);
    match &sigma.repr {
        Repr::Table(t) => {
            let mut best = 0;
            let running: Vec<Nat> = t
                .iter()
                .map(|&v| {
                    best = best.max(v);
                    best
                })
                .collect();
            Modulus {
                label,
                kind: sigma.kind,
                nondecreasing: true,
                repr: Repr::Table(running.into()),
            }
        }
        Repr::Func(_) => {
            let inner = sigma.clone();
            Modulus::new(label, sigma.kind, true, move |k| {
                let mut best = 0;
                for i in 0..=k {
                    best = best.max(inner.eval(i)?);
                }
                Ok(best)
            })
        }
    }
}

/// Named families of schedules; rates with closed forms need to know which
/// one they are looking at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `α_n = 2/(n+2)`, `β_n ≡ β`.
    CanonicalLinear {
        beta: f64,
    },
    /// `α_n = 1/(n+1)`, `β_n ≡ β`.
    Harmonic {
        beta: f64,
    },
    Custom,
}

type Seq = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Schedule {
    pub label: String,
    pub family: Family,
    alpha: Seq,
    beta: Seq,
    pub sigma1: Option<Modulus>,
    pub sigma2: Option<Modulus>,
    pub sigma3: Option<Modulus>,
    pub sigma4: Option<Modulus>,
    pub lambda: Option<Nat>,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule")
            .field("label", &self.label)
            .field("family", &self.family)
            .field("sigma1", &self.sigma1)
            .field("sigma2", &self.sigma2)
            .field("sigma3", &self.sigma3)
            .field("sigma4", &self.sigma4)
            .field("lambda", &self.lambda)
            .finish()
    }
}

/// `⌈max{1/β, 1/(1-β)}⌉`.
pub fn lambda_for_beta(beta: f64) -> Result<Nat> {
    check_beta(beta)?;
    let ratio = (1.0 / beta).max(1.0 / (1.0 - beta));
    // a ratio within rounding of an integer is that integer (β = 0.9 gives 10.000000000000002)
    let nearest = libm::round(ratio);
    let snapped = if libm::fabs(ratio - nearest) <= 1e-12 * nearest {
        nearest
    } else {
        libm::ceil(ratio)
    };
    Ok(snapped as Nat)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(domain!("beta must lie in (0, 1), got {beta}"))
    }
}

fn to_u64(n: Nat, what: &'static str) -> Result<u64> {
    u64::try_from(n).map_err(|_| Error::Overflow(what))
}

impl Schedule {
    /// Schedule from explicit sequences; moduli are attached with the
    /// `with_*` builders.
    pub fn custom(
        label: impl Into<String>,
        alpha: impl Fn(u64) -> f64 + Send + Sync + 'static,
        beta: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Schedule {
            label: label.into(),
            family: Family::Custom,
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            sigma1: None,
            sigma2: None,
            sigma3: None,
            sigma4: None,
            lambda: None,
        }
    }

    pub fn alpha(&self, n: u64) -> f64 {
        (self.alpha)(n)
    }

    pub fn beta(&self, n: u64) -> f64 {
        (self.beta)(n)
    }

    pub fn with_sigma1(mut self, m: Modulus) -> Self {
        self.sigma1 = Some(m);
        self
    }
    pub fn with_sigma2(mut self, m: Modulus) -> Self {
        self.sigma2 = Some(m);
        self
    }
    pub fn with_sigma3(mut self, m: Modulus) -> Self {
        self.sigma3 = Some(m);
        self
    }
    pub fn with_sigma4(mut self, m: Modulus) -> Self {
        self.sigma4 = Some(m);
        self
    }
    pub fn with_lambda(mut self, lambda: Nat) -> Self {
        self.lambda = Some(lambda);
        self
    }

    /// Same sequences and moduli with `α_n ≡ 0` (the Mann specialization).
    /// Moduli that refer to `α` are dropped.
    pub fn without_alpha(&self) -> Self {
        let mut s = self.clone();
        s.label = format!("{} (alpha = 0)", self.label);
        s.family = Family::Custom;
        s.alpha = Arc::new(|_| 0.0);
        s.sigma1 = None;
        s.sigma2 = None;
        s.sigma3 = Some(Modulus::constant("0", ModulusKind::CauchyModulus, 0));
        s
    }

    /// The constant step `β` for the two named families.
    pub fn constant_beta(&self) -> Option<f64> {
        match self.family {
            Family::CanonicalLinear { beta } | Family::Harmonic { beta } => Some(beta),
            Family::Custom => None,
        }
    }
}

/// `α_n = 2/(n+2)`, `β_n ≡ β`, with `σ1(k) = 2k`,
/// `σ2(n) = max(0, ⌈e^{(n+2)/2}⌉ - 3)`, `σ3(k) = 2k`, `σ4 ≡ 0` and
/// `Λ = ⌈max{1/β, 1/(1-β)}⌉`.
pub fn canonical_linear_schedule(beta: f64) -> Result<Schedule> {
    let lambda = lambda_for_beta(beta)?;
    let sigma2 = Modulus::new(
        "ceil(e^((n+2)/2))-3",
        ModulusKind::RateOfDivergence,
        true,
        |n| {
            let h = to_u64(n, "sigma2")?
                .checked_add(2)
                .ok_or(Error::Overflow("sigma2"))?;
            Ok(ceil_exp_half(h)?.saturating_sub(3))
        },
    );
    Ok(Schedule {
        label: format!("canonical_linear(beta={beta})"),
        family: Family::CanonicalLinear { beta },
        alpha: Arc::new(|n| 2.0 / (n as f64 + 2.0)),
        beta: Arc::new(move |_| beta),
        sigma1: Some(Modulus::affine("2k", ModulusKind::RateOfConvergence, 2, 0)),
        sigma2: Some(sigma2),
        sigma3: Some(Modulus::affine("2k", ModulusKind::CauchyModulus, 2, 0)),
        sigma4: Some(Modulus::constant("0", ModulusKind::CauchyModulus, 0)),
        lambda: Some(lambda),
    })
}

/// `α_n = 1/(n+1)`, `β_n ≡ β`, with `σ1(k) = k`, `σ2(n) = max(0, ⌈e^n⌉ - 2)`,
/// `σ3(k) = k`, `σ4 ≡ 0`.
pub fn harmonic_schedule(beta: f64) -> Result<Schedule> {
    let lambda = lambda_for_beta(beta)?;
    let sigma2 = Modulus::new("ceil(e^n)-2", ModulusKind::RateOfDivergence, true, |n| {
        Ok(ceil_exp(to_u64(n, "sigma2")?)?.saturating_sub(2))
    });
    Ok(Schedule {
        label: format!("harmonic(beta={beta})"),
        family: Family::Harmonic { beta },
        alpha: Arc::new(|n| 1.0 / (n as f64 + 1.0)),
        beta: Arc::new(move |_| beta),
        sigma1: Some(Modulus::affine("k", ModulusKind::RateOfConvergence, 1, 0)),
        sigma2: Some(sigma2),
        sigma3: Some(Modulus::affine("k", ModulusKind::CauchyModulus, 1, 0)),
        sigma4: Some(Modulus::constant("0", ModulusKind::CauchyModulus, 0)),
        lambda: Some(lambda),
    })
}

/// Outcome of one brute-force modulus check.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusCheck {
    pub name: String,
    pub present: bool,
    pub checked: u64,
    /// Arguments whose modulus value lies beyond the budget.
    pub skipped: u64,
    pub failure: Option<Witness>,
}

impl ModulusCheck {
    pub(crate) fn new(name: &str, present: bool) -> Self {
        ModulusCheck {
            name: name.into(),
            present,
            checked: 0,
            skipped: 0,
            failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusReport {
    pub schedule: String,
    pub budget: u64,
    pub checks: Vec<ModulusCheck>,
}

impl ModulusReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(ModulusCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&ModulusCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Floating slack for comparing schedule values with exact thresholds:
/// a few ulps, so only genuine violations are reported.
const ULPS: f64 = 4.0 * f64::EPSILON;

fn le_rel(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + ULPS) + f64::MIN_POSITIVE
}

/// Walks `arg = 0..=budget`, calling `check` on each modulus value that fits
/// in the budget. A nondecreasing modulus stops at the first value past the
/// budget and counts the remaining arguments as skipped.
fn sweep(
    out: &mut ModulusCheck,
    modulus: &Modulus,
    budget: u64,
    mut check: impl FnMut(u64, u64) -> Option<Witness>,
) {
    for arg in 0..=budget {
        let value = match modulus.eval(arg as Nat) {
            Ok(v) if v <= budget as Nat => v as u64,
            Ok(_) | Err(_) => {
                if modulus.is_nondecreasing() {
                    out.skipped += budget - arg + 1;
                    return;
                }
                out.skipped += 1;
                continue;
            }
        };
        out.checked += 1;
        if let Some(w) = check(arg, value) {
            out.failure = Some(w);
            return;
        }
    }
}

/// Suffix sums of `terms(i)` for `i < len`.
fn suffix_sums(terms: &dyn Fn(u64) -> f64, len: u64) -> Vec<f64> {
    let mut suffix = alloc::vec![0.0; len as usize + 1];
    for i in (0..len).rev() {
        suffix[i as usize] = suffix[i as usize + 1] + terms(i);
    }
    suffix
}

/// Checks `modulus` as a Cauchy modulus of `Σ terms(i)`: every window
/// `Σ_{i=n+1}^{n+p} terms(i)` with `n ≥ modulus(k)`, `p ≤ budget` is at most
/// `1/(k+1)`. The terms must be nonnegative.
pub(crate) fn check_series_cauchy(
    out: &mut ModulusCheck,
    modulus: &Modulus,
    terms: &dyn Fn(u64) -> f64,
    budget: u64,
) {
    let suffix = suffix_sums(terms, 2 * budget + 2);
    sweep(out, modulus, budget, |k, n| {
        let tail = suffix[n as usize + 1] - suffix[(n + 1 + budget) as usize];
        let bound = 1.0 / (k as f64 + 1.0);
        (!le_rel(tail, bound)).then(|| Witness {
            n: Some(n),
            lhs: tail,
            rhs: bound,
            detail: format!("k={k}: tail sum over ({n}, {}] exceeds 1/(k+1)", n + budget),
        })
    });
}

fn check_cauchy(out: &mut ModulusCheck, modulus: &Modulus, seq: &dyn Fn(u64) -> f64, budget: u64) {
    check_series_cauchy(out, modulus, &|i| libm::fabs(seq(i + 1) - seq(i)), budget);
}

/// Checks `modulus` as a rate of divergence of `Σ terms(i)`:
/// `Σ_{i=0}^{modulus(n)} terms(i) ≥ n`.
pub(crate) fn check_divergence(
    out: &mut ModulusCheck,
    modulus: &Modulus,
    terms: &dyn Fn(u64) -> f64,
    budget: u64,
) {
    let mut prefix = Vec::with_capacity(budget as usize + 1);
    let mut acc = 0.0;
    for i in 0..=budget {
        acc += terms(i);
        prefix.push(acc);
    }
    sweep(out, modulus, budget, |n, m| {
        let sum = prefix[m as usize];
        (!le_rel(n as f64, sum)).then(|| Witness {
            n: Some(m),
            lhs: sum,
            rhs: n as f64,
            detail: format!("partial sum through index {m} = modulus({n}) is below {n}"),
        })
    });
}

/// Brute-force validation of every modulus the schedule carries, for all
/// arguments whose modulus value fits in `budget`.
pub fn verify_moduli(schedule: &Schedule, budget: u64) -> ModulusReport {
    let budget = budget.max(1);
    let alpha = |n: u64| schedule.alpha(n);
    let beta = |n: u64| schedule.beta(n);
    let mut checks = Vec::new();

    let mut range = ModulusCheck::new("range", true);
    for n in 0..=budget {
        range.checked += 1;
        let (a, b) = (alpha(n), beta(n));
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            range.failure = Some(Witness {
                n: Some(n),
                lhs: a,
                rhs: b,
                detail: format!("alpha_{n}={a}, beta_{n}={b}"),
            });
            break;
        }
    }
    checks.push(range);

    let mut c1 = ModulusCheck::new("sigma1", schedule.sigma1.is_some());
    if let Some(s1) = &schedule.sigma1 {
        // suffix maxima of α over [n, budget], with the index attaining them
        let mut best = alloc::vec![(0.0f64, 0u64); budget as usize + 2];
        best[budget as usize + 1] = (f64::NEG_INFINITY, budget);
        for n in (0..=budget).rev() {
            let next = best[n as usize + 1];
            let a = alpha(n);
            best[n as usize] = if a >= next.0 { (a, n) } else { next };
        }
        sweep(&mut c1, s1, budget, |k, start| {
            let (value, n) = best[start as usize];
            let bound = 1.0 / (k as f64 + 1.0);
            (!le_rel(value, bound)).then(|| Witness {
                n: Some(n),
                lhs: value,
                rhs: bound,
                detail: format!("k={k}: alpha_{n} > 1/(k+1) although n >= sigma1(k) = {start}"),
            })
        });
    }
    checks.push(c1);

    let mut c2 = ModulusCheck::new("sigma2", schedule.sigma2.is_some());
    if let Some(s2) = &schedule.sigma2 {
        check_divergence(&mut c2, s2, &alpha, budget);
    }
    checks.push(c2);

    let mut c3 = ModulusCheck::new("sigma3", schedule.sigma3.is_some());
    if let Some(s3) = &schedule.sigma3 {
        check_cauchy(&mut c3, s3, &alpha, budget);
    }
    checks.push(c3);

    let mut c4 = ModulusCheck::new("sigma4", schedule.sigma4.is_some());
    if let Some(s4) = &schedule.sigma4 {
        check_cauchy(&mut c4, s4, &beta, budget);
    }
    checks.push(c4);

    let mut q5 = ModulusCheck::new("lambda", schedule.lambda.is_some());
    if let Some(lambda) = schedule.lambda {
        if lambda < 2 {
            q5.failure = Some(Witness {
                n: None,
                lhs: lambda as f64,
                rhs: 2.0,
                detail: "Lambda must be at least 2".into(),
            });
        } else {
            let inv = 1.0 / lambda as f64;
            for n in 0..=budget {
                q5.checked += 1;
                let b = beta(n);
                if !le_rel(inv, b) || !le_rel(b, 1.0 - inv) {
                    q5.failure = Some(Witness {
                        n: Some(n),
                        lhs: b,
                        rhs: inv,
                        detail: format!("beta_{n} = {b} outside [1/{lambda}, 1 - 1/{lambda}]"),
                    });
                    break;
                }
            }
        }
    }
    checks.push(q5);

    ModulusReport {
        schedule: schedule.label.clone(),
        budget,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_values() {
        let s = canonical_linear_schedule(0.5).unwrap();
        assert_eq!(s.lambda, Some(2));
        assert_eq!(s.sigma1.as_ref().unwrap().eval(3).unwrap(), 6);
        let s2 = s.sigma2.as_ref().unwrap();
        assert_eq!(s2.eval(0).unwrap(), 0);
        // e^10 = 22026.47
        assert_eq!(s2.eval(18).unwrap(), 22024);
        assert_eq!(s.alpha(0), 1.0);
        assert!(canonical_linear_schedule(1.0).is_err());
        assert!(canonical_linear_schedule(0.0).is_err());
        assert_eq!(lambda_for_beta(0.75).unwrap(), 4);
        assert_eq!(lambda_for_beta(0.9).unwrap(), 10);
        assert_eq!(lambda_for_beta(1.0 / 3.0).unwrap(), 3);
        assert_eq!(lambda_for_beta(2.0 / 3.0).unwrap(), 3);
        assert_eq!(lambda_for_beta(0.3).unwrap(), 4);
    }

    #[test]
    fn harmonic_values() {
        let s = harmonic_schedule(0.5).unwrap();
        assert_eq!(s.sigma1.as_ref().unwrap().eval(4).unwrap(), 4);
        assert_eq!(s.sigma2.as_ref().unwrap().eval(2).unwrap(), 6);
        assert_eq!(s.sigma3.as_ref().unwrap().eval(9).unwrap(), 9);
    }

    #[test]
    fn monotonize_examples() {
        let t = Modulus::table("t", ModulusKind::Rate, alloc::vec![5, 3, 7, 2]);
        let m = monotonize(&t);
        let got: Vec<Nat> = (0..4).map(|k| m.eval(k).unwrap()).collect();
        assert_eq!(got, [5, 5, 7, 7]);
        let f = Modulus::new("zigzag", ModulusKind::Rate, false, |k| {
            Ok(if k % 2 == 0 { k } else { 0 })
        });
        let mf = monotonize(&f);
        assert_eq!(mf.eval(5).unwrap(), 4);
        let lin = Modulus::affine("2k", ModulusKind::Rate, 2, 0);
        assert_eq!(monotonize(&lin).eval(10).unwrap(), 20);
    }

    #[test]
    fn builtin_schedules_pass() {
        for s in [
            canonical_linear_schedule(0.5).unwrap(),
            harmonic_schedule(0.3).unwrap(),
        ] {
            let r = verify_moduli(&s, 2000);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn wrong_sigma1_is_caught() {
        let s = canonical_linear_schedule(0.5)
            .unwrap()
            .with_sigma1(Modulus::constant("0", ModulusKind::RateOfConvergence, 0));
        let r = verify_moduli(&s, 100);
        let w = r.check("sigma1").unwrap().failure.clone().unwrap();
        assert_eq!(w.n, Some(0));
        assert!(w.detail.starts_with("k=1:"));
    }

    #[test]
    fn wrong_lambda_is_caught() {
        let s = canonical_linear_schedule(0.9).unwrap().with_lambda(2);
        let r = verify_moduli(&s, 10);
        assert!(!r.check("lambda").unwrap().passed());
        assert!(r.check("sigma1").unwrap().passed());
    }

    #[test]
    fn exponential_sigma2_is_skipped_past_budget() {
        let s = canonical_linear_schedule(0.5).unwrap();
        let r = verify_moduli(&s, 1000);
        let c = r.check("sigma2").unwrap();
        assert!(c.passed());
        // σ2(n) ≤ 1000 iff e^{(n+2)/2} ≤ 1003, i.e. n ≤ 11
        assert_eq!(c.checked, 12);
        assert_eq!(c.checked + c.skipped, 1001);
    }
}

//! Rates of (T- and U-) asymptotic regularity, evaluated in exact integer
//! arithmetic. Overflow is always reported, never wrapped.

use alloc::format;
use alloc::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::schedules::{lambda_for_beta, Modulus, ModulusKind, Schedule};
use crate::spaces::UcModulus;
use crate::Nat;

pub use crate::exact::ceil_ln;

fn mul(a: Nat, b: Nat) -> Result<Nat> {
    a.checked_mul(b).ok_or(Error::Overflow("rate arithmetic"))
}

fn add(a: Nat, b: Nat) -> Result<Nat> {
    a.checked_add(b).ok_or(Error::Overflow("rate arithmetic"))
}

fn mul_all(factors: &[Nat]) -> Result<Nat> {
    factors.iter().try_fold(1, |acc, &f| mul(acc, f))
}

/// `c·K·(k+1) - 1` for `c, K ≥ 1`, the argument pattern used throughout.
fn scaled_minus_one(c: Nat, big_k: Nat, k: Nat) -> Result<Nat> {
    Ok(mul_all(&[c, big_k, add(k, 1)?])? - 1)
}

fn ceil_ln_nat(x: Nat) -> Result<Nat> {
    let m = ceil_ln(x, 1)?;
    Ok(m.max(0) as Nat)
}

/// Everything the rate functions may consume. Each function reads only the
/// fields it needs and reports a capability error for missing ones.
#[derive(Clone, Debug)]
pub struct RateContext {
    /// Positive integer with `K ≥ M_p`.
    pub k: Nat,
    pub lambda: Option<Nat>,
    pub sigma1: Option<Modulus>,
    pub sigma2: Option<Modulus>,
    pub sigma3: Option<Modulus>,
    pub sigma4: Option<Modulus>,
    pub eta: Option<UcModulus>,
    /// Rate of asymptotic regularity of `(x_n)`.
    pub delta: Option<Modulus>,
}

impl RateContext {
    pub fn new(big_k: Nat) -> Result<Self> {
        if big_k == 0 {
            return Err(domain!("K must be a positive integer"));
        }
        Ok(RateContext {
            k: big_k,
            lambda: None,
            sigma1: None,
            sigma2: None,
            sigma3: None,
            sigma4: None,
            eta: None,
            delta: None,
        })
    }

    /// Copies `Λ` and `σ1`-`σ4` from a schedule.
    pub fn from_schedule(big_k: Nat, schedule: &Schedule) -> Result<Self> {
        let mut ctx = RateContext::new(big_k)?;
        ctx.lambda = schedule.lambda;
        ctx.sigma1 = schedule.sigma1.clone();
        ctx.sigma2 = schedule.sigma2.clone();
        ctx.sigma3 = schedule.sigma3.clone();
        ctx.sigma4 = schedule.sigma4.clone();
        Ok(ctx)
    }

    pub fn with_eta(mut self, eta: UcModulus) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_delta(mut self, delta: Modulus) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_lambda(mut self, lambda: Nat) -> Self {
        self.lambda = Some(lambda);
        self
    }

    fn need<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("rate context lacks {name}")))
    }

    fn sigma1(&self) -> Result<&Modulus> {
        Self::need(&self.sigma1, "sigma1")
    }
    fn sigma2(&self) -> Result<&Modulus> {
        Self::need(&self.sigma2, "sigma2")
    }
    fn sigma3(&self) -> Result<&Modulus> {
        Self::need(&self.sigma3, "sigma3")
    }
    fn sigma4(&self) -> Result<&Modulus> {
        Self::need(&self.sigma4, "sigma4")
    }
    fn delta(&self) -> Result<&Modulus> {
        Self::need(&self.delta, "Delta")
    }
    fn eta(&self) -> Result<&UcModulus> {
        Self::need(&self.eta, "a modulus of uniform convexity")
    }
    fn lambda(&self) -> Result<Nat> {
        let l = *Self::need(&self.lambda, "Lambda")?;
        if l < 2 {
            return Err(domain!("Lambda must be at least 2, got {l}"));
        }
        Ok(l)
    }
}

/// Rate of convergence of `s_n → 0` for `s_{n+1} ≤ (1-a_n)s_n + c_n`, given a
/// rate of divergence `θ` of `Σ a_n`, a Cauchy modulus `χ` of `Σ c_n` and an
/// integer bound `L ≥ 1` on `(s_n)`:
/// `Σ(k) = θ(χ(2k+1) + 1 + ⌈ln(2L(k+1))⌉) + 1`.
pub fn qxu_rate(theta: &Modulus, chi: &Modulus, bound: Nat, k: Nat) -> Result<Nat> {
    if bound == 0 {
        return Err(domain!("the bound L must be at least 1"));
    }
    let log = ceil_ln_nat(mul_all(&[2, bound, add(k, 1)?])?)?;
    let inner = add(add(chi.eval(add(mul(2, k)?, 1)?)?, 1)?, log)?;
    add(theta.eval(inner)?, 1)
}

/// `JL / (γ(n+J))`.
pub fn sabach_bound(bound: f64, j: u64, gamma: f64, n: u64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(domain!("gamma must lie in (0, 1], got {gamma}"));
    }
    if j < 2 {
        return Err(domain!("J must be at least 2, got {j}"));
    }
    if !(bound > 0.0) {
        return Err(domain!("L must be positive, got {bound}"));
    }
    Ok(j as f64 * bound / (gamma * (n as f64 + j as f64)))
}

/// `χ(k) = max{σ3(4K(k+1)-1), σ4(4K(k+1)-1)}`.
pub fn chi(ctx: &RateContext, k: Nat) -> Result<Nat> {
    let arg = scaled_minus_one(4, ctx.k, k)?;
    Ok(ctx.sigma3()?.eval(arg)?.max(ctx.sigma4()?.eval(arg)?))
}

/// Rate of asymptotic regularity of `(x_n)` under the divergence and
/// Cauchy hypotheses:
/// `Γ1(k) = σ2(χ(2k+1) + 2 + ⌈ln(4K(k+1))⌉) + 1`.
pub fn gamma1(ctx: &RateContext, k: Nat) -> Result<Nat> {
    let log = ceil_ln_nat(mul_all(&[4, ctx.k, add(k, 1)?])?)?;
    let inner = add(add(chi(ctx, add(mul(2, k)?, 1)?)?, 2)?, log)?;
    add(ctx.sigma2()?.eval(inner)?, 1)
}

/// Rate of asymptotic regularity of `(y_n)`:
/// `Γ2(k) = max{Γ1(2k+1), σ3(4K(k+1)-1) + 1}`, which collapses to
/// `Γ1(2k+1)` when `σ3` is nondecreasing.
pub fn gamma2(ctx: &RateContext, k: Nat) -> Result<Nat> {
    let first = gamma1(ctx, add(mul(2, k)?, 1)?)?;
    let sigma3 = ctx.sigma3()?;
    if sigma3.is_nondecreasing() {
        return Ok(first);
    }
    Ok(first.max(add(sigma3.eval(scaled_minus_one(4, ctx.k, k)?)?, 1)?))
}

/// `Γ2` always in the two-term max form, regardless of monotonicity.
pub fn gamma2_max_form(ctx: &RateContext, k: Nat) -> Result<Nat> {
    let first = gamma1(ctx, add(mul(2, k)?, 1)?)?;
    Ok(first.max(add(ctx.sigma3()?.eval(scaled_minus_one(4, ctx.k, k)?)?, 1)?))
}

/// Linear rates for `α_n = 2/(n+2)`, constant `β`:
/// `(Σ1(k), Σ2(k)) = (4K(k+1) - 2, 4K(k+1) - 3)`.
pub fn linear_rates(big_k: Nat, k: Nat) -> Result<(Nat, Nat)> {
    if big_k == 0 {
        return Err(domain!("K must be a positive integer"));
    }
    let base = mul_all(&[4, big_k, add(k, 1)?])?;
    Ok((base - 2, base - 3))
}

/// How the constant `P` inside `Γ3` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PSource {
    /// `P = ⌈Λ² / η(K, 1/(K(k+1)))⌉`.
    Eta,
    /// `P̃ = ⌈Λ² / η̃(K, 1/(K(k+1)))⌉` for factored moduli.
    EtaTilde,
    /// `P0 = 8KΛ²(k+1)` (CAT(0)).
    Cat0,
}

/// Evaluates the UCW family `Γ3` (or its variants), `Ω`, `Γ4`, `Γ5`, `Γ6`
/// for one choice of `P`. `P` is recomputed at the argument of every `Γ3`
/// occurrence.
#[derive(Clone, Copy, Debug)]
pub struct UcwFamily<'a> {
    ctx: &'a RateContext,
    source: PSource,
}

impl<'a> UcwFamily<'a> {
    pub fn new(ctx: &'a RateContext, source: PSource) -> Self {
        UcwFamily { ctx, source }
    }

    pub fn p(&self, k: Nat) -> Result<Nat> {
        let lambda = self.ctx.lambda()?;
        match self.source {
            PSource::Eta => self.ctx.eta()?.ceil_ratio(lambda, self.ctx.k, k, false),
            PSource::EtaTilde => {
                let eta = self.ctx.eta()?;
                if !eta.has_tilde() {
                    return Err(Error::Unsupported(format!(
                        "modulus {} has no factored form",
                        eta.label()
                    )));
                }
                eta.ceil_ratio(lambda, self.ctx.k, k, true)
            }
            PSource::Cat0 => mul_all(&[8, self.ctx.k, lambda, lambda, add(k, 1)?]),
        }
    }

    /// `max{Δ(2P(k+1) - 1), σ1(2PK(k+1) - 1)}`.
    pub fn gamma3(&self, k: Nat) -> Result<Nat> {
        let p = self.p(k)?;
        let k1 = add(k, 1)?;
        let d = self.ctx.delta()?.eval(mul_all(&[2, p, k1])? - 1)?;
        let s = self
            .ctx
            .sigma1()?
            .eval(mul_all(&[2, p, self.ctx.k, k1])? - 1)?;
        Ok(d.max(s))
    }

    /// `Ω(k) = max{Δ(2k+1), Γ3(2k+1)}`.
    pub fn omega(&self, k: Nat) -> Result<Nat> {
        let arg = add(mul(2, k)?, 1)?;
        Ok(self.ctx.delta()?.eval(arg)?.max(self.gamma3(arg)?))
    }

    /// `Γ4(k) = max{Ω(2k+1), σ1(4K(k+1) - 1)}`.
    pub fn gamma4(&self, k: Nat) -> Result<Nat> {
        let arg = add(mul(2, k)?, 1)?;
        Ok(self.omega(arg)?.max(
            self.ctx
                .sigma1()?
                .eval(scaled_minus_one(4, self.ctx.k, k)?)?,
        ))
    }

    /// `Γ5(k) = max{Ω(4k+3), Γ3(2k+1)}`.
    pub fn gamma5(&self, k: Nat) -> Result<Nat> {
        let far = add(mul(4, k)?, 3)?;
        Ok(self.omega(far)?.max(self.gamma3(add(mul(2, k)?, 1)?)?))
    }

    /// `Γ6(k) = max{Ω(4k+3), Γ4(2k+1)}`.
    pub fn gamma6(&self, k: Nat) -> Result<Nat> {
        let far = add(mul(4, k)?, 3)?;
        Ok(self.omega(far)?.max(self.gamma4(add(mul(2, k)?, 1)?)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UcwRates {
    pub p: Nat,
    pub gamma3: Nat,
    pub omega: Nat,
    pub gamma4: Nat,
    pub gamma5: Nat,
    pub gamma6: Nat,
}

/// All UCW rates at `k` with `P` computed from `η`.
pub fn ucw_rates(ctx: &RateContext, k: Nat) -> Result<UcwRates> {
    ucw_rates_with(ctx, PSource::Eta, k)
}

pub fn ucw_rates_with(ctx: &RateContext, source: PSource, k: Nat) -> Result<UcwRates> {
    let f = UcwFamily::new(ctx, source);
    Ok(UcwRates {
        p: f.p(k)?,
        gamma3: f.gamma3(k)?,
        omega: f.omega(k)?,
        gamma4: f.gamma4(k)?,
        gamma5: f.gamma5(k)?,
        gamma6: f.gamma6(k)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TildeRates {
    pub p_tilde: Nat,
    pub gamma3_tilde: Nat,
}

/// `Γ̃3` for moduli of the form `η = ε η̃` with `η̃` nondecreasing in `ε`.
pub fn ucw_rates_tilde(ctx: &RateContext, k: Nat) -> Result<TildeRates> {
    let f = UcwFamily::new(ctx, PSource::EtaTilde);
    Ok(TildeRates {
        p_tilde: f.p(k)?,
        gamma3_tilde: f.gamma3(k)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cat0Rates {
    pub p0: Nat,
    pub gamma0: Nat,
}

/// `Γ0(k) = max{Δ(2P0(k+1) - 1), σ1(2P0 K(k+1) - 1)}` with `P0 = 8KΛ²(k+1)`.
pub fn cat0_rates(
    big_k: Nat,
    lambda: Nat,
    delta: &Modulus,
    sigma1: &Modulus,
    k: Nat,
) -> Result<Cat0Rates> {
    let mut ctx = RateContext::new(big_k)?
        .with_lambda(lambda)
        .with_delta(delta.clone());
    ctx.sigma1 = Some(sigma1.clone());
    let f = UcwFamily::new(&ctx, PSource::Cat0);
    Ok(Cat0Rates {
        p0: f.p(k)?,
        gamma0: f.gamma3(k)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticRates {
    pub lambda: Nat,
    pub sigma3: Nat,
    pub theta: Nat,
    pub sigma4: Nat,
    pub sigma5: Nat,
}

impl QuadraticRates {
    /// `2^e K² Λ² (k+1)² - 2` for `e = 6, 8, 10, 12`.
    pub fn from_lambda(big_k: Nat, lambda: Nat, k: Nat) -> Result<Self> {
        if big_k == 0 || lambda < 2 {
            return Err(domain!(
                "need K >= 1 and Lambda >= 2, got K={big_k}, Lambda={lambda}"
            ));
        }
        let core = mul_all(&[big_k, big_k, lambda, lambda, add(k, 1)?, add(k, 1)?])?;
        let at = |e: u32| mul(1 << e, core).map(|v| v - 2);
        Ok(QuadraticRates {
            lambda,
            sigma3: at(6)?,
            theta: at(8)?,
            sigma4: at(10)?,
            sigma5: at(12)?,
        })
    }
}

/// Quadratic CAT(0) rates for `α_n = 2/(n+2)`, `β_n ≡ β`.
pub fn quadratic_rates(big_k: Nat, beta: f64, k: Nat) -> Result<QuadraticRates> {
    QuadraticRates::from_lambda(big_k, lambda_for_beta(beta)?, k)
}

// Rate functions packaged as moduli, for use as `Δ` or in rate claims.

pub fn sigma1_rate(big_k: Nat) -> Modulus {
    Modulus::new("Σ1", ModulusKind::Rate, true, move |k| {
        linear_rates(big_k, k).map(|r| r.0)
    })
}

pub fn sigma2_rate(big_k: Nat) -> Modulus {
    Modulus::new("Σ2", ModulusKind::Rate, true, move |k| {
        linear_rates(big_k, k).map(|r| r.1)
    })
}

pub fn gamma1_rate(ctx: &RateContext) -> Modulus {
    let ctx = Arc::new(ctx.clone());
    let nondecreasing = [&ctx.sigma2, &ctx.sigma3, &ctx.sigma4]
        .iter()
        .all(|m| m.as_ref().is_some_and(Modulus::is_nondecreasing));
    Modulus::new("Γ1", ModulusKind::Rate, nondecreasing, move |k| {
        gamma1(&ctx, k)
    })
}

pub fn gamma2_rate(ctx: &RateContext) -> Modulus {
    let nondecreasing = gamma1_rate(ctx).is_nondecreasing();
    let ctx = Arc::new(ctx.clone());
    Modulus::new("Γ2", ModulusKind::Rate, nondecreasing, move |k| {
        gamma2(&ctx, k)
    })
}

/// Which member of the UCW family to package.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcwRate {
    Gamma3,
    Omega,
    Gamma4,
    Gamma5,
    Gamma6,
}

pub fn ucw_rate(ctx: &RateContext, source: PSource, which: UcwRate, label: &str) -> Modulus {
    let nondecreasing = [&ctx.sigma1, &ctx.delta]
        .iter()
        .all(|m| m.as_ref().is_some_and(Modulus::is_nondecreasing));
    let ctx = Arc::new(ctx.clone());
    Modulus::new(label, ModulusKind::Rate, nondecreasing, move |k| {
        let f = UcwFamily::new(&ctx, source);
        match which {
            UcwRate::Gamma3 => f.gamma3(k),
            UcwRate::Omega => f.omega(k),
            UcwRate::Gamma4 => f.gamma4(k),
            UcwRate::Gamma5 => f.gamma5(k),
            UcwRate::Gamma6 => f.gamma6(k),
        }
    })
}

/// Which quadratic CAT(0) rate to package.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticRate {
    Sigma3,
    Theta,
    Sigma4,
    Sigma5,
}

pub fn quadratic_rate(big_k: Nat, lambda: Nat, which: QuadraticRate) -> Modulus {
    let label = match which {
        QuadraticRate::Sigma3 => "Σ3",
        QuadraticRate::Theta => "Θ",
        QuadraticRate::Sigma4 => "Σ4",
        QuadraticRate::Sigma5 => "Σ5",
    };
    Modulus::new(label, ModulusKind::Rate, true, move |k| {
        let q = QuadraticRates::from_lambda(big_k, lambda, k)?;
        Ok(match which {
            QuadraticRate::Sigma3 => q.sigma3,
            QuadraticRate::Theta => q.theta,
            QuadraticRate::Sigma4 => q.sigma4,
            QuadraticRate::Sigma5 => q.sigma5,
        })
    })
}

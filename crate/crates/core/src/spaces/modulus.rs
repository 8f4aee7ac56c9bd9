use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::Nat;

type EtaFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A modulus of uniform convexity `η(r, ε)`, possibly in the factored form
/// `η(r, ε) = ε · η̃(r, ε)` with `η̃` nondecreasing in `ε`.
#[derive(Clone)]
pub enum UcModulus {
    /// CAT(0): `η = ε²/8`, `η̃ = ε/8`.
    Cat0,
    /// Clarkson-type modulus of `ℓ_p`, `p ≥ 2`: `η = ε^p / (p 2^p)`,
    /// `η̃ = ε^{p-1} / (p 2^p)`.
    Power { p: f64 },
    /// Constant `η ≡ c`, no factored form.
    Constant(f64),
    /// Arbitrary modulus given as floating-point closures.
    Custom {
        label: String,
        eta: EtaFn,
        eta_tilde: Option<EtaFn>,
    },
}

impl fmt::Debug for UcModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl UcModulus {
    pub fn label(&self) -> String {
        match self {
            UcModulus::Cat0 => "eps^2/8".into(),
            UcModulus::Power { p } => alloc::format!("eps^{p}/({p}*2^{p})"),
            UcModulus::Constant(c) => alloc::format!("const {c}"),
            UcModulus::Custom { label, .. } => label.clone(),
        }
    }

    /// `η(r, ε)` without range checks.
    pub fn eval(&self, r: f64, eps: f64) -> f64 {
        match self {
            UcModulus::Cat0 => eps * eps / 8.0,
            UcModulus::Power { p } => libm::pow(eps, *p) / (p * libm::pow(2.0, *p)),
            UcModulus::Constant(c) => *c,
            UcModulus::Custom { eta, .. } => eta(r, eps),
        }
    }

    /// `η(r, ε)` for `r > 0`, `ε ∈ (0, 2]`.
    pub fn eval_checked(&self, r: f64, eps: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain!("modulus radius must be positive, got {r}"));
        }
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(domain!("modulus epsilon must lie in (0, 2], got {eps}"));
        }
        Ok(self.eval(r, eps))
    }

    pub fn has_tilde(&self) -> bool {
        match self {
            UcModulus::Cat0 | UcModulus::Power { .. } => true,
            UcModulus::Constant(_) => false,
            UcModulus::Custom { eta_tilde, .. } => eta_tilde.is_some(),
        }
    }

    /// `η̃(r, ε)` when the modulus has the factored form.
    pub fn eval_tilde(&self, r: f64, eps: f64) -> Option<f64> {
        match self {
            UcModulus::Cat0 => Some(eps / 8.0),
            UcModulus::Power { p } => Some(libm::pow(eps, p - 1.0) / (p * libm::pow(2.0, *p))),
            UcModulus::Constant(_) => None,
            UcModulus::Custom { eta_tilde, .. } => eta_tilde.as_ref().map(|f| f(r, eps)),
        }
    }

    /// Integer exponent when the modulus is a monomial `ε^p / (p 2^p)`.
    fn integer_power(&self) -> Option<u32> {
        match *self {
            UcModulus::Cat0 => Some(2),
            UcModulus::Power { p } if (2.0..=64.0).contains(&p) && p == libm::floor(p) => {
                Some(p as u32)
            }
            _ => None,
        }
    }

    /// `⌈Λ² / η(K, 1/(K(k+1)))⌉`, or the same with `η̃` when `tilde` is set.
    ///
    /// Exact for monomial moduli; otherwise the quotient is rounded outward
    /// so the result never under-approximates.
    pub fn ceil_ratio(&self, lambda: Nat, big_k: Nat, k: Nat, tilde: bool) -> Result<Nat> {
        let lam_sq = lambda.checked_mul(lambda).ok_or(Error::Overflow("Λ²"))?;
        let scale = big_k.checked_mul(k + 1).ok_or(Error::Overflow("K(k+1)"))?;
        if let Some(p) = self.integer_power() {
            // 1/η = p 2^p m^p and 1/η̃ = p 2^p m^{p-1}, with m = K(k+1).
            let exp = if tilde { p - 1 } else { p };
            let m_pow = scale
                .checked_pow(exp)
                .ok_or(Error::Overflow("(K(k+1))^p"))?;
            let coeff = (p as Nat).checked_mul(1u128.checked_shl(p).ok_or(Error::Overflow("2^p"))?);
            return coeff
                .and_then(|c| c.checked_mul(m_pow))
                .and_then(|v| v.checked_mul(lam_sq))
                .ok_or(Error::Overflow("P"));
        }
        let eps = 1.0 / scale as f64;
        let value = if tilde {
            self.eval_tilde(big_k as f64, eps)
                .ok_or_else(|| Error::Unsupported("modulus has no factored form".into()))?
        } else {
            self.eval(big_k as f64, eps)
        };
        if !(value > 0.0) || !value.is_finite() {
            return Err(domain!("modulus value {value} is not positive"));
        }
        let quotient = next_up(next_up(lam_sq as f64 / next_down(value)));
        if quotient >= 3.0e38 {
            return Err(Error::Overflow("P"));
        }
        Ok(libm::ceil(quotient) as Nat)
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

//! The named rates that apply to a problem, and the quantities they govern.

use std::collections::BTreeMap;

use halmann_core::iterate::IterationProblem;
use halmann_core::rates::{
    gamma1_rate, gamma2_rate, quadratic_rate, sigma1_rate, sigma2_rate, ucw_rate, PSource,
    QuadraticRate, RateContext, UcwRate,
};
use halmann_core::schedules::Family;
use halmann_core::verify::{Quantity, RateClaim};
use halmann_core::{Modulus, ModulusKind, Nat};

use crate::config::ModulusSpec;

/// Every rate name with its ASCII alias and the quantities it bounds.
pub const RATE_NAMES: [(&str, &str, &[Quantity]); 15] = [
    ("Γ1", "Gamma1", &[Quantity::DXx]),
    ("Γ2", "Gamma2", &[Quantity::DYy]),
    ("Σ1", "Sigma1", &[Quantity::DXx]),
    ("Σ2", "Sigma2", &[Quantity::DYy]),
    ("Γ3", "Gamma3", &[Quantity::DUy]),
    ("Γ̃3", "Gamma3_tilde", &[Quantity::DUy]),
    ("Ω", "Omega", &[Quantity::DXy]),
    ("Γ4", "Gamma4", &[Quantity::DTy]),
    ("Γ5", "Gamma5", &[Quantity::DUx]),
    ("Γ6", "Gamma6", &[Quantity::DTx]),
    ("Γ0", "Gamma0", &[Quantity::DUy]),
    ("Σ3", "Sigma3", &[Quantity::DUy]),
    ("Θ", "Theta", &[Quantity::DXy]),
    ("Σ4", "Sigma4", &[Quantity::DTy]),
    ("Σ5", "Sigma5", &[Quantity::DTx, Quantity::DUx]),
];

/// Rates that only hold in CAT(0) spaces.
pub const CAT0_ONLY: [&str; 5] = ["Γ0", "Σ3", "Θ", "Σ4", "Σ5"];

/// Resolves an ASCII alias to the canonical name.
pub fn canonical_name(name: &str) -> Option<&'static str> {
    RATE_NAMES
        .iter()
        .find(|(g, a, _)| *g == name || a.eq_ignore_ascii_case(name))
        .map(|(g, _, _)| *g)
}

fn quantities(name: &str) -> &'static [Quantity] {
    RATE_NAMES
        .iter()
        .find(|(g, _, _)| *g == name)
        .map(|(_, _, q)| *q)
        .unwrap_or(&[])
}

/// The applicable rates of a problem, keyed by canonical name, plus the
/// reason each inapplicable one was left out.
pub struct Catalog {
    pub rates: Vec<(&'static str, Modulus)>,
    pub missing: BTreeMap<&'static str, String>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Option<&Modulus> {
        self.rates.iter().find(|(n, _)| *n == name).map(|(_, m)| m)
    }

    /// One claim per (rate, governed quantity).
    pub fn claims(&self) -> Vec<RateClaim> {
        let mut out = Vec::new();
        for (name, m) in &self.rates {
            for &q in quantities(name) {
                out.push(RateClaim::new(q, m.clone()).with_label(format!("{q} by {name}")));
            }
        }
        out
    }

    /// Keeps only the requested rates; unknown or inapplicable names are
    /// configuration errors.
    pub fn restrict(&mut self, requested: &[String]) -> anyhow::Result<()> {
        let mut keep = Vec::new();
        for r in requested {
            let name = canonical_name(r).ok_or_else(|| anyhow::anyhow!("unknown rate {r:?}"))?;
            if self.get(name).is_none() {
                let why = self.missing.get(name).cloned().unwrap_or_default();
                anyhow::bail!("rate {name} does not apply to this configuration: {why}");
            }
            keep.push(name);
        }
        self.rates.retain(|(n, _)| keep.contains(n));
        Ok(())
    }
}

/// Collects every rate whose hypotheses the problem declares, applying
/// `overrides` (keyed by canonical name or alias) last.
pub fn catalog(
    problem: &IterationProblem,
    overrides: &BTreeMap<String, ModulusSpec>,
) -> anyhow::Result<Catalog> {
    let big_k = problem.k_bound()?;
    let schedule = &problem.schedule;
    let space = &problem.space;
    let canonical = matches!(schedule.family, Family::CanonicalLinear { .. });
    let mut rates: Vec<(&'static str, Modulus)> = Vec::new();
    let mut missing = BTreeMap::new();
    let ctx = RateContext::from_schedule(big_k, schedule)?;

    let general =
        schedule.sigma2.is_some() && schedule.sigma3.is_some() && schedule.sigma4.is_some();
    if general {
        rates.push(("Γ1", gamma1_rate(&ctx)));
        rates.push(("Γ2", gamma2_rate(&ctx)));
    } else {
        for n in ["Γ1", "Γ2"] {
            missing.insert(
                n,
                "the schedule lacks one of sigma2, sigma3, sigma4".to_string(),
            );
        }
    }
    if canonical {
        rates.push(("Σ1", sigma1_rate(big_k)));
        rates.push(("Σ2", sigma2_rate(big_k)));
    } else {
        for n in ["Σ1", "Σ2", "Σ3", "Θ", "Σ4", "Σ5"] {
            missing.insert(n, "needs alpha_n = 2/(n+2) and constant beta".to_string());
        }
    }

    // Δ: the linear rate when available, the general one otherwise
    let delta = rates
        .iter()
        .find(|(n, _)| *n == "Σ1")
        .or_else(|| rates.iter().find(|(n, _)| *n == "Γ1"))
        .map(|(_, m)| m.clone());
    let ucw_ready = ctx.sigma1.is_some() && ctx.lambda.is_some() && delta.is_some();
    let ucw_names = ["Γ3", "Γ̃3", "Ω", "Γ4", "Γ5", "Γ6", "Γ0"];
    match (space.modulus(), ucw_ready) {
        (Some(eta), true) => {
            let ctx = ctx
                .clone()
                .with_eta(eta.clone())
                .with_delta(delta.clone().expect("checked"));
            for (name, which) in [
                ("Γ3", UcwRate::Gamma3),
                ("Ω", UcwRate::Omega),
                ("Γ4", UcwRate::Gamma4),
                ("Γ5", UcwRate::Gamma5),
                ("Γ6", UcwRate::Gamma6),
            ] {
                rates.push((name, ucw_rate(&ctx, PSource::Eta, which, name)));
            }
            if eta.has_tilde() {
                rates.push((
                    "Γ̃3",
                    ucw_rate(&ctx, PSource::EtaTilde, UcwRate::Gamma3, "Γ̃3"),
                ));
            } else {
                missing.insert("Γ̃3", "the modulus has no factored form".into());
            }
            if space.is_cat0() {
                rates.push(("Γ0", ucw_rate(&ctx, PSource::Cat0, UcwRate::Gamma3, "Γ0")));
            }
        }
        (None, _) => {
            for n in ucw_names {
                missing.insert(
                    n,
                    "the space declares no modulus of uniform convexity".into(),
                );
            }
        }
        (_, false) => {
            for n in ucw_names {
                missing.insert(
                    n,
                    "needs sigma1, Lambda and a rate for d(x_n, x_{n+1})".into(),
                );
            }
        }
    }
    if !space.is_cat0() {
        for n in CAT0_ONLY {
            missing.insert(n, format!("{} is not a CAT(0) space", space.name()));
        }
    } else if canonical {
        let lambda = schedule
            .lambda
            .ok_or_else(|| anyhow::anyhow!("canonical schedule without Lambda"))?;
        for (name, which) in [
            ("Σ3", QuadraticRate::Sigma3),
            ("Θ", QuadraticRate::Theta),
            ("Σ4", QuadraticRate::Sigma4),
            ("Σ5", QuadraticRate::Sigma5),
        ] {
            rates.push((name, quadratic_rate(big_k, lambda, which)));
        }
    }

    for (key, spec) in overrides {
        let name = canonical_name(key)
            .ok_or_else(|| anyhow::anyhow!("rate override for unknown rate {key:?}"))?;
        let replacement = spec.build(&format!("{name} (override)"), ModulusKind::Rate);
        match rates.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = replacement,
            None => {
                missing.remove(name);
                rates.push((name, replacement));
            }
        }
    }
    Ok(Catalog { rates, missing })
}

/// Evaluates every catalog rate for `k ≤ k_max`. Values that cannot be
/// represented are `None`.
pub fn rate_table(
    catalog: &Catalog,
    k_max: u64,
) -> anyhow::Result<BTreeMap<u64, BTreeMap<String, Option<Nat>>>> {
    let mut table = BTreeMap::new();
    for k in 0..=k_max {
        let mut row = BTreeMap::new();
        for (name, m) in &catalog.rates {
            let v = match m.eval(k as Nat) {
                Ok(v) => Some(v),
                Err(e) if e.is_beyond_budget() => None,
                Err(e) => return Err(e.into()),
            };
            row.insert((*name).to_string(), v);
        }
        table.insert(k, row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use halmann_core::benchmarks;

    #[test]
    fn real_line_catalog() {
        let cat = catalog(&benchmarks::real_line().unwrap(), &BTreeMap::new()).unwrap();
        let names: Vec<&str> = cat.rates.iter().map(|(n, _)| *n).collect();
        for n in [
            "Γ1", "Γ2", "Σ1", "Σ2", "Γ3", "Γ̃3", "Ω", "Γ4", "Γ5", "Γ6", "Γ0", "Σ3", "Θ", "Σ4", "Σ5",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        let table = rate_table(&cat, 1).unwrap();
        assert_eq!(table[&0]["Σ3"], Some(254));
        assert_eq!(table[&0]["Σ1"], Some(2));
        assert_eq!(table[&0]["Γ1"], Some(22025));
        assert_eq!(table[&0]["Γ0"], Some(254));
        assert_eq!(cat.claims().len(), 16);
    }

    #[test]
    fn lp_catalog_excludes_cat0_rates() {
        let mut cat = catalog(&benchmarks::lp4().unwrap(), &BTreeMap::new()).unwrap();
        assert!(cat.get("Σ3").is_none());
        assert!(cat.get("Γ3").is_some());
        assert!(cat
            .restrict(&["Sigma3".into()])
            .unwrap_err()
            .to_string()
            .contains("CAT(0)"));
        assert!(cat.restrict(&["nonsense".into()]).is_err());
    }

    #[test]
    fn overrides_replace_rates() {
        let mut o = BTreeMap::new();
        o.insert("Sigma1".to_string(), ModulusSpec::Affine { a: 0, b: 0 });
        let cat = catalog(&benchmarks::real_line().unwrap(), &o).unwrap();
        assert_eq!(cat.get("Σ1").unwrap().eval(7).unwrap(), 0);
    }
}

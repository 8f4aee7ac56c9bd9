use alloc::format;
use alloc::string::String;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{unit, Point, Space};
use crate::error::{Error, Result};
use crate::report::{AxiomReport, Recorder};

pub(crate) const W_AXIOMS: [&str; 7] = ["W1", "W2", "W3", "W4", "W5", "W6", "W7"];

/// λ draws hit the endpoints a tenth of the time each.
fn sample_lambda(rng: &mut dyn RngCore) -> f64 {
    let u = unit(rng);
    if u < 0.1 {
        0.0
    } else if u < 0.2 {
        1.0
    } else {
        unit(rng)
    }
}

struct Sample<'a> {
    x: &'a Point,
    y: &'a Point,
    z: &'a Point,
    w: &'a Point,
    lambda: f64,
    mu: f64,
}

impl Sample<'_> {
    fn describe(&self) -> String {
        format!(
            "x={}, y={}, z={}, w={}, lambda={}, mu={}",
            self.x, self.y, self.z, self.w, self.lambda, self.mu
        )
    }
}

fn w_axioms_once(space: &dyn Space, s: &Sample<'_>, rec: &mut Recorder) -> Result<()> {
    let (x, y, z, w, l, m) = (s.x, s.y, s.z, s.w, s.lambda, s.mu);
    let d = |a: &Point, b: &Point| space.dist(a, b);
    let c = |a: &Point, b: &Point, t: f64| space.comb(a, b, t);

    let xy_l = c(x, y, l)?;
    let dxy = d(x, y)?;

    // (W1)
    let lhs = d(z, &xy_l)?;
    let rhs = (1.0 - l) * d(z, x)? + l * d(z, y)?;
    rec.le("W1", None, lhs, rhs, || s.describe());

    // (W2)
    let xy_m = c(x, y, m)?;
    rec.eq(
        "W2",
        None,
        d(&xy_l, &xy_m)?,
        libm::fabs(l - m) * dxy,
        || s.describe(),
    );

    // (W3): (1-λ)x + λy = λy + (1-λ)x
    let swapped = c(y, x, 1.0 - l)?;
    rec.eq("W3", None, d(&xy_l, &swapped)?, 0.0, || s.describe());

    // (W4)
    let lhs = d(&xy_l, &c(z, w, l)?)?;
    let lhs_alt = d(&c(x, z, l)?, &c(y, w, l)?)?;
    let rhs_alt = (1.0 - l) * dxy + l * d(z, w)?;
    rec.le("W4", None, lhs_alt, rhs_alt, || s.describe());
    let rhs = (1.0 - l) * d(x, z)? + l * d(y, w)?;
    rec.le("W4", None, lhs, rhs, || s.describe());

    // (W5)
    rec.eq("W5", None, d(&c(x, x, l)?, x)?, 0.0, || s.describe());

    // (W6): 1x + 0y = 0y + 1x = x
    rec.eq("W6", None, d(&c(x, y, 0.0)?, x)?, 0.0, || s.describe());
    rec.eq("W6", None, d(&c(y, x, 1.0)?, x)?, 0.0, || s.describe());

    // (W7)
    rec.eq("W7", None, d(x, &xy_l)?, l * dxy, || s.describe());
    rec.eq("W7", None, d(y, &xy_l)?, (1.0 - l) * dxy, || s.describe());
    Ok(())
}

/// Samples points and parameters and checks (W1)-(W7).
///
/// Inequalities get slack `tol`; equalities must hold within `tol`.
pub fn check_w_axioms(space: &dyn Space, n_samples: usize, seed: u64, tol: f64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new(space.name(), Some(seed), tol, &W_AXIOMS);
    rec.set_samples(n_samples as u64);
    for _ in 0..n_samples.max(1) {
        let (x, y, z, w) = (
            space.sample(&mut rng),
            space.sample(&mut rng),
            space.sample(&mut rng),
            space.sample(&mut rng),
        );
        let lambda = sample_lambda(&mut rng);
        let mu = sample_lambda(&mut rng);
        let s = Sample {
            x: &x,
            y: &y,
            z: &z,
            w: &w,
            lambda,
            mu,
        };
        if let Err(e) = w_axioms_once(space, &s, &mut rec) {
            rec.fail("evaluation", None, format!("{e} at {}", s.describe()));
        }
    }
    rec.finish()
}

pub(crate) const UCW_CHECKS: [&str; 5] = [
    "lemma",
    "uniform_convexity",
    "monotone_in_r",
    "range",
    "factored_form",
];

struct UcwDraw {
    x: Point,
    y: Point,
    a: Point,
    lambda: f64,
    r: f64,
    s: f64,
    eps: f64,
}

impl UcwDraw {
    fn describe(&self) -> String {
        format!(
            "x={}, y={}, a={}, lambda={}, r={}, s={}, eps={}",
            self.x, self.y, self.a, self.lambda, self.r, self.s, self.eps
        )
    }
}

/// Draws a configuration satisfying `d(x,a), d(y,a) ≤ r`, `d(x,y) ≥ εr`,
/// `s ≥ r`. Half of the draws are tight (`r`, `ε` or `s` at the boundary).
fn draw_ucw(space: &dyn Space, rng: &mut dyn RngCore) -> Result<UcwDraw> {
    loop {
        let a = space.sample(rng);
        let x = space.sample(rng);
        let y = space.sample(rng);
        let dxa = space.dist(&x, &a)?;
        let dya = space.dist(&y, &a)?;
        let dxy = space.dist(&x, &y)?;
        let r0 = dxa.max(dya);
        if r0 <= 0.0 || dxy <= 0.0 {
            continue;
        }
        let r = if unit(rng) < 0.5 {
            r0
        } else {
            r0 * (1.0 + 0.5 * unit(rng))
        };
        let eps_max = (dxy / r).min(2.0);
        let eps = if unit(rng) < 0.5 {
            eps_max
        } else {
            eps_max * (1.0 - unit(rng))
        };
        if eps <= 0.0 {
            continue;
        }
        let s = if unit(rng) < 0.5 {
            r
        } else {
            r * (1.0 + 3.0 * unit(rng))
        };
        let lambda = if unit(rng) < 0.2 { 0.5 } else { unit(rng) };
        return Ok(UcwDraw {
            x,
            y,
            a,
            lambda,
            r,
            s,
            eps,
        });
    }
}

/// Samples the hypotheses of the UCW distance lemma and checks
/// `d((1-λ)x + λy, a) ≤ (1 - 2λ(1-λ)η(s,ε)) r`, the defining
/// uniform-convexity implication at `λ = 1/2`, monotonicity of `η` in `r`,
/// the range `η ∈ (0, 1]` and, when present, the factored form
/// `η = ε η̃` with `η̃` nondecreasing in `ε`.
pub fn check_ucw_inequality(
    space: &dyn Space,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AxiomReport> {
    let modulus = space.modulus().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} has no modulus of uniform convexity",
            space.name()
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new(
        format!("{} / {}", space.name(), modulus.label()),
        Some(seed),
        tol,
        &UCW_CHECKS,
    );
    rec.set_samples(n_samples as u64);
    for _ in 0..n_samples.max(1) {
        let draw = match draw_ucw(space, &mut rng) {
            Ok(d) => d,
            Err(e) => {
                rec.fail("evaluation", None, format!("{e}"));
                continue;
            }
        };
        let UcwDraw {
            ref x,
            ref y,
            ref a,
            lambda,
            r,
            s,
            eps,
        } = draw;
        let eta_s = modulus.eval(s, eps);
        let eta_r = modulus.eval(r, eps);

        let lemma = space.comb(x, y, lambda).and_then(|p| space.dist(&p, a));
        let mid = space.comb(x, y, 0.5).and_then(|p| space.dist(&p, a));
        match (lemma, mid) {
            (Ok(lhs), Ok(mid)) => {
                let rhs = (1.0 - 2.0 * lambda * (1.0 - lambda) * eta_s) * r;
                rec.le("lemma", None, lhs, rhs, || draw.describe());
                rec.le("uniform_convexity", None, mid, (1.0 - eta_r) * r, || {
                    draw.describe()
                });
            }
            (Err(e), _) | (_, Err(e)) => {
                rec.fail("evaluation", None, format!("{e} at {}", draw.describe()))
            }
        }
        rec.le("monotone_in_r", None, eta_s, eta_r, || draw.describe());
        rec.record("range", eta_r > 0.0 && eta_r <= 1.0, || {
            crate::report::Witness {
                n: None,
                lhs: eta_r,
                rhs: 1.0,
                detail: draw.describe(),
            }
        });
        if let Some(tilde) = modulus.eval_tilde(r, eps) {
            rec.eq("factored_form", None, eta_r, eps * tilde, || {
                draw.describe()
            });
            let smaller = eps * unit(&mut rng);
            if smaller > 0.0 {
                let lower = modulus.eval_tilde(r, smaller).unwrap_or(f64::NAN);
                rec.le("factored_form", None, lower, tilde, || {
                    format!("{} eps'={smaller}", draw.describe())
                });
            }
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{CollapsedComb, Euclidean, Lp, SpiderTree, UcModulus, WithModulus};
    use alloc::sync::Arc;

    #[test]
    fn euclidean_and_tree_pass() {
        assert!(check_w_axioms(&Euclidean::new(3), 2000, 1, 1e-9).passed());
        assert!(check_w_axioms(&SpiderTree::new(4).unwrap(), 2000, 1, 1e-9).passed());
        assert!(check_w_axioms(&Lp::new(3, 4.0).unwrap(), 2000, 1, 1e-9).passed());
    }

    #[test]
    fn collapsed_comb_fails_w7() {
        let broken = CollapsedComb::new(Arc::new(Euclidean::new(2)));
        let report = check_w_axioms(&broken, 100, 1, 1e-9);
        let w7 = report.check("W7").unwrap();
        assert!(!w7.passed());
        assert!(w7.witness.is_some());
    }

    #[test]
    fn ucw_lemma_holds_and_fake_modulus_fails() {
        assert!(check_ucw_inequality(&Euclidean::new(2), 2000, 7, 1e-9)
            .unwrap()
            .passed());
        assert!(
            check_ucw_inequality(&SpiderTree::new(3).unwrap(), 2000, 7, 1e-9)
                .unwrap()
                .passed()
        );
        let fake = WithModulus::new(Arc::new(Euclidean::new(2)), UcModulus::Constant(0.9));
        let report = check_ucw_inequality(&fake, 2000, 7, 1e-9).unwrap();
        assert!(!report.check("lemma").unwrap().passed());
        assert!(report.check("lemma").unwrap().witness.is_some());
    }

    #[test]
    fn ucw_needs_modulus() {
        let broken = CollapsedComb::new(Arc::new(Euclidean::new(2)));
        assert!(matches!(
            check_ucw_inequality(&broken, 10, 1, 1e-9),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn reports_are_reproducible() {
        let s = SpiderTree::new(3).unwrap();
        assert_eq!(
            check_w_axioms(&s, 300, 9, 1e-9),
            check_w_axioms(&s, 300, 9, 1e-9)
        );
    }
}

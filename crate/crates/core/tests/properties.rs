use std::sync::Arc;

use halmann_core::benchmarks;
use halmann_core::exact::ceil_ln;
use halmann_core::iterate::run_hm;
use halmann_core::rates::{gamma1, linear_rates, quadratic_rates, ucw_rates, RateContext};
use halmann_core::report::Status;
use halmann_core::schedules::{canonical_linear_schedule, monotonize};
use halmann_core::spaces::{Euclidean, Lp, SpiderTree, UcModulus};
use halmann_core::verify::{check_rate, Quantity, RateClaim, RATE_TOL};
use halmann_core::{Modulus, ModulusKind, Point, Space, SpaceHandle};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spaces() -> Vec<SpaceHandle> {
    vec![
        Arc::new(Euclidean::new(1)),
        Arc::new(Euclidean::new(3)),
        Arc::new(SpiderTree::new(4).unwrap()),
        Arc::new(Lp::new(3, 4.0).unwrap()),
    ]
}

fn draw(space: &dyn Space, seed: u64) -> (Point, Point, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        space.sample(&mut rng),
        space.sample(&mut rng),
        space.sample(&mut rng),
    )
}

proptest! {
    #[test]
    fn metric_axioms(which in 0usize..4, seed in any::<u64>()) {
        let space = &spaces()[which];
        let (x, y, z) = draw(space.as_ref(), seed);
        let d = |a: &Point, b: &Point| space.dist(a, b).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
    }

    #[test]
    fn comb_is_on_the_geodesic(which in 0usize..4, seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let space = &spaces()[which];
        let (x, y, _) = draw(space.as_ref(), seed);
        let m = space.comb(&x, &y, lambda).unwrap();
        let dxy = space.dist(&x, &y).unwrap();
        prop_assert!((space.dist(&x, &m).unwrap() - lambda * dxy).abs() <= 1e-9);
        prop_assert!((space.dist(&y, &m).unwrap() - (1.0 - lambda) * dxy).abs() <= 1e-9);
    }

    #[test]
    fn monotonize_is_idempotent_upper_envelope(values in prop::collection::vec(0u128..1000, 1..40)) {
        let t = Modulus::table("t", ModulusKind::Rate, values.clone());
        let once = monotonize(&t);
        let twice = monotonize(&once);
        let mut prev = 0;
        for k in 0..values.len() as u128 {
            let v = once.eval(k).unwrap();
            prop_assert!(v >= values[k as usize]);
            prop_assert!(v >= prev);
            prop_assert_eq!(twice.eval(k).unwrap(), v);
            prev = v;
        }
    }

    #[test]
    fn check_rate_is_monotone_in_the_rate(base in prop::collection::vec(0u128..300, 30), extra in prop::collection::vec(0u128..50, 30)) {
        let series = run_hm(&benchmarks::real_line().unwrap(), 300).unwrap().series;
        let larger: Vec<u128> = base.iter().zip(&extra).map(|(a, b)| a + b).collect();
        for q in [Quantity::DXx, Quantity::DYy, Quantity::DXy] {
            let lo = check_rate(&series, &RateClaim::new(q, Modulus::table("lo", ModulusKind::Rate, base.clone())), 29, RATE_TOL).unwrap();
            let hi = check_rate(&series, &RateClaim::new(q, Modulus::table("hi", ModulusKind::Rate, larger.clone())), 29, RATE_TOL).unwrap();
            for (a, b) in lo.entries.iter().zip(&hi.entries) {
                let flipped = a.status == Status::Verified && matches!(b.status, Status::Violated { .. });
                prop_assert!(!flipped, "k = {}", a.k);
            }
        }
    }

    #[test]
    fn rates_are_nondecreasing(big_k in 1u128..20, lambda in 2u128..20, k in 0u128..200) {
        let (s1, s2) = linear_rates(big_k, k).unwrap();
        let (t1, t2) = linear_rates(big_k, k + 1).unwrap();
        prop_assert!(s1 <= t1 && s2 <= t2);
        let beta = 1.0 / lambda as f64;
        let q0 = quadratic_rates(big_k, beta, k).unwrap();
        let q1 = quadratic_rates(big_k, beta, k + 1).unwrap();
        prop_assert!(q0.sigma3 <= q1.sigma3 && q0.sigma5 <= q1.sigma5);
        let mut ctx = RateContext::new(big_k).unwrap().with_lambda(lambda).with_eta(UcModulus::Cat0)
            .with_delta(halmann_core::rates::sigma1_rate(big_k));
        ctx.sigma1 = Some(Modulus::affine("2k", ModulusKind::RateOfConvergence, 2, 0));
        let u0 = ucw_rates(&ctx, k.min(20)).unwrap();
        let u1 = ucw_rates(&ctx, k.min(20) + 1).unwrap();
        prop_assert!(u0.gamma3 <= u1.gamma3 && u0.gamma6 <= u1.gamma6);
    }
}

#[test]
fn traces_are_deterministic() {
    for b in benchmarks::all().unwrap() {
        let a = run_hm(&b.problem, 500).unwrap();
        let c = run_hm(&b.problem, 500).unwrap();
        assert_eq!(a.series, c.series, "{}", b.name);
    }
}

#[test]
fn gamma1_is_nondecreasing_where_representable() {
    let ctx = RateContext::from_schedule(1, &canonical_linear_schedule(0.5).unwrap()).unwrap();
    let g0 = gamma1(&ctx, 0).unwrap();
    let g1 = gamma1(&ctx, 1).unwrap();
    assert!(g0 < g1);
}

/// `⌊e^m · scale⌋` from the Taylor series `Σ m^j / j!`, truncated far past
/// the point where the terms drop below `scale^-1 · 10^-30`.
fn floor_exp_scaled(m: u32, scale: u128) -> BigUint {
    let terms = 400u32;
    let mut fact = BigUint::from(1u32);
    for j in 1..=terms {
        fact *= j;
    }
    // Σ_j m^j · terms!/j!
    let mut sum = BigUint::from(0u32);
    let mut ratio = fact.clone();
    let mut power = BigUint::from(1u32);
    for j in 0..=terms {
        if j > 0 {
            ratio /= j;
            power *= m;
        }
        sum += &power * &ratio;
    }
    let lo = &sum * scale / &fact;
    // the omitted tail is far below one unit of `1/scale`
    let hi = (&sum + BigUint::from(1u32)) * scale / &fact;
    assert_eq!(lo, hi, "oracle cannot decide the floor");
    lo
}

#[test]
fn ceil_ln_is_exact_at_exponential_boundaries() {
    for m in 0u32..=40 {
        for scale in [1u128, 1_000_000_000_000] {
            let floor: u128 = floor_exp_scaled(m, scale).try_into().unwrap();
            // floor(e^m scale)/scale ≤ e^m < (floor + 1)/scale, equality only at m = 0
            assert_eq!(
                ceil_ln(floor, scale).unwrap(),
                m as i64,
                "m={m} scale={scale}"
            );
            assert_eq!(
                ceil_ln(floor + 1, scale).unwrap(),
                m as i64 + 1,
                "m={m} scale={scale}"
            );
        }
    }
}

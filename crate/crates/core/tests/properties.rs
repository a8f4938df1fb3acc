use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stopgrid::continuous;
use stopgrid::lowerbound;
use stopgrid::special_fn::{erf, erfc, erfcx};
use stopgrid::transform;
use stopgrid::ExtendedReal;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5709_611d)
}

/// `(t, x)` with `t` log-uniform in `[0.01, 1e7]` and `|x| <= 10 sqrt(t)`.
fn sample(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let t = 10f64.powf(rng.gen_range(-2.0..7.0));
    let x = rng.gen_range(-10.0..10.0) * t.sqrt();
    (t, x)
}

#[test]
fn h_dominates_the_gain() {
    let mut r = rng();
    for _ in 0..100_000 {
        let (t, x) = sample(&mut r);
        let h = continuous::h(t, x).unwrap();
        assert!(h >= x / t, "h({t}, {x}) = {h}");
    }
}

#[test]
fn h_is_superharmonic() {
    let mut r = rng();
    for _ in 0..100_000 {
        let (t, x) = sample(&mut r);
        let d = continuous::superharmonic_defect(t, x).unwrap();
        assert!(d >= -1e-13, "defect({t}, {x}) = {d:e}");
    }
}

#[test]
fn value_matching_and_smooth_fit() {
    let sol = continuous::solution();
    let mut r = rng();
    for _ in 0..2000 {
        let t = 10f64.powf(r.gen_range(-2.0..7.0));
        let b = sol.boundary(t);
        assert!((sol.h(t, b).unwrap() - sol.alpha / t.sqrt()).abs() <= 1e-12);
        let eps = 1e-5 * t.sqrt();
        let slope = (sol.h(t, b + eps).unwrap() - sol.h(t, b - eps).unwrap()) / (2.0 * eps);
        assert!((slope - 1.0 / t).abs() < 1e-7, "slope at t = {t}: {slope}");
    }
}

#[test]
fn lower_bound_is_a_submartingale_below_v_w() {
    for horizon in [1e3, 1e4] {
        let cal = lowerbound::calibrate(horizon).unwrap();
        let sol = continuous::solution();
        for i in 0..200 {
            let t = horizon * 100f64.powf(i as f64 / 199.0);
            let b = sol.boundary(t);
            for j in 0..200 {
                let x = (-10.0 * t.sqrt() + (b + 10.0 * t.sqrt()) * j as f64 / 199.0).min(b);
                let d = cal.f_c_defect(t, x).unwrap();
                assert!(d >= -1e-13, "f_c({t}, {x}) = {d:e} at T = {horizon}");
                // equal at x = b, so allow the rounding of two independent evaluations
                let (hc, vw) = (cal.h_c(t, x).unwrap(), sol.v_w(t, x).unwrap());
                assert!(hc <= vw * (1.0 + 4.0 * f64::EPSILON), "h_c > v_w at ({t}, {x})");
            }
        }
    }
}

#[test]
fn erf_and_erfc_are_complementary() {
    let mut r = rng();
    for _ in 0..100_000 {
        let z: f64 = r.gen_range(-6.0..6.0);
        assert!((erf(z) + erfc(z) - 1.0).abs() <= 4.0 * f64::EPSILON, "z = {z}");
        // e^{-z^2} with z^2 split exactly into p + e
        let p = z * z;
        let e = z.mul_add(z, -p);
        let scale = (-p).exp() * (-e).exp();
        let want = erfc(z);
        let rel = (erfcx(z) * scale - want).abs() / want;
        assert!(rel <= 8.0 * f64::EPSILON, "z = {z}, rel = {rel:e}");
    }
}

fn exact(v: f64) -> BigInt {
    // v = m 2^e with an integer m; scaled by 2^1074 so every double is an integer.
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    let mag = BigInt::from(m) << (e + 1074) as usize;
    if v.is_sign_negative() {
        -mag
    } else {
        mag
    }
}

#[test]
fn extended_sum_of_a_million_doubles() {
    let mut r = rng();
    let values: Vec<f64> = (0..1_000_000)
        .map(|_| r.gen_range(-0.5..1.0) * 2f64.powi(r.gen_range(-30..30)))
        .collect();
    let sum: ExtendedReal = values.iter().copied().sum();
    let oracle: BigInt = values.iter().map(|&v| exact(v)).sum();
    let got = exact(sum.hi()) + exact(sum.lo());
    let err = (&got - &oracle).abs();
    assert!(!oracle.is_zero());
    // compare err / |oracle| in floating point after a common shift
    let shift = oracle.bits().saturating_sub(60);
    let rel = (err >> shift as usize).to_f64().unwrap() / (oracle.abs() >> shift as usize).to_f64().unwrap();
    assert!(rel < 1e-25, "relative error {rel:e}");
    let naive: f64 = values.iter().sum();
    assert!(naive != sum.hi() || sum.lo() != 0.0);
}

proptest! {
    #[test]
    fn positions_roundtrip(n in 0u64..1_000_000, k in 0i64..1_000_000) {
        let x = 2 * (k % (n as i64 + 1)) - n as i64;
        let heads = transform::position_sym_to_heads(n, x);
        prop_assert_eq!(transform::position_heads_to_sym(n, heads.as_integer().unwrap()), x);
        let hw = transform::format_hw(n, x).unwrap();
        prop_assert_eq!(transform::parse_hw(&hw).unwrap(), (n, x));
        prop_assert_eq!(transform::boundary_heads_to_sym(n, transform::boundary_sym_to_heads(n, x)), x);
    }

    #[test]
    fn values_roundtrip(v in -1.0f64..1.0) {
        let e = ExtendedReal::from(v);
        let back = transform::value_heads_to_sym_ext(transform::value_sym_to_heads_ext(e));
        prop_assert_eq!(back, e);
        let f = transform::value_heads_to_sym(transform::value_sym_to_heads(v));
        prop_assert!((f - v).abs() <= f64::EPSILON);
    }

    #[test]
    fn v_w_dominates_and_is_continuous(t in 0.01f64..1e7, s in -10.0f64..10.0) {
        let sol = continuous::solution();
        let x = s * t.sqrt();
        prop_assert!(sol.v_w(t, x).unwrap() >= x / t);
        let b = sol.boundary(t);
        let gap = sol.h(t, b).unwrap() - b / t;
        prop_assert!(gap.abs() <= 1e-12 * (1.0 / t.sqrt()).max(1.0));
    }
}

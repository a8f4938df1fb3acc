//! Error function family and compensated arithmetic.
//!
//! `erf`, `erfc` and `erfcx` use W. J. Cody's rational Chebyshev
//! approximations (Math. Comp. 1969, netlib `specfun/erf`) on three
//! intervals: `|z| <= 0.46875`, `0.46875 < |z| <= 4` and `|z| > 4`. The
//! scaled complement `erfcx(z) = exp(z^2) erfc(z)` is what every bound in
//! this crate is evaluated through; the product form overflows long before
//! the quotient it represents does.

mod extended;

pub use extended::ExtendedReal;

const FRAC_1_SQRT_PI: f64 = 5.641_895_835_477_562_869_5e-1;
const THRESH: f64 = 0.468_75;
const X_SMALL: f64 = 1.11e-16;
const X_BIG: f64 = 26.543;
const X_HUGE: f64 = 6.71e7;
const X_MAX: f64 = 2.53e307;
/// Below this argument `erfcx` exceeds `f64::MAX`.
pub const ERFCX_NEG_LIMIT: f64 = -26.628;

const A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_21e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Erf,
    Erfc,
    Erfcx,
}

/// `exp(-y^2)` with the square split so the exponent is formed exactly.
#[inline]
fn exp_neg_sq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// `exp(y^2)`, split as in [`exp_neg_sq`].
#[inline]
fn exp_sq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (ysq * ysq).exp() * del.exp()
}

/// erf on the small interval: `x * R(x^2)`.
#[inline]
fn erf_small(x: f64) -> f64 {
    let y = x.abs();
    let ysq = if y > X_SMALL { y * y } else { 0.0 };
    let mut num = A[4] * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + A[i]) * ysq;
        den = (den + B[i]) * ysq;
    }
    x * (num + A[3]) / (den + B[3])
}

/// `exp(y^2) erfc(y)` for `0.46875 < y`, i.e. the scaled complement on the
/// two outer intervals.
#[inline]
fn erfcx_outer(y: f64) -> f64 {
    if y <= 4.0 {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        (num + C[7]) / (den + D[7])
    } else if y >= X_HUGE {
        if y >= X_MAX {
            0.0
        } else {
            FRAC_1_SQRT_PI / y
        }
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + P[i]) * ysq;
            den = (den + Q[i]) * ysq;
        }
        let r = ysq * (num + P[4]) / (den + Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    }
}

fn calerf(x: f64, kind: Kind) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESH {
        let e = erf_small(x);
        return match kind {
            Kind::Erf => e,
            Kind::Erfc => 1.0 - e,
            Kind::Erfcx => {
                let ysq = if y > X_SMALL { y * y } else { 0.0 };
                ysq.exp() * (1.0 - e)
            }
        };
    }

    // Complement of |x| on the outer intervals.
    let comp = match kind {
        Kind::Erfcx => erfcx_outer(y),
        _ if y >= X_BIG => 0.0,
        _ => exp_neg_sq(y) * erfcx_outer(y),
    };

    match kind {
        Kind::Erf => {
            let r = (0.5 - comp) + 0.5;
            if x < 0.0 {
                -r
            } else {
                r
            }
        }
        Kind::Erfc => {
            if x < 0.0 {
                2.0 - comp
            } else {
                comp
            }
        }
        Kind::Erfcx => {
            if x >= 0.0 {
                comp
            } else if x < ERFCX_NEG_LIMIT {
                f64::INFINITY
            } else {
                let e = exp_sq(x);
                (e + e) - comp
            }
        }
    }
}

/// The error function.
pub fn erf(z: f64) -> f64 {
    calerf(z, Kind::Erf)
}

/// The complementary error function `1 - erf(z)`, accurate in the tail.
pub fn erfc(z: f64) -> f64 {
    calerf(z, Kind::Erfc)
}

/// The scaled complementary error function `exp(z^2) erfc(z)`.
///
/// Finite for every `z >= -26.628`; returns `+inf` below that, where the
/// true value exceeds `f64::MAX`. For large positive `z` the result decays
/// like `1 / (z sqrt(pi))` and never underflows before `z ~ 1e307`.
pub fn erfcx(z: f64) -> f64 {
    calerf(z, Kind::Erfcx)
}

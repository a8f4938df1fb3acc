//! The Gaussian-kernel integrals behind `h`, `h_c` and their one-step
//! defects:
//!
//! ```text
//! I_w(t, x; c) = \int_0^\infty exp(a x - c t a^2) w(a) da
//! ```
//!
//! With `w = 1` this is `sqrt(pi / (4ct)) erfcx(-x / sqrt(4ct))`. With
//! `w(a) = cosh(a) exp(-c a^2) - 1` it is the one-step Bernoulli defect
//! `(I(t+1, x-1) + I(t+1, x+1)) / 2 - I(t, x)` without the catastrophic
//! cancellation of the three-term difference.

use crate::numeric::integrate;

/// `ln cosh(a) - a^2 / 2`, accurate for small `a` where both terms agree
/// to many digits.
pub(crate) fn ln_cosh_excess(a: f64) -> f64 {
    let a = a.abs();
    if a < 0.25 {
        // Taylor coefficients of ln cosh from a^4 to a^20.
        const COEF: [f64; 9] = [
            -1.0 / 12.0,
            1.0 / 45.0,
            -17.0 / 2520.0,
            31.0 / 14175.0,
            -691.0 / 935_550.0,
            10922.0 / 42_567_525.0,
            -929_569.0 / 10_216_206_000.0,
            3_202_291.0 / 97_692_469_875.0,
            -221_930_581.0 / 18_561_569_276_250.0,
        ];
        let s = a * a;
        let poly = COEF.iter().rev().fold(0.0, |acc, &k| acc * s + k);
        s * s * poly
    } else if a < 20.0 {
        let sh = (0.5 * a).sinh();
        (2.0 * sh * sh).ln_1p() - 0.5 * a * a
    } else {
        a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2 - 0.5 * a * a
    }
}

/// `cosh(a) exp(-c a^2) - 1` written in terms of `1/2 - c`.
#[inline]
pub(crate) fn defect_weight(a: f64, half_minus_c: f64) -> f64 {
    (half_minus_c * a * a + ln_cosh_excess(a)).exp_m1()
}

/// `\int_0^\infty exp(a x - c t a^2) w(a) da` by adaptive quadrature over
/// the window that carries all but ~e^-70 of the mass.
pub(crate) fn gaussian_kernel_integral<W>(t: f64, x: f64, c: f64, mut w: W) -> f64
where
    W: FnMut(f64) -> f64,
{
    let ct = c * t;
    let sigma = 1.0 / (2.0 * ct).sqrt();
    let (a_star, peak) = if x > 0.0 {
        let a_star = x / (2.0 * ct);
        (a_star, x * a_star * 0.5)
    } else {
        (0.0, 0.0)
    };
    let lo = (a_star - 12.0 * sigma).max(0.0);
    let mut hi = a_star + 12.0 * sigma;
    if x < 0.0 {
        hi = hi.min(50.0 / -x);
    }
    let integrand = |a: f64| {
        let exponent = if x > 0.0 {
            let d = a - a_star;
            -ct * d * d
        } else {
            a * x - ct * a * a
        };
        exponent.exp() * w(a)
    };
    let mut integrand = integrand;
    let width = (hi - lo) / 8.0;
    let total: f64 = (0..8)
        .map(|k| {
            let a = lo + width * k as f64;
            let b = if k == 7 { hi } else { a + width };
            integrate(&mut integrand, a, b, 1e-15).value
        })
        .sum();
    total * peak.exp()
}

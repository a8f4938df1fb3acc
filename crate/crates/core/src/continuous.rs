//! The Brownian version of the game, which has a closed form.
//!
//! For `x + W_s` stopped at `(x + W_tau) / (t + tau)` the optimal rule is to
//! stop at the first time the position reaches `alpha sqrt(t)`, where `alpha`
//! solves
//!
//! ```text
//! sqrt(2 pi) (1 - alpha^2) exp(alpha^2 / 2) (erf(alpha / sqrt 2) + 1) = 2 alpha.
//! ```
//!
//! Below the boundary the value is
//!
//! ```text
//! h(t, x) = (1 - alpha^2) \int_0^\infty exp(a x - a^2 t / 2) da
//!         = (1 - alpha^2) sqrt(pi / 2t) erfcx(-x / sqrt(2t)),
//! ```
//!
//! and above it the value is the gain `x / t`. `h` dominates the gain
//! everywhere and is superharmonic for any 1-subgaussian random walk, which
//! makes the Brownian value `V^W` an upper bound for the discrete game.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{gaussian_kernel_integral, ln_cosh_excess};
use crate::numeric::brent;
use crate::special_fn::erfcx;

/// The boundary coefficient `alpha` together with the residual of its
/// defining equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSolution {
    pub alpha: f64,
    pub residual: f64,
}

/// Left-hand side minus right-hand side of the `alpha` equation, written
/// through `erfcx`: `exp(a^2/2)(erf(a/sqrt2) + 1) = erfcx(-a / sqrt 2)`.
pub fn alpha_equation(a: f64) -> f64 {
    (2.0 * PI).sqrt() * (1.0 - a * a) * erfcx(-a / std::f64::consts::SQRT_2) - 2.0 * a
}

/// Solves for `alpha` by Brent's method on `[0.5, 1]`.
pub fn solve_alpha() -> Result<ContinuousSolution> {
    let alpha = brent(alpha_equation, 0.5, 1.0, 1e-16)?;
    Ok(ContinuousSolution {
        alpha,
        residual: alpha_equation(alpha),
    })
}

static SOLUTION: OnceLock<ContinuousSolution> = OnceLock::new();

/// The process-wide `alpha`, solved once. Every module reads `alpha` from
/// here so all consumers see the same bits.
pub fn solution() -> &'static ContinuousSolution {
    SOLUTION.get_or_init(|| solve_alpha().expect("alpha bracket [0.5, 1] must change sign"))
}

/// Shorthand for `solution().alpha`.
pub fn alpha() -> f64 {
    solution().alpha
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

impl ContinuousSolution {
    /// `alpha sqrt(t)`, the stopping boundary of the Brownian game.
    pub fn boundary(&self, t: f64) -> f64 {
        self.alpha * t.sqrt()
    }

    /// `h(t, x)`; positive for every finite `x` with `x^2 / 2t` in range.
    pub fn h(&self, t: f64, x: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.h_unchecked(t, x))
    }

    #[inline]
    pub(crate) fn h_unchecked(&self, t: f64, x: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        (1.0 - a2) * (PI / (2.0 * t)).sqrt() * erfcx(-x / (2.0 * t).sqrt())
    }

    /// The Brownian value function: `h` up to the boundary, the gain above.
    pub fn v_w(&self, t: f64, x: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.v_w_unchecked(t, x))
    }

    #[inline]
    pub(crate) fn v_w_unchecked(&self, t: f64, x: f64) -> f64 {
        if x <= self.boundary(t) {
            self.h_unchecked(t, x)
        } else {
            x / t
        }
    }

    /// One-step defect `h(t, x) - (h(t+1, x+1) + h(t+1, x-1)) / 2` for the
    /// symmetric Bernoulli walk. Non-negative when `h` is superharmonic.
    ///
    /// Evaluated as `(1 - alpha^2) \int e^{ax - a^2 t/2} (1 - cosh(a) e^{-a^2/2}) da`;
    /// the weight is non-negative because `cosh(a) <= e^{a^2/2}`.
    pub fn superharmonic_defect(&self, t: f64, x: f64) -> Result<f64> {
        check_time(t)?;
        let integral = gaussian_kernel_integral(t, x, 0.5, |a| -ln_cosh_excess(a).exp_m1());
        Ok((1.0 - self.alpha * self.alpha) * integral)
    }
}

/// `h(t, x)` with the shared `alpha`.
pub fn h(t: f64, x: f64) -> Result<f64> {
    solution().h(t, x)
}

/// `V^W(t, x)` with the shared `alpha`.
pub fn v_w(t: f64, x: f64) -> Result<f64> {
    solution().v_w(t, x)
}

/// Superharmonic defect of `h` with the shared `alpha`.
pub fn superharmonic_defect(t: f64, x: f64) -> Result<f64> {
    solution().superharmonic_defect(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA_PRINTED: f64 = 0.839923675692373;
    // mpmath, 40 digits
    const ALPHA_REF: f64 = 0.839_923_675_692_372_689_603_8;

    #[test]
    fn alpha_matches_printed_constant() {
        let s = solve_alpha().unwrap();
        assert!((s.alpha - ALPHA_PRINTED).abs() < 1e-13);
        assert!((s.alpha - ALPHA_REF).abs() < 4e-16);
        assert!(s.residual.abs() <= 1e-14);
        assert!(s.alpha > 0.0 && s.alpha < 1.0);
    }

    #[test]
    fn alpha_bracket_changes_sign() {
        assert!(alpha_equation(0.5) > 0.0);
        assert!(alpha_equation(1.0) < 0.0);
    }

    #[test]
    fn h_worked_example() {
        // mpmath: 0.16403954515397185542; printed as ~0.1642
        let v = h(9.0, 1.0).unwrap();
        assert!((v - 0.164_039_545_153_971_855).abs() < 1e-15);
        assert!((v - 0.1642).abs() < 5e-4);
    }

    #[test]
    fn h_at_origin_equals_quadrature() {
        // (1 - alpha^2) \int_0^\infty e^{-a^2/2} da = (1 - alpha^2) sqrt(pi/2)
        let v = h(1.0, 0.0).unwrap();
        assert!((v - 0.369_136_380_725_360_990_8).abs() < 1e-15);
    }

    #[test]
    fn value_matching_on_boundary() {
        let s = solution();
        for &t in &[1.0, 4.0, 100.0] {
            let v = s.h(t, s.boundary(t)).unwrap();
            assert!((v - s.alpha / t.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn v_w_branches() {
        assert_eq!(v_w(9.0, 3.0).unwrap(), 1.0 / 3.0);
        assert!((v_w(9.0, 1.0).unwrap() - h(9.0, 1.0).unwrap()).abs() == 0.0);
        let s = solution();
        for &t in &[1.0, 10.0, 1000.0] {
            let b = s.boundary(t);
            assert!((s.h(t, b).unwrap() - b / t).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_time() {
        assert!(matches!(h(0.0, 1.0), Err(Error::NonPositiveTime(_))));
        assert!(v_w(-1.0, 1.0).is_err());
        assert!(superharmonic_defect(0.0, 0.0).is_err());
    }

    #[test]
    fn defect_examples_are_non_negative() {
        assert!(superharmonic_defect(10.0, 0.0).unwrap() >= 0.0);
        assert!(superharmonic_defect(100.0, -50.0).unwrap() >= 0.0);
        assert!(superharmonic_defect(9.0, 2.5198).unwrap() >= 0.0);
    }

    #[test]
    fn defect_integral_agrees_with_difference() {
        let s = solution();
        for &(t, x) in &[(1.0, 0.0), (9.0, 2.5198), (10.0, -3.0), (50.0, 5.0), (400.0, 16.0)] {
            let direct = s.h(t, x).unwrap()
                - 0.5 * (s.h(t + 1.0, x + 1.0).unwrap() + s.h(t + 1.0, x - 1.0).unwrap());
            let integral = s.superharmonic_defect(t, x).unwrap();
            let scale = s.h(t, x).unwrap();
            assert!((direct - integral).abs() < 1e-14 * scale, "({t},{x}): {direct:e} vs {integral:e}");
        }
    }

    #[test]
    fn far_left_is_finite_and_positive() {
        for &t in &[0.01, 1.0, 1e4, 1e7] {
            let v = h(t, -40.0 * f64::sqrt(t)).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }
}

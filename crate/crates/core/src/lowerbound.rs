//! The calibrated lower bound
//!
//! ```text
//! h_c(t, x) = K \int_0^\infty exp(a x - c t a^2) da
//!           = K sqrt(pi / 4ct) erfcx(-x / sqrt(4ct)),
//! ```
//!
//! with `K` chosen so that `h_c(t, alpha sqrt t) = alpha / sqrt t`. For
//! `c < 1/2` the process `h_c(t + n, x + S_n)` is a submartingale below the
//! boundary once `t` is large enough, so stopping at the first time it meets
//! the gain is admissible and `h_c` bounds the discrete value from below.
//!
//! [`calibrate`] picks `c` for a given horizon `T`:
//!
//! * `c1` is the largest `c < 1/2` where the one-step defect `f_c` vanishes
//!   at the calibration anchor near `alpha sqrt T`;
//! * `c2` solves `h_c(T, alpha sqrt T - 1) = (alpha sqrt T - 1) / T`;
//! * `c` combines the two according to [`CoefficientRule`].
//!
//! The result is usable as a terminal condition only when
//! `T >= (alpha / (2 a0 c))^2`, where `a0` is the positive root of
//! `cosh(a) exp(-c a^2) = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::continuous::{self, ContinuousSolution};
use crate::error::{Error, Result};
use crate::kernel::{defect_weight, gaussian_kernel_integral, ln_cosh_excess};
use crate::numeric::brent;
use crate::special_fn::erfcx;

/// Where the defining equation for `c1` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationAnchor {
    /// `f_c(T, alpha sqrt T + 1) = 0`: the continuation value at the two
    /// lattice neighbours `alpha sqrt T` and `alpha sqrt T + 2`. This is the
    /// variant that reproduces the published table of `c` values.
    #[default]
    ShiftedByOne,
    /// `f_c(T, alpha sqrt T) = 0`, the equation as usually written.
    Boundary,
}

impl CalibrationAnchor {
    pub fn position(self, alpha: f64, t: f64) -> f64 {
        match self {
            Self::ShiftedByOne => alpha * t.sqrt() + 1.0,
            Self::Boundary => alpha * t.sqrt(),
        }
    }
}

/// How `c1` and `c2` are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientRule {
    /// `c = max(c1, c2)`.
    #[default]
    Max,
    /// `c = min(c1, c2)`. Keeps `h_c(T, .)` below the gain on
    /// `[alpha sqrt T - 1, alpha sqrt T]`, at the cost of a looser bound.
    Min,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub rule: CoefficientRule,
    pub anchor: CalibrationAnchor,
}

/// A lower bound calibrated for one horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCalibration {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c: f64,
    /// `1/2 - c`, carried separately because for large horizons it is far
    /// smaller than `c` and would lose digits if recomputed.
    pub half_minus_c: f64,
    pub a0: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub valid: bool,
    /// `(alpha / (2 a0 c))^2`, the smallest horizon this `c` is proven for.
    pub required_horizon: f64,
    /// `max (h_c(T, x) - x / T)` over `x in [alpha sqrt T - 1, alpha sqrt T]`.
    /// Zero or negative when `h_c` crosses the gain within one step.
    pub crossing_excess: f64,
    pub rule: CoefficientRule,
    pub anchor: CalibrationAnchor,
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 0.5 {
        Ok(())
    } else {
        Err(Error::CoefficientOutOfRange(c))
    }
}

/// `lambda(a) = cosh(a) exp(-c a^2) - 1`.
pub fn lambda(a: f64, c: f64) -> f64 {
    defect_weight(a, 0.5 - c)
}

/// Positive root of `lambda`, parametrised by `delta = 1/2 - c`.
///
/// Solves `delta + (ln cosh a - a^2/2) / a^2 = 0`; the second term is
/// strictly decreasing in `a`, which makes the root unique.
pub fn solve_a0_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::CoefficientOutOfRange(0.5 - delta));
    }
    let g = |a: f64| delta + ln_cosh_excess(a) / (a * a);
    let guess = (12.0 * delta).sqrt();
    let mut lo = 0.5 * guess;
    while g(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = guess;
    while g(hi) >= 0.0 {
        hi *= 2.0;
    }
    brent(g, lo, hi, 1e-15 * hi)
}

/// Positive root `a0` of `cosh(a) exp(-c a^2) = 1`, for `0 < c < 1/2`.
pub fn solve_a0(c: f64) -> Result<f64> {
    check_c(c)?;
    solve_a0_delta(0.5 - c)
}

/// Normalisation `K(c) = alpha sqrt(4c / pi) / erfcx(-alpha / sqrt(4c))`.
pub fn compute_k(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::CoefficientOutOfRange(c));
    }
    Ok(k_for(continuous::alpha(), c))
}

fn k_for(alpha: f64, c: f64) -> f64 {
    alpha * (4.0 * c / PI).sqrt() / erfcx(-alpha / (4.0 * c).sqrt())
}

/// `h_c(t, x)` for an explicit `c` (and its `K`).
pub fn h_c_raw(t: f64, x: f64, c: f64, k: f64) -> f64 {
    let s = 4.0 * c * t;
    k * (PI / s).sqrt() * erfcx(-x / s.sqrt())
}

/// One-step defect `(h_c(t+1, x-1) + h_c(t+1, x+1)) / 2 - h_c(t, x)` for
/// `c = 1/2 - delta`, evaluated as the weighted kernel integral.
pub fn f_c_raw(t: f64, x: f64, delta: f64, k: f64) -> f64 {
    let c = 0.5 - delta;
    k * gaussian_kernel_integral(t, x, c, |a| defect_weight(a, delta))
}

/// Largest `c < 1/2` with `f_c(T, anchor) = 0`, as `(c, 1/2 - c)`.
///
/// Scans `c = 1/2 - 2^-k` from `k = 48` down to `k = 2` for the first point
/// where the defect turns non-negative, then refines by Brent's method in
/// `delta = 1/2 - c`.
pub fn solve_c1_with(horizon: f64, anchor: CalibrationAnchor) -> Result<(f64, f64)> {
    if !(horizon >= 1.0 && horizon.is_finite()) {
        return Err(Error::Calibration {
            horizon,
            reason: "c1 needs T >= 1".into(),
        });
    }
    let alpha = continuous::alpha();
    let x = anchor.position(alpha, horizon);
    let defect = |delta: f64| {
        let c = 0.5 - delta;
        f_c_raw(horizon, x, delta, k_for(alpha, c)) / h_c_raw(horizon, x, c, 1.0)
    };
    let mut prev: Option<(f64, f64)> = None;
    for k in (2..=48).rev() {
        let delta = (-(k as f64)).exp2();
        let v = defect(delta);
        if v >= 0.0 {
            return match prev {
                Some((d_prev, v_prev)) if v_prev < 0.0 => {
                    let delta = if v == 0.0 {
                        delta
                    } else {
                        brent(defect, d_prev, delta, 1e-15 * d_prev)?
                    };
                    Ok((0.5 - delta, delta))
                }
                _ => Err(Error::Calibration {
                    horizon,
                    reason: "defect is already non-negative next to 1/2".into(),
                }),
            };
        }
        prev = Some((delta, v));
    }
    Err(Error::Calibration {
        horizon,
        reason: "no sign change of the defect in c in (1/4, 1/2)".into(),
    })
}

/// `c1` with the default anchor.
pub fn solve_c1(horizon: f64) -> Result<f64> {
    solve_c1_with(horizon, CalibrationAnchor::default()).map(|(c, _)| c)
}

/// Solves `h_c(T, alpha sqrt T - 1) = (alpha sqrt T - 1) / T` for `c`, with
/// `K` tied to `c`. In logarithms, with `beta = alpha - 1/sqrt T`:
/// `ln erfcx(-beta / sqrt 4c) - ln erfcx(-alpha / sqrt 4c) = ln(beta / alpha)`.
pub fn solve_c2(horizon: f64) -> Result<f64> {
    let alpha = continuous::alpha();
    let beta = alpha - 1.0 / horizon.sqrt();
    if !(horizon.is_finite() && beta > 0.0) {
        return Err(Error::Calibration {
            horizon,
            reason: "c2 needs alpha sqrt T > 1".into(),
        });
    }
    let target = (beta / alpha).ln();
    let f = |c: f64| {
        let s = (4.0 * c).sqrt();
        erfcx(-beta / s).ln() - erfcx(-alpha / s).ln() - target
    };
    let mut lo = 0.05;
    while f(lo) >= 0.0 {
        lo *= 0.5;
        if lo < 1e-6 {
            return Err(Error::Calibration {
                horizon,
                reason: "c2 bracket not found".into(),
            });
        }
    }
    brent(f, lo, 0.5, 1e-16)
}

/// Calibrates with the default options.
pub fn calibrate(horizon: f64) -> Result<LowerBoundCalibration> {
    calibrate_with(horizon, CalibrationOptions::default())
}

/// Computes `c1`, `c2`, `c`, `a0`, `K` and the validity flag for horizon `T`.
///
/// Either root may be missing; the calibration fails only when neither
/// exists. An invalid result is returned with `valid = false` rather than
/// as an error so callers can report it.
pub fn calibrate_with(horizon: f64, opts: CalibrationOptions) -> Result<LowerBoundCalibration> {
    let c1 = solve_c1_with(horizon, opts.anchor).ok();
    let c2 = solve_c2(horizon).ok();
    let (c, half_minus_c) = match (c1, c2) {
        (Some((c1, d1)), Some(c2)) => {
            let take_c1 = match opts.rule {
                CoefficientRule::Max => c1 >= c2,
                CoefficientRule::Min => c1 <= c2,
            };
            if take_c1 {
                (c1, d1)
            } else {
                (c2, 0.5 - c2)
            }
        }
        (Some((c1, d1)), None) => (c1, d1),
        (None, Some(c2)) => (c2, 0.5 - c2),
        (None, None) => {
            return Err(Error::Calibration {
                horizon,
                reason: "neither c1 nor c2 exists".into(),
            })
        }
    };
    check_c(c)?;
    let alpha = continuous::alpha();
    let a0 = solve_a0_delta(half_minus_c)?;
    let k = k_for(alpha, c);
    let required_horizon = (alpha / (2.0 * a0 * c)).powi(2);
    let boundary = alpha * horizon.sqrt();
    let crossing_excess = (0..=64)
        .map(|i| {
            let x = boundary - 1.0 + i as f64 / 64.0;
            h_c_raw(horizon, x, c, k) - x / horizon
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LowerBoundCalibration {
        horizon,
        c1: c1.map(|(c, _)| c),
        c2,
        c,
        half_minus_c,
        a0,
        k,
        valid: horizon >= required_horizon,
        required_horizon,
        crossing_excess,
        rule: opts.rule,
        anchor: opts.anchor,
    })
}

impl LowerBoundCalibration {
    /// Errors with [`Error::InvalidCalibration`] unless the validity
    /// condition holds.
    pub fn require_valid(&self) -> Result<&Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(Error::InvalidCalibration {
                horizon: self.horizon,
                required: self.required_horizon,
            })
        }
    }

    pub fn h_c(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(self.h_c_unchecked(t, x))
    }

    #[inline]
    pub(crate) fn h_c_unchecked(&self, t: f64, x: f64) -> f64 {
        h_c_raw(t, x, self.c, self.k)
    }

    /// `(h_c(t+1, x-1) + h_c(t+1, x+1)) / 2 - h_c(t, x)`.
    pub fn f_c_defect(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(f_c_raw(t, x, self.half_minus_c, self.k))
    }

    /// Terminal lower value at the horizon: `h_c` up to the boundary, the
    /// gain above it.
    pub fn terminal(&self, sol: &ContinuousSolution, x: f64) -> f64 {
        let t = self.horizon;
        if x <= sol.boundary(t) {
            self.h_c_unchecked(t, x)
        } else {
            x / t
        }
    }
}

/// `h_c(t, x)` under a calibration.
pub fn h_c(t: f64, x: f64, cal: &LowerBoundCalibration) -> Result<f64> {
    cal.h_c(t, x)
}

/// The submartingale defect of `h_c` under a calibration.
pub fn f_c_defect(t: f64, x: f64, cal: &LowerBoundCalibration) -> Result<f64> {
    cal.f_c_defect(t, x)
}

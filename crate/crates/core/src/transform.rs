//! Conversions between the symmetric walk `S_n` (steps `+-1`) and the
//! heads count `S'_n` (steps `1` or `0`), related by `S_n = 2 S'_n - n`.
//!
//! Under this map the game value becomes `V' = V/2 + 1/2` and the boundary
//! `b' = (b + n) / 2`. A point can also be written as `heads-tails`, so the
//! symmetric point `(8, 2)` is `5-3`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::continuous;
use crate::error::{Error, Result};
use crate::special_fn::ExtendedReal;

/// An exact multiple of one half.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub const fn from_int(v: i64) -> Self {
        Self { twice: 2 * v }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 * 0.5
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(v) => write!(f, "{v}"),
            None => {
                let sign = if self.twice < 0 { "-" } else { "" };
                write!(f, "{sign}{}.5", self.twice.abs() / 2)
            }
        }
    }
}

/// `(x + n) / 2` heads; a half integer when `x` and `n` differ in parity.
pub fn position_sym_to_heads(n: u64, x: i64) -> HalfInteger {
    HalfInteger::from_twice(x + n as i64)
}

/// `2 h - n`.
pub fn position_heads_to_sym(n: u64, heads: i64) -> i64 {
    2 * heads - n as i64
}

/// `v / 2 + 1/2`, rounded to `f64`.
pub fn value_sym_to_heads(v: f64) -> f64 {
    0.5 * v + 0.5
}

/// `2 v - 1`.
pub fn value_heads_to_sym(v: f64) -> f64 {
    2.0 * v - 1.0
}

/// `v / 2 + 1/2` without rounding.
pub fn value_sym_to_heads_ext(v: ExtendedReal) -> ExtendedReal {
    v.scale_pow2(0.5) + 0.5
}

/// `2 v - 1` without rounding.
pub fn value_heads_to_sym_ext(v: ExtendedReal) -> ExtendedReal {
    v.scale_pow2(2.0) + (-1.0)
}

/// `b' = (b + n) / 2`.
pub fn boundary_sym_to_heads(n: u64, b: i64) -> HalfInteger {
    position_sym_to_heads(n, b)
}

/// `b = 2 b' - n`.
pub fn boundary_heads_to_sym(n: u64, b: HalfInteger) -> i64 {
    b.twice() - n as i64
}

/// `rho'(n) = 1/4 - 1/(15.8 + 9 n^(1/4))`, the boundary offset in heads
/// notation; equal to `rho(n) / 2`.
pub fn rho_heads(n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::Config(format!("rho needs n >= 1, got {n}")));
    }
    Ok(0.25 - 1.0 / (15.8 + 9.0 * n.sqrt().sqrt()))
}

/// `ceil((alpha sqrt(n) + n) / 2 - rho'(n))`.
pub fn predict_b_heads(n: u64) -> Result<i64> {
    let nf = n as f64;
    Ok(((continuous::alpha() * nf.sqrt() + nf) / 2.0 - rho_heads(nf)?).ceil() as i64)
}

/// `heads-tails` form of a symmetric point; needs `x` and `n` of equal
/// parity and `|x| <= n`.
pub fn format_hw(n: u64, x: i64) -> Result<String> {
    let n_i = n as i64;
    if (x + n_i).rem_euclid(2) != 0 || x.abs() > n_i {
        return Err(Error::Config(format!("({n}, {x}) has no heads-tails form")));
    }
    Ok(format!("{}-{}", (n_i + x) / 2, (n_i - x) / 2))
}

/// Parses `heads-tails` into the symmetric `(n, x)`.
pub fn parse_hw(s: &str) -> Result<(u64, i64)> {
    let bad = || Error::Config(format!("expected heads-tails, got {s:?}"));
    let (h, t) = s.trim().split_once('-').ok_or_else(bad)?;
    let h: u64 = h.trim().parse().map_err(|_| bad())?;
    let t: u64 = t.trim().parse().map_err(|_| bad())?;
    Ok((h + t, h as i64 - t as i64))
}

/// How positions are printed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notation {
    /// Symmetric walk position `x`.
    #[default]
    Sym,
    /// Number of heads.
    Heads,
    /// `heads-tails`.
    Hw,
}

impl Notation {
    pub fn position(self, n: u64, x: i64) -> String {
        match self {
            Self::Sym => x.to_string(),
            Self::Heads => position_sym_to_heads(n, x).to_string(),
            Self::Hw => format_hw(n, x).unwrap_or_else(|_| position_sym_to_heads(n, x).to_string()),
        }
    }

    /// Value in this notation: heads-count values are shifted, the others not.
    pub fn value(self, v: f64) -> f64 {
        match self {
            Self::Sym => v,
            Self::Heads | Self::Hw => value_sym_to_heads(v),
        }
    }
}

impl FromStr for Notation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(Self::Sym),
            "heads" => Ok(Self::Heads),
            "hw" => Ok(Self::Hw),
            other => Err(Error::Config(format!("unknown notation {other:?}"))),
        }
    }
}

impl fmt::Display for Notation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sym => "sym",
            Self::Heads => "heads",
            Self::Hw => "hw",
        })
    }
}

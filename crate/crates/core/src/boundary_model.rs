//! Closed-form fit of the stopping boundary,
//! `b(n) = ceil(alpha sqrt(n) - rho(n))` with
//! `rho(n) = 1/2 - 1/(7.9 + 4.5 n^(1/4))`, which holds for every
//! `n <= 100000` apart from three levels listed in [`EXCEPTIONS`].

use serde::{Deserialize, Serialize};

use crate::continuous;
use crate::error::{Error, Result};

/// Levels where the ceiling formula is off, with the true `b(n)`.
pub const EXCEPTIONS: [(u64, i64); 3] = [(12923, 96), (14312, 101), (25257, 134)];

/// Largest level the formula was checked against.
pub const VALIDATED_UP_TO: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPrediction {
    pub n: u64,
    pub predicted: i64,
    pub exception_applied: bool,
    /// `false` outside `1..=VALIDATED_UP_TO`.
    pub validated: bool,
}

/// `rho(n) = 1/2 - 1 / (7.9 + 4.5 n^(1/4))`.
pub fn rho(n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::Config(format!("rho needs n >= 1, got {n}")));
    }
    Ok(0.5 - 1.0 / (7.9 + 4.5 * n.sqrt().sqrt()))
}

/// The ceiling formula without the exception table.
pub fn ceiling_formula(n: u64) -> Result<i64> {
    let nf = n as f64;
    Ok((continuous::alpha() * nf.sqrt() - rho(nf)?).ceil() as i64)
}

pub fn predict_b(n: u64) -> Result<BoundaryPrediction> {
    let exception = EXCEPTIONS.iter().find(|&&(k, _)| k == n).map(|&(_, b)| b);
    let predicted = match exception {
        Some(b) => b,
        None => ceiling_formula(n)?,
    };
    Ok(BoundaryPrediction {
        n,
        predicted,
        exception_applied: exception.is_some(),
        validated: (1..=VALIDATED_UP_TO).contains(&n),
    })
}

/// One row of an engine-versus-formula comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: u64,
    pub predicted_b: i64,
    pub engine_b: i64,
    #[serde(rename = "match")]
    pub matches: bool,
}

pub fn compare(n: u64, engine_b: i64) -> Result<Comparison> {
    let p = predict_b(n)?;
    Ok(Comparison {
        n,
        predicted_b: p.predicted,
        engine_b,
        matches: p.predicted == engine_b,
    })
}

//! CSV and JSON artefacts of a run.
//!
//! | file | columns |
//! |------|---------|
//! | boundary | `n,b_n,alpha_sqrt_n,predicted_b_n` |
//! | classification | `n,x,v_lower,v_upper,gain,verdict` |
//! | boundary comparison | `n,predicted_b,engine_b,match` |
//! | refined boundary | `t,b_t,alpha_sqrt_t` |
//!
//! Positions are written in the chosen [`Notation`]; values in heads
//! notation are mapped by `v / 2 + 1/2`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary_model::{self, Comparison};
use crate::engine::{BoundaryTable, Bracket, RefinedPoint, RunConfig, Verdict};
use crate::error::Result;
use crate::lowerbound::LowerBoundCalibration;
use crate::transform::{self, Notation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub n: u64,
    pub b_n: String,
    pub alpha_sqrt_n: f64,
    pub predicted_b_n: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub n: u64,
    pub x: String,
    pub v_lower: f64,
    pub v_upper: f64,
    pub gain: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedRow {
    pub t: f64,
    pub b_t: f64,
    pub alpha_sqrt_t: f64,
}

fn boundary_position(notation: Notation, n: u64, b: i64) -> String {
    match notation {
        Notation::Sym => b.to_string(),
        Notation::Heads | Notation::Hw => transform::boundary_sym_to_heads(n, b).to_string(),
    }
}

pub fn boundary_rows(table: &BoundaryTable, notation: Notation) -> Result<Vec<BoundaryRow>> {
    let mut rows = Vec::new();
    for level in &table.levels {
        let Some(b) = level.b else { continue };
        let n = level.n;
        let root = table.alpha * (n as f64).sqrt();
        let alpha_sqrt_n = match notation {
            Notation::Sym => root,
            _ => (root + n as f64) / 2.0,
        };
        let predicted = boundary_model::predict_b(n)?.predicted;
        rows.push(BoundaryRow {
            n,
            b_n: boundary_position(notation, n, b),
            alpha_sqrt_n,
            predicted_b_n: boundary_position(notation, n, predicted),
        });
    }
    Ok(rows)
}

pub fn classification_rows(table: &BoundaryTable, notation: Notation) -> Vec<ClassificationRow> {
    table
        .cells
        .iter()
        .map(|c| ClassificationRow {
            n: c.n,
            x: notation.position(c.n, c.x),
            v_lower: notation.value(c.v_lower),
            v_upper: notation.value(c.v_upper),
            gain: notation.value(c.gain),
            verdict: c.verdict,
        })
        .collect()
}

pub fn comparison_rows(table: &BoundaryTable) -> Result<Vec<Comparison>> {
    table
        .levels
        .iter()
        .filter_map(|l| Some((l.n, l.b?)))
        .map(|(n, b)| boundary_model::compare(n, b))
        .collect()
}

pub fn refined_rows(points: &[RefinedPoint], alpha: f64) -> Vec<RefinedRow> {
    points
        .iter()
        .map(|p| RefinedRow {
            t: p.t,
            b_t: p.b,
            alpha_sqrt_t: alpha * p.t.sqrt(),
        })
        .collect()
}

/// Writes `rows` with a header line.
pub fn write_csv<W: Write, R: Serialize>(writer: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<Rd: Read, R: for<'de> Deserialize<'de>>(reader: Rd) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Self-description of a run. `hash` covers every field except `hash`
/// itself and `runtime_seconds`, so equal configurations give equal hashes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub alpha: f64,
    pub calibration: Option<LowerBoundCalibration>,
    /// `[lower, upper]` rounded to `f64`.
    pub v00_bracket: Option<[f64; 2]>,
    /// The same bracket at full stored precision.
    pub v00: Option<Bracket>,
    pub unknown_count: u64,
    /// Levels where `b(n)` differs from the closed-form prediction.
    pub formula_mismatches: Vec<u64>,
    /// Levels where the prediction does not separate the cells reachable
    /// from the origin.
    pub reachable_separation_failures: Vec<u64>,
    pub runtime_seconds: f64,
    pub hash: String,
}

impl Manifest {
    pub fn new(table: &BoundaryTable, runtime_seconds: f64) -> Result<Self> {
        let mut formula_mismatches = Vec::new();
        let mut reachable_separation_failures = Vec::new();
        for level in table.levels.iter().filter(|l| l.n >= 1) {
            let predicted = boundary_model::predict_b(level.n)?.predicted;
            if level.b != Some(predicted) {
                formula_mismatches.push(level.n);
            }
            if level.reachable_b.is_some() && !level.separates_reachable(predicted) {
                reachable_separation_failures.push(level.n);
            }
        }
        let mut m = Self {
            config: table.config.clone(),
            alpha: table.alpha,
            calibration: table.calibration,
            v00_bracket: table.v00.map(|b| [b.lower.to_f64(), b.upper.to_f64()]),
            v00: table.v00,
            unknown_count: table.unknown_count,
            formula_mismatches,
            reachable_separation_failures,
            runtime_seconds,
            hash: String::new(),
        };
        m.hash = m.content_hash();
        Ok(m)
    }

    pub fn content_hash(&self) -> String {
        let mut copy = self.clone();
        copy.runtime_seconds = 0.0;
        copy.hash = String::new();
        let bytes = serde_json::to_vec(&copy).expect("manifest serialises");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

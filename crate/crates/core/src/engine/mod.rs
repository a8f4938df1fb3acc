//! Backward induction between the analytic bounds.
//!
//! Starting from a horizon `T`, where `V^W` bounds the value from above and
//! the calibrated `h_c` from below, both bounds are pushed back one level at
//! a time with
//!
//! ```text
//! V(n, x) = max(x / n, (V(n+1, x+1) + V(n+1, x-1)) / 2).
//! ```
//!
//! Only two levels are held in memory. A lattice point `(n, x)` is classified
//! as stopping when the continuation value of the upper bound is already below
//! the gain, and as continuing when the lower bound exceeds the gain.
//!
//! Positions are addressed by an integer lattice index `m`; the real position
//! is `x0 + m` and the real time is `t0 + n`, which lets the same code run on
//! shifted sublattices of a refined grid.

mod checkpoint;
mod driver;
mod lane;
pub mod reference;
mod slice;

use serde::{Deserialize, Serialize};

use crate::lowerbound::CalibrationOptions;
use crate::special_fn::ExtendedReal;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use driver::{classify, config_hash, run, run_partial, run_refined, ClassifyOptions, PointReport, RefinedPoint, RunStatus};
pub use lane::Lane;
pub use slice::{step_back, Geometry, Induction, StepVerdict, ValueSlice};

/// Number format of the value slices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// Plain `f64`.
    #[default]
    Standard,
    /// Double-double, about 32 significant digits.
    Extended,
}

impl Precision {
    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Standard => 0,
            Self::Extended => 1,
        }
    }
}

/// Which lattice cells are updated at each level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cutoff {
    /// Every cell that can influence the apex. Quadratic in `T`.
    FullCone,
    /// Cells in `[alpha sqrt t - margin - sigmas sqrt t, alpha sqrt t + margin]`.
    ///
    /// Below the window the upper bound is frozen to `V^W` and the lower bound
    /// to the gain; both stay valid bounds, and a walk started inside the cone
    /// reaches the lower edge with probability about `exp(-sigmas^2 / 2)`.
    /// Above the window both bounds equal the gain, which is the exact value
    /// there.
    Lateral { margin: u64, sigmas: f64 },
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::Lateral {
            margin: 200,
            sigmas: 10.0,
        }
    }
}

/// Offset `(t0, x0)` of a sublattice; the integer lattice has `(0, 0)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOffset {
    pub t0: f64,
    pub x0: f64,
}

impl GridOffset {
    pub fn is_zero(&self) -> bool {
        self.t0 == 0.0 && self.x0 == 0.0
    }
}

/// How the values at the horizon are seeded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalMode {
    /// `V^W` above, `h_c` below; fails if the calibration is not valid.
    #[default]
    Bounds,
    /// As `Bounds`, but with lower bound `max(x / T, 0)` when no valid
    /// calibration exists for the horizon.
    BoundsOrTrivial,
    /// `max(x/T, 0)` below and `max(x/T, 0) + min(sqrt(pi/T), 1/|x|)` above.
    Haggstrom,
}

/// Restrict the update to one parity class of `n + m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    #[default]
    Both,
    /// Cells with `n + m` even, the ones reachable from `(0, 0)`.
    Even,
    Odd,
}

impl Parity {
    #[inline]
    pub fn admits(self, n: u64, m: i64) -> bool {
        match self {
            Self::Both => true,
            Self::Even => (n as i64 + m).rem_euclid(2) == 0,
            Self::Odd => (n as i64 + m).rem_euclid(2) == 1,
        }
    }

    pub(crate) fn stride(self) -> i64 {
        if self == Self::Both {
            1
        } else {
            2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stop,
    Continue,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stop => "stop",
            Self::Continue => "continue",
            Self::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stop" => Ok(Self::Stop),
            "continue" => Ok(Self::Continue),
            "unknown" => Ok(Self::Unknown),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

/// A lattice point: level `n` and lattice index `x`. With a non-zero
/// [`GridOffset`] the real coordinates are `(t0 + n, x0 + x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub n: u64,
    pub x: i64,
}

impl LatticePoint {
    pub fn time(&self, offset: GridOffset) -> f64 {
        offset.t0 + self.n as f64
    }

    pub fn position(&self, offset: GridOffset) -> f64 {
        offset.x0 + self.x as f64
    }
}

/// Everything that determines the numbers a run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub horizon: u64,
    /// Levels `n <= depth` are classified and get a boundary entry.
    pub depth: u64,
    pub cutoff: Cutoff,
    pub precision: Precision,
    pub terminal: TerminalMode,
    pub calibration: CalibrationOptions,
    pub offset: GridOffset,
    pub parity: Parity,
    /// Half-width, around `alpha sqrt t`, of the per-cell records kept for
    /// each classified level.
    pub window: u64,
}

impl RunConfig {
    pub fn new(horizon: u64, depth: u64) -> Self {
        Self {
            horizon,
            depth,
            cutoff: Cutoff::default(),
            precision: Precision::default(),
            terminal: TerminalMode::default(),
            calibration: CalibrationOptions::default(),
            offset: GridOffset::default(),
            parity: Parity::default(),
            window: 3,
        }
    }
}

/// Settings that do not change the result.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub checkpoint: Option<std::path::PathBuf>,
    /// Levels between checkpoint writes.
    pub checkpoint_every: u64,
    /// Continue from `checkpoint` instead of starting at the horizon.
    pub resume: bool,
    /// Upper limit on slice storage, in bytes.
    pub memory_limit: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            threads: None,
            checkpoint: None,
            checkpoint_every: 10_000,
            resume: false,
            memory_limit: 4 << 30,
        }
    }
}

/// Values recorded for one classified cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub n: u64,
    pub x: i64,
    pub v_lower: f64,
    pub v_upper: f64,
    pub gain: f64,
    /// `(V_u(n+1, x+1) + V_u(n+1, x-1)) / 2`.
    pub cont_upper: f64,
    pub verdict: Verdict,
}

/// Boundary information for one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: u64,
    /// Lattice index of `b(n)`: the smallest index whose cell and the next
    /// two cells of the same parity class are all stopping.
    pub b: Option<i64>,
    /// The same search restricted to cells reachable from the origin
    /// (`m` of the parity of `n`).
    pub reachable_b: Option<i64>,
    pub unknown_count: u64,
    /// Stopping cells below `b(n)` and non-stopping cells above it.
    pub anomalies: Vec<i64>,
}

impl LevelRecord {
    /// Whether a boundary value `b` splits the reachable cells of this level
    /// correctly: every reachable cell at or above `b` stops and the
    /// reachable cell just below it does not.
    pub fn separates_reachable(&self, b: i64) -> bool {
        self.reachable_b.is_some_and(|rb| rb - 2 < b && b <= rb)
    }
}

/// Bracket on the value at the origin, `(V(1,1) + V(1,-1)) / 2` for each
/// bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: ExtendedReal,
    pub upper: ExtendedReal,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        (self.upper - self.lower).to_f64()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower.to_f64() <= v && v <= self.upper.to_f64()
    }
}

/// Output of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub config: RunConfig,
    pub alpha: f64,
    pub calibration: Option<crate::lowerbound::LowerBoundCalibration>,
    /// One entry per classified level, ascending in `n`.
    pub levels: Vec<LevelRecord>,
    pub cells: Vec<CellRecord>,
    /// Unknown points, at most [`BoundaryTable::MAX_UNKNOWNS`] of them.
    pub unknowns: Vec<LatticePoint>,
    pub unknown_count: u64,
    /// Present on the integer lattice only.
    pub v00: Option<Bracket>,
}

impl BoundaryTable {
    pub const MAX_UNKNOWNS: usize = 100_000;

    /// `b(n)` as a lattice index, if level `n` was classified.
    pub fn b(&self, n: u64) -> Option<i64> {
        let first = self.levels.first()?.n;
        self.levels.get(n.checked_sub(first)? as usize).and_then(|r| r.b)
    }
}

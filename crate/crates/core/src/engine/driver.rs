use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continuous;
use crate::error::{Error, Result};
use crate::lowerbound::{self, CalibrationOptions, LowerBoundCalibration};
use crate::special_fn::ExtendedReal;

use super::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use super::slice::Seed;
use super::{
    BoundaryTable, Bracket, CellRecord, Cutoff, Geometry, GridOffset, Induction, Lane, LatticePoint, LevelRecord,
    Parity, Precision, RunConfig, RunOptions, TerminalMode, Verdict,
};

const MAX_ANOMALIES: usize = 64;

/// SHA-256 of the canonical JSON form of `config`.
pub fn config_hash(config: &RunConfig) -> [u8; 32] {
    let bytes = serde_json::to_vec(config).expect("run configuration serialises");
    Sha256::digest(bytes).into()
}

/// Result of [`run_partial`].
#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Complete(BoundaryTable),
    /// Stopped after finishing `level`; the checkpoint holds the state.
    Halted { level: u64 },
}

fn validate(config: &RunConfig) -> Result<()> {
    let bad = |msg: &str| Err(Error::Config(msg.to_string()));
    if config.horizon < 2 {
        return bad("horizon must be at least 2");
    }
    if config.depth >= config.horizon {
        return bad("depth must be smaller than the horizon");
    }
    let GridOffset { t0, x0 } = config.offset;
    if !((0.0..1.0).contains(&t0) && (0.0..1.0).contains(&x0)) {
        return bad("grid offsets must lie in [0, 1)");
    }
    if let Cutoff::Lateral { sigmas, .. } = config.cutoff {
        if !(sigmas >= 0.0 && sigmas.is_finite()) {
            return bad("cutoff sigmas must be finite and non-negative");
        }
    }
    Ok(())
}

fn calibration_error(horizon: f64, e: Error) -> Error {
    match e {
        Error::Calibration { .. } | Error::InvalidCalibration { .. } => e,
        other => Error::Calibration {
            horizon,
            reason: other.to_string(),
        },
    }
}

fn seed_for(
    terminal: TerminalMode,
    horizon: f64,
    opts: CalibrationOptions,
) -> Result<(Seed, Option<LowerBoundCalibration>)> {
    match terminal {
        TerminalMode::Bounds => {
            let cal = lowerbound::calibrate_with(horizon, opts).map_err(|e| calibration_error(horizon, e))?;
            cal.require_valid()?;
            Ok((Seed::Bounds(cal), Some(cal)))
        }
        TerminalMode::BoundsOrTrivial => match lowerbound::calibrate_with(horizon, opts) {
            Ok(cal) if cal.valid => Ok((Seed::Bounds(cal), Some(cal))),
            Ok(cal) => Ok((Seed::Trivial, Some(cal))),
            Err(_) => Ok((Seed::Trivial, None)),
        },
        TerminalMode::Haggstrom => Ok((Seed::Haggstrom, None)),
    }
}

fn thread_count(threads: Option<usize>) -> usize {
    threads
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs the induction from `config.horizon` down to the lowest level.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<BoundaryTable> {
    match run_partial(config, opts, None)? {
        RunStatus::Complete(table) => Ok(table),
        RunStatus::Halted { level } => Err(Error::Checkpoint(format!("run halted at level {level}"))),
    }
}

/// Like [`run`], but stops once `halt_at` is reached, leaving a checkpoint.
pub fn run_partial(config: &RunConfig, opts: &RunOptions, halt_at: Option<u64>) -> Result<RunStatus> {
    match config.precision {
        Precision::Standard => execute::<f64>(config, opts, halt_at),
        Precision::Extended => execute::<ExtendedReal>(config, opts, halt_at),
    }
}

fn execute<L: Lane>(config: &RunConfig, opts: &RunOptions, halt_at: Option<u64>) -> Result<RunStatus> {
    validate(config)?;
    if halt_at.is_some() && opts.checkpoint.is_none() {
        return Err(Error::Config("halting needs a checkpoint path".into()));
    }
    let sol = *continuous::solution();
    let geometry = Geometry::new(sol, config.offset, config.cutoff, config.parity);
    let horizon_time = geometry.time(config.horizon);
    let (seed, calibration) = seed_for(config.terminal, horizon_time, config.calibration)?;

    let (lo, hi) = geometry
        .range(config.horizon)
        .ok_or_else(|| Error::Config("empty lattice range at the horizon".into()))?;
    let cells = (hi - lo + 1) as u64;
    let bytes = cells.saturating_mul(4 * std::mem::size_of::<L>() as u64);
    if bytes > opts.memory_limit {
        return Err(Error::Resource(format!(
            "{cells} cells per level need {bytes} bytes, limit is {}",
            opts.memory_limit
        )));
    }

    let hash = config_hash(config);
    let resumed = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => Some(read_checkpoint(path)?),
        (None, true) => return Err(Error::Config("resume needs a checkpoint path".into())),
        _ => None,
    };
    let (mut induction, mut table) = match resumed {
        Some(ckpt) => {
            if ckpt.config_hash != hash {
                return Err(Error::Checkpoint("checkpoint belongs to a different configuration".into()));
            }
            let slice = ckpt.to_slice::<L>()?;
            (Induction::from_slice(geometry, slice), ckpt.table)
        }
        None => {
            let table = BoundaryTable {
                config: config.clone(),
                alpha: sol.alpha,
                calibration,
                levels: Vec::new(),
                cells: Vec::new(),
                unknowns: Vec::new(),
                unknown_count: 0,
                v00: None,
            };
            (Induction::seeded(geometry, config.horizon, &seed)?, table)
        }
    };
    induction = induction.with_threads(thread_count(opts.threads))?;

    let floor = geometry.min_level();
    while induction.level() > floor {
        induction.step()?;
        let n = induction.level();
        if n <= config.depth {
            record_level(&induction, config, &mut table);
        }
        let due = opts.checkpoint_every > 0 && (config.horizon - n) % opts.checkpoint_every == 0;
        let halt = halt_at.is_some_and(|h| n <= h);
        if let Some(path) = &opts.checkpoint {
            if due || halt {
                let ckpt = Checkpoint::from_slice(hash, induction.current(), table.clone());
                write_checkpoint(path, &ckpt)?;
            }
        }
        if halt {
            return Ok(RunStatus::Halted { level: n });
        }
    }

    if config.offset.is_zero() && induction.level() == 1 {
        let slice = induction.current();
        if let (Some((ur, lr)), Some((ul, ll))) = (slice.get(1), slice.get(-1)) {
            table.v00 = Some(Bracket {
                lower: L::midpoint(lr, ll).to_extended(),
                upper: L::midpoint(ur, ul).to_extended(),
            });
        }
    }
    table.levels.sort_by_key(|r| r.n);
    Ok(RunStatus::Complete(table))
}

fn record_level<L: Lane>(ind: &Induction<L>, config: &RunConfig, table: &mut BoundaryTable) {
    let slice = ind.current();
    let g = ind.geometry();
    let n = slice.level;
    let (lo, hi) = (slice.x_min(), slice.x_max());
    let parity = config.parity;
    let stride = parity.stride();

    let verdicts: Vec<Option<Verdict>> = (lo..=hi)
        .map(|m| parity.admits(n, m).then(|| ind.verdict(m).map(|v| v.verdict)).flatten())
        .collect();
    let is_stop = |m: i64| m > hi || verdicts[(m - lo) as usize] == Some(Verdict::Stop);

    let b = first_stop_run(lo, hi, stride, |m| parity.admits(n, m), is_stop);
    let reachable = |m: i64| (n as i64 + m).rem_euclid(2) == 0;
    let reachable_b = (parity != Parity::Odd).then(|| first_stop_run(lo, hi, 2, reachable, is_stop));

    let mut anomalies = Vec::new();
    let mut unknown_count = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let m = lo + i as i64;
        let Some(v) = *v else { continue };
        if v == Verdict::Unknown {
            unknown_count += 1;
            if table.unknowns.len() < BoundaryTable::MAX_UNKNOWNS {
                table.unknowns.push(LatticePoint { n, x: m });
            }
        }
        let misplaced = if m < b { v == Verdict::Stop } else { v != Verdict::Stop };
        if misplaced && anomalies.len() < MAX_ANOMALIES {
            anomalies.push(m);
        }
    }
    table.unknown_count += unknown_count;
    table.levels.push(LevelRecord {
        n,
        b: Some(b),
        reachable_b,
        unknown_count,
        anomalies,
    });

    let center = g.sol.boundary(g.time(n)) - g.offset.x0;
    let w = config.window as i64;
    let from = (center.floor() as i64 - w).max(lo);
    let to = (center.ceil() as i64 + w).min(hi);
    for m in from..=to {
        if !parity.admits(n, m) {
            continue;
        }
        if let Some(v) = ind.verdict(m) {
            table.cells.push(CellRecord {
                n,
                x: m,
                v_lower: v.v_lower.to_f64(),
                v_upper: v.v_upper.to_f64(),
                gain: v.gain.to_f64(),
                cont_upper: v.cont_upper.to_f64(),
                verdict: v.verdict,
            });
        }
    }
}

/// Smallest admitted index `m` in `[lo, hi]` such that `m`, `m + stride` and
/// `m + 2 stride` all stop; indices above `hi` count as stopping.
fn first_stop_run(lo: i64, hi: i64, stride: i64, admits: impl Fn(i64) -> bool, is_stop: impl Fn(i64) -> bool) -> i64 {
    let mut m = lo;
    while !admits(m) {
        m += 1;
    }
    while m <= hi {
        if is_stop(m) && is_stop(m + stride) && is_stop(m + 2 * stride) {
            return m;
        }
        m += stride;
    }
    m
}

/// Settings for a single-point query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Defaults to `n + 1`.
    pub horizon: Option<u64>,
    pub precision: Precision,
    pub cutoff: Cutoff,
    pub terminal: TerminalMode,
    pub calibration: CalibrationOptions,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            precision: Precision::Standard,
            cutoff: Cutoff::default(),
            terminal: TerminalMode::BoundsOrTrivial,
            calibration: CalibrationOptions::default(),
            threads: None,
        }
    }
}

/// The verdict at one lattice point and the numbers behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub n: u64,
    pub x: i64,
    pub horizon: u64,
    pub verdict: Verdict,
    pub gain: f64,
    pub cont_upper: f64,
    pub cont_lower: f64,
    pub v_upper: f64,
    pub v_lower: f64,
    /// `false` when the horizon had no valid calibration and the lower
    /// bound started from `max(x/T, 0)`.
    pub lower_from_h_c: bool,
    pub calibration: Option<LowerBoundCalibration>,
}

/// Classifies `(n, x)` by induction over its backward cone from the horizon.
pub fn classify(n: u64, x: i64, opts: &ClassifyOptions) -> Result<PointReport> {
    match opts.precision {
        Precision::Standard => classify_with::<f64>(n, x, opts),
        Precision::Extended => classify_with::<ExtendedReal>(n, x, opts),
    }
}

fn classify_with<L: Lane>(n: u64, x: i64, opts: &ClassifyOptions) -> Result<PointReport> {
    if n == 0 {
        return Err(Error::Config("the gain x/n is undefined at n = 0".into()));
    }
    let horizon = opts.horizon.unwrap_or(n + 1);
    if horizon <= n {
        return Err(Error::Config(format!("horizon {horizon} must exceed n = {n}")));
    }
    let sol = *continuous::solution();
    let mut geometry = Geometry::new(sol, GridOffset::default(), opts.cutoff, Parity::Both);
    geometry.apex = LatticePoint { n, x };
    if !geometry.range(n).is_some_and(|(lo, hi)| lo <= x && x <= hi) {
        geometry.cutoff = Cutoff::FullCone;
    }
    let (seed, calibration) = seed_for(opts.terminal, horizon as f64, opts.calibration)?;
    let mut ind = Induction::<L>::seeded(geometry, horizon, &seed)?.with_threads(thread_count(opts.threads))?;
    ind.step_to(n)?;
    let v = ind
        .verdict(x)
        .ok_or_else(|| Error::Config(format!("({n}, {x}) is outside the computed range")))?;
    Ok(PointReport {
        n,
        x,
        horizon,
        verdict: v.verdict,
        gain: v.gain.to_f64(),
        cont_upper: v.cont_upper.to_f64(),
        cont_lower: v.cont_lower.to_f64(),
        v_upper: v.v_upper.to_f64(),
        v_lower: v.v_lower.to_f64(),
        lower_from_h_c: matches!(seed, Seed::Bounds(_)),
        calibration,
    })
}

/// One point of a boundary on a refined grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedPoint {
    pub t: f64,
    pub b: f64,
}

/// Boundary on the grid with spacing `1/d` in time and space, from `d^2`
/// runs on the shifted sublattices `(k/d, j/d)`.
pub fn run_refined(config: &RunConfig, d: u32, opts: &RunOptions) -> Result<Vec<RefinedPoint>> {
    if d == 0 {
        return Err(Error::Config("refinement must be at least 1".into()));
    }
    let mut points = Vec::new();
    for k in 0..d {
        let t0 = k as f64 / d as f64;
        let mut best: std::collections::BTreeMap<u64, f64> = Default::default();
        for j in 0..d {
            let x0 = j as f64 / d as f64;
            let mut cfg = config.clone();
            cfg.offset = GridOffset { t0, x0 };
            cfg.parity = Parity::Both;
            cfg.window = 0;
            let table = run(&cfg, opts)?;
            for level in &table.levels {
                if let Some(b) = level.b {
                    let x = x0 + b as f64;
                    best.entry(level.n).and_modify(|v| *v = v.min(x)).or_insert(x);
                }
            }
        }
        points.extend(best.into_iter().map(|(n, b)| RefinedPoint { t: t0 + n as f64, b }));
    }
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(points)
}

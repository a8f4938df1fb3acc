use std::sync::Arc;

use rayon::prelude::*;

use crate::continuous::ContinuousSolution;
use crate::error::{Error, Result};
use crate::lowerbound::LowerBoundCalibration;

use super::{Cutoff, GridOffset, Lane, LatticePoint, Parity, Precision, Verdict};

/// Chunk length for parallel updates; shorter levels are updated serially.
const CHUNK: usize = 4096;

/// Shape of the computed region: which cells exist at each level and what
/// stands in for the cells that do not.
#[derive(Clone, Copy, Debug)]
pub struct Geometry {
    pub sol: ContinuousSolution,
    pub offset: GridOffset,
    pub cutoff: Cutoff,
    pub parity: Parity,
    /// The point whose backward cone is computed; `(0, 0)` for a full run.
    pub apex: LatticePoint,
}

impl Geometry {
    pub fn new(sol: ContinuousSolution, offset: GridOffset, cutoff: Cutoff, parity: Parity) -> Self {
        Self {
            sol,
            offset,
            cutoff,
            parity,
            apex: LatticePoint { n: 0, x: 0 },
        }
    }

    #[inline]
    pub fn time(&self, n: u64) -> f64 {
        self.offset.t0 + n as f64
    }

    #[inline]
    pub fn position(&self, m: i64) -> f64 {
        self.offset.x0 + m as f64
    }

    /// Lowest level with positive time.
    pub fn min_level(&self) -> u64 {
        if self.offset.t0 > 0.0 {
            0
        } else {
            1
        }
    }

    /// Inclusive index range at level `n`, or `None` if it is empty.
    pub fn range(&self, n: u64) -> Option<(i64, i64)> {
        let d = n.checked_sub(self.apex.n)? as i64;
        let mut lo = self.apex.x - d - 1;
        let mut hi = self.apex.x + d + 1;
        if let Cutoff::Lateral { margin, sigmas } = self.cutoff {
            let t = self.time(n);
            let b = self.sol.boundary(t) - self.offset.x0;
            let spread = (sigmas * t.sqrt()).ceil() as i64;
            lo = lo.max(b.floor() as i64 - margin as i64 - spread);
            hi = hi.min(b.ceil() as i64 + margin as i64);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Bounds used for a cell outside the stored range of level `n`.
    #[inline]
    fn outside<L: Lane>(&self, n: u64, m: i64, below: bool) -> (L, L) {
        let t = self.time(n);
        let x = self.position(m);
        let gain = L::ratio(x, t);
        if below {
            let upper = if x > self.sol.boundary(t) {
                gain
            } else {
                L::max(L::from_f64(self.sol.v_w_unchecked(t, x)), gain)
            };
            (upper, gain)
        } else {
            (gain, gain)
        }
    }

    #[inline]
    fn neighbour<L: Lane>(&self, prev: &ValueSlice<L>, m: i64) -> (L, L) {
        let i = m - prev.lo;
        if i < 0 {
            self.outside(prev.level, m, true)
        } else if let (Some(&u), Some(&l)) = (prev.upper.get(i as usize), prev.lower.get(i as usize)) {
            (u, l)
        } else {
            self.outside(prev.level, m, false)
        }
    }

    fn fill<L: Lane>(&self, prev: &ValueSlice<L>, n: u64, m0: i64, upper: &mut [L], lower: &mut [L]) {
        let t = self.time(n);
        for (i, (u, l)) in upper.iter_mut().zip(lower.iter_mut()).enumerate() {
            let m = m0 + i as i64;
            if !self.parity.admits(n, m) {
                *u = L::from_f64(f64::NAN);
                *l = L::from_f64(f64::NAN);
                continue;
            }
            let (up_r, low_r) = self.neighbour(prev, m + 1);
            let (up_l, low_l) = self.neighbour(prev, m - 1);
            let gain = L::ratio(self.position(m), t);
            *u = L::max(gain, L::midpoint(up_r, up_l));
            *l = L::max(gain, L::midpoint(low_r, low_l));
        }
    }
}

/// One level of upper and lower values, indexed from lattice index `lo`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueSlice<L> {
    pub level: u64,
    pub lo: i64,
    pub upper: Vec<L>,
    pub lower: Vec<L>,
}

impl<L: Lane> ValueSlice<L> {
    pub fn precision(&self) -> Precision {
        L::PRECISION
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Lowest stored lattice index.
    pub fn x_min(&self) -> i64 {
        self.lo
    }

    /// Highest stored lattice index.
    pub fn x_max(&self) -> i64 {
        self.lo + self.upper.len() as i64 - 1
    }

    /// `(upper, lower)` at lattice index `m`, if stored.
    pub fn get(&self, m: i64) -> Option<(L, L)> {
        let i = usize::try_from(m - self.lo).ok()?;
        Some((*self.upper.get(i)?, *self.lower.get(i)?))
    }
}

/// How the horizon level is seeded.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Seed {
    Bounds(LowerBoundCalibration),
    Trivial,
    Haggstrom,
}

impl Seed {
    fn values<L: Lane>(&self, sol: &ContinuousSolution, t: f64, x: f64) -> (L, L) {
        let gain = L::ratio(x, t);
        let floor = L::max(gain, L::from_f64(0.0));
        match self {
            Seed::Bounds(cal) => {
                if x > sol.boundary(t) {
                    (gain, gain)
                } else {
                    let upper = L::max(L::from_f64(sol.h_unchecked(t, x)), gain);
                    let lower = L::max(L::from_f64(cal.h_c_unchecked(t, x)), gain);
                    (upper, lower)
                }
            }
            Seed::Trivial => {
                let upper = if x > sol.boundary(t) {
                    gain
                } else {
                    L::max(L::from_f64(sol.h_unchecked(t, x)), gain)
                };
                (upper, floor)
            }
            Seed::Haggstrom => {
                let slack = (std::f64::consts::PI / t).sqrt().min(1.0 / x.abs());
                let upper = L::max(L::from_f64((x / t).max(0.0) + slack), floor);
                (upper, floor)
            }
        }
    }
}

/// Computes level `prev.level - 1` from `prev` on the calling thread.
pub fn step_back<L: Lane>(geometry: &Geometry, prev: &ValueSlice<L>) -> Result<ValueSlice<L>> {
    let mut out = ValueSlice {
        level: 0,
        lo: 0,
        upper: Vec::new(),
        lower: Vec::new(),
    };
    step_into(geometry, prev, &mut out, false)?;
    Ok(out)
}

fn step_into<L: Lane>(g: &Geometry, prev: &ValueSlice<L>, out: &mut ValueSlice<L>, parallel: bool) -> Result<()> {
    let n = prev
        .level
        .checked_sub(1)
        .filter(|&n| g.time(n) > 0.0)
        .ok_or(Error::NonPositiveTime(g.time(prev.level) - 1.0))?;
    let (lo, hi) = g
        .range(n)
        .ok_or_else(|| Error::Config(format!("empty lattice range at level {n}")))?;
    let len = (hi - lo + 1) as usize;
    out.level = n;
    out.lo = lo;
    out.upper.clear();
    out.lower.clear();
    out.upper.resize(len, L::from_f64(0.0));
    out.lower.resize(len, L::from_f64(0.0));
    if parallel && len > CHUNK {
        out.upper
            .par_chunks_mut(CHUNK)
            .zip(out.lower.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(k, (u, l))| g.fill(prev, n, lo + (k * CHUNK) as i64, u, l));
    } else {
        g.fill(prev, n, lo, &mut out.upper, &mut out.lower);
    }
    Ok(())
}

/// Classification of one cell together with the quantities behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepVerdict<L> {
    pub verdict: Verdict,
    pub gain: L,
    pub cont_upper: L,
    pub cont_lower: L,
    pub v_upper: L,
    pub v_lower: L,
}

/// A backward induction in progress: the current level and, after the
/// first step, the level above it.
pub struct Induction<L> {
    geometry: Geometry,
    current: ValueSlice<L>,
    previous: Option<ValueSlice<L>>,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl<L: Lane> Induction<L> {
    /// Seeds level `horizon` from the analytic bounds.
    pub(crate) fn seeded(geometry: Geometry, horizon: u64, seed: &Seed) -> Result<Self> {
        let (lo, hi) = geometry
            .range(horizon)
            .ok_or_else(|| Error::Config(format!("empty lattice range at horizon {horizon}")))?;
        let t = geometry.time(horizon);
        let len = (hi - lo + 1) as usize;
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        upper
            .try_reserve_exact(len)
            .and_then(|_| lower.try_reserve_exact(len))
            .map_err(|e| Error::Resource(format!("{len} cells: {e}")))?;
        for m in lo..=hi {
            let (u, l) = if geometry.parity.admits(horizon, m) {
                seed.values::<L>(&geometry.sol, t, geometry.position(m))
            } else {
                (L::from_f64(f64::NAN), L::from_f64(f64::NAN))
            };
            upper.push(u);
            lower.push(l);
        }
        Ok(Self::from_slice(geometry, ValueSlice { level: horizon, lo, upper, lower }))
    }

    /// Seeds level `horizon` with `V^W` above and `h_c` below.
    pub fn with_bounds(geometry: Geometry, horizon: u64, cal: &LowerBoundCalibration) -> Result<Self> {
        cal.require_valid()?;
        Self::seeded(geometry, horizon, &Seed::Bounds(*cal))
    }

    /// Resumes from a stored slice.
    pub fn from_slice(geometry: Geometry, slice: ValueSlice<L>) -> Self {
        Self {
            geometry,
            current: slice,
            previous: None,
            pool: None,
        }
    }

    /// Runs level updates on `threads` workers.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        self.pool = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Resource(e.to_string()))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(self)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn level(&self) -> u64 {
        self.current.level
    }

    pub fn current(&self) -> &ValueSlice<L> {
        &self.current
    }

    /// The level above the current one, available after a step.
    pub fn previous(&self) -> Option<&ValueSlice<L>> {
        self.previous.as_ref()
    }

    pub fn into_current(self) -> ValueSlice<L> {
        self.current
    }

    /// Moves one level down.
    pub fn step(&mut self) -> Result<()> {
        let mut out = self.previous.take().unwrap_or_else(|| ValueSlice {
            level: 0,
            lo: 0,
            upper: Vec::new(),
            lower: Vec::new(),
        });
        let g = &self.geometry;
        let prev = &self.current;
        match &self.pool {
            Some(pool) => pool.install(|| step_into(g, prev, &mut out, true))?,
            None => step_into(g, prev, &mut out, false)?,
        }
        self.previous = Some(std::mem::replace(&mut self.current, out));
        Ok(())
    }

    /// Steps down to `level`.
    pub fn step_to(&mut self, level: u64) -> Result<()> {
        while self.level() > level {
            self.step()?;
        }
        Ok(())
    }

    /// Classifies the cell at lattice index `m` of the current level.
    ///
    /// Stop when `(V_u(n+1, x+1) + V_u(n+1, x-1)) / 2 < x / n`, continue when
    /// `V_l(n, x) > x / n`, unknown otherwise.
    pub fn verdict(&self, m: i64) -> Option<StepVerdict<L>> {
        let prev = self.previous.as_ref()?;
        let (v_upper, v_lower) = self.current.get(m)?;
        let g = &self.geometry;
        let (up_r, low_r) = g.neighbour(prev, m + 1);
        let (up_l, low_l) = g.neighbour(prev, m - 1);
        let gain = L::ratio(g.position(m), g.time(self.current.level));
        let cont_upper = L::midpoint(up_r, up_l);
        let cont_lower = L::midpoint(low_r, low_l);
        let verdict = if cont_upper < gain {
            Verdict::Stop
        } else if v_lower > gain {
            Verdict::Continue
        } else {
            Verdict::Unknown
        };
        Some(StepVerdict {
            verdict,
            gain,
            cont_upper,
            cont_lower,
            v_upper,
            v_lower,
        })
    }
}

//! A deliberately plain implementation of the induction, kept as an oracle:
//! whole cone, `f64`, one loop, every level kept.

use crate::continuous;
use crate::lowerbound::LowerBoundCalibration;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceLevel {
    pub n: u64,
    /// Position of the first entry.
    pub lo: i64,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl ReferenceLevel {
    pub fn get(&self, x: i64) -> Option<(f64, f64)> {
        let i = usize::try_from(x - self.lo).ok()?;
        Some((*self.upper.get(i)?, *self.lower.get(i)?))
    }
}

/// Levels `horizon` down to 1 over positions `|x| <= n + 1`.
pub fn full_cone(horizon: u64, cal: &LowerBoundCalibration) -> Vec<ReferenceLevel> {
    let sol = continuous::solution();
    let t = horizon as f64;
    let reach = horizon as i64 + 1;
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for x in -reach..=reach {
        let xf = x as f64;
        let g = xf / t;
        if xf > sol.alpha * t.sqrt() {
            upper.push(g);
            lower.push(g);
        } else {
            upper.push(sol.h(t, xf).unwrap().max(g));
            lower.push(cal.h_c(t, xf).unwrap().max(g));
        }
    }
    let mut levels = vec![ReferenceLevel {
        n: horizon,
        lo: -reach,
        upper,
        lower,
    }];
    for n in (1..horizon).rev() {
        let prev = levels.last().unwrap();
        let reach = n as i64 + 1;
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for x in -reach..=reach {
            let g = x as f64 / n as f64;
            let r = (x + 1 - prev.lo) as usize;
            let l = (x - 1 - prev.lo) as usize;
            upper.push(g.max((prev.upper[r] + prev.upper[l]) * 0.5));
            lower.push(g.max((prev.lower[r] + prev.lower[l]) * 0.5));
        }
        levels.push(ReferenceLevel {
            n,
            lo: -reach,
            upper,
            lower,
        });
    }
    levels
}

/// `(lower, upper)` bracket on the value at the origin from level 1.
pub fn origin_bracket(levels: &[ReferenceLevel]) -> Option<(f64, f64)> {
    let one = levels.iter().find(|l| l.n == 1)?;
    let (ur, lr) = one.get(1)?;
    let (ul, ll) = one.get(-1)?;
    Some(((lr + ll) * 0.5, (ur + ul) * 0.5))
}

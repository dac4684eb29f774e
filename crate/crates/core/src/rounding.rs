//! Iterative rounding on top of column generation.
//!
//! `solve` alternates two moves until the fractional plan is binary: run
//! column generation to optimality under the current fixes, then pin a few
//! plan cells. Pinning follows the least-damage rule: cells already at one
//! are kept, and among the strictly fractional cells the one closest to
//! either bound is pushed onto that bound (onto one only if the slot still
//! has room for the content). Each rounding pass also drops pooled columns
//! that contradict the new fixes, sweeps cells that can no longer fit into
//! their slot to zero, and reseeds every content with a canonical
//! fix-compatible column so the master always stays feasible.
//!
//! The reported lower bound comes from the first generation pass, before
//! any fix constrains the relaxation.

use std::time::Instant;

use serde::Serialize;

use crate::colgen::{run_cga, ColumnPool, FractionalSolution};
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};

/// Cells closer than this to 0 or 1 count as integral.
pub const INT_TOL: f64 = 1e-6;

/// Per-cell plan decisions taken so far, indexed `[slot][content]`.
/// Tracks the total size pinned into each slot so a set of fixes can never
/// promise more than the cache holds.
#[derive(Debug, Clone)]
pub struct FixSet {
    cells: Vec<Vec<Option<bool>>>,
    fixed_load: Vec<f64>,
}

impl FixSet {
    pub fn new(num_slots: usize, num_contents: usize) -> FixSet {
        FixSet {
            cells: vec![vec![None; num_contents]; num_slots],
            fixed_load: vec![0.0; num_slots],
        }
    }

    pub fn num_slots(&self) -> usize {
        self.cells.len()
    }

    pub fn num_contents(&self) -> usize {
        self.cells[0].len()
    }

    pub fn get(&self, t: usize, f: usize) -> Option<bool> {
        self.cells[t][f]
    }

    pub fn num_fixed(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn fixed_load(&self, t: usize) -> f64 {
        self.fixed_load[t]
    }

    pub fn remaining_capacity(&self, t: usize, inst: &Instance) -> f64 {
        inst.capacity() - self.fixed_load[t]
    }

    pub fn fix_zero(&mut self, t: usize, f: usize) -> Result<()> {
        match self.cells[t][f] {
            Some(true) => Err(Error::FixConflict { slot: t, content: f }),
            _ => {
                self.cells[t][f] = Some(false);
                Ok(())
            }
        }
    }

    pub fn fix_one(&mut self, t: usize, f: usize, inst: &Instance) -> Result<()> {
        match self.cells[t][f] {
            Some(false) => Err(Error::FixConflict { slot: t, content: f }),
            Some(true) => Ok(()),
            None => {
                let load = self.fixed_load[t] + inst.size(f);
                if load > inst.capacity() {
                    return Err(Error::Internal(format!(
                        "pinning content {f} into slot {t} would commit {load} of {} capacity",
                        inst.capacity()
                    )));
                }
                self.cells[t][f] = Some(true);
                self.fixed_load[t] = load;
                Ok(())
            }
        }
    }
}

/// One rounding pass over a fractional plan. Fixes at least one cell or
/// fails with `NoFractionalCell`.
pub fn round_step(
    inst: &Instance,
    frac: &FractionalSolution,
    pool: &mut ColumnPool,
    fixes: &mut FixSet,
) -> Result<()> {
    let num_slots = inst.num_slots();
    let num_contents = inst.num_contents();

    // Keep everything the relaxation already committed to.
    for t in 0..num_slots {
        for f in 0..num_contents {
            if fixes.get(t, f).is_none() && frac.z[t][f] >= 1.0 - INT_TOL {
                fixes.fix_one(t, f, inst)?;
                pool.discard_where_not_cached(f, t);
            }
        }
    }

    // Push the fractional cell nearest to a bound onto that bound.
    let mut down: Option<(f64, usize, usize)> = None;
    let mut up: Option<(f64, usize, usize)> = None;
    for t in 0..num_slots {
        for f in 0..num_contents {
            if fixes.get(t, f).is_some() {
                continue;
            }
            let z = frac.z[t][f];
            if z <= INT_TOL || z >= 1.0 - INT_TOL {
                continue;
            }
            if down.is_none_or(|(best, _, _)| z < best) {
                down = Some((z, t, f));
            }
            if up.is_none_or(|(best, _, _)| 1.0 - z < best) {
                up = Some((1.0 - z, t, f));
            }
        }
    }
    match (down, up) {
        (None, _) | (_, None) => return Err(Error::NoFractionalCell),
        (Some((zd, td, fd)), Some((zu, tu, fu))) => {
            if zd < zu {
                fixes.fix_zero(td, fd)?;
                pool.discard_where_cached(fd, td);
            } else if inst.size(fu) <= fixes.remaining_capacity(tu, inst) {
                fixes.fix_one(tu, fu, inst)?;
                pool.discard_where_not_cached(fu, tu);
            } else {
                fixes.fix_zero(tu, fu)?;
                pool.discard_where_cached(fu, tu);
            }
        }
    }

    // Anything that no longer fits beside the pinned content cannot be
    // cached; settle it now rather than rediscovering it fractionally.
    for t in 0..num_slots {
        let room = fixes.remaining_capacity(t, inst);
        for f in 0..num_contents {
            if fixes.get(t, f).is_none() && inst.size(f) > room {
                fixes.fix_zero(t, f)?;
                pool.discard_where_cached(f, t);
            }
        }
    }

    for f in 0..num_contents {
        pool.ensure_complying_column(inst, f, fixes)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub columns_generated: usize,
    pub lb: f64,
    pub cost: f64,
    pub gap: f64,
    pub runtime_ms: u64,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub schedule: Schedule,
    pub lower_bound: f64,
    pub stats: SolveStats,
}

/// Relative gap in percent, zero when the two agree to rounding noise.
pub fn gap_pct(cost: f64, lb: f64) -> f64 {
    let diff = (cost - lb).max(0.0);
    if diff <= 1e-9 {
        0.0
    } else {
        100.0 * diff / lb.abs().max(1e-12)
    }
}

/// Full solve: column generation plus iterative rounding down to a binary,
/// capacity-feasible plan. The lower bound is valid for the exact optimum.
pub fn solve(inst: &Instance) -> Result<SolveOutcome> {
    let start = Instant::now();
    let mut pool = ColumnPool::new(inst);
    let mut fixes = FixSet::new(inst.num_slots(), inst.num_contents());
    let mut lower_bound = None;
    let mut outer = 0usize;
    let mut columns_generated = 0usize;
    let guard = inst.num_slots() * inst.num_contents() + 2;

    loop {
        outer += 1;
        if outer > guard {
            return Err(Error::Internal(format!(
                "rounding exceeded {guard} passes without reaching a binary plan"
            )));
        }
        let out = run_cga(inst, &mut pool, &fixes)?;
        columns_generated += out.columns_added;
        let lb = *lower_bound.get_or_insert(out.lower_bound);
        if out.fractional.z_integral(INT_TOL) {
            let schedule = decode(inst, &pool, &out.fractional, &fixes)?;
            let cost = schedule.breakdown().total;
            let stats = SolveStats {
                iterations: outer,
                columns_generated,
                lb,
                cost,
                gap: gap_pct(cost, lb),
                runtime_ms: start.elapsed().as_millis() as u64,
            };
            return Ok(SolveOutcome {
                schedule,
                lower_bound: lb,
                stats,
            });
        }
        let fixed_before = fixes.num_fixed();
        round_step(inst, &out.fractional, &mut pool, &mut fixes)?;
        if fixes.num_fixed() == fixed_before {
            return Err(Error::Internal("rounding pass fixed no cell".into()));
        }
    }
}

/// Reads the binary plan out of the final master solution. Takes the column
/// carrying essentially the whole weight of its content when there is one;
/// otherwise the weight is split across columns with an identical cached
/// pattern, and the cheapest of them is as good.
fn decode(
    inst: &Instance,
    pool: &ColumnPool,
    frac: &FractionalSolution,
    fixes: &FixSet,
) -> Result<Schedule> {
    let mut columns = Vec::with_capacity(inst.num_contents());
    for f in 0..inst.num_contents() {
        let chosen = frac.weights[f]
            .iter()
            .position(|&w| w >= 1.0 - INT_TOL)
            .map(|k| pool.columns(f)[k].clone());
        let col = match chosen {
            Some(c) => c,
            None => {
                let pattern: Vec<bool> =
                    (0..inst.num_slots()).map(|t| frac.z[t][f] >= 0.5).collect();
                pool.columns(f)
                    .iter()
                    .filter(|c| (0..inst.num_slots()).all(|t| c.cached(t) == pattern[t]))
                    .map(|c| (crate::model::column_cost(inst, c).unwrap_or(f64::INFINITY), c))
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .map(|(_, c)| c.clone())
                    .ok_or_else(|| {
                        Error::Internal(format!(
                            "no pooled column of content {f} matches the rounded plan"
                        ))
                    })?
            }
        };
        for t in 0..inst.num_slots() {
            if let Some(v) = fixes.get(t, f) {
                if col.cached(t) != v {
                    return Err(Error::Internal(format!(
                        "decoded plan contradicts the fix at slot {t}, content {f}"
                    )));
                }
            }
        }
        columns.push(col);
    }
    Schedule::new(inst, columns)
}

//! Column generation for the fractional relaxation of the cache plan.
//!
//! The restricted master problem mixes per-content plan columns: one weight
//! per column, a convexity row per content forcing the weights of each
//! content to sum to one, and a capacity row per slot. Pricing asks, for
//! each content separately, for the plan column with the most negative
//! reduced cost under the current duals. That search is a shortest path on
//! a layered acyclic graph whose nodes track the cache age of the content
//! per slot, so it handles the negative arc weights that appear as soon as
//! caching is worthwhile.
//!
//! The loop stops when pricing produces no column that is not already
//! pooled. The reported lower bound is the master objective when every
//! content priced out clean; in the rare degenerate case where the best
//! column is negative but already pooled, the bound falls back to the
//! capacity-relaxed form `sum_t pi_t S + sum_f (beta_f + min(0, rc_f))`,
//! which stays valid for the integral optimum.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolution, LpStatus};
use crate::model::{column_cost, Column, Instance};
use crate::rounding::FixSet;

/// A column only enters the pool when it undercuts zero by this much.
pub const REDUCED_COST_EPS: f64 = 1e-7;

const MAX_ITERATIONS: usize = 10_000;

/// Per-content collections of candidate plan columns, deduplicated by their
/// age trajectory.
#[derive(Debug, Clone)]
pub struct ColumnPool {
    columns: Vec<Vec<Column>>,
    seen: Vec<HashSet<Vec<Option<u32>>>>,
}

impl ColumnPool {
    /// Starts with the never-cached column for every content, which is
    /// feasible under any capacity and any set of zero-fixes.
    pub fn new(inst: &Instance) -> ColumnPool {
        let f = inst.num_contents();
        let mut pool = ColumnPool {
            columns: vec![Vec::new(); f],
            seen: vec![HashSet::new(); f],
        };
        for c in 0..f {
            pool.insert(Column::never_cached(c, inst.num_slots()));
        }
        pool
    }

    pub fn num_contents(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self, f: usize) -> &[Column] {
        &self.columns[f]
    }

    pub fn total_len(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Returns true when the column was not already pooled.
    pub fn insert(&mut self, col: Column) -> bool {
        let f = col.content();
        if !self.seen[f].insert(col.ages().to_vec()) {
            return false;
        }
        self.columns[f].push(col);
        true
    }

    /// Drops every column of `f` that caches slot `t`, returning how many went.
    pub fn discard_where_cached(&mut self, f: usize, t: usize) -> usize {
        let cols = &mut self.columns[f];
        let seen = &mut self.seen[f];
        let before = cols.len();
        cols.retain(|c| {
            if c.cached(t) {
                seen.remove(c.ages());
                false
            } else {
                true
            }
        });
        before - cols.len()
    }

    /// Drops every column of `f` that leaves slot `t` uncached.
    pub fn discard_where_not_cached(&mut self, f: usize, t: usize) -> usize {
        let cols = &mut self.columns[f];
        let seen = &mut self.seen[f];
        let before = cols.len();
        cols.retain(|c| {
            if c.cached(t) {
                true
            } else {
                seen.remove(c.ages());
                false
            }
        });
        before - cols.len()
    }

    /// Guarantees `f` has a column compatible with the fixes: a fresh
    /// download at every slot pinned to caching, absent everywhere else.
    /// Keeps the master feasible after discards. Returns true if inserted.
    pub fn ensure_complying_column(
        &mut self,
        inst: &Instance,
        f: usize,
        fixes: &FixSet,
    ) -> Result<bool> {
        let ages = (0..inst.num_slots())
            .map(|t| if fixes.get(t, f) == Some(true) { Some(0) } else { None })
            .collect();
        Ok(self.insert(Column::new(f, ages)?))
    }
}

/// Dual prices of the master: `pi[t]` for the slot-`t` capacity row
/// (nonpositive at an optimum) and `beta[f]` for the convexity row of
/// content `f`.
#[derive(Debug, Clone)]
pub struct DualPrices {
    pub pi: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    Source,
    /// Content not in the cache during `slot`; slot 0 is the virtual start.
    NotCached(usize),
    /// Content cached during `slot` (1-based) with the given age.
    Cached { slot: usize, age: u32 },
    Sink,
}

impl NodeLabel {
    fn name(&self) -> String {
        match self {
            NodeLabel::Source => "source".into(),
            NodeLabel::Sink => "sink".into(),
            NodeLabel::NotCached(t) => format!("off{t}"),
            NodeLabel::Cached { slot, age } => format!("on{slot}a{age}"),
        }
    }
}

/// Layered pricing graph for one content. Nodes appear in topological
/// order; every arc goes from an earlier node to a later one.
#[derive(Debug, Clone)]
pub struct PricingGraph {
    content: usize,
    num_slots: usize,
    labels: Vec<NodeLabel>,
    arcs: Vec<(usize, usize, f64)>,
    source: usize,
    sink: usize,
}

impl PricingGraph {
    pub fn content(&self) -> usize {
        self.content
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn arcs(&self) -> &[(usize, usize, f64)] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// One line per arc: `<from> <to> <weight>`.
    pub fn dump_edges(&self) -> String {
        let mut out = String::new();
        for &(from, to, w) in &self.arcs {
            out.push_str(&format!(
                "{} {} {}\n",
                self.labels[from].name(),
                self.labels[to].name(),
                w
            ));
        }
        out
    }
}

/// Builds the pricing graph for content `f` under the given duals.
///
/// Arc weights are arranged so that the cost of any source-to-sink path
/// equals the reduced cost of the column it spells out:
/// `column_cost - sum_t l_f pi_t x_t - beta_f`. Slots fixed to caching lose
/// their not-cached node, slots fixed to absence lose their cached nodes.
pub fn build_pricing_graph(
    inst: &Instance,
    f: usize,
    duals: &DualPrices,
    fixes: &FixSet,
) -> Result<PricingGraph> {
    let num_slots = inst.num_slots();
    if f >= inst.num_contents() {
        return Err(Error::Dimension(format!(
            "content index {f} out of range for {} contents",
            inst.num_contents()
        )));
    }
    if duals.pi.len() != num_slots || duals.beta.len() != inst.num_contents() {
        return Err(Error::Dimension("dual vector shape mismatch".into()));
    }
    if let Some(p) = duals.pi.iter().find(|p| **p > 1e-7) {
        return Err(Error::Internal(format!("capacity dual must be nonpositive, got {p}")));
    }

    let l = inst.size(f);
    let cs = inst.cost_server();
    let cb = inst.cost_cache();
    let lam = inst.aoi_weight();
    let m = |slot: usize| inst.demand(f, slot - 1) as f64;
    // Entering the cache: pay the fetch, stop paying server rates, start
    // paying the capacity price for the slot.
    let gain = |slot: usize| l * m(slot) * (cs - cb) + l * duals.pi[slot - 1];
    let fetch = l * (cs - cb);
    let all_server: f64 = (1..=num_slots).map(|t| l * m(t) * cs).sum();

    let mut labels = vec![NodeLabel::Source, NodeLabel::NotCached(0)];
    let mut arcs: Vec<(usize, usize, f64)> = vec![(0, 1, all_server)];
    let mut prev_off: Option<usize> = Some(1);
    let mut prev_on: Vec<(u32, usize)> = Vec::new();

    for slot in 1..=num_slots {
        let fix = fixes.get(slot - 1, f);
        let mut cur_on: Vec<(u32, usize)> = Vec::new();
        if fix != Some(false) {
            labels.push(NodeLabel::Cached { slot, age: 0 });
            let fresh = labels.len() - 1;
            cur_on.push((0, fresh));
            let fresh_weight = fetch - gain(slot);
            if let Some(off) = prev_off {
                arcs.push((off, fresh, fresh_weight));
            }
            for &(_, from) in &prev_on {
                arcs.push((from, fresh, fresh_weight));
            }
            for &(age, from) in &prev_on {
                labels.push(NodeLabel::Cached { slot, age: age + 1 });
                let kept = labels.len() - 1;
                let weight = lam * inst.penalty(f, age + 1) * m(slot) - gain(slot);
                arcs.push((from, kept, weight));
                cur_on.push((age + 1, kept));
            }
        }
        let cur_off = if fix != Some(true) {
            labels.push(NodeLabel::NotCached(slot));
            let off = labels.len() - 1;
            if let Some(from) = prev_off {
                arcs.push((from, off, 0.0));
            }
            for &(_, from) in &prev_on {
                arcs.push((from, off, 0.0));
            }
            Some(off)
        } else {
            None
        };
        prev_off = cur_off;
        prev_on = cur_on;
    }

    labels.push(NodeLabel::Sink);
    let sink = labels.len() - 1;
    if let Some(from) = prev_off {
        arcs.push((from, sink, -duals.beta[f]));
    }
    for &(_, from) in &prev_on {
        arcs.push((from, sink, -duals.beta[f]));
    }

    Ok(PricingGraph {
        content: f,
        num_slots,
        labels,
        arcs,
        source: 0,
        sink,
    })
}

#[derive(Clone)]
struct PathLabel {
    cost: f64,
    cached: u32,
    // Per visited slot: -1 absent, otherwise the cache age.
    traj: Vec<i64>,
}

fn improves(cand: &PathLabel, cur: &PathLabel) -> bool {
    if cand.cost != cur.cost {
        return cand.cost < cur.cost;
    }
    if cand.cached != cur.cached {
        return cand.cached < cur.cached;
    }
    cand.traj < cur.traj
}

/// Cheapest source-to-sink path by a single pass in topological order.
/// Ties prefer fewer cached slots, then the lexicographically smallest
/// trajectory with absence ordered before any age. Returns the column and
/// its reduced cost.
pub fn solve_pricing(g: &PricingGraph) -> Result<(Column, f64)> {
    let mut best: Vec<Option<PathLabel>> = vec![None; g.num_nodes()];
    best[g.source] = Some(PathLabel {
        cost: 0.0,
        cached: 0,
        traj: Vec::new(),
    });
    for &(from, to, w) in &g.arcs {
        let Some(label) = best[from].clone() else { continue };
        let mut cand = PathLabel {
            cost: label.cost + w,
            cached: label.cached,
            traj: label.traj,
        };
        match g.labels[to] {
            NodeLabel::NotCached(slot) if slot >= 1 => cand.traj.push(-1),
            NodeLabel::Cached { age, .. } => {
                cand.traj.push(age as i64);
                cand.cached += 1;
            }
            _ => {}
        }
        match &best[to] {
            Some(cur) if !improves(&cand, cur) => {}
            _ => best[to] = Some(cand),
        }
    }
    let Some(final_label) = &best[g.sink] else {
        return Err(Error::Infeasible(format!(
            "pricing graph for content {} has no source-to-sink path",
            g.content
        )));
    };
    let ages = final_label
        .traj
        .iter()
        .map(|&e| if e < 0 { None } else { Some(e as u32) })
        .collect();
    Ok((Column::new(g.content, ages)?, final_label.cost))
}

/// Fractional master solution: `weights[f][k]` mirrors the pool layout at
/// the time of the solve, `z[t][f]` is the implied fractional cache plan.
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    pub weights: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

impl FractionalSolution {
    pub fn z_integral(&self, tol: f64) -> bool {
        self.z
            .iter()
            .flatten()
            .all(|&v| v <= tol || v >= 1.0 - tol)
    }

    pub fn weights_binary(&self, tol: f64) -> bool {
        self.weights
            .iter()
            .flatten()
            .all(|&w| w <= tol || w >= 1.0 - tol)
    }
}

#[derive(Debug)]
pub struct CgaOutcome {
    pub fractional: FractionalSolution,
    pub lower_bound: f64,
    pub duals: DualPrices,
    pub iterations: usize,
    pub columns_added: usize,
    pub rmp_objectives: Vec<f64>,
}

/// Runs column generation to optimality of the fractional relaxation under
/// the given fixes, growing `pool` in place.
pub fn run_cga(inst: &Instance, pool: &mut ColumnPool, fixes: &FixSet) -> Result<CgaOutcome> {
    if pool.num_contents() != inst.num_contents() {
        return Err(Error::Dimension("pool shape does not match instance".into()));
    }
    let num_contents = inst.num_contents();
    let mut iterations = 0usize;
    let mut columns_added = 0usize;
    let mut rmp_objectives = Vec::new();

    loop {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::Internal(format!(
                "column generation did not converge in {MAX_ITERATIONS} iterations"
            )));
        }
        let lp = build_rmp(inst, pool)?;
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(Error::Infeasible(
                    "restricted master has no feasible mixture of pooled columns".into(),
                ))
            }
            LpStatus::Unbounded => {
                return Err(Error::Internal("restricted master reported unbounded".into()))
            }
        }
        rmp_objectives.push(sol.objective);
        let duals = DualPrices {
            pi: sol.duals_ineq.clone(),
            beta: sol.duals_eq.clone(),
        };

        let mut inserted_any = false;
        let mut all_clean = true;
        let mut rc_min = Vec::with_capacity(num_contents);
        for f in 0..num_contents {
            let graph = build_pricing_graph(inst, f, &duals, fixes)?;
            let (col, rc) = solve_pricing(&graph)?;
            rc_min.push(rc);
            if rc < -REDUCED_COST_EPS {
                all_clean = false;
                if pool.insert(col) {
                    inserted_any = true;
                    columns_added += 1;
                }
            }
        }
        if inserted_any {
            continue;
        }

        let lower_bound = if all_clean {
            sol.objective
        } else {
            // The cheapest column of some content is negative yet already
            // pooled, which happens when the master parks it at weight one
            // with a degenerate basis. The master objective is then not a
            // proven bound; price out the capacity rows instead.
            let cap: f64 = duals.pi.iter().map(|p| p * inst.capacity()).sum();
            let per_content: f64 = duals.beta.iter().sum::<f64>()
                + rc_min.iter().map(|r| r.min(0.0)).sum::<f64>();
            cap + per_content
        };
        let fractional = extract_fractional(inst, pool, &sol);
        return Ok(CgaOutcome {
            fractional,
            lower_bound,
            duals,
            iterations,
            columns_added,
            rmp_objectives,
        });
    }
}

fn build_rmp(inst: &Instance, pool: &ColumnPool) -> Result<LpProblem> {
    let mut costs = Vec::with_capacity(pool.total_len());
    for f in 0..pool.num_contents() {
        for col in pool.columns(f) {
            costs.push(column_cost(inst, col)?);
        }
    }
    let n = costs.len();
    let mut lp = LpProblem::new(costs)?;
    for t in 0..inst.num_slots() {
        let mut row = Vec::with_capacity(n);
        for f in 0..pool.num_contents() {
            let size = inst.size(f);
            for col in pool.columns(f) {
                row.push(if col.cached(t) { size } else { 0.0 });
            }
        }
        lp.add_le(row, inst.capacity())?;
    }
    let mut offset = 0;
    for f in 0..pool.num_contents() {
        let mut row = vec![0.0; n];
        for k in 0..pool.columns(f).len() {
            row[offset + k] = 1.0;
        }
        offset += pool.columns(f).len();
        lp.add_eq(row, 1.0)?;
    }
    Ok(lp)
}

fn extract_fractional(inst: &Instance, pool: &ColumnPool, sol: &LpSolution) -> FractionalSolution {
    let mut weights = Vec::with_capacity(pool.num_contents());
    let mut idx = 0;
    for f in 0..pool.num_contents() {
        let k = pool.columns(f).len();
        weights.push(sol.primal[idx..idx + k].to_vec());
        idx += k;
    }
    let mut z = vec![vec![0.0; inst.num_contents()]; inst.num_slots()];
    for (f, ws) in weights.iter().enumerate() {
        for (k, &w) in ws.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = &pool.columns(f)[k];
            for (t, z_row) in z.iter_mut().enumerate() {
                if col.cached(t) {
                    z_row[f] += w;
                }
            }
        }
    }
    FractionalSolution { weights, z }
}

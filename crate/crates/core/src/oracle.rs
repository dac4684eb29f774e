//! Exhaustive reference solver for small instances.
//!
//! Enumerates every legal caching trajectory per content and searches the
//! cross product for the cheapest capacity-feasible combination. Exponential
//! by construction; both entry points refuse inputs past hard size guards
//! instead of running unbounded.

use crate::error::{Error, Result};
use crate::model::{column_cost, Column, Instance, Schedule};

/// Horizons above this make per-content enumeration explode.
pub const MAX_ENUM_SLOTS: usize = 12;
/// Upper bound on the cross-product size `exact_optimum` will search.
pub const MAX_COMBINATIONS: f64 = 1e7;

/// Number of legal trajectories for a horizon of `num_slots` slots, without
/// materializing them. Follows the recurrence: a slot is absent or fresh
/// after anything, and may keep only after a cached slot.
pub fn count_columns(num_slots: usize) -> f64 {
    let mut absent = 1.0f64;
    let mut cached = 1.0f64;
    for _ in 1..num_slots {
        let reachable = absent + cached;
        let next_cached = reachable + cached;
        absent = reachable;
        cached = next_cached;
    }
    absent + cached
}

/// All legal trajectories for content `f`, in a fixed deterministic order:
/// depth-first by slot with absent before fresh before keep.
pub fn enumerate_columns(inst: &Instance, f: usize) -> Result<Vec<Column>> {
    if f >= inst.num_contents() {
        return Err(Error::Dimension(format!(
            "content {f} out of range for {} contents",
            inst.num_contents()
        )));
    }
    let num_slots = inst.num_slots();
    if num_slots > MAX_ENUM_SLOTS {
        return Err(Error::SizeGuard(format!(
            "enumeration supports at most {MAX_ENUM_SLOTS} slots, instance has {num_slots}"
        )));
    }
    let mut out = Vec::new();
    let mut ages: Vec<Option<u32>> = Vec::with_capacity(num_slots);
    extend(f, num_slots, &mut ages, &mut out);
    Ok(out)
}

fn extend(f: usize, num_slots: usize, ages: &mut Vec<Option<u32>>, out: &mut Vec<Column>) {
    if ages.len() == num_slots {
        out.push(Column::new(f, ages.clone()).expect("enumeration builds legal trajectories"));
        return;
    }
    let prev = ages.last().copied().flatten();
    ages.push(None);
    extend(f, num_slots, ages, out);
    ages.pop();
    ages.push(Some(0));
    extend(f, num_slots, ages, out);
    ages.pop();
    if let Some(age) = prev {
        ages.push(Some(age + 1));
        extend(f, num_slots, ages, out);
        ages.pop();
    }
}

/// Cheapest feasible schedule by exhaustive search with pruning. Returns the
/// schedule and its total cost. Deterministic: ties keep the first
/// combination found in enumeration order.
pub fn exact_optimum(inst: &Instance) -> Result<(Schedule, f64)> {
    let per_content = count_columns(inst.num_slots());
    let combos = per_content.powi(inst.num_contents() as i32);
    if combos > MAX_COMBINATIONS {
        return Err(Error::SizeGuard(format!(
            "search space of {combos:.2e} combinations exceeds {MAX_COMBINATIONS:.0e}"
        )));
    }

    let num_contents = inst.num_contents();
    let num_slots = inst.num_slots();
    let mut columns: Vec<Vec<Column>> = Vec::with_capacity(num_contents);
    let mut costs: Vec<Vec<f64>> = Vec::with_capacity(num_contents);
    for f in 0..num_contents {
        let cols = enumerate_columns(inst, f)?;
        let cs = cols
            .iter()
            .map(|c| column_cost(inst, c))
            .collect::<Result<Vec<_>>>()?;
        columns.push(cols);
        costs.push(cs);
    }

    // Capacity-ignoring lower bound on the cost of contents f.. onward.
    let mut suffix_min = vec![0.0; num_contents + 1];
    for f in (0..num_contents).rev() {
        let best = costs[f].iter().cloned().fold(f64::INFINITY, f64::min);
        suffix_min[f] = suffix_min[f + 1] + best;
    }

    struct Search<'a> {
        inst: &'a Instance,
        columns: &'a [Vec<Column>],
        costs: &'a [Vec<f64>],
        suffix_min: &'a [f64],
        used: Vec<f64>,
        choice: Vec<usize>,
        best_cost: f64,
        best_choice: Vec<usize>,
    }

    impl Search<'_> {
        fn descend(&mut self, f: usize, partial: f64) {
            if partial + self.suffix_min[f] >= self.best_cost {
                return;
            }
            if f == self.columns.len() {
                self.best_cost = partial;
                self.best_choice = self.choice.clone();
                return;
            }
            let size = self.inst.size(f);
            'cols: for (k, col) in self.columns[f].iter().enumerate() {
                for t in 0..self.inst.num_slots() {
                    if col.cached(t) && self.used[t] + size > self.inst.capacity() {
                        continue 'cols;
                    }
                }
                for t in 0..self.inst.num_slots() {
                    if col.cached(t) {
                        self.used[t] += size;
                    }
                }
                self.choice.push(k);
                self.descend(f + 1, partial + self.costs[f][k]);
                self.choice.pop();
                for t in 0..self.inst.num_slots() {
                    if col.cached(t) {
                        self.used[t] -= size;
                    }
                }
            }
        }
    }

    let mut search = Search {
        inst,
        columns: &columns,
        costs: &costs,
        suffix_min: &suffix_min,
        used: vec![0.0; num_slots],
        choice: Vec::new(),
        best_cost: f64::INFINITY,
        best_choice: Vec::new(),
    };
    search.descend(0, 0.0);

    if search.best_choice.len() != num_contents {
        return Err(Error::Internal("exhaustive search found no feasible schedule".into()));
    }
    let chosen: Vec<Column> = search
        .best_choice
        .iter()
        .enumerate()
        .map(|(f, &k)| columns[f][k].clone())
        .collect();
    let schedule = Schedule::new(inst, chosen)?;
    let total = schedule.breakdown().total;
    Ok((schedule, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AoiPenalty, Content};

    fn instance(num_slots: usize, sizes: &[f64], demand: Vec<Vec<u32>>, capacity: f64) -> Instance {
        let contents = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Content {
                id: i as u32 + 1,
                size: s,
                aoi_penalty: AoiPenalty::Linear(1.0),
            })
            .collect();
        Instance::new(num_slots, contents, capacity, 10.0, 1.0, 0.5, Some(demand), None).unwrap()
    }

    #[test]
    fn trajectory_counts_for_short_horizons() {
        assert_eq!(count_columns(1), 2.0);
        assert_eq!(count_columns(2), 5.0);
        assert_eq!(count_columns(3), 13.0);
        let inst = instance(3, &[1.0], vec![vec![0, 0, 0]], 1.0);
        assert_eq!(enumerate_columns(&inst, 0).unwrap().len(), 13);
        let inst2 = instance(2, &[1.0], vec![vec![0, 0]], 1.0);
        let cols = enumerate_columns(&inst2, 0).unwrap();
        assert_eq!(cols.len(), 5);
        let expected: Vec<Vec<Option<u32>>> = vec![
            vec![None, None],
            vec![None, Some(0)],
            vec![Some(0), None],
            vec![Some(0), Some(0)],
            vec![Some(0), Some(1)],
        ];
        let got: Vec<Vec<Option<u32>>> = cols.iter().map(|c| c.ages().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn enumeration_refuses_long_horizons() {
        let demand = vec![vec![0; 13]];
        let inst = instance(13, &[1.0], demand, 1.0);
        assert!(matches!(enumerate_columns(&inst, 0), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn exact_refuses_huge_cross_products() {
        let demand = vec![vec![0; 12]; 3];
        let inst = instance(12, &[1.0, 1.0, 1.0], demand, 1.0);
        assert!(matches!(exact_optimum(&inst), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn single_content_two_slots_keeps_cached_copy() {
        // Caching in both slots with one download: 2*1*1 + 2*1*1 + 9 = 13,
        // against 40 for never caching.
        let mut inst = instance(2, &[1.0], vec![vec![2, 2]], 1.0);
        inst = Instance::new(
            2,
            inst.contents().to_vec(),
            1.0,
            10.0,
            1.0,
            0.0,
            Some(vec![vec![2, 2]]),
            None,
        )
        .unwrap();
        let (sched, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, 13.0);
        assert_eq!(sched.column(0).ages(), &[Some(0), Some(1)]);
    }

    #[test]
    fn zero_demand_leaves_cache_empty() {
        let inst = instance(3, &[1.0, 2.0], vec![vec![0; 3], vec![0; 3]], 3.0);
        let (sched, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, 0.0);
        assert!(sched.columns().iter().all(|c| c.cached_count() == 0));
    }

    #[test]
    fn optimum_equals_schedule_breakdown_total() {
        let inst = instance(
            3,
            &[2.0, 3.0, 1.0],
            vec![vec![3, 0, 1], vec![1, 1, 1], vec![0, 4, 0]],
            4.0,
        );
        let (sched, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, sched.breakdown().total);
    }
}

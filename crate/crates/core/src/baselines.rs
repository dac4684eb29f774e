//! Greedy reference policies.
//!
//! Both walk the slots once and fill the cache first-fit from an admission
//! order: by static popularity (total requests over the horizon, ties by
//! id) or by a per-slot weighted random order. A content kept from the
//! previous slot is refreshed when the age penalty it would accrue this
//! slot outweighs a fraction of the fetch price, otherwise it ages by one.
//! Contents nobody requests are never admitted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Column, Instance, Schedule};

/// Refresh when `lambda * penalty(age + 1) * demand` reaches this fraction
/// of the fetch price `size * (cost_server - cost_cache)`.
pub const DEFAULT_REFRESH_FACTOR: f64 = 0.5;

/// Popularity-ordered greedy plan. The seed is accepted for call symmetry
/// with the randomized variant and not used.
pub fn run_pba(inst: &Instance, seed: u64) -> Result<Schedule> {
    run_pba_with(inst, seed, DEFAULT_REFRESH_FACTOR)
}

pub fn run_pba_with(inst: &Instance, _seed: u64, refresh_factor: f64) -> Result<Schedule> {
    let mut order: Vec<usize> = (0..inst.num_contents())
        .filter(|&f| inst.total_demand(f) > 0)
        .collect();
    order.sort_by_key(|&f| (std::cmp::Reverse(inst.total_demand(f)), f));
    greedy(inst, |_, _| order.clone(), refresh_factor)
}

/// Randomized greedy plan: every slot draws its own admission order, each
/// content weighted by its total requests.
pub fn run_rba(inst: &Instance, seed: u64) -> Result<Schedule> {
    run_rba_with(inst, seed, DEFAULT_REFRESH_FACTOR)
}

pub fn run_rba_with(inst: &Instance, seed: u64, refresh_factor: f64) -> Result<Schedule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    greedy(
        inst,
        move |_, inst| {
            let mut pool: Vec<(usize, f64)> = (0..inst.num_contents())
                .filter(|&f| inst.total_demand(f) > 0)
                .map(|f| (f, inst.total_demand(f) as f64))
                .collect();
            let mut order = Vec::with_capacity(pool.len());
            while !pool.is_empty() {
                let total: f64 = pool.iter().map(|&(_, w)| w).sum();
                let x = rng.gen_range(0.0..total);
                let mut acc = 0.0;
                let mut pick = pool.len() - 1;
                for (i, &(_, w)) in pool.iter().enumerate() {
                    acc += w;
                    if x < acc {
                        pick = i;
                        break;
                    }
                }
                order.push(pool.remove(pick).0);
            }
            order
        },
        refresh_factor,
    )
}

fn greedy(
    inst: &Instance,
    mut order_for_slot: impl FnMut(usize, &Instance) -> Vec<usize>,
    refresh_factor: f64,
) -> Result<Schedule> {
    let num_slots = inst.num_slots();
    let num_contents = inst.num_contents();
    let mut ages: Vec<Vec<Option<u32>>> = vec![vec![None; num_slots]; num_contents];
    let mut prev: Vec<Option<u32>> = vec![None; num_contents];

    for t in 0..num_slots {
        let mut remaining = inst.capacity();
        let mut cur: Vec<Option<u32>> = vec![None; num_contents];
        for f in order_for_slot(t, inst) {
            if inst.size(f) > remaining {
                continue;
            }
            let age = match prev[f] {
                None => 0,
                Some(a) => {
                    let stale = inst.aoi_weight()
                        * inst.penalty(f, a + 1)
                        * inst.demand(f, t) as f64;
                    if stale >= refresh_factor * inst.refresh_cost(f) {
                        0
                    } else {
                        a + 1
                    }
                }
            };
            cur[f] = Some(age);
            ages[f][t] = Some(age);
            remaining -= inst.size(f);
        }
        prev = cur;
    }

    let columns = ages
        .into_iter()
        .enumerate()
        .map(|(f, a)| Column::new(f, a))
        .collect::<Result<Vec<_>>>()?;
    Schedule::new(inst, columns)
}

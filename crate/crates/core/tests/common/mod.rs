//! Support code shared by the integration suites: an exact rational
//! reference solver for small LPs, a subset-sum table, seeded instance
//! samplers, and a request-by-request cost replay.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cachesched::instgen::GenConfig;
use cachesched::lp::LpProblem;
use cachesched::model::{Instance, Schedule};

/// Plain-data LP whose coefficients are exactly representable, so the
/// rational reference solver sees the same numbers as the float solver.
#[derive(Debug, Clone)]
pub struct RationalLp {
    pub objective: Vec<f64>,
    pub le: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

impl RationalLp {
    pub fn to_problem(&self) -> LpProblem {
        let mut p = LpProblem::new(self.objective.clone()).unwrap();
        for (coeffs, rhs) in &self.le {
            p.add_le(coeffs.clone(), *rhs).unwrap();
        }
        for (coeffs, rhs) in &self.eq {
            p.add_eq(coeffs.clone(), *rhs).unwrap();
        }
        p
    }
}

/// Random LP on the half-integer grid with up to 10 variables and 8 rows.
pub fn random_lp(rng: &mut ChaCha8Rng) -> RationalLp {
    let n = rng.gen_range(1..=10);
    let num_le = rng.gen_range(0..=6);
    let num_eq = rng.gen_range(0..=2.min(n));
    let half = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64 / 2.0;
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| half(rng, -8, 8)).collect()
    };
    RationalLp {
        objective: (0..n).map(|_| half(rng, -10, 10)).collect(),
        le: (0..num_le).map(|_| (row(rng), half(rng, -4, 12))).collect(),
        eq: (0..num_eq).map(|_| (row(rng), half(rng, -2, 6))).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExactLpOutcome {
    /// Too many candidate vertices to enumerate; draw another LP.
    TooLarge,
    Infeasible,
    Optimal(BigRational),
}

fn rat(x: f64) -> BigRational {
    Ratio::from_float(x).expect("finite float")
}

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
        if acc > 1e12 {
            return acc;
        }
    }
    acc
}

/// Exact minimum over the vertices of `{A x <= b, E x = d, 0 <= x <= 1}`.
///
/// Every vertex is the intersection of n linearly independent active
/// constraints, always including the equality rows; candidates are all
/// n-sized supersets mixing inequality rows with at most one bound per
/// variable. The polytope is bounded, so feasibility is equivalent to
/// having a feasible vertex and the minimum is attained at one. Candidate
/// sets past ~20000 refuse rather than grind.
pub fn solve_exact(lp: &RationalLp) -> ExactLpOutcome {
    let n = lp.objective.len();
    let num_eq = lp.eq.len();
    if num_eq > n {
        // More equalities than variables never happens from random_lp.
        return ExactLpOutcome::TooLarge;
    }
    let k = n - num_eq;
    let num_items = lp.le.len() + 2 * n;
    if choose(num_items, k) > 20_000.0 {
        return ExactLpOutcome::TooLarge;
    }

    let obj: Vec<BigRational> = lp.objective.iter().map(|&c| rat(c)).collect();
    let le: Vec<(Vec<BigRational>, BigRational)> = lp
        .le
        .iter()
        .map(|(c, b)| (c.iter().map(|&v| rat(v)).collect(), rat(*b)))
        .collect();
    let eq: Vec<(Vec<BigRational>, BigRational)> = lp
        .eq
        .iter()
        .map(|(c, b)| (c.iter().map(|&v| rat(v)).collect(), rat(*b)))
        .collect();

    // Item encoding: 0..le.len() are inequality rows, then per variable a
    // lower bound item and an upper bound item.
    let mut best: Option<BigRational> = None;
    let mut picked = Vec::with_capacity(k);
    enumerate_sets(lp.le.len(), n, k, 0, &mut picked, &mut |set| {
        let mut rows: Vec<(Vec<BigRational>, BigRational)> = eq.clone();
        for &item in set {
            if item < lp.le.len() {
                rows.push(le[item].clone());
            } else {
                let idx = item - lp.le.len();
                let (var, upper) = (idx / 2, idx % 2 == 1);
                let mut coeffs = vec![BigRational::zero(); n];
                coeffs[var] = BigRational::from_integer(BigInt::from(1));
                let rhs = if upper {
                    BigRational::from_integer(BigInt::from(1))
                } else {
                    BigRational::zero()
                };
                rows.push((coeffs, rhs));
            }
        }
        let Some(x) = solve_square(rows) else { return };
        if !feasible(&x, &le, &eq) {
            return;
        }
        let value: BigRational = obj.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    });
    match best {
        Some(v) => ExactLpOutcome::Optimal(v),
        None => ExactLpOutcome::Infeasible,
    }
}

/// Walks all k-item subsets, skipping any that take both bounds of one
/// variable. Items >= num_le come in (lower, upper) pairs per variable.
fn enumerate_sets(
    num_le: usize,
    n: usize,
    k: usize,
    start: usize,
    picked: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if picked.len() == k {
        visit(picked);
        return;
    }
    let total = num_le + 2 * n;
    // Not enough items left to finish the set.
    if start + (k - picked.len()) > total {
        return;
    }
    for item in start..total {
        // Upper-bound items have odd offset; their lower twin is item - 1,
        // which in an increasing walk can only be the latest pick.
        if item >= num_le && (item - num_le) % 2 == 1 && picked.last() == Some(&(item - 1)) {
            continue;
        }
        picked.push(item);
        enumerate_sets(num_le, n, k, item + 1, picked, visit);
        picked.pop();
    }
}

fn solve_square(rows: Vec<(Vec<BigRational>, BigRational)>) -> Option<Vec<BigRational>> {
    let n = rows.first().map_or(0, |(c, _)| c.len());
    if rows.len() != n {
        return None;
    }
    let mut a: Vec<Vec<BigRational>> = rows.iter().map(|(c, _)| c.clone()).collect();
    let mut b: Vec<BigRational> = rows.into_iter().map(|(_, r)| r).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for c in col..n {
            a[col][c] = &a[col][c] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..n {
                    let v = &a[col][c] * &factor;
                    a[r][c] = &a[r][c] - &v;
                }
                let v = &b[col] * &factor;
                b[r] = &b[r] - &v;
            }
        }
    }
    Some(b)
}

fn feasible(
    x: &[BigRational],
    le: &[(Vec<BigRational>, BigRational)],
    eq: &[(Vec<BigRational>, BigRational)],
) -> bool {
    let zero = BigRational::zero();
    let one = BigRational::from_integer(BigInt::from(1));
    if x.iter().any(|v| v < &zero || v > &one) {
        return false;
    }
    for (coeffs, rhs) in le {
        let lhs: BigRational = coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
        if lhs > *rhs {
            return false;
        }
    }
    for (coeffs, rhs) in eq {
        let lhs: BigRational = coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
        if lhs != *rhs {
            return false;
        }
    }
    true
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational within f64 range")
}

/// Exact check whether some subset of `values` sums to half the total.
pub fn even_split_exists(values: &[u64]) -> bool {
    let total: u64 = values.iter().sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    let target = (total / 2) as usize;
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for &v in values {
        let v = v as usize;
        if v > target {
            continue;
        }
        for s in (v..=target).rev() {
            if reachable[s - v] {
                reachable[s] = true;
            }
        }
    }
    reachable[target]
}

/// Small-instance sampler: horizons and catalogs within reach of the
/// exhaustive oracle.
pub fn tiny_config(seed: u64) -> GenConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7157);
    GenConfig {
        num_users: rng.gen_range(2..=6),
        num_contents: rng.gen_range(2..=4),
        num_slots: rng.gen_range(2..=3),
        zipf_gamma: [0.3, 0.54, 1.0][rng.gen_range(0..3)],
        capacity_ratio: [0.3, 0.5, 0.7][rng.gen_range(0..3)],
        size_range: (1, 4),
        requests_per_user_range: (1, 4),
        seed,
        cost_server: 10.0,
        cost_cache: 1.0,
        aoi_weight: [0.0, 0.5, 2.0][rng.gen_range(0..3)],
    }
}

/// The reference working-scale configuration used by the comparison suites.
pub fn desk_config(seed: u64) -> GenConfig {
    GenConfig {
        num_users: 60,
        num_contents: 20,
        num_slots: 24,
        zipf_gamma: 0.54,
        capacity_ratio: 0.5,
        size_range: (1, 10),
        requests_per_user_range: (1, 15),
        seed,
        cost_server: 10.0,
        cost_cache: 1.0,
        aoi_weight: 0.5,
    }
}

/// Recomputes a schedule's total cost request by request: each request pays
/// the cache or server rate for its content's size, cache hits at age i add
/// the weighted penalty, and each fresh download pays the fetch price.
/// Independent of the columnwise accounting in the library.
pub fn replay_requests_total(inst: &Instance, sched: &Schedule) -> f64 {
    let requests = inst.requests().expect("instance carries requests");
    let mut total = 0.0;
    for r in requests {
        let f = (r.content - 1) as usize;
        let t = (r.slot - 1) as usize;
        let l = inst.size(f);
        match sched.column(f).age(t) {
            None => total += l * inst.cost_server(),
            Some(age) => {
                total += l * inst.cost_cache();
                total += inst.aoi_weight() * inst.penalty(f, age);
            }
        }
    }
    for f in 0..inst.num_contents() {
        for t in 0..inst.num_slots() {
            if sched.column(f).age(t) == Some(0) {
                total += inst.refresh_cost(f);
            }
        }
    }
    total
}

/// Capacity must hold exactly, with no tolerance.
pub fn assert_exact_capacity(inst: &Instance, sched: &Schedule) {
    for t in 0..inst.num_slots() {
        let load: f64 = (0..inst.num_contents())
            .filter(|&f| sched.column(f).cached(t))
            .map(|f| inst.size(f))
            .sum();
        assert!(
            load <= inst.capacity(),
            "slot {t} holds {load} against capacity {}",
            inst.capacity()
        );
    }
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}

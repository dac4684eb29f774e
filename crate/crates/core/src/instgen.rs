//! Workload generation.
//!
//! [`generate`] draws a synthetic request trace: content popularity follows a
//! ZipF law over ranks that are re-shuffled every slot, so which content is
//! popular drifts over time while the popularity profile stays fixed. All
//! randomness comes from one ChaCha8 stream seeded from `GenConfig::seed`;
//! the draw order is fixed (sizes, then per-slot rank shuffles, then per-user
//! request counts with slot and content per request), so a given seed always
//! produces the identical instance.
//!
//! [`partition_reduction`] embeds a number-partitioning question into a
//! single-slot instance whose optimal cost hits a closed-form threshold
//! exactly when the input can be split into two halves of equal sum. Useful
//! both as a hardness witness and as a source of instances with known
//! optima.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AoiPenalty, Content, Instance, Request};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub num_users: u32,
    pub num_contents: u32,
    pub num_slots: u32,
    /// ZipF exponent; rank r gets weight r^-gamma.
    pub zipf_gamma: f64,
    /// Cache capacity as a fraction of the total content size.
    pub capacity_ratio: f64,
    /// Inclusive integer range for content sizes.
    pub size_range: (u32, u32),
    /// Inclusive integer range for requests per user.
    pub requests_per_user_range: (u32, u32),
    pub seed: u64,
    pub cost_server: f64,
    pub cost_cache: f64,
    pub aoi_weight: f64,
}

impl Default for GenConfig {
    /// Desk-scale defaults: small enough to solve in well under a second,
    /// large enough to show the cost trade-offs.
    fn default() -> Self {
        GenConfig {
            num_users: 60,
            num_contents: 20,
            num_slots: 24,
            zipf_gamma: 0.54,
            capacity_ratio: 0.5,
            size_range: (1, 10),
            requests_per_user_range: (1, 15),
            seed: 0,
            cost_server: 10.0,
            cost_cache: 1.0,
            aoi_weight: 0.5,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.num_contents == 0 || self.num_slots == 0 {
            return Err(Error::InvalidConfig("users, contents and slots must be positive".into()));
        }
        if !self.zipf_gamma.is_finite() || self.zipf_gamma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "zipf exponent must be positive, got {}",
                self.zipf_gamma
            )));
        }
        if !self.capacity_ratio.is_finite() || !(0.0..=1.0).contains(&self.capacity_ratio) {
            return Err(Error::InvalidConfig(format!(
                "capacity ratio must be in [0, 1], got {}",
                self.capacity_ratio
            )));
        }
        if self.size_range.0 == 0 || self.size_range.0 > self.size_range.1 {
            return Err(Error::InvalidConfig(format!(
                "size range [{}, {}] must be a nonempty positive range",
                self.size_range.0, self.size_range.1
            )));
        }
        if self.requests_per_user_range.0 > self.requests_per_user_range.1 {
            return Err(Error::InvalidConfig("request count range must be nonempty".into()));
        }
        if !self.cost_server.is_finite() || !self.cost_cache.is_finite()
            || self.cost_cache < 0.0 || self.cost_server <= self.cost_cache
        {
            return Err(Error::InvalidConfig("server cost must exceed cache cost".into()));
        }
        if !self.aoi_weight.is_finite() || self.aoi_weight < 0.0 {
            return Err(Error::InvalidConfig("age penalty weight must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Probability that a request lands on the content of rank `r` (1-based)
/// under a ZipF law with the given exponent: `r^-gamma / sum_i i^-gamma`.
pub fn zipf_rank_probabilities(gamma: f64, count: usize) -> Vec<f64> {
    let weights: Vec<f64> = (1..=count).map(|r| (r as f64).powf(-gamma)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

pub fn generate(cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let num_contents = cfg.num_contents as usize;
    let num_slots = cfg.num_slots as usize;

    let contents: Vec<Content> = (0..num_contents)
        .map(|f| Content {
            id: f as u32 + 1,
            size: f64::from(rng.gen_range(cfg.size_range.0..=cfg.size_range.1)),
            aoi_penalty: AoiPenalty::Linear(1.0),
        })
        .collect();
    let total_size: f64 = contents.iter().map(|c| c.size).sum();
    let capacity = cfg.capacity_ratio * total_size;

    // Rank of each content, re-drawn per slot: rank[t][f] in 1..=F.
    let mut ranks: Vec<Vec<u32>> = Vec::with_capacity(num_slots);
    for _ in 0..num_slots {
        let mut perm: Vec<u32> = (1..=cfg.num_contents).collect();
        perm.shuffle(&mut rng);
        ranks.push(perm);
    }
    // Cumulative unnormalized ZipF weight per slot, for inverse-CDF sampling.
    let cumulative: Vec<Vec<f64>> = ranks
        .iter()
        .map(|per_slot| {
            let mut acc = 0.0;
            per_slot
                .iter()
                .map(|&r| {
                    acc += f64::from(r).powf(-cfg.zipf_gamma);
                    acc
                })
                .collect()
        })
        .collect();

    let mut requests = Vec::new();
    for user in 1..=cfg.num_users {
        let count = rng.gen_range(cfg.requests_per_user_range.0..=cfg.requests_per_user_range.1);
        for index in 1..=count {
            let slot = rng.gen_range(1..=cfg.num_slots);
            let cum = &cumulative[slot as usize - 1];
            let x: f64 = rng.gen::<f64>() * cum[num_contents - 1];
            let f = cum.partition_point(|&c| c <= x).min(num_contents - 1);
            requests.push(Request {
                user,
                index,
                content: f as u32 + 1,
                slot,
            });
        }
    }

    Instance::new(
        num_slots,
        contents,
        capacity,
        cfg.cost_server,
        cfg.cost_cache,
        cfg.aoi_weight,
        None,
        Some(requests),
    )
}

/// A number-partitioning question: can `values` be split into two subsets of
/// equal sum?
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionInput {
    pub values: Vec<u64>,
}

/// Encodes a partitioning question as a caching instance and returns it with
/// the threshold cost. One slot, two requests per content, server cost 2 and
/// cache cost 1, capacity half the total size: caching content `f` gains
/// exactly `n_f` (serving saves `2 n_f`, refreshing costs `n_f`), so the
/// optimum reaches `sum_f 4 n_f - capacity` exactly when some subset fills
/// the capacity, i.e. when the values split evenly.
pub fn partition_reduction(input: &PartitionInput) -> Result<(Instance, f64)> {
    if input.values.is_empty() {
        return Err(Error::InvalidConfig("partition input must not be empty".into()));
    }
    if input.values.contains(&0) {
        return Err(Error::InvalidConfig("partition values must be positive".into()));
    }
    let contents: Vec<Content> = input
        .values
        .iter()
        .enumerate()
        .map(|(f, &n)| Content {
            id: f as u32 + 1,
            size: n as f64,
            aoi_penalty: AoiPenalty::Linear(1.0),
        })
        .collect();
    let total: f64 = contents.iter().map(|c| c.size).sum();
    let demand = vec![vec![2u32]; contents.len()];
    let inst = Instance::new(1, contents, total / 2.0, 2.0, 1.0, 0.0, Some(demand), None)?;
    let threshold = input.values.iter().map(|&n| 4.0 * n as f64).sum::<f64>() - total / 2.0;
    Ok((inst, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_optimum;

    #[test]
    fn zipf_probabilities_match_closed_form() {
        let p = zipf_rank_probabilities(1.0, 2);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
        for count in [1usize, 3, 17] {
            let p = zipf_rank_probabilities(0.54, count);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_reproduces_identical_instances() {
        let cfg = GenConfig { num_users: 12, num_contents: 5, num_slots: 4, seed: 42, ..GenConfig::default() };
        let a = serde_json::to_string(&generate(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&generate(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = GenConfig { seed: 43, ..cfg };
        let c = serde_json::to_string(&generate(&other).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_instance_has_consistent_shape() {
        let cfg = GenConfig {
            num_users: 600,
            num_contents: 200,
            num_slots: 24,
            ..GenConfig::default()
        };
        let inst = generate(&cfg).unwrap();
        assert_eq!(inst.num_contents(), 200);
        assert_eq!(inst.num_slots(), 24);
        let total_size: f64 = inst.contents().iter().map(|c| c.size).sum();
        assert_eq!(inst.capacity(), 0.5 * total_size);
        for c in inst.contents() {
            assert!((1.0..=10.0).contains(&c.size));
        }
        let requests = inst.requests().unwrap();
        assert!(requests.len() >= 600 && requests.len() <= 600 * 15);
        let counted: u64 = (0..inst.num_contents()).map(|f| inst.total_demand(f)).sum();
        assert_eq!(counted, requests.len() as u64);
    }

    #[test]
    fn request_counts_per_user_respect_range() {
        let cfg = GenConfig { num_users: 40, num_contents: 6, num_slots: 3, seed: 7, ..GenConfig::default() };
        let inst = generate(&cfg).unwrap();
        let mut per_user = std::collections::HashMap::new();
        for r in inst.requests().unwrap() {
            *per_user.entry(r.user).or_insert(0u32) += 1;
        }
        assert_eq!(per_user.len(), 40);
        assert!(per_user.values().all(|&n| (1..=15).contains(&n)));
    }

    #[test]
    fn config_validation_rejects_bad_ranges() {
        let ok = GenConfig::default();
        assert!(generate(&GenConfig { zipf_gamma: 0.0, ..ok.clone() }).is_err());
        assert!(generate(&GenConfig { capacity_ratio: 1.5, ..ok.clone() }).is_err());
        assert!(generate(&GenConfig { size_range: (3, 2), ..ok.clone() }).is_err());
        assert!(generate(&GenConfig { num_contents: 0, ..ok }).is_err());
    }

    #[test]
    fn reduction_instance_structure_and_threshold() {
        let (inst, threshold) = partition_reduction(&PartitionInput { values: vec![1, 2, 3] }).unwrap();
        assert_eq!(inst.num_slots(), 1);
        assert_eq!(inst.capacity(), 3.0);
        assert_eq!(inst.cost_server(), 2.0);
        assert_eq!(inst.cost_cache(), 1.0);
        assert_eq!(inst.demand(0, 0), 2);
        assert_eq!(threshold, 24.0 - 3.0);
    }

    #[test]
    fn reduction_yes_instance_hits_threshold() {
        let (inst, threshold) = partition_reduction(&PartitionInput { values: vec![1, 2, 3] }).unwrap();
        let (sched, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, threshold);
        let cached: f64 = sched
            .columns()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.cached(0))
            .map(|(f, _)| inst.size(f))
            .sum();
        assert_eq!(cached, 3.0);
    }

    #[test]
    fn reduction_no_instance_misses_threshold() {
        // {1, 1, 3} cannot split into halves of sum 2.5; best subset is 2.
        let (inst, threshold) = partition_reduction(&PartitionInput { values: vec![1, 1, 3] }).unwrap();
        let (_, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, 18.0);
        assert!(cost > threshold);
        // A lone value cannot be split at all.
        let (inst, threshold) = partition_reduction(&PartitionInput { values: vec![4] }).unwrap();
        let (_, cost) = exact_optimum(&inst).unwrap();
        assert_eq!(cost, 16.0);
        assert!(cost > threshold);
    }
}

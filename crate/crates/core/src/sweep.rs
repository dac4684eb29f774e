//! Parameter sweeps comparing the optimizing solver against the greedy
//! policies over seeded instance grids.
//!
//! One grid point is one generator configuration with a single field
//! overridden; each seed under it yields one instance, evaluated by all
//! three policies. Rows come back ordered by grid point, then seed, then
//! policy, and are deterministic apart from the runtime column. The lower
//! bound in every row is the one certified by the optimizing solver on that
//! instance, so the greedy gaps are measured against the same yardstick.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{run_pba, run_rba};
use crate::error::{Error, Result};
use crate::instgen::{generate, GenConfig};
use crate::model::{avg_aoi, backhaul_load, Instance, Schedule};
use crate::rounding::{gap_pct, solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Cga,
    Pba,
    Rba,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Cga, Algorithm::Pba, Algorithm::Rba];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cga => "cga",
            Algorithm::Pba => "pba",
            Algorithm::Rba => "rba",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Users,
    Contents,
    Lambda,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Users => "U",
            SweepParam::Contents => "F",
            SweepParam::Lambda => "lambda",
        }
    }

    pub fn parse(s: &str) -> Result<SweepParam> {
        match s {
            "U" | "u" | "users" => Ok(SweepParam::Users),
            "F" | "f" | "contents" => Ok(SweepParam::Contents),
            "lambda" => Ok(SweepParam::Lambda),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter {other:?}; expected U, F or lambda"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub num_seeds: u32,
    pub base: GenConfig,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub seed: u64,
    pub algorithm: String,
    pub cost: f64,
    pub lb: f64,
    pub gap: f64,
    pub backhaul_load: f64,
    pub avg_aoi: f64,
    pub runtime_ms: u64,
    pub backhaul_load_norm: f64,
    pub avg_aoi_norm: f64,
}

fn configure(base: &GenConfig, param: SweepParam, value: f64) -> Result<GenConfig> {
    let mut cfg = base.clone();
    match param {
        SweepParam::Users | SweepParam::Contents => {
            if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
                return Err(Error::InvalidConfig(format!(
                    "{} takes positive integer grid values, got {value}",
                    param.name()
                )));
            }
            if param == SweepParam::Users {
                cfg.num_users = value as u32;
            } else {
                cfg.num_contents = value as u32;
            }
        }
        SweepParam::Lambda => {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "lambda grid values must be nonnegative, got {value}"
                )));
            }
            cfg.aoi_weight = value;
        }
    }
    Ok(cfg)
}

/// Runs all three policies on one instance. The first returned row is the
/// optimizing solver's; its bound is copied into the greedy rows.
pub fn evaluate(inst: &Instance, seed: u64) -> Result<[(Algorithm, Schedule, f64, u64); 3]> {
    let solved = solve(inst)?;
    let lb = solved.lower_bound;
    let cga_ms = solved.stats.runtime_ms;

    let started = Instant::now();
    let pba = run_pba(inst, seed)?;
    let pba_ms = started.elapsed().as_millis() as u64;
    let started = Instant::now();
    let rba = run_rba(inst, seed)?;
    let rba_ms = started.elapsed().as_millis() as u64;

    Ok([
        (Algorithm::Cga, solved.schedule, lb, cga_ms),
        (Algorithm::Pba, pba, lb, pba_ms),
        (Algorithm::Rba, rba, lb, rba_ms),
    ])
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    if spec.num_seeds == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one seed".into()));
    }
    let mut tasks = Vec::new();
    for &value in &spec.grid {
        let cfg = configure(&spec.base, spec.param, value)?;
        for seed in 1..=spec.num_seeds as u64 {
            let mut cfg = cfg.clone();
            cfg.seed = seed;
            tasks.push((value, seed, cfg));
        }
    }

    let nested: Vec<Vec<SweepRow>> = tasks
        .par_iter()
        .map(|(value, seed, cfg)| {
            let inst = generate(cfg)?;
            let runs = evaluate(&inst, *seed)?;
            runs.into_iter()
                .map(|(alg, sched, lb, ms)| {
                    let cost = sched.breakdown().total;
                    Ok(SweepRow {
                        param: spec.param.name().to_string(),
                        value: *value,
                        seed: *seed,
                        algorithm: alg.to_string(),
                        cost,
                        lb,
                        gap: gap_pct(cost, lb),
                        backhaul_load: backhaul_load(&inst, &sched)?,
                        avg_aoi: avg_aoi(&inst, &sched)?,
                        runtime_ms: ms,
                        backhaul_load_norm: 0.0,
                        avg_aoi_norm: 0.0,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<SweepRow> = nested.into_iter().flatten().collect();
    normalize(&mut rows);
    Ok(rows)
}

/// Rescales the load and age columns to [0, 100] separately per policy, so
/// trends are comparable across policies with different absolute levels.
fn normalize(rows: &mut [SweepRow]) {
    for alg in Algorithm::ALL {
        let name = alg.to_string();
        for field in [0, 1] {
            let pick = |r: &SweepRow| {
                if field == 0 {
                    r.backhaul_load
                } else {
                    r.avg_aoi
                }
            };
            let mine: Vec<f64> = rows
                .iter()
                .filter(|r| r.algorithm == name)
                .map(pick)
                .collect();
            if mine.is_empty() {
                continue;
            }
            let lo = mine.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = mine.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            for row in rows.iter_mut().filter(|r| r.algorithm == name) {
                let norm = if span <= 0.0 {
                    0.0
                } else {
                    100.0 * (pick(row) - lo) / span
                };
                if field == 0 {
                    row.backhaul_load_norm = norm;
                } else {
                    row.avg_aoi_norm = norm;
                }
            }
        }
    }
}

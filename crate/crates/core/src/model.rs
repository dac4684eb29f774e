//! Problem data and cost accounting.
//!
//! An [`Instance`] describes a base station cache of capacity `capacity`
//! serving `F` contents over `T` time slots. Requests arrive per content and
//! slot (the demand matrix); a request is served from the cache at unit cost
//! `cost_cache` when the content is cached in that slot and from the origin
//! server at `cost_server` otherwise. Re-downloading a cached content resets
//! its age to zero and costs `size * (cost_server - cost_cache)`; keeping it
//! lets the age grow and charges the content's age penalty per request,
//! weighted by `aoi_weight`.
//!
//! A [`Column`] is one content's caching trajectory over the horizon; a
//! [`Schedule`] is one column per content that fits the cache in every slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Age penalty of a content as a function of its age in slots.
///
/// `Linear(k)` charges `k * age`. `Table(v)` charges `v[age]`, saturating at
/// the last entry for ages past the end. Both charge zero at age zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AoiPenalty {
    Linear(f64),
    Table(Vec<f64>),
}

impl AoiPenalty {
    pub fn cost(&self, age: u32) -> f64 {
        match self {
            AoiPenalty::Linear(k) => k * f64::from(age),
            AoiPenalty::Table(values) => {
                let idx = (age as usize).min(values.len() - 1);
                values[idx]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AoiPenalty::Linear(k) => {
                if !k.is_finite() || *k < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "linear age penalty coefficient must be finite and nonnegative, got {k}"
                    )));
                }
            }
            AoiPenalty::Table(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidInstance(
                        "age penalty table must not be empty".into(),
                    ));
                }
                if values[0] != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "age penalty at age 0 must be 0, got {}",
                        values[0]
                    )));
                }
                for pair in values.windows(2) {
                    if !pair[1].is_finite() || pair[1] < pair[0] {
                        return Err(Error::InvalidInstance(
                            "age penalty table must be finite and nondecreasing".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Content {
    /// 1-based identifier; contents must be listed in id order 1..=F.
    pub id: u32,
    /// Size in data units; positive.
    pub size: f64,
    pub aoi_penalty: AoiPenalty,
}

/// A single user request, kept for traceability; the demand matrix is the
/// aggregate the solver works from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub user: u32,
    /// 1-based index of the request within its user.
    pub index: u32,
    /// Content id, 1-based.
    pub content: u32,
    /// Slot, 1-based.
    pub slot: u32,
}

#[derive(Debug, Clone, Deserialize)]
struct RawInstance {
    #[serde(rename = "T")]
    num_slots: usize,
    capacity: f64,
    cost_server: f64,
    cost_cache: f64,
    aoi_weight: f64,
    contents: Vec<Content>,
    #[serde(default)]
    demand: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    requests: Option<Vec<Request>>,
}

/// A fully validated problem instance.
///
/// Serialized form, all cost fields finite:
/// `{"T": .., "capacity": .., "cost_server": .., "cost_cache": ..,
///   "aoi_weight": .., "contents": [{"id", "size", "aoi_penalty"}, ..],
///   "demand": [[..T entries..], .. F rows], "requests": [..]}`.
/// On input at least one of `demand` and `requests` must be present; when
/// only `requests` is given the demand matrix is derived from it, and when
/// both are given they must agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    #[serde(rename = "T")]
    num_slots: usize,
    capacity: f64,
    cost_server: f64,
    cost_cache: f64,
    aoi_weight: f64,
    contents: Vec<Content>,
    /// Row-major F x T request counts.
    demand: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    requests: Option<Vec<Request>>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Instance> {
        Instance::new(
            raw.num_slots,
            raw.contents,
            raw.capacity,
            raw.cost_server,
            raw.cost_cache,
            raw.aoi_weight,
            raw.demand,
            raw.requests,
        )
    }
}

impl Instance {
    /// Builds and validates an instance. `demand` may be omitted when
    /// `requests` is given; it is then derived by counting.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_slots: usize,
        contents: Vec<Content>,
        capacity: f64,
        cost_server: f64,
        cost_cache: f64,
        aoi_weight: f64,
        demand: Option<Vec<Vec<u32>>>,
        requests: Option<Vec<Request>>,
    ) -> Result<Instance> {
        if num_slots == 0 {
            return Err(Error::InvalidInstance("horizon must have at least one slot".into()));
        }
        if contents.is_empty() {
            return Err(Error::InvalidInstance("instance must have at least one content".into()));
        }
        for (f, c) in contents.iter().enumerate() {
            if c.id as usize != f + 1 {
                return Err(Error::InvalidInstance(format!(
                    "content ids must be 1..=F in order; position {f} has id {}",
                    c.id
                )));
            }
            if !c.size.is_finite() || c.size <= 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "content {} has non-positive size {}",
                    c.id, c.size
                )));
            }
            c.aoi_penalty.validate()?;
        }
        if !capacity.is_finite() || capacity < 0.0 {
            return Err(Error::InvalidInstance(format!("capacity must be nonnegative, got {capacity}")));
        }
        if !cost_server.is_finite() || !cost_cache.is_finite() || cost_cache < 0.0 {
            return Err(Error::InvalidInstance("unit costs must be finite and nonnegative".into()));
        }
        if cost_server <= cost_cache {
            return Err(Error::InvalidInstance(format!(
                "server cost {cost_server} must exceed cache cost {cost_cache}"
            )));
        }
        if !aoi_weight.is_finite() || aoi_weight < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "age penalty weight must be nonnegative, got {aoi_weight}"
            )));
        }

        let num_contents = contents.len();
        if let Some(reqs) = &requests {
            for r in reqs {
                if r.content == 0 || r.content as usize > num_contents {
                    return Err(Error::InvalidInstance(format!(
                        "request references unknown content id {}",
                        r.content
                    )));
                }
                if r.slot == 0 || r.slot as usize > num_slots {
                    return Err(Error::InvalidInstance(format!(
                        "request references slot {} outside 1..={num_slots}",
                        r.slot
                    )));
                }
            }
        }

        let counted = requests.as_ref().map(|reqs| {
            let mut m = vec![vec![0u32; num_slots]; num_contents];
            for r in reqs {
                m[r.content as usize - 1][r.slot as usize - 1] += 1;
            }
            m
        });

        let demand = match (demand, counted) {
            (Some(given), Some(counted)) => {
                if given != counted {
                    return Err(Error::InvalidInstance(
                        "demand matrix disagrees with request list".into(),
                    ));
                }
                given
            }
            (Some(given), None) => given,
            (None, Some(counted)) => counted,
            (None, None) => {
                return Err(Error::InvalidInstance(
                    "either a demand matrix or a request list is required".into(),
                ));
            }
        };

        if demand.len() != num_contents || demand.iter().any(|row| row.len() != num_slots) {
            return Err(Error::InvalidInstance(format!(
                "demand matrix must be {num_contents} x {num_slots}"
            )));
        }

        Ok(Instance {
            num_slots,
            capacity,
            cost_server,
            cost_cache,
            aoi_weight,
            contents,
            demand,
            requests,
        })
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn num_contents(&self) -> usize {
        self.contents.len()
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn cost_server(&self) -> f64 {
        self.cost_server
    }

    pub fn cost_cache(&self) -> f64 {
        self.cost_cache
    }

    pub fn aoi_weight(&self) -> f64 {
        self.aoi_weight
    }

    pub fn contents(&self) -> &[Content] {
        &self.contents
    }

    pub fn requests(&self) -> Option<&[Request]> {
        self.requests.as_deref()
    }

    /// Content size, 0-based index.
    pub fn size(&self, f: usize) -> f64 {
        self.contents[f].size
    }

    /// Request count for content `f` in slot `t`, both 0-based.
    pub fn demand(&self, f: usize, t: usize) -> u32 {
        self.demand[f][t]
    }

    pub fn total_demand(&self, f: usize) -> u64 {
        self.demand[f].iter().map(|&m| u64::from(m)).sum()
    }

    pub fn penalty(&self, f: usize, age: u32) -> f64 {
        self.contents[f].aoi_penalty.cost(age)
    }

    /// Cost of refreshing content `f` in the cache: `size * (cost_server - cost_cache)`.
    pub fn refresh_cost(&self, f: usize) -> f64 {
        self.size(f) * (self.cost_server - self.cost_cache)
    }
}

/// Caching trajectory of one content: per slot either absent or cached with
/// an age. Age 0 means downloaded fresh in that slot; age `i > 0` requires
/// the content to have been cached with age `i - 1` in the previous slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    content: usize,
    ages: Vec<Option<u32>>,
}

impl Column {
    pub fn new(content: usize, ages: Vec<Option<u32>>) -> Result<Column> {
        for (t, age) in ages.iter().enumerate() {
            if let Some(i) = *age {
                if i > 0 {
                    let prev = if t == 0 { None } else { ages[t - 1] };
                    if prev != Some(i - 1) {
                        return Err(Error::InvalidColumn(format!(
                            "age {i} at slot {t} requires age {} in slot {}",
                            i - 1,
                            t as isize - 1
                        )));
                    }
                }
            }
        }
        Ok(Column { content, ages })
    }

    /// The trajectory that never caches the content.
    pub fn never_cached(content: usize, num_slots: usize) -> Column {
        Column {
            content,
            ages: vec![None; num_slots],
        }
    }

    pub fn content(&self) -> usize {
        self.content
    }

    pub fn num_slots(&self) -> usize {
        self.ages.len()
    }

    pub fn cached(&self, t: usize) -> bool {
        self.ages[t].is_some()
    }

    pub fn age(&self, t: usize) -> Option<u32> {
        self.ages[t]
    }

    pub fn ages(&self) -> &[Option<u32>] {
        &self.ages
    }

    pub fn cached_count(&self) -> usize {
        self.ages.iter().filter(|a| a.is_some()).count()
    }
}

/// Cost of a schedule split into its three components.
/// `total = download + update + aoi_weight * aoi`; the `aoi` field is the
/// unweighted age penalty sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub download: f64,
    pub update: f64,
    pub aoi: f64,
    pub total: f64,
}

/// One column per content, feasible for the cache capacity in every slot.
#[derive(Debug, Clone)]
pub struct Schedule {
    columns: Vec<Column>,
    breakdown: CostBreakdown,
}

impl Schedule {
    /// Validates the columns (one per content, in content order, legal
    /// trajectories, capacity respected exactly in every slot) and prices
    /// the schedule.
    pub fn new(inst: &Instance, columns: Vec<Column>) -> Result<Schedule> {
        if columns.len() != inst.num_contents() {
            return Err(Error::Dimension(format!(
                "schedule has {} columns for {} contents",
                columns.len(),
                inst.num_contents()
            )));
        }
        for (f, col) in columns.iter().enumerate() {
            if col.content() != f {
                return Err(Error::Dimension(format!(
                    "column at position {f} is for content {}",
                    col.content()
                )));
            }
            if col.num_slots() != inst.num_slots() {
                return Err(Error::Dimension(format!(
                    "column for content {f} covers {} slots, instance has {}",
                    col.num_slots(),
                    inst.num_slots()
                )));
            }
            // Re-run the trajectory check; callers may have built the column directly.
            Column::new(f, col.ages().to_vec())?;
        }
        check_capacity(inst, &columns)?;
        let breakdown = total_cost_of_columns(inst, &columns);
        Ok(Schedule { columns, breakdown })
    }

    pub fn empty(inst: &Instance) -> Schedule {
        let columns = (0..inst.num_contents())
            .map(|f| Column::never_cached(f, inst.num_slots()))
            .collect();
        Schedule::new(inst, columns).expect("empty schedule is always feasible")
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, f: usize) -> &Column {
        &self.columns[f]
    }

    pub fn breakdown(&self) -> &CostBreakdown {
        &self.breakdown
    }
}

/// Exact per-slot capacity check, no tolerance: the sizes of the cached
/// contents must not exceed the capacity in any slot.
pub fn check_capacity(inst: &Instance, columns: &[Column]) -> Result<()> {
    for t in 0..inst.num_slots() {
        let used: f64 = columns
            .iter()
            .enumerate()
            .filter(|(_, col)| col.cached(t))
            .map(|(f, _)| inst.size(f))
            .sum();
        if used > inst.capacity() {
            return Err(Error::Infeasible(format!(
                "slot {t} caches {used} data units, capacity is {}",
                inst.capacity()
            )));
        }
    }
    Ok(())
}

fn check_shape(inst: &Instance, sched: &Schedule) -> Result<()> {
    if sched.columns.len() != inst.num_contents()
        || sched.columns.iter().any(|c| c.num_slots() != inst.num_slots())
    {
        return Err(Error::Dimension(
            "schedule shape does not match instance".into(),
        ));
    }
    Ok(())
}

/// Serving cost: every request pays `size * cost_cache` when its content is
/// cached in its slot and `size * cost_server` otherwise.
pub fn download_cost(inst: &Instance, sched: &Schedule) -> Result<f64> {
    check_shape(inst, sched)?;
    let mut sum = 0.0;
    for (f, col) in sched.columns.iter().enumerate() {
        let l = inst.size(f);
        for t in 0..inst.num_slots() {
            let unit = if col.cached(t) { inst.cost_cache() } else { inst.cost_server() };
            sum += l * f64::from(inst.demand(f, t)) * unit;
        }
    }
    Ok(sum)
}

/// Refresh cost: every fresh download into the cache (age 0) pays
/// `size * (cost_server - cost_cache)`.
pub fn update_cost(inst: &Instance, sched: &Schedule) -> Result<f64> {
    check_shape(inst, sched)?;
    let mut sum = 0.0;
    for (f, col) in sched.columns.iter().enumerate() {
        for t in 0..inst.num_slots() {
            if col.age(t) == Some(0) {
                sum += inst.refresh_cost(f);
            }
        }
    }
    Ok(sum)
}

/// Unweighted age penalty: each request served from the cache at age `i > 0`
/// pays the content's penalty at that age.
pub fn aoi_cost(inst: &Instance, sched: &Schedule) -> Result<f64> {
    check_shape(inst, sched)?;
    let mut sum = 0.0;
    for (f, col) in sched.columns.iter().enumerate() {
        for t in 0..inst.num_slots() {
            if let Some(age) = col.age(t) {
                if age > 0 {
                    sum += inst.penalty(f, age) * f64::from(inst.demand(f, t));
                }
            }
        }
    }
    Ok(sum)
}

pub fn total_cost(inst: &Instance, sched: &Schedule) -> Result<CostBreakdown> {
    check_shape(inst, sched)?;
    Ok(total_cost_of_columns(inst, &sched.columns))
}

fn total_cost_of_columns(inst: &Instance, columns: &[Column]) -> CostBreakdown {
    let mut download = 0.0;
    let mut update = 0.0;
    let mut aoi = 0.0;
    for (f, col) in columns.iter().enumerate() {
        let l = inst.size(f);
        for t in 0..inst.num_slots() {
            let m = f64::from(inst.demand(f, t));
            match col.age(t) {
                None => download += l * m * inst.cost_server(),
                Some(0) => {
                    download += l * m * inst.cost_cache();
                    update += inst.refresh_cost(f);
                }
                Some(age) => {
                    download += l * m * inst.cost_cache();
                    aoi += inst.penalty(f, age) * m;
                }
            }
        }
    }
    CostBreakdown {
        download,
        update,
        aoi,
        total: download + update + inst.aoi_weight() * aoi,
    }
}

/// Full cost attributable to one content's trajectory, including the
/// weighted age penalty. Summing this over a schedule's columns reproduces
/// the schedule total.
pub fn column_cost(inst: &Instance, col: &Column) -> Result<f64> {
    let f = col.content();
    if f >= inst.num_contents() || col.num_slots() != inst.num_slots() {
        return Err(Error::Dimension(
            "column shape does not match instance".into(),
        ));
    }
    Column::new(f, col.ages().to_vec())?;
    let l = inst.size(f);
    let mut sum = 0.0;
    for t in 0..inst.num_slots() {
        let m = f64::from(inst.demand(f, t));
        match col.age(t) {
            None => sum += l * m * inst.cost_server(),
            Some(0) => sum += l * m * inst.cost_cache() + inst.refresh_cost(f),
            Some(age) => {
                sum += l * m * inst.cost_cache() + inst.aoi_weight() * inst.penalty(f, age) * m;
            }
        }
    }
    Ok(sum)
}

/// Data units pulled over the backhaul: server-to-user traffic for requests
/// not served from the cache plus server-to-cache traffic for each fresh
/// download.
pub fn backhaul_load(inst: &Instance, sched: &Schedule) -> Result<f64> {
    check_shape(inst, sched)?;
    let mut sum = 0.0;
    for (f, col) in sched.columns.iter().enumerate() {
        let l = inst.size(f);
        for t in 0..inst.num_slots() {
            match col.age(t) {
                None => sum += l * f64::from(inst.demand(f, t)),
                Some(0) => sum += l,
                Some(_) => {}
            }
        }
    }
    Ok(sum)
}

/// Request-weighted mean age over cache-served requests; fresh downloads
/// count with age zero. Zero when no request is served from the cache.
pub fn avg_aoi(inst: &Instance, sched: &Schedule) -> Result<f64> {
    check_shape(inst, sched)?;
    let mut weighted = 0.0;
    let mut served = 0.0;
    for (f, col) in sched.columns.iter().enumerate() {
        for t in 0..inst.num_slots() {
            if let Some(age) = col.age(t) {
                let m = f64::from(inst.demand(f, t));
                weighted += f64::from(age) * m;
                served += m;
            }
        }
    }
    Ok(if served > 0.0 { weighted / served } else { 0.0 })
}

/// Content with the identity age penalty, for tests across the crate.
#[cfg(test)]
pub(crate) fn linear_content(id: u32, size: f64) -> Content {
    Content {
        id,
        size,
        aoi_penalty: AoiPenalty::Linear(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_content_instance(
        num_slots: usize,
        size: f64,
        demand: Vec<u32>,
        cost_server: f64,
        cost_cache: f64,
        aoi_weight: f64,
        penalty: AoiPenalty,
    ) -> Instance {
        Instance::new(
            num_slots,
            vec![Content { id: 1, size, aoi_penalty: penalty }],
            size,
            cost_server,
            cost_cache,
            aoi_weight,
            Some(vec![demand]),
            None,
        )
        .unwrap()
    }

    fn schedule_with(inst: &Instance, ages: Vec<Option<u32>>) -> Schedule {
        Schedule::new(inst, vec![Column::new(0, ages).unwrap()]).unwrap()
    }

    #[test]
    fn download_cost_uncached_and_cached() {
        let inst = single_content_instance(1, 2.0, vec![3], 10.0, 1.0, 0.0, AoiPenalty::Linear(1.0));
        let uncached = schedule_with(&inst, vec![None]);
        assert_eq!(download_cost(&inst, &uncached).unwrap(), 60.0);
        let cached = schedule_with(&inst, vec![Some(0)]);
        assert_eq!(download_cost(&inst, &cached).unwrap(), 6.0);
    }

    #[test]
    fn update_cost_counts_fresh_downloads() {
        let inst = single_content_instance(2, 3.0, vec![1, 1], 10.0, 1.0, 0.0, AoiPenalty::Linear(1.0));
        let never = schedule_with(&inst, vec![None, None]);
        assert_eq!(update_cost(&inst, &never).unwrap(), 0.0);
        let keep = schedule_with(&inst, vec![Some(0), Some(1)]);
        assert_eq!(update_cost(&inst, &keep).unwrap(), 27.0);
        let refresh = schedule_with(&inst, vec![Some(0), Some(0)]);
        assert_eq!(update_cost(&inst, &refresh).unwrap(), 54.0);
    }

    #[test]
    fn aoi_cost_charges_only_positive_ages() {
        let inst = single_content_instance(2, 1.0, vec![1, 4], 10.0, 1.0, 1.0, AoiPenalty::Linear(1.0));
        let fresh = schedule_with(&inst, vec![Some(0), Some(0)]);
        assert_eq!(aoi_cost(&inst, &fresh).unwrap(), 0.0);
        let keep = schedule_with(&inst, vec![Some(0), Some(1)]);
        assert_eq!(aoi_cost(&inst, &keep).unwrap(), 4.0);
    }

    #[test]
    fn aoi_cost_weighs_demand_by_age_penalty() {
        // Ages 1 and 2 under penalty 2*age with 5 and 7 requests: 10 + 28.
        let inst = single_content_instance(3, 1.0, vec![0, 5, 7], 10.0, 1.0, 1.0, AoiPenalty::Linear(2.0));
        let sched = schedule_with(&inst, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(aoi_cost(&inst, &sched).unwrap(), 38.0);
    }

    #[test]
    fn total_cost_ignores_aoi_when_weight_is_zero() {
        let inst = single_content_instance(3, 1.0, vec![2, 5, 7], 10.0, 1.0, 0.0, AoiPenalty::Linear(2.0));
        let sched = schedule_with(&inst, vec![Some(0), Some(1), Some(2)]);
        let b = total_cost(&inst, &sched).unwrap();
        assert!(b.aoi > 0.0);
        assert_eq!(b.total, b.download + b.update);
    }

    #[test]
    fn empty_schedule_costs_full_server_traffic() {
        let inst = Instance::new(
            2,
            vec![linear_content(1, 2.0), linear_content(2, 3.0)],
            2.0,
            7.0,
            1.0,
            0.5,
            Some(vec![vec![1, 0], vec![2, 4]]),
            None,
        )
        .unwrap();
        let sched = Schedule::empty(&inst);
        let expect = 2.0 * 1.0 * 7.0 + 3.0 * (2.0 + 4.0) * 7.0;
        assert_eq!(sched.breakdown().total, expect);
        assert_eq!(sched.breakdown().update, 0.0);
        assert_eq!(sched.breakdown().aoi, 0.0);
    }

    /// Recomputes the serving and age cost request by request instead of from
    /// the demand matrix; an independent route to the same totals.
    fn per_request_total(inst: &Instance, sched: &Schedule) -> f64 {
        let requests = inst.requests().expect("oracle needs a request list");
        let mut serving = 0.0;
        let mut age_pen = 0.0;
        for r in requests {
            let f = r.content as usize - 1;
            let t = r.slot as usize - 1;
            let col = sched.column(f);
            match col.age(t) {
                None => serving += inst.size(f) * inst.cost_server(),
                Some(age) => {
                    serving += inst.size(f) * inst.cost_cache();
                    if age > 0 {
                        age_pen += inst.penalty(f, age);
                    }
                }
            }
        }
        let mut refresh = 0.0;
        for (f, col) in sched.columns().iter().enumerate() {
            for t in 0..inst.num_slots() {
                if col.age(t) == Some(0) {
                    refresh += inst.refresh_cost(f);
                }
            }
        }
        serving + refresh + inst.aoi_weight() * age_pen
    }

    #[test]
    fn total_cost_matches_per_request_recomputation() {
        let requests = vec![
            Request { user: 1, index: 1, content: 1, slot: 1 },
            Request { user: 1, index: 2, content: 2, slot: 2 },
            Request { user: 2, index: 1, content: 2, slot: 2 },
            Request { user: 2, index: 2, content: 2, slot: 3 },
            Request { user: 3, index: 1, content: 1, slot: 3 },
        ];
        let inst = Instance::new(
            3,
            vec![linear_content(1, 2.0), linear_content(2, 5.0)],
            7.0,
            10.0,
            1.0,
            0.7,
            None,
            Some(requests),
        )
        .unwrap();
        let sched = Schedule::new(
            &inst,
            vec![
                Column::new(0, vec![Some(0), Some(1), Some(2)]).unwrap(),
                Column::new(1, vec![None, Some(0), Some(1)]).unwrap(),
            ],
        )
        .unwrap();
        let total = sched.breakdown().total;
        let oracle = per_request_total(&inst, &sched);
        assert!((total - oracle).abs() <= 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn column_cost_of_never_cached_is_server_traffic() {
        let inst = single_content_instance(3, 2.0, vec![1, 2, 3], 10.0, 1.0, 0.5, AoiPenalty::Linear(1.0));
        let col = Column::never_cached(0, 3);
        assert_eq!(column_cost(&inst, &col).unwrap(), 2.0 * 6.0 * 10.0);
    }

    #[test]
    fn column_cost_matches_single_content_schedule_total() {
        let inst = single_content_instance(4, 3.0, vec![2, 0, 5, 1], 8.0, 2.0, 1.3, AoiPenalty::Linear(0.7));
        let col = Column::new(0, vec![None, Some(0), Some(1), Some(2)]).unwrap();
        let sched = Schedule::new(&inst, vec![col.clone()]).unwrap();
        let total = sched.breakdown().total;
        let cc = column_cost(&inst, &col).unwrap();
        assert!((total - cc).abs() <= 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn cached_serving_gain_under_reduction_prices() {
        // With two requests per content, server cost 2 and cache cost 1,
        // caching turns 4l of serving into 2l serving plus l of refresh.
        let inst = single_content_instance(1, 5.0, vec![2], 2.0, 1.0, 0.0, AoiPenalty::Linear(1.0));
        let uncached = schedule_with(&inst, vec![None]);
        let cached = schedule_with(&inst, vec![Some(0)]);
        assert_eq!(uncached.breakdown().total, 20.0);
        assert_eq!(cached.breakdown().total, 15.0);
    }

    #[test]
    fn column_rejects_broken_age_chain() {
        assert!(Column::new(0, vec![Some(1)]).is_err());
        assert!(Column::new(0, vec![Some(0), Some(2)]).is_err());
        assert!(Column::new(0, vec![None, Some(1)]).is_err());
        assert!(Column::new(0, vec![Some(0), None, Some(1)]).is_err());
        assert!(Column::new(0, vec![Some(0), Some(1), Some(2)]).is_ok());
        assert!(Column::new(0, vec![Some(0), Some(0)]).is_ok());
    }

    #[test]
    fn schedule_rejects_capacity_violation() {
        let inst = Instance::new(
            1,
            vec![linear_content(1, 2.0), linear_content(2, 3.0)],
            4.0,
            10.0,
            1.0,
            0.0,
            Some(vec![vec![1], vec![1]]),
            None,
        )
        .unwrap();
        let cols = vec![
            Column::new(0, vec![Some(0)]).unwrap(),
            Column::new(1, vec![Some(0)]).unwrap(),
        ];
        assert!(matches!(Schedule::new(&inst, cols), Err(Error::Infeasible(_))));
    }

    #[test]
    fn instance_rejects_bad_cost_order_and_shapes() {
        let c = vec![linear_content(1, 1.0)];
        assert!(Instance::new(1, c.clone(), 1.0, 1.0, 1.0, 0.0, Some(vec![vec![0]]), None).is_err());
        assert!(Instance::new(1, c.clone(), 1.0, 2.0, 1.0, 0.0, Some(vec![vec![0, 0]]), None).is_err());
        assert!(Instance::new(0, c.clone(), 1.0, 2.0, 1.0, 0.0, Some(vec![]), None).is_err());
        assert!(Instance::new(1, c, 1.0, 2.0, 1.0, 0.0, None, None).is_err());
    }

    #[test]
    fn instance_rejects_demand_request_mismatch() {
        let reqs = vec![Request { user: 1, index: 1, content: 1, slot: 1 }];
        let r = Instance::new(
            1,
            vec![linear_content(1, 1.0)],
            1.0,
            2.0,
            1.0,
            0.0,
            Some(vec![vec![2]]),
            Some(reqs),
        );
        assert!(r.is_err());
    }

    #[test]
    fn penalty_table_validation_and_saturation() {
        assert!(AoiPenalty::Table(vec![]).validate().is_err());
        assert!(AoiPenalty::Table(vec![1.0]).validate().is_err());
        assert!(AoiPenalty::Table(vec![0.0, 2.0, 1.0]).validate().is_err());
        let p = AoiPenalty::Table(vec![0.0, 1.0, 4.0]);
        assert!(p.validate().is_ok());
        assert_eq!(p.cost(0), 0.0);
        assert_eq!(p.cost(2), 4.0);
        assert_eq!(p.cost(9), 4.0);
    }

    #[test]
    fn json_round_trip_preserves_field_names() {
        let inst = Instance::new(
            2,
            vec![Content { id: 1, size: 2.0, aoi_penalty: AoiPenalty::Table(vec![0.0, 3.0]) }],
            2.0,
            10.0,
            1.0,
            0.5,
            Some(vec![vec![1, 2]]),
            None,
        )
        .unwrap();
        let text = serde_json::to_string_pretty(&inst).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["T", "capacity", "cost_server", "cost_cache", "aoi_weight", "contents", "demand"] {
            assert!(value.get(key).is_some(), "missing field {key}");
        }
        assert!(value["contents"][0].get("aoi_penalty").is_some());
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.num_slots(), 2);
        assert_eq!(back.demand(0, 1), 2);
    }

    #[test]
    fn json_accepts_requests_only() {
        let text = r#"{
            "T": 2, "capacity": 3.0, "cost_server": 10.0, "cost_cache": 1.0,
            "aoi_weight": 0.5,
            "contents": [{"id": 1, "size": 3.0, "aoi_penalty": {"linear": 1.0}}],
            "requests": [
                {"user": 1, "index": 1, "content": 1, "slot": 2},
                {"user": 2, "index": 1, "content": 1, "slot": 2}
            ]
        }"#;
        let inst: Instance = serde_json::from_str(text).unwrap();
        assert_eq!(inst.demand(0, 0), 0);
        assert_eq!(inst.demand(0, 1), 2);
    }

    #[test]
    fn backhaul_and_mean_age_metrics() {
        let inst = Instance::new(
            2,
            vec![linear_content(1, 2.0), linear_content(2, 3.0)],
            5.0,
            10.0,
            1.0,
            0.5,
            Some(vec![vec![1, 1], vec![2, 0]]),
            None,
        )
        .unwrap();
        let sched = Schedule::new(
            &inst,
            vec![
                Column::new(0, vec![Some(0), Some(1)]).unwrap(),
                Column::new(1, vec![None, None]).unwrap(),
            ],
        )
        .unwrap();
        // Content 2 is never cached: 2 requests * size 3. Content 1 downloads once.
        assert_eq!(backhaul_load(&inst, &sched).unwrap(), 6.0 + 2.0);
        // Cache-served requests: content 1 at ages 0 and 1, one request each.
        assert_eq!(avg_aoi(&inst, &sched).unwrap(), 0.5);
        let none = Schedule::empty(&inst);
        assert_eq!(avg_aoi(&inst, &none).unwrap(), 0.0);
    }
}

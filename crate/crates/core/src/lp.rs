//! Small dense linear programming solver.
//!
//! Minimizes `c x` subject to `A x <= b`, `E x = d` and `0 <= x <= 1` for
//! every variable, using a bounded-variable primal simplex over a dense
//! basis inverse. Phase one drives artificial variables out of the basis;
//! phase two optimizes the real objective. Entering variables are picked by
//! steepest violation, falling back to Bland's rule permanently once the
//! objective stalls, which rules out cycling. There is no presolve beyond
//! dropping all-zero rows.
//!
//! Dual values follow the convention `reduced_cost(j) = c[j] - sum_i y[i] *
//! a[i][j]`; at an optimum of this minimization the duals of `<=` rows are
//! nonpositive. Every solution reported as optimal has been checked against
//! its own certificates (primal feasibility, dual signs, complementary
//! slackness, reduced-cost optimality, and the primal-dual gap); a solution
//! that fails the check surfaces as an error, never as a silent answer.

use crate::error::{Error, Result};

/// Absolute feasibility tolerance, scaled by `max(1, |rhs|)` per row.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-7;
/// Complementary slackness tolerance, scaled by the larger factor.
pub const CS_TOL: f64 = 1e-6;
/// Relative primal-dual gap tolerance.
pub const GAP_TOL: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rhs: f64,
}

/// `min c x` with `A x <= b`, `E x = d`, `0 <= x <= 1`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    objective: Vec<f64>,
    le_rows: Vec<Row>,
    eq_rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `primal`, `objective` and the duals are meaningful
/// only when `status` is `Optimal`; `duals_ineq[i]` belongs to the i-th
/// `<=` row and `duals_eq[i]` to the i-th `=` row.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    pub duals_ineq: Vec<f64>,
    pub duals_eq: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Result<LpProblem> {
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::LpFailure("objective coefficients must be finite".into()));
        }
        Ok(LpProblem {
            objective,
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_le_rows(&self) -> usize {
        self.le_rows.len()
    }

    pub fn num_eq_rows(&self) -> usize {
        self.eq_rows.len()
    }

    fn check_row(&self, coeffs: &[f64], rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "row has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        if coeffs.iter().any(|a| !a.is_finite()) || !rhs.is_finite() {
            return Err(Error::LpFailure("row data must be finite".into()));
        }
        Ok(())
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&coeffs, rhs)?;
        self.le_rows.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&coeffs, rhs)?;
        self.eq_rows.push(Row { coeffs, rhs });
        Ok(())
    }

    /// Text export in the conventional LP file layout: a `Minimize` section,
    /// `Subject To` rows named `c{i}` (inequalities) and `e{i}` (equalities),
    /// a `Bounds` section pinning every variable to [0, 1], and `End`.
    /// Variables are named `x{j}` in input order.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::from("Minimize\n obj:");
        push_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for (i, row) in self.le_rows.iter().enumerate() {
            out.push_str(&format!(" c{i}:"));
            push_terms(&mut out, &row.coeffs);
            out.push_str(&format!(" <= {}\n", row.rhs));
        }
        for (i, row) in self.eq_rows.iter().enumerate() {
            out.push_str(&format!(" e{i}:"));
            push_terms(&mut out, &row.coeffs);
            out.push_str(&format!(" = {}\n", row.rhs));
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            out.push_str(&format!(" 0 <= x{j} <= 1\n"));
        }
        out.push_str("End\n");
        out
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let mut simplex = Simplex::build(self)?;
        let solution = simplex.run(self)?;
        if solution.status == LpStatus::Optimal {
            verify_certificates(self, &solution)?;
        }
        Ok(solution)
    }
}

fn push_terms(out: &mut String, coeffs: &[f64]) {
    let mut any = false;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if any {
            if c < 0.0 {
                out.push_str(&format!(" - {} x{j}", -c));
            } else {
                out.push_str(&format!(" + {c} x{j}"));
            }
        } else {
            out.push_str(&format!(" {c} x{j}"));
            any = true;
        }
    }
    if !any {
        out.push_str(" 0 x0");
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Simplex {
    num_rows: usize,
    num_cols: usize,
    num_struct: usize,
    cols: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    upper: Vec<f64>,
    artificials: Vec<usize>,
    /// Indices of the original <=/= rows that survived empty-row removal.
    kept_le: Vec<usize>,
    kept_eq: Vec<usize>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    infeasible_input: bool,
}

impl Simplex {
    fn build(p: &LpProblem) -> Result<Simplex> {
        let n = p.num_vars();
        let mut kept_le = Vec::new();
        let mut kept_eq = Vec::new();
        let mut infeasible_input = false;
        for (i, row) in p.le_rows.iter().enumerate() {
            if row.coeffs.iter().all(|&a| a == 0.0) {
                if row.rhs < -FEAS_TOL * 1.0_f64.max(row.rhs.abs()) {
                    infeasible_input = true;
                }
            } else {
                kept_le.push(i);
            }
        }
        for (i, row) in p.eq_rows.iter().enumerate() {
            if row.coeffs.iter().all(|&a| a == 0.0) {
                if row.rhs.abs() > FEAS_TOL * 1.0_f64.max(row.rhs.abs()) {
                    infeasible_input = true;
                }
            } else {
                kept_eq.push(i);
            }
        }

        let mi = kept_le.len();
        let m = mi + kept_eq.len();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut col = vec![0.0; m];
            for (r, &i) in kept_le.iter().enumerate() {
                col[r] = p.le_rows[i].coeffs[j];
            }
            for (r, &i) in kept_eq.iter().enumerate() {
                col[mi + r] = p.eq_rows[i].coeffs[j];
            }
            cols.push(col);
        }
        let mut rhs = vec![0.0; m];
        for (r, &i) in kept_le.iter().enumerate() {
            rhs[r] = p.le_rows[i].rhs;
        }
        for (r, &i) in kept_eq.iter().enumerate() {
            rhs[mi + r] = p.eq_rows[i].rhs;
        }

        let mut upper = vec![1.0; n];
        let mut state = vec![VarState::AtLower; n];
        let mut basis = vec![usize::MAX; m];
        let mut artificials = Vec::new();

        // Slack columns for <= rows; a nonnegative right-hand side lets the
        // slack start basic, otherwise the row gets an artificial below.
        for r in 0..mi {
            let mut col = vec![0.0; m];
            col[r] = 1.0;
            cols.push(col);
            upper.push(f64::INFINITY);
            let j = cols.len() - 1;
            if rhs[r] >= 0.0 {
                state.push(VarState::Basic(r));
                basis[r] = j;
            } else {
                state.push(VarState::AtLower);
            }
        }
        for r in 0..m {
            if basis[r] != usize::MAX {
                continue;
            }
            let sigma = if rhs[r] >= 0.0 { 1.0 } else { -1.0 };
            let mut col = vec![0.0; m];
            col[r] = sigma;
            cols.push(col);
            upper.push(f64::INFINITY);
            let j = cols.len() - 1;
            state.push(VarState::Basic(r));
            basis[r] = j;
            artificials.push(j);
        }

        let num_cols = cols.len();
        let mut s = Simplex {
            num_rows: m,
            num_cols,
            num_struct: n,
            cols,
            rhs,
            upper,
            artificials,
            kept_le,
            kept_eq,
            state,
            basis,
            binv: Vec::new(),
            xb: Vec::new(),
            infeasible_input,
        };
        s.refactor()?;
        Ok(s)
    }

    /// Rebuilds the basis inverse from scratch and recomputes basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.num_rows;
        let mut work: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = (0..m).map(|i| self.cols[self.basis[i]][r]).collect();
                let mut inv = vec![0.0; m];
                inv[r] = 1.0;
                row.extend(inv);
                row
            })
            .collect();
        for col in 0..m {
            let pivot_row = (col..m)
                .max_by(|&a, &b| work[a][col].abs().partial_cmp(&work[b][col].abs()).unwrap())
                .unwrap();
            if work[pivot_row][col].abs() < PIVOT_TOL {
                return Err(Error::LpFailure("singular basis matrix".into()));
            }
            work.swap(col, pivot_row);
            let pivot = work[col][col];
            for v in work[col].iter_mut() {
                *v /= pivot;
            }
            for r in 0..m {
                if r != col {
                    let factor = work[r][col];
                    if factor != 0.0 {
                        for c in 0..2 * m {
                            let delta = factor * work[col][c];
                            work[r][c] -= delta;
                        }
                    }
                }
            }
        }
        self.binv = work.into_iter().map(|row| row[m..].to_vec()).collect();

        let mut eff = self.rhs.clone();
        for j in 0..self.num_cols {
            if self.state[j] == VarState::AtUpper {
                for r in 0..m {
                    eff[r] -= self.cols[j][r] * self.upper[j];
                }
            }
        }
        self.xb = (0..m)
            .map(|i| (0..m).map(|r| self.binv[i][r] * eff[r]).sum())
            .collect();
        Ok(())
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.num_rows;
        (0..m)
            .map(|r| (0..m).map(|i| costs[self.basis[i]] * self.binv[i][r]).sum())
            .collect()
    }

    fn reduced_cost(&self, j: usize, costs: &[f64], y: &[f64]) -> f64 {
        costs[j] - dot(y, &self.cols[j])
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(row) => self.xb[row],
            VarState::AtLower => 0.0,
            VarState::AtUpper => self.upper[j],
        }
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        (0..self.num_cols).map(|j| costs[j] * self.value(j)).sum()
    }

    /// Runs the simplex to optimality for the given cost vector.
    /// Returns false when the problem is unbounded in this phase.
    fn optimize(&mut self, costs: &[f64]) -> Result<bool> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        let stall_limit = 5 * (self.num_rows + 10);
        let max_iter = 10_000 + 500 * (self.num_rows + self.num_cols);
        let mut since_refactor = 0usize;

        for _ in 0..max_iter {
            let y = self.duals(costs);
            let entering = self.pick_entering(costs, &y, bland);
            let (j, dir, _d) = match entering {
                None => return Ok(true),
                Some(e) => e,
            };

            let w: Vec<f64> = (0..self.num_rows)
                .map(|i| dot(&self.binv[i], &self.cols[j]))
                .collect();

            // Movement rate of each basic value per unit increase of the step.
            let gap = self.upper[j]; // all lower bounds are zero
            let mut best_delta = gap;
            let mut leaving: Option<(usize, bool)> = None;
            for i in 0..self.num_rows {
                let rate = -dir * w[i];
                if rate < -PIVOT_TOL {
                    let room = self.xb[i].max(0.0);
                    let delta = room / -rate;
                    if delta < best_delta - 1e-12 {
                        best_delta = delta;
                        leaving = Some((i, false));
                    } else if delta < best_delta + 1e-12 {
                        leaving = Some(better_leaving(self, leaving, i, false, &w, bland));
                        best_delta = best_delta.min(delta);
                    }
                } else if rate > PIVOT_TOL {
                    let ub = self.upper[self.basis[i]];
                    if ub.is_finite() {
                        let room = (ub - self.xb[i]).max(0.0);
                        let delta = room / rate;
                        if delta < best_delta - 1e-12 {
                            best_delta = delta;
                            leaving = Some((i, true));
                        } else if delta < best_delta + 1e-12 {
                            leaving = Some(better_leaving(self, leaving, i, true, &w, bland));
                            best_delta = best_delta.min(delta);
                        }
                    }
                }
            }

            if best_delta.is_infinite() {
                return Ok(false);
            }

            let delta = best_delta.max(0.0);
            match leaving {
                None => {
                    // The entering variable runs into its own opposite bound.
                    for i in 0..self.num_rows {
                        self.xb[i] += -dir * w[i] * delta;
                    }
                    self.state[j] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                }
                Some((row, hits_upper)) => {
                    for i in 0..self.num_rows {
                        if i != row {
                            self.xb[i] += -dir * w[i] * delta;
                        }
                    }
                    let old = self.basis[row];
                    self.state[old] = if hits_upper { VarState::AtUpper } else { VarState::AtLower };
                    let entering_value = if dir > 0.0 { delta } else { self.upper[j] - delta };
                    self.basis[row] = j;
                    self.state[j] = VarState::Basic(row);
                    // Elementary row transformation keeping binv = B^-1.
                    let pivot = w[row];
                    if pivot.abs() < PIVOT_TOL {
                        return Err(Error::LpFailure("degenerate pivot element".into()));
                    }
                    for c in 0..self.num_rows {
                        self.binv[row][c] /= pivot;
                    }
                    for i in 0..self.num_rows {
                        if i != row && w[i] != 0.0 {
                            let factor = w[i];
                            for c in 0..self.num_rows {
                                let delta_c = factor * self.binv[row][c];
                                self.binv[i][c] -= delta_c;
                            }
                        }
                    }
                    self.xb[row] = entering_value;
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        since_refactor = 0;
                    }
                }
            }

            let obj = self.objective(costs);
            if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                stall = 0;
            } else {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            }
            last_obj = obj;
        }
        Err(Error::LpFailure("simplex iteration limit exceeded".into()))
    }

    fn pick_entering(&self, costs: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.num_cols {
            if matches!(self.state[j], VarState::Basic(_)) || self.upper[j] <= 0.0 {
                continue;
            }
            let d = self.reduced_cost(j, costs, y);
            let candidate = match self.state[j] {
                VarState::AtLower if d < -OPT_TOL => Some((j, 1.0, d)),
                VarState::AtUpper if d > OPT_TOL => Some((j, -1.0, d)),
                _ => None,
            };
            if let Some(c) = candidate {
                if bland {
                    return Some(c);
                }
                if best.is_none_or(|(_, _, bd)| c.2.abs() > bd.abs()) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn run(&mut self, p: &LpProblem) -> Result<LpSolution> {
        if self.infeasible_input {
            return Ok(infeasible());
        }

        if !self.artificials.is_empty() {
            let mut costs = vec![0.0; self.num_cols];
            for &j in &self.artificials {
                costs[j] = 1.0;
            }
            if !self.optimize(&costs)? {
                return Err(Error::LpFailure("phase one reported unbounded".into()));
            }
            let infeas = self.objective(&costs);
            let scale = 1.0_f64.max(self.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
            if infeas > FEAS_TOL * scale {
                return Ok(infeasible());
            }
            for &j in &self.artificials {
                self.upper[j] = 0.0;
            }
        }

        let mut costs = vec![0.0; self.num_cols];
        costs[..self.num_struct].copy_from_slice(&p.objective);
        if !self.optimize(&costs)? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                primal: Vec::new(),
                objective: f64::NEG_INFINITY,
                duals_ineq: Vec::new(),
                duals_eq: Vec::new(),
            });
        }

        self.refactor()?;
        let y = self.duals(&costs);
        let primal: Vec<f64> = (0..self.num_struct).map(|j| self.value(j)).collect();
        let objective = dot(&p.objective, &primal);
        let mut duals_ineq = vec![0.0; p.le_rows.len()];
        for (r, &i) in self.kept_le.iter().enumerate() {
            duals_ineq[i] = y[r];
        }
        let mut duals_eq = vec![0.0; p.eq_rows.len()];
        for (r, &i) in self.kept_eq.iter().enumerate() {
            duals_eq[i] = y[self.kept_le.len() + r];
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            primal,
            objective,
            duals_ineq,
            duals_eq,
        })
    }
}

fn better_leaving(
    s: &Simplex,
    current: Option<(usize, bool)>,
    row: usize,
    hits_upper: bool,
    w: &[f64],
    bland: bool,
) -> (usize, bool) {
    match current {
        None => (row, hits_upper),
        Some((cur_row, cur_upper)) => {
            let keep = if bland {
                s.basis[cur_row] <= s.basis[row]
            } else {
                w[cur_row].abs() >= w[row].abs()
            };
            if keep {
                (cur_row, cur_upper)
            } else {
                (row, hits_upper)
            }
        }
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        primal: Vec::new(),
        objective: f64::NAN,
        duals_ineq: Vec::new(),
        duals_eq: Vec::new(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks an optimal solution against its own optimality certificates.
pub fn verify_certificates(p: &LpProblem, s: &LpSolution) -> Result<()> {
    if s.status != LpStatus::Optimal {
        return Ok(());
    }
    let x = &s.primal;
    if x.len() != p.num_vars() {
        return Err(Error::LpFailure("solution dimension mismatch".into()));
    }
    for (j, &v) in x.iter().enumerate() {
        if !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v) {
            return Err(Error::LpFailure(format!("variable {j} out of bounds: {v}")));
        }
    }
    for (i, row) in p.le_rows.iter().enumerate() {
        let lhs = dot(&row.coeffs, x);
        let tol = FEAS_TOL * 1.0_f64.max(row.rhs.abs());
        if lhs > row.rhs + tol {
            return Err(Error::LpFailure(format!("<= row {i} violated: {lhs} > {}", row.rhs)));
        }
        let pi = s.duals_ineq[i];
        if pi > OPT_TOL {
            return Err(Error::LpFailure(format!("<= row {i} has positive dual {pi}")));
        }
        let slack = row.rhs - lhs;
        if (pi * slack).abs() > CS_TOL * 1.0_f64.max(pi.abs()).max(slack.abs()) {
            return Err(Error::LpFailure(format!(
                "complementary slackness violated on row {i}: dual {pi}, slack {slack}"
            )));
        }
    }
    for (i, row) in p.eq_rows.iter().enumerate() {
        let lhs = dot(&row.coeffs, x);
        let tol = FEAS_TOL * 1.0_f64.max(row.rhs.abs());
        if (lhs - row.rhs).abs() > tol {
            return Err(Error::LpFailure(format!("= row {i} violated: {lhs} != {}", row.rhs)));
        }
    }

    let mut dual_obj = 0.0;
    for (i, row) in p.le_rows.iter().enumerate() {
        dual_obj += s.duals_ineq[i] * row.rhs;
    }
    for (i, row) in p.eq_rows.iter().enumerate() {
        dual_obj += s.duals_eq[i] * row.rhs;
    }
    for j in 0..p.num_vars() {
        let mut d = p.objective[j];
        for (i, row) in p.le_rows.iter().enumerate() {
            d -= s.duals_ineq[i] * row.coeffs[j];
        }
        for (i, row) in p.eq_rows.iter().enumerate() {
            d -= s.duals_eq[i] * row.coeffs[j];
        }
        let v = x[j];
        if v <= 1e-6 {
            if d < -OPT_TOL {
                return Err(Error::LpFailure(format!(
                    "variable {j} at lower bound has reduced cost {d}"
                )));
            }
        } else if v >= 1.0 - 1e-6 {
            if d > OPT_TOL {
                return Err(Error::LpFailure(format!(
                    "variable {j} at upper bound has reduced cost {d}"
                )));
            }
        } else if d.abs() > OPT_TOL * 1.0_f64.max(p.objective[j].abs()) {
            return Err(Error::LpFailure(format!(
                "interior variable {j} has nonzero reduced cost {d}"
            )));
        }
        // Upper bounds contribute min(0, d) to the dual objective.
        dual_obj += d.min(0.0);
    }
    let gap = (s.objective - dual_obj).abs();
    if gap > GAP_TOL * 1.0_f64.max(s.objective.abs()) {
        return Err(Error::LpFailure(format!(
            "primal-dual gap {gap} between {} and {dual_obj}",
            s.objective
        )));
    }
    Ok(())
}

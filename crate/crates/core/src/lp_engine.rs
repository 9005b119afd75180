//! Fractional allocation LP over columns `(j, x, S)`.
//!
//! A column assigns team `S` to project `j` under reward estimate `x`, where
//! `x` comes from the doubling grid `D_j` and every member of `S` has
//! singleton value at most `δx`. Its value is
//! `min{f_j(S), x} − (√x / 2√2) · Σ_{i∈S} √c_ij`, and the constraints are
//! "at most one unit per project" and "at most one unit per agent".
//!
//! There are exponentially many columns, so the LP is solved through its
//! dual: a binary search on the dual objective bound, where each probe is
//! decided by cutting planes. The restricted primal is solved with the dense
//! simplex in [`crate::simplex`]; its duals are handed to an approximate
//! separation oracle built on capped demand, and every column the oracle
//! reports as violated joins the restricted problem. Afterwards two cleanup
//! loops make every surviving column satisfy
//! `f_j(S) ≤ (1+δ)x`, `f_j({i}) ≤ δx` and `f_j(i | S∖i) ≥ √(x c_ij) / 2√2`.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{E, SQRT_2};
use std::fmt::Write as _;

use serde::Serialize;

use crate::capped_demand::{capped_demand, capped_demand_submodular, CappedQuery};
use crate::error::{Error, Result};
use crate::instance::{AgentSet, FunctionClass, Instance, Params};
use crate::oracles::{leave_one_out, PriceVector};
use crate::simplex::{self, LinearProgram, LpSolution};

/// Weights below this are treated as simplex noise and dropped.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Columns allowed per project-or-agent row and grid value.
const BUDGET_PER_ROW_AND_ESTIMATE: usize = 50;

/// Which approximate demand oracle drives the separation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OraclePath {
    /// Capped demand built from exact demand queries (additive, XOS).
    Demand,
    /// Distorted greedy built from value queries (submodular classes).
    ValueQuery,
}

/// Picks the oracle path from the function classes of `inst`.
///
/// Instances made only of additive and XOS functions use demand queries;
/// instances made only of submodular classes, at least one without a demand
/// oracle, use value queries. Mixing XOS with value-query-only classes has
/// no valid oracle.
pub fn oracle_path(inst: &Instance) -> Result<OraclePath> {
    let classes: Vec<FunctionClass> = inst.functions().iter().map(|f| f.class()).collect();
    let all_demand = classes.iter().all(|c| c.has_demand_oracle());
    let all_submodular = classes.iter().all(|c| c.is_submodular());
    if all_demand {
        Ok(OraclePath::Demand)
    } else if all_submodular {
        Ok(OraclePath::ValueQuery)
    } else {
        Err(Error::MixedOracleClasses)
    }
}

/// Doubling grid `{2^k f_j({i}) : 0 ≤ k ≤ ⌈log₂ n⌉, f_j({i}) > 0}`, sorted
/// and deduplicated.
pub fn estimate_grid(inst: &Instance, project: usize) -> Vec<f64> {
    let n = inst.n_agents();
    let k_max = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() };
    let mut grid: Vec<f64> = (0..n)
        .map(|i| inst.singleton(project, i))
        .filter(|&v| v > 0.0)
        .flat_map(|v| (0..=k_max).map(move |k| v * f64::from(1u32 << k)))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Agents whose singleton value for `project` is at most `δx`.
pub fn eligible_agents(inst: &Instance, project: usize, estimate: f64, delta: f64) -> AgentSet {
    (0..inst.n_agents())
        .filter(|&i| inst.singleton(project, i) <= delta * estimate)
        .collect()
}

/// `√(x c) / 2√2`, the per-agent charge a column pays at estimate `x`.
pub fn agent_charge(estimate: f64, cost: f64) -> f64 {
    (estimate * cost).sqrt() / (2.0 * SQRT_2)
}

/// `min{f_j(S), x} − Σ_{i∈S} √(x c_ij) / 2√2`.
pub fn column_value(inst: &Instance, project: usize, estimate: f64, set: AgentSet) -> f64 {
    let f = inst.function(project);
    f.eval(set).min(estimate) - set.iter().map(|i| agent_charge(estimate, inst.cost(i, project))).sum::<f64>()
}

/// Objective coefficient of a column in the LP the oracle path certifies:
/// the column value minus `δ(1 + 1/(1−δ))x` on the demand path, and
/// `(1 − 1/e) min{f_j(S), x}` minus the charges on the value-query path.
pub fn penalized_value(inst: &Instance, params: &Params, path: OraclePath, project: usize, estimate: f64, set: AgentSet) -> f64 {
    match path {
        OraclePath::Demand => {
            column_value(inst, project, estimate, set) - params.delta * params.demand_factor() * estimate
        }
        OraclePath::ValueQuery => {
            let f = inst.function(project);
            let charges: f64 = set.iter().map(|i| agent_charge(estimate, inst.cost(i, project))).sum();
            (1.0 - 1.0 / E) * f.eval(set).min(estimate) - charges
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub project: usize,
    pub estimate: f64,
    pub set: AgentSet,
    pub weight: f64,
}

/// Solver statistics reported alongside a fractional solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpDiagnostics {
    pub path: OraclePath,
    /// `Σ y · (min{f_j(S),x} − charges)`.
    pub objective: f64,
    /// Objective of the certified LP at `y`, including its penalty term.
    pub penalized_objective: f64,
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub epsilon: f64,
    pub probes: usize,
    pub oracle_calls: usize,
    pub generated_columns: usize,
    pub column_budget: usize,
    /// The objective was negative and the solution was zeroed.
    pub zeroed: bool,
    /// No restricted-LP point reaching `gamma_low` has a non-negative
    /// penalized objective, so the returned one is negative there.
    pub penalty_negative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalSolution {
    pub columns: Vec<Column>,
    pub diagnostics: LpDiagnostics,
}

impl FractionalSolution {
    pub fn objective(&self, inst: &Instance) -> f64 {
        self.columns
            .iter()
            .map(|c| c.weight * column_value(inst, c.project, c.estimate, c.set))
            .sum::<f64>()
            + 0.0 // turns the empty sum's -0 into 0
    }

    /// `Σ y · f_j(S)`.
    pub fn reward(&self, inst: &Instance) -> f64 {
        self.columns
            .iter()
            .map(|c| c.weight * inst.function(c.project).eval(c.set))
            .sum::<f64>()
            + 0.0
    }

    pub fn project_load(&self, project: usize) -> f64 {
        self.columns.iter().filter(|c| c.project == project).map(|c| c.weight).sum()
    }

    pub fn agent_load(&self, agent: usize) -> f64 {
        self.columns.iter().filter(|c| c.set.contains(agent)).map(|c| c.weight).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualPoint {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl DualPoint {
    pub fn zeros(n_projects: usize, n_agents: usize) -> Self {
        DualPoint {
            alpha: vec![0.0; n_projects],
            beta: vec![0.0; n_agents],
        }
    }

    pub fn objective(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Separation {
    AllSatisfied,
    Violated { project: usize, estimate: f64, set: AgentSet },
}

struct Grid {
    values: Vec<Vec<f64>>,
}

impl Grid {
    fn new(inst: &Instance) -> Self {
        Grid {
            values: (0..inst.n_projects()).map(|j| estimate_grid(inst, j)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }
}

/// A violated dual constraint: project, grid index, set.
type Cut = (usize, usize, AgentSet);

fn check_dual(inst: &Instance, dual: &DualPoint) -> Result<()> {
    if dual.alpha.len() != inst.n_projects() || dual.beta.len() != inst.n_agents() {
        return Err(Error::Precondition("dual point has the wrong dimensions".into()));
    }
    if dual.alpha.iter().chain(&dual.beta).any(|v| !(*v >= 0.0)) {
        return Err(Error::Precondition("dual entries must be non-negative".into()));
    }
    Ok(())
}

/// Runs the approximate demand oracle for every `(j, x)` and collects the
/// pairs whose answer violates the dual constraint, in `(j, x)` order.
fn find_cuts(inst: &Instance, params: &Params, path: OraclePath, grid: &Grid, dual: &DualPoint, first_only: bool) -> Result<(Vec<Cut>, usize)> {
    let mut cuts = Vec::new();
    let mut calls = 0;
    let factor = match path {
        OraclePath::Demand => params.demand_factor(),
        OraclePath::ValueQuery => 1.0,
    };
    for j in 0..inst.n_projects() {
        let f = inst.function(j);
        for (k, &x) in grid.values[j].iter().enumerate() {
            let prices: Vec<f64> = (0..inst.n_agents())
                .map(|i| {
                    if inst.singleton(j, i) <= params.delta * x {
                        agent_charge(x, inst.cost(i, j)) + dual.beta[i]
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let prices = PriceVector::new(prices)?;
            let set = match path {
                OraclePath::Demand => capped_demand(&CappedQuery {
                    f,
                    cap: x,
                    delta: params.delta,
                    prices: &prices,
                })?,
                OraclePath::ValueQuery => capped_demand_submodular(f, x, &prices)?,
            };
            calls += 1;
            let utility = f.eval(set).min(x) - prices.total(set);
            if factor * utility > dual.alpha[j] + params.lp_tol {
                cuts.push((j, k, set));
                if first_only {
                    return Ok((cuts, calls));
                }
            }
        }
    }
    Ok((cuts, calls))
}

/// Approximate separation for the dual of the column LP at `dual`.
///
/// On the demand path a pair `(j, x)` is violated when
/// `(1 + 1/(1−δ)) · (min{f_j(S̄),x} − p(S̄)) > α_j`; on the value-query path
/// when `min{f_j(S̄),x} − p(S̄) > α_j`. Here `S̄` is the approximate capped
/// demand at prices `p_i = √(x c_ij)/2√2 + β_i` for eligible agents and
/// `+inf` otherwise. When no pair is violated every dual constraint holds.
pub fn separation_oracle(inst: &Instance, params: &Params, dual: &DualPoint) -> Result<Separation> {
    check_dual(inst, dual)?;
    let path = oracle_path(inst)?;
    let grid = Grid::new(inst);
    let (cuts, _) = find_cuts(inst, params, path, &grid, dual, true)?;
    Ok(match cuts.first() {
        None => Separation::AllSatisfied,
        Some(&(project, k, set)) => Separation::Violated {
            project,
            estimate: grid.values[project][k],
            set,
        },
    })
}

struct Restricted {
    cols: Vec<Cut>,
    values: Vec<f64>,
    seen: HashSet<(usize, usize, u64)>,
}

impl Restricted {
    fn program(&self, inst: &Instance, project_coef: f64) -> LinearProgram {
        let m = inst.n_projects();
        let n = inst.n_agents();
        let mut rows = vec![vec![0.0; self.cols.len()]; m + n];
        for (c, &(j, _, set)) in self.cols.iter().enumerate() {
            rows[j][c] = project_coef;
            for i in set.iter() {
                rows[m + i][c] = 1.0;
            }
        }
        LinearProgram {
            objective: self.values.clone(),
            rows,
            rhs: vec![1.0; m + n],
        }
    }
}

/// Fractional column-LP solution satisfying the cleanup conditions; see the
/// module docs.
pub fn solve_lp1(inst: &Instance, params: &Params) -> Result<FractionalSolution> {
    solve_impl(inst, params, None)
}

/// [`solve_lp1`] that also renders the final restricted LP as text.
pub fn solve_lp1_with_dump(inst: &Instance, params: &Params) -> Result<(FractionalSolution, String)> {
    let mut dump = String::new();
    let sol = solve_impl(inst, params, Some(&mut dump))?;
    Ok((sol, dump))
}

fn solve_impl(inst: &Instance, params: &Params, dump: Option<&mut String>) -> Result<FractionalSolution> {
    params.check(inst)?;
    let path = oracle_path(inst)?;
    let m = inst.n_projects();
    let n = inst.n_agents();
    let eps = params.epsilon_for(inst);
    let grid = Grid::new(inst);
    let budget = BUDGET_PER_ROW_AND_ESTIMATE * (n + m) * grid.len();
    let (project_coef, weight_scale) = match path {
        OraclePath::Demand => (1.0 / params.demand_factor(), 1.0 / params.demand_factor()),
        OraclePath::ValueQuery => (1.0, 1.0),
    };

    let mut restricted = Restricted {
        cols: Vec::new(),
        values: Vec::new(),
        seen: HashSet::new(),
    };
    let mut current: Option<LpSolution> = None;
    let mut certified = false;
    let mut probes = 0;
    let mut oracle_calls = 0;

    let mut lo = 0.0;
    let mut hi = (m * n) as f64 * inst.max_singleton();
    while hi - lo >= eps {
        let gamma = 0.5 * (lo + hi);
        probes += 1;
        loop {
            if current.is_none() {
                current = Some(simplex::solve(&restricted.program(inst, project_coef), params.lp_tol)?);
            }
            let sol = current.as_ref().expect("restricted LP solved");
            if sol.objective > gamma {
                lo = gamma;
                break;
            }
            if certified {
                hi = gamma;
                break;
            }
            let dual = DualPoint {
                alpha: sol.duals[..m].to_vec(),
                beta: sol.duals[m..].to_vec(),
            };
            let (cuts, calls) = find_cuts(inst, params, path, &grid, &dual, false)?;
            oracle_calls += calls;
            let mut added = false;
            for (j, k, set) in cuts {
                if restricted.seen.insert((j, k, set.bits())) {
                    restricted.cols.push((j, k, set));
                    restricted.values.push(column_value(inst, j, grid.values[j][k], set));
                    added = true;
                }
            }
            if !added {
                certified = true;
                hi = gamma;
                break;
            }
            if restricted.cols.len() > budget {
                return Err(Error::ColumnBudget { budget });
            }
            current = None;
        }
    }
    let program = restricted.program(inst, project_coef);
    let sol = match current {
        Some(sol) => sol,
        None => simplex::solve(&program, params.lp_tol)?,
    };
    if let Some(out) = dump {
        let _ = writeln!(out, "# restricted LP: {} columns, objective {:.9e}", restricted.cols.len(), sol.objective);
        for (c, &(j, k, set)) in restricted.cols.iter().enumerate() {
            let _ = writeln!(out, "# y{c}: project {j}, x = {:.6e}, S = {:?}", grid.values[j][k], set);
        }
        out.push_str(&program.to_text());
        let _ = writeln!(out, "# basis {:?}", sol.basis);
    }

    let penalties: Vec<f64> = restricted
        .cols
        .iter()
        .map(|&(j, k, set)| penalized_value(inst, params, path, j, grid.values[j][k], set))
        .collect();
    let mut primal = sol.primal.clone();
    let mut penalty_negative = dot(&penalties, &primal) < 0.0;
    if penalty_negative {
        if let Some(y) = nonnegative_point(&program, &penalties, lo, params.lp_tol)? {
            primal = y;
            penalty_negative = false;
        }
    }
    let zeroed = dot(&program.objective, &primal) < 0.0;
    let weighted: Vec<(usize, usize, AgentSet, f64)> = if zeroed {
        Vec::new()
    } else {
        restricted
            .cols
            .iter()
            .zip(&primal)
            .filter(|(_, &y)| y > 0.0)
            .map(|(&(j, k, set), &y)| (j, k, set, y * weight_scale))
            .collect()
    };

    let mut merged: BTreeMap<(usize, usize, u64), f64> = BTreeMap::new();
    for (j, k, set, y) in weighted {
        let set = cleanup(inst, params, j, grid.values[j][k], set);
        *merged.entry((j, k, set.bits())).or_insert(0.0) += y;
    }
    let columns: Vec<Column> = merged
        .into_iter()
        .filter(|&((_, _, bits), y)| bits != 0 && y >= WEIGHT_FLOOR)
        .map(|((j, k, bits), y)| Column {
            project: j,
            estimate: grid.values[j][k],
            set: AgentSet::from_bits(bits),
            weight: y,
        })
        .collect();

    let mut out = FractionalSolution {
        columns,
        diagnostics: LpDiagnostics {
            path,
            objective: 0.0,
            penalized_objective: 0.0,
            gamma_low: lo,
            gamma_high: hi,
            epsilon: eps,
            probes,
            oracle_calls,
            generated_columns: restricted.cols.len(),
            column_budget: budget,
            zeroed,
            penalty_negative,
        },
    };
    out.diagnostics.objective = out.objective(inst);
    out.diagnostics.penalized_objective = out
        .columns
        .iter()
        .map(|c| c.weight * penalized_value(inst, params, path, c.project, c.estimate, c.set))
        .sum::<f64>()
        + 0.0;
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bisection steps on the penalty multiplier.
const MULTIPLIER_STEPS: usize = 60;

/// A feasible point of the restricted LP whose objective is at least
/// `target` and whose penalized objective is non-negative, if one exists.
///
/// Maximizes `value + μ · penalty` and bisects on `μ` for the smallest
/// multiplier giving a non-negative penalty; the two bracketing optima are
/// then mixed so that the penalty is exactly zero.
fn nonnegative_point(program: &LinearProgram, penalties: &[f64], target: f64, tol: f64) -> Result<Option<Vec<f64>>> {
    let solve_with = |mu: f64| -> Result<Vec<f64>> {
        let objective = program.objective.iter().zip(penalties).map(|(v, p)| v + mu * p).collect();
        let lp = LinearProgram {
            objective,
            ..program.clone()
        };
        Ok(simplex::solve(&lp, tol)?.primal)
    };
    let mut lo = (0.0, solve_with(0.0)?);
    let mut hi_mu = 1.0;
    let mut hi = solve_with(hi_mu)?;
    while dot(penalties, &hi) < 0.0 {
        if hi_mu > 1e12 {
            return Ok(None);
        }
        lo = (hi_mu, hi);
        hi_mu *= 2.0;
        hi = solve_with(hi_mu)?;
    }
    for _ in 0..MULTIPLIER_STEPS {
        let mid = 0.5 * (lo.0 + hi_mu);
        let y = solve_with(mid)?;
        if dot(penalties, &y) < 0.0 {
            lo = (mid, y);
        } else {
            hi_mu = mid;
            hi = y;
        }
    }
    let (p_lo, p_hi) = (dot(penalties, &lo.1), dot(penalties, &hi));
    // Shade towards the non-negative end so rounding cannot flip the sign.
    let lambda = if p_hi > p_lo { p_hi / (p_hi - p_lo) * (1.0 - 1e-9) } else { 0.0 };
    let y: Vec<f64> = lo.1.iter().zip(&hi).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    if dot(penalties, &y) < 0.0 || dot(&program.objective, &y) < target - tol {
        return Ok(None);
    }
    Ok(Some(y))
}

/// Drops agents whose marginal is below their charge and trims sets that
/// overshoot `(1+δ)x`, lowest index first, until neither rule applies.
fn cleanup(inst: &Instance, params: &Params, project: usize, estimate: f64, mut set: AgentSet) -> AgentSet {
    let f = inst.function(project);
    loop {
        let mut changed = false;
        while let Some(i) = set
            .iter()
            .find(|&i| leave_one_out(f, i, set) < agent_charge(estimate, inst.cost(i, project)))
        {
            set.remove(i);
            changed = true;
        }
        while f.eval(set) > (1.0 + params.delta) * estimate {
            let i = set.first().expect("non-empty set has positive value");
            set.remove(i);
            changed = true;
        }
        if !changed {
            return set;
        }
    }
}

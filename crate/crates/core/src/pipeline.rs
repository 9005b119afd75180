//! Contracts, revenue, and the end-to-end solver.
//!
//! An agent `i` on team `S_j` is paid `t_ij = c_ij / (f_j(S_j) − f_j(S_j∖i))`
//! of the reward when project `j` succeeds, the least share that makes
//! working worthwhile. The principal keeps `Rev_j = (1 − Σ_i t_ij) f_j(S_j)`.
//!
//! [`solve`] compares two candidates: the best one-agent-per-project
//! allocation from a weighted matching, which covers projects carried by a
//! single dominant agent, and the LP route (fractional solution, rounding,
//! scaling), which covers projects carried by many small contributors.

use serde::Serialize;

use crate::bruteforce::exact_opt;
use crate::error::{Error, Result};
use crate::instance::{AgentSet, Allocation, Instance, Params};
use crate::lp_engine::{solve_lp1, solve_lp1_with_dump, LpDiagnostics};
use crate::matching::{build_graph, max_weight_matching};
use crate::rounding::{round_with_witnesses, to_distributions};
use crate::scaling::apply_scaling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DominantMatching,
    LpPipeline,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Payment {
    pub agent: usize,
    pub project: usize,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractReport {
    pub allocation: Allocation,
    /// Positive payments only, ordered by agent.
    pub payments: Vec<Payment>,
    pub per_project_revenue: Vec<f64>,
    pub total_revenue: f64,
    pub method: Method,
    /// Set when the LP route ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpSummary>,
}

/// What the LP route produced, for diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSummary {
    pub diagnostics: LpDiagnostics,
    pub columns: usize,
    /// `Σ y · f_j(S)` over the fractional solution.
    pub fractional_reward: f64,
    pub rounded_reward: f64,
    pub matching_revenue: f64,
    pub lp_revenue: f64,
}

/// Revenue of project `j` with team `set`; `None` when some member has zero
/// marginal and cannot be incentivized.
pub fn project_revenue(inst: &Instance, project: usize, set: AgentSet) -> Option<f64> {
    if set.is_empty() {
        return Some(0.0);
    }
    let f = inst.function(project);
    let value = f.eval(set);
    let mut share = 0.0;
    for i in set.iter() {
        let marginal = value - f.eval(set.without(i));
        if marginal <= 0.0 {
            return None;
        }
        share += inst.cost(i, project) / marginal;
    }
    Some((1.0 - share) * value)
}

/// Payments and revenue of `alloc`.
pub fn revenue(inst: &Instance, alloc: &Allocation) -> Result<ContractReport> {
    revenue_as(inst, alloc, Method::BruteForce)
}

fn revenue_as(inst: &Instance, alloc: &Allocation, method: Method) -> Result<ContractReport> {
    let n = inst.n_agents();
    let m = inst.n_projects();
    if alloc.n_agents() != n {
        return Err(Error::Precondition(format!("allocation covers {} agents, instance has {n}", alloc.n_agents())));
    }
    if let Some((agent, p)) = alloc
        .assignment()
        .iter()
        .enumerate()
        .find_map(|(i, p)| p.filter(|&j| j >= m).map(|j| (i, j)))
    {
        return Err(Error::Precondition(format!("agent {agent} assigned to missing project {p}")));
    }
    let sets = alloc.sets(m);
    let mut payments = Vec::new();
    let mut per_project_revenue = vec![0.0; m];
    for (j, &s) in sets.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        let f = inst.function(j);
        let value = f.eval(s);
        let mut share = 0.0;
        for i in s.iter() {
            let marginal = value - f.eval(s.without(i));
            if marginal <= 0.0 {
                return Err(Error::ZeroMarginal { agent: i, project: j });
            }
            let t = inst.cost(i, j) / marginal;
            share += t;
            if t > 0.0 {
                payments.push(Payment {
                    agent: i,
                    project: j,
                    share: t,
                });
            }
        }
        per_project_revenue[j] = (1.0 - share) * value;
    }
    payments.sort_by_key(|p| p.agent);
    Ok(ContractReport {
        allocation: alloc.clone(),
        payments,
        total_revenue: per_project_revenue.iter().sum::<f64>() + 0.0,
        per_project_revenue,
        method,
        lp: None,
    })
}

/// The LP route on its own: fractional solution, rounding, scaling.
pub fn lp_candidate(inst: &Instance, params: &Params) -> Result<(Allocation, LpSummary)> {
    lp_candidate_impl(inst, params, None)
}

fn lp_candidate_impl(inst: &Instance, params: &Params, dump: Option<&mut String>) -> Result<(Allocation, LpSummary)> {
    let sol = match dump {
        Some(out) => {
            let (sol, text) = solve_lp1_with_dump(inst, params)?;
            out.push_str(&text);
            sol
        }
        None => solve_lp1(inst, params)?,
    };
    let dist = to_distributions(&sol, inst.n_projects())?;
    let rounded = round_with_witnesses(&dist, inst)?;
    let rounded_reward = rounded
        .allocation
        .sets(inst.n_projects())
        .iter()
        .enumerate()
        .map(|(j, &s)| inst.function(j).eval(s))
        .sum::<f64>()
        + 0.0;
    let scaled = apply_scaling(inst, params, &rounded.allocation, &rounded.witnesses)?;
    let summary = LpSummary {
        columns: sol.columns.len(),
        fractional_reward: sol.reward(inst),
        rounded_reward,
        diagnostics: sol.diagnostics,
        matching_revenue: 0.0,
        lp_revenue: 0.0,
    };
    Ok((scaled, summary))
}

/// Approximately revenue-optimal allocation and contracts.
///
/// Returns whichever of the matching and LP candidates earns more, with the
/// matching preferred on ties. A candidate with negative revenue is replaced
/// by the empty allocation.
pub fn solve(inst: &Instance, params: &Params) -> Result<ContractReport> {
    solve_impl(inst, params, None)
}

/// [`solve`] that also returns a text dump of the final restricted LP.
pub fn solve_with_lp_dump(inst: &Instance, params: &Params) -> Result<(ContractReport, String)> {
    let mut dump = String::new();
    let report = solve_impl(inst, params, Some(&mut dump))?;
    Ok((report, dump))
}

fn solve_impl(inst: &Instance, params: &Params, dump: Option<&mut String>) -> Result<ContractReport> {
    params.check(inst)?;
    let n = inst.n_agents();
    let nonnegative = |r: ContractReport| -> Result<ContractReport> {
        if r.total_revenue < 0.0 {
            revenue_as(inst, &Allocation::empty(n), r.method)
        } else {
            Ok(r)
        }
    };
    let matched = max_weight_matching(&build_graph(inst));
    let minus = nonnegative(revenue_as(inst, &matched, Method::DominantMatching)?)?;
    let (plus_alloc, mut summary) = lp_candidate_impl(inst, params, dump)?;
    let plus = nonnegative(revenue_as(inst, &plus_alloc, Method::LpPipeline)?)?;
    summary.matching_revenue = minus.total_revenue;
    summary.lp_revenue = plus.total_revenue;
    let mut best = if plus.total_revenue > minus.total_revenue { plus } else { minus };
    best.lp = Some(summary);
    Ok(best)
}

/// Exact optimum by enumeration, as a report.
pub fn solve_exact(inst: &Instance, params: &Params) -> Result<ContractReport> {
    let opt = exact_opt(inst, params)?;
    revenue_as(inst, &opt.best, Method::BruteForce)
}

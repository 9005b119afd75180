//! Exhaustive oracles for small instances.

use serde::Serialize;

use crate::capped_demand::capped_utility;
use crate::error::{Error, Result};
use crate::instance::{AgentSet, Allocation, Instance, Params, SuccessFunction};
use crate::oracles::PriceVector;
use crate::pipeline::project_revenue;

/// Largest `(m + 1)^n` that [`exact_opt`] will enumerate.
pub const MAX_ASSIGNMENTS: f64 = 1e7;

/// Largest agent count for [`exact_capped_demand`].
pub const MAX_CAPPED_AGENTS: usize = 20;

/// Optimal allocation together with its split into projects with and
/// without a dominant agent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactOpt {
    pub best: Allocation,
    pub revenue: f64,
    pub per_project_sets: Vec<AgentSet>,
    pub per_project_revenue: Vec<f64>,
    /// Project `j` has an agent `i ∈ S*_j` with `f_j({i}) > δ · f_j(S*_j)`.
    pub dominant_flags: Vec<bool>,
}

impl ExactOpt {
    /// Revenue from projects with a dominant agent.
    pub fn opt_minus(&self) -> f64 {
        self.split(true)
    }

    /// Revenue from projects without a dominant agent.
    pub fn opt_plus(&self) -> f64 {
        self.split(false)
    }

    fn split(&self, dominant: bool) -> f64 {
        self.per_project_revenue
            .iter()
            .zip(&self.dominant_flags)
            .filter(|(_, &d)| d == dominant)
            .map(|(r, _)| r)
            .sum()
    }

    /// The optimal allocation restricted to projects without a dominant agent.
    pub fn restricted_sets(&self) -> Vec<AgentSet> {
        self.per_project_sets
            .iter()
            .zip(&self.dominant_flags)
            .map(|(&s, &d)| if d { AgentSet::EMPTY } else { s })
            .collect()
    }
}

fn check_size(inst: &Instance) -> Result<()> {
    let space = (inst.n_projects() as f64 + 1.0).powi(inst.n_agents() as i32);
    if space > MAX_ASSIGNMENTS {
        return Err(Error::TooLarge(format!(
            "{} agents and {} projects give {space:.3e} assignments",
            inst.n_agents(),
            inst.n_projects()
        )));
    }
    Ok(())
}

/// Revenue-maximizing allocation by enumerating every assignment vector.
///
/// Sets containing an agent with zero marginal admit no contract and are
/// skipped. Among optimal allocations the first in lexicographic order of
/// the assignment vector (unassigned first) is returned.
pub fn exact_opt(inst: &Instance, params: &Params) -> Result<ExactOpt> {
    check_size(inst)?;
    let n = inst.n_agents();
    let m = inst.n_projects();
    let subsets = 1usize << n;
    let table: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            (0..subsets)
                .map(|bits| project_revenue(inst, j, AgentSet::from_bits(bits as u64)).unwrap_or(f64::NEG_INFINITY))
                .collect()
        })
        .collect();

    // Digit 0 means unassigned, digit d means project d − 1; agent n − 1 moves fastest.
    let mut digits = vec![0usize; n];
    let mut best_digits = digits.clone();
    let mut best = 0.0;
    let mut masks = vec![0usize; m];
    loop {
        masks.iter_mut().for_each(|b| *b = 0);
        for (i, &d) in digits.iter().enumerate() {
            if d > 0 {
                masks[d - 1] |= 1 << i;
            }
        }
        let total: f64 = (0..m).map(|j| table[j][masks[j]]).sum();
        if total > best {
            best = total;
            best_digits.clone_from(&digits);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(finish(inst, params, &best_digits, &table));
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] <= m {
                break;
            }
            digits[k] = 0;
        }
    }
}

fn finish(inst: &Instance, params: &Params, digits: &[usize], table: &[Vec<f64>]) -> ExactOpt {
    let best = Allocation::from_assignment(digits.iter().map(|&d| d.checked_sub(1)).collect());
    let sets = best.sets(inst.n_projects());
    let per_project_revenue: Vec<f64> = sets
        .iter()
        .enumerate()
        .map(|(j, s)| table[j][s.bits() as usize])
        .collect();
    let dominant_flags = sets
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let f = inst.function(j);
            let total = f.eval(s);
            s.iter().any(|i| f.singleton(i) > params.delta * total)
        })
        .collect();
    ExactOpt {
        revenue: per_project_revenue.iter().sum(),
        best,
        per_project_sets: sets,
        per_project_revenue,
        dominant_flags,
    }
}

/// Best revenue by depth-first search over agents, computing payments
/// directly; an independent cross-check for [`exact_opt`].
pub fn exact_revenue_recursive(inst: &Instance) -> Result<f64> {
    check_size(inst)?;
    fn rev(inst: &Instance, sets: &[AgentSet]) -> f64 {
        let mut total = 0.0;
        for (j, &s) in sets.iter().enumerate() {
            if s.is_empty() {
                continue;
            }
            let f = inst.function(j);
            let value = f.eval(s);
            let mut share = 0.0;
            for i in s.iter() {
                let gain = value - f.eval(s.without(i));
                if gain <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                share += inst.cost(i, j) / gain;
            }
            total += (1.0 - share) * value;
        }
        total
    }
    fn go(inst: &Instance, agent: usize, sets: &mut Vec<AgentSet>) -> f64 {
        if agent == inst.n_agents() {
            return rev(inst, sets);
        }
        let mut best = go(inst, agent + 1, sets);
        for j in 0..sets.len() {
            sets[j].insert(agent);
            best = best.max(go(inst, agent + 1, sets));
            sets[j].remove(agent);
        }
        best
    }
    let mut sets = vec![AgentSet::EMPTY; inst.n_projects()];
    Ok(go(inst, 0, &mut sets).max(0.0))
}

/// Exact maximizer of `min{f(S), x} − p(S)` over all subsets of the
/// finite-priced agents; ties keep the first set in binary order.
pub fn exact_capped_demand(f: &SuccessFunction, cap: f64, prices: &PriceVector) -> Result<(AgentSet, f64)> {
    let n = f.arity();
    if n > MAX_CAPPED_AGENTS {
        return Err(Error::TooLarge(format!("{n} agents exceed {MAX_CAPPED_AGENTS}")));
    }
    if prices.len() != n {
        return Err(Error::Precondition(format!("price vector has {} entries for {n} agents", prices.len())));
    }
    let ground = prices.finite_agents();
    let mut best = (AgentSet::EMPTY, 0.0);
    for s in ground.subsets() {
        let u = capped_utility(f, cap, prices, s);
        if u > best.1 {
            best = (s, u);
        }
    }
    Ok(best)
}

//! Approximate demand for a capped function `S ↦ min{f(S), x}`.
//!
//! Exact capped demand is NP-hard even for additive `f`. Two approximations
//! are provided:
//!
//! * [`capped_demand`] uses exact demand queries of `f` (additive or XOS).
//!   It binary-searches a price scaling until the demanded value brackets the
//!   cap, then splits the over-cap set into blocks of value close to `x` and
//!   returns the best candidate. Output `S̄` satisfies
//!   `min{f(S̄),x} − p(S̄) ≥ max_S (min{f(S),x} − p(S)) / (1 + 1/(1−δ)) − δx`
//!   whenever every finite-priced singleton has value at most `δx`.
//! * [`capped_demand_submodular`] uses value queries only (coverage,
//!   budget-additive, additive) and runs distorted greedy on the capped
//!   function, which is monotone submodular.

use crate::error::{Error, Result};
use crate::instance::{AgentSet, SuccessFunction};
use crate::oracles::{demand, PriceVector};

/// Preference margin for the earlier candidate in utility comparisons.
const TIE_MARGIN: f64 = 1e-12;

/// Binary search stops below this width even if `δ` is smaller.
const MIN_GAMMA_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct CappedQuery<'a> {
    pub f: &'a SuccessFunction,
    pub cap: f64,
    pub delta: f64,
    pub prices: &'a PriceVector,
}

/// Bracketing state at the end of the price-scaling search:
/// `f(low_set) ≤ x < f(high_set)` and `gamma_low < gamma_high`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySearchState {
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub low_set: AgentSet,
    pub high_set: AgentSet,
}

/// Everything the capped-demand routine computed on its way to the answer.
#[derive(Clone, Debug, PartialEq)]
pub struct CappedDemandTrace {
    pub result: AgentSet,
    /// `None` when the uncapped demand already fits under the cap.
    pub search: Option<BinarySearchState>,
    /// Blocks the over-cap set was split into.
    pub blocks: Vec<AgentSet>,
}

fn utility(f: &SuccessFunction, prices: &PriceVector, set: AgentSet) -> f64 {
    f.eval(set) - prices.total(set)
}

/// `min{f(S), x} − p(S)`.
pub fn capped_utility(f: &SuccessFunction, cap: f64, prices: &PriceVector, set: AgentSet) -> f64 {
    f.eval(set).min(cap) - prices.total(set)
}

fn check_query(q: &CappedQuery<'_>) -> Result<()> {
    if !(q.cap > 0.0) || !q.cap.is_finite() {
        return Err(Error::Precondition(format!("cap must be positive, got {}", q.cap)));
    }
    if !(q.delta > 0.0 && q.delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0,1), got {}", q.delta)));
    }
    if q.prices.len() != q.f.arity() {
        return Err(Error::Precondition(format!(
            "price vector has {} entries for {} agents",
            q.prices.len(),
            q.f.arity()
        )));
    }
    for i in q.prices.finite_agents().iter() {
        let v = q.f.singleton(i);
        if v > q.delta * q.cap {
            return Err(Error::Precondition(format!(
                "agent {i} has singleton value {v} above delta * cap = {}",
                q.delta * q.cap
            )));
        }
    }
    Ok(())
}

/// Approximate capped demand via exact demand queries; see the module docs.
pub fn capped_demand(q: &CappedQuery<'_>) -> Result<AgentSet> {
    capped_demand_trace(q).map(|t| t.result)
}

pub fn capped_demand_trace(q: &CappedQuery<'_>) -> Result<CappedDemandTrace> {
    check_query(q)?;
    let f = q.f;
    let x = q.cap;
    let delta = q.delta;
    if !f.class().has_demand_oracle() {
        return Err(Error::NoDemandOracle { class: f.class().name() });
    }

    // Infinite prices already keep agents out of every demand query.
    let mut high_set = demand(f, q.prices)?;
    if f.eval(high_set) <= x {
        return Ok(CappedDemandTrace {
            result: high_set,
            search: None,
            blocks: Vec::new(),
        });
    }

    let mut low_set = AgentSet::EMPTY;
    let mut gamma_low = 0.0;
    let mut gamma_high = 1.0;
    while gamma_high - gamma_low >= delta && gamma_high - gamma_low >= MIN_GAMMA_WIDTH {
        let gamma = 0.5 * (gamma_low + gamma_high);
        let s = demand(f, &q.prices.scaled(gamma))?;
        if f.eval(s) > x {
            high_set = s;
            gamma_high = gamma;
        } else {
            low_set = s;
            gamma_low = gamma;
        }
    }

    let blocks = partition_blocks(f, high_set, x, delta);
    let mut best_block: Option<(AgentSet, f64)> = None;
    for &b in &blocks {
        let u = utility(f, q.prices, b);
        match best_block {
            Some((_, bu)) if u <= bu + TIE_MARGIN => {}
            _ => best_block = Some((b, u)),
        }
    }
    let mut result = low_set;
    if let Some((b, bu)) = best_block {
        if bu > utility(f, q.prices, low_set) + TIE_MARGIN {
            result = b;
        }
    }
    Ok(CappedDemandTrace {
        result,
        search: Some(BinarySearchState {
            gamma_low,
            gamma_high,
            low_set,
            high_set,
        }),
        blocks,
    })
}

/// Greedy split of `set` (ascending agent order) into disjoint blocks, each
/// closed once its value reaches `(1−δ)x`; stops as soon as the block values
/// add up to `f(set)`. Empty trailing blocks are dropped.
pub fn partition_blocks(f: &SuccessFunction, set: AgentSet, cap: f64, delta: f64) -> Vec<AgentSet> {
    let target = f.eval(set);
    let mut closed: Vec<AgentSet> = Vec::new();
    let mut closed_value = 0.0;
    let mut current = AgentSet::EMPTY;
    for i in set.iter() {
        current.insert(i);
        let cur_value = f.eval(current);
        if closed_value + cur_value >= target {
            break;
        }
        if cur_value >= (1.0 - delta) * cap {
            closed.push(current);
            closed_value += cur_value;
            current = AgentSet::EMPTY;
        }
    }
    if !current.is_empty() {
        closed.push(current);
    }
    closed
}

/// Value-query-only capped demand for monotone submodular `f`.
///
/// Distorted greedy over `g(S) = min{f(S), x}` with linear cost `p`: in
/// iteration `k = 1..=r` (with `r` finite-priced agents) add the agent
/// maximizing `(1 − 1/r)^(r−k) · g(i | S) − p_i` if that quantity is positive.
/// Guarantees `g(S) − p(S) ≥ (1 − 1/e) g(T) − p(T)` for every `T`.
pub fn capped_demand_submodular(f: &SuccessFunction, cap: f64, prices: &PriceVector) -> Result<AgentSet> {
    if !f.class().is_submodular() {
        return Err(Error::NotSubmodular { class: f.class().name() });
    }
    if !(cap > 0.0) {
        return Err(Error::Precondition(format!("cap must be positive, got {cap}")));
    }
    if prices.len() != f.arity() {
        return Err(Error::Precondition(format!(
            "price vector has {} entries for {} agents",
            prices.len(),
            f.arity()
        )));
    }
    let ground = prices.finite_agents();
    let r = ground.len();
    let g = |s: AgentSet| f.eval(s).min(cap);
    let mut chosen = AgentSet::EMPTY;
    let mut g_chosen = 0.0;
    for k in 1..=r {
        let distortion = (1.0 - 1.0 / r as f64).powi((r - k) as i32);
        let mut best: Option<(usize, f64, f64)> = None;
        for i in ground.difference(chosen).iter() {
            let gi = g(chosen.with(i));
            let score = distortion * (gi - g_chosen) - prices.get(i);
            if best.is_none_or(|(_, b, _)| score > b) {
                best = Some((i, score, gi));
            }
        }
        if let Some((i, score, gi)) = best {
            if score > 0.0 {
                chosen.insert(i);
                g_chosen = gi;
            }
        }
    }
    Ok(chosen)
}

//! Value, marginal and exact demand queries.

use crate::error::{Error, Result};
use crate::instance::{AgentSet, SuccessFunction};

/// Per-agent prices. `+inf` means the agent is never demanded.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    /// Fails on NaN or negative entries.
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| p.is_nan() || **p < 0.0) {
            return Err(Error::Precondition(format!("price {p} for agent {i} must be non-negative")));
        }
        Ok(PriceVector(prices))
    }

    pub fn zeros(n: usize) -> Self {
        PriceVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Total price of a set; `+inf` if it contains a never-demanded agent.
    pub fn total(&self, set: AgentSet) -> f64 {
        set.iter().map(|i| self.0[i]).sum()
    }

    /// Agents with a finite price.
    pub fn finite_agents(&self) -> AgentSet {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_finite())
            .map(|(i, _)| i)
            .collect()
    }

    /// Prices divided by `gamma`; at `gamma = 0` every positive price becomes `+inf`.
    pub fn scaled(&self, gamma: f64) -> PriceVector {
        PriceVector(
            self.0
                .iter()
                .map(|&p| {
                    if p == 0.0 {
                        0.0
                    } else if gamma <= 0.0 {
                        f64::INFINITY
                    } else {
                        p / gamma
                    }
                })
                .collect(),
        )
    }
}

fn check_range(f: &SuccessFunction, set: AgentSet) -> Result<()> {
    let n = f.arity();
    if set.span() > n {
        return Err(Error::AgentOutOfRange {
            agent: set.span() - 1,
            n_agents: n,
        });
    }
    Ok(())
}

/// `f(S)`.
pub fn value(f: &SuccessFunction, set: AgentSet) -> Result<f64> {
    check_range(f, set)?;
    Ok(f.eval(set))
}

/// `f(i | S) = f(S ∪ {i}) − f(S)`, for `i ∉ S`.
pub fn marginal(f: &SuccessFunction, agent: usize, set: AgentSet) -> Result<f64> {
    check_range(f, set.with(agent))?;
    if set.contains(agent) {
        return Err(Error::AgentInSet { agent });
    }
    Ok(f.eval(set.with(agent)) - f.eval(set))
}

/// `f(i | S \ {i})`, the marginal of a member with respect to the rest of its set.
pub(crate) fn leave_one_out(f: &SuccessFunction, agent: usize, set: AgentSet) -> f64 {
    f.eval(set) - f.eval(set.without(agent))
}

/// Additive demand: agents with strictly positive surplus.
fn additive_demand(values: &[f64], prices: &PriceVector) -> (AgentSet, f64) {
    let mut set = AgentSet::EMPTY;
    let mut utility = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let surplus = v - prices.get(i);
        if surplus > 0.0 {
            set.insert(i);
            utility += surplus;
        }
    }
    (set, utility)
}

/// A set maximizing `f(S) − p(S)`, with its utility.
///
/// Ties: agents with zero surplus are left out, and among XOS clauses with
/// equal best utility the lowest-index clause wins.
pub fn demand_with_utility(f: &SuccessFunction, prices: &PriceVector) -> Result<(AgentSet, f64)> {
    if prices.len() != f.arity() {
        return Err(Error::Precondition(format!(
            "price vector has {} entries for {} agents",
            prices.len(),
            f.arity()
        )));
    }
    match f {
        SuccessFunction::Additive { values } => Ok(additive_demand(values, prices)),
        SuccessFunction::Xos { clauses } => {
            let mut best = (AgentSet::EMPTY, 0.0);
            for (k, clause) in clauses.iter().enumerate() {
                let cand = additive_demand(clause, prices);
                if k == 0 || cand.1 > best.1 {
                    best = cand;
                }
            }
            // The chosen clause's sum lower-bounds f on its set; report the true utility.
            let (set, _) = best;
            Ok((set, f.eval(set) - prices.total(set)))
        }
        other => Err(Error::NoDemandOracle {
            class: other.class().name(),
        }),
    }
}

/// A set maximizing `f(S) − p(S)`; see [`demand_with_utility`].
pub fn demand(f: &SuccessFunction, prices: &PriceVector) -> Result<AgentSet> {
    demand_with_utility(f, prices).map(|(s, _)| s)
}

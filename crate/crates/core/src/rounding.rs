//! From a fractional column solution to an integral allocation.
//!
//! Each project's columns are read as a distribution over teams (leftover
//! probability on the empty team). The deterministic rounding repeatedly
//! commits one project to one support set whenever doing so keeps at least
//! half of the remaining expected value, then removes the project and its
//! agents from all other distributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{AgentSet, Allocation, Instance};
use crate::lp_engine::FractionalSolution;

/// Slack in the acceptance test, absorbing floating-point drift.
const ACCEPT_TOL: f64 = 1e-9;

/// Column that produced a support set: the original team and its estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub set: AgentSet,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    pub set: AgentSet,
    pub probability: f64,
    pub witness: Witness,
}

/// Per-project distributions over non-empty teams.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportDistribution {
    pub supports: Vec<Vec<SupportEntry>>,
}

impl SupportDistribution {
    pub fn n_projects(&self) -> usize {
        self.supports.len()
    }

    /// Probability that `agent` is drawn by some project.
    pub fn agent_mass(&self, agent: usize) -> f64 {
        self.supports
            .iter()
            .flatten()
            .filter(|e| e.set.contains(agent))
            .map(|e| e.probability)
            .sum()
    }

    pub fn project_mass(&self, project: usize) -> f64 {
        self.supports[project].iter().map(|e| e.probability).sum()
    }
}

/// Sums column weights over estimates for each `(project, team)`; the first
/// contributing column becomes the witness.
pub fn to_distributions(sol: &FractionalSolution, n_projects: usize) -> Result<SupportDistribution> {
    let mut supports: Vec<Vec<SupportEntry>> = vec![Vec::new(); n_projects];
    for c in &sol.columns {
        if c.project >= n_projects {
            return Err(Error::Precondition(format!("column for project {} of {n_projects}", c.project)));
        }
        if !(c.weight >= 0.0) {
            return Err(Error::Precondition(format!("negative column weight {}", c.weight)));
        }
        if c.set.is_empty() || c.weight == 0.0 {
            continue;
        }
        let support = &mut supports[c.project];
        match support.iter_mut().find(|e| e.set == c.set) {
            Some(e) => e.probability += c.weight,
            None => support.push(SupportEntry {
                set: c.set,
                probability: c.weight,
                witness: Witness {
                    set: c.set,
                    estimate: c.estimate,
                },
            }),
        }
    }
    let dist = SupportDistribution { supports };
    for j in 0..n_projects {
        let mass = dist.project_mass(j);
        if mass > 1.0 + 1e-9 {
            return Err(Error::Precondition(format!("project {j} has total weight {mass}")));
        }
    }
    let n_agents = sol.columns.iter().map(|c| c.set.span()).max().unwrap_or(0);
    for i in 0..n_agents {
        let mass = dist.agent_mass(i);
        if mass > 1.0 + 1e-9 {
            return Err(Error::Precondition(format!("agent {i} has total weight {mass}")));
        }
    }
    Ok(dist)
}

/// `Σ_{j∈M'} Σ_t q_{j,t} f_j(S̃_{j,t} ∩ N')`.
pub fn val(dist: &SupportDistribution, inst: &Instance, projects: &[usize], agents: AgentSet) -> f64 {
    projects
        .iter()
        .map(|&j| {
            let f = inst.function(j);
            dist.supports[j]
                .iter()
                .map(|e| e.probability * f.eval(e.set.intersection(agents)))
                .sum::<f64>()
        })
        .sum()
}

/// An allocation plus, for every non-empty team, the witness column it
/// descends from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rounded {
    pub allocation: Allocation,
    pub witnesses: Vec<Option<Witness>>,
}

/// Deterministic rounding; see [`round_with_witnesses`].
pub fn round(dist: &SupportDistribution, inst: &Instance) -> Result<Allocation> {
    round_with_witnesses(dist, inst).map(|r| r.allocation)
}

/// Deterministic rounding.
///
/// Projects and support sets are scanned in ascending order, with the empty
/// team last for each project. The first pair with
/// `f_j(S̃) + VAL(M∖j, N∖S̃)/2 ≥ VAL(M, N)/2` is committed. The result
/// satisfies `Σ_j f_j(T_j) ≥ VAL(M, N)/2`, and each `T_j` is a subset of a
/// support set of project `j`.
pub fn round_with_witnesses(dist: &SupportDistribution, inst: &Instance) -> Result<Rounded> {
    let m = inst.n_projects();
    if dist.n_projects() != m {
        return Err(Error::Precondition(format!(
            "distribution covers {} projects, instance has {m}",
            dist.n_projects()
        )));
    }
    let mut current = dist.clone();
    let mut active: Vec<usize> = (0..m).collect();
    let mut agents = inst.all_agents();
    let mut allocation = Allocation::empty(inst.n_agents());
    let mut witnesses = vec![None; m];

    while !active.is_empty() {
        let total = val(&current, inst, &active, agents);
        let mut choice: Option<(usize, Option<usize>)> = None;
        'scan: for (pos, &j) in active.iter().enumerate() {
            let f = inst.function(j);
            let rest: Vec<usize> = active.iter().copied().filter(|&k| k != j).collect();
            let candidates = (0..current.supports[j].len()).map(Some).chain(std::iter::once(None));
            for t in candidates {
                let set = t.map_or(AgentSet::EMPTY, |t| current.supports[j][t].set);
                let lhs = f.eval(set) + 0.5 * val(&current, inst, &rest, agents.difference(set));
                if lhs >= 0.5 * total - ACCEPT_TOL {
                    choice = Some((pos, t));
                    break 'scan;
                }
            }
        }
        let Some((pos, t)) = choice else {
            return Err(Error::NoQualifyingPair);
        };
        let j = active.remove(pos);
        if let Some(t) = t {
            let entry = current.supports[j][t].clone();
            for i in entry.set.iter() {
                allocation.assign(i, Some(j));
            }
            witnesses[j] = Some(entry.witness);
            agents = agents.difference(entry.set);
            for &k in &active {
                restrict(&mut current.supports[k], entry.set);
            }
        }
        current.supports[j].clear();
    }
    Ok(Rounded { allocation, witnesses })
}

/// Removes `taken` from every support set, merging sets that coincide
/// (the earlier entry keeps its witness) and dropping emptied ones.
fn restrict(support: &mut Vec<SupportEntry>, taken: AgentSet) {
    let mut out: Vec<SupportEntry> = Vec::with_capacity(support.len());
    for e in support.drain(..) {
        let set = e.set.difference(taken);
        if set.is_empty() {
            continue;
        }
        match out.iter_mut().find(|o| o.set == set) {
            Some(o) => o.probability += e.probability,
            None => out.push(SupportEntry { set, ..e }),
        }
    }
    *support = out;
}

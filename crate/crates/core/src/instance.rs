//! Problem data: agents, projects, costs and per-project success functions.
//!
//! Instances are immutable after construction. The on-disk representation is
//! a single JSON document (schema version 1):
//!
//! ```json
//! {"version": 1, "agents": 2, "projects": 1,
//!  "costs": [[0.1], [0.0]],
//!  "functions": [{"type": "xos", "clauses": [[0.5, 0.0], [0.2, 0.3]]}]}
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current instance schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Agent sets are bitmasks, so instances are limited to this many agents.
pub const MAX_AGENTS: usize = 64;

/// Slack allowed above 1 for a function's maximum value.
const PROBABILITY_SLACK: f64 = 1e-9;

/// A set of agents, stored as a bitmask over agent indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentSet(u64);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn from_bits(bits: u64) -> Self {
        AgentSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All agents `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        AgentSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        AgentSet(self.0 | (1u64 << i))
    }

    #[must_use]
    pub fn without(self, i: usize) -> Self {
        AgentSet(self.0 & !(1u64 << i))
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    #[must_use]
    pub fn union(self, other: AgentSet) -> Self {
        AgentSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: AgentSet) -> Self {
        AgentSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: AgentSet) -> Self {
        AgentSet(self.0 & !other.0)
    }

    /// Lowest agent index in the set.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Agents in ascending index order.
    pub fn iter(self) -> AgentIter {
        AgentIter(self.0)
    }

    /// Highest index + 1, i.e. the smallest `n` with `self ⊆ full(n)`.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Every subset of `self`, starting from the empty set.
    pub fn subsets(self) -> impl Iterator<Item = AgentSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(AgentSet(cur))
        })
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for AgentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = AgentSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl Serialize for AgentSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AgentSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(deserializer)?;
        if let Some(&bad) = v.iter().find(|&&i| i >= MAX_AGENTS) {
            return Err(serde::de::Error::custom(format!(
                "agent index {bad} exceeds the {MAX_AGENTS}-agent limit"
            )));
        }
        Ok(v.into_iter().collect())
    }
}

pub struct AgentIter(u64);

impl Iterator for AgentIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for AgentIter {}

/// Representation classes for project success functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    Additive,
    BudgetAdditive,
    Coverage,
    Xos,
}

impl FunctionClass {
    pub const ALL: [FunctionClass; 4] = [
        FunctionClass::Additive,
        FunctionClass::BudgetAdditive,
        FunctionClass::Coverage,
        FunctionClass::Xos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionClass::Additive => "additive",
            FunctionClass::BudgetAdditive => "budget_additive",
            FunctionClass::Coverage => "coverage",
            FunctionClass::Xos => "xos",
        }
    }

    /// Whether an exact demand oracle is available for this class.
    pub fn has_demand_oracle(self) -> bool {
        matches!(self, FunctionClass::Additive | FunctionClass::Xos)
    }

    /// Whether every function of this class is submodular.
    pub fn is_submodular(self) -> bool {
        !matches!(self, FunctionClass::Xos)
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FunctionClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "additive" => Ok(FunctionClass::Additive),
            "budget_additive" | "budget" => Ok(FunctionClass::BudgetAdditive),
            "coverage" => Ok(FunctionClass::Coverage),
            "xos" => Ok(FunctionClass::Xos),
            other => Err(format!("unknown function class '{other}'")),
        }
    }
}

/// A monotone, normalized set function given by an explicit representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessFunction {
    /// `f(S) = Σ_{i∈S} v_i`.
    Additive { values: Vec<f64> },
    /// `f(S) = min(Σ_{i∈S} v_i, budget)`.
    BudgetAdditive { values: Vec<f64>, budget: f64 },
    /// Weighted coverage: `f(S)` is the total weight of elements covered by
    /// some agent in `S`. `covers[i]` lists the element indices of agent `i`.
    Coverage { weights: Vec<f64>, covers: Vec<Vec<usize>> },
    /// Maximum over additive clauses.
    Xos { clauses: Vec<Vec<f64>> },
}

impl SuccessFunction {
    pub fn class(&self) -> FunctionClass {
        match self {
            SuccessFunction::Additive { .. } => FunctionClass::Additive,
            SuccessFunction::BudgetAdditive { .. } => FunctionClass::BudgetAdditive,
            SuccessFunction::Coverage { .. } => FunctionClass::Coverage,
            SuccessFunction::Xos { .. } => FunctionClass::Xos,
        }
    }

    /// Number of agents the representation is defined over.
    pub fn arity(&self) -> usize {
        match self {
            SuccessFunction::Additive { values } | SuccessFunction::BudgetAdditive { values, .. } => values.len(),
            SuccessFunction::Coverage { covers, .. } => covers.len(),
            SuccessFunction::Xos { clauses } => clauses.first().map_or(0, Vec::len),
        }
    }

    /// Unchecked value query; agents outside the representation contribute nothing.
    pub fn eval(&self, set: AgentSet) -> f64 {
        match self {
            SuccessFunction::Additive { values } => additive_sum(values, set),
            SuccessFunction::BudgetAdditive { values, budget } => additive_sum(values, set).min(*budget),
            SuccessFunction::Coverage { weights, covers } => {
                let mut covered = vec![false; weights.len()];
                for i in set.iter() {
                    if let Some(elements) = covers.get(i) {
                        for &e in elements {
                            if let Some(slot) = covered.get_mut(e) {
                                *slot = true;
                            }
                        }
                    }
                }
                weights
                    .iter()
                    .zip(&covered)
                    .filter(|(_, &c)| c)
                    .map(|(w, _)| *w)
                    .sum()
            }
            SuccessFunction::Xos { clauses } => clauses
                .iter()
                .map(|c| additive_sum(c, set))
                .fold(0.0, f64::max),
        }
    }

    pub fn singleton(&self, i: usize) -> f64 {
        self.eval(AgentSet::singleton(i))
    }

    /// Analytic maximum over all subsets (the value of the full set).
    pub fn max_value(&self) -> f64 {
        match self {
            SuccessFunction::Additive { values } => values.iter().sum(),
            SuccessFunction::BudgetAdditive { values, budget } => values.iter().sum::<f64>().min(*budget),
            SuccessFunction::Coverage { weights, .. } => weights.iter().sum(),
            SuccessFunction::Xos { clauses } => clauses
                .iter()
                .map(|c| c.iter().sum::<f64>())
                .fold(0.0, f64::max),
        }
    }
}

fn additive_sum(values: &[f64], set: AgentSet) -> f64 {
    set.iter().filter_map(|i| values.get(i)).sum()
}

/// A multi-project contract design instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n_agents: usize,
    n_projects: usize,
    /// `costs[i][j]` is agent `i`'s cost for working on project `j`.
    costs: Vec<Vec<f64>>,
    functions: Vec<SuccessFunction>,
}

impl Instance {
    /// Builds an instance, rejecting it if any invariant fails.
    pub fn new(costs: Vec<Vec<f64>>, functions: Vec<SuccessFunction>) -> Result<Self> {
        let inst = Instance {
            n_agents: costs.len(),
            n_projects: functions.len(),
            costs,
            functions,
        };
        let violations = validate(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Builds an instance without validation. Use [`validate`] afterwards.
    pub fn new_unchecked(n_agents: usize, costs: Vec<Vec<f64>>, functions: Vec<SuccessFunction>) -> Self {
        Instance {
            n_agents,
            n_projects: functions.len(),
            costs,
            functions,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_projects(&self) -> usize {
        self.n_projects
    }

    pub fn cost(&self, agent: usize, project: usize) -> f64 {
        self.costs[agent][project]
    }

    pub fn costs(&self) -> &[Vec<f64>] {
        &self.costs
    }

    pub fn function(&self, project: usize) -> &SuccessFunction {
        &self.functions[project]
    }

    pub fn functions(&self) -> &[SuccessFunction] {
        &self.functions
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::full(self.n_agents)
    }

    /// `f_j({i})`.
    pub fn singleton(&self, project: usize, agent: usize) -> f64 {
        self.functions[project].singleton(agent)
    }

    /// Smallest strictly positive singleton value over all (agent, project).
    pub fn min_positive_singleton(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for j in 0..self.n_projects {
            for i in 0..self.n_agents {
                let v = self.singleton(j, i);
                if v > 0.0 {
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        best
    }

    pub fn max_singleton(&self) -> f64 {
        (0..self.n_projects)
            .flat_map(|j| (0..self.n_agents).map(move |i| (j, i)))
            .map(|(j, i)| self.singleton(j, i))
            .fold(0.0, f64::max)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: raw.version,
                expected: SCHEMA_VERSION,
            });
        }
        let inst = Instance::new_unchecked(raw.agents, raw.costs, raw.functions);
        let mut violations = Vec::new();
        if inst.n_projects != raw.projects {
            violations.push(Violation::new(
                "projects",
                format!("declares {} projects but lists {} functions", raw.projects, inst.n_projects),
            ));
        }
        violations.extend(validate(&inst));
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Pretty-printed JSON; floats are written with full round-trip precision.
    pub fn to_json(&self) -> String {
        let raw = InstanceFileRef {
            version: SCHEMA_VERSION,
            agents: self.n_agents,
            projects: self.n_projects,
            costs: &self.costs,
            functions: &self.functions,
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("instance serializes");
        s.push('\n');
        s
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    agents: usize,
    projects: usize,
    costs: Vec<Vec<f64>>,
    functions: Vec<SuccessFunction>,
}

#[derive(Serialize)]
struct InstanceFileRef<'a> {
    version: u32,
    agents: usize,
    projects: usize,
    costs: &'a [Vec<f64>],
    functions: &'a [SuccessFunction],
}

/// One broken instance invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every instance invariant; an empty result means the instance is valid.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.n_agents;
    if n == 0 {
        out.push(Violation::new("agents", "at least one agent"));
    }
    if n > MAX_AGENTS {
        out.push(Violation::new("agents", format!("at most {MAX_AGENTS} agents")));
    }
    if inst.n_projects == 0 {
        out.push(Violation::new("projects", "at least one project"));
    }
    if inst.costs.len() != n {
        out.push(Violation::new(
            "costs",
            format!("expected {n} rows, found {}", inst.costs.len()),
        ));
    }
    for (i, row) in inst.costs.iter().enumerate() {
        if row.len() != inst.n_projects {
            out.push(Violation::new(
                format!("costs[{i}]"),
                format!("expected {} entries, found {}", inst.n_projects, row.len()),
            ));
        }
        for (j, &c) in row.iter().enumerate() {
            if !c.is_finite() {
                out.push(Violation::new(format!("costs[{i}][{j}]"), "cost must be finite"));
            } else if c < 0.0 {
                out.push(Violation::new(format!("costs[{i}][{j}]"), "negative cost"));
            }
        }
    }
    for (j, f) in inst.functions.iter().enumerate() {
        validate_function(&format!("functions[{j}]"), f, n, &mut out);
    }
    out
}

fn check_entries(field: &str, what: &str, xs: &[f64], out: &mut Vec<Violation>) {
    let prefix = if what.is_empty() {
        field.to_string()
    } else {
        format!("{field}.{what}")
    };
    for (k, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            out.push(Violation::new(format!("{prefix}[{k}]"), "value must be finite"));
        } else if x < 0.0 {
            out.push(Violation::new(format!("{prefix}[{k}]"), "negative value"));
        }
    }
}

fn validate_function(field: &str, f: &SuccessFunction, n: usize, out: &mut Vec<Violation>) {
    let before = out.len();
    match f {
        SuccessFunction::Additive { values } => {
            if values.len() != n {
                out.push(Violation::new(field, format!("expected {n} values, found {}", values.len())));
            }
            check_entries(field, "values", values, out);
        }
        SuccessFunction::BudgetAdditive { values, budget } => {
            if values.len() != n {
                out.push(Violation::new(field, format!("expected {n} values, found {}", values.len())));
            }
            check_entries(field, "values", values, out);
            if !budget.is_finite() || *budget < 0.0 {
                out.push(Violation::new(format!("{field}.budget"), "budget must be finite and non-negative"));
            }
        }
        SuccessFunction::Coverage { weights, covers } => {
            check_entries(field, "weights", weights, out);
            if covers.len() != n {
                out.push(Violation::new(field, format!("expected {n} cover lists, found {}", covers.len())));
            }
            for (i, elems) in covers.iter().enumerate() {
                if let Some(&e) = elems.iter().find(|&&e| e >= weights.len()) {
                    out.push(Violation::new(
                        format!("{field}.covers[{i}]"),
                        format!("element {e} outside universe of {}", weights.len()),
                    ));
                }
            }
        }
        SuccessFunction::Xos { clauses } => {
            if clauses.is_empty() {
                out.push(Violation::new(field, "XOS function needs at least one clause"));
            }
            for (k, c) in clauses.iter().enumerate() {
                if c.len() != n {
                    out.push(Violation::new(
                        format!("{field}.clauses[{k}]"),
                        format!("expected {n} entries, found {}", c.len()),
                    ));
                }
                check_entries(&format!("{field}.clauses[{k}]"), "", c, out);
            }
        }
    }
    if out.len() == before && f.max_value() > 1.0 + PROBABILITY_SLACK {
        out.push(Violation::new(field, "function exceeds probability range"));
    }
}

/// Per-agent project assignment; agents appear in at most one project by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    assignment: Vec<Option<usize>>,
}

impl Allocation {
    pub fn empty(n_agents: usize) -> Self {
        Allocation {
            assignment: vec![None; n_agents],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<usize>>) -> Self {
        Allocation { assignment }
    }

    /// Builds an allocation from per-project sets, failing if two sets overlap.
    pub fn from_sets(n_agents: usize, sets: &[AgentSet]) -> Result<Self> {
        let mut alloc = Allocation::empty(n_agents);
        for (j, s) in sets.iter().enumerate() {
            for i in s.iter() {
                if i >= n_agents {
                    return Err(Error::AgentOutOfRange { agent: i, n_agents });
                }
                if let Some(prev) = alloc.assignment[i] {
                    return Err(Error::Overlap { agent: i, first: prev, second: j });
                }
                alloc.assignment[i] = Some(j);
            }
        }
        Ok(alloc)
    }

    pub fn n_agents(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn project_of(&self, agent: usize) -> Option<usize> {
        self.assignment[agent]
    }

    pub fn assign(&mut self, agent: usize, project: Option<usize>) {
        self.assignment[agent] = project;
    }

    pub fn set_of(&self, project: usize) -> AgentSet {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Some(project))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sets(&self, n_projects: usize) -> Vec<AgentSet> {
        let mut out = vec![AgentSet::EMPTY; n_projects];
        for (i, p) in self.assignment.iter().enumerate() {
            if let Some(j) = *p {
                out[j].insert(i);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.iter().all(Option::is_none)
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().filter(|p| p.is_some()).count()
    }
}

/// Algorithm parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Dominance threshold; also the capped-demand accuracy parameter.
    pub delta: f64,
    /// Width at which the dual-bound binary search stops. `None` selects
    /// `delta/2 · min positive singleton` for the instance at hand.
    pub epsilon: Option<f64>,
    /// Feasibility tolerance of the simplex and separation checks.
    pub lp_tol: f64,
    /// Marginal-preservation parameter of the scaling step.
    pub scale_delta: f64,
    /// Scaling target as a fraction of the rounded set's value.
    pub psi_factor: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            delta: 1.0 / 129.0,
            epsilon: None,
            lp_tol: 1e-9,
            scale_delta: 0.5,
            psi_factor: 1.0 / 128.0,
        }
    }
}

impl Params {
    /// `1 + 1/(1-δ)`, the capped-demand approximation factor.
    pub fn demand_factor(&self) -> f64 {
        1.0 + 1.0 / (1.0 - self.delta)
    }

    /// Resolves the binary-search width for `inst`.
    pub fn epsilon_for(&self, inst: &Instance) -> f64 {
        match self.epsilon {
            Some(e) => e,
            None => inst
                .min_positive_singleton()
                .map_or(1e-9, |m| 0.5 * self.delta * m),
        }
    }

    pub fn check(&self, inst: &Instance) -> Result<()> {
        let bad = |msg: &str| Err(Error::Params(msg.to_string()));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.scale_delta > 0.0 && self.scale_delta <= 1.0) {
            return bad("scale_delta must lie in (0, 1]");
        }
        if !(self.psi_factor > 0.0 && self.psi_factor < 1.0) {
            return bad("psi_factor must lie in (0, 1)");
        }
        if !(self.lp_tol >= 0.0 && self.lp_tol.is_finite()) {
            return bad("lp_tol must be a non-negative finite number");
        }
        let eps = self.epsilon_for(inst);
        if !(eps > 0.0 && eps.is_finite()) {
            return bad("epsilon must be positive");
        }
        if let Some(m) = inst.min_positive_singleton() {
            if eps >= self.delta * m {
                return bad("epsilon must be strictly below delta times the smallest positive singleton value");
            }
        }
        Ok(())
    }
}

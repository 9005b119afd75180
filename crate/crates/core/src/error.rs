use thiserror::Error;

use crate::instance::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("agent {agent} out of range for {n_agents} agents")]
    AgentOutOfRange { agent: usize, n_agents: usize },

    #[error("agent {agent} assigned to both project {first} and project {second}")]
    Overlap { agent: usize, first: usize, second: usize },

    #[error("agent {agent} is already in the set")]
    AgentInSet { agent: usize },

    #[error("{class} functions have no exact demand oracle")]
    NoDemandOracle { class: &'static str },

    #[error("{class} functions are not submodular")]
    NotSubmodular { class: &'static str },

    #[error("instance mixes XOS functions with value-query-only classes")]
    MixedOracleClasses,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("agent {agent} has zero marginal contribution to project {project}")]
    ZeroMarginal { agent: usize, project: usize },

    #[error("simplex failed: {reason} (basis {basis:?})")]
    Simplex { reason: String, basis: Vec<usize> },

    #[error("column generation exceeded its budget of {budget} columns")]
    ColumnBudget { budget: usize },

    #[error("rounding found no qualifying (project, set) pair")]
    NoQualifyingPair,

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

//! Multi-project linear contract design.
//!
//! A principal assigns agents to projects and pays each agent a share of the
//! reward of the project it works on, conditional on success. Given per-project
//! success functions and agent costs, [`pipeline::solve`] returns an allocation
//! and the induced linear contracts whose expected revenue is within a constant
//! factor of the optimum. The [`bruteforce`] module provides exact oracles used
//! to check every guarantee at small sizes.

pub mod bruteforce;
pub mod capped_demand;
pub mod error;
pub mod generate;
pub mod instance;
pub mod lp_engine;
pub mod matching;
pub mod oracles;
pub mod pipeline;
pub mod rounding;
pub mod scaling;
pub mod simplex;

pub use error::{Error, Result};
pub use instance::{validate, AgentSet, Allocation, FunctionClass, Instance, Params, SuccessFunction};
pub use pipeline::{revenue, solve, ContractReport, Method};

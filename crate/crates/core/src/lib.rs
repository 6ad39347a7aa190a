//! Planner for entangled-pair reservation and fidelity-guaranteed routing
//! in quantum networks under uncertain fidelity requirements.
//!
//! Pairs are bought in two stages: reserved ahead of time, then utilized
//! or bought on demand once each request's fidelity requirement is known.
//! [`solver::solve_sp`] finds the cost-minimal routes and reservations
//! exactly; [`oracle::brute_force`] certifies it on small instances.

pub mod error;
pub mod experiment;
pub mod generate;
pub mod model;
pub mod net;
pub mod oracle;
pub mod purification;
pub mod solution;
pub mod solver;

pub use error::{Error, Result};
pub use model::{compile, evaluate, ModelOptions, SpModel};
pub use net::{CostParams, Edge, NetworkInstance, NodeId, Request, Scenario};
pub use purification::{chained_fidelity, min_pairs, purify_step, PairDemand, PurificationTable};
pub use solution::{Solution, SpObjective};

pub use solver::{solve_evp, solve_perfect_info, solve_sp, SolveOptions};

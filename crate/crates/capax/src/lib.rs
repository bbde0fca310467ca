//! Potential theory for finite continuous-time Markov chains, reversible or not.
//!
//! The central quantity is the capacity between two disjoint state sets,
//! computed here by three independent routes that must agree:
//!
//! * the probabilistic route, via equilibrium potentials ([`potential`]),
//! * a min-max (saddle point) Dirichlet principle ([`variational`]),
//! * a Thomson-type infimum over flows on the conductance graph ([`flow`]).
//!
//! A seeded Monte Carlo simulator ([`montecarlo`]) provides a fourth,
//! statistical check, and [`recurrence`] runs capacity-decay experiments on
//! 2-D random lattice environments with drift along plaquette cycles.
//!
//! Chains are immutable after construction and safe to share across threads.

pub mod chain;
pub mod collapse;
pub mod conductance;
pub mod error;
pub mod flow;
pub mod gen;
pub mod io;
pub mod montecarlo;
pub mod potential;
pub mod recurrence;
pub mod report;
mod solver;
pub mod tol;
pub mod variational;

pub use chain::ChainModel;
pub use collapse::CollapseMap;
pub use conductance::ConductanceGraph;
pub use error::{Error, Result};
pub use flow::Flow;
pub use potential::PotentialSolution;
pub use report::CapacityReport;
pub use tol::Tolerances;

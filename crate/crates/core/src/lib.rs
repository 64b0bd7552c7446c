//! Pure-strategy Bayesian-Nash equilibria of the linear-quadratic network
//! game in which every player observes only its own links.
//!
//! The crate is organised bottom-up: [`graph`] holds labeled graphs and
//! walk arithmetic, [`belief`] turns a prior over graphs into posteriors
//! over neighbour types, [`solver`] builds and solves the block
//! best-response system, [`closed_form`] evaluates the analytic equilibria
//! for structured priors and [`welfare`] compares welfare levels.
//!
//! ```
//! use netgame::{belief::Prior, solver};
//!
//! let sys = solver::build_block_system(&Prior::Uniform(4), 0.2).unwrap();
//! let eq = solver::solve_direct(&sys).unwrap();
//! let a = eq.action(netgame::TypeId::new(0, 0b011));
//! assert!((a - (1.0 + 2.0 / 3.0)).abs() < 1e-12);
//! ```

pub mod belief;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod graph;
pub mod report;
pub mod solver;
pub mod welfare;

pub use belief::{Beliefs, Prior, TypeId};
pub use error::{Error, Result};
pub use graph::{DecayBound, Graph, GraphClass, WalkCount};
pub use solver::{ActionProfile, BlockSystem};

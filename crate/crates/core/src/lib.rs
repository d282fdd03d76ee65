//! Planning toolkit for two-agent stochastic games.
//!
//! The crate is organized around a tabular game description ([`model::PosgModel`])
//! shared by two planners:
//!
//! * [`nested`] solves the fully observable level-k recursion and produces
//!   per-state mixed-strategy predictions of the other agent,
//! * [`ipomdp`] plans under partial observability against such a prediction,
//!   using point-based backups over alpha-vector value functions.
//!
//! [`environments`] builds the benchmark games (intersection navigation,
//! grid soccer, random zero-sum games), [`baselines`] provides scripted and
//! solver-backed opponents, [`arena`] runs seeded competitions, and
//! [`verify`] checks the solver's theoretical bounds empirically.

pub mod arena;
pub mod baselines;
pub mod config;
pub mod environments;
pub mod ipomdp;
pub mod model;
pub mod nested;
pub mod textio;
pub mod verify;

pub use model::{Belief, MdpView, Perspective, PosgModel, StrategyTable};

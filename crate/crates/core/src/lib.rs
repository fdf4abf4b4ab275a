//! greedlab: a desk-scale laboratory for what goes wrong when approximate
//! on-policy evaluation is combined with greedification.
//!
//! The crate builds three five-state problems on which alternating exact
//! on-policy least-squares evaluation with greedy policy improvement
//! oscillates forever, admits multiple fixed points, or converges to the worst
//! representable policy, and provides dynamic-programming engines, incremental
//! RL agents, a miniature DQN on continuous observations, and a batch
//! experiment harness to study those behaviours.

pub mod acceptance;
pub mod agents;
pub mod catalog;
pub mod cli;
pub mod dp;
pub mod dqn;
pub mod error;
pub mod harness;
pub mod linear;
pub mod mdp;
pub mod plot;
pub mod record;

pub use error::{Error, Result};

//! Channel assignment for the 3.5 GHz CBRS band.
//!
//! Scenarios of PA service areas or GAA nodes are turned into conflict graphs
//! over node-channel pairs, which the solvers in [`solve`] then select from.
//! [`harness`] runs seeded experiments and writes result tables.

pub mod channel;
pub mod coexist;
pub mod error;
pub mod graph;
pub mod harness;
pub mod objective;
pub mod radio;
pub mod scenario;
pub mod solve;

pub use error::{Error, Result};

//! Performance model of a cognitive mmWave network in which secondary
//! transmitters sense the primary receiver with directional beams.
//!
//! The crate evaluates medium-access probability, the secondary activity
//! factor, primary and secondary SINR coverage, and the transmit-restriction
//! threshold that meets joint QoS targets. A Monte-Carlo engine provides an
//! independent check of every analytic quantity.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
// Float methods resolve inherently when another crate in the build links
// std, leaving `num_traits::Float` unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod access;
pub mod antenna;
pub mod coverage_primary;
pub mod coverage_secondary;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod planner;
pub mod scenario;

pub use error::{Error, Result};

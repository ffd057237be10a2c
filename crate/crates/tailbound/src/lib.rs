//! Delay-tail analysis for short-packet multi-antenna uplinks.
//!
//! The crate models a multi-user MIMO uplink in which hard delay targets
//! are certified through moment-generating-function bounds on the queue.
//! It provides the channel and SINR statistics, finite-blocklength error
//! quantities, the delay-violation bound itself, discrete and fractional
//! resource optimizers built on top of it, and Monte Carlo machinery to
//! validate every analytical piece against simulation.

pub mod channel;
pub mod config;
pub mod error;
pub mod fbc;
pub mod mc;
pub mod num;
pub mod optim;
pub mod par;
pub mod rng;
pub mod scenarios;
pub mod snc;

pub use error::{Error, Result};

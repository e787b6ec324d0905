//! A small laboratory for a monetary/fiscal model with two steady states.
//!
//! The model is solved three ways:
//!
//! * closed-form steady states with determinacy and E-stability verdicts
//!   ([`model`], [`stability`]),
//! * steady-state adaptive learning ([`adaptive`]),
//! * a soft actor-critic household trained inside the model economy
//!   ([`env`], [`nn`], [`sac`], [`harness`]).
//!
//! [`metrics`] turns simulated transitions into first-order-condition and
//! steady-state distances. Each capability has a runnable program under
//! `examples/`; the `dsge-lab` binary wraps them behind subcommands.

// `!(x > y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod cli;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod rng;
pub mod sac;
pub mod stability;

pub use error::{Error, Result};

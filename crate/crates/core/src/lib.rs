//! Covert beam alignment and mutual-coupling fingerprint authentication for
//! millimeter-wave links.
//!
//! * [`array`]: arrays with mutual coupling, codebooks, channel and gain models.
//! * [`stats`]: noncentral chi-square functions, weighted-sum tail
//!   approximation and beam-alignment probabilities.
//! * [`covert`]: covert power and training-length design.
//! * [`auth`]: weighted energy detector, threshold calibration and weight design.
//! * [`harness`]: seeded Monte Carlo experiments producing CSV tables.
//! * [`config`]: scenario configuration files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod auth;
pub mod config;
pub mod covert;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod stats;

pub use error::{Error, Result};

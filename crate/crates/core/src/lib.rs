//! Cell-centered finite-volume schemes for hyperbolic conservation laws.

// `!(x > 0.0)` rejects NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod check;
pub mod config;
pub mod error;
pub mod gas;
pub mod gradient;
pub mod integrator;
pub mod linear;
pub mod mesh2d;
pub mod profile;
pub mod reconstruction;
pub mod roe;
pub mod run;
pub mod scheme1d;
pub mod scheme2d;

pub use error::{Error, Result};

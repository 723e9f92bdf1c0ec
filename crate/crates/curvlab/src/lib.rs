//! Verification harness, scenario configuration and result emission on top
//! of `curvlab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod report;

pub use error::{Error, Result};

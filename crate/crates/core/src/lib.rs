#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charflow;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fdsolver;
pub mod field;
pub mod geometry;
pub mod profiles;
pub mod quad;
pub mod report;
pub mod smooth;
pub mod sobolev;

pub use error::{Error, Result};

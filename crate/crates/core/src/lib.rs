#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod feigenbaum;
pub mod natext;
pub mod raster;
pub mod rays;

pub use error::{Error, Result};
pub use exec::Exec;

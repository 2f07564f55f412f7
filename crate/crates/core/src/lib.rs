#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baths;
pub mod cli;
pub mod lindblad;
pub mod matrixcore;
pub mod models;

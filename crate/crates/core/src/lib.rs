// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense matrix kernels read better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod kernel;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod verify;

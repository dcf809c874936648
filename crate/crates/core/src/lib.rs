//! `!(x < y)` comparisons are deliberate throughout: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod error;
pub mod extremal;
pub mod fit;
pub mod flow;
pub mod geometry;
pub mod lemmas;
pub mod linalg;
pub mod norms;
pub mod report;
pub mod run;
pub mod scenario;
pub mod snumbers;
pub mod subspace;
pub mod svd_split;

pub use error::{Error, Result};
pub use norms::Norm;
pub use subspace::Subspace;

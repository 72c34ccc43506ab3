//! Numerical toolkit for the annulus prime function, circularly slit disk
//! maps, logarithmic potentials and the squeezing function, together with a
//! search-and-certify pipeline for an explicit squeezing-function
//! counterexample on once-punctured slit disks.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod counterexample;
pub mod error;
pub mod prime;
pub mod potential;
pub mod slitmap;

pub use error::{Error, Result};
pub use prime::{AnnulusModulus, ComplexPoint};

//! Two-dimensional explicit dynamic fracture.
//!
//! Edge-smoothed finite elements (`esfem`) on triangle and quad meshes
//! (`mesh`), central-difference time stepping (`dynamics`), cracks that run
//! element by element through node duplication (`cem`), several crack tips
//! advancing at once (`mct`), and the benchmark driver with its analysis and
//! output (`bench`).

// NaN must fail these input checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cem;
pub mod dynamics;
pub mod error;
pub mod esfem;
pub mod mct;
pub mod mesh;

pub use error::{Error, Result};

//! Bounds, backward induction and the stopping boundary for the
//! Chow-Robbins game: toss a fair coin as long as you like and collect the
//! fraction of heads at the moment you stop.

pub mod boundary_model;
pub mod continuous;
pub mod engine;
pub mod error;
pub mod export;
mod kernel;
pub mod lowerbound;
pub mod numeric;
pub mod special_fn;
pub mod transform;

pub use continuous::ContinuousSolution;
pub use engine::{BoundaryTable, Precision, RunConfig, RunOptions, Verdict};
pub use error::{Error, Result};
pub use lowerbound::LowerBoundCalibration;
pub use special_fn::ExtendedReal;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    mod continuous {}
    #[doc = include_str!("../../../book/src/lower-bound.md")]
    mod lower_bound {}
    #[doc = include_str!("../../../book/src/induction.md")]
    mod induction {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    mod boundary {}
    #[doc = include_str!("../../../book/src/notation.md")]
    mod notation {}
    #[doc = include_str!("../../../book/src/artefacts.md")]
    mod artefacts {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

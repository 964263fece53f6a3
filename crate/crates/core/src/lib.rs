//! Benchmark harness for label-noise correction methods used as fairness
//! interventions.
//!
//! The pipeline injects group-dependent label noise into a clean dataset,
//! corrects the noisy labels with one of six methods, trains logistic models
//! on the original, noisy and corrected training sets, and scores them for
//! predictive performance and group fairness on original, noisy and
//! corrected test sets.

pub mod correction;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod learners;
pub mod metrics;
pub mod noise;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/correction.md")]
    mod correction {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

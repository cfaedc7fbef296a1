//! Weighted information generating functions and their relative, residual
//! and transformed versions, with kernel and maximum-likelihood estimators.

pub mod dist;
pub mod estimate;
pub mod error;
pub mod gof;
pub mod grammar;
pub mod igf;
pub mod integrate;
pub mod residual;
pub mod rigf;
pub mod transforms;
pub mod weights;

pub use dist::{Distribution, MonotoneMap, Sample, SampleSource};
pub use error::{Error, Result};
pub use integrate::{Estimate, QuadConfig, QuadError};
pub use weights::WeightFn;

//! Variance decompositions for functions of independent random variables.
//!
//! The crate is organised around a finite product space and a function `S`
//! on it. From those two pieces it computes, exactly by enumeration or by
//! Monte Carlo, the telescoping terms `B_k`, their iterated backward
//! differences, the jackknife quantities `J'_k` / `K'_k`, and the identities
//! tying them to `Var S`. The [`lcs`] module applies the machinery to the
//! length of the longest common subsequence of two random words, and
//! [`asymptotics`] covers Rademacher sums, the Hoeffding construction and a
//! hypercontractivity gap integral.

pub mod asymptotics;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod families;
pub mod instances;
pub mod lcs;
pub mod mc;
pub mod model;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use exact::{CorrelationTable, DecompositionReport, ExactConfig};
pub use mc::{Estimate, EstimatorConfig};
pub use model::{
    delta_eval, resample, Configuration, CoordFunction, FiniteDistribution, FunctionFlags,
    ProductSpace, SubsetMask,
};
pub use report::{IdentityEntry, IdentityReport};
pub use rng::{draw_config, RandomSource};

//! Gaussian limits of Rademacher-sum functions, the Hoeffding construction
//! with prescribed `K_k`, and the hypercontractivity gap integral.

mod hoeffding;
mod hyper;
mod jackknife;
mod polynomial;
pub mod quadrature;

pub use hoeffding::{hoeffding_construct, hoeffding_report, HoeffdingReport};
pub use hyper::{hyper_gap_ratio, HyperGap, HYPER_ABS_ERROR, HYPER_MAX_N, HYPER_RATIO_BOUND};
pub use jackknife::{
    convergence_table, gaps_decrease, rademacher_jackknife, rademacher_sum_function,
    ConvergenceRow, RademacherJackknife,
};
pub use polynomial::{gaussian_moment, gaussian_targets, GaussianTargets, PolynomialG};

//! Numerical substrate: random streams, special functions, quadrature,
//! root finding, distributions, samplers and summary statistics.

pub mod dist;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod tau;

pub use quad::{integrate, integrate_with_error, QuadratureSpec};
pub use rng::{partitioned_draws, RngStream};
pub use roots::bisect;
pub use sampling::{sample_inverse_gamma, sample_truncated_beta, sample_truncated_normal, Region};
pub use stats::{ess, gelman_rubin, weighted_histogram, BinSpec, Histogram};
pub use tau::{solve_tau, AffineTauModel, TauModel, TauSolveReport};

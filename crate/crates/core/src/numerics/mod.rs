//! Numerical kernels: dense matrices, statistics, truncated SVD and the
//! seeded random-stream contract.

pub mod matrix;
pub mod rng;
pub mod stats;
pub mod svd;

pub use matrix::Matrix;
pub use rng::{seeded_rng, StreamRng};
pub use stats::{pearson, welch_t, WelchTest};
pub use svd::{exact_svd, truncated_svd, truncated_svd_with, SvdOptions, SvdResult};

//! Deterministic numerical utilities shared by the bounds and simulator:
//! log-domain accumulation, 1-D/2-D maximization, Gaussian quadrature,
//! adaptive integration, small dense complex linear algebra, and the
//! counter-based RNG scheme.

pub mod integrate;
pub mod linalg;
pub mod logdomain;
pub mod optimize;
pub mod quadrature;
pub mod rng;

pub use logdomain::{
    binary_entropy_bits, log2_add, log2_binomial, log2_multinomial, log2_sum_tree, wilson_interval,
};
pub use optimize::{golden_max, maximize_over_gamma, minimize_scalar};

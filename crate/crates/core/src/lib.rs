//! Defective coarse-curvature calculus for Markov kernels on ℝ^d.
//!
//! A kernel `P` has *defective curvature* `(p, K, M)` when
//! `W_p(δ_x P, δ_y P) ≤ K·|x − y| + M` for all `x, y`. This crate carries the
//! constant calculus built on top of that condition (propagation of defective
//! transport-entropy inequalities, reverse transport-entropy bounds, mixing
//! window expressions) together with everything needed to check those
//! statements numerically:
//!
//! * [`model`]: potentials `U = V + H` and the three measure representations
//!   (Gaussian, 1D grid density, empirical sample).
//! * [`kernels`]: gradient step, Gaussian convolution, Langevin Monte Carlo,
//!   the Proximal Sampler and the exact Ornstein–Uhlenbeck semigroup, as
//!   samplers, exact Gaussian pushforwards and grid pushforwards.
//! * [`transport`]: Wasserstein distances (closed form, sorted 1D, assignment,
//!   grid quantiles).
//! * [`divergences`]: KL and total variation (closed form and quadrature).
//! * [`bounds`]: certificates and every closed-form bound, including the
//!   shift-schedule optimisation and its dynamic-programming oracle.
//!
//! The crate is `no_std` (it needs `alloc`); IO, parallel orchestration and
//! the command line live in the `curvlab` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bounds;
pub mod divergences;
mod error;
mod extended;
mod grid;
pub mod kernels;
pub mod model;
pub mod rng;
pub mod special;
pub mod transport;

pub use error::{Error, Result};
pub use extended::Extended;

/// Crate version, recorded in result manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

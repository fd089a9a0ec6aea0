//! Monotone traveling-wave profiles for a third-order (pseudoparabolic)
//! reaction-diffusion equation with a discrete reaction delay.
//!
//! The pipeline: solve the kernel cubic for its root triple
//! ([`charpoly`]), assemble the exact piecewise-exponential Green's function
//! ([`greenkernel`]), construct explicit super- and sub-solutions from the
//! delayed characteristic roots and verify their differential inequalities
//! ([`bounds`]), run the monotone fixed-point iteration between them
//! ([`iterate`]) with the convolution operator of [`waveop`] on the truncated
//! grids of [`funcspace`], and cross-validate the converged profile by
//! integrating the full PDE and measuring the front speed ([`pdecheck`]).

pub mod bounds;
pub mod charpoly;
pub mod error;
pub mod funcspace;
pub mod greenkernel;
pub mod iterate;
pub mod pdecheck;
pub mod waveop;

pub use error::{Error, Result};

//! Numerical laboratory for theta-intermediate dimensions.
//!
//! The crate provides, at desk scale:
//!
//! - sparse dyadic trees as the finite stand-in for compact subsets of
//!   `[0,1)^d` ([`dyadic`]), together with generators for the calibration
//!   families used throughout ([`generators`]);
//! - exact minimization of restricted covering sums `sum |U_i|^s` over
//!   dyadic antichain covers with diameters in `[delta^(1/theta), delta]`,
//!   and dimension estimation from the cost crossings ([`covering`]);
//! - constructive two-regime Frostman-type measures on the trees and the
//!   machinery to audit their ball-mass profiles ([`measures`]);
//! - truncated radial kernels, discrete double-sum energies and the
//!   capacity lower bound for covering costs ([`kernels`]);
//! - affine plane sampling, slice extraction and tube measures for the
//!   slicing experiments ([`slicing`]);
//! - the named end-to-end studies with JSON/CSV reporting ([`experiments`]).

pub mod covering;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod kernels;
pub mod measures;
pub mod slicing;

pub use error::{Error, Result};

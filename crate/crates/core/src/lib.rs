//! Certified large (k,l)-sum-free subsets via dilation counting on the torus,
//! together with exact checks of the Fourier, sieve and test-function machinery
//! behind the L¹ lower bounds.

pub mod arcs;
pub mod arith;
pub mod dilation;
pub mod error;
pub mod fourier;
pub mod lp;
pub mod mps;
pub mod oracle;
pub mod pipeline;
pub mod sets;
pub mod sieve;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};

/// Worker count override read by [`pipeline::install_workers`].
pub const WORKERS_ENV: &str = "SUMFREE_WORKERS";

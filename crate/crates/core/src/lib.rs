//! Stochastic simulation of quantum-noise-initiated transient stimulated Raman
//! scattering in a single-mode gas-filled fiber.
//!
//! The crate is `no_std` (with `alloc`) and contains every numerical piece of
//! the simulator:
//!
//! * [`model`]: dimensionless medium configuration, pump pulse, characteristics
//!   grid and the field record shared by everything else.
//! * [`propagator`]: cell-by-cell integration of the coupled sideband /
//!   molecular-coherence equations, plus the Stokes-only modified-Bessel Green
//!   kernel used as an analytic reference.
//! * [`ensemble`]: vacuum-noise seeding and reproducible Monte Carlo shots on
//!   counter-based random substreams.
//! * [`moments`]: deterministic second moments (mean intensities, Stokes /
//!   anti-Stokes correlation coefficient, photon bookkeeping).
//! * [`interferometry`]: a virtual two-arm interferometer with fringe
//!   synthesis and sinusoid fitting.
//! * [`statistics`]: circular statistics, phase-correlation histograms,
//!   visibility and energy statistics.
//!
//! IO, configuration files, the CLI and the parallel ensemble runner live in
//! the companion `raman-comb` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod ensemble;
mod error;
pub mod interferometry;
pub mod math;
pub mod model;
pub mod moments;
pub mod propagator;
pub mod rng;
pub mod statistics;

pub use error::{Error, Result};
pub use num_complex::Complex64;

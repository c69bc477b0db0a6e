//! Success probability and area spectral efficiency for K-tier multiuser
//! MIMO heterogeneous cellular networks.
//!
//! Base stations of each tier form an independent homogeneous Poisson point
//! process; a tier is described by its density, transmit power, association
//! bias, antenna count and number of users served per slot. The library
//! provides:
//!
//! - the exact downlink SIR success (coverage) probability, computed through
//!   a triangular-Toeplitz power-series representation of the interference
//!   Laplace transform ([`coverage`]),
//! - its large-threshold closed form and the tier coefficient vectors that
//!   drive it ([`coverage`], [`model`]),
//! - area spectral efficiency and the structural diagnostics (density
//!   monotonicity signs, maximum achievable reliability) ([`metrics`]),
//! - optimizers for the ASE-vs-reliability tradeoff: an exact greedy for
//!   unbiased U-SDMA networks and a Dinkelbach + sequential-convex scheme
//!   for general networks ([`optimize`]),
//! - a seeded Monte Carlo simulator that validates every closed form
//!   ([`montecarlo`]).
//!
//! Densities are expressed in base stations per km² at every public
//! interface. Success probabilities depend only on density ratios, so the
//! unit choice is free of consequence there; ASE values are per km² unless
//! noted otherwise.

pub mod coverage;
pub mod metrics;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod specfun;

pub use coverage::{ps_asymptotic, ps_asymptotic_tier, ps_exact, ps_exact_tier};
pub use model::{NetworkModel, TierConfig};

//! Stochastic-geometry models for multi-user multi-antenna cellular networks
//! whose base stations follow a Matérn type-II hard-core point process.
//!
//! The crate is organised bottom-up:
//!
//! - [`point_process`]: PPP sampling, Matérn II thinning and the first and
//!   second moment densities of the thinned process.
//! - [`channel`]: path gain, log-normal shadowing, Rayleigh fading matrices and
//!   the Gamma law of the zero-forcing effective gain.
//! - [`interference`]: average downlink interference at a tagged UE, both by
//!   quadrature of the second-moment integral and by Monte Carlo, plus the PPP
//!   baseline.
//! - [`zf`]: zero-forcing precoding, per-subchannel capacity and spectral
//!   efficiency (Monte Carlo estimate and the Jensen upper bound).
//! - [`energy`]: Pareto traffic, adaptive link power, BS power and network
//!   energy efficiency.
//! - [`experiment`]: configuration, parameter sweeps and CSV/JSON result
//!   emission used by the `hcpp-sim` binary.
//!
//! Every analytic quantity has an independent Monte Carlo counterpart so the
//! two can be compared point by point.

pub mod channel;
pub mod energy;
mod error;
pub mod experiment;
pub mod interference;
pub mod point_process;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod zf;

pub use error::{Error, Result};
pub use stats::Estimate;

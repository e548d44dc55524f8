//! Dual-hop hybrid VLC/RF downlink with an energy-harvesting relay.
//!
//! Each transmission block is split between a VLC phase, in which a ceiling
//! LED carries data and power to a relay, and an RF phase, in which the relay
//! forwards the decoded data to a far user using the energy it harvested.
//! During the RF phase the LED keeps radiating at full bias so that the relay
//! can bank energy for the next block.
//!
//! The crate provides:
//! - [`params`]: hardware/channel constants and solver settings, with
//!   validation and JSON config support;
//! - [`channel`]: Lambertian optical gain, shot noise, RF path loss and noise
//!   floor, Rayleigh fading, and the per-realization SNR coefficients;
//! - [`link`]: exact per-block rates and harvested energy for candidate
//!   decisions;
//! - [`optimizer`]: the per-block max-min rate optimization over DC bias and
//!   time split (MM-based bias sub-problem, convex time sub-problem,
//!   alternating driver) plus a brute-force grid oracle;
//! - [`sim`]: block sequences with energy carry-over and Monte Carlo
//!   aggregation over geometry and fading.

pub mod channel;
pub mod link;
pub mod optimizer;
pub mod params;
pub mod sim;

pub use channel::{ChannelState, Scenario};
pub use link::{BlockDecision, BlockState};
pub use optimizer::{OptimizeOutcome, OptimizerError};
pub use params::{SolverSettings, SystemParams};
pub use sim::{CaseSpec, ExperimentConfig};

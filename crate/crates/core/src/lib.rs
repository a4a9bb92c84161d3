//! Collective molecular signal modeling at a spherical receiver.
//!
//! A swarm of point transmitters, placed outside a spherical receiver
//! according to a homogeneous Poisson point process, releases impulses of
//! information molecules at `t = 0`. The molecules diffuse freely; the
//! receiver either permanently absorbs every molecule that hits its surface
//! (fully absorbing) or transparently counts the molecules currently inside
//! its volume (passive). This crate computes the expected collective signal
//! at the receiver with three mutually-validating engines:
//!
//! - [`expectation`]: closed-form and quadrature evaluation of the
//!   Campbell-theorem integrals for the nearest-transmitter signal, the
//!   interfering signal, and their total;
//! - [`montecarlo`]: averaging of the analytic per-transmitter responses
//!   over sampled transmitter configurations;
//! - [`particle`]: Brownian-dynamics tracking of individual molecules.
//!
//! All engines work in canonical units of micrometers and seconds and are
//! deterministic given a seed, independent of thread count.

pub mod channel;
pub mod config;
pub mod error;
pub mod expectation;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod particle;
pub mod scenario;
pub mod seeding;
pub mod signal;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use scenario::{
    Environment, ReceiverKind, ReceiverSpec, SamplingScheme, Scenario, TransmitterField,
    ValidatedScenario,
};
pub use signal::{Component, SignalCurve};

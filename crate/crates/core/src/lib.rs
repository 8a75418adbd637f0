//! Simulations of open quantum systems whose system–bath coupling is
//! phase modulated as `g exp(-i m sin νt)`.
//!
//! When the modulation index is a zero of `J0` the unshifted spectral
//! component of the coupling vanishes and decay is governed by sidebands
//! displaced by multiples of `ν`, which slows it dramatically once `ν`
//! exceeds the bath bandwidth. The modules cover:
//!
//! - [`specfun`]: Bessel functions, `J0` zeros and sideband weights.
//! - [`numerics`]: fourth-order integration of linear systems, rate fits, averaging.
//! - [`two_level`]: a level decaying through a broadened intermediate level.
//! - [`spin_bath`]: a spin relaxing in a heat bath with exponential memory.
//! - [`ion_heating`]: ground-state fidelity of a trapped ion heated by a
//!   coloured stochastic field.
//! - [`selftest`]: quick invariant checks runnable from the command line.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ion_heating;
pub mod numerics;
pub mod selftest;
pub mod specfun;
pub mod spin_bath;
pub mod two_level;

pub use error::{Error, Result};
pub use ion_heating::{FidelityCurve, FidelityMethod, HeatingMoments, HeatingParams};
pub use numerics::{ComplexTrajectory, RateFit, Scheme, TimeGrid};
pub use specfun::{ModulationParams, PhaseSign, Sidebands};
pub use spin_bath::{BathParams, Channel, CoherenceLifetime, DensityMatrix2, SpinParams};
pub use two_level::{DecayRun, DecayRunOptions, TwoLevelParams};

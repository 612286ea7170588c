//! Simulation and estimation toolkit for optical phase tracking over a
//! turbulent satellite-to-ground channel.
//!
//! The crate models the full chain:
//!
//! 1. [`turbulence`] — altitude-resolved wind and refractive-index
//!    structure profiles, and the channel coherence time they imply;
//! 2. [`propagation`] — von Kármán phase screens and split-step
//!    angular-spectrum beam propagation down to a receiving aperture,
//!    yielding transmissivity samples;
//! 3. [`phasesim`] — per-pulse reference/signal phase-error sequences
//!    over coherence windows, with a heterodyne-detection noise model;
//! 4. [`estimator`] — a from-scratch LSTM one-step phase estimator
//!    (forward pass and backpropagation through time) next to
//!    expectation and identity baselines;
//! 5. [`bounds`] — the quantum Cramér-Rao limit those estimators are
//!    measured against;
//! 6. [`harness`] — deterministic experiment orchestration: datasets,
//!    training, evaluation tables, and architecture sweeps.
//!
//! Every stochastic step draws from named sub-streams of one root seed
//! ([`rng`]), so any experiment is reproducible byte for byte. The
//! `skyphase` binary exposes the harness as a CLI; the `examples/`
//! directory walks through each capability in isolation.
//!
//! Phases are radians wrapped to (−π, π]; variances are reported in
//! shot-noise units (SNU); SI units elsewhere unless noted.

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod phasesim;
pub mod propagation;
pub mod quad;
pub mod rng;
pub mod turbulence;

pub use error::{Error, Result};

//! Deterministic, seedable simulation of zero-energy devices: energy
//! storage dynamics with explicit conversion losses, energy-information
//! acquisition costs and errors, task-level energy/time models, and
//! energy-aware operation policies evaluated in a slotted-time engine.
//!
//! The crate is organized along the system it models:
//!
//! - [`energy`]: storage elements, source/load circuit behaviors,
//!   harvest-use interaction modes, conservation ledgers.
//! - [`ei`]: comparator, sampling, coulomb-counting, and indirect methods a
//!   device can use to learn its energy state, each with overhead and error.
//! - [`tasks`]: sensing, computation, communication, and actuation cost
//!   models plus atomicity/granularity structure.
//! - [`forecast`]: autoregressive irradiance forecasting and
//!   wait-until-feasible scheduling.
//! - [`policy`]: energy-aware decision strategies and energy-blind
//!   baselines, including dynamic RF combining.
//! - [`engine`]: the deterministic multi-device simulation loop, sweeps,
//!   and metrics.
//! - [`presets`]: ready-made experiment configurations.
//!
//! Every stochastic draw flows through [`rng::rng_stream`], so runs are
//! reproducible bit-for-bit from `(config, seed)`.

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0` so NaN
// parameters fail the check and get reported as violations.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod ei;
pub mod engine;
pub mod forecast;
pub mod policy;
pub mod presets;
pub mod rng;
pub mod tasks;

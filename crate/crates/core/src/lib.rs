//! Safe imitation learning with MC-dropout decision rules.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense network with inverted dropout, ADAM, and L2 regularisation.
//! - [`policy`]: observation/action types, expert interface, MC-dropout sampling.
//! - [`rules`]: the expert/novice handoff rules.
//! - [`env`]: the Dubins lidar room, an observation-noise wrapper, and a
//!   point-mass toy environment.
//! - [`dagger`]: rollouts, dataset aggregation, evaluation, the epoch loop.
//! - [`experiment`]: configs, result tables, and SVG rendering for sweeps.

pub mod dagger;
pub mod env;
pub mod experiment;
pub mod nn;
pub mod policy;
pub mod rules;

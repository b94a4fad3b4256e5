//! Critical points of the Lagrangian action for N-body-type problems with
//! strong-force potentials, searched over loops satisfying
//! `x(t + T/2) = -x(t)`.
//!
//! * [`loopspace`]: odd-harmonic loops, sampling, Parseval norms.
//! * [`potential`]: the pair-potential family and its strong-force witness.
//! * [`action`]: the discretized action functional and its exact gradient.
//! * [`solver`]: limited-memory quasi-Newton descent, multi-start, dedup.
//! * [`verify`]: residuals, the inequality ledger and coercivity bounds.
//! * [`config`] / [`orbit_file`]: run configuration and persisted orbits.

pub mod action;
pub mod config;
pub mod error;
pub mod loopspace;
pub mod orbit_file;
pub mod potential;
pub mod solver;
pub mod verify;

pub use action::{action, action_gradient, ActionEvaluation, ActionFunctional};
pub use error::{OrbitError, Result};
pub use loopspace::{
    h1_distance, kinetic_energy, min_pairwise_distance, sample_trajectory, Layout,
    LoopConfiguration, Part, SampledPath,
};
pub use potential::{Blend, PotentialParams, PotentialSpec, StrongForceWitness};

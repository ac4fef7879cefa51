//! Main-lobe-integration (MLI) leakage beamforming for secure
//! directional-modulation multi-user MIMO.
//!
//! The crate designs per-user confidential beamformers and an artificial
//! noise projection from *estimated* user and eavesdropper directions, and
//! evaluates the result with closed-form secrecy rates and a Monte Carlo
//! QPSK link simulation.

pub mod array_model;
pub mod baselines;
pub mod beamformer;
pub mod error;
pub mod exec;
pub mod link_sim;
pub mod metrics;
pub mod mli_integrals;
mod quadrature;
pub mod scenario;

pub use array_model::{deg_to_rad, lobes_union, main_lobe, ArrayGeometry, IntervalUnion, SteeringVector};
pub use beamformer::{BeamformerDesign, MliProblem, NoiseConfig, PowerConfig, Regime};
pub use error::{Error, Result};
pub use exec::Execution;
pub use scenario::{Method, Scenario};

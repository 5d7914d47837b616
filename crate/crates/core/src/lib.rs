//! Latent-state samplers for individual-based epidemic models written as
//! coupled hidden Markov models.

pub mod chain;
pub mod chmm;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod iffbs;
pub mod kernel;
pub mod models;
pub mod random;
pub mod rippler;
pub mod rjmcmc;

pub use chmm::{
    Cell, EmissionTable, Grid, HiddenStateMatrix, ModelSpec, Observation, ObservationMatrix, RecoveryCode,
    Snapshot, State, StateSpace, UniformGrid,
};
pub use error::{Error, Result};
pub use kernel::{initial_latent_state, LatentKernel, UpdateRecord};

//! Unified gas-kinetic particle (UGKP) solver for frequency-dependent thermal
//! radiative transfer on 2D Cartesian meshes.
//!
//! Monte Carlo particles carry the free-streaming part of the intensity up to
//! their first absorption; an implicit finite-volume solve advances the
//! angle- and frequency-integrated intensity together with the material
//! temperature, and absorbed energy is re-emitted by re-sampling.

#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod driver;
pub mod error;
pub mod fv;
pub mod mesh;
pub mod oracles;
pub mod output;
pub mod presets;
pub mod radiometry;
pub mod resample;
pub mod rng;
pub mod transport;

pub use config::SimulationConfig;
pub use driver::{run_simulation, RunSummary, Simulation};
pub use error::{Error, Result};

//! Deterministic reference solvers used for verification.

mod diffusion;
mod free_stream;
mod multigroup;

pub use diffusion::{
    rosseland_diffusion_solve, rosseland_diffusion_step, DiffusionBoundary, DiffusionProblem,
    DiffusionRun,
};
pub use free_stream::{free_stream_density, free_stream_exact};
pub use multigroup::{
    group_planck_fractions, multigroup_homogeneous_solve, MultigroupProblem, MultigroupRun,
    MultigroupState,
};

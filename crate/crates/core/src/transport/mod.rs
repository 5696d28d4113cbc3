//! Monte Carlo particles: sampling, tracking to first collision, tallies.

mod sources;
mod spectrum;
mod tracking;

pub use sources::{
    boundary_weight, cosine_inward, isotropic_direction, sample_boundary_particles,
    sample_initial_particles, InitialSpectrum,
};
pub use spectrum::{spectrum_tally, SpectrumBins};
pub use tracking::{
    distance_to_collision, track_all, track_particle, CrossingTau, Outcome, StepTallies, Tracked,
    TrackingContext, MAX_DISTANCE,
};

/// A Monte Carlo sample of the specific intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// Weight in units of `rho * area`.
    pub w: f64,
    pub x: f64,
    pub y: f64,
    /// Unit direction; transport uses the first two components.
    pub omega: [f64; 3],
    /// Photon energy, keV.
    pub u: f64,
    /// Time since the start of the current step, ns.
    pub t_local: f64,
    /// Cell index the particle currently occupies.
    pub cell: usize,
}

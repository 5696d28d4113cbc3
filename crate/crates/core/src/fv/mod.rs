//! Implicit macroscopic update of `(rho, U_r, T)`: coefficients, limiter, linear solve, Picard loop.

mod coefficients;
mod limiter;
mod linear;
mod step;

pub use coefficients::{
    absorption_tally, assemble_face_kappa, CoefficientCache, FaceCoefficients, FaceField,
    CACHE_LOG_STEP,
};
pub use limiter::{crossing_taus, interface_limiter, LimiterSettings, LimiterValue};
pub use linear::{banded_solve, bicgstab, solve, FivePoint, LinearReport, DIRECT_LIMIT};
pub use step::{
    assemble_coefficients, assemble_system, linear_step, open_boundary_coefficient, picard_update,
    secant_beta, FreeTransport, FvContext, LinearOutcome, MacroCoefficients, SolveReport,
    SolverSettings,
};

//! Trapped single-particle ground states, their scalings and overlaps.

mod model;
mod overlap;
mod region;
mod scaling;
mod wavefunction;

pub use model::{
    multi_indices, solve_ground_state, GridGroundState, GroundForm, GroundStateModel, SolverDiagnostics,
    TaylorPolynomial, TrapPotential,
};
pub use overlap::{moment_against_polynomials, scaled_overlap, OverlapExpansion, MOMENT_SNAP};
pub use region::RegionSpec;
pub use scaling::ScalingFamily;
pub use wavefunction::SampledWaveFunction;

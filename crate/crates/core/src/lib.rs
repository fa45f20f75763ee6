//! Numerical laboratory for Bose-Einstein condensation of trapped,
//! non-interacting bosons.
//!
//! The core is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`); the crate root re-exports `f64` aliases for everyday use.

pub mod classify;
pub mod error;
pub mod exactform;
pub mod fit;
pub mod focksim;
pub mod groundstate;
pub mod io;
pub mod quadrature;
pub mod real;
pub mod scenario;

pub use error::{Error, Result};
pub use real::{KahanSum, Real};

pub type GroundState = groundstate::GroundStateModel<f64>;
pub type Potential = groundstate::TrapPotential<f64>;
pub type Region = groundstate::RegionSpec<f64>;
pub type WaveFunction = groundstate::SampledWaveFunction<f64>;
pub type Scaling = groundstate::ScalingFamily<f64>;

//! Pseudo-spectral solvers for the Euler, Euler-Voigt, Navier-Stokes and
//! Navier-Stokes-Voigt equations on the `2pi`-periodic 3-torus.
//!
//! All four systems are the single model
//!
//! ```text
//! d_t u - alpha^2 d_t Delta u + (u . grad) u - nu Delta u + grad p = f,    div u = 0
//! ```
//!
//! selected by [`ModelParams`]. Fields are stored as Fourier coefficients
//! ([`SpectralVectorField`]); products are evaluated on the collocation grid with
//! two-thirds dealiasing.

pub mod dynamics;
pub mod error;
pub mod experiments;
mod fft;
pub mod field;
pub mod grid;
pub mod integrate;
pub mod output;
pub mod periodic;
pub mod snapshot;

pub use dynamics::{ForcingSpec, ManufacturedSolution, ModelParams, TimeProfile};
pub use error::{Error, Result};
pub use field::{PhysicalVectorField, SobolevIndex, SpectralScalarField, SpectralVectorField};
pub use grid::TorusGrid;
pub use integrate::{DiagnosticsRecord, SimulationState, StepperConfig};

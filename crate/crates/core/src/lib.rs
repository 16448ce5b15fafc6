//! One-dimensional quantum scattering computed by two independent routes.
//!
//! The conventional route ([`fdsolver`]) solves the stationary scattering
//! boundary value problem on a finite-difference grid and extracts complex
//! transmission/reflection coefficients. The nonhermitian route ([`siegert`])
//! expands the problem in a spectral basis on a finite box, solves the
//! resulting quadratic eigenvalue problem for Siegert pseudostates, and
//! reconstructs the retarded Green function and the transmission coefficient
//! from the full pseudostate spectrum. [`green`] supplies the analytic free
//! Green function, the on-shell T-matrix bridge and a Born-series check;
//! [`wavepacket`] carries the spectral time evolution and the
//! stationary-phase closed forms that connect both routes to observable
//! transmission/reflection probabilities.

pub mod error;
pub mod fdsolver;
pub mod green;
pub mod model;
pub mod numerics;
pub mod siegert;
pub mod wavepacket;

pub use error::{Result, ScatterError};
pub use model::{EnergyGrid, PhysicsConstants, Potential};

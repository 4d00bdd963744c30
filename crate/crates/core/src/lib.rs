//! Spectral laboratory for scalar reductions of the incompressible
//! Navier-Stokes equations on pyramidal and conic domains.
//!
//! Angular dependence is carried by truncated cosine series ([`spectral`]),
//! radial dependence by a uniform finite-difference grid ([`radial`]). The
//! models live in [`model1d`], [`model3d`] and [`reduced`]; [`diagnostics`]
//! holds the indicators and constants, [`config`] and [`export`] the run
//! plumbing used by the `ringlab` binary.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod model1d;
pub mod model3d;
pub mod par;
pub mod radial;
pub mod reduced;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use par::Execution;

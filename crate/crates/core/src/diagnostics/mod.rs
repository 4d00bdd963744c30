//! Eigenmode constants, norms, integral identities and blow-up indicators.

pub mod bessel;
pub mod eigen;
pub mod norms;
pub mod onset;

pub use bessel::{bessel_j, first_zero};
pub use eigen::{chi_approx, chi_exact, lambda_alpha, sigma_from_omega, EigenConstants};
pub use onset::{detect_onset, tail_ratio};

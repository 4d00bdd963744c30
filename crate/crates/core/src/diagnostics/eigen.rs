//! Radial eigenmode constants for the 3D reduction.

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j, first_zero};
use crate::error::{invalid, Result};

/// Positive root of `sigma (sigma + 1) = 2 omega^2`.
pub fn sigma_from_omega(omega: f64) -> f64 {
    0.5 * (-1.0 + (1.0 + 8.0 * omega * omega).sqrt())
}

/// `J_{sigma+1/2}(gamma r) / sqrt(gamma r)`. Returns the limit 0 at `r = 0`.
pub fn chi_exact(r: f64, gamma: f64, sigma: f64) -> f64 {
    let x = gamma * r;
    if x <= 0.0 {
        return 0.0;
    }
    bessel_j(sigma + 0.5, x) / x.sqrt()
}

/// Polynomial stand-in `r^sigma (r_M - r)`.
pub fn chi_approx(r: f64, sigma: f64, r_max: f64) -> f64 {
    r.powf(sigma) * (r_max - r)
}

/// Location of the maximum of [`chi_approx`].
pub fn chi_approx_argmax(sigma: f64, r_max: f64) -> f64 {
    sigma / (sigma + 1.0) * r_max
}

/// `(r_hat / r_M, lambda(alpha))` with `r_hat / r_M = (sigma+1-alpha)/(sigma+2-alpha)`
/// and `lambda = 2 omega^2 - z^2 (r_hat / r_M)^2`.
pub fn lambda_alpha(alpha: f64, omega: f64) -> (f64, f64) {
    let sigma = sigma_from_omega(omega);
    let z = first_zero(sigma + 0.5);
    lambda_with(alpha, omega, sigma, z)
}

fn lambda_with(alpha: f64, omega: f64, sigma: f64, z: f64) -> (f64, f64) {
    let ratio = (sigma + 1.0 - alpha) / (sigma + 2.0 - alpha);
    (ratio, 2.0 * omega * omega - z * z * ratio * ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConstants {
    pub omega: f64,
    pub r_max: f64,
    pub sigma: f64,
    pub z: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub ratio: f64,
    pub lambda_alpha: f64,
    pub r_hat: f64,
}

impl EigenConstants {
    pub fn new(omega: f64, alpha: f64, r_max: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", "must be positive"));
        }
        if alpha.is_nan() || alpha > 1.0 {
            return Err(invalid("alpha", "must be at most 1"));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(invalid("r_max", "must be positive"));
        }
        let sigma = sigma_from_omega(omega);
        let z = first_zero(sigma + 0.5);
        let (ratio, lambda) = lambda_with(alpha, omega, sigma, z);
        Ok(Self {
            omega,
            r_max,
            sigma,
            z,
            gamma: z / r_max,
            alpha,
            ratio,
            lambda_alpha: lambda,
            r_hat: ratio * r_max,
        })
    }

    pub fn chi_exact(&self, r: f64) -> f64 {
        chi_exact(r, self.gamma, self.sigma)
    }

    pub fn chi_approx(&self, r: f64) -> f64 {
        chi_approx(r, self.sigma, self.r_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_examples() {
        assert!((sigma_from_omega(4.0) - 5.179).abs() < 1e-3);
        assert!((sigma_from_omega(1.0) - 1.0).abs() < 1e-15);
        let s = sigma_from_omega(2f64.sqrt());
        assert!((s - (-1.0 + 17f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_for_omega_four() {
        let s = sigma_from_omega(4.0);
        let z = first_zero(s + 0.5);
        assert!((z - 9.56).abs() < 0.01, "z={z}");
        assert!(bessel_j(s + 0.5, z).abs() < 1e-10);
    }

    #[test]
    fn lambda_examples() {
        let (_, l) = lambda_alpha(0.5, 4.0);
        assert!((l + 34.0).abs() < 0.5, "{l}");
        let (ratio, l) = lambda_alpha(1.0, 4.0);
        assert!((ratio - 0.838).abs() < 1e-3);
        assert!((l + 32.2).abs() < 0.5, "{l}");
    }

    #[test]
    fn chi_endpoints_and_argmax() {
        let c = EigenConstants::new(4.0, 0.5, 1.0).unwrap();
        assert_eq!(c.chi_approx(0.0), 0.0);
        assert_eq!(c.chi_approx(1.0), 0.0);
        assert_eq!(c.chi_exact(0.0), 0.0);
        assert!(c.chi_exact(1.0).abs() < 1e-10);
        let peak = chi_approx_argmax(c.sigma, 1.0);
        let h = 1e-4;
        assert!(c.chi_approx(peak) > c.chi_approx(peak - h));
        assert!(c.chi_approx(peak) > c.chi_approx(peak + h));
        assert!(c.r_hat > 0.0 && c.r_hat < c.r_max);
    }

    #[test]
    fn rejects_alpha_above_one() {
        assert!(EigenConstants::new(4.0, 1.5, 1.0).is_err());
    }
}

//! Velocity norms, compatibility residuals and the integral identities.
//!
//! Angular integrals over one period `[-pi/w, pi/w]` are taken mode by mode:
//! `int cos^2(w k x) dx` is `pi/w` for `k >= 1` and `2 pi/w` for `k = 0`, and
//! cross terms vanish. This is exactly what the uniform trapezoid rule with
//! more than `2N` points per angle returns for these trigonometric
//! polynomials. Radial integrals use the trapezoid rule on the grid nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model3d::{nl_3d, radial_derivative, Kinematics3D, State3D};
use crate::par::{map_range, Execution};
use crate::radial::RadialGrid;
use crate::reduced::{nl_profile, KinematicsReduced, ReducedParams, ReducedState};

/// `int cos^2(w k x) dx` over one period.
pub fn cos_weight_sq(k: usize, omega: f64) -> f64 {
    if k == 0 {
        2.0 * PI / omega
    } else {
        PI / omega
    }
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// `int |v|^2` over one angular period at node `j`, 3D.
fn angular_energy_3d(kin: &Kinematics3D, j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let r = kin.grid().node(j);
    let (d, dp) = kin.node_coeffs(j);
    let w = kin.omega();
    let np = kin.n() + 1;
    let w2 = w * w;
    let mut e = 0.0;
    for k in 0..np {
        for i in 0..np {
            let idx = k * np + i;
            let s = (k * k + i * i) as f64;
            let weight = cos_weight_sq(k, w) * cos_weight_sq(i, w);
            let v1 = w2 * s * d[idx] / r;
            let phi = dp[idx] + d[idx] / r;
            // v2 and v3 share the weight because sin^2 and cos^2 integrate
            // alike for k >= 1, and the k = 0 term carries a factor k.
            e += weight * (v1 * v1 + w2 * s * phi * phi);
        }
    }
    e
}

/// `sqrt(int |v|^2 r^2 dr dtheta dphi)` over one angular period squared.
pub fn l2_velocity_norm_3d(kin: &Kinematics3D, exec: Execution) -> f64 {
    let g = kin.grid();
    let vals = map_range(exec, g.len(), |j| {
        let r = g.node(j);
        r * r * angular_energy_3d(kin, j)
    });
    trapezoid(&vals, g.dr()).sqrt()
}

/// `sqrt(int |v|^2 r dr dtheta)` for the single-angle models.
pub fn l2_velocity_norm_reduced(kin: &KinematicsReduced) -> f64 {
    let g = kin.grid();
    let w = kin.omega();
    let f = match kin.kind() {
        crate::reduced::ReducedKind::Polar2d => 1.0,
        crate::reduced::ReducedKind::Cone => 2.0,
    };
    let vals: Vec<f64> = (0..g.len())
        .map(|j| {
            if j == 0 {
                return 0.0;
            }
            let r = g.node(j);
            let (d, dp) = kin.node_coeffs(j);
            let mut e = 0.0;
            for k in 0..d.len() {
                let wk = w * k as f64;
                let v1 = f * wk * wk * d[k] / r;
                let radial = match kin.kind() {
                    crate::reduced::ReducedKind::Polar2d => dp[k],
                    crate::reduced::ReducedKind::Cone => dp[k] + d[k] / r,
                };
                let v2 = wk * radial;
                e += cos_weight_sq(k, w) * (v1 * v1 + v2 * v2);
            }
            r * e
        })
        .collect();
    trapezoid(&vals, g.dr()).sqrt()
}

/// Projection of the 3D nonlinear term on the constant mode at every node;
/// zero at both ends.
pub fn compat_residual_00(state: &State3D, grid: &RadialGrid, exec: Execution) -> Vec<f64> {
    let dp = radial_derivative(&state.d, grid.dr(), 1);
    let m = grid.intervals();
    map_range(exec, m + 1, |j| {
        if j == 0 || j == m {
            return 0.0;
        }
        nl_3d(&state.c[j], &state.d[j], &dp[j], grid.node(j), 0, 0)
    })
}

/// Quadrature values of the two 3D integral identities,
/// `first = int[(Lap Psi)^2 / r^2 - |grad Psi_r|^2 / 2 - |grad Psi|^2 / r^2]`
/// and `second = int[-(Lap Psi)^2 + r^2 |grad Psi_r|^2 / 2]`, both over
/// `dtheta dphi dr`. `Lap` and `grad` act on the angles only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functionals3D {
    pub first: f64,
    pub second: f64,
}

pub fn identity_functionals_3d(kin: &Kinematics3D) -> Functionals3D {
    let g = kin.grid();
    let w = kin.omega();
    let w2 = w * w;
    let np = kin.n() + 1;
    let mut f1 = Vec::with_capacity(g.len());
    let mut f2 = Vec::with_capacity(g.len());
    for j in 0..g.len() {
        let r = g.node(j);
        let (d, dp) = kin.node_coeffs(j);
        let (mut lap2, mut gradr2) = (0.0, 0.0);
        // (Lap Psi)^2 / r^2 and |grad Psi|^2 / r^2 at r = 0 use d / r -> d'.
        let (mut lap2_r, mut grad2_r) = (0.0, 0.0);
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let s = (k * k + i * i) as f64;
                let wt = cos_weight_sq(k, w) * cos_weight_sq(i, w);
                let q = if j == 0 { dp[idx] } else { d[idx] / r };
                lap2 += wt * w2 * w2 * s * s * d[idx] * d[idx];
                gradr2 += wt * w2 * s * dp[idx] * dp[idx];
                lap2_r += wt * w2 * w2 * s * s * q * q;
                grad2_r += wt * w2 * s * q * q;
            }
        }
        f1.push(lap2_r - 0.5 * gradr2 - grad2_r);
        f2.push(-lap2 + 0.5 * r * r * gradr2);
    }
    Functionals3D {
        first: trapezoid(&f1, g.dr()),
        second: trapezoid(&f2, g.dr()),
    }
}

/// The two 2D identities: `first = -1/2 int Psi_{r theta}^2` and
/// `second = -int Psi_{theta theta}^2 / r`, over `dtheta dr`. Both are
/// non-positive by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functionals2D {
    pub first: f64,
    pub second: f64,
}

pub fn identity_functionals_2d(kin: &KinematicsReduced) -> Functionals2D {
    let g = kin.grid();
    let w = kin.omega();
    let mut fa = Vec::with_capacity(g.len());
    let mut fb = Vec::with_capacity(g.len());
    for j in 0..g.len() {
        let r = g.node(j);
        let (d, dp) = kin.node_coeffs(j);
        let (mut a, mut b) = (0.0, 0.0);
        for k in 0..d.len() {
            let wk = w * k as f64;
            let wt = cos_weight_sq(k, w);
            a += wt * wk * wk * dp[k] * dp[k];
            if j > 0 {
                b += wt * wk.powi(4) * d[k] * d[k] / r;
            }
        }
        fa.push(-0.5 * a);
        fb.push(-b);
    }
    Functionals2D {
        first: trapezoid(&fa, g.dr()),
        second: trapezoid(&fb, g.dr()),
    }
}

/// `int int NL dtheta dr` for a single-angle model: the period length times
/// the radial integral of the mode-0 projection.
pub fn compat_integral_reduced(state: &ReducedState, params: &ReducedParams) -> f64 {
    let nl0 = nl_profile(state, params, 0);
    2.0 * PI / params.omega * trapezoid(&nl0, params.grid.dr())
}

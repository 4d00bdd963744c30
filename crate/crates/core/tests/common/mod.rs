//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls the crate's projection or assembly code: the
//! brackets are evaluated pointwise in physical space on a periodic grid and
//! projected with plain trapezoid sums.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringlab::spectral::{CosineField1D, CosineField2D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_field_2d(rng: &mut ChaCha8Rng, omega: f64, n: usize) -> CosineField2D {
    CosineField2D::from_coeffs(omega, n, random_vec(rng, (n + 1) * (n + 1))).unwrap()
}

pub fn random_field_1d(rng: &mut ChaCha8Rng, omega: f64, n: usize) -> CosineField1D {
    CosineField1D::new(omega, random_vec(rng, n + 1)).unwrap()
}

/// Periodic grid `x_a = -pi/w + a h`, `h = 2 pi / (w p)`.
fn grid(omega: f64, p: usize) -> Vec<f64> {
    let h = 2.0 * PI / (omega * p as f64);
    (0..p).map(|a| -PI / omega + a as f64 * h).collect()
}

fn norm(k: usize, omega: f64) -> f64 {
    if k == 0 {
        2.0 * PI / omega
    } else {
        PI / omega
    }
}

/// `sum a_k cos(w k x)` and its first and second derivatives.
fn series(a: &[f64], omega: f64, x: f64) -> (f64, f64, f64) {
    let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
    for (k, ak) in a.iter().enumerate() {
        let wk = omega * k as f64;
        f += ak * (wk * x).cos();
        f1 -= ak * wk * (wk * x).sin();
        f2 -= ak * wk * wk * (wk * x).cos();
    }
    (f, f1, f2)
}

/// Values and angular derivatives of a 2D cosine series at a point:
/// `(f, f_theta, f_phi, f_thetatheta + f_phiphi)`.
fn series_2d(a: &[f64], n: usize, omega: f64, th: f64, ph: f64) -> [f64; 4] {
    let np = n + 1;
    let mut out = [0.0; 4];
    for k in 0..np {
        let wk = omega * k as f64;
        let (ck, sk) = ((wk * th).cos(), (wk * th).sin());
        for i in 0..np {
            let wi = omega * i as f64;
            let (ci, si) = ((wi * ph).cos(), (wi * ph).sin());
            let v = a[k * np + i];
            out[0] += v * ck * ci;
            out[1] -= v * wk * sk * ci;
            out[2] -= v * wi * ck * si;
            out[3] -= v * (wk * wk + wi * wi) * ck * ci;
        }
    }
    out
}

/// Projection of `(1/r)[-grad u . grad(Psi_r + Psi/r) + Lap Psi Lap(Psi_r - Psi/r)]`
/// onto `cos(w n theta) cos(w l phi)`, on a `p x p` periodic grid.
pub fn nl_3d_oracle(
    c: &CosineField2D,
    d: &CosineField2D,
    dp: &CosineField2D,
    r: f64,
    n: usize,
    l: usize,
    p: usize,
) -> f64 {
    let omega = c.omega();
    let nn = c.n();
    let phi: Vec<f64> = dp.coeffs().iter().zip(d.coeffs()).map(|(a, b)| a + b / r).collect();
    let hh: Vec<f64> = dp.coeffs().iter().zip(d.coeffs()).map(|(a, b)| a - b / r).collect();
    let xs = grid(omega, p);
    let h = 2.0 * PI / (omega * p as f64);
    let mut sum = 0.0;
    for &th in &xs {
        for &ph in &xs {
            let u = series_2d(c.coeffs(), nn, omega, th, ph);
            let f = series_2d(&phi, nn, omega, th, ph);
            let psi = series_2d(d.coeffs(), nn, omega, th, ph);
            let hv = series_2d(&hh, nn, omega, th, ph);
            let bracket = (-(u[1] * f[1] + u[2] * f[2]) + psi[3] * hv[3]) / r;
            sum += bracket * (omega * n as f64 * th).cos() * (omega * l as f64 * ph).cos();
        }
    }
    sum * h * h / (norm(n, omega) * norm(l, omega))
}

/// Which single-angle bracket to evaluate.
#[derive(Clone, Copy, Debug)]
pub enum Bracket {
    /// `(1/r)[-u_th (Psi_r)_th + Psi_thth (Psi_r - Psi/r)_thth]`
    Polar,
    /// `(1/r)[-u_th (Psi_r + Psi/r)_th + 4 Psi_thth (Psi_r - Psi/r)_thth]`
    Cone,
}

#[allow(clippy::too_many_arguments)]
pub fn nl_reduced_oracle(b: Bracket, c: &[f64], d: &[f64], dp: &[f64], r: f64, n: usize, omega: f64, p: usize) -> f64 {
    let g: Vec<f64> = match b {
        Bracket::Polar => dp.to_vec(),
        Bracket::Cone => dp.iter().zip(d).map(|(a, b)| a + b / r).collect(),
    };
    let f = match b {
        Bracket::Polar => 1.0,
        Bracket::Cone => 4.0,
    };
    let hh: Vec<f64> = dp.iter().zip(d).map(|(a, b)| a - b / r).collect();
    let xs = grid(omega, p);
    let h = 2.0 * PI / (omega * p as f64);
    let mut sum = 0.0;
    for &th in &xs {
        let u = series(c, omega, th);
        let gv = series(&g, omega, th);
        let psi = series(d, omega, th);
        let hv = series(&hh, omega, th);
        let bracket = (-u.1 * gv.1 + f * psi.2 * hv.2) / r;
        sum += bracket * (omega * n as f64 * th).cos();
    }
    sum * h / norm(n, omega)
}

/// Projection of `-mu1 u_x Psi_x + mu2 Psi_xx^2` for the 1D model problem,
/// where `c` and `d` are the coefficients of `u` and `Psi`.
pub fn toy_nl_oracle(c: &[f64], d: &[f64], mu1: f64, mu2: f64, omega: f64, n: usize, p: usize) -> f64 {
    let xs = grid(omega, p);
    let h = 2.0 * PI / (omega * p as f64);
    let mut sum = 0.0;
    for &x in &xs {
        let u = series(c, omega, x);
        let psi = series(d, omega, x);
        let v = -mu1 * u.1 * psi.1 + mu2 * psi.2 * psi.2;
        sum += v * (omega * n as f64 * x).cos();
    }
    sum * h / norm(n, omega)
}

/// Error ratio `e(M) / e(2M)` pairs for a sequence of errors.
pub fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

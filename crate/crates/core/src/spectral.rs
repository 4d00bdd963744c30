//! Cosine-series fields on the angular interval `[-pi/omega, pi/omega]`.
//!
//! Every angular unknown is expanded in `cos(omega k x)`, which satisfies the
//! homogeneous Neumann condition at both ends of the interval. Products of two
//! series are projected back onto the basis with the product-to-sum identities
//! ([`cos_cos_project`], [`sin_sin_project`]); [`project_quadrature`] is the
//! independent physical-space route used to check them.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// One-dimensional truncated cosine series `sum_k c_k cos(omega k phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosineField1D {
    omega: f64,
    coeffs: Vec<f64>,
}

impl CosineField1D {
    /// Builds a field from `c_0..c_N`. Requires `omega > 0`, `N >= 1` and
    /// finite coefficients.
    pub fn new(omega: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_omega(omega)?;
        if coeffs.len() < 2 {
            return Err(invalid("coeffs", "truncation N must be at least 1"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeffs", "coefficients must be finite"));
        }
        Ok(Self { omega, coeffs })
    }

    pub fn zeros(omega: f64, n: usize) -> Result<Self> {
        Self::new(omega, vec![0.0; n.max(1) + 1])
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Highest retained mode index `N`.
    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Half-width `pi/omega` of the angular interval.
    pub fn half_width(&self) -> f64 {
        PI / self.omega
    }
}

/// Two-dimensional series `sum_{k,i} c_{ki} cos(omega k theta) cos(omega i phi)`,
/// stored row-major in `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosineField2D {
    omega: f64,
    n: usize,
    coeffs: Vec<f64>,
}

impl CosineField2D {
    pub fn zeros(omega: f64, n: usize) -> Result<Self> {
        check_omega(omega)?;
        if n < 1 {
            return Err(invalid("N", "truncation N must be at least 1"));
        }
        Ok(Self {
            omega,
            n,
            coeffs: vec![0.0; (n + 1) * (n + 1)],
        })
    }

    /// Builds a field from a row-major `(N+1) x (N+1)` coefficient block.
    pub fn from_coeffs(omega: f64, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut f = Self::zeros(omega, n)?;
        if coeffs.len() != f.coeffs.len() {
            return Err(invalid("coeffs", "expected (N+1)^2 entries"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeffs", "coefficients must be finite"));
        }
        f.coeffs = coeffs;
        Ok(f)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.coeffs[k * (self.n + 1) + i]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, value: f64) {
        self.coeffs[k * (self.n + 1) + i] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Largest `|c_ki - c_ik|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=self.n {
            for i in k + 1..=self.n {
                worst = worst.max((self.get(k, i) - self.get(i, k)).abs());
            }
        }
        worst
    }
}

/// A point `(theta, phi)` of the closed angular square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularPoint {
    pub theta: f64,
    pub phi: f64,
}

impl AngularPoint {
    /// Checks that both angles lie in `[-pi/omega, pi/omega]`.
    pub fn new(theta: f64, phi: f64, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        let h = PI / omega * (1.0 + 1e-12);
        if !(theta.abs() <= h && phi.abs() <= h) {
            return Err(invalid("point", "angles outside the closed angular square"));
        }
        Ok(Self { theta, phi })
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(invalid("omega", "must be a positive finite number"))
    }
}

/// Direct summation of a cosine series.
pub fn eval_1d(f: &CosineField1D, phi: f64) -> f64 {
    eval_cos_series(f.coeffs(), f.omega(), phi)
}

/// Derivative of [`eval_1d`] with respect to `phi` (a pure sine series).
pub fn eval_1d_derivative(f: &CosineField1D, phi: f64) -> f64 {
    -f.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| f.omega() * k as f64 * c * (f.omega() * k as f64 * phi).sin())
        .sum::<f64>()
}

pub fn eval_cos_series(coeffs: &[f64], omega: f64, x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * (omega * k as f64 * x).cos())
        .sum()
}

pub fn eval_sin_series(coeffs: &[f64], omega: f64, x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * (omega * k as f64 * x).sin())
        .sum()
}

pub fn eval_2d(f: &CosineField2D, p: AngularPoint) -> f64 {
    let n = f.n();
    let ct: Vec<f64> = (0..=n).map(|k| (f.omega() * k as f64 * p.theta).cos()).collect();
    let cp: Vec<f64> = (0..=n).map(|i| (f.omega() * i as f64 * p.phi).cos()).collect();
    let mut sum = 0.0;
    for (k, a) in ct.iter().enumerate() {
        for (i, b) in cp.iter().enumerate() {
            sum += f.get(k, i) * a * b;
        }
    }
    sum
}

/// Weight with which the basis product `b_k(x) b_m(x)` contributes to
/// `cos(omega n x)` when both factors are cosines.
#[inline]
pub(crate) fn cos_weight(k: usize, m: usize, n: usize) -> f64 {
    let mut w = 0.0;
    if k + m == n {
        w += 0.5;
    }
    if k.abs_diff(m) == n {
        w += 0.5;
    }
    w
}

/// Same as [`cos_weight`] for two sine factors.
#[inline]
pub(crate) fn sin_weight(k: usize, m: usize, n: usize) -> f64 {
    let mut w = 0.0;
    if k + m == n {
        w -= 0.5;
    }
    if k.abs_diff(m) == n {
        w += 0.5;
    }
    w
}

/// Partner indices `m` for which `k + m == n` or `|k - m| == n`, each listed once.
#[inline]
pub(crate) fn partners(k: usize, n: usize, limit: usize) -> impl Iterator<Item = usize> {
    let a = n.checked_sub(k);
    let b = k.checked_sub(n);
    let c = k + n;
    let mut out = [None; 3];
    out[0] = a;
    if b != a {
        out[1] = b;
    }
    if Some(c) != a && Some(c) != b {
        out[2] = Some(c);
    }
    out.into_iter().flatten().filter(move |&m| m <= limit)
}

/// `cos(omega n x)`-coefficient of `(sum a_k cos)(sum b_m cos)`.
///
/// Sums over ordered pairs `(k, m)`; for `n = 0` this reduces to
/// `a_0 b_0 + 1/2 sum_{k>=1} a_k b_k`.
pub fn cos_cos_project(a: &[f64], b: &[f64], n: usize) -> f64 {
    let limit = b.len().saturating_sub(1);
    let mut sum = 0.0;
    for (k, ak) in a.iter().enumerate() {
        for m in partners(k, n, limit) {
            sum += cos_weight(k, m, n) * ak * b[m];
        }
    }
    sum
}

/// `cos(omega n x)`-coefficient of `(sum a_k sin)(sum b_m sin)`.
///
/// Index 0 of either slice multiplies `sin 0 = 0` and is ignored.
pub fn sin_sin_project(a: &[f64], b: &[f64], n: usize) -> f64 {
    let limit = b.len().saturating_sub(1);
    let mut sum = 0.0;
    for (k, ak) in a.iter().enumerate().skip(1) {
        for m in partners(k, n, limit).filter(|&m| m > 0) {
            sum += sin_weight(k, m, n) * ak * b[m];
        }
    }
    sum
}

/// Uniform nodes `phi_j = j pi / (omega p)`, `j = 0..=p`, on the half interval.
pub fn half_interval_nodes(omega: f64, p: usize) -> Vec<f64> {
    (0..=p).map(|j| j as f64 * PI / (omega * p as f64)).collect()
}

/// Projects samples of an even function onto `c_0..c_N`.
///
/// `samples[j]` is the value at `phi_j = j pi / (omega p)`, `j = 0..=p`
/// (see [`half_interval_nodes`]). The samples are even-extended to the full
/// period, `2p` points, and integrated with the periodic trapezoid rule, which
/// is exact for trigonometric polynomials of degree below `2p - N`. The full
/// period must carry at least `4N` points.
pub fn project_quadrature(samples: &[f64], n: usize) -> Result<Vec<f64>> {
    let p = samples.len().saturating_sub(1);
    if p == 0 || 2 * p < 4 * n.max(1) {
        return Err(Error::InsufficientSamples {
            required: 2 * n.max(1) + 1,
            got: samples.len(),
        });
    }
    let mut out = vec![0.0; n + 1];
    for (k, ck) in out.iter_mut().enumerate() {
        // periodic trapezoid on the even extension: endpoints once, interior twice
        let mut sum = 0.0;
        for (j, s) in samples.iter().enumerate() {
            let w = if j == 0 || j == p { 1.0 } else { 2.0 };
            sum += w * s * (PI * (k * j) as f64 / p as f64).cos();
        }
        *ck = if k == 0 { sum / (2 * p) as f64 } else { sum / p as f64 };
    }
    Ok(out)
}

/// Samples `f` on the half-interval nodes and projects it onto `c_0..c_N`.
pub fn project_fn(omega: f64, n: usize, p: usize, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let samples: Vec<f64> = half_interval_nodes(omega, p).into_iter().map(f).collect();
    project_quadrature(&samples, n)
}

/// Tensor-product version of [`project_quadrature`]: `samples[a][b]` is the
/// value at `(theta_a, phi_b)` on the half-interval nodes. Returns a row-major
/// `(N+1) x (N+1)` block.
pub fn project_quadrature_2d(samples: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    // project along phi for every theta row, then along theta for every mode i
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|row| project_quadrature(row, n))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; (n + 1) * (n + 1)];
    for i in 0..=n {
        let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let proj = project_quadrature(&column, n)?;
        for (k, v) in proj.into_iter().enumerate() {
            out[k * (n + 1) + i] = v;
        }
    }
    Ok(out)
}

//! Full 3D reduction: `u` and `Psi` expanded in `cos(omega k theta) cos(omega i phi)`
//! with radial coefficient profiles on a uniform grid.
//!
//! The u-coefficients evolve by explicit Euler,
//! `dc_nl/dt = nu [(2 - (n^2+l^2) w^2) c/r^2 + c'' - 2c'/r] - NL_nl`,
//! and after every step the Psi-coefficients are recovered from the mode
//! relation `-(n^2+l^2) w^2 d + r^2 d'' + 2 r d' = c`. The `(0,0)` mode is
//! held at zero.

use serde::{Deserialize, Serialize};

use crate::diagnostics::norms::{compat_residual_00, l2_velocity_norm_3d};
use crate::diagnostics::onset::{OnsetDetector, TailAccumulator, DEFAULT_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::model1d::Run;
use crate::par::{map_range, Execution};
use crate::radial::{first_derivative, second_derivative, ModeOperator, RadialGrid};
use crate::report::{Cadence, CoeffEntry, DiagnosticRow, Profile, RunReport, Snapshot};
use crate::spectral::{cos_weight, partners, sin_weight, AngularPoint, CosineField2D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params3D {
    pub nu: f64,
    pub omega: f64,
    pub n: usize,
    pub grid: RadialGrid,
    pub dt: f64,
    pub t_final: f64,
    /// `+1` or `-1`, multiplies the initial datum.
    pub init_sign: f64,
    /// Diagnostic switch: `false` drops the nonlinear term.
    pub nl_enabled: bool,
}

impl Params3D {
    /// `nu = .02`, `omega = 4`, `N = 7`, `r_M = 10` with 73 intervals,
    /// `dt = 1e-4`, `T = .11`.
    pub fn reference() -> Self {
        Self {
            nu: 0.02,
            omega: 4.0,
            n: 7,
            grid: RadialGrid::new(10.0, 73).expect("valid grid"),
            dt: 1e-4,
            t_final: 0.11,
            init_sign: 1.0,
            nl_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(invalid("nu", "must be finite and non-negative"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(invalid("omega", "must be positive"));
        }
        if self.n < 1 {
            return Err(invalid("N", "must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid("t_final", "must be positive"));
        }
        if self.init_sign.abs() != 1.0 {
            return Err(invalid("sign", "must be +1 or -1"));
        }
        Ok(())
    }

    /// `0.5 / scale` with `scale = nu (2 N^2 w^2 + 2) / r_1^2`.
    pub fn stability_limit(&self) -> f64 {
        let r1 = self.grid.dr();
        let scale = self.nu * (2.0 * (self.n * self.n) as f64 * self.omega * self.omega + 2.0) / (r1 * r1);
        if scale > 0.0 {
            0.5 / scale
        } else {
            f64::INFINITY
        }
    }

    pub fn check_stability(&self) -> Result<()> {
        let limit = self.stability_limit();
        if self.dt > limit {
            return Err(Error::UnstableStep { dt: self.dt, limit });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State3D {
    pub t: f64,
    /// u-coefficients, one field per radial node.
    pub c: Vec<CosineField2D>,
    /// Psi-coefficients, one field per radial node.
    pub d: Vec<CosineField2D>,
}

impl State3D {
    pub fn zeros(params: &Params3D) -> Result<Self> {
        let f = CosineField2D::zeros(params.omega, params.n)?;
        Ok(Self {
            t: 0.0,
            c: vec![f.clone(); params.grid.len()],
            d: vec![f; params.grid.len()],
        })
    }

    /// Largest `|c_ki - c_ik|` over all nodes.
    pub fn asymmetry(&self) -> f64 {
        self.c.iter().map(|f| f.asymmetry()).fold(0.0, f64::max)
    }

    pub fn max_abs_c(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|f| f.coeffs().iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c
            .iter()
            .chain(&self.d)
            .all(|f| f.coeffs().iter().all(|v| v.is_finite()))
    }
}

/// Factored radial operators for every mode except `(0,0)`.
#[derive(Clone, Debug)]
pub struct Psi3DSolver {
    n: usize,
    grid: RadialGrid,
    ops: Vec<Option<ModeOperator>>,
}

impl Psi3DSolver {
    pub fn new(grid: &RadialGrid, omega: f64, n: usize) -> Result<Self> {
        let mut ops = Vec::with_capacity((n + 1) * (n + 1));
        for k in 0..=n {
            for i in 0..=n {
                if k == 0 && i == 0 {
                    ops.push(None);
                    continue;
                }
                let mu = ((k * k + i * i) as f64) * omega * omega;
                ops.push(Some(ModeOperator::new(mu, 2.0, grid, || format!("({k},{i})"))?));
            }
        }
        Ok(Self { n, grid: *grid, ops })
    }

    pub fn solve(&self, c: &[CosineField2D], exec: Execution) -> Vec<CosineField2D> {
        let nodes = self.grid.len();
        let profiles = map_range(exec, self.ops.len(), |idx| {
            self.ops[idx].as_ref().map(|op| {
                let rhs: Vec<f64> = c.iter().map(|f| f.coeffs()[idx]).collect();
                op.solve(&rhs)
            })
        });
        let mut d: Vec<CosineField2D> = c.to_vec();
        for (j, field) in d.iter_mut().enumerate().take(nodes) {
            let coeffs = field.coeffs_mut();
            for (idx, p) in profiles.iter().enumerate() {
                coeffs[idx] = p.as_ref().map_or(0.0, |p| p[j]);
            }
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `d` from `c` through the per-mode radial relation, `d_00 = 0`.
pub fn solve_psi_from_u(
    c: &[CosineField2D],
    grid: &RadialGrid,
    omega: f64,
    exec: Execution,
) -> Result<Vec<CosineField2D>> {
    let n = c.first().map(|f| f.n()).ok_or_else(|| invalid("c", "empty state"))?;
    if c.len() != grid.len() {
        return Err(invalid("c", "one field per radial node is required"));
    }
    Ok(Psi3DSolver::new(grid, omega, n)?.solve(c, exec))
}

/// `u_0 = sign (r^7 / r_M^4)(r_M - r)[cos cos + cos + cos]`, i.e.
/// `c_10 = c_01 = c_11`, with `d` solved from it.
pub fn init_u0(params: &Params3D) -> Result<State3D> {
    params.validate()?;
    let mut state = State3D::zeros(params)?;
    let rm = params.grid.r_max();
    for (j, f) in state.c.iter_mut().enumerate() {
        let r = params.grid.node(j);
        let v = params.init_sign * r.powi(7) / rm.powi(4) * (rm - r);
        f.set(1, 0, v);
        f.set(0, 1, v);
        f.set(1, 1, v);
    }
    state.d = solve_psi_from_u(&state.c, &params.grid, params.omega, Execution::Serial)?;
    Ok(state)
}

/// Radial derivative of every coefficient, node by node, with the
/// stencils of [`first_derivative`] / [`second_derivative`].
pub fn radial_derivative(fields: &[CosineField2D], h: f64, order: u8) -> Vec<CosineField2D> {
    let mut out = fields.to_vec();
    let len = fields[0].coeffs().len();
    for idx in 0..len {
        let profile: Vec<f64> = fields.iter().map(|f| f.coeffs()[idx]).collect();
        let der = if order == 1 {
            first_derivative(&profile, h)
        } else {
            second_derivative(&profile, h)
        };
        for (f, v) in out.iter_mut().zip(der) {
            f.coeffs_mut()[idx] = v;
        }
    }
    out
}

/// Per-node inputs of the nonlinear assembly.
struct NlInputs {
    /// `c_ki`
    a: Vec<f64>,
    /// `d'_mj + d_mj / r`
    phi: Vec<f64>,
    /// `(k^2 + i^2) d_ki`
    b: Vec<f64>,
    /// `(m^2 + j^2)(d'_mj - d_mj / r)`
    x: Vec<f64>,
}

impl NlInputs {
    fn new(c: &CosineField2D, d: &CosineField2D, dp: &CosineField2D, r: f64) -> Self {
        let n = c.n();
        let np = n + 1;
        let mut phi = vec![0.0; np * np];
        let mut b = vec![0.0; np * np];
        let mut x = vec![0.0; np * np];
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let (dv, dpv) = (d.coeffs()[idx], dp.coeffs()[idx]);
                let s = (k * k + i * i) as f64;
                phi[idx] = dpv + dv / r;
                b[idx] = s * dv;
                x[idx] = s * (dpv - dv / r);
            }
        }
        Self {
            a: c.coeffs().to_vec(),
            phi,
            b,
            x,
        }
    }

    fn project(&self, n: usize, nn: usize, ll: usize, omega: f64, r: f64) -> f64 {
        let np = n + 1;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..np {
            for m in partners(k, nn, n) {
                let (pck, psk) = (cos_weight(k, m, nn), sin_weight(k, m, nn));
                let km = (k * m) as f64;
                for i in 0..np {
                    let aki = self.a[k * np + i];
                    let bki = self.b[k * np + i];
                    if aki == 0.0 && bki == 0.0 {
                        continue;
                    }
                    for j in partners(i, ll, n) {
                        let (pci, psi) = (cos_weight(i, j, ll), sin_weight(i, j, ll));
                        let idx = m * np + j;
                        let grad = km * psk * pci + (i * j) as f64 * pck * psi;
                        s1 += grad * aki * self.phi[idx];
                        s2 += pck * pci * bki * self.x[idx];
                    }
                }
            }
        }
        let w2 = omega * omega;
        (-w2 * s1 + w2 * w2 * s2) / r
    }
}

/// Nonlinear contribution `NL_nl` at one node of radius `r > 0`:
/// the projection of `(1/r)[-grad u . grad Phi + Lap Psi Lap(Psi_r - Psi/r)]`,
/// `Phi = Psi_r + Psi/r`, onto `cos(w n theta) cos(w l phi)`.
pub fn nl_3d(c: &CosineField2D, d: &CosineField2D, d_dr: &CosineField2D, r: f64, n: usize, l: usize) -> f64 {
    NlInputs::new(c, d, d_dr, r).project(c.n(), n, l, c.omega(), r)
}

/// [`nl_3d`] for every mode of one node, row-major.
pub fn nl_3d_node(c: &CosineField2D, d: &CosineField2D, d_dr: &CosineField2D, r: f64) -> Vec<f64> {
    let n = c.n();
    let inputs = NlInputs::new(c, d, d_dr, r);
    let mut out = Vec::with_capacity((n + 1) * (n + 1));
    for nn in 0..=n {
        for ll in 0..=n {
            out.push(inputs.project(n, nn, ll, c.omega(), r));
        }
    }
    out
}

/// `nu [(2 - (n^2+l^2) w^2) c/r^2 + c'' - 2 c'/r]` at an interior node from
/// the central stencils on `(c_prev, c_here, c_next)`.
#[allow(clippy::too_many_arguments)]
pub fn viscous_3d(
    c_prev: f64,
    c_here: f64,
    c_next: f64,
    h: f64,
    r: f64,
    n: usize,
    l: usize,
    nu: f64,
    omega: f64,
) -> f64 {
    if nu == 0.0 {
        return 0.0;
    }
    let d1 = (c_next - c_prev) / (2.0 * h);
    let d2 = (c_next - 2.0 * c_here + c_prev) / (h * h);
    let s = (n * n + l * l) as f64 * omega * omega;
    nu * ((2.0 - s) * c_here / (r * r) + d2 - 2.0 * d1 / r)
}

/// One explicit Euler step followed by the Psi solve.
pub fn step_3d(state: &State3D, params: &Params3D, solver: &Psi3DSolver, exec: Execution) -> Result<State3D> {
    let grid = &params.grid;
    let m = grid.intervals();
    let h = grid.dr();
    let n = params.n;
    let np = n + 1;
    let dp = radial_derivative(&state.d, h, 1);
    let interior = map_range(exec, m - 1, |jj| {
        let j = jj + 1;
        let r = grid.node(j);
        let (cp, ch, cn) = (state.c[j - 1].coeffs(), state.c[j].coeffs(), state.c[j + 1].coeffs());
        let nl = if params.nl_enabled {
            nl_3d_node(&state.c[j], &state.d[j], &dp[j], r)
        } else {
            vec![0.0; np * np]
        };
        let mut next = ch.to_vec();
        for k in 0..np {
            for i in 0..np {
                if k == 0 && i == 0 {
                    continue;
                }
                let idx = k * np + i;
                let visc = viscous_3d(cp[idx], ch[idx], cn[idx], h, r, k, i, params.nu, params.omega);
                next[idx] = ch[idx] + params.dt * (visc - nl[idx]);
            }
        }
        next
    });
    let t = state.t + params.dt;
    let mut c = Vec::with_capacity(m + 1);
    c.push(CosineField2D::zeros(params.omega, n)?);
    for coeffs in interior {
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { t });
        }
        c.push(CosineField2D::from_coeffs(params.omega, n, coeffs)?);
    }
    c.push(CosineField2D::zeros(params.omega, n)?);
    let d = solver.solve(&c, exec);
    if d.iter().any(|f| f.coeffs().iter().any(|v| !v.is_finite())) {
        return Err(Error::Overflow { t });
    }
    Ok(State3D { t, c, d })
}

/// Angular basis values at one point.
pub(crate) struct Trig {
    pub ct: Vec<f64>,
    pub st: Vec<f64>,
    pub cp: Vec<f64>,
    pub sp: Vec<f64>,
}

impl Trig {
    pub fn new(n: usize, omega: f64, p: AngularPoint) -> Self {
        let f = |x: f64, g: fn(f64) -> f64| (0..=n).map(|k| g(omega * k as f64 * x)).collect();
        Self {
            ct: f(p.theta, f64::cos),
            st: f(p.theta, f64::sin),
            cp: f(p.phi, f64::cos),
            sp: f(p.phi, f64::sin),
        }
    }
}

/// `d`, `d'` and `d''` at every node; evaluates velocity, forcing and
/// divergence at arbitrary points.
#[derive(Clone, Debug)]
pub struct Kinematics3D {
    grid: RadialGrid,
    omega: f64,
    n: usize,
    d: Vec<CosineField2D>,
    dp: Vec<CosineField2D>,
    dpp: Vec<CosineField2D>,
}

/// Coefficients interpolated to one radius.
struct Local {
    d: Vec<f64>,
    dp: Vec<f64>,
    dpp: Vec<f64>,
}

impl Kinematics3D {
    pub fn new(state: &State3D, grid: &RadialGrid) -> Self {
        let h = grid.dr();
        Self {
            grid: *grid,
            omega: state.d[0].omega(),
            n: state.d[0].n(),
            d: state.d.clone(),
            dp: radial_derivative(&state.d, h, 1),
            dpp: radial_derivative(&state.d, h, 2),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    fn local(&self, r: f64) -> Local {
        let m = self.grid.intervals();
        let s = (r / self.grid.dr()).clamp(0.0, m as f64);
        let j = (s.floor() as usize).min(m - 1);
        let w = s - j as f64;
        let lerp = |f: &[CosineField2D]| -> Vec<f64> {
            f[j].coeffs()
                .iter()
                .zip(f[j + 1].coeffs())
                .map(|(a, b)| if w == 0.0 { *a } else { (1.0 - w) * a + w * b })
                .collect()
        };
        Local {
            d: lerp(&self.d),
            dp: lerp(&self.dp),
            dpp: lerp(&self.dpp),
        }
    }

    fn local_at_node(&self, j: usize) -> Local {
        Local {
            d: self.d[j].coeffs().to_vec(),
            dp: self.dp[j].coeffs().to_vec(),
            dpp: self.dpp[j].coeffs().to_vec(),
        }
    }

    fn velocity_local(&self, loc: &Local, r: f64, t: &Trig) -> [f64; 3] {
        let np = self.n + 1;
        let w = self.omega;
        let (mut v1, mut v2, mut v3) = (0.0, 0.0, 0.0);
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let d = loc.d[idx];
                let phi = loc.dp[idx] + d / r;
                v1 -= (k * k + i * i) as f64 * d * t.ct[k] * t.cp[i];
                v2 += k as f64 * phi * t.st[k] * t.cp[i];
                v3 += i as f64 * phi * t.ct[k] * t.sp[i];
            }
        }
        [w * w * v1 / r, w * v2, w * v3]
    }

    /// `(v1, v2, v3) = (Lap Psi / r, -Phi_theta, -Phi_phi)`; zero at `r = 0`.
    pub fn velocity_at(&self, r: f64, p: AngularPoint) -> [f64; 3] {
        if r <= 0.0 {
            return [0.0; 3];
        }
        let t = Trig::new(self.n, self.omega, p);
        self.velocity_local(&self.local(r), r, &t)
    }

    /// Velocity at grid node `j` (no interpolation).
    pub fn velocity_at_node(&self, j: usize, p: AngularPoint) -> [f64; 3] {
        let r = self.grid.node(j);
        if j == 0 {
            return [0.0; 3];
        }
        let t = Trig::new(self.n, self.omega, p);
        self.velocity_local(&self.local_at_node(j), r, &t)
    }

    /// `(f2, f3) = v1 (d_r v + v / r)` for the two angular components.
    pub fn forcing_at(&self, r: f64, p: AngularPoint) -> [f64; 2] {
        if r <= 0.0 {
            return [0.0; 2];
        }
        let t = Trig::new(self.n, self.omega, p);
        let loc = self.local(r);
        let v = self.velocity_local(&loc, r, &t);
        let np = self.n + 1;
        let w = self.omega;
        let (mut g2, mut g3) = (0.0, 0.0);
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let (d, dp, dpp) = (loc.d[idx], loc.dp[idx], loc.dpp[idx]);
                // d_r Phi and Phi / r
                let dphi = dpp + dp / r - d / (r * r);
                let phi_r = (dp + d / r) / r;
                let s = dphi + phi_r;
                g2 += w * k as f64 * s * t.st[k] * t.cp[i];
                g3 += w * i as f64 * s * t.ct[k] * t.sp[i];
            }
        }
        [v[0] * g2, v[0] * g3]
    }

    /// Same forcing written as `-(Lap Psi / r^2) d_r d_theta (r Phi)`.
    pub fn forcing_dual_at(&self, r: f64, p: AngularPoint) -> [f64; 2] {
        if r <= 0.0 {
            return [0.0; 2];
        }
        let t = Trig::new(self.n, self.omega, p);
        let loc = self.local(r);
        let np = self.n + 1;
        let w = self.omega;
        let (mut lap, mut h2, mut h3) = (0.0, 0.0, 0.0);
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let (d, dp, dpp) = (loc.d[idx], loc.dp[idx], loc.dpp[idx]);
                lap -= w * w * (k * k + i * i) as f64 * d * t.ct[k] * t.cp[i];
                // d_r (r Phi) = r d'' + 2 d'
                let g = r * dpp + 2.0 * dp;
                h2 -= w * k as f64 * g * t.st[k] * t.cp[i];
                h3 -= w * i as f64 * g * t.ct[k] * t.sp[i];
            }
        }
        [-lap / (r * r) * h2, -lap / (r * r) * h3]
    }

    /// `d_r v1 + 2 v1 / r + (d_theta v2 + d_phi v3) / r` at interior node `j`,
    /// with `d_r v1` from the central difference of `v1` at `j +- 1`.
    pub fn divergence_at_node(&self, j: usize, p: AngularPoint) -> f64 {
        let h = self.grid.dr();
        let r = self.grid.node(j);
        let v1m = self.velocity_at_node(j - 1, p)[0];
        let v1p = self.velocity_at_node(j + 1, p)[0];
        let v = self.velocity_at_node(j, p);
        let t = Trig::new(self.n, self.omega, p);
        let np = self.n + 1;
        let w = self.omega;
        let mut ang = 0.0;
        for k in 0..np {
            for i in 0..np {
                let idx = k * np + i;
                let phi = self.dp[j].coeffs()[idx] + self.d[j].coeffs()[idx] / r;
                ang += w * w * (k * k + i * i) as f64 * phi * t.ct[k] * t.cp[i];
            }
        }
        (v1p - v1m) / (2.0 * h) + 2.0 * v[0] / r + ang / r
    }

    /// `v1(r_j, 0, 0)` at every node.
    pub fn v1_axis(&self) -> Vec<f64> {
        let np = self.n + 1;
        let w2 = self.omega * self.omega;
        (0..self.grid.len())
            .map(|j| {
                if j == 0 {
                    return 0.0;
                }
                let r = self.grid.node(j);
                let d = self.d[j].coeffs();
                let mut s = 0.0;
                for k in 0..np {
                    for i in 0..np {
                        s += (k * k + i * i) as f64 * d[k * np + i];
                    }
                }
                -w2 * s / r
            })
            .collect()
    }

    /// Coefficient blocks `(d, d')` at node `j`.
    pub fn node_coeffs(&self, j: usize) -> (&[f64], &[f64]) {
        (self.d[j].coeffs(), self.dp[j].coeffs())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn velocity_at(state: &State3D, grid: &RadialGrid, r: f64, p: AngularPoint) -> [f64; 3] {
    Kinematics3D::new(state, grid).velocity_at(r, p)
}

pub fn forcing_at(state: &State3D, grid: &RadialGrid, r: f64, p: AngularPoint) -> [f64; 2] {
    Kinematics3D::new(state, grid).forcing_at(r, p)
}

/// Index and value of the largest `|v|`.
pub(crate) fn peak(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, 0.0),
        |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) },
    )
}

/// `v1(r_j, theta, 0)` at node `j` over `points + 1` uniform angles
/// spanning `[-pi/omega, pi/omega]`.
fn v1_theta_profile(kin: &Kinematics3D, j: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let half = std::f64::consts::PI / kin.omega();
    let thetas: Vec<f64> = (0..=points)
        .map(|q| -half + 2.0 * half * q as f64 / points as f64)
        .collect();
    let vals = thetas
        .iter()
        .map(|&th| kin.velocity_at_node(j, AngularPoint { theta: th, phi: 0.0 })[0])
        .collect();
    (thetas, vals)
}

fn diagnostics_row(
    state: &State3D,
    params: &Params3D,
    kin: &Kinematics3D,
    step: usize,
    exec: Execution,
) -> DiagnosticRow {
    let mut tail = TailAccumulator::default();
    let np = params.n + 1;
    for f in &state.c {
        for k in 0..np {
            for i in 0..np {
                tail.add(k.max(i), params.n, f.get(k, i));
            }
        }
    }
    let axis = kin.v1_axis();
    let (pj, pv) = peak(&axis);
    let grad = first_derivative(&axis, params.grid.dr());
    let compat = compat_residual_00(state, &params.grid, exec);
    DiagnosticRow {
        step,
        t: state.t,
        tail_ratio: tail.ratio(),
        energy: tail.total,
        peak_value: pv,
        peak_position: params.grid.node(pj),
        max_gradient: grad.iter().fold(0.0, |m, v| m.max(v.abs())),
        zero_mode: state.c.iter().fold(0.0, |m, f| m.max(f.get(0, 0).abs())),
        l2_velocity: Some(l2_velocity_norm_3d(kin, exec)),
        compat_residual: Some(compat.iter().fold(0.0, |m, v| m.max(v.abs()))),
        asymmetry: Some(state.asymmetry()),
    }
}

fn snapshot(state: &State3D, params: &Params3D, step: usize) -> Snapshot {
    let np = params.n + 1;
    let mut entries = Vec::with_capacity(params.grid.len() * np * np);
    for (j, (cf, df)) in state.c.iter().zip(&state.d).enumerate() {
        for k in 0..np {
            for i in 0..np {
                entries.push(CoeffEntry {
                    n: k,
                    l: Some(i),
                    node: Some(j),
                    r: Some(params.grid.node(j)),
                    c: cf.get(k, i),
                    d: df.get(k, i),
                });
            }
        }
    }
    Snapshot {
        step,
        t: state.t,
        entries,
    }
}

fn profiles(state: &State3D, params: &Params3D, kin: &Kinematics3D) -> Vec<Profile> {
    let axis = kin.v1_axis();
    let (pj, _) = peak(&axis);
    let (thetas, vals) = v1_theta_profile(kin, pj.max(1), 4 * (params.n + 1) * 4);
    vec![
        Profile {
            t: state.t,
            name: "v1_axis".into(),
            coordinate: params.grid.nodes(),
            value: axis,
        },
        Profile {
            t: state.t,
            name: "v1_theta_at_peak".into(),
            coordinate: thetas,
            value: vals,
        },
    ]
}

/// Integrates from the reference initial datum.
pub fn run_3d(params: &Params3D, cadence: &Cadence, exec: Execution) -> Result<Run<State3D>> {
    let init = init_u0(params)?;
    run_3d_from(params, init, cadence, exec)
}

/// Integrates `init` to `t_final`; overflow is reported as onset, not as an error.
pub fn run_3d_from(params: &Params3D, init: State3D, cadence: &Cadence, exec: Execution) -> Result<Run<State3D>> {
    params.validate()?;
    params.check_stability()?;
    let solver = Psi3DSolver::new(&params.grid, params.omega, params.n)?;
    let steps = (params.t_final / params.dt).round() as usize;
    let mut report = RunReport::default();
    let mut det = OnsetDetector::new(DEFAULT_THRESHOLD);
    let mut state = init;

    let record = |state: &State3D, step: usize, last: bool, report: &mut RunReport, det: &mut OnsetDetector| {
        let diag = cadence.diag_due(step, last);
        let snap = cadence.snapshot_due(step, last);
        if !(diag || snap) {
            return;
        }
        let kin = Kinematics3D::new(state, &params.grid);
        if diag {
            let row = diagnostics_row(state, params, &kin, step, exec);
            det.push(row.t, row.tail_ratio);
            report.diagnostics.push(row);
        }
        if snap {
            report.snapshots.push(snapshot(state, params, step));
            report.profiles.extend(profiles(state, params, &kin));
        }
    };

    record(&state, 0, steps == 0, &mut report, &mut det);
    for step in 1..=steps {
        match step_3d(&state, params, &solver, exec) {
            Ok(mut next) => {
                next.t = step as f64 * params.dt;
                state = next;
            }
            Err(Error::Overflow { t }) => {
                report.steps = step - 1;
                report.t_end = state.t;
                report.onset = Some(det.finish_overflow(t));
                return Ok(Run { report, state });
            }
            Err(e) => return Err(e),
        }
        record(&state, step, step == steps, &mut report, &mut det);
        if cadence.stop_on_onset && det.fired().is_some() {
            report.steps = step;
            report.t_end = state.t;
            report.onset = Some(det.finish());
            return Ok(Run { report, state });
        }
    }
    report.steps = steps;
    report.t_end = state.t;
    report.onset = Some(det.finish());
    Ok(Run { report, state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Params3D {
        Params3D {
            n: 3,
            grid: RadialGrid::new(10.0, 24).unwrap(),
            ..Params3D::reference()
        }
    }

    #[test]
    fn init_values() {
        let p = Params3D::reference();
        let g = RadialGrid::new(10.0, 20).unwrap();
        let p2 = Params3D { grid: g, ..p };
        let s = init_u0(&p2).unwrap();
        // r = 5 is node 10
        for (k, i) in [(1, 0), (0, 1), (1, 1)] {
            assert!((s.c[10].get(k, i) - 39.0625).abs() < 1e-12);
            assert_eq!(s.c[0].get(k, i), 0.0);
            assert_eq!(s.c[20].get(k, i), 0.0);
        }
        assert_eq!(s.asymmetry(), 0.0);
        assert_eq!(s.c[10].get(0, 0), 0.0);
        assert!(s.d.iter().all(|f| f.get(0, 0) == 0.0));
    }

    #[test]
    fn zero_state_is_fixed() {
        let p = small();
        let s = State3D::zeros(&p).unwrap();
        let solver = Psi3DSolver::new(&p.grid, p.omega, p.n).unwrap();
        let next = step_3d(&s, &p, &solver, Execution::Serial).unwrap();
        assert!(next
            .c
            .iter()
            .chain(&next.d)
            .all(|f| f.coeffs().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn viscous_examples() {
        assert_eq!(viscous_3d(1.0, 2.0, 3.0, 0.1, 1.0, 1, 0, 0.0, 4.0), 0.0);
        let v = viscous_3d(2.0, 2.0, 2.0, 0.1, 0.5, 1, 1, 0.02, 4.0);
        assert!((v - 0.02 * (2.0 - 32.0) * 2.0 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn nl_vanishes_without_psi() {
        let p = small();
        let mut c = CosineField2D::zeros(p.omega, p.n).unwrap();
        c.set(1, 2, 0.3);
        let z = CosineField2D::zeros(p.omega, p.n).unwrap();
        assert_eq!(nl_3d(&c, &z, &z, 1.0, 1, 1), 0.0);
    }

    #[test]
    fn velocity_axis_has_no_angular_part() {
        let s = init_u0(&small()).unwrap();
        let kin = Kinematics3D::new(&s, &small().grid);
        let v = kin.velocity_at(4.3, AngularPoint { theta: 0.0, phi: 0.0 });
        assert_eq!(v[1], 0.0);
        assert_eq!(v[2], 0.0);
        assert!(v[0] != 0.0);
        assert_eq!(kin.velocity_at(0.0, AngularPoint { theta: 0.1, phi: 0.2 }), [0.0; 3]);
    }

    #[test]
    fn stability_check_rejects_large_steps() {
        let p = Params3D {
            dt: 1e-2,
            ..Params3D::reference()
        };
        assert!(matches!(p.check_stability(), Err(Error::UnstableStep { .. })));
        assert!(Params3D::reference().check_stability().is_ok());
    }
}

//! Single-angle radial models: the 2D polar comparison model and the
//! simplified cone model.
//!
//! Both expand `u` and `Psi` in `cos(omega k theta)` with radial profiles and
//! evolve every mode, including `k = 0`. The two kinds differ only in the
//! coefficients collected in [`ReducedKind`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::norms::l2_velocity_norm_reduced;
use crate::diagnostics::onset::{OnsetDetector, TailAccumulator, DEFAULT_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::model1d::Run;
use crate::model3d::peak;
use crate::par::{map_range, Execution};
use crate::radial::{first_derivative, second_derivative, ModeOperator, RadialGrid};
use crate::report::{Cadence, CoeffEntry, DiagnosticRow, Profile, RunReport, Snapshot};
use crate::spectral::{cos_cos_project, sin_sin_project, CosineField1D};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducedKind {
    Polar2d,
    Cone,
}

impl ReducedKind {
    pub fn tag(self) -> &'static str {
        match self {
            ReducedKind::Polar2d => "polar2d",
            ReducedKind::Cone => "cone",
        }
    }

    /// Multiplier of `Psi_theta_theta` in `u` and in `v1`.
    fn angular_factor(self) -> f64 {
        match self {
            ReducedKind::Polar2d => 1.0,
            ReducedKind::Cone => 2.0,
        }
    }

    /// `mu` of the radial relation `-mu d + r^2 d'' + r d' = c` for mode `k`.
    pub fn mu(self, k: usize, omega: f64) -> f64 {
        self.angular_factor() * (omega * k as f64).powi(2)
    }

    pub fn a1(self) -> f64 {
        1.0
    }

    /// `(A, C)` in `nu [(A - mu_n) c / r^2 + c'' + C c' / r]`.
    fn viscous_consts(self) -> (f64, f64) {
        match self {
            ReducedKind::Polar2d => (4.0, -3.0),
            ReducedKind::Cone => (2.0, -2.0),
        }
    }

    /// Weight of the `Psi_theta_theta (Psi_r - Psi/r)_theta_theta` product.
    fn curvature_weight(self) -> f64 {
        match self {
            ReducedKind::Polar2d => 1.0,
            ReducedKind::Cone => 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub kind: ReducedKind,
    pub nu: f64,
    pub omega: f64,
    pub n: usize,
    pub grid: RadialGrid,
    pub dt: f64,
    pub t_final: f64,
    pub init_sign: f64,
    pub nl_enabled: bool,
}

impl ReducedParams {
    /// Polar run: `nu = .02`, `r_M = 8`, `N = 20`, `T = .21`, `dt = 1e-4`.
    pub fn polar_reference() -> Self {
        Self {
            kind: ReducedKind::Polar2d,
            nu: 0.02,
            omega: 4.0,
            n: 20,
            grid: RadialGrid::new(8.0, 40).expect("valid grid"),
            dt: 1e-4,
            t_final: 0.21,
            init_sign: 1.0,
            nl_enabled: true,
        }
    }

    /// Cone run: `nu = .02`, `r_M = 10`, `N = 18`, `T = .4`, `dt = 5e-5`.
    pub fn cone_reference() -> Self {
        Self {
            kind: ReducedKind::Cone,
            nu: 0.02,
            omega: 4.0,
            n: 18,
            grid: RadialGrid::new(10.0, 40).expect("valid grid"),
            dt: 5e-5,
            t_final: 0.4,
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

    /// `0.5 / scale` with `scale = nu (mu_N + A) / r_1^2`.
    pub fn stability_limit(&self) -> f64 {
        let r1 = self.grid.dr();
        let (a, _) = self.kind.viscous_consts();
        let scale = self.nu * (self.kind.mu(self.n, self.omega) + a) / (r1 * r1);
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
pub struct ReducedState {
    pub t: f64,
    pub c: Vec<CosineField1D>,
    pub d: Vec<CosineField1D>,
}

impl ReducedState {
    pub fn zeros(omega: f64, n: usize, grid: &RadialGrid) -> Result<Self> {
        let f = CosineField1D::zeros(omega, n)?;
        Ok(Self {
            t: 0.0,
            c: vec![f.clone(); grid.len()],
            d: vec![f; grid.len()],
        })
    }
}

/// Factored radial operators, one per mode `0..=N`.
#[derive(Clone, Debug)]
pub struct ReducedSolver {
    ops: Vec<ModeOperator>,
}

impl ReducedSolver {
    pub fn new(kind: ReducedKind, grid: &RadialGrid, omega: f64, n: usize) -> Result<Self> {
        let ops = (0..=n)
            .map(|k| ModeOperator::new(kind.mu(k, omega), kind.a1(), grid, || format!("{} k={k}", kind.tag())))
            .collect::<Result<_>>()?;
        Ok(Self { ops })
    }

    pub fn solve(&self, c: &[CosineField1D], exec: Execution) -> Result<Vec<CosineField1D>> {
        let profiles = map_range(exec, self.ops.len(), |k| {
            let rhs: Vec<f64> = c.iter().map(|f| f.coeffs()[k]).collect();
            self.ops[k].solve(&rhs)
        });
        c.iter()
            .enumerate()
            .map(|(j, f)| CosineField1D::new(f.omega(), profiles.iter().map(|p| p[j]).collect()))
            .collect()
    }
}

/// Psi profile of mode `k` from the u profile: `-mu_k d + r^2 d'' + r d' = c`.
pub fn relation_reduced(kind: ReducedKind, c: &[f64], grid: &RadialGrid, omega: f64, k: usize) -> Result<Vec<f64>> {
    if c.len() != grid.len() {
        return Err(invalid("c", "profile length must be M + 1"));
    }
    let op = ModeOperator::new(kind.mu(k, omega), kind.a1(), grid, || format!("{} k={k}", kind.tag()))?;
    Ok(op.solve(c))
}

/// Initial datum: polar `sign (r^4 / r_M)(r_M - r) cos(w theta)`,
/// cone `sign (r^7 / r_M^4)(r_M - r) cos(w theta)`.
pub fn init_reduced(params: &ReducedParams) -> Result<ReducedState> {
    params.validate()?;
    let rm = params.grid.r_max();
    let mut state = ReducedState::zeros(params.omega, params.n, &params.grid)?;
    for (j, f) in state.c.iter_mut().enumerate() {
        let r = params.grid.node(j);
        let radial = match params.kind {
            ReducedKind::Polar2d => r.powi(4) / rm * (rm - r),
            ReducedKind::Cone => r.powi(7) / rm.powi(4) * (rm - r),
        };
        f.coeffs_mut()[1] = params.init_sign * radial;
    }
    let solver = ReducedSolver::new(params.kind, &params.grid, params.omega, params.n)?;
    state.d = solver.solve(&state.c, Execution::Serial)?;
    Ok(state)
}

/// Nonlinear term at radius `r > 0`, projected on mode `n`:
/// `(1/r)[-u_theta G_theta + F Psi_theta_theta H_theta_theta]` with
/// `H = Psi_r - Psi/r`, `G = Psi_r` and `F = 1` (polar) or
/// `G = Psi_r + Psi/r` and `F = 4` (cone).
pub fn nl_reduced(kind: ReducedKind, c: &[f64], d: &[f64], d_dr: &[f64], r: f64, n: usize, omega: f64) -> f64 {
    NlReduced::new(kind, c, d, d_dr, r, omega).project(n)
}

struct NlReduced {
    uc: Vec<f64>,
    g: Vec<f64>,
    pdd: Vec<f64>,
    h: Vec<f64>,
    weight: f64,
    r: f64,
}

impl NlReduced {
    fn new(kind: ReducedKind, c: &[f64], d: &[f64], d_dr: &[f64], r: f64, omega: f64) -> Self {
        let wk = |k: usize| omega * k as f64;
        let uc = c.iter().enumerate().map(|(k, v)| wk(k) * v).collect();
        let g = d
            .iter()
            .zip(d_dr)
            .enumerate()
            .map(|(m, (dv, dp))| match kind {
                ReducedKind::Polar2d => wk(m) * dp,
                ReducedKind::Cone => wk(m) * (dp + dv / r),
            })
            .collect();
        let pdd = d.iter().enumerate().map(|(k, v)| wk(k).powi(2) * v).collect();
        let h = d
            .iter()
            .zip(d_dr)
            .enumerate()
            .map(|(m, (dv, dp))| wk(m).powi(2) * (dp - dv / r))
            .collect();
        Self {
            uc,
            g,
            pdd,
            h,
            weight: kind.curvature_weight(),
            r,
        }
    }

    fn project(&self, n: usize) -> f64 {
        (-sin_sin_project(&self.uc, &self.g, n) + self.weight * cos_cos_project(&self.pdd, &self.h, n)) / self.r
    }
}

/// `nu [(A - mu_n) c / r^2 + c'' + C c' / r]` at an interior node.
#[allow(clippy::too_many_arguments)]
pub fn viscous_reduced(
    kind: ReducedKind,
    c_prev: f64,
    c_here: f64,
    c_next: f64,
    h: f64,
    r: f64,
    n: usize,
    omega: f64,
    nu: f64,
) -> f64 {
    if nu == 0.0 {
        return 0.0;
    }
    let (a, cc) = kind.viscous_consts();
    let d1 = (c_next - c_prev) / (2.0 * h);
    let d2 = (c_next - 2.0 * c_here + c_prev) / (h * h);
    nu * ((a - kind.mu(n, omega)) * c_here / (r * r) + d2 + cc * d1 / r)
}

fn radial_derivative_1d(fields: &[CosineField1D], h: f64, order: u8) -> Vec<Vec<f64>> {
    let len = fields[0].coeffs().len();
    let mut out = vec![vec![0.0; len]; fields.len()];
    for k in 0..len {
        let profile: Vec<f64> = fields.iter().map(|f| f.coeffs()[k]).collect();
        let der = if order == 1 {
            first_derivative(&profile, h)
        } else {
            second_derivative(&profile, h)
        };
        for (o, v) in out.iter_mut().zip(der) {
            o[k] = v;
        }
    }
    out
}

pub fn step_reduced(
    state: &ReducedState,
    params: &ReducedParams,
    solver: &ReducedSolver,
    exec: Execution,
) -> Result<ReducedState> {
    let grid = &params.grid;
    let m = grid.intervals();
    let h = grid.dr();
    let dp = radial_derivative_1d(&state.d, h, 1);
    let interior = map_range(exec, m - 1, |jj| {
        let j = jj + 1;
        let r = grid.node(j);
        let (cp, ch, cn) = (state.c[j - 1].coeffs(), state.c[j].coeffs(), state.c[j + 1].coeffs());
        let nl = params
            .nl_enabled
            .then(|| NlReduced::new(params.kind, ch, state.d[j].coeffs(), &dp[j], r, params.omega));
        (0..ch.len())
            .map(|k| {
                let visc = viscous_reduced(params.kind, cp[k], ch[k], cn[k], h, r, k, params.omega, params.nu);
                let nlk = nl.as_ref().map_or(0.0, |nl| nl.project(k));
                ch[k] + params.dt * (visc - nlk)
            })
            .collect::<Vec<f64>>()
    });
    let t = state.t + params.dt;
    let mut c = Vec::with_capacity(m + 1);
    c.push(CosineField1D::zeros(params.omega, params.n)?);
    for coeffs in interior {
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { t });
        }
        c.push(CosineField1D::new(params.omega, coeffs)?);
    }
    c.push(CosineField1D::zeros(params.omega, params.n)?);
    let d = solver.solve(&c, exec).map_err(|_| Error::Overflow { t })?;
    Ok(ReducedState { t, c, d })
}

/// Node values of `d`, `d'` for velocity reconstruction.
#[derive(Clone, Debug)]
pub struct KinematicsReduced {
    kind: ReducedKind,
    grid: RadialGrid,
    omega: f64,
    d: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
}

impl KinematicsReduced {
    pub fn new(kind: ReducedKind, state: &ReducedState, grid: &RadialGrid) -> Self {
        Self {
            kind,
            grid: *grid,
            omega: state.d[0].omega(),
            d: state.d.iter().map(|f| f.coeffs().to_vec()).collect(),
            dp: radial_derivative_1d(&state.d, grid.dr(), 1),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kind(&self) -> ReducedKind {
        self.kind
    }

    pub fn node_coeffs(&self, j: usize) -> (&[f64], &[f64]) {
        (&self.d[j], &self.dp[j])
    }

    fn velocity_from(&self, d: &[f64], dp: &[f64], r: f64, theta: f64) -> [f64; 2] {
        let w = self.omega;
        let f = self.kind.angular_factor();
        let (mut v1, mut v2) = (0.0, 0.0);
        for k in 0..d.len() {
            let wk = w * k as f64;
            let (c, s) = ((wk * theta).cos(), (wk * theta).sin());
            v1 -= wk * wk * d[k] * c;
            let radial = match self.kind {
                ReducedKind::Polar2d => dp[k],
                ReducedKind::Cone => dp[k] + d[k] / r,
            };
            v2 += wk * radial * s;
        }
        [f * v1 / r, v2]
    }

    /// Velocity at an arbitrary radius (linear interpolation of the node
    /// coefficients); zero at `r = 0`.
    pub fn velocity_at(&self, r: f64, theta: f64) -> [f64; 2] {
        if r <= 0.0 {
            return [0.0; 2];
        }
        let m = self.grid.intervals();
        let s = (r / self.grid.dr()).clamp(0.0, m as f64);
        let j = (s.floor() as usize).min(m - 1);
        let w = s - j as f64;
        let lerp = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b)
                .map(|(x, y)| if w == 0.0 { *x } else { (1.0 - w) * x + w * y })
                .collect()
        };
        let d = lerp(&self.d[j], &self.d[j + 1]);
        let dp = lerp(&self.dp[j], &self.dp[j + 1]);
        self.velocity_from(&d, &dp, r, theta)
    }

    pub fn velocity_at_node(&self, j: usize, theta: f64) -> [f64; 2] {
        if j == 0 {
            return [0.0; 2];
        }
        self.velocity_from(&self.d[j], &self.dp[j], self.grid.node(j), theta)
    }

    /// Cylindrical divergence `d_r v1 + v1 / r + d_theta v2 / r` at interior
    /// node `j` (polar kind).
    pub fn divergence_at_node(&self, j: usize, theta: f64) -> f64 {
        let h = self.grid.dr();
        let r = self.grid.node(j);
        let v1m = self.velocity_at_node(j - 1, theta)[0];
        let v1p = self.velocity_at_node(j + 1, theta)[0];
        let v1 = self.velocity_at_node(j, theta)[0];
        let w = self.omega;
        let dv2: f64 = (0..self.d[j].len())
            .map(|k| {
                let wk = w * k as f64;
                wk * wk * self.dp[j][k] * (wk * theta).cos()
            })
            .sum();
        (v1p - v1m) / (2.0 * h) + v1 / r + dv2 / r
    }

    /// `v1(r_j, theta)` at every node.
    pub fn v1_along(&self, theta: f64) -> Vec<f64> {
        (0..self.grid.len())
            .map(|j| self.velocity_at_node(j, theta)[0])
            .collect()
    }
}

pub fn velocity_reduced_at(kind: ReducedKind, state: &ReducedState, grid: &RadialGrid, r: f64, theta: f64) -> [f64; 2] {
    KinematicsReduced::new(kind, state, grid).velocity_at(r, theta)
}

/// Mode-`n` projection of the nonlinear term at every node (0 at both ends).
pub fn nl_profile(state: &ReducedState, params: &ReducedParams, n: usize) -> Vec<f64> {
    let h = params.grid.dr();
    let dp = radial_derivative_1d(&state.d, h, 1);
    let m = params.grid.intervals();
    (0..=m)
        .map(|j| {
            if j == 0 || j == m {
                return 0.0;
            }
            nl_reduced(
                params.kind,
                state.c[j].coeffs(),
                state.d[j].coeffs(),
                &dp[j],
                params.grid.node(j),
                n,
                params.omega,
            )
        })
        .collect()
}

fn diagnostics_row(
    state: &ReducedState,
    params: &ReducedParams,
    kin: &KinematicsReduced,
    step: usize,
) -> DiagnosticRow {
    let mut tail = TailAccumulator::default();
    for f in &state.c {
        for (k, v) in f.coeffs().iter().enumerate() {
            tail.add(k, params.n, *v);
        }
    }
    let axis = kin.v1_along(0.0);
    let (pj, pv) = peak(&axis);
    let grad = first_derivative(&axis, params.grid.dr());
    let nl0 = nl_profile(state, params, 0);
    DiagnosticRow {
        step,
        t: state.t,
        tail_ratio: tail.ratio(),
        energy: tail.total,
        peak_value: pv,
        peak_position: params.grid.node(pj),
        max_gradient: grad.iter().fold(0.0, |m, v| m.max(v.abs())),
        zero_mode: state.c.iter().fold(0.0, |m, f| m.max(f.coeffs()[0].abs())),
        l2_velocity: Some(l2_velocity_norm_reduced(kin)),
        compat_residual: Some(nl0.iter().fold(0.0, |m, v| m.max(v.abs()))),
        asymmetry: None,
    }
}

/// `v1(r_peak, theta)` over the full angular interval at the node where
/// `|v1(r, 0)|` peaks.
pub fn theta_profile_at_peak(kin: &KinematicsReduced, points: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let axis = kin.v1_along(0.0);
    let (pj, _) = peak(&axis);
    let j = pj.max(1);
    let half = PI / kin.omega();
    let thetas: Vec<f64> = (0..=points)
        .map(|q| -half + 2.0 * half * q as f64 / points as f64)
        .collect();
    let vals = thetas.iter().map(|&th| kin.velocity_at_node(j, th)[0]).collect();
    (kin.grid().node(j), thetas, vals)
}

fn profiles(state: &ReducedState, params: &ReducedParams, kin: &KinematicsReduced) -> Vec<Profile> {
    let edge = PI / params.omega;
    let (_, thetas, vals) = theta_profile_at_peak(kin, 160);
    vec![
        Profile {
            t: state.t,
            name: "v1_axis".into(),
            coordinate: params.grid.nodes(),
            value: kin.v1_along(0.0),
        },
        Profile {
            t: state.t,
            name: "v1_edge".into(),
            coordinate: params.grid.nodes(),
            value: kin.v1_along(edge),
        },
        Profile {
            t: state.t,
            name: "v1_theta_at_peak".into(),
            coordinate: thetas,
            value: vals,
        },
    ]
}

fn snapshot(state: &ReducedState, params: &ReducedParams, step: usize) -> Snapshot {
    let mut entries = Vec::new();
    for (j, (cf, df)) in state.c.iter().zip(&state.d).enumerate() {
        for (n, (c, d)) in cf.coeffs().iter().zip(df.coeffs()).enumerate() {
            entries.push(CoeffEntry {
                n,
                l: None,
                node: Some(j),
                r: Some(params.grid.node(j)),
                c: *c,
                d: *d,
            });
        }
    }
    Snapshot {
        step,
        t: state.t,
        entries,
    }
}

pub fn run_reduced(params: &ReducedParams, cadence: &Cadence, exec: Execution) -> Result<Run<ReducedState>> {
    let init = init_reduced(params)?;
    run_reduced_from(params, init, cadence, exec)
}

pub fn run_reduced_from(
    params: &ReducedParams,
    init: ReducedState,
    cadence: &Cadence,
    exec: Execution,
) -> Result<Run<ReducedState>> {
    params.validate()?;
    params.check_stability()?;
    let solver = ReducedSolver::new(params.kind, &params.grid, params.omega, params.n)?;
    let steps = (params.t_final / params.dt).round() as usize;
    let mut report = RunReport::default();
    let mut det = OnsetDetector::new(DEFAULT_THRESHOLD);
    let mut state = init;

    let record = |state: &ReducedState, step: usize, last: bool, report: &mut RunReport, det: &mut OnsetDetector| {
        let diag = cadence.diag_due(step, last);
        let snap = cadence.snapshot_due(step, last);
        if !(diag || snap) {
            return;
        }
        let kin = KinematicsReduced::new(params.kind, state, &params.grid);
        if diag {
            let row = diagnostics_row(state, params, &kin, step);
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
        match step_reduced(&state, params, &solver, exec) {
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

    #[test]
    fn viscous_examples() {
        let k = ReducedKind::Polar2d;
        assert_eq!(viscous_reduced(k, 1.0, 2.0, 3.0, 0.1, 1.0, 1, 4.0, 0.0), 0.0);
        let v = viscous_reduced(k, 1.5, 1.5, 1.5, 0.1, 2.0, 1, 4.0, 0.02);
        assert!((v - (-12.0 * 0.02 * 1.5 / 4.0)).abs() < 1e-13);
        // cone mode 0: nu (2 c / r^2 + c'' - 2 c' / r)
        let (h, r, nu) = (0.1, 1.0, 0.5);
        let (a, b, c) = (0.9, 1.0, 1.3);
        let expected = nu * (2.0 * b / (r * r) + (c - 2.0 * b + a) / (h * h) - 2.0 * (c - a) / (2.0 * h) / r);
        let got = viscous_reduced(ReducedKind::Cone, a, b, c, h, r, 0, 4.0, nu);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn cone_reduces_to_toy_pattern_where_psi_r_vanishes() {
        use crate::model1d::{toy_nl, ToyParams};
        let omega = 4.0;
        let r = 1.7;
        let c = [0.0, 0.4, -0.2, 0.1, 0.05];
        let d = [0.0, -0.03, 0.02, 0.01, -0.004];
        let zero = [0.0; 5];
        let p = ToyParams {
            mu1: 1.0,
            mu2: -4.0,
            n: 4,
            ..ToyParams::blowup()
        };
        let toy = toy_nl(&c, &d, &p, Execution::Serial);
        for (n, t) in toy.iter().enumerate() {
            let got = nl_reduced(ReducedKind::Cone, &c, &d, &zero, r, n, omega);
            assert!((got - t / (r * r)).abs() < 1e-13, "mode {n}");
        }
    }

    #[test]
    fn zero_psi_gives_zero_nl_and_velocity() {
        let c = [0.0, 1.0, 0.5];
        let z = [0.0; 3];
        assert_eq!(nl_reduced(ReducedKind::Polar2d, &c, &z, &z, 1.0, 2, 4.0), 0.0);
        let g = RadialGrid::new(8.0, 16).unwrap();
        let s = ReducedState::zeros(4.0, 2, &g).unwrap();
        assert_eq!(velocity_reduced_at(ReducedKind::Cone, &s, &g, 3.0, 0.2), [0.0, 0.0]);
    }

    #[test]
    fn reference_steps_pass_the_stability_check() {
        assert!(ReducedParams::polar_reference().check_stability().is_ok());
        assert!(ReducedParams::cone_reference().check_stability().is_ok());
        let fine = ReducedParams {
            grid: RadialGrid::new(8.0, 73).unwrap(),
            ..ReducedParams::polar_reference()
        };
        assert!(fine.check_stability().is_err());
    }
}

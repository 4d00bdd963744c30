//! One-angle models in coefficient space: the evolutive toy problem and the
//! stationary system.
//!
//! In the toy problem `u` and `Psi` are linked mode by mode through
//! `c_k = (lambda - omega^2 k^2) d_k` and the u-coefficients evolve by
//! `dc_n/dt = -nu omega^2 n^2 c_n - NL_n`, with `NL` the projection of
//! `-mu1 u' Psi' + mu2 (Psi'')^2`. The zero mode is never evolved.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::onset::{tail_ratio, OnsetDetector, DEFAULT_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};
use crate::report::{Cadence, CoeffEntry, DiagnosticRow, Profile, RunReport, Snapshot};
use crate::spectral::{cos_cos_project, eval_cos_series, eval_sin_series, sin_sin_project, CosineField1D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub nu: f64,
    pub omega: f64,
    pub lambda: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Diagnostic switch: `false` drops the nonlinear term.
    pub nl_enabled: bool,
}

impl ToyParams {
    /// The blow-up configuration: `nu = .01`, `omega = 4`, `lambda = -3`,
    /// `mu1 = .5`, `mu2 = -1.5`, `N = 50`.
    pub fn blowup() -> Self {
        Self {
            nu: 0.01,
            omega: 4.0,
            lambda: -3.0,
            mu1: 0.5,
            mu2: -1.5,
            n: 50,
            dt: 1e-4,
            t_final: 1.6,
            nl_enabled: true,
        }
    }

    /// Inviscid configuration with `Q(j) = 18 - 64 j^2 < 0` for every `j`.
    pub fn inviscid_decay() -> Self {
        Self {
            nu: 0.0,
            omega: 4.0,
            lambda: 6.0,
            mu1: 3.0,
            mu2: 1.0,
            n: 50,
            dt: 1e-4,
            t_final: 5.0,
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
        if !(self.lambda.is_finite() && self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(invalid("lambda/mu1/mu2", "must be finite"));
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
        check_resonance(self.lambda, self.omega, self.n)
    }

    fn denominators(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|k| self.lambda - (self.omega * k as f64).powi(2))
            .collect()
    }
}

fn check_resonance(lambda: f64, omega: f64, n: usize) -> Result<()> {
    match (1..=n).find(|&k| lambda == (omega * k as f64).powi(2)) {
        Some(k) => Err(Error::Resonance { k }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyState {
    pub t: f64,
    pub c: CosineField1D,
}

/// `d_k = c_k / (lambda - omega^2 k^2)` for `k >= 1`, `d_0 = 0`.
pub fn d_from_c(c: &CosineField1D, lambda: f64) -> Result<CosineField1D> {
    let omega = c.omega();
    check_resonance(lambda, omega, c.n())?;
    let d = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, ck)| {
            if k == 0 {
                0.0
            } else {
                ck / (lambda - (omega * k as f64).powi(2))
            }
        })
        .collect();
    CosineField1D::new(omega, d)
}

/// Projection of `-mu1 u' Psi' + mu2 (Psi'')^2` onto modes `0..=N`.
pub fn toy_nl(c: &[f64], d: &[f64], params: &ToyParams, exec: Execution) -> Vec<f64> {
    let w = params.omega;
    let uc: Vec<f64> = c.iter().enumerate().map(|(k, v)| w * k as f64 * v).collect();
    let pd: Vec<f64> = d.iter().enumerate().map(|(k, v)| w * k as f64 * v).collect();
    let pdd: Vec<f64> = d.iter().enumerate().map(|(k, v)| (w * k as f64).powi(2) * v).collect();
    map_range(exec, c.len(), |n| {
        -params.mu1 * sin_sin_project(&uc, &pd, n) + params.mu2 * cos_cos_project(&pdd, &pdd, n)
    })
}

/// Closed-form drift of the zero mode:
/// `1/2 sum_j j^2 w^2 [lambda mu1 - (mu1 + mu2) j^2 w^2] / (j^2 w^2 - lambda)^2 c_j^2`.
pub fn dc0_closed_form(c: &[f64], params: &ToyParams) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, cj)| {
            let jw2 = (j as f64 * params.omega).powi(2);
            let q = params.lambda * params.mu1 - (params.mu1 + params.mu2) * jw2;
            0.5 * jw2 * q / (jw2 - params.lambda).powi(2) * cj * cj
        })
        .sum()
}

/// `Q(j) = lambda mu1 - (mu1 + mu2) j^2 omega^2`.
pub fn q_indicator(j: usize, params: &ToyParams) -> f64 {
    params.lambda * params.mu1 - (params.mu1 + params.mu2) * (j as f64 * params.omega).powi(2)
}

/// Spectral form of the Poincare inequality
/// `sum k^2 w^2 d_k^2 <= w^-2 sum k^4 w^4 d_k^2`, which holds term by term for `k >= 1`.
pub fn poincare_holds(d: &[f64], omega: f64) -> bool {
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (k, dk) in d.iter().enumerate().skip(1) {
        let kw2 = (k as f64 * omega).powi(2);
        lhs += kw2 * dk * dk;
        rhs += kw2 * kw2 * dk * dk / (omega * omega);
    }
    lhs <= rhs * (1.0 + 1e-12)
}

/// One explicit Euler step. `c_0` is left untouched.
pub fn toy_step(state: &ToyState, params: &ToyParams, exec: Execution) -> Result<ToyState> {
    let c = state.c.coeffs();
    let den = params.denominators();
    let d: Vec<f64> = c
        .iter()
        .zip(&den)
        .enumerate()
        .map(|(k, (ck, dk))| if k == 0 { 0.0 } else { ck / dk })
        .collect();
    let nl = if params.nl_enabled {
        toy_nl(c, &d, params, exec)
    } else {
        vec![0.0; c.len()]
    };
    let w2 = params.omega * params.omega;
    let mut next = c.to_vec();
    for n in 1..next.len() {
        let lin = -params.nu * w2 * (n * n) as f64 * c[n];
        next[n] = c[n] + params.dt * (lin - nl[n]);
    }
    let t = state.t + params.dt;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { t });
    }
    Ok(ToyState {
        t,
        c: CosineField1D::new(params.omega, next)?,
    })
}

/// Number of angular samples on `[0, pi/omega]` used for max-norm diagnostics.
fn sample_count(n: usize) -> usize {
    (8 * n).max(64)
}

/// `(max |u|, argmax, max |u'|)` over a fine grid of the half interval;
/// `u` is even so this covers the whole interval.
pub fn toy_extrema(c: &[f64], omega: f64) -> (f64, f64, f64) {
    let p = sample_count(c.len());
    let half = std::f64::consts::PI / omega;
    let du: Vec<f64> = c.iter().enumerate().map(|(k, v)| -omega * k as f64 * v).collect();
    let (mut umax, mut arg, mut dmax) = (0.0f64, 0.0, 0.0f64);
    for j in 0..=p {
        let x = half * j as f64 / p as f64;
        let u = eval_cos_series(c, omega, x).abs();
        if u > umax {
            umax = u;
            arg = x;
        }
        dmax = dmax.max(eval_sin_series(&du, omega, x).abs());
    }
    (umax, arg, dmax)
}

/// Curves of `u` and `Psi` over `[-pi/omega, pi/omega]` (201 points).
pub fn toy_profiles(t: f64, c: &[f64], d: &[f64], omega: f64) -> [Profile; 2] {
    let p = 200;
    let half = std::f64::consts::PI / omega;
    let phi: Vec<f64> = (0..=p).map(|j| -half + 2.0 * half * j as f64 / p as f64).collect();
    let u = phi.iter().map(|&x| eval_cos_series(c, omega, x)).collect();
    let psi = phi.iter().map(|&x| eval_cos_series(d, omega, x)).collect();
    [
        Profile {
            t,
            name: "u".into(),
            coordinate: phi.clone(),
            value: u,
        },
        Profile {
            t,
            name: "psi".into(),
            coordinate: phi,
            value: psi,
        },
    ]
}

/// Result of a time-dependent run: the report plus the last finite state.
#[derive(Clone, Debug)]
pub struct Run<S> {
    pub report: RunReport,
    pub state: S,
}

/// Integrates the toy problem to `t_final`, or until onset is detected when
/// `cadence.stop_on_onset` is set.
pub fn run_toy(params: &ToyParams, init: &CosineField1D, cadence: &Cadence, exec: Execution) -> Result<Run<ToyState>> {
    params.validate()?;
    if init.coeffs()[0] != 0.0 {
        return Err(invalid("init", "zero mode must vanish"));
    }
    if init.n() != params.n || init.omega() != params.omega {
        return Err(invalid("init", "truncation or omega does not match the parameters"));
    }
    let steps = (params.t_final / params.dt).round() as usize;
    let den = params.denominators();
    let mut state = ToyState {
        t: 0.0,
        c: init.clone(),
    };
    let mut report = RunReport::default();
    let mut det = OnsetDetector::new(DEFAULT_THRESHOLD);

    let record = |state: &ToyState, step: usize, last: bool, report: &mut RunReport, det: &mut OnsetDetector| {
        let c = state.c.coeffs();
        let d: Vec<f64> = c
            .iter()
            .zip(&den)
            .enumerate()
            .map(|(k, (ck, dk))| if k == 0 { 0.0 } else { ck / dk })
            .collect();
        if cadence.diag_due(step, last) {
            let tau = tail_ratio(c);
            let (umax, arg, dumax) = toy_extrema(c, params.omega);
            report.diagnostics.push(DiagnosticRow {
                step,
                t: state.t,
                tail_ratio: tau,
                energy: c.iter().map(|v| v * v).sum(),
                peak_value: umax,
                peak_position: arg,
                max_gradient: dumax,
                zero_mode: c[0],
                ..Default::default()
            });
            det.push(state.t, tau);
        }
        if cadence.snapshot_due(step, last) {
            report.snapshots.push(Snapshot {
                step,
                t: state.t,
                entries: c
                    .iter()
                    .zip(&d)
                    .enumerate()
                    .map(|(n, (&c, &d))| CoeffEntry {
                        n,
                        l: None,
                        node: None,
                        r: None,
                        c,
                        d,
                    })
                    .collect(),
            });
            report.profiles.extend(toy_profiles(state.t, c, &d, params.omega));
        }
    };

    record(&state, 0, steps == 0, &mut report, &mut det);
    for step in 1..=steps {
        let mut next = match toy_step(&state, params, exec) {
            Ok(s) => s,
            Err(Error::Overflow { t }) => {
                report.steps = step - 1;
                report.t_end = state.t;
                report.onset = Some(det.finish_overflow(t));
                return Ok(Run { report, state });
            }
            Err(e) => return Err(e),
        };
        next.t = step as f64 * params.dt;
        state = next;
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

/// `u_0 = amplitude cos(omega phi)` with the zero mode cleared.
pub fn cosine_init(omega: f64, n: usize, amplitude: f64) -> Result<CosineField1D> {
    let mut c = vec![0.0; n + 1];
    c[1] = amplitude;
    CosineField1D::new(omega, c)
}

/// Per-mode residual of the stationary system with `c_k = -omega^2 k^2 d_k`:
/// `nu (2 - n^2 w^2) c_n` plus the projections of `u' Psi'` and `u^2`.
/// Entry 0 carries the zero-mode balance, which vanishes identically.
pub fn stationary_residual(c: &CosineField1D, nu: f64) -> Vec<f64> {
    residual_coeffs(c.coeffs(), nu, c.omega(), Execution::Serial)
}

fn residual_coeffs(c: &[f64], nu: f64, omega: f64, exec: Execution) -> Vec<f64> {
    let uc: Vec<f64> = c.iter().enumerate().map(|(k, v)| omega * k as f64 * v).collect();
    // omega k d_k = -c_k / (omega k)
    let pd: Vec<f64> = c
        .iter()
        .enumerate()
        .map(|(k, v)| if k == 0 { 0.0 } else { -v / (omega * k as f64) })
        .collect();
    map_range(exec, c.len(), |n| {
        let lin = nu * (2.0 - (n as f64 * omega).powi(2)) * c[n];
        lin + sin_sin_project(&uc, &pd, n) + cos_cos_project(c, c, n)
    })
}

/// `d_k = -c_k / (omega^2 k^2)`, `d_0 = 0`.
pub fn stationary_psi(c: &CosineField1D) -> Result<CosineField1D> {
    d_from_c(c, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    /// Initial pseudo-time step.
    pub dt: f64,
    pub max_march: usize,
    /// Residual level at which marching hands over to Newton.
    pub newton_switch: f64,
    pub max_newton: usize,
    pub tolerance: f64,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_march: 200_000,
            newton_switch: 1e-6,
            max_newton: 50,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarySolution {
    pub c: CosineField1D,
    /// Max-norm of the residual over modes `1..=N`.
    pub residual: f64,
    /// The iteration collapsed onto the trivial solution.
    pub trivial: bool,
    pub march_iterations: usize,
    pub newton_iterations: usize,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().skip(1).fold(0.0, |m, x| m.max(x.abs()))
}

/// Seeks a stationary solution from `init` by pseudo-transient marching of
/// `dc/dt = R(c)` (viscous part implicit, step adapted to the residual
/// history) followed by Newton polishing.
pub fn solve_stationary(nu: f64, init: &CosineField1D, opts: &StationaryOptions) -> Result<StationarySolution> {
    let omega = init.omega();
    if !(nu.is_finite() && nu > 0.0) {
        return Err(invalid("nu", "the stationary solver needs nu > 0"));
    }
    let mut c = init.coeffs().to_vec();
    c[0] = 0.0;
    let n = c.len() - 1;
    let lin: Vec<f64> = (0..=n).map(|k| nu * (2.0 - (k as f64 * omega).powi(2))).collect();
    // keep 1 - dt L bounded away from zero on the unstable modes
    let lmax = lin.iter().cloned().fold(0.0, f64::max);
    let dt_max = if lmax > 0.0 { 0.5 / lmax } else { f64::INFINITY }.min(20.0 * opts.dt);
    let mut dt = opts.dt.min(dt_max);

    let done = |c: Vec<f64>, res: f64, march: usize, newton: usize| -> Result<StationarySolution> {
        let trivial = max_norm(&c) < 1e-8 && c.iter().all(|v| v.abs() < 1e-8);
        Ok(StationarySolution {
            c: CosineField1D::new(omega, c)?,
            residual: res,
            trivial,
            march_iterations: march,
            newton_iterations: newton,
        })
    };

    let mut r = residual_coeffs(&c, nu, omega, Execution::Serial);
    let mut res = max_norm(&r);
    let mut march = 0;
    while res > opts.newton_switch && march < opts.max_march {
        let mut next = c.clone();
        for k in 1..=n {
            let nl = r[k] - lin[k] * c[k];
            next[k] = (c[k] + dt * nl) / (1.0 - dt * lin[k]);
        }
        let r_next = residual_coeffs(&next, nu, omega, Execution::Serial);
        let res_next = max_norm(&r_next);
        march += 1;
        if !res_next.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                iterations: march,
                residual: res_next,
                last: c,
            });
        }
        if res_next < res {
            dt = (dt * 1.1).min(dt_max);
        } else {
            dt = (dt * 0.7).max(1e-3 * opts.dt);
        }
        c = next;
        r = r_next;
        res = res_next;
        if max_norm(&c) < 1e-12 {
            break;
        }
    }
    if res > opts.newton_switch && max_norm(&c) >= 1e-12 {
        return Err(Error::Divergence {
            iterations: march,
            residual: res,
            last: c,
        });
    }

    let mut newton = 0;
    while res > opts.tolerance * 1e-2 && newton < opts.max_newton {
        let jac = residual_jacobian(&c, nu, omega);
        let rhs = DVector::from_iterator(n, r[1..].iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        // damped update: halve until the residual decreases
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-4 {
            let mut trial = c.clone();
            for k in 1..=n {
                trial[k] += alpha * step[k - 1];
            }
            let r_trial = residual_coeffs(&trial, nu, omega, Execution::Serial);
            let res_trial = max_norm(&r_trial);
            if res_trial < res {
                c = trial;
                r = r_trial;
                res = res_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        newton += 1;
        if !accepted {
            break;
        }
    }
    let collapsed = max_norm(&c) < 1e-8;
    if res >= opts.tolerance && !collapsed {
        return Err(Error::Divergence {
            iterations: march + newton,
            residual: res,
            last: c,
        });
    }
    done(c, res, march, newton)
}

/// Jacobian of modes `1..=N` of the residual with respect to `c_1..c_N`.
/// The residual is quadratic, so central differences are exact up to rounding.
fn residual_jacobian(c: &[f64], nu: f64, omega: f64) -> DMatrix<f64> {
    let n = c.len() - 1;
    let mut jac = DMatrix::zeros(n, n);
    for col in 1..=n {
        let h = 1e-4 * c[col].abs().max(1.0);
        let mut plus = c.to_vec();
        let mut minus = c.to_vec();
        plus[col] += h;
        minus[col] -= h;
        let rp = residual_coeffs(&plus, nu, omega, Execution::Serial);
        let rm = residual_coeffs(&minus, nu, omega, Execution::Serial);
        for row in 1..=n {
            jac[(row - 1, col - 1)] = (rp[row] - rm[row]) / (2.0 * h);
        }
    }
    jac
}

#![allow(clippy::excessive_precision)]

mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use ringlab::diagnostics::norms::{
    compat_residual_00, identity_functionals_2d, identity_functionals_3d, l2_velocity_norm_3d,
    l2_velocity_norm_reduced, trapezoid,
};
use ringlab::diagnostics::onset::tail_start;
use ringlab::diagnostics::{bessel_j, detect_onset, first_zero, tail_ratio, EigenConstants};
use ringlab::model3d::{init_u0, Kinematics3D, Params3D, State3D};
use ringlab::radial::RadialGrid;
use ringlab::reduced::{KinematicsReduced, ReducedKind, ReducedParams, ReducedState};
use ringlab::report::OnsetKind;
use ringlab::spectral::{AngularPoint, CosineField1D, CosineField2D};
use ringlab::Execution;

/// `(nu, x, J_nu(x))` from a 40-digit reference evaluation.
const BESSEL_TABLE: [(f64, f64, f64); 56] = [
    (0.0, 0.3, 0.977626246538296089),
    (0.0, 1.7, 0.397984859446109517),
    (0.0, 4.4, -0.342256790003885542),
    (0.0, 8.1, 0.14751745404437767),
    (0.0, 12.9, 0.198842437136330987),
    (0.0, 16.6, -0.194827855805565711),
    (0.0, 19.99, 0.16768479902327926),
    (0.5, 0.3, 0.430493517328124558),
    (0.5, 1.7, 0.606848808007617944),
    (0.5, 4.4, -0.361967103971863991),
    (0.5, 8.1, 0.271906724946579856),
    (0.5, 12.9, 0.0727482605111658865),
    (0.5, 16.6, -0.152427071895859158),
    (0.5, 19.99, 0.16218511431940875),
    (1.0, 0.3, 0.148318816273104002),
    (1.0, 1.7, 0.577765231529023217),
    (1.0, 4.4, -0.2027755219230867),
    (1.0, 8.1, 0.247607766981592877),
    (1.0, 12.9, -0.0912482522499393712),
    (1.0, 16.6, -0.0252471115684075154),
    (1.0, 19.99, 0.0651925781421661001),
    (2.5, 0.3, 0.00260530185565866746),
    (2.5, 1.7, 0.162238628329562078),
    (2.5, 4.4, 0.38558321489999138),
    (2.5, 8.1, -0.23418603531231525),
    (2.5, 12.9, -0.120250753618030537),
    (2.5, 16.6, 0.172987397256806432),
    (2.5, 19.99, -0.172140694246679587),
    (3.7, 0.3, 5.76835605992496233e-5),
    (3.7, 1.7, 0.0303916476930098177),
    (3.7, 4.4, 0.379841996150122272),
    (3.7, 8.1, -0.205965318105949934),
    (3.7, 12.9, 0.194284719443610088),
    (3.7, 16.6, -0.109855675836662942),
    (3.7, 19.99, 0.0713847098964638075),
    (5.679, 0.3, 5.24584156761169634e-8),
    (5.679, 1.7, 0.000895591722093384501),
    (5.679, 4.4, 0.103126774301827839),
    (5.679, 8.1, 0.297039506456497726),
    (5.679, 12.9, -0.0605861275771183118),
    (5.679, 16.6, -0.00233806535363455681),
    (5.679, 19.99, 0.016967888265728799),
    (7.25, 0.3, 1.26594191885484178e-10),
    (7.25, 1.7, 3.36517910070995084e-5),
    (7.25, 4.4, 0.0197673876696585606),
    (7.25, 8.1, 0.307064810634845183),
    (7.25, 12.9, -0.229848890891447627),
    (7.25, 16.6, 0.199469703751814711),
    (7.25, 19.99, -0.17723199011803598),
    (10.0, 0.3, 1.58584651570025674e-15),
    (10.0, 1.7, 5.07951650878878652e-8),
    (10.0, 4.4, 0.000467414977200406296),
    (10.0, 8.1, 0.0659429236049341468),
    (10.0, 12.9, 0.244628887108792138),
    (10.0, 16.6, -0.218339047804317692),
    (10.0, 19.99, 0.186156639073728015),
];

#[test]
fn bessel_matches_reference_table() {
    for (nu, x, expect) in BESSEL_TABLE {
        let got = bessel_j(nu, x);
        let tol = 1e-10 * expect.abs().max(1e-3);
        assert!((got - expect).abs() <= tol, "J_{nu}({x}) = {got}, expected {expect}");
    }
}

#[test]
fn first_zero_is_a_sign_change_with_no_earlier_root() {
    for nu in [0.5, 2.5, 5.679, 7.25] {
        let z = first_zero(nu);
        assert!(bessel_j(nu, z).abs() < 1e-12);
        assert!(bessel_j(nu, z - 1e-6) * bessel_j(nu, z + 1e-6) < 0.0);
        let mut x = 1e-3;
        while x < z - 1e-3 {
            assert!(bessel_j(nu, x) > 0.0, "nu = {nu}, x = {x}");
            x += 0.01;
        }
    }
    // J_{1/2} is sin(x) sqrt(2 / (pi x)).
    assert!((first_zero(0.5) - PI).abs() < 1e-12);
}

#[test]
fn eigen_profile_vanishes_at_the_outer_radius() {
    let c = EigenConstants::new(4.0, 0.5, 10.0).unwrap();
    assert!(c.chi_exact(10.0).abs() < 1e-13);
    assert!(c.chi_exact(5.0) > 0.0);
    assert_eq!(c.chi_approx(10.0), 0.0);
    assert!((c.sigma * (c.sigma + 1.0) - 32.0).abs() < 1e-12);
    assert!((c.r_hat - 10.0 * c.ratio).abs() < 1e-14);
}

#[test]
fn tail_ratio_examples() {
    assert_eq!(tail_start(50), 34);
    assert_eq!(tail_start(2), 2);
    let mut c = vec![0.0; 51];
    c[1] = 1.0;
    c[40] = 1.0;
    assert_eq!(tail_ratio(&c), 0.5);
    assert_eq!(tail_ratio(&[0.0; 5]), 0.0);
}

fn trace_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..0.4, 1..40)
}

proptest! {
    #[test]
    fn tail_ratio_is_a_scale_invariant_fraction(v in prop::collection::vec(-3.0f64..3.0, 2..40), s in 0.01f64..100.0) {
        let t = tail_ratio(&v);
        prop_assert!((0.0..=1.0).contains(&t));
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        prop_assert!((tail_ratio(&scaled) - t).abs() < 1e-12);
    }

    #[test]
    fn onset_is_monotone_in_the_threshold(taus in trace_strategy(), lo in 0.0f64..0.4, gap in 0.0f64..0.2) {
        let trace: Vec<(f64, f64)> = taus.iter().enumerate().map(|(i, t)| (i as f64, *t)).collect();
        let a = detect_onset(&trace, lo);
        let b = detect_onset(&trace, lo + gap);
        if let Some(tb) = b.t_onset {
            let ta = a.t_onset.expect("a lower threshold fires whenever a higher one does");
            prop_assert!(ta <= tb);
        }
    }

    #[test]
    fn onset_needs_three_consecutive_samples(taus in trace_strategy()) {
        let trace: Vec<(f64, f64)> = taus.iter().enumerate().map(|(i, t)| (i as f64, *t)).collect();
        let report = detect_onset(&trace, 0.1);
        let expected = (0..taus.len().saturating_sub(2))
            .find(|&i| taus[i..i + 3].iter().all(|t| *t > 0.1))
            .map(|i| i as f64);
        prop_assert_eq!(report.t_onset, expected);
        prop_assert_eq!(report.kind == OnsetKind::TailOscillation, expected.is_some());
    }
}

fn params_3d(m: usize) -> Params3D {
    Params3D {
        grid: RadialGrid::new(10.0, m).unwrap(),
        n: 3,
        ..Params3D::reference()
    }
}

/// Direct quadrature of `int |v|^2 r^2` with `p x p` angular samples per node.
fn l2_direct_3d(kin: &Kinematics3D, p: usize) -> f64 {
    let w = kin.omega();
    let h = 2.0 * PI / (w * p as f64);
    let g = kin.grid();
    let vals: Vec<f64> = (0..g.len())
        .map(|j| {
            let r = g.node(j);
            let mut e = 0.0;
            for a in 0..p {
                for b in 0..p {
                    let pt = AngularPoint {
                        theta: -PI / w + a as f64 * h,
                        phi: -PI / w + b as f64 * h,
                    };
                    let v = kin.velocity_at_node(j, pt);
                    e += v.iter().map(|x| x * x).sum::<f64>();
                }
            }
            r * r * e * h * h
        })
        .collect();
    trapezoid(&vals, g.dr()).sqrt()
}

#[test]
fn l2_norm_3d_matches_direct_quadrature() {
    let params = params_3d(30);
    let state = init_u0(&params).unwrap();
    let kin = Kinematics3D::new(&state, &params.grid);
    let a = l2_velocity_norm_3d(&kin, Execution::Serial);
    let b = l2_direct_3d(&kin, 12);
    assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    assert_eq!(a, l2_velocity_norm_3d(&kin, Execution::Parallel));
}

#[test]
fn l2_norm_3d_single_mode() {
    // d_10 = r^2 on every node: v = (w^2 r cos, w (2r + r) sin, 0).
    let params = params_3d(20);
    let mut state = State3D::zeros(&params).unwrap();
    let w = params.omega;
    for j in 0..params.grid.len() {
        let r = params.grid.node(j);
        state.d[j].set(1, 0, r * r);
    }
    let kin = Kinematics3D::new(&state, &params.grid);
    let got = l2_velocity_norm_3d(&kin, Execution::Serial);
    // Interior stencils are exact on r^2; the end nodes use one-sided
    // differences, so integrate the node values directly.
    let area = (PI / w) * (2.0 * PI / w);
    let vals: Vec<f64> = (0..params.grid.len())
        .map(|j| {
            let r = params.grid.node(j);
            let (d, dp) = kin.node_coeffs(j);
            let (d10, dp10) = (d[params.n + 1], dp[params.n + 1]);
            if j == 0 {
                return 0.0;
            }
            let v1 = w * w * d10 / r;
            let v2 = w * (dp10 + d10 / r);
            r * r * area * (v1 * v1 + v2 * v2)
        })
        .collect();
    let expect = trapezoid(&vals, params.grid.dr()).sqrt();
    assert!((got - expect).abs() < 1e-12 * expect);
    // Away from the ends the node values are exact.
    let (_, dp) = kin.node_coeffs(7);
    assert!((dp[params.n + 1] - 2.0 * params.grid.node(7)).abs() < 1e-12);
}

fn random_reduced(kind: ReducedKind, seed: u64) -> (ReducedParams, ReducedState) {
    let mut params = match kind {
        ReducedKind::Polar2d => ReducedParams::polar_reference(),
        ReducedKind::Cone => ReducedParams::cone_reference(),
    };
    params.n = 6;
    let mut rng = common::rng(seed);
    let mut state = ReducedState::zeros(params.omega, params.n, &params.grid).unwrap();
    for j in 1..params.grid.intervals() {
        state.d[j] = CosineField1D::new(params.omega, common::random_vec(&mut rng, params.n + 1)).unwrap();
    }
    (params, state)
}

#[test]
fn l2_norm_reduced_matches_direct_quadrature() {
    for kind in [ReducedKind::Polar2d, ReducedKind::Cone] {
        let (params, state) = random_reduced(kind, 83);
        let kin = KinematicsReduced::new(kind, &state, &params.grid);
        let p = 32;
        let w = params.omega;
        let h = 2.0 * PI / (w * p as f64);
        let vals: Vec<f64> = (0..params.grid.len())
            .map(|j| {
                let e: f64 = (0..p)
                    .map(|a| {
                        let v = kin.velocity_at_node(j, -PI / w + a as f64 * h);
                        v[0] * v[0] + v[1] * v[1]
                    })
                    .sum();
                params.grid.node(j) * e * h
            })
            .collect();
        let direct = trapezoid(&vals, params.grid.dr()).sqrt();
        let got = l2_velocity_norm_reduced(&kin);
        assert!((got - direct).abs() < 1e-10 * direct, "{kind:?}: {got} vs {direct}");
    }
}

#[test]
fn functionals_vanish_on_the_zero_state() {
    let params = params_3d(12);
    let z = State3D::zeros(&params).unwrap();
    let f = identity_functionals_3d(&Kinematics3D::new(&z, &params.grid));
    assert_eq!((f.first, f.second), (0.0, 0.0));
    assert!(compat_residual_00(&z, &params.grid, Execution::Serial)
        .iter()
        .all(|v| *v == 0.0));

    let rp = ReducedParams::polar_reference();
    let zr = ReducedState::zeros(rp.omega, rp.n, &rp.grid).unwrap();
    let f = identity_functionals_2d(&KinematicsReduced::new(rp.kind, &zr, &rp.grid));
    assert_eq!((f.first, f.second), (0.0, 0.0));
}

#[test]
fn functionals_3d_single_mode() {
    // d_10 = g(r) = r^2 (r_M - r)^2. Angular integrals of cos^2 and sin^2
    // over the square are both 2 pi^2 / w^2.
    let rm = 10.0;
    let g = |r: f64| r * r * (rm - r).powi(2);
    let g1 = |r: f64| 2.0 * r * (rm - r).powi(2) - 2.0 * r * r * (rm - r);
    let params = params_3d(800);
    let w = params.omega;
    let w2 = w * w;
    let mut state = State3D::zeros(&params).unwrap();
    for j in 0..params.grid.len() {
        state.d[j].set(1, 0, g(params.grid.node(j)));
    }
    let f = identity_functionals_3d(&Kinematics3D::new(&state, &params.grid));
    let area = 2.0 * PI * PI / w2;
    // Composite Simpson on a fine grid with exact derivatives.
    let simpson = |h: &dyn Fn(f64) -> f64| {
        let n = 4000;
        let dx = rm / n as f64;
        let s: f64 = (0..=n)
            .map(|i| {
                let wt = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                wt * h(i as f64 * dx)
            })
            .sum();
        s * dx / 3.0
    };
    let first = area * simpson(&|r: f64| (w2 * w2 - w2) * (rm - r).powi(4) * r * r - 0.5 * w2 * g1(r).powi(2));
    let second = area * simpson(&|r: f64| -w2 * w2 * g(r).powi(2) + 0.5 * r * r * w2 * g1(r).powi(2));
    assert!((f.first - first).abs() < 1e-4 * first.abs(), "{} vs {first}", f.first);
    assert!(
        (f.second - second).abs() < 1e-4 * second.abs(),
        "{} vs {second}",
        f.second
    );
}

proptest! {
    #[test]
    fn functionals_2d_are_non_positive(seed in 0u64..1000) {
        for kind in [ReducedKind::Polar2d, ReducedKind::Cone] {
            let (params, state) = random_reduced(kind, seed);
            let f = identity_functionals_2d(&KinematicsReduced::new(kind, &state, &params.grid));
            prop_assert!(f.first <= 0.0 && f.second <= 0.0);
        }
    }

    #[test]
    fn compat_residual_vanishes_at_the_ends(seed in 0u64..200) {
        let params = params_3d(10);
        let mut rng = common::rng(seed);
        let mut state = State3D::zeros(&params).unwrap();
        for j in 0..params.grid.len() {
            state.c[j] = common::random_field_2d(&mut rng, params.omega, params.n);
            state.d[j] = CosineField2D::from_coeffs(params.omega, params.n, common::random_vec(&mut rng, 16)).unwrap();
        }
        let res = compat_residual_00(&state, &params.grid, Execution::Serial);
        prop_assert_eq!(res[0], 0.0);
        prop_assert_eq!(res[params.grid.intervals()], 0.0);
    }
}

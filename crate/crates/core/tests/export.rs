use std::fs;
use std::path::Path;

use proptest::prelude::*;
use ringlab::config::{parse_config, parse_config_for, ModelTag, RunConfig};
use ringlab::export::{run_and_export, Meta, RunStatus, PROFILE_HEADER, SNAPSHOT_HEADER};

const TOY: &str = "model=toy1d\nnu=0.01\nomega=4\nlambda=-3\nmu1=0.5\nmu2=-1.5\nN=20\ndt=1e-4\nt_final=0.02\n";
const POLAR: &str = "model=polar2d\nnu=0.02\nomega=4\nN=8\nM=16\nr_max=8\ndt=1e-4\nt_final=0.01\nsnapshot_every=50\n";
const FULL: &str = "model=full3d\nnu=0.02\nomega=4\nN=3\nM=12\nr_max=10\ndt=1e-4\nt_final=0.003\n";
const STATIONARY: &str = "model=stationary1d\nnu=0.5\nomega=1\nN=12\namplitude=0.5\n";

fn run(text: &str, dir: &Path, threads: Option<usize>) -> Meta {
    run_and_export(&parse_config(text).unwrap(), dir, threads).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn headers_are_fixed() {
    let dir = tempfile::tempdir().unwrap();
    run(TOY, dir.path(), Some(1));
    let snaps = read(dir.path(), "snapshots.csv");
    assert_eq!(
        snaps.lines().next().unwrap(),
        "record,t,model,step,n,l,node,r,c,d,tail_ratio,energy,peak_value,peak_position,max_gradient,zero_mode,l2_velocity,compat_residual,asymmetry"
    );
    assert_eq!(SNAPSHOT_HEADER.join(","), snaps.lines().next().unwrap());
    let profiles = read(dir.path(), "profiles.csv");
    assert_eq!(profiles.lines().next().unwrap(), "t,profile,coordinate,value");
    assert_eq!(PROFILE_HEADER.len(), 4);
    for line in snaps.lines().skip(1) {
        assert_eq!(line.split(',').count(), SNAPSHOT_HEADER.len(), "{line}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    for text in [TOY, POLAR, FULL] {
        let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
        run(text, dirs[0].path(), Some(1));
        run(text, dirs[1].path(), Some(1));
        run(text, dirs[2].path(), Some(3));
        for name in ["snapshots.csv", "profiles.csv"] {
            let a = read(dirs[0].path(), name);
            assert_eq!(a, read(dirs[1].path(), name), "{name} differs between runs");
            assert_eq!(a, read(dirs[2].path(), name), "{name} differs between thread counts");
        }
    }
}

#[test]
fn radial_snapshots_carry_node_and_radius() {
    let dir = tempfile::tempdir().unwrap();
    let meta = run(POLAR, dir.path(), None);
    assert_eq!(meta.status, RunStatus::Completed);
    assert_eq!(meta.steps, 100);
    let snaps = read(dir.path(), "snapshots.csv");
    let coeff: Vec<&str> = snaps.lines().filter(|l| l.starts_with("coeff")).collect();
    // Snapshots at steps 0, 50, 100; (N + 1)(M + 1) rows each.
    assert_eq!(coeff.len(), 3 * 9 * 17);
    let fields: Vec<&str> = coeff[9 * 3 + 1].split(',').collect();
    assert_eq!(&fields[4..8], &["1", "", "3", "1.5"]);
    let diag = snaps.lines().filter(|l| l.starts_with("diag")).count();
    assert_eq!(diag, 11);
}

#[test]
fn zero_amplitude_completes_without_onset() {
    let dir = tempfile::tempdir().unwrap();
    let meta = run(&format!("{TOY}amplitude=0\n"), dir.path(), None);
    assert_eq!(meta.status, RunStatus::Completed);
    assert!(meta.onset.t_onset.is_none());
    assert_eq!(meta.status.exit_code(), 0);
}

#[test]
fn meta_echo_reparses_to_the_same_config() {
    for text in [TOY, POLAR, FULL, STATIONARY] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(text).unwrap();
        run_and_export(&cfg, dir.path(), None).unwrap();
        let meta: Meta = serde_json::from_str(&read(dir.path(), "meta.json")).unwrap();
        assert_eq!(parse_config(&meta.config).unwrap(), cfg);
        assert_eq!(meta.model, cfg.model);
        assert_eq!(meta.version, env!("CARGO_PKG_VERSION"));
        let raw: serde_json::Value = serde_json::from_str(&read(dir.path(), "meta.json")).unwrap();
        for key in ["config", "version", "onset", "status", "wall_time_s"] {
            assert!(raw.get(key).is_some(), "meta.json lacks {key}");
        }
    }
}

#[test]
fn stationary_run_records_solver_summary() {
    let dir = tempfile::tempdir().unwrap();
    let meta = run(STATIONARY, dir.path(), None);
    let s = meta.stationary.expect("stationary summary");
    assert_eq!(meta.status, RunStatus::Completed);
    assert!(s.residual.is_finite());
    let profiles = read(dir.path(), "profiles.csv");
    assert!(profiles.lines().any(|l| l.split(',').nth(1) == Some("u")));
    assert!(profiles.lines().any(|l| l.split(',').nth(1) == Some("psi")));
}

#[test]
fn solver_errors_are_reported_in_meta() {
    // dt far above the explicit limit of the 3D scheme.
    let dir = tempfile::tempdir().unwrap();
    let meta = run(
        &FULL.replace("dt=1e-4", "dt=0.5").replace("t_final=0.003", "t_final=1"),
        dir.path(),
        None,
    );
    assert_eq!(meta.status, RunStatus::Error);
    assert_eq!(meta.status.exit_code(), 1);
    assert!(meta.error.unwrap().contains("stability"));
    assert!(dir.path().join("snapshots.csv").exists());
}

#[test]
fn config_errors() {
    assert!(parse_config_for(TOY, Some(ModelTag::Cone)).is_err());
    assert!(parse_config(&format!("{TOY}nu=0.2\n")).is_err());
    assert!(parse_config(&format!("{TOY}init=custom-coeffs\n")).is_err());
    let short = TOY.replace("N=20", "N=2");
    assert!(parse_config(&format!("{short}init=custom-coeffs\ncoeffs=1\n")).is_err());
    let custom = parse_config(&format!("{short}init=custom-coeffs\ncoeffs=1,0.5\n")).unwrap();
    assert_eq!(custom.init_1d().unwrap().coeffs(), [0.0, 1.0, 0.5]);
    assert!(parse_config(&format!("{POLAR}init=paper3d\n")).is_err());
}

fn toy_config() -> impl Strategy<Value = String> {
    (
        0.0f64..1.0,
        0.5f64..8.0,
        -10.0f64..-0.1,
        -3.0f64..3.0,
        -3.0f64..3.0,
        2usize..80,
        1e-6f64..1e-3,
        0.01f64..5.0,
        prop::sample::select(vec![-1.0, 1.0]),
        1usize..500,
        any::<bool>(),
    )
        .prop_map(|(nu, omega, lambda, mu1, mu2, n, dt, t, sign, every, stop)| {
            format!(
                "model=toy1d\nnu={nu}\nomega={omega}\nlambda={lambda}\nmu1={mu1}\nmu2={mu2}\nN={n}\ndt={dt}\n\
                 t_final={t}\nsign={sign}\ndiag_every={every}\nstop_on_onset={stop}\n"
            )
        })
}

fn radial_config() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["full3d", "polar2d", "cone"]),
        0.0f64..1.0,
        1usize..12,
        4usize..100,
        0.5f64..20.0,
        0.0f64..3.0,
    )
        .prop_map(|(model, nu, n, m, rmax, amp)| {
            format!(
                "model={model}\nnu={nu}\nomega=4\nN={n}\nM={m}\nr_max={rmax}\ndt=1e-5\nt_final=0.1\namplitude={amp}\n"
            )
        })
}

proptest! {
    #[test]
    fn config_text_round_trips(text in prop_oneof![toy_config(), radial_config()]) {
        let cfg: RunConfig = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_text(), cfg.to_text());
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use besovpnp::bundle::verify_bundle;
use besovpnp::plot::{render_svg, Axes, Guide, PlotSeries};
use besovpnp::spec::{parse_spec, parse_spec_str};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

fn scratch(tag: &str) -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join(format!("cli-{tag}-{}-{}", std::process::id(), NEXT.fetch_add(1, Ordering::Relaxed)));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

// Compares against a stored file; BESOVPNP_BLESS=1 rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(GOLDEN).join(name);
    if std::env::var_os("BESOVPNP_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{name} differs from the stored copy");
}

fn besovpnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besovpnp"))
        .args(args)
        .env_remove("BESOVPNP_THREADS")
        .output()
        .unwrap()
}

fn write_spec(dir: &Path, text: &str) -> String {
    let p = dir.join("spec.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn normalized_echo_matches_golden() {
    let spec = parse_spec(&Path::new(GOLDEN).join("sparse-spec.json")).unwrap();
    let echo = spec.normalized().unwrap();
    golden("sparse-spec.echo.json", &echo);
    assert_eq!(parse_spec_str(&echo).unwrap().normalized().unwrap(), echo);
}

#[test]
fn svg_matches_golden() {
    let x: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let series = [
        PlotSeries { name: "a".into(), x: x.clone(), y: x.iter().map(|t| t.powf(-0.5)).collect() },
        PlotSeries { name: "b".into(), x: x.clone(), y: x.iter().map(|t| 3.0 * t.powf(-1.5)).collect() },
    ];
    let axes = Axes {
        title: "decay".into(),
        x_label: "t".into(),
        y_label: "norm".into(),
        guides: vec![Guide { slope: -1.0, label: "slope -1".into() }],
    };
    golden("decay.svg", &render_svg(&series, &axes).unwrap());
}

#[test]
fn bad_exponent_is_a_runtime_error() {
    let dir = scratch("bad-p");
    let spec = write_spec(
        &dir,
        r#"{"kind": "lp-check", "indices": {"p": [0.5]}}"#,
    );
    let out = besovpnp(&["lp-check", "--spec", &spec, "--out", dir.join("b").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid exponent"), "{err}");
    assert!(!dir.join("b").exists());
}

#[test]
fn unknown_field_is_named() {
    let dir = scratch("unknown");
    let spec = write_spec(&dir, r#"{"kind": "lp-check", "grid": {"n": 32, "boxlength": 1.0}}"#);
    let out = besovpnp(&["lp-check", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("boxlength"));
}

#[test]
fn kind_must_match_subcommand() {
    let dir = scratch("kind");
    let spec = write_spec(&dir, r#"{"kind": "lp-check"}"#);
    let out = besovpnp(&["identity-check", "--spec", &spec, "--out", dir.join("b").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
}

#[test]
fn exit_codes_follow_verdicts() {
    let dir = scratch("exit");
    let text = |tol: &str| {
        format!(
            r#"{{"kind": "identity-check",
                "initial": {{"family": "white-band", "params": {{"j1": -1.0, "j2": 1.0}}, "count": 2}},
                "tolerances": {{"bony": {tol}}}}}"#
        )
    };
    let pass = write_spec(&dir, &text("1e-11"));
    let out_dir = dir.join("pass");
    let out = besovpnp(&["identity-check", "--spec", &pass, "--out", out_dir.to_str().unwrap(), "--serial"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS bony-identity")));
    let summary = verify_bundle(&out_dir).unwrap();
    assert!(summary.pass);
    assert_eq!(summary.environment.threads, 1);

    let fail = write_spec(&dir, &text("1e-300"));
    let out_dir = dir.join("fail");
    let out = besovpnp(&["identity-check", "--spec", &fail, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL bony-identity"));
    assert!(!verify_bundle(&out_dir).unwrap().pass);
}

#[test]
fn existing_non_bundle_is_not_overwritten() {
    let dir = scratch("clobber");
    let target = dir.join("precious");
    fs::create_dir_all(&target).unwrap();
    fs::write(target.join("notes.txt"), "keep").unwrap();
    let spec = write_spec(&dir, r#"{"kind": "lp-check", "initial": {"count": 1}}"#);
    let out = besovpnp(&["lp-check", "--spec", &spec, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_to_string(target.join("notes.txt")).unwrap(), "keep");
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = scratch("threads");
    let spec = write_spec(&dir, r#"{"kind": "lp-check", "initial": {"count": 1}}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_besovpnp"))
        .args(["lp-check", "--spec", &spec, "--out", dir.join("b").to_str().unwrap()])
        .env("BESOVPNP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("BESOVPNP_THREADS"));
}

#[test]
fn sweep_writes_one_bundle_per_seed() {
    let dir = scratch("sweep");
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/specs/sweep.json");
    let out_dir = dir.join("sweep");
    let out = besovpnp(&["sweep", "--spec", spec, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = verify_bundle(&out_dir).unwrap();
    assert_eq!(summary.files.bundles, ["seed-1", "seed-2", "seed-3", "seed-4"]);
    for b in &summary.files.bundles {
        let child = verify_bundle(&out_dir.join(b)).unwrap();
        assert_eq!(child.kind, "identity-check");
        assert!(child.pass);
    }
}

#[test]
fn seed_flag_overrides_the_spec() {
    let dir = scratch("seed");
    let spec = write_spec(&dir, r#"{"kind": "lp-check", "initial": {"count": 1, "seed": 3}}"#);
    let out_dir = dir.join("b");
    let out = besovpnp(&["lp-check", "--spec", &spec, "--out", out_dir.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let echo = parse_spec(&out_dir.join("spec.json")).unwrap();
    assert_eq!(echo.initial.seed, 42);
}

//! Acceptance run: every shipped spec at full size, checked against pinned
//! limits, plus a byte-for-byte reproducibility check of the binary.
//! Prints one line per criterion and exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use besovpnp::bundle::{write_bundle, Environment};
use besovpnp::experiments::{run_experiment, Outcome};
use besovpnp::spec::parse_spec;

const SLOPE: f64 = 0.03;
const ORACLE_FIDELITY: f64 = 0.02;
const MONOTONE: f64 = 1e-12;
const LP: f64 = 1e-12;
const BONY: f64 = 1e-11;
const INTERPOLATION: f64 = 1.0 + 1e-10;
const IDENTITY: f64 = 1e-10;
const SCALING: f64 = 1e-10;
const MASS: f64 = 1e-12;
const DIVERGENCE: f64 = 1e-10;
const ORDER: f64 = 1.9;
const BASELINE: f64 = 0.15;
const NEGATIVE_NORM: f64 = 1.01;

const SPECS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/specs");

fn scratch() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

struct Runs {
    cache: BTreeMap<&'static str, Outcome>,
}

impl Runs {
    fn get(&mut self, name: &'static str) -> Result<&Outcome, String> {
        if !self.cache.contains_key(name) {
            let spec = parse_spec(&Path::new(SPECS).join(format!("{name}.json"))).map_err(|e| e.to_string())?;
            let out = run_experiment(&spec).map_err(|e| e.to_string())?;
            write_bundle(&scratch().join(name), &spec, &out, &Environment::current(false))
                .map_err(|e| e.to_string())?;
            self.cache.insert(name, out);
        }
        Ok(&self.cache[name])
    }
}

/// Checks every verdict whose name starts with one of `prefixes` against
/// `limit`; returns the worst value seen.
fn bounded(out: &Outcome, prefixes: &[&str], limit: f64, lower: bool) -> Result<String, String> {
    let hits: Vec<_> = out
        .verdicts
        .iter()
        .filter(|v| prefixes.iter().any(|p| v.name.starts_with(p)))
        .collect();
    for p in prefixes {
        if !hits.iter().any(|v| v.name.starts_with(p)) {
            return Err(format!("no `{p}` verdict"));
        }
    }
    let mut worst = if lower { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut bad = Vec::new();
    for v in hits {
        let ok = if lower { v.value >= limit } else { v.value <= limit };
        if !ok {
            bad.push(format!("{}={:.3e}", v.name, v.value));
        }
        worst = if lower { worst.min(v.value) } else { worst.max(v.value) };
    }
    let op = if lower { ">=" } else { "<=" };
    let msg = format!("worst {worst:.3e} {op} {limit:e}");
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; failing {}", bad.join(", ")))
    }
}

fn flag(out: &Outcome, name: &str) -> Result<String, String> {
    match out.verdict(name) {
        Some(v) if v.pass => Ok(format!("{name} holds")),
        Some(_) => Err(format!("{name} does not hold")),
        None => Err(format!("no `{name}` verdict")),
    }
}

fn join(parts: Vec<Result<String, String>>) -> Result<String, String> {
    let (ok, err): (Vec<_>, Vec<_>) = parts.into_iter().partition(|r| r.is_ok());
    if err.is_empty() {
        Ok(ok.into_iter().map(Result::unwrap).collect::<Vec<_>>().join("; "))
    } else {
        Err(err.into_iter().map(Result::unwrap_err).collect::<Vec<_>>().join("; "))
    }
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut all = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                all.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    all
}

fn reproducible() -> Result<String, String> {
    let mut compared = 0;
    for (name, kind) in [("heat-oracle", "heat-decay"), ("sweep", "sweep"), ("lp-check", "lp-check")] {
        let mut trees = Vec::new();
        for round in 0..2 {
            let dir = scratch().join(format!("repro-{name}-{round}"));
            let out = Command::new(env!("CARGO_BIN_EXE_besovpnp"))
                .args([kind, "--serial", "--spec"])
                .arg(Path::new(SPECS).join(format!("{name}.json")))
                .arg("--out")
                .arg(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{name}: exit {:?}", out.status.code()));
            }
            trees.push(files(&dir));
        }
        if trees[0] != trees[1] {
            let differ: Vec<_> = trees[0]
                .iter()
                .filter(|(k, v)| trees[1].get(*k) != Some(v))
                .map(|(k, _)| k.display().to_string())
                .collect();
            return Err(format!("{name}: bundles differ in {differ:?}"));
        }
        compared += trees[0].len();
    }
    Ok(format!("{compared} files identical across two serial runs"))
}

fn main() -> ExitCode {
    let _ = fs::create_dir_all(scratch());
    let mut runs = Runs { cache: BTreeMap::new() };
    type Check = fn(&mut Runs) -> Result<String, String>;
    let criteria: [(&str, Check); 11] = [
        ("heat oracle decay slopes and bounds", |r| {
            let o = r.get("heat-oracle")?;
            join(vec![bounded(o, &["oracle-slope"], SLOPE, false), bounded(o, &["oracle-bound"], 1.0, false)])
        }),
        ("heat flow on the box tracks the whole-space oracle", |r| {
            bounded(r.get("heat-torus")?, &["oracle-fidelity"], ORACLE_FIDELITY, false)
        }),
        ("heat flow never increases Besov norms", |r| {
            bounded(r.get("heat-monotone")?, &["monotone:"], MONOTONE, false)
        }),
        ("Littlewood-Paley partition, reconstruction, orthogonality, Bernstein", |r| {
            bounded(
                r.get("lp-check")?,
                &["partition-unity", "reconstruction", "block-support", "block-orthogonality", "product-orthogonality", "bernstein-p2"],
                LP,
                false,
            )
        }),
        ("Bony decomposition and block supports", |r| {
            bounded(r.get("identity-check")?, &["bony-identity", "paraproduct-support", "remainder-support"], BONY, false)
        }),
        ("Besov interpolation with constant one", |r| {
            bounded(r.get("besov-interpolation")?, &["interpolation"], INTERPOLATION, false)
        }),
        ("Lorentz stress and splitting identities", |r| {
            bounded(r.get("identity-check")?, &["lorentz-stress", "splitting"], IDENTITY, false)
        }),
        ("critical norms invariant under dyadic rescaling", |r| {
            bounded(r.get("besov-scaling")?, &["critical-scaling"], SCALING, false)
        }),
        ("solver conservation, incompressibility and temporal order", |r| {
            let o = r.get("nspnp-simulate")?;
            join(vec![
                bounded(o, &["mass-drift-v", "mass-drift-w"], MASS, false),
                bounded(o, &["divergence"], DIVERGENCE, false),
                bounded(o, &["manufactured-order"], ORDER, true),
            ])
        }),
        ("coupled decay against the heat baseline", |r| {
            let o = r.get("nspnp-decay")?;
            join(vec![
                bounded(o, &["baseline-slope-gap"], BASELINE, false),
                flag(o, "energy-finite-k"),
                bounded(o, &["negative-norm-ratio"], NEGATIVE_NORM, false),
            ])
        }),
        ("serial runs are byte-for-byte reproducible", |_| reproducible()),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = check(&mut runs);
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({secs:.1} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use super::*;
use crate::heat::heat_multiplier;
use crate::spectral::{random_spectrum, GaussianBump, WhiteBand};

fn grid() -> GridSpec {
    GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap()
}

fn state(seed: u64, amp: f64) -> FluidState {
    let law = GaussianBump { k0: 2.0, width: 1.0 };
    let recipe = RandomInitialData {
        velocity_law: &law,
        charge_law: &law,
        amplitudes: [amp, amp, 0.5 * amp],
        background: 1.0,
    };
    random_state(&grid(), &recipe, seed).unwrap()
}

#[test]
fn quiescent_state_is_fixed() {
    let g = grid();
    let mut s = FluidState::zeros(g);
    s.v.coeffs_mut()[0] = Complex64::new(2.0, 0.0);
    s.w.coeffs_mut()[0] = Complex64::new(2.0, 0.0);
    let sys = NspnpSystem::new(PhysicalParams::default(), g, true).unwrap();
    let r = sys.rhs(&s).unwrap();
    assert!(r.fields().iter().all(|f| f.coeff_norm() == 0.0));
}

#[test]
fn equal_charges_diffuse_like_heat() {
    // with u = 0 and v = w the potential vanishes and each density solves
    // the heat equation exactly under the integrating factor
    let g = grid();
    let f = random_spectrum(&g, &WhiteBand::new(0, 2), 3).unwrap();
    let mut s = FluidState::zeros(g);
    s.v = f.clone();
    s.w = f.clone();
    let mut cfg = SolverConfig::new(g, 0.05, 0.5);
    cfg.besov_pq = None;
    let traj = simulate(s, cfg, &mut []).unwrap();
    let exact = heat_multiplier(&f, 0.5, 1.0);
    let out = &traj.final_state;
    assert!(out.v.sub(&exact).coeff_norm() < 1e-13 * exact.coeff_norm());
    assert!((out.time - 0.5).abs() < 1e-14);
}

#[test]
fn invariants_hold_along_a_run() {
    let s = state(11, 0.3);
    let (mv, mw) = (s.v.mean(), s.w.mean());
    let mut cfg = SolverConfig::new(grid(), 0.02, 0.4);
    cfg.diagnostics_stride = 5;
    let traj = simulate(s, cfg, &mut []).unwrap();
    assert_eq!(traj.diagnostics.len(), 5);
    for d in &traj.diagnostics {
        assert!(d.div_u_norm < 1e-12, "{}", d.div_u_norm);
        assert!((d.mass_v - mv).abs() < 1e-13 && (d.mass_w - mw).abs() < 1e-13);
        assert!(d.force_gap < 1e-12);
        assert!(d.besov_e.unwrap() > 0.0);
    }
    let e0 = traj.diagnostics[0].besov_e.unwrap();
    let e1 = traj.diagnostics.last().unwrap().besov_e.unwrap();
    assert!(e1 < e0);
}

fn run_to(s: &FluidState, scheme: &str, dt: f64, t: f64) -> FluidState {
    let mut cfg = SolverConfig::new(grid(), dt, t);
    cfg.integrator = scheme.into();
    cfg.besov_pq = None;
    cfg.diagnostics_stride = 1000;
    simulate(s.clone(), cfg, &mut []).unwrap().final_state
}

fn gap(a: &FluidState, b: &FluidState) -> f64 {
    state_distance(a, b)
}

#[test]
fn schemes_reach_their_order() {
    let s = state(5, 1.0);
    for (scheme, order) in [("if-rk2", 2.0), ("if-rk4", 4.0)] {
        let reference = run_to(&s, "if-rk4", 0.0025, 0.2);
        let e1 = gap(&run_to(&s, scheme, 0.04, 0.2), &reference);
        let e2 = gap(&run_to(&s, scheme, 0.02, 0.2), &reference);
        let observed = (e1 / e2).log2();
        assert!((observed - order).abs() < 0.3, "{scheme}: {observed}");
    }
}

#[test]
fn rejects_bad_inputs() {
    let mut s = state(2, 0.3);
    s.v.coeffs_mut()[0] = Complex64::new(1.5, 0.0);
    assert!(matches!(s.check_net_charge(), Err(Error::NetCharge(_))));
    let sys = NspnpSystem::new(PhysicalParams::default(), grid(), true).unwrap();
    assert!(matches!(sys.rhs(&s), Err(Error::NetCharge(_))));

    let s = state(2, 50.0);
    assert!(matches!(
        Simulation::new(s.clone(), SolverConfig::new(grid(), 0.5, 1.0)),
        Err(Error::CflViolated { .. })
    ));
    let mut cfg = SolverConfig::new(grid(), 0.001, 0.01);
    cfg.integrator = "euler".into();
    assert!(matches!(Simulation::new(s, cfg), Err(Error::UnknownStrategy(_))));
    let bad = PhysicalParams {
        eps: 0.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn observer_failure_keeps_last_state() {
    let s = state(9, 0.2);
    let cfg = SolverConfig::new(grid(), 0.01, 0.1);
    let mut sim = Simulation::new(s, cfg).unwrap();
    let mut obs = |st: &FluidState, _: &StepDiagnostics| {
        if st.time > 0.045 {
            Err("stop".to_string())
        } else {
            Ok(())
        }
    };
    let err = sim.run(&mut [&mut obs]).unwrap_err();
    assert!(matches!(err, Error::ObserverFailed { .. }));
    assert!((sim.state().time - 0.05).abs() < 1e-12);
    assert_eq!(sim.step_index(), 5);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let s = state(4, 0.7);
    let p = PhysicalParams {
        mu: 0.3,
        ..Default::default()
    };
    let mut buf = Vec::new();
    encode_checkpoint(&mut buf, &s, &p, 17).unwrap();
    assert_eq!(&buf[..6], CHECKPOINT_MAGIC);
    assert_eq!(buf.len(), 6 + 8 * 10 + 5 * 16 * grid().len());
    let back = decode_checkpoint(&mut buf.as_slice()).unwrap();
    assert_eq!(back.state, s);
    assert_eq!(back.params, p);
    assert_eq!(back.step, 17);
    assert!(decode_checkpoint(&mut &buf[..buf.len() - 1]).is_err());
    let mut junk = buf.clone();
    junk[0] = b'X';
    assert!(decode_checkpoint(&mut junk.as_slice()).is_err());
}

#[test]
fn manufactured_solution_converges_at_scheme_order() {
    let params = PhysicalParams {
        mu: 0.5,
        d1: 0.7,
        d2: 0.3,
        ..Default::default()
    };
    for (scheme, order) in [("if-rk2", 2.0), ("if-rk4", 4.0)] {
        let study = manufactured_order(16, params, scheme, 0.04, 0.8).unwrap();
        assert!((study.observed_order - order).abs() < 0.25, "{study:?}");
    }
}

//! Integrating-factor Runge–Kutta schemes.
//!
//! With `E(h) = e^{-h L}` the exact diffusion semigroup and `N` the
//! nonlinear right side, the schemes only ever apply `E` to whole stages,
//! so the linear part is integrated without error.

use super::{FluidState, NspnpSystem};
use crate::error::{Error, Result};

/// One time-stepping rule behind a common interface.
pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Formal order of accuracy.
    fn order(&self) -> u32;

    /// Advances `state` by `dt`. The result is neither projected nor
    /// mean-corrected; the caller does that.
    fn advance(&self, sys: &NspnpSystem, state: &FluidState, dt: f64) -> Result<FluidState>;
}

/// Heun's method in integrating-factor form.
#[derive(Clone, Copy, Debug, Default)]
pub struct IfRk2;

impl Integrator for IfRk2 {
    fn name(&self) -> &'static str {
        "if-rk2"
    }

    fn order(&self) -> u32 {
        2
    }

    fn advance(&self, sys: &NspnpSystem, s: &FluidState, dt: f64) -> Result<FluidState> {
        let e = sys.decay_factors(dt);
        let a = sys.rhs(s)?;
        let predictor = s.axpy(dt, &a).decayed(&e).at(s.time + dt);
        let b = sys.rhs(&predictor)?;
        Ok(s.axpy(0.5 * dt, &a).decayed(&e).axpy(0.5 * dt, &b))
    }
}

/// Classical fourth-order Runge–Kutta in integrating-factor form.
#[derive(Clone, Copy, Debug, Default)]
pub struct IfRk4;

impl Integrator for IfRk4 {
    fn name(&self) -> &'static str {
        "if-rk4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn advance(&self, sys: &NspnpSystem, s: &FluidState, dt: f64) -> Result<FluidState> {
        let half = sys.decay_factors(0.5 * dt);
        let full = sys.decay_factors(dt);
        let a = sys.rhs(s)?;
        let t_half = s.time + 0.5 * dt;
        let s1 = s.axpy(0.5 * dt, &a).decayed(&half).at(t_half);
        let b = sys.rhs(&s1)?;
        let s_half = s.decayed(&half).at(t_half);
        let s2 = s_half.axpy(0.5 * dt, &b);
        let c = sys.rhs(&s2)?;
        let s3 = s_half.axpy(dt, &c).decayed(&half).at(s.time + dt);
        let d = sys.rhs(&s3)?;
        // E u + dt/6 (E a + 2 E_{1/2}(b + c) + d)
        let mid = b.axpy(1.0, &c).decayed(&half).scaled(2.0);
        let lin = s.axpy(dt / 6.0, &a).decayed(&full);
        Ok(lin.axpy(dt / 6.0, &mid).axpy(dt / 6.0, &d))
    }
}

type Builder = fn() -> Box<dyn Integrator>;

/// Registered integrators, by config name.
pub const INTEGRATORS: &[(&str, Builder)] = &[
    ("if-rk2", || Box::new(IfRk2)),
    ("if-rk4", || Box::new(IfRk4)),
];

pub fn integrator(name: &str) -> Result<Box<dyn Integrator>> {
    INTEGRATORS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, b)| b())
        .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
}

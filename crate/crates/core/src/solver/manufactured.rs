//! A closed-form trajectory and the body force that makes it an exact
//! solution of the semi-discrete system.
//!
//! `X(t) = (a(t)(sin y, 0, 0) + b(t)(0, 0, sin x), n + c(t) cos(x+y),
//! n + d(t) cos z)` with smooth time factors. The force is
//! `f = X' + L X − N(X)`, with `N` the discrete nonlinear right side and
//! `L` the diffusion operator, so the integrator error is all that
//! separates a run from `X`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FluidState, Forcing, NspnpSystem, PhysicalParams, Simulation, SolverConfig};
use crate::error::Result;
use crate::spectral::{forward_transform, GridSpec, ScalarField, SpectrumField, VectorSpectrum};

#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    system: NspnpSystem,
    background: f64,
    shear_y: SpectrumField,
    shear_x: SpectrumField,
    wave_v: SpectrumField,
    wave_w: SpectrumField,
}

fn pattern(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Result<SpectrumField> {
    Ok(forward_transform(&ScalarField::from_fn(grid, f)?))
}

// (value, derivative) of each time factor
fn factors(t: f64) -> [(f64, f64); 4] {
    [
        (0.3 * t.cos(), -0.3 * t.sin()),
        (0.2 * (-0.5 * t).exp(), -0.1 * (-0.5 * t).exp()),
        (0.25 * (t + 0.5).sin(), 0.25 * (t + 0.5).cos()),
        (0.2 * (2.0 * t).cos(), -0.4 * (2.0 * t).sin()),
    ]
}

impl ManufacturedSolution {
    /// The box must have side `2π` so that the patterns are periodic.
    pub fn new(grid: GridSpec, params: PhysicalParams, background: f64) -> Result<Self> {
        let system = NspnpSystem::new(params, grid, true)?;
        Ok(Self {
            system,
            background,
            shear_y: pattern(grid, |x| x[1].sin())?,
            shear_x: pattern(grid, |x| x[0].sin())?,
            wave_v: pattern(grid, |x| (x[0] + x[1]).cos())?,
            wave_w: pattern(grid, |x| x[2].cos())?,
        })
    }

    fn combine(&self, coef: [f64; 4], background: f64, t: f64) -> FluidState {
        let g = self.system.grid;
        let zero = SpectrumField::zeros(g);
        let u = VectorSpectrum::new([
            self.shear_y.scaled(coef[0]),
            zero.clone(),
            self.shear_x.scaled(coef[1]),
        ])
        .expect("same grid");
        let mut v = self.wave_v.scaled(coef[2]);
        let mut w = self.wave_w.scaled(coef[3]);
        v.coeffs_mut()[0].re += background;
        w.coeffs_mut()[0].re += background;
        FluidState { u, v, w, time: t }
    }

    pub fn exact(&self, t: f64) -> FluidState {
        self.combine(factors(t).map(|f| f.0), self.background, t)
    }

    fn derivative(&self, t: f64) -> FluidState {
        self.combine(factors(t).map(|f| f.1), 0.0, t)
    }
}

/// Errors against the exact trajectory at `dt` and `dt/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderStudy {
    pub integrator: String,
    pub dt: [f64; 2],
    pub errors: [f64; 2],
    /// `log₂(e(dt) / e(dt/2))`.
    pub observed_order: f64,
}

/// Largest per-field coefficient distance between two states.
pub fn state_distance(a: &FluidState, b: &FluidState) -> f64 {
    a.fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| x.sub(y).coeff_norm())
        .fold(0.0, f64::max)
}

/// Runs the manufactured problem on the `2π` box with `n` points per axis.
pub fn manufactured_order(
    n: usize,
    params: PhysicalParams,
    integrator: &str,
    dt: f64,
    t_end: f64,
) -> Result<OrderStudy> {
    let g = GridSpec::new(n, 2.0 * std::f64::consts::PI)?;
    let mms = Arc::new(ManufacturedSolution::new(g, params, 0.5)?);
    let err = |h: f64| -> Result<f64> {
        let mut cfg = SolverConfig::new(g, h, t_end);
        cfg.params = params;
        cfg.integrator = integrator.into();
        cfg.besov_pq = None;
        cfg.diagnostics_stride = usize::MAX;
        let mut sim = Simulation::with_forcing(mms.exact(0.0), cfg, Some(mms.clone()))?;
        sim.run(&mut [])?;
        Ok(state_distance(sim.state(), &mms.exact(sim.state().time)))
    };
    let errors = [err(dt)?, err(dt / 2.0)?];
    Ok(OrderStudy {
        integrator: integrator.into(),
        dt: [dt, dt / 2.0],
        errors,
        observed_order: (errors[0] / errors[1]).log2(),
    })
}

impl Forcing for ManufacturedSolution {
    fn at(&self, t: f64) -> Result<FluidState> {
        let x = self.exact(t);
        let n = self.system.rhs(&x)?;
        let g = self.system.grid;
        let p = &self.system.params;
        let lin = |f: &SpectrumField, d: f64| f.map_real(|i| d * g.k_squared(i));
        let diffusion = FluidState {
            u: x.u.map(|c| lin(c, p.mu)),
            v: lin(&x.v, p.d1),
            w: lin(&x.w, p.d2),
            time: t,
        };
        Ok(self.derivative(t).axpy(1.0, &diffusion).axpy(-1.0, &n))
    }
}

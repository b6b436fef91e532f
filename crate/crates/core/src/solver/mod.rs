//! Pseudo-spectral solver for the Navier–Stokes–Poisson–Nernst–Planck
//! system on the periodic box:
//!
//! ```text
//! ∂_t u + u·∇u − μΔu + ∇Π = εΔφ∇φ,   ∇·u = 0
//! ∂_t v + u·∇v = ∇·(D₁∇v − ν₁ v∇φ)
//! ∂_t w + u·∇w = ∇·(D₂∇w + ν₂ w∇φ)
//! εΔφ = v − w
//! ```
//!
//! Fields are held as spectra. Diffusion is integrated exactly by an
//! integrating factor; transport, drift and the Lorentz force are explicit,
//! evaluated in divergence form with 2/3-rule dealiased products, and the
//! pressure is removed by the Leray projector.

mod checkpoint;
mod initial;
mod integrator;
mod manufactured;

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, besov_norm_vector, BesovIndex};
use crate::error::{Error, Result};
use crate::littlewood_paley::{build_partition, DyadicPartition};
use crate::spectral::{
    divergence, forward_many, gradient, inverse_laplacian, inverse_laplacian_gauged, inverse_many, inverse_neg_laplacian,
    inverse_real, laplacian, leray_project, partial, GridSpec, SpectrumField,
    VectorSpectrum,
};

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint,
    CHECKPOINT_MAGIC,
};
pub use integrator::{integrator, IfRk2, IfRk4, Integrator, INTEGRATORS};
pub use initial::{gaussian_blob_state, random_state, GaussianBlobs, RandomInitialData};
pub use manufactured::{manufactured_order, state_distance, ManufacturedSolution, OrderStudy};

/// Physical coefficients of the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    pub mu: f64,
    pub eps: f64,
    pub d1: f64,
    pub d2: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            eps: 1.0,
            d1: 1.0,
            d2: 1.0,
            nu1: 1.0,
            nu2: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn as_array(&self) -> [f64; 6] {
        [self.mu, self.eps, self.d1, self.d2, self.nu1, self.nu2]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            mu: a[0],
            eps: a[1],
            d1: a[2],
            d2: a[3],
            nu1: a[4],
            nu2: a[5],
        }
    }

    /// Every coefficient must be positive; `ν₁ = ν₂ = 0` is also accepted
    /// to switch the drift off.
    pub fn validate(&self) -> Result<()> {
        let names = ["mu", "eps", "D1", "D2", "nu1", "nu2"];
        for (i, (n, x)) in names.iter().zip(self.as_array()).enumerate() {
            let ok = if i >= 4 { x >= 0.0 } else { x > 0.0 };
            if !(ok && x.is_finite()) {
                return Err(Error::InvalidArgument(format!("parameter {n} = {x}")));
            }
        }
        Ok(())
    }
}

/// Velocity and the two charge densities at one time, as spectra.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub u: VectorSpectrum,
    pub v: SpectrumField,
    pub w: SpectrumField,
    pub time: f64,
}

impl FluidState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            u: VectorSpectrum::zeros(grid),
            v: SpectrumField::zeros(grid),
            w: SpectrumField::zeros(grid),
            time: 0.0,
        }
    }

    /// Checks the invariants: matching grids, divergence-free velocity,
    /// zero net charge.
    pub fn new(u: VectorSpectrum, v: SpectrumField, w: SpectrumField, time: f64) -> Result<Self> {
        let g = *u.grid();
        if *v.grid() != g || *w.grid() != g {
            return Err(Error::GridMismatch);
        }
        let s = Self { u, v, w, time };
        let div = s.divergence_ratio();
        if div > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "velocity is not divergence-free (‖∇·u‖/‖∇u‖ = {div:.3e})"
            )));
        }
        s.check_net_charge()?;
        Ok(s)
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub(crate) fn fields(&self) -> [&SpectrumField; 5] {
        let [a, b, c] = self.u.components();
        [a, b, c, &self.v, &self.w]
    }

    fn from_fields(f: [SpectrumField; 5], time: f64) -> Self {
        let [a, b, c, v, w] = f;
        Self {
            u: VectorSpectrum::new([a, b, c]).expect("same grid"),
            v,
            w,
            time,
        }
    }

    fn zip(&self, other: &Self, op: impl Fn(&SpectrumField, &SpectrumField) -> SpectrumField) -> Self {
        let a = self.fields();
        let b = other.fields();
        Self::from_fields(std::array::from_fn(|i| op(a[i], b[i])), self.time)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip(other, |x, y| x.zip_with(y, |p, q| p + q * a))
    }

    /// The same fields stamped with time `t`.
    pub fn at(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_fields(self.fields().map(|f| f.scaled(a)), self.time)
    }

    /// Applies per-field diagonal multipliers.
    pub(crate) fn decayed(&self, e: &DecayFactors) -> Self {
        let f = self.fields();
        let m = [&e.u, &e.u, &e.u, &e.v, &e.w];
        Self::from_fields(
            std::array::from_fn(|i| f[i].map_real(|k| m[i][k])),
            self.time,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.fields()
            .iter()
            .all(|f| f.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    /// `‖∇·u‖_{L²} / ‖∇u‖_{L²}` (zero for a constant velocity).
    pub fn divergence_ratio(&self) -> f64 {
        let div = divergence(&self.u).l2_norm();
        let grad = self
            .u
            .components()
            .iter()
            .map(|c| gradient(c).l2_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        if grad > 0.0 {
            div / grad
        } else {
            div
        }
    }

    pub fn check_net_charge(&self) -> Result<()> {
        let q = self.v.mean() - self.w.mean();
        let scale = self.v.coeff_norm().max(self.w.coeff_norm()).max(1.0);
        if q.abs() > 1e-12 * scale {
            return Err(Error::NetCharge(q));
        }
        Ok(())
    }
}

/// `e^{-h L}` per field, tabulated on the grid.
#[derive(Clone, Debug)]
pub(crate) struct DecayFactors {
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

/// `φ` with `εΔφ = v − w`, zero-mode gauge.
pub fn compute_potential(state: &FluidState, params: &PhysicalParams) -> Result<SpectrumField> {
    state.check_net_charge()?;
    Ok(inverse_laplacian_gauged(&state.v.sub(&state.w)).scaled(1.0 / params.eps))
}

/// `εΔφ ∇φ`, as the dealiased product of `εΔφ` and `∇φ`.
pub fn lorentz_force(state: &FluidState, params: &PhysicalParams) -> Result<VectorSpectrum> {
    let phi = compute_potential(state, params)?;
    let lap = laplacian(&phi).scaled(params.eps);
    let g = gradient(&phi);
    Ok(g.map(|c| crate::spectral::dealiased_product(&lap, c)))
}

/// Relative gap between `εΔφ∇φ` and `−(v−w)∇(−Δ)^{-1}(v−w)/ε`.
pub fn lorentz_crosscheck(state: &FluidState, params: &PhysicalParams) -> Result<f64> {
    let a = lorentz_force(state, params)?;
    let rho = state.v.sub(&state.w).without_mean();
    let pot = inverse_neg_laplacian(&rho);
    let b = gradient(&pot).map(|c| crate::spectral::dealiased_product(&rho, c).scaled(-1.0 / params.eps));
    let d = a.sub(&b).l2_norm();
    let s = a.l2_norm().max(b.l2_norm());
    Ok(if s > 0.0 { d / s } else { d })
}

/// Time-dependent body force added to the nonlinear right side.
pub trait Forcing: Send + Sync + std::fmt::Debug {
    fn at(&self, t: f64) -> Result<FluidState>;
}

/// The semi-discrete system: parameters, grid, whether products are
/// dealiased, and an optional body force.
#[derive(Clone, Debug)]
pub struct NspnpSystem {
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub dealias: bool,
    pub forcing: Option<Arc<dyn Forcing>>,
    tables: Arc<AxisTables>,
    decay_cache: Arc<Mutex<Vec<(f64, Arc<DecayFactors>)>>>,
}

/// Per-axis wavenumbers, indexed by FFT position.
#[derive(Debug)]
struct AxisTables {
    /// True wavenumber `2πm/L`.
    k: Vec<f64>,
    /// Derivative wavenumber: as `k` but zero at Nyquist.
    kd: Vec<f64>,
    /// Inside the 2/3-rule band.
    band: Vec<bool>,
}

impl AxisTables {
    fn new(g: &GridSpec) -> Self {
        let n = g.n();
        let half = -((n / 2) as i64);
        let k = (0..n).map(|i| g.unit() * g.lattice(i) as f64).collect();
        let kd = (0..n)
            .map(|i| {
                let m = g.lattice(i);
                if m == half {
                    0.0
                } else {
                    g.unit() * m as f64
                }
            })
            .collect();
        let band = (0..n).map(|i| g.lattice(i).abs() <= g.dealias_index()).collect();
        Self { k, kd, band }
    }
}

impl NspnpSystem {
    pub fn new(params: PhysicalParams, grid: GridSpec, dealias: bool) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            grid,
            dealias,
            forcing: None,
            tables: Arc::new(AxisTables::new(&grid)),
            decay_cache: Arc::default(),
        })
    }

    pub fn with_forcing(mut self, f: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(f);
        self
    }

    pub(crate) fn decay_factors(&self, h: f64) -> Arc<DecayFactors> {
        let mut cache = self.decay_cache.lock().expect("decay cache poisoned");
        if let Some((_, f)) = cache.iter().find(|(k, _)| *k == h) {
            return f.clone();
        }
        let t = &self.tables;
        let n = self.grid.n();
        let mut k2 = Vec::with_capacity(self.grid.len());
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    k2.push(t.k[a] * t.k[a] + t.k[b] * t.k[b] + t.k[c] * t.k[c]);
                }
            }
        }
        let tab = |d: f64| k2.iter().map(|k| (-d * h * k).exp()).collect();
        let f = Arc::new(DecayFactors {
            u: tab(self.params.mu),
            v: tab(self.params.d1),
            w: tab(self.params.d2),
        });
        if cache.len() >= 4 {
            cache.remove(0);
        }
        cache.push((h, f.clone()));
        f
    }

    /// Nonlinear right side `(du, dv, dw)`, diffusion excluded:
    /// `du = P(−∇·(u⊗u) + εΔφ∇φ)`, `dv = −∇·(v(u + ν₁∇φ))`,
    /// `dw = −∇·(w(u − ν₂∇φ))`.
    pub fn rhs(&self, s: &FluidState) -> Result<FluidState> {
        s.check_net_charge()?;
        let p = &self.params;
        let g = self.grid;
        let n = g.n();
        let t = &self.tables;
        let len = g.len();
        let zero = Complex64::new(0.0, 0.0);

        // ∇φ with εΔφ = v − w, in one pass
        let (vc, wc) = (s.v.coeffs(), s.w.coeffs());
        let mut dphi = [vec![zero; len], vec![zero; len], vec![zero; len]];
        let mut idx = 0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let k2 = t.k[a] * t.k[a] + t.k[b] * t.k[b] + t.k[c] * t.k[c];
                    if idx != 0 {
                        let phi = (vc[idx] - wc[idx]) * (-1.0 / (p.eps * k2));
                        let iphi = Complex64::new(-phi.im, phi.re);
                        dphi[0][idx] = iphi * t.kd[a];
                        dphi[1][idx] = iphi * t.kd[b];
                        dphi[2][idx] = iphi * t.kd[c];
                    }
                    idx += 1;
                }
            }
        }
        let dphi = dphi.map(|c| SpectrumField::from_raw(g, c));
        let [u0, u1, u2] = s.u.components();
        let phys = inverse_many(&[u0, u1, u2, &s.v, &s.w, &dphi[0], &dphi[1], &dphi[2]]);
        drop(dphi);
        let (u, v, w, e) = (&phys[0..3], &phys[3], &phys[4], &phys[5..8]);

        let mut products: Vec<Vec<f64>> = Vec::with_capacity(15);
        for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            products.push((0..len).map(|k| u[i][k] * u[j][k]).collect());
        }
        for l in 0..3 {
            products.push((0..len).map(|k| v[k] * (u[l][k] + p.nu1 * e[l][k])).collect());
        }
        for l in 0..3 {
            products.push((0..len).map(|k| w[k] * (u[l][k] - p.nu2 * e[l][k])).collect());
        }
        // εΔφ = v − w once the (zero) mean of v − w is accounted for
        for l in 0..3 {
            products.push((0..len).map(|k| (v[k] - w[k]) * e[l][k]).collect());
        }
        drop(phys);
        let refs: Vec<&[f64]> = products.iter().map(|x| x.as_slice()).collect();
        let spec = forward_many(g, &refs);
        drop(products);
        let sp: Vec<&[Complex64]> = spec.iter().map(|f| f.coeffs()).collect();

        // divergences, force and projection, in one pass
        const UU: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
        let mut du = [vec![zero; len], vec![zero; len], vec![zero; len]];
        let mut dv = vec![zero; len];
        let mut dw = vec![zero; len];
        let mut idx = 0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let keep = !self.dealias || (t.band[a] && t.band[b] && t.band[c]);
                    if keep {
                        let k = [t.kd[a], t.kd[b], t.kd[c]];
                        let div = |f: [usize; 3]| {
                            let z = sp[f[0]][idx] * k[0] + sp[f[1]][idx] * k[1] + sp[f[2]][idx] * k[2];
                            Complex64::new(-z.im, z.re)
                        };
                        let mut r = [0, 1, 2].map(|i| sp[12 + i][idx] - div(UU[i]));
                        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                        if kk > 0.0 {
                            let kr = (r[0] * k[0] + r[1] * k[1] + r[2] * k[2]) / kk;
                            for i in 0..3 {
                                r[i] -= kr * k[i];
                            }
                        }
                        for i in 0..3 {
                            du[i][idx] = r[i];
                        }
                        dv[idx] = -div([6, 7, 8]);
                        dw[idx] = -div([9, 10, 11]);
                    }
                    idx += 1;
                }
            }
        }
        let out = FluidState {
            u: VectorSpectrum::new(du.map(|c| SpectrumField::from_raw(g, c)))?,
            v: SpectrumField::from_raw(g, dv),
            w: SpectrumField::from_raw(g, dw),
            time: s.time,
        };
        match &self.forcing {
            Some(f) => Ok(out.axpy(1.0, &f.at(s.time)?)),
            None => Ok(out),
        }
    }

    /// Advective stability bound `dt ≤ 1 / Σ_ℓ max|U_ℓ| K`, where `U` is the
    /// faster of the two transport velocities `u ± ν∇φ` and `K` the
    /// largest retained wavenumber.
    pub fn cfl_bound(&self, s: &FluidState) -> Result<f64> {
        let phi = compute_potential(s, &self.params)?;
        let dphi = gradient(&phi);
        let kmax = self.grid.dealias_radius();
        let nu = self.params.nu1.max(self.params.nu2);
        let mut rate = 0.0;
        for l in 0..3 {
            let u = inverse_real(s.u.component(l));
            let e = inverse_real(dphi.component(l));
            let m = u
                .iter()
                .zip(&e)
                .map(|(a, b)| a.abs() + nu * b.abs())
                .fold(0.0, f64::max);
            rate += m * kmax;
        }
        Ok(if rate > 0.0 { 1.0 / rate } else { f64::INFINITY })
    }
}

/// Per-step control of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub params: PhysicalParams,
    pub dt: f64,
    pub t_end: f64,
    pub grid: GridSpec,
    pub integrator: String,
    pub dealias: bool,
    pub diagnostics_stride: usize,
    /// `(p, q)` for the critical functional `E(t)`; `None` skips it.
    pub besov_pq: Option<(f64, f64)>,
}

impl SolverConfig {
    pub fn new(grid: GridSpec, dt: f64, t_end: f64) -> Self {
        Self {
            params: PhysicalParams::default(),
            dt,
            t_end,
            grid,
            integrator: "if-rk2".into(),
            dealias: true,
            diagnostics_stride: 1,
            besov_pq: Some((2.0, 2.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} and t_end = {} must be positive",
                self.dt, self.t_end
            )));
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::InvalidArgument("diagnostics stride must be positive".into()));
        }
        integrator(&self.integrator)?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// `‖∇·u‖_{L²} / ‖∇u‖_{L²}`.
    pub div_u_norm: f64,
    pub mass_v: f64,
    pub mass_w: f64,
    /// `‖u‖_{Ḃ^{-1+3/p}_{p,1}} + ‖(v,w)‖_{Ḃ^{-2+3/q}_{q,1}}`, when tracked.
    pub besov_e: Option<f64>,
    pub l2_u: f64,
    pub l2_v: f64,
    pub l2_w: f64,
    pub min_v: f64,
    pub min_w: f64,
    pub dt_used: f64,
    /// `dt` over the current advective bound.
    pub cfl: f64,
    /// Relative gap between the two Lorentz-force formulas.
    pub force_gap: f64,
}

/// Critical functional `E = ‖u‖_{Ḃ^{-1+3/p}_{p,1}} + ‖v‖ + ‖w‖` with the
/// charge norms in `Ḃ^{-2+3/q}_{q,1}`.
pub fn critical_energy(part: &DyadicPartition, s: &FluidState, p: f64, q: f64) -> Result<f64> {
    let iu = BesovIndex::critical_velocity(p)?;
    let ic = BesovIndex::critical_charge(q)?;
    Ok(besov_norm_vector(part, &s.u, iu) + besov_norm(part, &s.v, ic) + besov_norm(part, &s.w, ic))
}

/// Receives the state at every diagnostics step.
pub trait Observer {
    fn observe(&mut self, state: &FluidState, diag: &StepDiagnostics) -> std::result::Result<(), String>;
}

impl<F> Observer for F
where
    F: FnMut(&FluidState, &StepDiagnostics) -> std::result::Result<(), String>,
{
    fn observe(&mut self, state: &FluidState, diag: &StepDiagnostics) -> std::result::Result<(), String> {
        self(state, diag)
    }
}

/// A run in progress. On failure the last valid state stays available.
pub struct Simulation {
    system: NspnpSystem,
    config: SolverConfig,
    scheme: Box<dyn Integrator>,
    partition: Option<Arc<DyadicPartition>>,
    state: FluidState,
    step: usize,
    mean_v: f64,
    mean_w: f64,
    mean_u: [Complex64; 3],
}

impl Simulation {
    pub fn new(initial: FluidState, config: SolverConfig) -> Result<Self> {
        Self::with_forcing(initial, config, None)
    }

    pub fn with_forcing(
        initial: FluidState,
        config: SolverConfig,
        forcing: Option<Arc<dyn Forcing>>,
    ) -> Result<Self> {
        config.validate()?;
        if *initial.grid() != config.grid {
            return Err(Error::GridMismatch);
        }
        let initial = FluidState::new(initial.u, initial.v, initial.w, initial.time)?;
        let mut system = NspnpSystem::new(config.params, config.grid, config.dealias)?;
        system.forcing = forcing;
        let bound = system.cfl_bound(&initial)?;
        if config.dt > bound {
            return Err(Error::CflViolated {
                dt: config.dt,
                bound,
            });
        }
        let partition = match config.besov_pq {
            Some(_) => Some(Arc::new(build_partition(&config.grid, None)?)),
            None => None,
        };
        let mean_u = std::array::from_fn(|l| initial.u.component(l).coeffs()[0]);
        Ok(Self {
            scheme: integrator(&config.integrator)?,
            mean_v: initial.v.mean(),
            mean_w: initial.w.mean(),
            mean_u,
            system,
            config,
            partition,
            state: initial,
            step: 0,
        })
    }

    pub fn state(&self) -> &FluidState {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn system(&self) -> &NspnpSystem {
        &self.system
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn partition(&self) -> Option<&DyadicPartition> {
        self.partition.as_deref()
    }

    /// One step of length `dt` (the last step of a run may be shorter).
    pub fn step_by(&mut self, dt: f64) -> Result<()> {
        let mut next = self.scheme.advance(&self.system, &self.state, dt)?;
        next.u = leray_project(&next.u);
        if self.system.dealias {
            next.u = next.u.map(|c| c.dealiased());
            next.v = next.v.dealiased();
            next.w = next.w.dealiased();
        }
        // the right sides have no mean, so this only removes roundoff
        if self.system.forcing.is_none() {
            for l in 0..3 {
                next.u.components_mut()[l].coeffs_mut()[0] = self.mean_u[l];
            }
            next.v.coeffs_mut()[0] = Complex64::new(self.mean_v, 0.0);
            next.w.coeffs_mut()[0] = Complex64::new(self.mean_w, 0.0);
        }
        next.time = self.state.time + dt;
        if !next.is_finite() {
            return Err(Error::Instability {
                time: self.state.time,
            });
        }
        self.state = next;
        self.step += 1;
        Ok(())
    }

    pub fn diagnostics(&self, dt_used: f64) -> Result<StepDiagnostics> {
        let s = &self.state;
        let v = inverse_real(&s.v);
        let w = inverse_real(&s.w);
        let besov_e = match (self.config.besov_pq, &self.partition) {
            (Some((p, q)), Some(part)) => Some(critical_energy(part, s, p, q)?),
            _ => None,
        };
        let bound = self.system.cfl_bound(s)?;
        Ok(StepDiagnostics {
            step: self.step,
            time: s.time,
            div_u_norm: s.divergence_ratio(),
            mass_v: s.v.mean(),
            mass_w: s.w.mean(),
            besov_e,
            l2_u: s.u.l2_norm(),
            l2_v: s.v.l2_norm(),
            l2_w: s.w.l2_norm(),
            min_v: v.iter().copied().fold(f64::INFINITY, f64::min),
            min_w: w.iter().copied().fold(f64::INFINITY, f64::min),
            dt_used,
            cfl: if bound.is_finite() { dt_used / bound } else { 0.0 },
            force_gap: lorentz_crosscheck(s, &self.system.params)?,
        })
    }

    /// Runs to `t_end`, reporting at step 0, every `diagnostics_stride`
    /// steps and at the final step.
    pub fn run(&mut self, observers: &mut [&mut dyn Observer]) -> Result<Vec<StepDiagnostics>> {
        let steps = self.config.steps();
        let t0 = self.state.time;
        let mut out = Vec::new();
        let report = |sim: &Self, dt: f64, out: &mut Vec<StepDiagnostics>, obs: &mut [&mut dyn Observer]| -> Result<()> {
            let d = sim.diagnostics(dt)?;
            for o in obs.iter_mut() {
                o.observe(&sim.state, &d).map_err(|message| Error::ObserverFailed {
                    time: sim.state.time,
                    message,
                })?;
            }
            out.push(d);
            Ok(())
        };
        report(self, 0.0, &mut out, observers)?;
        for k in 0..steps {
            let target = t0 + ((k + 1) as f64 * self.config.dt).min(self.config.t_end);
            let dt = target - self.state.time;
            self.step_by(dt)?;
            if (k + 1) % self.config.diagnostics_stride == 0 || k + 1 == steps {
                report(self, dt, &mut out, observers)?;
            }
        }
        Ok(out)
    }
}

/// Output of [`simulate`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub diagnostics: Vec<StepDiagnostics>,
    pub final_state: FluidState,
}

/// Advances `initial` to `t_end`, calling every observer at each
/// diagnostics step.
pub fn simulate(
    initial: FluidState,
    config: SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    let mut sim = Simulation::new(initial, config)?;
    let diagnostics = sim.run(observers)?;
    Ok(Trajectory {
        diagnostics,
        final_state: sim.state,
    })
}

/// Pressure `Π = Δ^{-1} ∇·(−∇·(u⊗u) + εΔφ∇φ)`, for output.
pub fn pressure(sys: &NspnpSystem, s: &FluidState) -> Result<SpectrumField> {
    let mut unprojected = lorentz_force(s, &sys.params)?;
    for i in 0..3 {
        let mut acc = SpectrumField::zeros(sys.grid);
        for j in 0..3 {
            let uij = crate::spectral::dealiased_product(s.u.component(i), s.u.component(j));
            acc = acc.add(&partial(&uij, j));
        }
        unprojected.components_mut()[i] = unprojected.component(i).sub(&acc);
    }
    let mut src = divergence(&unprojected);
    src.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    inverse_laplacian(&src)
}

#[cfg(test)]
mod tests;

// SPDX-License-Identifier: Apache-2.0

//! Discrete-velocity transport with specular reflection and BGK relaxation
//! on the tetrahedral meshes of [`crate::ellipticfem`], conservation
//! tracking, and evaluation of both sides of the macroscopic estimates.
//!
//! The distribution is stored cell-major: `f[cell * N + node]` with `N`
//! velocity nodes, each value including its `√μ` factor.
//!
//! One step of `∂_t f + ε^{-s} v·∇f + ε^{-(k+s)} L f = g` is
//! 1. explicit first-order upwind transport, with wall inflow pulled from
//!    the same cell at the reflected velocity (trilinear interpolation of
//!    `f/√μ`) plus a `δ√μ` correction that zeroes the wall mass flux;
//! 2. explicit forcing;
//! 3. implicit relaxation `(I + Δt ε^{-(k+s)} L) f_new = f*`.

pub mod estimate;
pub mod geometry;
pub mod init;

pub use estimate::{
    ensemble_config, estimate_run, evaluate_l2_estimate, evaluate_l6_estimate, EstimateReport, EstimateRun, EstimateTerm, GSample,
};
pub use geometry::{FaceLink, FvGeometry};
pub use init::{Forcing, Preset};

use crate::ellipticfem::{gen_mesh, EllipticSystem, Mesh, RigidModeBasis, Shape};
use crate::error::{MacrolabError, Result};
use crate::kinetics::{bgk_apply, nu, ChiTable, VelocityGrid};
use nalgebra::{Matrix5, Vector5};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Largest tolerated macroscopic component of a forcing term.
pub const FORCING_TOL: f64 = 1e-10;

/// Scaling exponents `(s, k)` and `ε`; `collisions = false` switches `L` off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scaling {
    pub eps: f64,
    pub s: i32,
    pub k: i32,
    pub collisions: bool,
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling { eps: 1.0, s: 0, k: 0, collisions: true }
    }
}

impl Scaling {
    /// `ε^{-s}`.
    pub fn transport(&self) -> f64 {
        self.eps.powi(-self.s)
    }

    /// `ε^{-(k+s)}`, or zero without collisions.
    pub fn collision(&self) -> f64 {
        if self.collisions {
            self.eps.powi(-(self.k + self.s))
        } else {
            0.0
        }
    }
}

/// Immutable data shared by every state of a run.
pub struct Setup {
    pub system: EllipticSystem,
    pub rigid: RigidModeBasis,
    pub geom: FvGeometry,
    pub grid: VelocityGrid,
    pub chi: ChiTable,
    pub scaling: Scaling,
    /// Largest speed on the grid.
    pub vmax: f64,
}

impl Setup {
    pub fn new(mesh: Mesh, grid_points: usize, scaling: Scaling) -> Result<Arc<Setup>> {
        if !(scaling.eps > 0.0 && scaling.eps.is_finite()) {
            return Err(MacrolabError::Config(format!("epsilon must be positive, got {}", scaling.eps)));
        }
        if grid_points < 2 {
            return Err(MacrolabError::Config("velocity grid needs at least two points per axis".into()));
        }
        let geom = FvGeometry::new(&mesh)?;
        let system = EllipticSystem::new(mesh);
        let rigid = system.rigid_basis();
        let grid = VelocityGrid::new(grid_points);
        let chi = ChiTable::new(&grid);
        let vmax = grid.nodes.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max);
        Ok(Arc::new(Setup { system, rigid, geom, grid, chi, scaling, vmax }))
    }

    /// Generated mesh of `shape` at refinement `level`.
    pub fn generated(shape: Shape, level: usize, grid_points: usize, scaling: Scaling) -> Result<Arc<Setup>> {
        Setup::new(gen_mesh(shape, level)?, grid_points, scaling)
    }

    /// Largest stable time step.
    pub fn cfl_bound(&self) -> f64 {
        self.geom.cfl_bound(self.vmax, self.scaling.transport())
    }

    /// Rigid fields `ωᵢ × x` at the cell centroids.
    pub fn rigid_cell_fields(&self) -> Vec<Vec<[f64; 3]>> {
        self.rigid
            .omegas
            .iter()
            .map(|w| self.geom.centroids.iter().map(|&x| cross(*w, x)).collect())
            .collect()
    }

    /// `∫ ψ dx` of a cellwise quantity.
    pub fn integrate_cells(&self, vals: impl Iterator<Item = f64>) -> f64 {
        vals.zip(&self.geom.volumes).map(|(v, w)| v * w).sum()
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Distribution on the cells of a setup at one time.
#[derive(Clone)]
pub struct KineticState {
    pub setup: Arc<Setup>,
    /// `f[cell * N + node]`.
    pub f: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

/// One row of the conservation trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationEntry {
    pub step: usize,
    pub time: f64,
    /// `∬ f χ₀`.
    pub mass: f64,
    /// `∬ f χ₄`.
    pub energy: f64,
    /// `∫ Rᵢ·b` for each detected rigid mode.
    pub angular_momenta: Vec<f64>,
}

/// Conservation history of a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConservationTrace {
    pub entries: Vec<ConservationEntry>,
}

impl ConservationTrace {
    pub fn push(&mut self, e: ConservationEntry) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if e.time < last.time {
                return Err(MacrolabError::MissingData("trace entries must be appended in time order".into()));
            }
        }
        self.entries.push(e);
        Ok(())
    }

    /// CSV with one row per entry.
    pub fn to_csv(&self) -> String {
        let modes = self.entries.first().map_or(0, |e| e.angular_momenta.len());
        let mut s = String::from("step,time,mass,energy");
        for i in 0..modes {
            s.push_str(&format!(",angular_momentum_{}", i + 1));
        }
        s.push('\n');
        for e in &self.entries {
            s.push_str(&format!("{},{:e},{:e},{:e}", e.step, e.time, e.mass, e.energy));
            for a in &e.angular_momenta {
                s.push_str(&format!(",{a:e}"));
            }
            s.push('\n');
        }
        s
    }

    /// Largest change of mass between consecutive entries.
    pub fn max_mass_step(&self) -> f64 {
        self.entries.windows(2).map(|w| (w[1].mass - w[0].mass).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation of the energy from its initial value.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.entries.first().map_or(0.0, |e| e.energy);
        self.entries.iter().map(|e| (e.energy - e0).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation of any angular momentum from its initial value.
    pub fn max_angular_drift(&self) -> f64 {
        let Some(first) = self.entries.first() else { return 0.0 };
        self.entries
            .iter()
            .flat_map(|e| e.angular_momenta.iter().zip(&first.angular_momenta).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

impl KineticState {
    /// Zero distribution at time 0.
    pub fn zeros(setup: Arc<Setup>) -> KineticState {
        let n = setup.geom.cells() * setup.grid.len();
        KineticState { setup, f: vec![0.0; n], time: 0.0, step: 0 }
    }

    /// Wraps explicit values.
    pub fn from_values(setup: Arc<Setup>, f: Vec<f64>) -> Result<KineticState> {
        let n = setup.geom.cells() * setup.grid.len();
        if f.len() != n {
            return Err(MacrolabError::Dimension(format!("{} values for {n} cell-node pairs", f.len())));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(MacrolabError::Dimension("non-finite distribution values".into()));
        }
        Ok(KineticState { setup, f, time: 0.0, step: 0 })
    }

    /// Preset initial datum with zero mass, energy and angular momenta.
    pub fn init(setup: Arc<Setup>, preset: Preset, seed: u64) -> KineticState {
        let f = init::raw_initial(&setup, preset, seed);
        let mut st = KineticState { setup, f, time: 0.0, step: 0 };
        st.enforce_constraints();
        st
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.setup.grid.len();
        &self.f[c * n..(c + 1) * n]
    }

    /// Removes total mass, energy and the rigid-mode angular momenta.
    pub fn enforce_constraints(&mut self) {
        let setup = self.setup.clone();
        let nn = setup.grid.len();
        let vol = setup.geom.total_volume;
        for k in [0usize, 4] {
            let total = setup.integrate_cells(self.f.chunks(nn).map(|c| setup.grid.inner(c, &setup.chi.chi[k])));
            let shift = total / vol;
            for cell in self.f.chunks_mut(nn) {
                cell.iter_mut().zip(&setup.chi.chi[k]).for_each(|(x, y)| *x -= shift * y);
            }
        }
        // Orthonormalize the rigid fields in the cellwise inner product.
        let mut modes: Vec<Vec<[f64; 3]>> = Vec::new();
        for r in setup.rigid_cell_fields() {
            let mut r = r;
            for q in &modes {
                let c = cell_inner(&setup, q, &r);
                r.iter_mut().zip(q).for_each(|(a, b)| (0..3).for_each(|d| a[d] -= c * b[d]));
            }
            let n = cell_inner(&setup, &r, &r).sqrt();
            r.iter_mut().for_each(|a| a.iter_mut().for_each(|x| *x /= n));
            modes.push(r);
        }
        for r in &modes {
            let b = self.momentum();
            let alpha = cell_inner(&setup, r, &b);
            for (c, cell) in self.f.chunks_mut(nn).enumerate() {
                for d in 0..3 {
                    let s = alpha * r[c][d];
                    cell.iter_mut().zip(&setup.chi.chi[1 + d]).for_each(|(x, y)| *x -= s * y);
                }
            }
        }
    }

    /// Cellwise momentum density `b`.
    pub fn momentum(&self) -> Vec<[f64; 3]> {
        let s = &self.setup;
        self.f
            .chunks(s.grid.len())
            .map(|c| std::array::from_fn(|d| s.grid.inner(c, &s.chi.chi[1 + d])))
            .collect()
    }

    /// Mass, energy and angular momenta.
    pub fn conserved(&self) -> ConservationEntry {
        let s = &self.setup;
        let nn = s.grid.len();
        let mass = s.integrate_cells(self.f.chunks(nn).map(|c| s.grid.inner(c, &s.chi.chi[0])));
        let energy = s.integrate_cells(self.f.chunks(nn).map(|c| s.grid.inner(c, &s.chi.chi[4])));
        let b = self.momentum();
        let angular_momenta = s.rigid_cell_fields().iter().map(|r| cell_inner(s, r, &b)).collect();
        ConservationEntry { step: self.step, time: self.time, mass, energy, angular_momenta }
    }

    /// `∫⟨Lf, f⟩ dx`.
    pub fn dissipation(&self) -> f64 {
        let s = &self.setup;
        let per: Vec<f64> = self
            .f
            .par_chunks(s.grid.len())
            .map(|c| s.grid.inner(&bgk_apply(&s.grid, &s.chi, c), c))
            .collect();
        s.integrate_cells(per.into_iter())
    }

    /// Advances by `dt` with forcing `g` (cell-major, microscopic).
    pub fn step(&self, dt: f64, g: Option<&[f64]>) -> Result<KineticState> {
        let s = &*self.setup;
        let nn = s.grid.len();
        let bound = s.cfl_bound();
        if !(dt > 0.0) || dt > bound {
            return Err(MacrolabError::Cfl { dt, bound });
        }
        if let Some(g) = g {
            check_forcing(s, g)?;
        }
        let tf = dt * s.scaling.transport();
        let relax = Relaxation::new(s, dt * s.scaling.collision());
        let mut out = vec![0.0; self.f.len()];
        out.par_chunks_mut(nn).enumerate().for_each(|(c, dst)| {
            let fc = self.cell(c);
            dst.copy_from_slice(fc);
            let vol = s.geom.volumes[c];
            for face in &s.geom.faces[c] {
                let coef = tf * face.area / vol;
                match face.link {
                    FaceLink::Cell(o) => {
                        let fo = self.cell(o);
                        for (n, v) in s.grid.nodes.iter().enumerate() {
                            let vn = dot(*v, face.normal);
                            let up = if vn > 0.0 { fc[n] } else { fo[n] };
                            dst[n] -= coef * vn * up;
                        }
                    }
                    FaceLink::Wall { reflect, .. } => {
                        let fin = wall_inflow(s, fc, face.normal, reflect);
                        for (n, v) in s.grid.nodes.iter().enumerate() {
                            let vn = dot(*v, face.normal);
                            let up = if vn > 0.0 { fc[n] } else { fin[n] };
                            dst[n] -= coef * vn * up;
                        }
                    }
                }
            }
            if let Some(g) = g {
                dst.iter_mut().zip(&g[c * nn..(c + 1) * nn]).for_each(|(x, y)| *x += dt * y);
            }
            if let Some(r) = &relax {
                r.apply(s, dst);
            }
        });
        Ok(KineticState { setup: self.setup.clone(), f: out, time: self.time + dt, step: self.step + 1 })
    }
}

fn cell_inner(s: &Setup, a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    s.integrate_cells(a.iter().zip(b).map(|(x, y)| dot(*x, *y)))
}

fn check_forcing(s: &Setup, g: &[f64]) -> Result<()> {
    let nn = s.grid.len();
    if g.len() != s.geom.cells() * nn {
        return Err(MacrolabError::Dimension(format!("forcing has {} values", g.len())));
    }
    let worst = g
        .chunks(nn)
        .map(|c| s.chi.moments(&s.grid, c).as_array().iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .fold(0.0, f64::max);
    if worst > FORCING_TOL {
        return Err(MacrolabError::ForcingNotMicroscopic(worst));
    }
    Ok(())
}

/// Trilinear interpolation of nodal values `q` on the tensor grid at `u`,
/// clamped to the grid box.
pub fn interpolate(grid: &VelocityGrid, q: &[f64], u: [f64; 3]) -> f64 {
    let n = grid.n1d;
    let x = &grid.nodes1d;
    let bracket = |t: f64| -> (usize, f64) {
        if t <= x[0] {
            (0, 0.0)
        } else if t >= x[n - 1] {
            (n - 2, 1.0)
        } else {
            let i = x.partition_point(|&xi| xi <= t) - 1;
            (i, (t - x[i]) / (x[i + 1] - x[i]))
        }
    };
    let (i, a) = bracket(u[0]);
    let (j, b) = bracket(u[1]);
    let (l, c) = bracket(u[2]);
    let mut s = 0.0;
    for (di, wi) in [(0, 1.0 - a), (1, a)] {
        for (dj, wj) in [(0, 1.0 - b), (1, b)] {
            for (dl, wl) in [(0, 1.0 - c), (1, c)] {
                let w = wi * wj * wl;
                if w != 0.0 {
                    s += w * q[((i + di) * n + j + dj) * n + l + dl];
                }
            }
        }
    }
    s
}

/// Inflow values at a wall face: `f(R v)` for incoming nodes (`v·n < 0`),
/// interpolated from the cell's own values, plus `δ√μ` so that the face
/// carries no net mass.
fn wall_inflow(s: &Setup, fc: &[f64], n_geo: [f64; 3], n_ref: [f64; 3]) -> Vec<f64> {
    let g = &s.grid;
    let q: Vec<f64> = fc.iter().zip(&g.sqrt_mu).map(|(f, m)| f / m).collect();
    let mut fin = vec![0.0; fc.len()];
    let mut imbalance = 0.0;
    let mut denom = 0.0;
    for (n, v) in g.nodes.iter().enumerate() {
        let vn = dot(*v, n_geo);
        let wm = g.weights[n] * g.sqrt_mu[n];
        if vn > 0.0 {
            imbalance += wm * vn * fc[n];
        } else {
            let d = 2.0 * dot(*v, n_ref);
            let u = [v[0] - d * n_ref[0], v[1] - d * n_ref[1], v[2] - d * n_ref[2]];
            fin[n] = interpolate(g, &q, u) * g.sqrt_mu[n];
            imbalance += wm * vn * fin[n];
            denom += wm * vn * g.sqrt_mu[n];
        }
    }
    if denom != 0.0 {
        let delta = -imbalance / denom;
        for (n, v) in g.nodes.iter().enumerate() {
            if dot(*v, n_geo) <= 0.0 {
                fin[n] += delta * g.sqrt_mu[n];
            }
        }
    }
    fin
}

/// Implicit solve of `h + τ(I−P)(νh) = (I−P)f*` for the microscopic part.
///
/// With `D = (1+τν)⁻¹`, `h = D r + τ Σ c_k Dχ_k` where the five
/// multipliers make `Ph = 0`.
struct Relaxation {
    tau: f64,
    d: Vec<f64>,
    dchi: [Vec<f64>; 5],
    inv: Matrix5<f64>,
}

impl Relaxation {
    fn new(s: &Setup, tau: f64) -> Option<Relaxation> {
        if tau == 0.0 {
            return None;
        }
        let g = &s.grid;
        let d: Vec<f64> = g.nodes.iter().map(|&v| 1.0 / (1.0 + tau * nu(v))).collect();
        let dchi: [Vec<f64>; 5] = std::array::from_fn(|k| s.chi.chi[k].iter().zip(&d).map(|(a, b)| a * b).collect());
        let a = Matrix5::from_fn(|j, k| tau * g.inner(&dchi[k], &s.chi.chi[j]));
        let inv = a.try_inverse().expect("relaxation matrix is positive definite");
        Some(Relaxation { tau, d, dchi, inv })
    }

    fn apply(&self, s: &Setup, f: &mut [f64]) {
        let g = &s.grid;
        let (m, pf) = s.chi.project(g, f);
        let _ = m;
        let dr: Vec<f64> = f.iter().zip(&pf).zip(&self.d).map(|((x, p), d)| (x - p) * d).collect();
        let rhs = Vector5::from_fn(|j, _| -g.inner(&dr, &s.chi.chi[j]));
        let c = self.inv * rhs;
        for (n, x) in f.iter_mut().enumerate() {
            let mut h = dr[n];
            for k in 0..5 {
                h += self.tau * c[k] * self.dchi[k][n];
            }
            *x = pf[n] + h;
        }
    }
}

/// Parameters of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub shape: Shape,
    pub refine: usize,
    pub grid: usize,
    pub scaling: Scaling,
    pub seed: u64,
    pub preset: Preset,
    pub forcing: Forcing,
    /// Number of steps; `None` runs to `horizon`.
    pub steps: Option<usize>,
    pub horizon: f64,
    /// Fraction of the CFL bound used as time step.
    pub cfl: f64,
    /// Snapshot every `cadence` steps and after the last one (0 keeps no snapshots).
    pub cadence: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            shape: Shape::Ball,
            refine: 1,
            grid: 8,
            scaling: Scaling::default(),
            seed: 1,
            preset: Preset::RandomFull,
            forcing: Forcing::Zero,
            steps: None,
            horizon: 0.5,
            cfl: 0.9,
            cadence: 0,
        }
    }
}

/// A stored state with the forcing applied from it.
#[derive(Clone)]
pub struct Snapshot {
    pub state: KineticState,
    pub g: Option<Vec<f64>>,
}

/// Output of [`simulate`].
pub struct SimResult {
    pub setup: Arc<Setup>,
    pub dt: f64,
    pub trace: ConservationTrace,
    pub snapshots: Vec<Snapshot>,
    /// Smallest `∫⟨Lf,f⟩` over all steps.
    pub min_dissipation: f64,
    pub final_state: KineticState,
}

/// Number of steps and step size for a configuration on a setup.
pub fn step_plan(setup: &Setup, cfg: &SimConfig) -> Result<(usize, f64)> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(MacrolabError::Config(format!("cfl fraction must lie in (0, 1], got {}", cfg.cfl)));
    }
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
        return Err(MacrolabError::Config(format!("horizon must be positive, got {}", cfg.horizon)));
    }
    let bound = setup.cfl_bound();
    Ok(match cfg.steps {
        Some(n) => (n, cfg.cfl * bound),
        None => {
            let n = (cfg.horizon / (cfg.cfl * bound)).ceil().max(1.0) as usize;
            (n, cfg.horizon / n as f64)
        }
    })
}

/// Runs a configuration from its preset initial datum.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    let setup = Setup::generated(cfg.shape, cfg.refine, cfg.grid, cfg.scaling)?;
    simulate_on(setup, cfg)
}

/// Runs a configuration on an existing setup.
pub fn simulate_on(setup: Arc<Setup>, cfg: &SimConfig) -> Result<SimResult> {
    let (steps, dt) = step_plan(&setup, cfg)?;
    let mut state = KineticState::init(setup.clone(), cfg.preset, cfg.seed);
    let mut trace = ConservationTrace::default();
    trace.push(state.conserved())?;
    let mut snapshots = Vec::new();
    let mut min_dissipation = state.dissipation();
    for n in 0..steps {
        let g = cfg.forcing.eval(&setup, n, state.time);
        if cfg.cadence > 0 && n % cfg.cadence == 0 {
            snapshots.push(Snapshot { state: state.clone(), g: g.clone() });
        }
        state = state.step(dt, g.as_deref())?;
        trace.push(state.conserved())?;
        min_dissipation = min_dissipation.min(state.dissipation());
    }
    if cfg.cadence > 0 {
        let g = cfg.forcing.eval(&setup, steps, state.time);
        snapshots.push(Snapshot { state: state.clone(), g });
    }
    Ok(SimResult { setup, dt, trace, snapshots, min_dissipation, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(shape: Shape, grid: usize, collisions: bool) -> Arc<Setup> {
        Setup::generated(shape, 0, grid, Scaling { collisions, ..Scaling::default() }).unwrap()
    }

    #[test]
    fn presets_satisfy_the_normalizations() {
        let s = setup(Shape::Ball, 6, true);
        for preset in [Preset::RandomFull, Preset::MomentBump, Preset::RandomMicroscopic] {
            let st = KineticState::init(s.clone(), preset, 3);
            let e = st.conserved();
            assert!(e.mass.abs() < 1e-12 && e.energy.abs() < 1e-12, "{preset:?} {e:?}");
            assert_eq!(e.angular_momenta.len(), 3);
            assert!(e.angular_momenta.iter().all(|a| a.abs() < 1e-12));
            let again = KineticState::init(s.clone(), preset, 3);
            assert_eq!(st.f, again.f);
        }
        let micro = KineticState::init(s.clone(), Preset::RandomMicroscopic, 4);
        for c in 0..s.geom.cells() {
            let m = s.chi.moments(&s.grid, micro.cell(c));
            assert!(m.as_array().iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn interpolation_is_exact_for_trilinear_functions() {
        let g = VelocityGrid::new(6);
        let q: Vec<f64> = g.nodes.iter().map(|v| 1.0 + 2.0 * v[0] - v[1] + 0.5 * v[0] * v[2]).collect();
        for u in [[0.3, -0.2, 1.1], [-1.7, 0.4, 0.05]] {
            assert!((interpolate(&g, &q, u) - (1.0 + 2.0 * u[0] - u[1] + 0.5 * u[0] * u[2])).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_supported_transport_conserves_mass_exactly() {
        let s = setup(Shape::Ball, 6, false);
        let mut f = vec![0.0; s.geom.cells() * s.grid.len()];
        let inner: Vec<usize> = (0..s.geom.cells())
            .filter(|&c| s.geom.faces[c].iter().all(|f| matches!(f.link, FaceLink::Cell(_))))
            .filter(|&c| s.geom.faces[c].iter().all(|f| match f.link {
                FaceLink::Cell(o) => s.geom.faces[o].iter().all(|h| matches!(h.link, FaceLink::Cell(_))),
                _ => false,
            }))
            .collect();
        assert!(!inner.is_empty());
        let nn = s.grid.len();
        for &c in &inner {
            for n in 0..nn {
                f[c * nn + n] = s.grid.sqrt_mu[n] * (1.0 + s.grid.nodes[n][0]);
            }
        }
        let st = KineticState::from_values(s.clone(), f).unwrap();
        let m0 = st.conserved().mass;
        let m1 = st.step(0.5 * s.cfl_bound(), None).unwrap().conserved().mass;
        assert!((m1 - m0).abs() < 1e-14, "{m0} {m1}");
    }

    #[test]
    fn global_equilibrium_is_steady() {
        let s = setup(Shape::Spheroid { a: 1.0, c: 1.5 }, 6, true);
        let nn = s.grid.len();
        let f: Vec<f64> = (0..s.geom.cells() * nn).map(|i| 0.7 * s.chi.chi[0][i % nn]).collect();
        let st = KineticState::from_values(s.clone(), f.clone()).unwrap();
        let next = st.step(0.9 * s.cfl_bound(), None).unwrap();
        let err = next.f.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn step_rejects_bad_input_and_conserves_mass() {
        let s = setup(Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 }, 6, true);
        let st = KineticState::init(s.clone(), Preset::RandomFull, 8);
        assert!(matches!(st.step(2.0 * s.cfl_bound(), None), Err(MacrolabError::Cfl { .. })));
        let bad: Vec<f64> = (0..st.f.len()).map(|i| s.chi.chi[0][i % s.grid.len()]).collect();
        assert!(matches!(st.step(0.5 * s.cfl_bound(), Some(&bad)), Err(MacrolabError::ForcingNotMicroscopic(_))));
        assert!(st.conserved().angular_momenta.is_empty());
        let g = Forcing::MicroscopicNoise { amplitude: 0.3, seed: 2 }.eval(&s, 0, 0.0).unwrap();
        let mut cur = st;
        for _ in 0..5 {
            let next = cur.step(0.9 * s.cfl_bound(), Some(&g)).unwrap();
            assert!((next.conserved().mass - cur.conserved().mass).abs() < 1e-12);
            assert!(next.dissipation() >= -1e-12);
            cur = next;
        }
    }

    #[test]
    fn relaxation_matches_its_defining_equation() {
        let s = setup(Shape::Ball, 6, true);
        let st = KineticState::init(s.clone(), Preset::RandomFull, 12);
        let tau = 0.37;
        let r = Relaxation::new(&s, tau).unwrap();
        let mut h = st.cell(5).to_vec();
        r.apply(&s, &mut h);
        let lh = bgk_apply(&s.grid, &s.chi, &h);
        for n in 0..h.len() {
            assert!((h[n] + tau * lh[n] - st.cell(5)[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_steps_give_one_zero_row() {
        let cfg = SimConfig { shape: Shape::Spheroid { a: 1.0, c: 1.5 }, refine: 0, grid: 6, steps: Some(0), ..SimConfig::default() };
        let res = simulate(&cfg).unwrap();
        assert_eq!(res.trace.entries.len(), 1);
        let e = &res.trace.entries[0];
        assert!(e.mass.abs() < 1e-12 && e.energy.abs() < 1e-12 && e.angular_momenta.iter().all(|a| a.abs() < 1e-12));
    }
}

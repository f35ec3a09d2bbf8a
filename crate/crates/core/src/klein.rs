//! Klein scattering off a linear potential `α(x − x_c)`: 1+1 stepping, the
//! 2+1 problem decomposed into p_y slices with an effective mass, the direct
//! 2D oracle, and transmission diagnostics.
//!
//! The default stepper works in the comoving frame `χ = e^{iα(x−x_c)t} ψ`,
//! where the Hamiltonian `cσ_x(k − αt) + m̃c² σ̃` is diagonal in momentum.
//! Each step applies the exact exponential at the step midpoint, which is
//! the Strang step for this splitting but never lets the packet's momentum
//! drift off the lattice. Fields are handed back in the lab frame.

use std::f64::consts::PI;

use crate::dirac::{dirac_kinetic_phase_1p1, positive_energy_projector, SimParams};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{Fourier, Representation, SpinorField1D, LEAK_THRESHOLD};
use crate::grid::Grid1D;
use crate::pauli::{pauli_exponential, PauliCoeffs};
use crate::split::{KineticPhase, PotentialPhase, StrangPropagator};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KleinParams {
    pub base: SimParams,
    pub alpha: f64,
    /// Zero of the potential.
    pub center: f64,
}

impl KleinParams {
    pub fn new(base: SimParams, alpha: f64, center: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!("alpha = {alpha} must be positive")));
        }
        if !center.is_finite() {
            return Err(Error::Config("potential centre must be finite".into()));
        }
        Ok(Self { base, alpha, center })
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.alpha * (x - self.center)
    }

    /// Centre placed at the classical turning point of a packet of
    /// momentum `p0` starting at `x0` (p_y = 0 slice).
    pub fn turning_point(base: &SimParams, alpha: f64, x0: f64, p0: f64) -> f64 {
        x0 + base.energy(p0) / alpha
    }
}

/// Mass of the p_y slice and the direction of its Pauli matrix in the y-z
/// plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveMass {
    pub m_tilde: f64,
    pub n_y: f64,
    pub n_z: f64,
    /// `m = 0` and `p_y = 0`: the direction is arbitrary and set to (0, 1).
    pub degenerate: bool,
}

impl EffectiveMass {
    pub fn sim_params(&self, c: f64) -> Result<SimParams> {
        SimParams::with_mass_axis(c, self.m_tilde, [0.0, self.n_y, self.n_z])
    }
}

pub fn effective_mass(p_y: f64, params: &SimParams) -> EffectiveMass {
    let c = params.c;
    let mc2 = params.rest_energy();
    let e = (p_y * p_y * c * c + mc2 * mc2).sqrt();
    if e == 0.0 {
        return EffectiveMass { m_tilde: 0.0, n_y: 0.0, n_z: 1.0, degenerate: true };
    }
    EffectiveMass { m_tilde: e / (c * c), n_y: p_y * c / e, n_z: mc2 / e, degenerate: false }
}

/// `exp(−π m̃²c⁴ / (ħcα))` with ħ = 1.
pub fn transmission_formula(em: &EffectiveMass, kp: &KleinParams) -> f64 {
    let c = kp.base.c;
    (-PI * em.m_tilde.powi(2) * c.powi(4) / (c * kp.alpha)).exp()
}

/// `c² p_x / √(c² p_x² + m̃(p_y)² c⁴)`.
pub fn group_velocity(p_x: f64, p_y: f64, params: &SimParams) -> f64 {
    let c = params.c;
    let em = effective_mass(p_y, params);
    let e = (c * c * p_x * p_x + (em.m_tilde * c * c).powi(2)).sqrt();
    if e == 0.0 {
        0.0
    } else {
        c * c * p_x / e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Comoving,
    /// Literal Strang stepping of `cσ_x p + m̃c²σ̃ + α(x − x_c)` on the grid.
    Lab,
}

#[derive(Clone, Debug)]
pub struct KleinOptions {
    pub frame: Frame,
    /// Extra output times in `(0, t]`.
    pub snapshots: Vec<f64>,
    /// Boundary-leak check cadence in time units.
    pub leak_check_interval: f64,
    pub leak_threshold: f64,
}

impl Default for KleinOptions {
    fn default() -> Self {
        Self { frame: Frame::Comoving, snapshots: Vec::new(), leak_check_interval: 1.0, leak_threshold: LEAK_THRESHOLD }
    }
}

#[derive(Clone, Debug)]
pub struct KleinRun {
    pub final_state: SpinorField1D,
    /// `(t, ψ(t))` for each requested snapshot, lab frame.
    pub snapshots: Vec<(f64, SpinorField1D)>,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// `⟨|H_kin|⟩` at t = 0, the reference for relative energy drift.
    pub energy_scale: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub max_leak: f64,
}

impl KleinRun {
    pub fn relative_energy_drift(&self) -> f64 {
        (self.energy_final - self.energy_initial).abs() / self.energy_scale
    }
    pub fn relative_norm_drift(&self) -> f64 {
        (self.norm_final - self.norm_initial).abs() / self.norm_initial
    }
}

/// Breaks `[0, t]` into segments ending at each snapshot and `t`, with a
/// whole number of steps no longer than `dt` in each.
pub(crate) fn schedule(dt: f64, t: f64, snapshots: &[f64]) -> Result<Vec<(f64, usize, bool)>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt = {dt} must be positive")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Config(format!("t = {t} must be non-negative")));
    }
    let mut stops: Vec<f64> = snapshots.iter().copied().filter(|&s| s > 0.0 && s < t).collect();
    if snapshots.iter().any(|&s| s < 0.0 || s > t) {
        return Err(Error::Config("snapshot times must lie in [0, t]".into()));
    }
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t);
    let mut out = Vec::new();
    let mut prev = 0.0;
    for s in stops {
        let span = s - prev;
        let n = (span / dt - 1e-9).ceil().max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
        out.push((s, n, snapshots.iter().any(|&q| q == s)));
        prev = s;
    }
    Ok(out)
}

/// Kinetic energy `⟨|H_kin|⟩` of momentum-space components at lab momentum
/// offset `shift`.
fn kinetic_scale(grid: &Grid1D, comps: &[Vec<C64>; 2], shift: f64, params: &SimParams) -> f64 {
    let mut s = 0.0;
    for c in 0..grid.n_points() {
        let w = comps[0][c].norm_sqr() + comps[1][c].norm_sqr();
        s += params.energy(grid.p(c) - shift) * w;
    }
    s * grid.dp()
}

fn comoving_energy(grid: &Grid1D, chi: &[Vec<C64>; 2], pos: &[Vec<C64>; 2], t: f64, kp: &KleinParams, mp: &SimParams) -> f64 {
    let mut kin = 0.0;
    for c in 0..grid.n_points() {
        let h = mp.hamiltonian_1p1(grid.p(c) - kp.alpha * t).matrix();
        let v = nalgebra::Vector2::new(chi[0][c], chi[1][c]);
        kin += (v.adjoint() * h * v)[(0, 0)].re;
    }
    let mut pot = 0.0;
    for j in 0..grid.n_points() {
        pot += kp.potential(grid.x(j)) * (pos[0][j].norm_sqr() + pos[1][j].norm_sqr());
    }
    kin * grid.dp() + pot * grid.dx()
}

fn leak_of(grid: &Grid1D, pos: &[Vec<C64>; 2]) -> f64 {
    let (mut edge, mut total) = (0.0, 0.0);
    for j in 0..grid.n_points() {
        let d = pos[0][j].norm_sqr() + pos[1][j].norm_sqr();
        total += d;
        if grid.in_boundary_strip(j) {
            edge += d;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

fn to_lab(grid: &Grid1D, kp: &KleinParams, t: f64, mut pos: [Vec<C64>; 2]) -> Result<SpinorField1D> {
    for j in 0..grid.n_points() {
        let ph = C64::from_polar(1.0, -kp.alpha * (grid.x(j) - kp.center) * t);
        pos[0][j] *= ph;
        pos[1][j] *= ph;
    }
    SpinorField1D::from_components(*grid, Representation::Position, pos)
}

fn run_comoving(psi0: &SpinorField1D, kp: &KleinParams, mp: &SimParams, dt: f64, t: f64, opts: &KleinOptions) -> Result<KleinRun> {
    let grid = *psi0.grid();
    let fourier = Fourier::new(&grid);
    let start = if psi0.representation() == Representation::Position { psi0.clone() } else { psi0.to_position()? };
    let mut chi = start.components().clone();
    for c in chi.iter_mut() {
        fourier.forward(c);
    }
    let norm_initial = start.norm_sqr();
    let energy_initial = comoving_energy(&grid, &chi, start.components(), 0.0, kp, mp);
    let energy_scale = kinetic_scale(&grid, &chi, 0.0, mp);
    let leak_every = (opts.leak_check_interval / dt).ceil().max(1.0) as usize;

    let [ay, az] = {
        let h = mp.hamiltonian_1p1(0.0);
        [h.ay, h.az]
    };
    let momenta = grid.momenta();
    let c_light = mp.c;
    let mut max_leak = leak_of(&grid, start.components());
    let mut snapshots = Vec::new();
    let mut time = 0.0;
    let mut steps_since_check = 0usize;
    let mut last_pos = start.components().clone();

    let positions = |chi: &[Vec<C64>; 2]| {
        let mut pos = chi.clone();
        for c in pos.iter_mut() {
            fourier.inverse(c);
        }
        pos
    };

    for (stop, n, is_snapshot) in schedule(dt, t, &opts.snapshots)? {
        let h = if n > 0 { (stop - time) / n as f64 } else { 0.0 };
        for s in 0..n {
            let tm = time + (s as f64 + 0.5) * h;
            let (c0, c1) = chi.split_at_mut(1);
            for (k, (u, v)) in c0[0].iter_mut().zip(c1[0].iter_mut()).enumerate() {
                let ax = c_light * (momenta[k] - kp.alpha * tm);
                let r = (ax * ax + ay * ay + az * az).sqrt();
                let (sn, cs) = (h * r).sin_cos();
                let sr = if r > 0.0 { sn / r } else { 0.0 };
                // cos − i sin (a·σ)/|a|
                let m00 = C64::new(cs, -sr * az);
                let m11 = C64::new(cs, sr * az);
                let m01 = C64::new(-sr * ay, -sr * ax);
                let m10 = C64::new(sr * ay, -sr * ax);
                let (a, b) = (*u, *v);
                *u = m00 * a + m01 * b;
                *v = m10 * a + m11 * b;
            }
            steps_since_check += 1;
            if steps_since_check >= leak_every {
                steps_since_check = 0;
                let pos = positions(&chi);
                let leak = leak_of(&grid, &pos);
                max_leak = max_leak.max(leak);
                if leak > opts.leak_threshold {
                    return Err(Error::BoundaryLeak { leak, threshold: opts.leak_threshold, time: tm + 0.5 * h });
                }
            }
        }
        time = stop;
        let pos = positions(&chi);
        let leak = leak_of(&grid, &pos);
        max_leak = max_leak.max(leak);
        if leak > opts.leak_threshold {
            return Err(Error::BoundaryLeak { leak, threshold: opts.leak_threshold, time });
        }
        if is_snapshot {
            snapshots.push((time, to_lab(&grid, kp, time, pos.clone())?));
        }
        last_pos = pos;
    }
    let energy_final = comoving_energy(&grid, &chi, &last_pos, time, kp, mp);
    let final_state = to_lab(&grid, kp, time, last_pos)?;
    Ok(KleinRun {
        norm_final: final_state.norm_sqr(),
        final_state,
        snapshots,
        energy_initial,
        energy_final,
        energy_scale,
        norm_initial,
        max_leak,
    })
}

fn lab_energy(f: &SpinorField1D, kp: &KleinParams, mp: &SimParams) -> Result<f64> {
    let k = f.to_momentum()?;
    let g = *f.grid();
    let mut kin = 0.0;
    for c in 0..g.n_points() {
        let h = mp.hamiltonian_1p1(g.p(c)).matrix();
        let v = nalgebra::Vector2::new(k.component(0)[c], k.component(1)[c]);
        kin += (v.adjoint() * h * v)[(0, 0)].re;
    }
    let d = f.density();
    let pot: f64 = d.iter().enumerate().map(|(j, v)| kp.potential(g.x(j)) * v).sum();
    Ok(kin * g.dp() + pot * g.dx())
}

fn run_lab(psi0: &SpinorField1D, kp: &KleinParams, mp: &SimParams, dt: f64, t: f64, opts: &KleinOptions) -> Result<KleinRun> {
    let grid = *psi0.grid();
    let mut f = if psi0.representation() == Representation::Position { psi0.clone() } else { psi0.to_position()? };
    let norm_initial = f.norm_sqr();
    let energy_initial = lab_energy(&f, kp, mp)?;
    let k0 = f.to_momentum()?;
    let energy_scale = kinetic_scale(&grid, k0.components(), 0.0, mp);
    let mut max_leak = f.boundary_leak()?;
    let mut snapshots = Vec::new();
    let mut time = 0.0;
    for (stop, n, is_snapshot) in schedule(dt, t, &opts.snapshots)? {
        if n > 0 {
            let h = (stop - time) / n as f64;
            let prop = StrangPropagator::new(
                grid,
                dirac_kinetic_phase_1p1(&grid, mp, h),
                PotentialPhase::scalar_half_step(&grid, |x| kp.potential(x), h),
            )?;
            let every = (opts.leak_check_interval / h).ceil().max(1.0) as usize;
            for s in 0..n {
                prop.step_in_place(&mut f)?;
                if (s + 1) % every == 0 || s + 1 == n {
                    let leak = f.boundary_leak()?;
                    max_leak = max_leak.max(leak);
                    if leak > opts.leak_threshold {
                        return Err(Error::BoundaryLeak { leak, threshold: opts.leak_threshold, time: time + (s + 1) as f64 * h });
                    }
                }
            }
        }
        time = stop;
        if is_snapshot {
            snapshots.push((time, f.clone()));
        }
    }
    Ok(KleinRun {
        energy_final: lab_energy(&f, kp, mp)?,
        norm_final: f.norm_sqr(),
        final_state: f,
        snapshots,
        energy_initial,
        energy_scale,
        norm_initial,
        max_leak,
    })
}

/// Full 1+1 run with diagnostics.
pub fn evolve_klein_1p1_with(
    psi0: &SpinorField1D,
    kp: &KleinParams,
    mass: &EffectiveMass,
    dt: f64,
    t: f64,
    opts: &KleinOptions,
) -> Result<KleinRun> {
    let mp = mass.sim_params(kp.base.c)?;
    match opts.frame {
        Frame::Comoving => run_comoving(psi0, kp, &mp, dt, t, opts),
        Frame::Lab => run_lab(psi0, kp, &mp, dt, t, opts),
    }
}

/// Evolves under `cσ_x p + m̃c²σ̃ + α(x − x_c)` for time `t`.
pub fn evolve_klein_1p1(psi0: &SpinorField1D, kp: &KleinParams, mass: &EffectiveMass, dt: f64, t: f64) -> Result<SpinorField1D> {
    Ok(evolve_klein_1p1_with(psi0, kp, mass, dt, t, &KleinOptions::default())?.final_state)
}

/// Where to split reflected from transmitted probability, and the half-width
/// of the window that must be (nearly) empty for the split to be trusted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub x_split: f64,
    pub half_window: f64,
}

impl SplitSpec {
    /// Turning point `x_c + ⟨E⟩/α` plus three packet widths; the window is one
    /// width on either side.
    pub fn from_energy(kp: &KleinParams, mean_energy: f64, sigma_x: f64) -> Self {
        Self { x_split: kp.center + mean_energy / kp.alpha + 3.0 * sigma_x, half_window: sigma_x }
    }
}

/// Fraction of the probability at `x ≥ x_split`.
pub fn measure_transmission(psi: &SpinorField1D, split: &SplitSpec) -> Result<f64> {
    let f = if psi.representation() == Representation::Position { psi.clone() } else { psi.to_position()? };
    let g = *f.grid();
    let d = f.density();
    let total: f64 = d.iter().sum();
    if total == 0.0 {
        return Err(Error::Inconclusive("empty field".into()));
    }
    let (mut beyond, mut window) = (0.0, 0.0);
    for (j, v) in d.iter().enumerate() {
        let x = g.x(j);
        if x >= split.x_split {
            beyond += v;
        }
        if (x - split.x_split).abs() <= split.half_window {
            window += v;
        }
    }
    if window / total > 1e-2 {
        return Err(Error::Inconclusive(format!(
            "{:.3e} of the probability sits inside the split window",
            window / total
        )));
    }
    Ok((beyond / total).clamp(0.0, 1.0))
}

/// Mean energy of a 1+1 state under the effective Hamiltonian of its slice.
pub fn klein_energy(psi: &SpinorField1D, kp: &KleinParams, mass: &EffectiveMass) -> Result<f64> {
    let f = if psi.representation() == Representation::Position { psi.clone() } else { psi.to_position()? };
    Ok(lab_energy(&f, kp, &mass.sim_params(kp.base.c)?)? / f.norm_sqr())
}

/// Two-component field on an (x, y) grid, row-major with x as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField2D {
    x_grid: Grid1D,
    y_grid: Grid1D,
    comps: [Vec<C64>; 2],
}

/// Refuse direct 2D runs above this many points.
pub const DIRECT_2D_MAX_POINTS: usize = 512 * 512;

impl SpinorField2D {
    pub fn new(x_grid: Grid1D, y_grid: Grid1D, comps: [Vec<C64>; 2]) -> Result<Self> {
        let n = x_grid.n_points() * y_grid.n_points();
        if comps.iter().any(|c| c.len() != n) {
            return Err(Error::Usage("component length does not match the 2D grid".into()));
        }
        Ok(Self { x_grid, y_grid, comps })
    }

    pub fn from_fn(x_grid: Grid1D, y_grid: Grid1D, f: impl Fn(f64, f64) -> [C64; 2]) -> Self {
        let (nx, ny) = (x_grid.n_points(), y_grid.n_points());
        let mut comps = [vec![C64::new(0.0, 0.0); nx * ny], vec![C64::new(0.0, 0.0); nx * ny]];
        for i in 0..nx {
            for j in 0..ny {
                let v = f(x_grid.x(i), y_grid.x(j));
                comps[0][i * ny + j] = v[0];
                comps[1][i * ny + j] = v[1];
            }
        }
        Self { x_grid, y_grid, comps }
    }

    pub fn x_grid(&self) -> &Grid1D {
        &self.x_grid
    }
    pub fn y_grid(&self) -> &Grid1D {
        &self.y_grid
    }
    pub fn components(&self) -> &[Vec<C64>; 2] {
        &self.comps
    }

    pub fn norm_sqr(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
        s * self.x_grid.dx() * self.y_grid.dx()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for c in self.comps.iter_mut() {
                for v in c.iter_mut() {
                    *v /= n;
                }
            }
        }
    }

    /// `Σ_s |ψ_s(x_i, y_j)|²`, row-major.
    pub fn density(&self) -> Vec<f64> {
        self.comps[0].iter().zip(&self.comps[1]).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    /// `∫ |ψ|² dy` at each x.
    pub fn x_marginal(&self) -> Vec<f64> {
        let ny = self.y_grid.n_points();
        self.density().chunks(ny).map(|row| row.iter().sum::<f64>() * self.y_grid.dx()).collect()
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if self.x_grid != other.x_grid || self.y_grid != other.y_grid {
            return Err(Error::Usage("fields live on different grids".into()));
        }
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                s += (x - y).norm_sqr();
            }
        }
        Ok((s * self.x_grid.dx() * self.y_grid.dx()).sqrt())
    }
}

/// Normalisation of the p_y profile of a decomposed state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SliceNormalization {
    /// Slices carry the Gaussian p_y weight; the global norm is 1.
    #[default]
    Weighted,
    /// Every slice has unit norm in x (the global norm is then `n_y·dp_y`).
    PerSlice,
}

/// Decomposed 2+1 state `ψ(x, p_y, s)`. Slice `j` sits at the centred
/// momentum `y_grid.p(j)` of the dual y grid used for reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorSlices2D {
    x_grid: Grid1D,
    y_grid: Grid1D,
    slices: Vec<SpinorField1D>,
}

impl SpinorSlices2D {
    pub fn new(x_grid: Grid1D, y_grid: Grid1D, slices: Vec<SpinorField1D>) -> Result<Self> {
        if slices.len() != y_grid.n_points() {
            return Err(Error::Usage(format!(
                "{} slices for a p_y lattice of {}",
                slices.len(),
                y_grid.n_points()
            )));
        }
        if slices.iter().any(|s| s.grid() != &x_grid || s.representation() != Representation::Position) {
            return Err(Error::Usage("every slice must be a position-space field on the x grid".into()));
        }
        Ok(Self { x_grid, y_grid, slices })
    }

    /// Slices of a position-space 2D field (forward transform along y).
    pub fn from_position_space(f: &SpinorField2D) -> Result<Self> {
        let (nx, ny) = (f.x_grid.n_points(), f.y_grid.n_points());
        let fy = Fourier::new(&f.y_grid);
        let mut slices: Vec<[Vec<C64>; 2]> =
            (0..ny).map(|_| [vec![C64::new(0.0, 0.0); nx], vec![C64::new(0.0, 0.0); nx]]).collect();
        let mut row = vec![C64::new(0.0, 0.0); ny];
        for s in 0..2 {
            for i in 0..nx {
                row.copy_from_slice(&f.comps[s][i * ny..(i + 1) * ny]);
                fy.forward(&mut row);
                for (j, v) in row.iter().enumerate() {
                    slices[j][s][i] = *v;
                }
            }
        }
        let slices = slices
            .into_iter()
            .map(|c| SpinorField1D::from_components(f.x_grid, Representation::Position, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(f.x_grid, f.y_grid, slices)
    }

    pub fn x_grid(&self) -> &Grid1D {
        &self.x_grid
    }
    pub fn y_grid(&self) -> &Grid1D {
        &self.y_grid
    }
    pub fn slices(&self) -> &[SpinorField1D] {
        &self.slices
    }
    pub fn py(&self, j: usize) -> f64 {
        self.y_grid.p(j)
    }
    pub fn py_values(&self) -> Vec<f64> {
        self.y_grid.momenta()
    }
    pub fn dpy(&self) -> f64 {
        self.y_grid.dp()
    }

    /// `∫ |ψ(x, p_y)|² dx` per slice.
    pub fn slice_norms(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.slice_norms().iter().sum::<f64>() * self.dpy()
    }

    /// `|ψ(x, p_y)|²` with p_y as the slow index.
    pub fn density_rows(&self) -> Vec<Vec<f64>> {
        self.slices.iter().map(|s| s.density()).collect()
    }
}

/// Inverse transform along p_y onto the dual y grid.
pub fn reconstruct_position_space(psi: &SpinorSlices2D) -> Result<SpinorField2D> {
    let (nx, ny) = (psi.x_grid.n_points(), psi.y_grid.n_points());
    let fy = Fourier::new(&psi.y_grid);
    let mut comps = [vec![C64::new(0.0, 0.0); nx * ny], vec![C64::new(0.0, 0.0); nx * ny]];
    let mut row = vec![C64::new(0.0, 0.0); ny];
    for (s, comp) in comps.iter_mut().enumerate() {
        for i in 0..nx {
            for (j, v) in row.iter_mut().enumerate() {
                *v = psi.slices[j].component(s)[i];
            }
            fy.inverse(&mut row);
            comp[i * ny..(i + 1) * ny].copy_from_slice(&row);
        }
    }
    SpinorField2D::new(psi.x_grid, psi.y_grid, comps)
}

#[derive(Clone, Debug)]
pub struct KleinRun2D {
    pub final_state: SpinorSlices2D,
    pub snapshots: Vec<(f64, SpinorSlices2D)>,
    /// Per-slice diagnostics, in slice order.
    pub slice_runs: Vec<SliceDiagnostics>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceDiagnostics {
    pub p_y: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_scale: f64,
    pub max_leak: f64,
}

impl KleinRun2D {
    pub fn max_relative_energy_drift(&self) -> f64 {
        self.slice_runs
            .iter()
            .filter(|d| d.norm_initial > 0.0)
            .map(|d| (d.energy_final - d.energy_initial).abs() / d.energy_scale)
            .fold(0.0, f64::max)
    }
    pub fn max_relative_norm_drift(&self) -> f64 {
        self.slice_runs
            .iter()
            .filter(|d| d.norm_initial > 0.0)
            .map(|d| (d.norm_final - d.norm_initial).abs() / d.norm_initial)
            .fold(0.0, f64::max)
    }
    /// Mean energy of each slice per unit slice norm.
    pub fn slice_energies(&self) -> Vec<f64> {
        self.slice_runs
            .iter()
            .map(|d| if d.norm_initial > 0.0 { d.energy_initial / d.norm_initial } else { 0.0 })
            .collect()
    }
}

/// Runs every p_y slice independently with its effective mass.
pub fn evolve_klein_2p1_decomposed_with(
    psi0: &SpinorSlices2D,
    kp: &KleinParams,
    dt: f64,
    t: f64,
    opts: &KleinOptions,
    exec: Execution,
) -> Result<KleinRun2D> {
    // The leak guard is applied to each slice's share of the total norm, so
    // slices that hold only round-off do not trip it.
    let total = psi0.norm_sqr() / psi0.dpy();
    let runs = exec::try_map(exec, &psi0.slices, |j, slice| {
        let em = effective_mass(psi0.py(j), &kp.base);
        let share = slice.norm_sqr() / total;
        let mut slice_opts = opts.clone();
        if share > 0.0 {
            slice_opts.leak_threshold = opts.leak_threshold / share;
        }
        evolve_klein_1p1_with(slice, kp, &em, dt, t, &slice_opts)
    })?;
    let slice_runs = runs
        .iter()
        .enumerate()
        .map(|(j, r)| SliceDiagnostics {
            p_y: psi0.py(j),
            norm_initial: r.norm_initial,
            norm_final: r.norm_final,
            energy_initial: r.energy_initial,
            energy_final: r.energy_final,
            energy_scale: r.energy_scale,
            max_leak: r.max_leak,
        })
        .collect();
    let n_snap = runs.first().map_or(0, |r| r.snapshots.len());
    let mut snapshots = Vec::with_capacity(n_snap);
    for s in 0..n_snap {
        let time = runs[0].snapshots[s].0;
        let slices = runs.iter().map(|r| r.snapshots[s].1.clone()).collect();
        snapshots.push((time, SpinorSlices2D::new(psi0.x_grid, psi0.y_grid, slices)?));
    }
    let slices = runs.into_iter().map(|r| r.final_state).collect();
    Ok(KleinRun2D { final_state: SpinorSlices2D::new(psi0.x_grid, psi0.y_grid, slices)?, snapshots, slice_runs })
}

pub fn evolve_klein_2p1_decomposed(psi0: &SpinorSlices2D, kp: &KleinParams, dt: f64, t: f64) -> Result<SpinorSlices2D> {
    Ok(evolve_klein_2p1_decomposed_with(psi0, kp, dt, t, &KleinOptions::default(), Execution::default())?.final_state)
}

/// Direct Strang evolution of `cσ_x p_x + cσ_y p_y + mc²σ_z + α(x − x_c)` on
/// the full (x, y) grid.
pub fn evolve_klein_2p1_direct(psi0: &SpinorField2D, kp: &KleinParams, dt: f64, t: f64) -> Result<SpinorField2D> {
    let (gx, gy) = (psi0.x_grid, psi0.y_grid);
    let (nx, ny) = (gx.n_points(), gy.n_points());
    if nx * ny > DIRECT_2D_MAX_POINTS {
        return Err(Error::MemoryGuard(format!("{nx}×{ny} exceeds the 512×512 limit of the direct 2D path")));
    }
    let sched = schedule(dt, t, &[])?;
    let (_, nsteps, _) = sched[0];
    if nsteps == 0 {
        return Ok(psi0.clone());
    }
    let h = t / nsteps as f64;
    let c = kp.base.c;
    let mc2 = kp.base.rest_energy();
    let kin: Vec<_> = (0..nx * ny)
        .map(|idx| {
            let (i, j) = (idx / ny, idx % ny);
            pauli_exponential(PauliCoeffs::new(0.0, c * gx.p(i), c * gy.p(j), mc2), h)
        })
        .collect();
    let pot: Vec<C64> = (0..nx).map(|i| C64::from_polar(1.0, -0.5 * h * kp.potential(gx.x(i)))).collect();
    let (fx, fy) = (Fourier::new(&gx), Fourier::new(&gy));
    let mut comps = psi0.comps.clone();
    let mut col = vec![C64::new(0.0, 0.0); nx];

    let half_potential = |comps: &mut [Vec<C64>; 2]| {
        for comp in comps.iter_mut() {
            for (i, row) in comp.chunks_mut(ny).enumerate() {
                for v in row.iter_mut() {
                    *v *= pot[i];
                }
            }
        }
    };
    for _ in 0..nsteps {
        half_potential(&mut comps);
        for comp in comps.iter_mut() {
            for row in comp.chunks_mut(ny) {
                fy.forward(row);
            }
            for j in 0..ny {
                for i in 0..nx {
                    col[i] = comp[i * ny + j];
                }
                fx.forward(&mut col);
                for i in 0..nx {
                    comp[i * ny + j] = col[i];
                }
            }
        }
        for (idx, u) in kin.iter().enumerate() {
            let (a, b) = (comps[0][idx], comps[1][idx]);
            comps[0][idx] = u[(0, 0)] * a + u[(0, 1)] * b;
            comps[1][idx] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
        for comp in comps.iter_mut() {
            for j in 0..ny {
                for i in 0..nx {
                    col[i] = comp[i * ny + j];
                }
                fx.inverse(&mut col);
                for i in 0..nx {
                    comp[i * ny + j] = col[i];
                }
            }
            for row in comp.chunks_mut(ny) {
                fy.inverse(row);
            }
        }
        half_potential(&mut comps);
    }
    SpinorField2D::new(gx, gy, comps)
}

/// Probability, mean and standard deviation of the x-marginal on one side
/// of a split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LobeStats {
    pub probability: f64,
    pub mean: f64,
    pub width: f64,
}

/// Reflected (`x < x_split`) and transmitted lobe statistics.
pub fn lobe_stats(f: &SpinorField2D, x_split: f64) -> (LobeStats, LobeStats) {
    let g = f.x_grid;
    let marg = f.x_marginal();
    let stats = |keep: &dyn Fn(f64) -> bool| {
        let (mut p, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, w) in marg.iter().enumerate() {
            let x = g.x(i);
            if keep(x) {
                p += w;
                m1 += w * x;
                m2 += w * x * x;
            }
        }
        let mean = m1 / p;
        LobeStats { probability: p * g.dx(), mean, width: (m2 / p - mean * mean).max(0.0).sqrt() }
    };
    (stats(&|x| x < x_split), stats(&|x| x >= x_split))
}

/// `(p_y, reflected, transmitted)` slice masses for each slice.
pub fn lobe_py_distribution(psi: &SpinorSlices2D, x_split: f64) -> Vec<(f64, f64, f64)> {
    psi.slices
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let total = s.norm_sqr();
            let beyond = s.mass_beyond(x_split).unwrap_or(0.0);
            (psi.py(j), total - beyond, beyond)
        })
        .collect()
}

/// Initial-state recipe for the standard 2+1 runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavepacketSpec {
    pub m: f64,
    pub c: f64,
    pub alpha: f64,
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub n_points: usize,
    /// Half-width of the box around the p_y = 0 turning point.
    pub half_width: f64,
    pub n_slices: usize,
    /// The p_y lattice spans `[−py_max, py_max)`.
    pub py_max: f64,
    pub sigma_py: f64,
    pub normalization: SliceNormalization,
}

impl Default for WavepacketSpec {
    fn default() -> Self {
        Self {
            m: 0.5,
            c: 1.0,
            alpha: 1.0,
            x0: -40.0,
            p0: 2.0,
            sigma_x: 1.0,
            n_points: 1024,
            half_width: 150.0,
            n_slices: 64,
            py_max: 2.0,
            sigma_py: 0.5,
            normalization: SliceNormalization::Weighted,
        }
    }
}

/// Gaussian in x with mean momentum `p0`, projected onto positive energy per
/// momentum mode, times the slice spinor `u₊(p0, p_y)`.
pub fn positive_energy_packet(grid: Grid1D, x0: f64, sigma_x: f64, p0: f64, p_y: f64, base: &SimParams) -> Result<SpinorField1D> {
    let em = effective_mass(p_y, base);
    let mp = em.sim_params(base.c)?;
    let u = positive_energy_projector(p0, &mp);
    // Column of the projector with the larger weight gives u₊ up to phase.
    let col = if u[(0, 0)].re >= u[(1, 1)].re { 0 } else { 1 };
    let mut spinor = [u[(0, col)], u[(1, col)]];
    let n = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
    spinor = spinor.map(|s| s / n);
    let g = SpinorField1D::gaussian(grid, x0, sigma_x, p0, spinor);
    let proj = KineticPhase(grid.momenta().into_iter().map(|p| positive_energy_projector(p, &mp)).collect());
    let mut out = crate::split::apply_momentum_diagonal(&g, &proj)?;
    out.normalize();
    Ok(out)
}

/// Builds the potential and the decomposed initial state for a standard run.
pub fn figure_initial_state(spec: &WavepacketSpec) -> Result<(KleinParams, SpinorSlices2D)> {
    let base = SimParams::new(spec.c, spec.m)?;
    let center = KleinParams::turning_point(&base, spec.alpha, spec.x0, spec.p0);
    let kp = KleinParams::new(base, spec.alpha, center)?;
    let x_grid = Grid1D::centered(spec.n_points, center, spec.half_width)?;
    let dpy = 2.0 * spec.py_max / spec.n_slices as f64;
    let ly = 2.0 * PI / dpy;
    let y_grid = Grid1D::centered(spec.n_slices, 0.0, 0.5 * ly)?;
    let weights: Vec<f64> = y_grid.momenta().iter().map(|p| (-p * p / (2.0 * spec.sigma_py.powi(2))).exp()).collect();
    let wsum: f64 = weights.iter().sum::<f64>() * dpy;
    let slices = exec::try_map(Execution::default(), &weights, |j, w| {
        let mut s = positive_energy_packet(x_grid, spec.x0, spec.sigma_x, spec.p0, y_grid.p(j), &base)?;
        if spec.normalization == SliceNormalization::Weighted {
            s.scale((w / wsum).sqrt());
        }
        Ok::<_, Error>(s)
    })?;
    Ok((kp, SpinorSlices2D::new(x_grid, y_grid, slices)?))
}

/// `(p_y, measured T, formula T)` per slice, each slice split at its own
/// turning point plus three widths.
pub fn slice_transmissions(
    state: &SpinorSlices2D,
    kp: &KleinParams,
    slice_energies: &[f64],
    sigma_x: f64,
) -> Vec<(f64, Result<f64>, f64)> {
    (0..state.slices.len())
        .map(|j| {
            let p_y = state.py(j);
            let em = effective_mass(p_y, &kp.base);
            let split = SplitSpec::from_energy(kp, slice_energies[j], sigma_x);
            (p_y, measure_transmission(&state.slices[j], &split), transmission_formula(&em, kp))
        })
        .collect()
}

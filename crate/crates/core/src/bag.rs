//! Two 1+1 Dirac fermions (particles 1 and 3) bound by `V₀ x_r²` in their
//! relative coordinate, with the centre-of-mass momentum as a fixed
//! parameter. Spin basis is `spin₁ ⊗ spin₃` in σ_z order.

use nalgebra::Vector4;

use crate::dirac::SimParams;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::expm::{matrix_exponential_4, Mat4};
use crate::field::{check_leak, Representation, SpinorField, LEAK_THRESHOLD};
use crate::grid::Grid1D;
use crate::klein::schedule;
use crate::pauli::{sigma_x, sigma_y};
use crate::split::{KineticPhase, PotentialPhase, StrangPropagator};
use crate::C64;

pub type FourSpinorField = SpinorField<4>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BagParams {
    pub base: SimParams,
    /// Confinement strength (energy / length²).
    pub v0: f64,
    /// Total momentum, a constant of motion.
    pub p_cm: f64,
}

impl BagParams {
    pub fn new(base: SimParams, v0: f64, p_cm: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 >= 0.0) {
            return Err(Error::Config(format!("V0 = {v0} must be finite and non-negative")));
        }
        if !p_cm.is_finite() {
            return Err(Error::Config("P_cm must be finite".into()));
        }
        Ok(Self { base, v0, p_cm })
    }

    /// `P_cm = 2`, `mc² = 1`, `V₀ = 0.5`, `c = 1`.
    pub fn figure() -> Self {
        Self { base: SimParams::new(1.0, 1.0).expect("valid"), v0: 0.5, p_cm: 2.0 }
    }

    /// Radius beyond which `V₀ x_r² > 2mc²`. Infinite for `V₀ = 0`.
    pub fn x_star(&self) -> f64 {
        (2.0 * self.base.rest_energy() / self.v0).sqrt()
    }
}

fn kron2(a: &crate::pauli::Mat2, b: &crate::pauli::Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

fn id2() -> crate::pauli::Mat2 {
    crate::pauli::Mat2::identity()
}

/// `σ_{k,1}` and `σ_{k,3}` on the two-spin space.
fn spin_ops() -> (Mat4, Mat4, Mat4, Mat4) {
    let (sx, sy) = (sigma_x(), sigma_y());
    (kron2(&sx, &id2()), kron2(&id2(), &sx), kron2(&sy, &id2()), kron2(&id2(), &sy))
}

/// `c(σ_{x,1} − σ_{x,3}) p_r + c(σ_{x,1} + σ_{x,3}) P_cm/2 + mc²(σ_{y,1} + σ_{y,3})`.
pub fn bag_spin_kinetic_block(p_r: f64, bp: &BagParams) -> Mat4 {
    let (s1x, s3x, s1y, s3y) = spin_ops();
    let c = C64::from(bp.base.c);
    let mc2 = C64::from(bp.base.rest_energy());
    (s1x - s3x) * (c * p_r) + (s1x + s3x) * (c * (0.5 * bp.p_cm)) + (s1y + s3y) * mc2
}

/// `Π̂ = (σ_{x,1} − σ_{x,3}) / 2`, spectrum `{−1, 0, 0, 1}`.
pub fn pi_operator() -> Mat4 {
    let (s1x, s3x, _, _) = spin_ops();
    (s1x - s3x) * C64::from(0.5)
}

/// The `Π̂ = ±1` eigenvector `|σ_x = ±1⟩₁ ⊗ |σ_x = ∓1⟩₃`.
pub fn pi_eigenspinor(pi_sign: i32) -> Result<[C64; 4]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [h, h];
    let minus = [h, -h];
    let (a, b) = match pi_sign {
        1 => (plus, minus),
        -1 => (minus, plus),
        0 => return Err(Error::Domain("Π = 0 initial states are not supported".into())),
        s => return Err(Error::Domain(format!("Π must be ±1, got {s}"))),
    };
    Ok([C64::from(a[0] * b[0]), C64::from(a[0] * b[1]), C64::from(a[1] * b[0]), C64::from(a[1] * b[1])])
}

/// Normalised Gaussian in `x_r` times the `Π̂ = pi_sign` spinor.
pub fn prepare_initial(x0: f64, sigma: f64, p_r0: f64, pi_sign: i32, grid: Grid1D) -> Result<FourSpinorField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Config(format!("sigma = {sigma} must be positive")));
    }
    let s = pi_eigenspinor(pi_sign)?;
    let mut f = FourSpinorField::gaussian(grid, x0, sigma, p_r0, s);
    f.normalize();
    Ok(f)
}

fn expect_pointwise(psi: &FourSpinorField, a: &Mat4) -> f64 {
    let mut acc = 0.0;
    for j in 0..psi.grid().n_points() {
        let v = Vector4::from(psi.at(j));
        acc += v.dotc(&(a * v)).re;
    }
    acc * psi.grid().dx()
}

/// `⟨Π̂⟩ / ‖ψ‖²`.
pub fn pi_expectation(psi: &FourSpinorField) -> f64 {
    expect_pointwise(psi, &pi_operator()) / psi.norm_sqr()
}

/// Probability at `|x_r| > x*`.
pub fn klein_tunneling_fraction(psi: &FourSpinorField, bp: &BagParams) -> f64 {
    let xs = bp.x_star();
    outside_fraction(psi, xs)
}

/// Probability at `|x_r| < radius`, relative to the norm.
pub fn probability_within(psi: &FourSpinorField, radius: f64) -> f64 {
    1.0 - outside_fraction(psi, radius)
}

fn outside_fraction(psi: &FourSpinorField, radius: f64) -> f64 {
    let g = psi.grid();
    let d = psi.density();
    let total: f64 = d.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let out: f64 = d.iter().enumerate().filter(|(j, _)| g.x(*j).abs() > radius).map(|(_, v)| v).sum();
    (out / total).clamp(0.0, 1.0)
}

/// `⟨H⟩` with the block applied in momentum space and `V₀x²` in position space.
pub fn bag_energy(psi: &FourSpinorField, bp: &BagParams) -> Result<f64> {
    let pos = match psi.representation() {
        Representation::Position => psi.clone(),
        Representation::Momentum => psi.to_position()?,
    };
    let g = *pos.grid();
    let d = pos.density();
    let pot: f64 = d.iter().enumerate().map(|(j, v)| bp.v0 * g.x(j).powi(2) * v).sum::<f64>() * g.dx();
    let mom = pos.to_momentum()?;
    let mut kin = 0.0;
    for c in 0..g.n_points() {
        let v = Vector4::from(mom.at(c));
        kin += v.dotc(&(bag_spin_kinetic_block(g.p(c), bp) * v)).re;
    }
    Ok(pot + kin * g.dp())
}

/// `exp(−i H_block(p_c) dt)` for every momentum on the grid.
pub fn bag_kinetic_phase(grid: &Grid1D, bp: &BagParams, dt: f64) -> Result<KineticPhase<4>> {
    (0..grid.n_points())
        .map(|c| matrix_exponential_4(&bag_spin_kinetic_block(grid.p(c), bp), dt))
        .collect::<Result<Vec<_>>>()
        .map(KineticPhase)
}

#[derive(Clone, Debug)]
pub struct BagOptions {
    /// Times in `[0, t]` at which density rows are recorded.
    pub snapshots: Vec<f64>,
    pub leak_check_interval: f64,
    pub leak_threshold: f64,
}

impl Default for BagOptions {
    fn default() -> Self {
        Self { snapshots: Vec::new(), leak_check_interval: 1.0, leak_threshold: LEAK_THRESHOLD }
    }
}

/// Per-snapshot observables.
#[derive(Clone, Debug, PartialEq)]
pub struct BagSnapshot {
    pub t: f64,
    pub density: Vec<f64>,
    pub pi: f64,
    pub tunneled: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct BagRun {
    pub final_state: FourSpinorField,
    pub snapshots: Vec<BagSnapshot>,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub max_leak: f64,
}

impl BagRun {
    pub fn relative_energy_drift(&self) -> f64 {
        (self.energy_final - self.energy_initial).abs() / self.energy_initial.abs().max(f64::MIN_POSITIVE)
    }
    pub fn relative_norm_drift(&self) -> f64 {
        (self.norm_final - self.norm_initial).abs() / self.norm_initial
    }
    pub fn density_trace(&self) -> DensityTrace {
        density_trace(&self.snapshots, self.final_state.grid())
    }
}

/// Strang evolution under the full bag Hamiltonian, with snapshots and guards.
pub fn evolve_bag_with(psi0: &FourSpinorField, bp: &BagParams, dt: f64, t: f64, opts: &BagOptions) -> Result<BagRun> {
    if psi0.representation() != Representation::Position {
        return Err(Error::Usage("bag evolution expects a position-space field".into()));
    }
    let segments = schedule(dt, t, &opts.snapshots)?;
    let grid = *psi0.grid();
    let mut props: Vec<(usize, StrangPropagator<4>)> = Vec::new();
    let prop_for = |h: f64| -> Result<StrangPropagator<4>> {
        let kin = bag_kinetic_phase(&grid, bp, h)?;
        let v0 = bp.v0;
        let pot = PotentialPhase::scalar_half_step(&grid, |x| v0 * x * x, h);
        StrangPropagator::new(grid, kin, pot)
    };

    let snap = |psi: &FourSpinorField, t: f64| BagSnapshot {
        t,
        density: psi.density(),
        pi: pi_expectation(psi),
        tunneled: klein_tunneling_fraction(psi, bp),
        norm: psi.norm_sqr(),
    };

    let mut psi = psi0.clone();
    let energy_initial = bag_energy(&psi, bp)?;
    let norm_initial = psi.norm_sqr();
    let mut snapshots = Vec::new();
    if opts.snapshots.contains(&0.0) {
        snapshots.push(snap(&psi, 0.0));
    }
    let mut max_leak = psi.boundary_leak()?;
    let check_every = ((opts.leak_check_interval / dt).round() as usize).max(1);
    let mut t_now = 0.0;
    for (stop, n, record) in segments {
        if n == 0 {
            continue;
        }
        let h = (stop - t_now) / n as f64;
        // Segments almost always share one step size, so cache by step count.
        let key = (h * 1e12).round() as usize;
        if !props.iter().any(|(k, _)| *k == key) {
            props.push((key, prop_for(h)?));
        }
        let prop = &props.iter().find(|(k, _)| *k == key).expect("cached").1;
        let mut done = 0;
        while done < n {
            let chunk = check_every.min(n - done);
            prop.evolve_in_place(&mut psi, chunk)?;
            done += chunk;
            let leak = psi.boundary_leak()?;
            max_leak = max_leak.max(leak);
            check_leak(&psi, opts.leak_threshold, t_now + done as f64 * h)?;
        }
        t_now = stop;
        if record {
            snapshots.push(snap(&psi, stop));
        }
    }
    Ok(BagRun {
        energy_final: bag_energy(&psi, bp)?,
        norm_final: psi.norm_sqr(),
        final_state: psi,
        snapshots,
        energy_initial,
        norm_initial,
        max_leak,
    })
}

pub fn evolve_bag(psi0: &FourSpinorField, bp: &BagParams, dt: f64, t: f64) -> Result<FourSpinorField> {
    Ok(evolve_bag_with(psi0, bp, dt, t, &BagOptions::default())?.final_state)
}

/// `|ψ(x_r, t)|²` heatmap: one row per snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTrace {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl DensityTrace {
    /// Row integrals `Σ ρ dx`.
    pub fn row_norms(&self) -> Vec<f64> {
        let dx = if self.x.len() > 1 { self.x[1] - self.x[0] } else { 1.0 };
        self.rows.iter().map(|r| r.iter().sum::<f64>() * dx).collect()
    }

    /// Restricts to `|x| <= half_width` and sums groups of `factor`
    /// neighbouring columns (densities are averaged so rows keep their
    /// integral under the coarser spacing).
    pub fn coarsened(&self, half_width: f64, factor: usize) -> DensityTrace {
        let factor = factor.max(1);
        let keep: Vec<usize> = (0..self.x.len()).filter(|&j| self.x[j].abs() <= half_width).collect();
        let chunks: Vec<&[usize]> = keep.chunks(factor).filter(|c| c.len() == factor).collect();
        let x = chunks.iter().map(|c| c.iter().map(|&j| self.x[j]).sum::<f64>() / factor as f64).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| chunks.iter().map(|c| c.iter().map(|&j| r[j]).sum::<f64>() / factor as f64).collect())
            .collect();
        DensityTrace { times: self.times.clone(), x, rows }
    }
}

pub fn density_trace(snaps: &[BagSnapshot], grid: &Grid1D) -> DensityTrace {
    DensityTrace {
        times: snaps.iter().map(|s| s.t).collect(),
        x: grid.positions(),
        rows: snaps.iter().map(|s| s.density.clone()).collect(),
    }
}

/// Number of strict local maxima above `rel_floor · max(row)`.
pub fn count_local_maxima(row: &[f64], rel_floor: f64) -> usize {
    let top = row.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 || row.len() < 3 {
        return 0;
    }
    let floor = rel_floor * top;
    row.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2] && w[1] > floor).count()
}

/// The four standard initial conditions of the bag model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BagCase {
    A,
    B,
    C,
    D,
}

impl BagCase {
    pub const ALL: [BagCase; 4] = [BagCase::A, BagCase::B, BagCase::C, BagCase::D];

    /// `(⟨p_r⟩, Π)`.
    pub fn initial(self) -> (f64, i32) {
        match self {
            BagCase::A => (0.0, 1),
            BagCase::B => (2.0, 1),
            BagCase::C => (0.0, -1),
            BagCase::D => (2.0, -1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BagCase::A => "a",
            BagCase::B => "b",
            BagCase::C => "c",
            BagCase::D => "d",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BagFigureSpec {
    pub params: BagParams,
    pub n_points: usize,
    pub half_width: f64,
    pub sigma: f64,
    pub x0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
}

impl Default for BagFigureSpec {
    fn default() -> Self {
        Self {
            params: BagParams::figure(),
            n_points: 131072,
            half_width: 100.0,
            sigma: 3.0,
            x0: 0.0,
            dt: 0.0125,
            t_end: 30.0,
            snapshot_interval: 1.0,
        }
    }
}

impl BagFigureSpec {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::centered(self.n_points, 0.0, self.half_width)
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.snapshot_interval + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.snapshot_interval).collect()
    }

    pub fn run_case(&self, case: BagCase) -> Result<BagRun> {
        let (p_r0, pi) = case.initial();
        let psi0 = prepare_initial(self.x0, self.sigma, p_r0, pi, self.grid()?)?;
        let opts = BagOptions { snapshots: self.snapshot_times(), ..Default::default() };
        evolve_bag_with(&psi0, &self.params, self.dt, self.t_end, &opts)
    }
}

/// Runs several cases concurrently; results come back in input order.
pub fn run_bag_cases(spec: &BagFigureSpec, cases: &[BagCase], exec: Execution) -> Result<Vec<BagRun>> {
    exec::try_map(exec, cases, |_, &c| spec.run_case(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::hermitian_eigenvalues;
    use nalgebra::DMatrix;

    fn eig(m: &Mat4) -> Vec<f64> {
        hermitian_eigenvalues(&DMatrix::from_iterator(4, 4, m.iter().copied())).unwrap()
    }

    #[test]
    fn massless_block_spectrum() {
        let bp = BagParams::new(SimParams::new(1.5, 0.0).unwrap(), 0.0, 0.0).unwrap();
        let ev = eig(&bag_spin_kinetic_block(0.7, &bp));
        let want = [-2.0 * 1.5 * 0.7, 0.0, 0.0, 2.0 * 1.5 * 0.7];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn rest_block_spectrum() {
        let bp = BagParams::new(SimParams::new(1.0, 0.8).unwrap(), 0.0, 0.0).unwrap();
        let ev = eig(&bag_spin_kinetic_block(0.0, &bp));
        let want = [-1.6, 0.0, 0.0, 1.6];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn x_star_at_figure_params() {
        assert!((BagParams::figure().x_star() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pi_states() {
        let plus = pi_eigenspinor(1).unwrap();
        let want = [0.5, -0.5, 0.5, -0.5];
        for (a, b) in plus.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        let g = Grid1D::centered(256, 0.0, 30.0).unwrap();
        let m = prepare_initial(0.0, 3.0, 0.0, -1, g).unwrap();
        assert!((pi_expectation(&m) + 1.0).abs() < 1e-12);
        assert!(matches!(prepare_initial(0.0, 3.0, 0.0, 0, g), Err(Error::Domain(_))));
    }

    #[test]
    fn local_maxima() {
        assert_eq!(count_local_maxima(&[0.0, 1.0, 0.0, 0.5, 0.0], 0.05), 2);
        assert_eq!(count_local_maxima(&[0.0, 1.0, 0.0, 0.01, 0.0], 0.05), 1);
    }
}

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Physically scaled DFT pair for one grid.
///
/// `forward` maps position samples to `φ(p_c) = dx/√(2π) Σ_j ψ(x_j) e^{-i p_c x_j}`
/// in centred momentum order, `inverse` undoes it. Both are unitary with
/// respect to the `dx` and `dp` quadrature weights.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_phase: Vec<C64>,
    inv_phase: Vec<C64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.n_points();
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
        let sf = grid.dx() / (2.0 * PI).sqrt();
        let si = grid.dp() / (2.0 * PI).sqrt();
        let x0 = grid.x_min();
        let fwd_phase = (0..n).map(|c| C64::from_polar(sf, -grid.p(c) * x0)).collect();
        let inv_phase = (0..n).map(|c| C64::from_polar(si, grid.p(c) * x0)).collect();
        Self { n, fwd, inv, fwd_phase, inv_phase }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
        buf.rotate_left(self.n / 2);
        for (v, ph) in buf.iter_mut().zip(&self.fwd_phase) {
            *v *= ph;
        }
    }

    /// Unscaled DFT in natural FFT order.
    pub(crate) fn raw_forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    pub(crate) fn raw_inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }

    /// Centred index of natural-order bin `r`.
    pub(crate) fn centred_index(&self, r: usize) -> usize {
        (r + self.n / 2) % self.n
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (v, ph) in buf.iter_mut().zip(&self.inv_phase) {
            *v *= ph;
        }
        buf.rotate_right(self.n / 2);
        self.inv.process(buf);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

/// `C`-component complex field on a [`Grid1D`], stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField<const C: usize> {
    grid: Grid1D,
    rep: Representation,
    comps: [Vec<C64>; C],
}

/// Two-component Dirac spinor on a line.
pub type SpinorField1D = SpinorField<2>;

impl<const C: usize> SpinorField<C> {
    pub fn zeros(grid: Grid1D, rep: Representation) -> Self {
        let comps = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); grid.n_points()]);
        Self { grid, rep, comps }
    }

    pub fn from_components(grid: Grid1D, rep: Representation, comps: [Vec<C64>; C]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.n_points()) {
            return Err(Error::Usage(format!(
                "component length does not match grid size {}",
                grid.n_points()
            )));
        }
        Ok(Self { grid, rep, comps })
    }

    /// Position-space field sampled from `f(x)`.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> [C64; C]) -> Self {
        let mut out = Self::zeros(grid, Representation::Position);
        for j in 0..grid.n_points() {
            let v = f(grid.x(j));
            for (c, vc) in v.into_iter().enumerate() {
                out.comps[c][j] = vc;
            }
        }
        out
    }

    /// Normalised Gaussian `(2πσ²)^{-1/4} exp(-(x-x0)²/4σ² + i p0 x) · spinor`,
    /// so `σ` is the standard deviation of the density.
    pub fn gaussian(grid: Grid1D, x0: f64, sigma: f64, p0: f64, spinor: [C64; C]) -> Self {
        let mut f = Self::from_fn(grid, |x| {
            let g = C64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x);
            spinor.map(|s| s * g)
        });
        f.normalize();
        f
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn representation(&self) -> Representation {
        self.rep
    }
    pub fn component(&self, c: usize) -> &[C64] {
        &self.comps[c]
    }
    pub fn component_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.comps[c]
    }
    pub fn components(&self) -> &[Vec<C64>; C] {
        &self.comps
    }
    pub fn components_mut(&mut self) -> &mut [Vec<C64>; C] {
        &mut self.comps
    }
    pub fn into_components(self) -> [Vec<C64>; C] {
        self.comps
    }
    pub fn at(&self, j: usize) -> [C64; C] {
        std::array::from_fn(|c| self.comps[c][j])
    }
    pub fn set(&mut self, j: usize, v: [C64; C]) {
        for (c, vc) in v.into_iter().enumerate() {
            self.comps[c][j] = vc;
        }
    }

    fn weight(&self) -> f64 {
        match self.rep {
            Representation::Position => self.grid.dx(),
            Representation::Momentum => self.grid.dp(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
        s * self.weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm (no-op on the zero field).
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
    }

    /// `⟨self|other⟩` with the representation's quadrature weight.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        let mut s = C64::new(0.0, 0.0);
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                s += x.conj() * y;
            }
        }
        Ok(s * self.weight())
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                s += (x - y).norm_sqr();
            }
        }
        Ok((s * self.weight()).sqrt())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.rep != other.rep {
            return Err(Error::Usage("fields live on different grids or representations".into()));
        }
        Ok(())
    }

    /// `Σ_s |ψ_s|²` per lattice point (not multiplied by the weight).
    pub fn density(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.grid.n_points()];
        for c in &self.comps {
            for (dj, v) in d.iter_mut().zip(c) {
                *dj += v.norm_sqr();
            }
        }
        d
    }

    fn require(&self, rep: Representation) -> Result<()> {
        if self.rep != rep {
            return Err(Error::Usage(format!("field is in {:?} representation, expected {rep:?}", self.rep)));
        }
        Ok(())
    }

    pub fn to_momentum(&self) -> Result<Self> {
        self.require(Representation::Position)?;
        let f = Fourier::new(&self.grid);
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            f.forward(c);
        }
        out.rep = Representation::Momentum;
        Ok(out)
    }

    pub fn to_position(&self) -> Result<Self> {
        self.require(Representation::Momentum)?;
        let f = Fourier::new(&self.grid);
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            f.inverse(c);
        }
        out.rep = Representation::Position;
        Ok(out)
    }

    /// Probability in the outer 5% strip on each side of the box, relative to
    /// the total norm.
    pub fn boundary_leak(&self) -> Result<f64> {
        self.require(Representation::Position)?;
        let d = self.density();
        let total: f64 = d.iter().sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let edge: f64 = d
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.in_boundary_strip(*j))
            .map(|(_, v)| v)
            .sum();
        Ok(edge / total)
    }

    /// `Σ x |ψ|² dx` divided by the norm.
    pub fn mean_position(&self) -> Result<f64> {
        self.require(Representation::Position)?;
        let d = self.density();
        let total: f64 = d.iter().sum();
        let m: f64 = d.iter().enumerate().map(|(j, v)| self.grid.x(j) * v).sum();
        Ok(m / total)
    }

    /// Standard deviation of the position density.
    pub fn position_width(&self) -> Result<f64> {
        let mu = self.mean_position()?;
        let d = self.density();
        let total: f64 = d.iter().sum();
        let v: f64 = d.iter().enumerate().map(|(j, v)| (self.grid.x(j) - mu).powi(2) * v).sum();
        Ok((v / total).sqrt())
    }

    /// Probability (times the weight) with `x >= x_split`.
    pub fn mass_beyond(&self, x_split: f64) -> Result<f64> {
        self.require(Representation::Position)?;
        let d = self.density();
        Ok(d.iter()
            .enumerate()
            .filter(|(j, _)| self.grid.x(*j) >= x_split)
            .map(|(_, v)| v)
            .sum::<f64>()
            * self.grid.dx())
    }
}

/// Errors with [`Error::BoundaryLeak`] if the field's edge probability exceeds
/// `threshold`.
pub fn check_leak<const C: usize>(f: &SpinorField<C>, threshold: f64, time: f64) -> Result<()> {
    let leak = f.boundary_leak()?;
    if leak > threshold {
        return Err(Error::BoundaryLeak { leak, threshold, time });
    }
    Ok(())
}

/// Edge-strip threshold used by every dynamical run.
pub const LEAK_THRESHOLD: f64 = 1e-6;

use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::error::Result;
use crate::exec::{self, Execution};
use crate::field::{Representation, SpinorField1D};
use crate::C64;

use super::channels::SpinOscillatorState;

/// Uniform lattice `min + k·step`, `k < n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Lattice {
    /// `n` points from `-half` to `half` inclusive.
    pub fn symmetric(half: f64, n: usize) -> Self {
        Self { min: -half, step: 2.0 * half / (n - 1) as f64, n }
    }
    pub fn at(&self, k: usize) -> f64 {
        self.min + k as f64 * self.step
    }
    pub fn max(&self) -> f64 {
        self.at(self.n - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x: Lattice,
    pub p: Lattice,
}

impl PhaseSpaceGrid {
    /// Square `n × n` box `[−half, half]²`.
    pub fn square(half: f64, n: usize) -> Self {
        let l = Lattice::symmetric(half, n);
        Self { x: l, p: l }
    }
    pub fn len(&self) -> usize {
        self.x.n * self.p.n
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cell_area(&self) -> f64 {
        self.x.step * self.p.step
    }
}

/// Matrix-valued Wigner function, row-major with x as the slow index; each
/// entry holds `(W00, W01, W10, W11)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    values: Vec<[C64; 4]>,
    /// Set when the source field did not decay to the edge of its box.
    pub support_warning: bool,
}

impl WignerField {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<[C64; 4]>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { grid, values, support_warning: false }
    }
    pub fn values(&self) -> &[[C64; 4]] {
        &self.values
    }
    pub fn at(&self, i: usize, j: usize) -> Matrix2<C64> {
        let v = self.values[i * self.grid.p.n + j];
        Matrix2::new(v[0], v[1], v[2], v[3])
    }
    /// `∬ Tr W dx dp`.
    pub fn trace_integral(&self) -> f64 {
        self.values.iter().map(|v| (v[0] + v[3]).re).sum::<f64>() * self.grid.cell_area()
    }
    pub fn max_hermiticity_error(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v[1] - v[2].conj()).norm().max(v[0].im.abs()).max(v[3].im.abs()))
            .fold(0.0, f64::max)
    }
    /// `∫ W dp` at each x.
    pub fn position_marginal(&self) -> Vec<[C64; 4]> {
        let np = self.grid.p.n;
        self.values
            .chunks(np)
            .map(|row| {
                let mut acc = [C64::new(0.0, 0.0); 4];
                for v in row {
                    for k in 0..4 {
                        acc[k] += v[k];
                    }
                }
                acc.map(|a| a * self.grid.p.step)
            })
            .collect()
    }
    /// `∫ W dx` at each p.
    pub fn momentum_marginal(&self) -> Vec<[C64; 4]> {
        let np = self.grid.p.n;
        let mut out = vec![[C64::new(0.0, 0.0); 4]; np];
        for row in self.values.chunks(np) {
            for (acc, v) in out.iter_mut().zip(row) {
                for k in 0..4 {
                    acc[k] += v[k];
                }
            }
        }
        for acc in out.iter_mut() {
            for a in acc.iter_mut() {
                *a *= self.grid.x.step;
            }
        }
        out
    }
}

/// `W_ab(x, p) = (1/2π) ∫ ψ_a(x + s/2) ψ_b*(x − s/2) e^{−isp} ds` on the
/// grid's own x points and the lattice `p_k = πk/L`, `k ∈ [−n/2, n/2)`.
pub fn wigner_spinor(psi: &SpinorField1D) -> Result<WignerField> {
    wigner_spinor_with(psi, Execution::default())
}

pub fn wigner_spinor_with(psi: &SpinorField1D, exec: Execution) -> Result<WignerField> {
    let f = if psi.representation() == Representation::Position { psi.clone() } else { psi.to_position()? };
    let g = *f.grid();
    let n = g.n_points();
    let dx = g.dx();
    let grid = PhaseSpaceGrid {
        x: Lattice { min: g.x_min(), step: dx, n },
        p: Lattice { min: -(n as f64 / 2.0) * PI / g.length(), step: PI / g.length(), n },
    };
    let fft = rustfft::FftPlanner::<f64>::new().plan_fft_forward(n);
    let (a, b) = (f.component(0), f.component(1));
    let scale = 2.0 * dx / (2.0 * PI);
    let rows = exec::map_range(exec, n, |i| {
        let mut bufs = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
        let half = (n / 2) as isize;
        // j = −n/2 has no +n/2 partner; dropping it keeps W exactly Hermitian.
        for j in (1 - half)..half {
            let (ip, im) = (i as isize + j, i as isize - j);
            if ip < 0 || im < 0 || ip >= n as isize || im >= n as isize {
                continue;
            }
            let (ip, im) = (ip as usize, im as usize);
            let slot = j.rem_euclid(n as isize) as usize;
            bufs[0][slot] = a[ip] * a[im].conj();
            bufs[1][slot] = a[ip] * b[im].conj();
            bufs[2][slot] = b[ip] * b[im].conj();
        }
        for buf in bufs.iter_mut() {
            fft.process(buf);
        }
        (0..n)
            .map(|c| {
                let m = (c + n / 2) % n;
                let w00 = C64::new(bufs[0][m].re * scale, 0.0);
                let w01 = bufs[1][m] * scale;
                let w11 = C64::new(bufs[2][m].re * scale, 0.0);
                [w00, w01, w01.conj(), w11]
            })
            .collect::<Vec<_>>()
    });
    let mut out = WignerField::new(grid, rows.into_iter().flatten().collect());
    out.support_warning = f.boundary_leak()? > 1e-10;
    Ok(out)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Generalised Laguerre `L_n^{(k)}(y)` by upward recurrence.
fn laguerre(n: usize, k: f64, y: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + k - y;
    for j in 1..n {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 + k - y) * l1 - (jf + k) * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn kernel_with(lnf: &[f64], m: usize, n: usize, x: f64, p: f64) -> C64 {
    if m < n {
        return kernel_with(lnf, n, m, x, p).conj();
    }
    let r2 = x * x + p * p;
    let d = m - n;
    if d > 0 && r2 == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let lag = laguerre(n, d as f64, 2.0 * r2);
    if lag == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let log_mag = -PI.ln() + 0.5 * (lnf[n] - lnf[m]) + d as f64 * 0.5 * (2.0 * r2).ln().max(f64::MIN) - r2;
    let log_mag = if d == 0 { -PI.ln() - r2 } else { log_mag };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 } * lag.signum();
    let theta = -(d as f64) * p.atan2(x);
    C64::from_polar(sign * (log_mag + lag.abs().ln()).exp(), theta)
}

/// Wigner function of the Fock operator `|m⟩⟨n|`.
pub fn fock_wigner_kernel(m: usize, n: usize, x: f64, p: f64) -> C64 {
    kernel_with(&ln_factorials(m.max(n)), m, n, x, p)
}

/// Mixed-state Wigner matrix from a spin ⊗ Fock density matrix via the Fock
/// kernels. Zero entries of ρ are skipped.
pub fn wigner_from_density(rho: &SpinOscillatorState, grid: &PhaseSpaceGrid) -> WignerField {
    wigner_from_density_with(rho, grid, Execution::default())
}

pub fn wigner_from_density_with(rho: &SpinOscillatorState, grid: &PhaseSpaceGrid, exec: Execution) -> WignerField {
    let nm = rho.n_max();
    let lnf = ln_factorials(nm);
    let mut terms: Vec<(usize, usize, usize, C64)> = Vec::new();
    for a in 0..2 {
        for b in a..2 {
            for m in 0..=nm {
                for n in 0..=nm {
                    let r = rho.entry(a, m, b, n);
                    if r.norm_sqr() > 0.0 {
                        terms.push((2 * a + b, m, n, r));
                    }
                }
            }
        }
    }
    let rows = exec::map_range(exec, grid.x.n, |i| {
        let x = grid.x.at(i);
        (0..grid.p.n)
            .map(|j| {
                let p = grid.p.at(j);
                let mut w = [C64::new(0.0, 0.0); 4];
                for &(slot, m, n, r) in &terms {
                    w[slot] += r * kernel_with(&lnf, m, n, x, p);
                }
                w[0].im = 0.0;
                w[3].im = 0.0;
                w[2] = w[1].conj();
                w
            })
            .collect::<Vec<_>>()
    });
    WignerField::new(*grid, rows.into_iter().flatten().collect())
}

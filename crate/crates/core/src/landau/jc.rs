use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::SpinorField1D;
use crate::grid::Grid1D;
use crate::C64;

use super::hermite::hermite_functions;

/// Units with eB = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JCParams {
    pub c: f64,
    pub m: f64,
    /// Highest Fock number kept.
    pub n_max: usize,
}

impl JCParams {
    pub fn new(c: f64, m: f64, n_max: usize) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("c = {c} must be positive")));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Config(format!("m = {m} must be non-negative")));
        }
        if n_max < 4 {
            return Err(Error::Config("n_max must be at least 4".into()));
        }
        Ok(Self { c, m, n_max })
    }

    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// Hilbert-space dimension `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Basis index of `|spin, n⟩` with spin 0 = ↑, 1 = ↓.
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * (self.n_max + 1) + n
    }
}

/// How the spinor components are attached to the oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LandauConvention {
    /// `c√2(σ⁺a + a†σ⁻) + mc²σ_z`; level n lives in `{|↑,n−1⟩, |↓,n⟩}` and
    /// the uncoupled state is `|↓,0⟩` at `−mc²`.
    #[default]
    JaynesCummings,
    /// `−mc²σ_z + ic√2(σ⁺a† − σ⁻a)`; level n is `(α φ_n, β φ_{n−1})` and
    /// the uncoupled state is `(φ_0, 0)` at `−mc²`.
    DiracMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// Sector-n basis as `(spin, fock)` pairs and the 2×2 block in that basis.
fn sector(n: usize, params: &JCParams, conv: LandauConvention) -> ([(usize, usize); 2], [[C64; 2]; 2]) {
    let mc2 = params.rest_energy();
    let g = params.c * (2.0 * n as f64).sqrt();
    match conv {
        LandauConvention::JaynesCummings => (
            [(0, n - 1), (1, n)],
            [[C64::new(mc2, 0.0), C64::new(g, 0.0)], [C64::new(g, 0.0), C64::new(-mc2, 0.0)]],
        ),
        LandauConvention::DiracMatrix => (
            [(0, n), (1, n - 1)],
            [[C64::new(-mc2, 0.0), C64::new(0.0, g)], [C64::new(0.0, -g), C64::new(mc2, 0.0)]],
        ),
    }
}

/// Truncated Hamiltonian on spin ⊗ Fock.
pub fn jc_hamiltonian(params: &JCParams, conv: LandauConvention) -> DMatrix<C64> {
    let d = params.dim();
    let mut h = DMatrix::zeros(d, d);
    let mc2 = params.rest_energy();
    let sz = match conv {
        LandauConvention::JaynesCummings => mc2,
        LandauConvention::DiracMatrix => -mc2,
    };
    for n in 0..=params.n_max {
        h[(params.index(0, n), params.index(0, n))] = C64::new(sz, 0.0);
        h[(params.index(1, n), params.index(1, n))] = C64::new(-sz, 0.0);
    }
    for n in 1..=params.n_max {
        let (basis, blk) = sector(n, params, conv);
        let (i, j) = (params.index(basis[0].0, basis[0].1), params.index(basis[1].0, basis[1].1));
        h[(i, j)] = blk[0][1];
        h[(j, i)] = blk[1][0];
    }
    h
}

/// `−mc²` for n = 0, otherwise `±√(m²c⁴ + 2nc²)`.
pub fn landau_energy(n: i64, branch: Branch, params: &JCParams) -> Result<f64> {
    if n < 0 {
        return Err(Error::Domain(format!("Landau index {n} is negative")));
    }
    let mc2 = params.rest_energy();
    if n == 0 {
        return Ok(-mc2);
    }
    Ok(branch.sign() * (mc2 * mc2 + 2.0 * n as f64 * params.c * params.c).sqrt())
}

/// Eigenvector of level `n` as a spin ⊗ Fock vector.
pub fn landau_fock_state(n: usize, branch: Branch, params: &JCParams, conv: LandauConvention) -> Result<DVector<C64>> {
    if 2 * n > params.n_max {
        return Err(Error::Truncation { level: n, needed: 2 * n, n_max: params.n_max });
    }
    let mut v = DVector::zeros(params.dim());
    if n == 0 {
        let idx = match conv {
            LandauConvention::JaynesCummings => params.index(1, 0),
            LandauConvention::DiracMatrix => params.index(0, 0),
        };
        v[idx] = C64::new(1.0, 0.0);
        return Ok(v);
    }
    let e = landau_energy(n as i64, branch, params)?;
    let (basis, blk) = sector(n, params, conv);
    // (H − E) v = 0 for the 2×2 block: v ∝ (b, E − a) or (E − d, b*).
    let a = blk[0][0].re;
    let d = blk[1][1].re;
    let b = blk[0][1];
    let cand1 = [b, C64::new(e - a, 0.0)];
    let cand2 = [C64::new(e - d, 0.0), b.conj()];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (w, nn) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let nn = nn.sqrt();
    for (k, &(spin, fock)) in basis.iter().enumerate() {
        v[params.index(spin, fock)] = w[k] / nn;
    }
    Ok(v)
}

/// Position-space spinor of level `n` (the plane-wave factor in y dropped),
/// with `a = (x + d/dx)/√2`.
pub fn landau_eigenstate(
    n: usize,
    branch: Branch,
    params: &JCParams,
    conv: LandauConvention,
    grid: &Grid1D,
) -> Result<SpinorField1D> {
    let v = landau_fock_state(n, branch, params, conv)?;
    let nonzero: Vec<(usize, usize, C64)> = (0..2)
        .flat_map(|s| (0..=params.n_max).map(move |k| (s, k)))
        .map(|(s, k)| (s, k, v[params.index(s, k)]))
        .filter(|(_, _, a)| a.norm_sqr() > 0.0)
        .collect();
    let top = nonzero.iter().map(|t| t.1).max().unwrap_or(0);
    let mut out = SpinorField1D::zeros(*grid, crate::Representation::Position);
    for j in 0..grid.n_points() {
        let phis = hermite_functions(top, grid.x(j))?;
        let mut val = [C64::new(0.0, 0.0); 2];
        for &(s, k, a) in &nonzero {
            val[s] += a * phis[k];
        }
        out.set(j, val);
    }
    Ok(out)
}

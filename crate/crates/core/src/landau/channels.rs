use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Density matrix over spin ⊗ Fock(0..=n_max), spin-major (`↑` block first).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOscillatorState {
    rho: DMatrix<C64>,
    n_max: usize,
}

const TOL: f64 = 1e-10;

impl SpinOscillatorState {
    pub fn new(rho: DMatrix<C64>, n_max: usize) -> Result<Self> {
        let d = 2 * (n_max + 1);
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Validation(format!("density matrix must be {d}×{d}")));
        }
        let herm = (&rho - rho.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if herm > TOL {
            return Err(Error::Validation(format!("density matrix is not Hermitian ({herm:.2e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::Validation(format!("trace {tr} is not 1")));
        }
        let sym = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let min_ev = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_ev < -TOL {
            return Err(Error::Validation(format!("density matrix has eigenvalue {min_ev:.2e}")));
        }
        Ok(Self { rho, n_max })
    }

    /// `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(psi: &DVector<C64>, n_max: usize) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state vector has norm {n}")));
        }
        Self::new(psi * psi.adjoint(), n_max)
    }

    /// `(I/2) ⊗ |0⟩⟨0|`.
    pub fn maximally_mixed_spin_vacuum(n_max: usize) -> Self {
        let d = 2 * (n_max + 1);
        let mut rho = DMatrix::zeros(d, d);
        rho[(0, 0)] = C64::new(0.5, 0.0);
        rho[(n_max + 1, n_max + 1)] = C64::new(0.5, 0.0);
        Self { rho, n_max }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * (self.n_max + 1) + n
    }
    pub fn entry(&self, a: usize, m: usize, b: usize, n: usize) -> C64 {
        self.rho[(self.index(a, m), self.index(b, n))]
    }
}

/// Spin-only operator `[[k00, k01], [k10, k11]] ⊗ I` applied as `K ρ K†`.
fn conjugate_spin(rho: &DMatrix<C64>, n_max: usize, k: [[f64; 2]; 2]) -> DMatrix<C64> {
    let f = n_max + 1;
    let d = 2 * f;
    let mut out = DMatrix::zeros(d, d);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let w = k[a][a2] * k[b][b2];
                    if w == 0.0 {
                        continue;
                    }
                    let src = rho.view((a2 * f, b2 * f), (f, f));
                    let mut dst = out.view_mut((a * f, b * f), (f, f));
                    dst += src * C64::new(w, 0.0);
                }
            }
        }
    }
    out
}

/// Spontaneous emission on the spin with Kraus pair
/// `K0 = |↓⟩⟨↓| + √(1−p)|↑⟩⟨↑|`, `K1 = √p |↓⟩⟨↑|`.
pub fn amplitude_damping(state: &SpinOscillatorState, p_damp: f64) -> Result<SpinOscillatorState> {
    if !(0.0..=1.0).contains(&p_damp) {
        return Err(Error::Domain(format!("p_damp = {p_damp} must lie in [0, 1]")));
    }
    let k0 = [[(1.0 - p_damp).sqrt(), 0.0], [0.0, 1.0]];
    let k1 = [[0.0, 0.0], [p_damp.sqrt(), 0.0]];
    let rho = conjugate_spin(&state.rho, state.n_max, k0) + conjugate_spin(&state.rho, state.n_max, k1);
    Ok(SpinOscillatorState { rho, n_max: state.n_max })
}

/// Pure dephasing of the spin: coherences between ↑ and ↓ decay by `e^{−γt}`.
pub fn dephasing_channel(state: &SpinOscillatorState, gamma_t: f64) -> Result<SpinOscillatorState> {
    if !(gamma_t >= 0.0) {
        return Err(Error::Domain(format!("γt = {gamma_t} must be non-negative")));
    }
    let f = state.n_max + 1;
    let e = (-gamma_t).exp();
    let mut rho = state.rho.clone();
    for i in 0..f {
        for j in 0..f {
            rho[(i, f + j)] *= e;
            rho[(f + i, j)] *= e;
        }
    }
    Ok(SpinOscillatorState { rho, n_max: state.n_max })
}

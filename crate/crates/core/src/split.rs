//! Strang split-operator stepping
//! `e^{-iV dt/2} F⁻¹ e^{-iK dt} F e^{-iV dt/2}`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::field::{Fourier, Representation, SpinorField};
use crate::grid::Grid1D;
use crate::C64;

pub type MatC<const C: usize> = SMatrix<C64, C, C>;

/// Per-momentum unitary, indexed in centred momentum order.
#[derive(Clone, Debug)]
pub struct KineticPhase<const C: usize>(pub Vec<MatC<C>>);

/// Per-position unitary for one *half* step.
#[derive(Clone, Debug)]
pub enum PotentialPhase<const C: usize> {
    /// Same scalar phase on every component.
    Scalar(Vec<C64>),
    Matrix(Vec<MatC<C>>),
}

impl<const C: usize> KineticPhase<C> {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().map(|m| m.adjoint()).collect())
    }
}

impl<const C: usize> PotentialPhase<C> {
    /// `e^{-i V(x_j) dt/2}` for a scalar potential.
    pub fn scalar_half_step(grid: &Grid1D, v: impl Fn(f64) -> f64, dt: f64) -> Self {
        Self::Scalar((0..grid.n_points()).map(|j| C64::from_polar(1.0, -0.5 * dt * v(grid.x(j)))).collect())
    }
    /// No potential.
    pub fn none(grid: &Grid1D) -> Self {
        Self::Scalar(vec![C64::new(1.0, 0.0); grid.n_points()])
    }
    pub fn len(&self) -> usize {
        match self {
            Self::Scalar(v) => v.len(),
            Self::Matrix(v) => v.len(),
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn adjoint(&self) -> Self {
        match self {
            Self::Scalar(v) => Self::Scalar(v.iter().map(|z| z.conj()).collect()),
            Self::Matrix(v) => Self::Matrix(v.iter().map(|m| m.adjoint()).collect()),
        }
    }
}

pub(crate) fn apply_pointwise<const C: usize>(comps: &mut [Vec<C64>; C], mats: &[MatC<C>]) {
    let mut v = SVector::<C64, C>::zeros();
    for (j, m) in mats.iter().enumerate() {
        for c in 0..C {
            v[c] = comps[c][j];
        }
        let w = m * v;
        for c in 0..C {
            comps[c][j] = w[c];
        }
    }
}

fn apply_potential<const C: usize>(comps: &mut [Vec<C64>; C], pot: &PotentialPhase<C>) {
    match pot {
        PotentialPhase::Scalar(ph) => {
            for comp in comps.iter_mut() {
                for (v, p) in comp.iter_mut().zip(ph) {
                    *v *= p;
                }
            }
        }
        PotentialPhase::Matrix(m) => apply_pointwise(comps, m),
    }
}

/// Precomputed Strang propagator for one grid and time step.
#[derive(Clone, Debug)]
pub struct StrangPropagator<const C: usize> {
    grid: Grid1D,
    fourier: Fourier,
    kinetic: KineticPhase<C>,
    potential_half: PotentialPhase<C>,
    /// Kinetic table in natural FFT order with the transform scaling folded in.
    kinetic_raw: Vec<MatC<C>>,
    /// Two half steps merged, for interior steps of a multi-step run.
    potential_full: PotentialPhase<C>,
}

fn square<const C: usize>(p: &PotentialPhase<C>) -> PotentialPhase<C> {
    match p {
        PotentialPhase::Scalar(v) => PotentialPhase::Scalar(v.iter().map(|z| z * z).collect()),
        PotentialPhase::Matrix(v) => PotentialPhase::Matrix(v.iter().map(|m| m * m).collect()),
    }
}

impl<const C: usize> StrangPropagator<C> {
    pub fn new(grid: Grid1D, kinetic: KineticPhase<C>, potential_half: PotentialPhase<C>) -> Result<Self> {
        let n = grid.n_points();
        if kinetic.len() != n || potential_half.len() != n {
            return Err(Error::Usage(format!(
                "phase tables ({} kinetic, {} potential) do not match grid size {n}",
                kinetic.len(),
                potential_half.len()
            )));
        }
        let fourier = Fourier::new(&grid);
        let scale = C64::new(1.0 / n as f64, 0.0);
        let kinetic_raw = (0..n).map(|r| kinetic.0[fourier.centred_index(r)] * scale).collect();
        let potential_full = square(&potential_half);
        Ok(Self { fourier, grid, kinetic, potential_half, kinetic_raw, potential_full })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// The propagator undoing one step of `self`.
    pub fn inverse(&self) -> Self {
        Self::new(self.grid, self.kinetic.adjoint(), self.potential_half.adjoint()).expect("sizes already checked")
    }

    /// One step on raw position-space components.
    pub fn step_components(&self, comps: &mut [Vec<C64>; C]) {
        self.evolve_components(comps, 1);
    }

    /// `n` consecutive steps. The trailing half potential of one step and the
    /// leading half of the next are applied as a single full phase.
    pub fn evolve_components(&self, comps: &mut [Vec<C64>; C], n: usize) {
        if n == 0 {
            return;
        }
        apply_potential(comps, &self.potential_half);
        for s in 0..n {
            for comp in comps.iter_mut() {
                self.fourier.raw_forward(comp);
            }
            apply_pointwise(comps, &self.kinetic_raw);
            for comp in comps.iter_mut() {
                self.fourier.raw_inverse(comp);
            }
            let last = s + 1 == n;
            apply_potential(comps, if last { &self.potential_half } else { &self.potential_full });
        }
    }

    pub fn evolve_in_place(&self, f: &mut SpinorField<C>, n: usize) -> Result<()> {
        self.check(f)?;
        self.evolve_components(f.components_mut(), n);
        Ok(())
    }

    fn check(&self, f: &SpinorField<C>) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::Usage("field grid does not match propagator grid".into()));
        }
        if f.representation() != Representation::Position {
            return Err(Error::Usage("Strang stepping expects a position-space field".into()));
        }
        Ok(())
    }

    pub fn step_in_place(&self, f: &mut SpinorField<C>) -> Result<()> {
        self.check(f)?;
        self.step_components(f.components_mut());
        Ok(())
    }
}

/// One Strang step returning a new field. `potential_half` holds the phases
/// for half of `dt`, `kinetic` those for the full `dt`.
pub fn strang_step<const C: usize>(
    psi: &SpinorField<C>,
    kinetic: &KineticPhase<C>,
    potential_half: &PotentialPhase<C>,
) -> Result<SpinorField<C>> {
    let prop = StrangPropagator::new(*psi.grid(), kinetic.clone(), potential_half.clone())?;
    let mut out = psi.clone();
    prop.step_in_place(&mut out)?;
    Ok(out)
}

/// Applies a per-momentum matrix table once (exact evolution when the
/// Hamiltonian is diagonal in momentum).
pub fn apply_momentum_diagonal<const C: usize>(
    psi: &SpinorField<C>,
    table: &KineticPhase<C>,
) -> Result<SpinorField<C>> {
    if table.len() != psi.grid().n_points() {
        return Err(Error::Usage("momentum table does not match grid size".into()));
    }
    let back_to_position = psi.representation() == Representation::Position;
    let mut k = if back_to_position { psi.to_momentum()? } else { psi.clone() };
    apply_pointwise(k.components_mut(), &table.0);
    if back_to_position {
        k.to_position()
    } else {
        Ok(k)
    }
}

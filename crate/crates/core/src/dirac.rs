//! Free Dirac dynamics: 1+1 on a grid, 3+1 for a single momentum mode, and
//! Zitterbewegung observables.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::expm::matrix_exponential_4;
use crate::field::{check_leak, Fourier, Representation, SpinorField1D, LEAK_THRESHOLD};
use crate::grid::Grid1D;
use crate::pauli::{pauli_exponential, Mat2, PauliCoeffs};
use crate::split::{apply_pointwise, KineticPhase};
use crate::C64;

/// Simulated speed of light, mass and the Pauli direction of the mass term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    pub c: f64,
    pub m: f64,
    mass_axis: [f64; 3],
}

impl SimParams {
    /// Mass term along σ_z.
    pub fn new(c: f64, m: f64) -> Result<Self> {
        Self::with_mass_axis(c, m, [0.0, 0.0, 1.0])
    }

    /// `mass_axis` must be a unit vector in the y-z plane; an x component
    /// would mix with the kinetic σ_x term.
    pub fn with_mass_axis(c: f64, m: f64, mass_axis: [f64; 3]) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("c = {c} must be positive")));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Config(format!("m = {m} must be non-negative")));
        }
        let n = mass_axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("|mass_axis| = {n} is not 1")));
        }
        if mass_axis[0].abs() > 1e-12 {
            return Err(Error::Config("mass_axis must be orthogonal to σ_x".into()));
        }
        Ok(Self { c, m, mass_axis })
    }

    pub fn mass_axis(&self) -> [f64; 3] {
        self.mass_axis
    }

    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// `√(c²p² + m²c⁴)`.
    pub fn energy(&self, p: f64) -> f64 {
        let mc2 = self.rest_energy();
        (self.c * self.c * p * p + mc2 * mc2).sqrt()
    }

    /// `c σ_x p + mc² n·σ` as Pauli coefficients.
    pub fn hamiltonian_1p1(&self, p: f64) -> PauliCoeffs {
        let mc2 = self.rest_energy();
        PauliCoeffs::new(0.0, self.c * p, mc2 * self.mass_axis[1], mc2 * self.mass_axis[2])
    }
}

pub fn dirac_kinetic_phase_1p1(grid: &Grid1D, params: &SimParams, dt: f64) -> KineticPhase<2> {
    KineticPhase(grid.momenta().into_iter().map(|p| pauli_exponential(params.hamiltonian_1p1(p), dt)).collect())
}

/// Exact free evolution: one momentum-space phase per mode.
pub fn evolve_free(psi0: &SpinorField1D, params: &SimParams, t: f64) -> Result<SpinorField1D> {
    let table = dirac_kinetic_phase_1p1(psi0.grid(), params, t);
    crate::split::apply_momentum_diagonal(psi0, &table)
}

/// Projector onto the positive-energy eigenvector of `cσ_x p + mc² n·σ`.
/// At `p = 0, m = 0` the σ_x = +1 state is returned (the p → 0⁺ limit).
pub fn positive_energy_projector(p: f64, params: &SimParams) -> Mat2 {
    let h = params.hamiltonian_1p1(p);
    let e = h.vector_norm();
    let (hx, hy, hz) = if e > 0.0 { (h.ax / e, h.ay / e, h.az / e) } else { (1.0, 0.0, 0.0) };
    PauliCoeffs::new(0.5, 0.5 * hx, 0.5 * hy, 0.5 * hz).matrix()
}

/// Keeps only the positive-energy part of a field.
pub fn project_positive_energy(psi: &SpinorField1D, params: &SimParams) -> Result<SpinorField1D> {
    let table = KineticPhase(psi.grid().momenta().into_iter().map(|p| positive_energy_projector(p, params)).collect());
    crate::split::apply_momentum_diagonal(psi, &table)
}

/// `⟨H⟩` of a position-space field, evaluated in momentum space.
pub fn energy_expectation(psi: &SpinorField1D, params: &SimParams) -> Result<f64> {
    let k = psi.to_momentum()?;
    let g = *psi.grid();
    let mut acc = 0.0;
    for c in 0..g.n_points() {
        let h = params.hamiltonian_1p1(g.p(c)).matrix();
        let v = nalgebra::Vector2::new(k.component(0)[c], k.component(1)[c]);
        acc += (v.adjoint() * h * v)[(0, 0)].re;
    }
    Ok(acc * g.dp() / k.norm_sqr())
}

/// `⟨H²⟩` and `⟨c²p² + m²c⁴⟩` of a field; equal by the Clifford algebra.
pub fn h_squared_pair(psi: &SpinorField1D, params: &SimParams) -> Result<(f64, f64)> {
    let k = psi.to_momentum()?;
    let g = *psi.grid();
    let (mut h2, mut e2) = (0.0, 0.0);
    for c in 0..g.n_points() {
        let h = params.hamiltonian_1p1(g.p(c)).matrix();
        let v = nalgebra::Vector2::new(k.component(0)[c], k.component(1)[c]);
        let hv = h * v;
        h2 += hv.norm_squared();
        e2 += params.energy(g.p(c)).powi(2) * v.norm_squared();
    }
    let w = g.dp() / k.norm_sqr();
    Ok((h2 * w, e2 * w))
}

/// `⟨x⟩(t)` for each requested time, by exact free evolution. Each snapshot
/// is checked against the boundary-leak guard.
pub fn mean_position_trace(psi0: &SpinorField1D, params: &SimParams, times: &[f64]) -> Result<Vec<f64>> {
    Ok(free_trace(psi0, params, times)?.into_iter().map(|(x, _)| x).collect())
}

/// `(⟨x⟩, ‖ψ‖²)` at each time, exact free evolution with leak checks.
pub fn free_trace(psi0: &SpinorField1D, params: &SimParams, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Usage("times must be ascending".into()));
    }
    let grid = *psi0.grid();
    let k0 = if psi0.representation() == Representation::Position { psi0.to_momentum()? } else { psi0.clone() };
    let fourier = Fourier::new(&grid);
    let hs: Vec<PauliCoeffs> = grid.momenta().into_iter().map(|p| params.hamiltonian_1p1(p)).collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let table: Vec<Mat2> = hs.iter().map(|h| pauli_exponential(*h, t)).collect();
        let mut comps = k0.components().clone();
        apply_pointwise(&mut comps, &table);
        for c in comps.iter_mut() {
            fourier.inverse(c);
        }
        let f = SpinorField1D::from_components(grid, Representation::Position, comps)?;
        check_leak(&f, LEAK_THRESHOLD, t)?;
        out.push((f.mean_position()?, f.norm_sqr()));
    }
    Ok(out)
}

/// `ω = 2√(c²p₀² + m²c⁴)` (ħ = 1).
pub fn zb_frequency_estimate(p0: f64, params: &SimParams) -> f64 {
    2.0 * params.energy(p0)
}

/// `R = (1/2mc) (mc²/E)²` (ħ = 1).
pub fn zb_amplitude_estimate(p0: f64, params: &SimParams) -> Result<f64> {
    if params.m <= 0.0 {
        return Err(Error::Domain("Zitterbewegung amplitude is undefined for m = 0".into()));
    }
    let mc2 = params.rest_energy();
    Ok(1.0 / (2.0 * params.m * params.c) * (mc2 / params.energy(p0)).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZbMeasurement {
    /// Angular frequency.
    pub frequency: f64,
    /// Oscillation radius of the drift-removed signal.
    pub amplitude: f64,
}

fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        sxy += (ti - tm) * (yi - ym);
        sxx += (ti - tm) * (ti - tm);
    }
    let b = sxy / sxx;
    (ym - b * tm, b)
}

/// Least-squares fit of `a + b t + A cos ωt + B sin ωt`; returns
/// (residual sum of squares, √(A²+B²)).
fn sinusoid_fit(t: &[f64], y: &[f64], omega: f64) -> (f64, f64) {
    let t0 = t[0];
    let basis = |ti: f64| {
        let s = ti - t0;
        [1.0, s, (omega * s).cos(), (omega * s).sin()]
    };
    let mut ata = nalgebra::Matrix4::<f64>::zeros();
    let mut aty = nalgebra::Vector4::<f64>::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let b = nalgebra::Vector4::from(basis(ti));
        ata += b * b.transpose();
        aty += b * yi;
    }
    let Some(coef) = ata.cholesky().map(|c| c.solve(&aty)) else {
        return (f64::INFINITY, 0.0);
    };
    let rss = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let b = nalgebra::Vector4::from(basis(ti));
            (yi - coef.dot(&b)).powi(2)
        })
        .sum();
    (rss, coef[2].hypot(coef[3]))
}

/// Dominant oscillation of a uniformly sampled series: linear drift removed,
/// Hann-windowed zero-padded DFT peak, quadratic interpolation, then a
/// least-squares refinement of frequency and amplitude.
pub fn measure_zb_from_trace(series: &[f64], times: &[f64]) -> Result<ZbMeasurement> {
    let n = series.len();
    if n < 64 || times.len() != n {
        return Err(Error::Usage("need at least 64 samples with matching times".into()));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::Usage("times must be uniformly spaced and ascending".into()));
    }
    let (a, b) = linear_fit(times, series);
    let resid: Vec<f64> = times.iter().zip(series).map(|(t, y)| y - a - b * t).collect();
    let scale = 1.0 + series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let m = 8 * n.next_power_of_two();
    let mut buf: Vec<C64> = vec![C64::new(0.0, 0.0); m];
    for (j, r) in resid.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos();
        buf[j] = C64::new(r * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf[..m / 2].iter().map(|z| z.norm()).collect();
    // Search from two cycles per window upwards.
    let k_lo = (2 * m / n).max(2);
    let (k_pk, &peak) = mag[k_lo..m / 2 - 1]
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, v)| (i + k_lo, v))
        .ok_or(Error::NoOscillation)?;
    let mut sorted = mag[k_lo..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if !(peak > 3.0 * floor) {
        return Err(Error::NoOscillation);
    }
    let (ym, y0, yp) = (mag[k_pk - 1], mag[k_pk], mag[k_pk + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let shift = if denom != 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    let bin = 2.0 * PI / (m as f64 * dt);
    let omega0 = (k_pk as f64 + shift.clamp(-0.5, 0.5)) * bin;

    // Golden-section refinement of the least-squares frequency.
    let (mut lo, mut hi) = (omega0 - bin, omega0 + bin);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = sinusoid_fit(times, series, x1).0;
    let mut f2 = sinusoid_fit(times, series, x2).0;
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sinusoid_fit(times, series, x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sinusoid_fit(times, series, x2).0;
        }
    }
    let frequency = 0.5 * (lo + hi);
    let (_, amplitude) = sinusoid_fit(times, series, frequency);
    if amplitude < 1e-9 * scale {
        return Err(Error::NoOscillation);
    }
    Ok(ZbMeasurement { frequency, amplitude })
}

/// A Zitterbewegung demonstration: a broad packet at rest with a spinor
/// that mixes both energy branches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZbSpec {
    pub params: SimParams,
    pub n_points: usize,
    pub half_width: f64,
    pub x0: f64,
    /// Position width; the momentum width is `1/(2σ_x)`.
    pub sigma_x: f64,
    pub p0: f64,
    pub spinor: [C64; 2],
    pub t_end: f64,
    pub n_samples: usize,
}

impl Default for ZbSpec {
    fn default() -> Self {
        Self {
            params: SimParams::with_mass_axis(1.0, 0.5, [0.0, 1.0, 0.0]).expect("valid"),
            n_points: 1024,
            half_width: 100.0,
            x0: 0.0,
            sigma_x: 10.0,
            p0: 0.0,
            spinor: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            t_end: 60.0,
            n_samples: 512,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZbRun {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub norms: Vec<f64>,
    pub measured: ZbMeasurement,
    pub predicted_frequency: f64,
    pub predicted_amplitude: f64,
}

impl ZbRun {
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().fold(0.0, |m, n| m.max((n - n0).abs() / n0))
    }
}

pub fn run_zitterbewegung(spec: &ZbSpec) -> Result<ZbRun> {
    if spec.n_samples < 64 {
        return Err(Error::Config("n_samples must be at least 64".into()));
    }
    if !(spec.t_end.is_finite() && spec.t_end > 0.0) {
        return Err(Error::Config("t_end must be positive".into()));
    }
    let grid = Grid1D::centered(spec.n_points, 0.0, spec.half_width)?;
    let mut psi0 = SpinorField1D::gaussian(grid, spec.x0, spec.sigma_x, spec.p0, spec.spinor);
    psi0.normalize();
    let times: Vec<f64> =
        (0..spec.n_samples).map(|k| spec.t_end * k as f64 / (spec.n_samples - 1) as f64).collect();
    let trace = free_trace(&psi0, &spec.params, &times)?;
    let (mean_x, norms): (Vec<f64>, Vec<f64>) = trace.into_iter().unzip();
    let measured = measure_zb_from_trace(&mean_x, &times)?;
    Ok(ZbRun {
        predicted_frequency: zb_frequency_estimate(spec.p0, &spec.params),
        predicted_amplitude: zb_amplitude_estimate(spec.p0, &spec.params)?,
        times,
        mean_x,
        norms,
        measured,
    })
}

/// Four-spinor over the ion levels `(|a⟩, |b⟩, |c⟩, |d⟩)`.
pub type FourSpinor = Vector4<C64>;

/// 3+1 Dirac Hamiltonian for one momentum mode in the supersymmetric layout
/// `[[0, cσ·p − imc²], [cσ·p + imc², 0]]`.
pub fn dirac_hamiltonian_3p1(p: [f64; 3], params: &SimParams) -> Matrix4<C64> {
    let c = params.c;
    let mc2 = params.rest_energy();
    let sp = PauliCoeffs::new(0.0, c * p[0], c * p[1], c * p[2]).matrix();
    let i_m = Mat2::identity() * C64::new(0.0, mc2);
    let mut h = Matrix4::zeros();
    h.fixed_view_mut::<2, 2>(0, 2).copy_from(&(sp - i_m));
    h.fixed_view_mut::<2, 2>(2, 0).copy_from(&(sp + i_m));
    h
}

/// Velocity operator `c α_x` in the same layout.
pub fn velocity_x_3p1(params: &SimParams) -> Matrix4<C64> {
    let sx = crate::pauli::sigma_x() * C64::new(params.c, 0.0);
    let mut v = Matrix4::zeros();
    v.fixed_view_mut::<2, 2>(0, 2).copy_from(&sx);
    v.fixed_view_mut::<2, 2>(2, 0).copy_from(&sx);
    v
}

pub fn evolve_free_3p1_mode(s: &FourSpinor, p: [f64; 3], params: &SimParams, t: f64) -> Result<FourSpinor> {
    let u = matrix_exponential_4(&dirac_hamiltonian_3p1(p, params), t)?;
    Ok(u * s)
}

/// Real expectation value `⟨s|A|s⟩`.
pub fn expectation_4(s: &FourSpinor, a: &Matrix4<C64>) -> f64 {
    (s.adjoint() * a * s)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_and_amplitude_estimates() {
        let p = SimParams::new(1.0, 1.0).unwrap();
        assert_eq!(zb_frequency_estimate(0.0, &p), 2.0);
        let p0 = SimParams::new(1.0, 0.0).unwrap();
        assert_eq!(zb_frequency_estimate(1.0, &p0), 2.0);
        let ph = SimParams::new(1.0, 0.5).unwrap();
        assert!((zb_frequency_estimate(1.0, &ph) - 2.0 * 1.25f64.sqrt()).abs() < 1e-14);
        assert_eq!(zb_amplitude_estimate(0.0, &ph).unwrap(), 1.0);
        assert!(matches!(zb_amplitude_estimate(0.0, &p0), Err(Error::Domain(_))));
    }

    #[test]
    fn mass_axis_validation() {
        assert!(SimParams::with_mass_axis(1.0, 1.0, [0.0, 0.6, 0.8]).is_ok());
        assert!(SimParams::with_mass_axis(1.0, 1.0, [0.0, 0.6, 0.81]).is_err());
        assert!(SimParams::with_mass_axis(1.0, 1.0, [1.0, 0.0, 0.0]).is_err());
        assert!(SimParams::new(0.0, 1.0).is_err());
        assert!(SimParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn synthetic_sine_with_drift() {
        let times: Vec<f64> = (0..512).map(|j| j as f64 * 0.05).collect();
        let x: Vec<f64> = times.iter().map(|t| 0.3 * (2.0 * t).sin() + 0.1 * t).collect();
        let z = measure_zb_from_trace(&x, &times).unwrap();
        assert!((z.frequency - 2.0).abs() < 0.02 * 2.0, "{z:?}");
        assert!((z.amplitude - 0.3).abs() < 0.01 * 0.3, "{z:?}");
    }

    #[test]
    fn straight_line_has_no_oscillation() {
        let times: Vec<f64> = (0..256).map(|j| j as f64 * 0.1).collect();
        let x: Vec<f64> = times.iter().map(|t| 1.0 + 0.4 * t).collect();
        assert_eq!(measure_zb_from_trace(&x, &times), Err(Error::NoOscillation));
    }

    #[test]
    fn dirac_3p1_squares_to_energy() {
        let p = SimParams::new(1.3, 0.7).unwrap();
        let mom = [0.3, -1.1, 0.4];
        let h = dirac_hamiltonian_3p1(mom, &p);
        let e2 = p.c * p.c * (mom[0] * mom[0] + mom[1] * mom[1] + mom[2] * mom[2]) + p.rest_energy().powi(2);
        assert!((h * h - Matrix4::identity() * C64::new(e2, 0.0)).norm() < 1e-12);
        assert!((h - h.adjoint()).norm() < 1e-15);
    }
}

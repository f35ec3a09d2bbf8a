use super::wigner::{PhaseSpaceGrid, WignerField};

/// Cut-off on `|Tr{W σ⃗}|` below which a point carries no direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Fraction of the field's maximum magnitude.
    Relative(f64),
    Absolute(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(1e-6)
    }
}

/// Unit Bloch vectors over phase space in spherical form. Points below the
/// threshold keep their raw direction so excluded solid angle can be
/// reported, but are flagged invalid.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudospinField {
    pub grid: PhaseSpaceGrid,
    /// Polar angle from +z.
    pub theta: Vec<f64>,
    /// Azimuth `atan2(s_y, s_x)`.
    pub phi: Vec<f64>,
    /// `|Tr{W σ⃗}|`.
    pub magnitude: Vec<f64>,
    pub valid: Vec<bool>,
    /// The absolute cut-off that produced `valid`.
    pub cutoff: f64,
}

impl PseudospinField {
    pub fn vector(&self, k: usize) -> [f64; 3] {
        let (st, ct) = self.theta[k].sin_cos();
        let (sp, cp) = self.phi[k].sin_cos();
        [st * cp, st * sp, ct]
    }
    pub fn s_z(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.cos()).collect()
    }
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
    pub fn len(&self) -> usize {
        self.theta.len()
    }
    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// `s⃗ = Tr{W σ⃗} / |Tr{W σ⃗}|` per point.
pub fn pseudospin_field(w: &WignerField, threshold: Threshold) -> PseudospinField {
    let n = w.values().len();
    let (mut theta, mut phi, mut magnitude) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for v in w.values() {
        let sx = 2.0 * v[1].re;
        let sy = -2.0 * v[1].im;
        let sz = (v[0] - v[3]).re;
        let rho = sx.hypot(sy);
        theta.push(rho.atan2(sz));
        phi.push(sy.atan2(sx));
        magnitude.push(rho.hypot(sz));
    }
    let cutoff = match threshold {
        Threshold::Absolute(a) => a,
        Threshold::Relative(r) => r * magnitude.iter().copied().fold(0.0, f64::max),
    };
    let valid = magnitude.iter().map(|&m| m > 0.0 && m >= cutoff).collect();
    PseudospinField { grid: w.grid, theta, phi, magnitude, valid, cutoff }
}

/// Transverse shrinking `(s_x, s_y, s_z) → (e^{−γt}s_x, e^{−γt}s_y, s_z)`
/// followed by renormalisation. The azimuth is untouched.
pub fn dephasing_map(s: &PseudospinField, gamma_t: f64) -> PseudospinField {
    let e = (-gamma_t.max(0.0)).exp();
    let mut out = s.clone();
    for k in 0..s.len() {
        let (st, ct) = s.theta[k].sin_cos();
        out.theta[k] = (e * st).atan2(ct);
        out.magnitude[k] = s.magnitude[k] * (ct * ct + e * e * st * st).sqrt();
        out.valid[k] = s.valid[k] && out.magnitude[k] > 0.0 && out.magnitude[k] >= s.cutoff;
    }
    out
}

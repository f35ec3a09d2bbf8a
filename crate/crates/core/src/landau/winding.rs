use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

use super::pseudospin::PseudospinField;

/// Largest angle between boundary-ring directions and their mean for the
/// ring to count as a single point at infinity.
pub const COMPACTIFICATION_TOLERANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingReport {
    /// Signed degree `Σ Ω / 4π`.
    pub signed: f64,
    /// Absolute coverings `Σ |Ω| / 4π`.
    pub coverings: f64,
    /// `Σ |Ω|` over triangles touching invalid points (not in the sums).
    pub excluded_solid_angle: f64,
    pub excluded_triangles: usize,
    /// `|signed − round(signed)|`.
    pub quality: f64,
    pub compactification_spread: f64,
}

impl fmt::Display for WindingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "signed={:.6} coverings={:.6} excluded_solid_angle={:.6e} excluded_triangles={} quality={:.3e} compactification_spread={:.4}",
            self.signed,
            self.coverings,
            self.excluded_solid_angle,
            self.excluded_triangles,
            self.quality,
            self.compactification_spread
        )
    }
}

type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Signed solid angle of the spherical triangle (a, b, c).
fn solid_angle(a: V3, b: V3, c: V3) -> f64 {
    2.0 * dot(a, cross(b, c)).atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

#[derive(Default, Clone, Copy)]
struct Acc {
    signed: f64,
    abs: f64,
    excluded: f64,
    excluded_n: usize,
}

impl Acc {
    fn add(&mut self, omega: f64, ok: bool) {
        if ok {
            self.signed += omega;
            self.abs += omega.abs();
        } else {
            self.excluded += omega.abs();
            self.excluded_n += 1;
        }
    }
}

/// Discrete degree of the pseudospin map with the boundary ring collapsed to
/// its mean direction.
pub fn winding_number(s: &PseudospinField) -> Result<WindingReport> {
    winding_number_with(s, Execution::default())
}

pub fn winding_number_with(s: &PseudospinField, exec: Execution) -> Result<WindingReport> {
    let (nx, np) = (s.grid.x.n, s.grid.p.n);
    if nx < 2 || np < 2 {
        return Err(Error::Usage("winding number needs at least a 2×2 grid".into()));
    }
    let idx = |i: usize, j: usize| i * np + j;
    let vec_at = |k: usize| if s.magnitude[k] > 0.0 { Some(s.vector(k)) } else { None };

    // Counter-clockwise boundary ring in the (x, p) plane.
    let mut ring = Vec::with_capacity(2 * (nx + np));
    ring.extend((0..nx).map(|i| idx(i, 0)));
    ring.extend((1..np).map(|j| idx(nx - 1, j)));
    ring.extend((0..nx - 1).rev().map(|i| idx(i, np - 1)));
    ring.extend((1..np - 1).rev().map(|j| idx(0, j)));
    let ring_valid: Vec<V3> = ring.iter().filter(|&&k| s.valid[k]).map(|&k| s.vector(k)).collect();
    if ring_valid.is_empty() {
        return Err(Error::NonCompact("no valid points on the boundary ring".into()));
    }
    let mut inf = [0.0; 3];
    for v in &ring_valid {
        for d in 0..3 {
            inf[d] += v[d];
        }
    }
    let n_inf = dot(inf, inf).sqrt();
    if n_inf == 0.0 {
        return Err(Error::NonCompact("boundary directions cancel".into()));
    }
    let inf = inf.map(|v| v / n_inf);
    let spread = ring_valid.iter().map(|v| dot(*v, inf).clamp(-1.0, 1.0).acos()).fold(0.0, f64::max);
    if spread >= COMPACTIFICATION_TOLERANCE {
        return Err(Error::NonCompact(format!(
            "boundary ring spreads {spread:.3} rad around its mean (limit {COMPACTIFICATION_TOLERANCE})"
        )));
    }

    let rows = exec::map_range(exec, nx - 1, |i| {
        let mut acc = Acc::default();
        for j in 0..np - 1 {
            let (ka, kb, kc, kd) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            for tri in [[ka, kb, kc], [ka, kc, kd]] {
                let (Some(a), Some(b), Some(c)) = (vec_at(tri[0]), vec_at(tri[1]), vec_at(tri[2])) else {
                    acc.excluded_n += 1;
                    continue;
                };
                let ok = tri.iter().all(|&k| s.valid[k]);
                acc.add(solid_angle(a, b, c), ok);
            }
        }
        acc
    });
    let mut total = Acc::default();
    for r in rows {
        total.signed += r.signed;
        total.abs += r.abs;
        total.excluded += r.excluded;
        total.excluded_n += r.excluded_n;
    }
    for k in 0..ring.len() {
        let (a, b) = (ring[(k + 1) % ring.len()], ring[k]);
        match (vec_at(a), vec_at(b)) {
            (Some(va), Some(vb)) => total.add(solid_angle(va, vb, inf), s.valid[a] && s.valid[b]),
            _ => total.excluded_n += 1,
        }
    }
    let signed = total.signed / (4.0 * PI);
    Ok(WindingReport {
        signed,
        coverings: total.abs / (4.0 * PI),
        excluded_solid_angle: total.excluded,
        excluded_triangles: total.excluded_n,
        quality: (signed - signed.round()).abs(),
        compactification_spread: spread,
    })
}

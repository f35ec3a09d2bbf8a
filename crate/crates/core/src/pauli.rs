use nalgebra::{Matrix2, Vector2};

use crate::C64;

pub type Mat2 = Matrix2<C64>;
pub type Spinor2 = Vector2<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}
pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}
pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `a0 I + ax σx + ay σy + az σz`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PauliCoeffs {
    pub a0: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl PauliCoeffs {
    pub fn new(a0: f64, ax: f64, ay: f64, az: f64) -> Self {
        Self { a0, ax, ay, az }
    }

    pub fn vector_norm(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.ax.is_finite() && self.ay.is_finite() && self.az.is_finite()
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            C64::new(self.a0 + self.az, 0.0),
            C64::new(self.ax, -self.ay),
            C64::new(self.ax, self.ay),
            C64::new(self.a0 - self.az, 0.0),
        )
    }
}

/// `exp(-iθ(a0 + a·σ))` in closed form.
pub fn pauli_exponential(c: PauliCoeffs, theta: f64) -> Mat2 {
    let r = c.vector_norm();
    let phase = C64::from_polar(1.0, -theta * c.a0);
    if r == 0.0 {
        return Mat2::identity() * phase;
    }
    let (s, co) = (theta * r).sin_cos();
    let s = s / r;
    // cos - i sin (a·σ)/|a|
    let m00 = C64::new(co, -s * c.az);
    let m11 = C64::new(co, s * c.az);
    let m01 = C64::new(-s * c.ay, -s * c.ax);
    let m10 = C64::new(s * c.ay, -s * c.ax);
    Mat2::new(m00, m01, m10, m11) * phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn taylor(m: &Mat2, theta: f64, terms: usize) -> Mat2 {
        let a = m * C64::new(0.0, -theta);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..terms {
            term = term * a / C64::new(k as f64, 0.0);
            sum += term;
        }
        sum
    }

    #[test]
    fn identity_and_quarter_turn() {
        assert_eq!(pauli_exponential(PauliCoeffs::default(), 3.0), Mat2::identity());
        let u = pauli_exponential(PauliCoeffs::new(0.0, 1.0, 0.0, 0.0), FRAC_PI_2);
        assert!((u - sigma_x() * C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_series() {
        let c = PauliCoeffs::new(0.3, -0.7, 0.2, 0.5);
        let u = pauli_exponential(c, 0.9);
        assert!((u - taylor(&c.matrix(), 0.9, 30)).norm() < 1e-13);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
        assert!((x * y - z * I).norm() < 1e-15);
        assert!((x * x - Mat2::identity()).norm() < 1e-15);
    }
}

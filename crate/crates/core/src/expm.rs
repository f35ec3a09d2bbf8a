use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::C64;

pub type Mat4 = Matrix4<C64>;

const HERMITIAN_TOL: f64 = 1e-12;

fn check_hermitian(h: &DMatrix<C64>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Validation("matrix is not square".into()));
    }
    let dev = (h - h.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let scale = h.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::Validation(format!("matrix is not Hermitian (deviation {dev:.2e})")));
    }
    Ok(())
}

/// `exp(-iθH)` for Hermitian `H` of any size via eigendecomposition.
pub fn hermitian_exponential(h: &DMatrix<C64>, theta: f64) -> Result<DMatrix<C64>> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -theta * l));
    let mut vd = v.clone();
    for (j, ph) in phases.iter().enumerate() {
        let mut col = vd.column_mut(j);
        col *= *ph;
    }
    Ok(vd * v.adjoint())
}

/// `exp(-iθH)` for a 4×4 Hermitian `H`.
pub fn matrix_exponential_4(h: &Mat4, theta: f64) -> Result<Mat4> {
    let d = DMatrix::from_iterator(4, 4, h.iter().copied());
    let u = hermitian_exponential(&d, theta)?;
    Ok(Mat4::from_iterator(u.iter().copied()))
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

use crate::error::{Error, Result};

pub const HERMITE_MAX_ORDER: usize = 200;

/// `φ_0 … φ_n` at `x`, normalised oscillator eigenfunctions, by the
/// recurrence `φ_{k+1} = √(2/(k+1)) x φ_k − √(k/(k+1)) φ_{k−1}`.
pub fn hermite_functions(n: usize, x: f64) -> Result<Vec<f64>> {
    if n > HERMITE_MAX_ORDER {
        return Err(Error::Domain(format!("Hermite order {n} exceeds {HERMITE_MAX_ORDER}")));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    Ok(out)
}

pub fn hermite_function(n: usize, x: f64) -> Result<f64> {
    Ok(hermite_functions(n, x)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_and_parity() {
        let x: f64 = 0.7;
        let want = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
        assert!((hermite_function(0, x).unwrap() - want).abs() < 1e-15);
        assert_eq!(hermite_function(3, 0.0).unwrap(), 0.0);
        // φ_2 = (2x² − 1) φ_0 / √2
        let want2 = (2.0 * x * x - 1.0) / 2f64.sqrt() * want;
        assert!((hermite_function(2, x).unwrap() - want2).abs() < 1e-15);
        assert!(hermite_function(201, 0.0).is_err());
    }
}

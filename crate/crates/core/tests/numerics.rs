//! FFT conventions, matrix exponentials and Strang convergence, checked
//! against dense-matrix oracles built here from scratch.

use std::f64::consts::PI;

use diracsim_core::dirac::{dirac_kinetic_phase_1p1, SimParams};
use diracsim_core::expm::{hermitian_exponential, matrix_exponential_4, Mat4};
use diracsim_core::field::Fourier;
use diracsim_core::pauli::{pauli_exponential, PauliCoeffs};
use diracsim_core::split::{PotentialPhase, StrangPropagator};
use diracsim_core::{Grid1D, Representation, SpinorField1D, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Plain O(n²) transform with the library's physical scaling.
fn naive_forward(grid: &Grid1D, psi: &[C64]) -> Vec<C64> {
    let s = grid.dx() / (2.0 * PI).sqrt();
    (0..grid.n_points())
        .map(|k| {
            let p = grid.p(k);
            psi.iter().enumerate().map(|(j, v)| v * C64::from_polar(s, -p * grid.x(j))).sum()
        })
        .collect()
}

/// Scaling-and-squaring Taylor exponential `exp(−iθH)`.
fn taylor_expm(h: &DMatrix<C64>, theta: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let norm: f64 = h.iter().map(|z| z.norm()).sum::<f64>().max(1e-300) * theta.abs();
    let s = (norm.log2().ceil().max(0.0) as i32) + 4;
    let a = h * c(0.0, -theta / 2f64.powi(s));
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn random_field(n: usize, seed: &[f64]) -> Vec<C64> {
    (0..n).map(|j| c(seed[j % seed.len()] * (j as f64 * 0.37).sin(), seed[(j + 1) % seed.len()] * (j as f64 * 0.11).cos())).collect()
}

#[test]
fn fourier_matches_naive_sum() {
    let g = Grid1D::new(64, -7.0, 9.0).unwrap();
    let psi = random_field(64, &[0.3, -1.2, 0.8, 2.0]);
    let mut fast = psi.clone();
    Fourier::new(&g).forward(&mut fast);
    let slow = naive_forward(&g, &psi);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}

proptest! {
    #[test]
    fn fourier_round_trip(exp in 3u32..9, x_min in -50.0f64..0.0, len in 1.0f64..80.0,
                          seed in prop::collection::vec(-3.0f64..3.0, 4)) {
        let n = 1usize << exp;
        let g = Grid1D::new(n, x_min, x_min + len).unwrap();
        let f = SpinorField1D::from_components(g, Representation::Position,
            [random_field(n, &seed), random_field(n, &[seed[1], seed[3], seed[0]])]).unwrap();
        let k = f.to_momentum().unwrap();
        prop_assert!((k.norm_sqr() - f.norm_sqr()).abs() <= 1e-12 * f.norm_sqr().max(1e-300));
        let back = k.to_position().unwrap();
        prop_assert!(back.l2_distance(&f).unwrap() <= 1e-12 * f.norm().max(1e-300));
    }

    #[test]
    fn pauli_exponential_is_unitary_and_exact(a0 in -5.0f64..5.0, ax in -5.0f64..5.0, ay in -5.0f64..5.0,
                                               az in -5.0f64..5.0, theta in -3.0f64..3.0) {
        let h = PauliCoeffs::new(a0, ax, ay, az);
        let u = pauli_exponential(h, theta);
        let err = (u.adjoint() * u - nalgebra::Matrix2::<C64>::identity()).norm();
        prop_assert!(err < 1e-12);
        let dense = DMatrix::from_iterator(2, 2, h.matrix().iter().copied());
        let oracle = taylor_expm(&dense, theta);
        for r in 0..2 {
            for col in 0..2 {
                prop_assert!((u[(r, col)] - oracle[(r, col)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn hermitian_exponential_matches_taylor(entries in prop::collection::vec(-2.0f64..2.0, 36), theta in -2.0f64..2.0) {
        let raw = DMatrix::from_fn(6, 6, |r, k| c(entries[r * 6 + k], entries[k * 6 + r] * 0.5));
        let h = (&raw + raw.adjoint()) * c(0.5, 0.0);
        let u = hermitian_exponential(&h, theta).unwrap();
        let oracle = taylor_expm(&h, theta);
        prop_assert!((&u - &oracle).norm() < 1e-9);
        prop_assert!((u.adjoint() * &u - DMatrix::<C64>::identity(6, 6)).norm() < 1e-11);
    }
}

#[test]
fn four_by_four_exponential_group_law() {
    let h = Mat4::from_fn(|r, k| if r == k { c(r as f64 - 1.5, 0.0) } else { c(0.3 * (r + k) as f64, 0.1 * (r as f64 - k as f64)) });
    let u1 = matrix_exponential_4(&h, 0.4).unwrap();
    let u2 = matrix_exponential_4(&h, 0.8).unwrap();
    assert!((u1 * u1 - u2).norm() < 1e-12);
    let not_hermitian = Mat4::from_fn(|r, k| c((r * 4 + k) as f64, 0.0));
    assert!(matrix_exponential_4(&not_hermitian, 1.0).is_err());
}

/// Dense `H = U†KU + V` for the 1+1 Dirac operator in a scalar potential,
/// with the unitary DFT written out explicitly.
fn dense_dirac(g: &Grid1D, p: &SimParams, v: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let n = g.n_points();
    let u = DMatrix::from_fn(n, n, |k, j| C64::from_polar(1.0 / (n as f64).sqrt(), -g.p(k) * g.x(j)));
    let mut kin = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        let hk = p.hamiltonian_1p1(g.p(k)).matrix();
        for a in 0..2 {
            for b in 0..2 {
                kin[(a * n + k, b * n + k)] = hk[(a, b)];
            }
        }
    }
    let mut big_u = DMatrix::<C64>::zeros(2 * n, 2 * n);
    big_u.view_mut((0, 0), (n, n)).copy_from(&u);
    big_u.view_mut((n, n), (n, n)).copy_from(&u);
    let mut h = big_u.adjoint() * kin * &big_u;
    for a in 0..2 {
        for j in 0..n {
            h[(a * n + j, a * n + j)] += c(v(g.x(j)), 0.0);
        }
    }
    h
}

#[test]
fn strang_is_second_order() {
    let g = Grid1D::new(64, -8.0, 8.0).unwrap();
    let p = SimParams::new(1.0, 0.7).unwrap();
    let v = |x: f64| 0.3 * x * x;
    let psi0 = {
        let mut f = SpinorField1D::gaussian(g, 0.5, 1.0, 0.8, [c(1.0, 0.0), c(0.0, 0.5)]);
        f.normalize();
        f
    };
    let t = 1.0;
    let h = dense_dirac(&g, &p, v);
    let exact = taylor_expm(&h, t);
    let n = g.n_points();
    let v0 = nalgebra::DVector::from_fn(2 * n, |i, _| psi0.component(i / n)[i % n]);
    let ve = exact * v0;
    let mut errs = Vec::new();
    for steps in [20usize, 40, 80] {
        let dt = t / steps as f64;
        let prop = StrangPropagator::new(g, dirac_kinetic_phase_1p1(&g, &p, dt), PotentialPhase::scalar_half_step(&g, v, dt)).unwrap();
        let mut f = psi0.clone();
        prop.evolve_in_place(&mut f, steps).unwrap();
        let err: f64 = (0..2 * n).map(|i| (f.component(i / n)[i % n] - ve[i]).norm_sqr()).sum::<f64>().sqrt()
            * g.dx().sqrt();
        errs.push(err);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order:.3} from {errs:?}");
    }
}

#[test]
fn single_steps_match_fused_steps() {
    let g = Grid1D::new(128, -20.0, 20.0).unwrap();
    let p = SimParams::new(1.0, 0.5).unwrap();
    let dt = 0.01;
    let prop = StrangPropagator::new(g, dirac_kinetic_phase_1p1(&g, &p, dt), PotentialPhase::scalar_half_step(&g, |x| 0.1 * x, dt)).unwrap();
    let psi0 = SpinorField1D::gaussian(g, -3.0, 1.5, 1.0, [c(1.0, 0.0), c(0.0, 0.0)]);
    let mut a = psi0.clone();
    for _ in 0..50 {
        prop.step_in_place(&mut a).unwrap();
    }
    let mut b = psi0.clone();
    prop.evolve_in_place(&mut b, 50).unwrap();
    assert!(a.l2_distance(&b).unwrap() < 1e-12);
    let mut back = b.clone();
    prop.inverse().evolve_in_place(&mut back, 50).unwrap();
    assert!(back.l2_distance(&psi0).unwrap() < 1e-11);
}

#[test]
fn parallel_and_sequential_paths_agree_bitwise() {
    use diracsim_core::landau::*;
    use diracsim_core::Execution;

    let p = JCParams::new(1.0, 4.0, 16).unwrap();
    let v = landau_fock_state(2, Branch::Negative, &p, LandauConvention::JaynesCummings).unwrap();
    let rho = SpinOscillatorState::pure(&v, p.n_max).unwrap();
    let grid = PhaseSpaceGrid::square(8.0, 64);
    let wp = wigner_from_density_with(&rho, &grid, Execution::Parallel);
    let ws = wigner_from_density_with(&rho, &grid, Execution::Sequential);
    assert_eq!(wp, ws);
    let s = pseudospin_field(&wp, Threshold::Relative(1e-250));
    let rp = winding_number_with(&s, Execution::Parallel).unwrap();
    let rs = winding_number_with(&s, Execution::Sequential).unwrap();
    assert_eq!(rp, rs);

    let g = Grid1D::centered(128, 0.0, 20.0).unwrap();
    let psi = SpinorField1D::gaussian(g, 0.0, 2.0, 0.5, [c(1.0, 0.0), c(0.0, 1.0)]);
    assert_eq!(wigner_spinor_with(&psi, Execution::Parallel).unwrap(), wigner_spinor_with(&psi, Execution::Sequential).unwrap());
}

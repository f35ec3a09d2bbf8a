use std::f64::consts::PI;

use diracsim_core::expm::hermitian_eigenvalues;
use diracsim_core::landau::*;
use diracsim_core::{Grid1D, C64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn hermite_poly(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        2 => 4.0 * x * x - 2.0,
        3 => 8.0 * x.powi(3) - 12.0 * x,
        4 => 16.0 * x.powi(4) - 48.0 * x * x + 12.0,
        5 => 32.0 * x.powi(5) - 160.0 * x.powi(3) + 120.0 * x,
        _ => unreachable!(),
    }
}

fn explicit_phi(n: usize, x: f64) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    hermite_poly(n, x) * (-x * x / 2.0).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt()
}

/// `(1/2π) ∫ φ_m(x+s/2) φ_n(x−s/2) e^{−isp} ds` by the trapezoid rule.
fn wigner_quadrature(m: usize, n: usize, x: f64, p: f64) -> C64 {
    let (lo, hi, k) = (-24.0, 24.0, 6000);
    let h = (hi - lo) / k as f64;
    (0..=k)
        .map(|i| {
            let s = lo + i as f64 * h;
            let w = if i == 0 || i == k { 0.5 } else { 1.0 };
            C64::from_polar(w * explicit_phi(m, x + s / 2.0) * explicit_phi(n, x - s / 2.0), -s * p)
        })
        .sum::<C64>()
        * (h / (2.0 * PI))
}

#[test]
fn landau_spectrum_matches_closed_form() {
    for (cc, m) in [(1.0, 0.5), (1.0, 4.0), (2.0, 0.0), (0.7, 1.3)] {
        let p = JCParams::new(cc, m, 64).unwrap();
        for conv in [LandauConvention::JaynesCummings, LandauConvention::DiracMatrix] {
            let h = jc_hamiltonian(&p, conv);
            let spectrum = hermitian_eigenvalues(&h).unwrap();
            for n in 0..=8usize {
                for branch in [Branch::Positive, Branch::Negative] {
                    let want = if n == 0 {
                        -m * cc * cc
                    } else {
                        branch.sign() * cc * (m * m * cc * cc + 2.0 * n as f64).sqrt()
                    };
                    let e = landau_energy(n as i64, branch, &p).unwrap();
                    assert!((e - want).abs() < 1e-12);
                    let nearest = spectrum.iter().map(|s| (s - want).abs()).fold(f64::INFINITY, f64::min);
                    assert!(nearest < 1e-10, "level {n} {branch:?}: closest eigenvalue off by {nearest:e}");
                    let v = landau_fock_state(n, branch, &p, conv).unwrap();
                    let resid = (&h * &v - &v * c(want, 0.0)).norm();
                    assert!(resid < 1e-8, "residual {resid:e}");
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn truncation_is_reported() {
    let p = JCParams::new(1.0, 1.0, 8).unwrap();
    assert!(landau_fock_state(5, Branch::Positive, &p, LandauConvention::JaynesCummings).is_err());
    assert!(landau_energy(-1, Branch::Positive, &p).is_err());
}

#[test]
fn hermite_functions_match_explicit_polynomials() {
    for &x in &[-3.1, -0.4, 0.0, 0.9, 2.5] {
        let all = hermite_functions(5, x).unwrap();
        for n in 0..=5 {
            assert!((all[n] - explicit_phi(n, x)).abs() < 1e-14, "n={n} x={x}");
        }
    }
    assert!(hermite_functions(HERMITE_MAX_ORDER + 1, 0.0).is_err());
}

#[test]
fn fock_kernel_matches_quadrature() {
    let pts = [(0.0, 0.0), (0.3, -0.7), (-1.2, 0.5), (1.5, 1.1)];
    for m in 0..=4 {
        for n in 0..=4 {
            for &(x, p) in &pts {
                let k = fock_wigner_kernel(m, n, x, p);
                let q = wigner_quadrature(m, n, x, p);
                assert!((k - q).norm() < 1e-10, "W_{m}{n}({x},{p}): {k} vs {q}");
            }
        }
    }
    assert!((fock_wigner_kernel(1, 1, 0.0, 0.0).re + 1.0 / PI).abs() < 1e-14);
}

#[test]
fn grid_wigner_matches_analytic_kernel() {
    let p = JCParams::new(1.0, 1.0, 8).unwrap();
    let conv = LandauConvention::JaynesCummings;
    let g = Grid1D::centered(256, 0.0, 12.0).unwrap();
    let psi = landau_eigenstate(2, Branch::Negative, &p, conv, &g).unwrap();
    let v = landau_fock_state(2, Branch::Negative, &p, conv).unwrap();
    let w = wigner_spinor(&psi).unwrap();
    assert!(!w.support_warning);
    assert!((w.trace_integral() - 1.0).abs() < 1e-9);
    assert!(w.max_hermiticity_error() < 1e-15);
    let mut worst = 0.0f64;
    for i in (0..w.grid.x.n).step_by(7) {
        for j in (0..w.grid.p.n).step_by(5) {
            let (x, pp) = (w.grid.x.at(i), w.grid.p.at(j));
            if x.abs() > 6.0 || pp.abs() > 6.0 {
                continue;
            }
            let mut want = [c(0.0, 0.0); 4];
            for a in 0..2 {
                for b in 0..2 {
                    for mm in 0..=p.n_max {
                        for nn in 0..=p.n_max {
                            let r = v[p.index(a, mm)] * v[p.index(b, nn)].conj();
                            if r.norm() > 0.0 {
                                want[2 * a + b] += r * fock_wigner_kernel(mm, nn, x, pp);
                            }
                        }
                    }
                }
            }
            let got = w.at(i, j);
            for k in 0..4 {
                worst = worst.max((got[(k / 2, k % 2)] - want[k]).norm());
            }
        }
    }
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

fn random_state(n_max: usize, raw: &[f64]) -> SpinOscillatorState {
    let d = 2 * (n_max + 1);
    let v = DVector::from_fn(d, |i, _| c(raw[(2 * i) % raw.len()], raw[(2 * i + 1) % raw.len()] * (i as f64).cos()));
    let v = &v / c(v.norm(), 0.0);
    SpinOscillatorState::pure(&v, n_max).unwrap()
}

fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(rho).unwrap()[0]
}

proptest! {
    #[test]
    fn channels_are_trace_preserving_and_positive(raw in prop::collection::vec(-1.0f64..1.0, 10),
                                                  p_damp in 0.0f64..=1.0, gt in 0.0f64..5.0) {
        let s = random_state(4, &raw);
        for out in [amplitude_damping(&s, p_damp).unwrap(), dephasing_channel(&s, gt).unwrap()] {
            prop_assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-12);
            prop_assert!((out.matrix() - out.matrix().adjoint()).norm() < 1e-13);
            prop_assert!(min_eigenvalue(out.matrix()) > -1e-12);
        }
    }

    #[test]
    fn damping_composes(raw in prop::collection::vec(-1.0f64..1.0, 6), p1 in 0.0f64..1.0, p2 in 0.0f64..1.0) {
        let s = random_state(3, &raw);
        let twice = amplitude_damping(&amplitude_damping(&s, p1).unwrap(), p2).unwrap();
        let once = amplitude_damping(&s, 1.0 - (1.0 - p1) * (1.0 - p2)).unwrap();
        prop_assert!((twice.matrix() - once.matrix()).norm() < 1e-12);
        let d2 = dephasing_channel(&dephasing_channel(&s, p1).unwrap(), p2).unwrap();
        let d1 = dephasing_channel(&s, p1 + p2).unwrap();
        prop_assert!((d2.matrix() - d1.matrix()).norm() < 1e-12);
    }

    #[test]
    fn synthetic_hedgehogs_have_their_degree(k in 1i32..5, twist in 0.0f64..6.3, flip in any::<bool>()) {
        let field = hedgehog(k, twist, if flip { -1.0 } else { 1.0 });
        let r = winding_number(&field).unwrap();
        prop_assert!((r.coverings - k as f64).abs() < 0.02, "{}", r);
        prop_assert!((r.signed.abs() - k as f64).abs() < 0.02);
        prop_assert_eq!(r.excluded_triangles, 0);
    }
}

/// `Θ(r) = π e^{−r²/8}` polar profile with azimuth `kφ + twist`.
fn hedgehog(k: i32, twist: f64, orient: f64) -> PseudospinField {
    let grid = PhaseSpaceGrid::square(8.0, 96);
    let (mut theta, mut phi) = (Vec::new(), Vec::new());
    for i in 0..grid.x.n {
        for j in 0..grid.p.n {
            let (x, p) = (grid.x.at(i), grid.p.at(j));
            theta.push(PI * (-(x * x + p * p) / 8.0).exp());
            phi.push(k as f64 * (orient * p).atan2(x) + twist);
        }
    }
    let n = theta.len();
    PseudospinField { grid, theta, phi, magnitude: vec![1.0; n], valid: vec![true; n], cutoff: 0.0 }
}

#[test]
fn trivial_texture_has_no_charge() {
    let mut f = hedgehog(1, 0.0, 1.0);
    for t in f.theta.iter_mut() {
        *t *= 0.4;
    }
    let r = winding_number(&f).unwrap();
    assert!(r.signed.abs() < 1e-10, "{r}");
}

#[test]
fn open_boundary_is_rejected() {
    let mut f = hedgehog(1, 0.0, 1.0);
    for t in f.theta.iter_mut() {
        *t = PI / 2.0;
    }
    assert!(winding_number(&f).is_err());
}

fn level_report(level: usize, p_damp: f64, gamma_t: f64) -> (WindingReport, PseudospinField) {
    let p = JCParams::new(1.0, 4.0, 16).unwrap();
    let v = landau_fock_state(level, Branch::Negative, &p, LandauConvention::JaynesCummings).unwrap();
    let mut rho = SpinOscillatorState::pure(&v, p.n_max).unwrap();
    rho = amplitude_damping(&rho, p_damp).unwrap();
    rho = dephasing_channel(&rho, gamma_t).unwrap();
    let w = wigner_from_density(&rho, &PhaseSpaceGrid::square(8.0, 128));
    let s = pseudospin_field(&w, Threshold::Relative(1e-250));
    (winding_number(&s).unwrap(), s)
}

#[test]
fn coverings_grow_with_the_level() {
    for level in 1..=3 {
        let (r, s) = level_report(level, 0.0, 0.0);
        assert!((r.coverings - level as f64).abs() < 0.05, "level {level}: {r}");
        assert!(r.compactification_spread < COMPACTIFICATION_TOLERANCE);
        assert_eq!(s.valid_count(), s.len());
    }
}

#[test]
fn dephasing_leaves_the_azimuth_alone() {
    let (r0, s0) = level_report(2, 0.0, 0.0);
    for gt in [0.5, 1.0, 2.0] {
        let mapped = dephasing_map(&s0, gt);
        assert_eq!(mapped.phi, s0.phi);
        let r = winding_number(&mapped).unwrap();
        assert!((r.coverings - r0.coverings).abs() < 0.05, "γt={gt}: {r}");
        let (rc, sc) = level_report(2, 0.0, gt);
        assert!((rc.coverings - r0.coverings).abs() < 0.05, "channel γt={gt}: {rc}");
        for (a, b) in sc.phi.iter().zip(&s0.phi) {
            assert!((a - b).abs() < 1e-9 || ((a - b).abs() - 2.0 * PI).abs() < 1e-9);
        }
    }
}

#[test]
fn weak_damping_keeps_the_defects() {
    let (r0, _) = level_report(2, 0.0, 0.0);
    for p in [0.1, 0.25, 0.5] {
        let (r, _) = level_report(2, p, 0.0);
        assert!((r.coverings - r0.coverings).abs() < 0.05, "p_damp={p}: {r}");
    }
}

//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are implemented as stated and currently
//! fail; they are printed as FAIL but do not fail the test binary. Any other
//! failure does.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use diracsim_cli::{parse_config, run_experiment, Experiment, Manifest};
use diracsim_core::bag::{count_local_maxima, run_bag_cases, BagCase, BagFigureSpec, BagRun};
use diracsim_core::dirac::{dirac_hamiltonian_3p1, run_zitterbewegung, SimParams, ZbSpec};
use diracsim_core::expm::hermitian_eigenvalues;
use diracsim_core::ion::{
    alpha_from_ion, bag_block_from_terms, bag_target_terms, build_ion_hamiltonian, dirac3p1_matrix,
    dirac3p1_target_terms, ion_from_sim, klein2p1_target_terms, reduce_to_simulation, sim_from_ion,
    simulation_target, term_table_mismatch, v0_from_ion, validity_check, FixedHardware, HamiltonianKind, IonParams,
};
use diracsim_core::bag::{bag_spin_kinetic_block, BagParams};
use diracsim_core::klein::{
    evolve_klein_2p1_decomposed_with, evolve_klein_2p1_direct, reconstruct_position_space, Frame, KleinOptions,
    KleinParams, SpinorField2D, SpinorSlices2D,
};
use diracsim_core::landau::{
    amplitude_damping, dephasing_map, jc_hamiltonian, landau_energy, landau_fock_state, pseudospin_field,
    winding_number, wigner_from_density, Branch, JCParams, LandauConvention, PhaseSpaceGrid, PseudospinField,
    SpinOscillatorState, Threshold, WindingReport,
};
use diracsim_core::{Execution, Grid1D, C64};

const KNOWN_RED: &[u32] = &[11];

struct Ledger {
    unexpected: Vec<u32>,
    red: Vec<u32>,
}

impl Ledger {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("{} {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.red.push(id);
            if !KNOWN_RED.contains(&id) {
                self.unexpected.push(id);
            }
        } else if KNOWN_RED.contains(&id) {
            println!("     note: criterion {id} is listed as known red but passed");
        }
    }
}

/// Conservation figures gathered from every dynamical run.
#[derive(Default)]
struct Conservation {
    rows: Vec<(String, f64, Option<f64>, Option<f64>)>,
}

impl Conservation {
    fn add(&mut self, label: &str, norm: f64, energy: Option<f64>, leak: Option<f64>) {
        self.rows.push((label.into(), norm, energy, leak));
    }
}

fn recipe(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)).unwrap()
}

fn run_recipe(e: Experiment, file: &str, out: &Path) -> Manifest {
    let cfg = parse_config(e, &recipe(file), &[]).unwrap();
    run_experiment(&cfg, out).unwrap()
}

fn scalar(m: &Manifest, key: &str) -> f64 {
    m.get_f64(key).unwrap_or(f64::NAN)
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn zitterbewegung(l: &mut Ledger, cons: &mut Conservation) {
    let spec = ZbSpec::default();
    let sigma_p = 1.0 / (2.0 * spec.sigma_x);
    let start = Instant::now();
    let run = run_zitterbewegung(&spec).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let want_w = 2.0 * spec.params.m * spec.params.c.powi(2);
    let w = run.measured.frequency;
    let rel_w = (w - want_w).abs() / want_w;
    l.record(
        1,
        "Zitterbewegung frequency",
        sigma_p <= 0.05 && spec.n_points == 1024 && rel_w < 0.02 && secs < 5.0,
        format!("omega = {w:.5}, expected {want_w} (rel err {rel_w:.2e}, tol 2%), sigma_p = {sigma_p}, {secs:.2} s (< 5 s)"),
    );
    let r = run.measured.amplitude;
    let want_r = run.predicted_amplitude;
    let rel_r = (r - want_r).abs() / want_r;
    l.record(
        2,
        "Zitterbewegung amplitude",
        rel_r < 0.15,
        format!("R = {r:.4}, expected {want_r} (rel err {rel_r:.3}, tol 15%)"),
    );
    cons.add("zitterbewegung", run.max_norm_drift(), None, None);
}

fn klein_1d(l: &mut Ledger, cons: &mut Conservation, out: &Path) -> Manifest {
    let start = Instant::now();
    let m = run_recipe(Experiment::Klein1d, "klein1d.toml", out);
    let secs = start.elapsed().as_secs_f64();
    let rows = read_csv(&out.join("transmission.csv"));
    let mut ok = rows.len() == 4 && secs < 60.0;
    let mut parts = Vec::new();
    for (row, target) in rows.iter().zip([0.1, 0.25, 0.456, 0.7]) {
        let (t, f) = (num(row, "T_measured"), num(row, "T_formula"));
        let rel = (t - f).abs() / f;
        ok &= rel < 0.1 && (f - target).abs() < 1e-3;
        parts.push(format!("T {t:.4} vs {f:.4} ({:.1}%)", 100.0 * rel));
    }
    l.record(
        3,
        "Klein 1+1 transmission law",
        ok,
        format!("{} on 2048 points, tol 10%, {secs:.1} s (< 60 s)", parts.join("; ")),
    );
    cons.add(
        "klein1d sweep",
        scalar(&m, "max_norm_drift"),
        Some(scalar(&m, "max_energy_drift")),
        Some(scalar(&m, "max_leak")),
    );
    m
}

fn klein_2d(l: &mut Ledger, cons: &mut Conservation, out: &Path) {
    let m = run_recipe(Experiment::Klein2d, "klein2d.toml", out);
    let (t0, t1) = (scalar(&m, "transmission_py0"), scalar(&m, "transmission_py1"));
    let expected = (-std::f64::consts::PI * 0.25).exp();
    let rel = (t0 - expected).abs() / expected;
    l.record(
        4,
        "Klein 2+1 suppression",
        t1 < 0.05 && rel < 0.1,
        format!("T(p_y=1) = {t1:.4} (< 0.05), T(p_y=0) = {t0:.4} vs {expected:.4} (rel err {rel:.3}, tol 10%)"),
    );
    let ratio = scalar(&m, "lobe_width_ratio");
    l.record(
        6,
        "Lobe morphology",
        ratio < 0.8,
        format!("transmitted/reflected x-width at t = 100: {ratio:.3} (< 0.8)"),
    );
    cons.add(
        "klein2d recipe",
        scalar(&m, "max_norm_drift"),
        Some(scalar(&m, "max_energy_drift")),
        Some(scalar(&m, "max_leak")),
    );
}

fn decomposition(l: &mut Ledger) {
    let gx = Grid1D::centered(128, 0.0, 48.0).unwrap();
    let gy = Grid1D::centered(128, 0.0, 48.0).unwrap();
    let kp = KleinParams::new(SimParams::new(1.0, 0.5).unwrap(), 0.2, 0.0).unwrap();
    let mut psi0 = SpinorField2D::from_fn(gx, gy, |x, y| {
        let env = (-(x + 8.0).powi(2) / 36.0 - y * y / 36.0).exp();
        let ph = C64::from_polar(env, x + 0.5 * y);
        [ph, ph * C64::new(0.0, 0.4)]
    });
    psi0.normalize();
    let slices = SpinorSlices2D::from_position_space(&psi0).unwrap();
    let opts = KleinOptions { frame: Frame::Lab, ..Default::default() };
    let run = evolve_klein_2p1_decomposed_with(&slices, &kp, 1e-3, 10.0, &opts, Execution::default()).unwrap();
    let decomposed = reconstruct_position_space(&run.final_state).unwrap();
    let direct = evolve_klein_2p1_direct(&psi0, &kp, 1e-3, 10.0).unwrap();
    let d = decomposed.l2_distance(&direct).unwrap();
    l.record(5, "Decomposition oracle", d < 1e-6, format!("L2(decomposed, direct) = {d:.3e} on 128x128 at t = 10 (< 1e-6)"));
}

fn landau_spectrum(l: &mut Ledger) {
    let p = JCParams::new(1.0, 0.5, 64).unwrap();
    let h = jc_hamiltonian(&p, LandauConvention::JaynesCummings);
    let spectrum = hermitian_eigenvalues(&h).unwrap();
    let (mut eig_err, mut residual) = (0.0f64, 0.0f64);
    for n in 0..=8usize {
        for branch in [Branch::Positive, Branch::Negative] {
            if n == 0 && branch == Branch::Positive {
                continue;
            }
            let mc2 = p.m * p.c * p.c;
            let want = if n == 0 {
                -mc2
            } else {
                branch.sign() * p.c * (p.m * p.m * p.c * p.c + 2.0 * n as f64).sqrt()
            };
            let closest = spectrum.iter().map(|e| (e - want).abs()).fold(f64::INFINITY, f64::min);
            eig_err = eig_err.max(closest);
            let formula = landau_energy(n as i64, branch, &p).unwrap();
            eig_err = eig_err.max((formula - want).abs());
            let v = landau_fock_state(n, branch, &p, LandauConvention::JaynesCummings).unwrap();
            residual = residual.max((&h * &v - v.map(|z| z * want)).norm());
        }
    }
    l.record(
        7,
        "Landau spectrum",
        eig_err < 1e-10 && residual < 1e-8,
        format!("max |E - formula| = {eig_err:.2e} (< 1e-10), max residual = {residual:.2e} (< 1e-8), n <= 8, n_max = 64"),
    );
}

fn texture(rho: &SpinOscillatorState) -> PseudospinField {
    let w = wigner_from_density(rho, &PhaseSpaceGrid::square(8.0, 128));
    pseudospin_field(&w, Threshold::Relative(1e-250))
}

fn level_state(level: usize) -> SpinOscillatorState {
    let p = JCParams::new(1.0, 4.0, 16).unwrap();
    let v = landau_fock_state(level, Branch::Negative, &p, LandauConvention::JaynesCummings).unwrap();
    SpinOscillatorState::pure(&v, p.n_max).unwrap()
}

fn topology(l: &mut Ledger) {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut clean: Vec<(SpinOscillatorState, PseudospinField, WindingReport)> = Vec::new();
    for level in 1..=3 {
        let start = Instant::now();
        let rho = level_state(level);
        let s = texture(&rho);
        let r = winding_number(&s).unwrap();
        let secs = start.elapsed().as_secs_f64();
        ok &= (r.coverings - level as f64).abs() < 0.05 && secs < 30.0;
        parts.push(format!("level {level}: {:.4} ({secs:.2} s)", r.coverings));
        clean.push((rho, s, r));
    }
    l.record(8, "Topological charges", ok, format!("coverings {} on 128x128, tol 0.05, < 30 s each", parts.join(", ")));

    let mut ok = true;
    let mut worst = 0.0f64;
    for (_, s, r) in &clean {
        for gt in [0.5, 1.0, 2.0] {
            let d = dephasing_map(s, gt);
            let rd = winding_number(&d).unwrap();
            worst = worst.max((rd.coverings - r.coverings).abs());
            ok &= d.phi.iter().zip(&s.phi).all(|(a, b)| a.to_bits() == b.to_bits());
        }
    }
    l.record(
        9,
        "Dephasing invariance",
        ok && worst < 0.05,
        format!("max coverings change {worst:.2e} over gamma*t in {{0.5, 1, 2}} (tol 0.05), polar-angle field bit-identical: {ok}"),
    );

    let (rho, _, r0) = &clean[1];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for p in [0.1, 0.25, 0.5] {
        let r = winding_number(&texture(&amplitude_damping(rho, p).unwrap())).unwrap();
        worst = worst.max((r.coverings - r0.coverings).abs());
        parts.push(format!("p={p}: {:.4}", r.coverings));
    }
    l.record(
        10,
        "Amplitude damping",
        worst < 0.05,
        format!("two-quanta level {}; max change {worst:.2e} (tol 0.05)", parts.join(", ")),
    );
}

fn bag(l: &mut Ledger, cons: &mut Conservation) {
    let spec = BagFigureSpec::default();
    let start = Instant::now();
    let acd = run_bag_cases(&spec, &[BagCase::A, BagCase::C, BagCase::D], Execution::default()).unwrap();
    let short = BagFigureSpec { t_end: 10.0, ..spec.clone() };
    let b = short.run_case(BagCase::B).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (a, c, d) = (&acd[0], &acd[1], &acd[2]);

    let radius = spec.params.x_star() + 2.0 * spec.sigma;
    let min_inside = inside_fraction(a, radius).into_iter().fold(f64::INFINITY, f64::min);
    let (tc, td) = (c.snapshots.last().unwrap().tunneled, d.snapshots.last().unwrap().tunneled);
    let trace = b.density_trace().coarsened(60.0, 64);
    let peaks = trace
        .times
        .iter()
        .zip(&trace.rows)
        .filter(|(t, _)| **t > 5.0)
        .map(|(_, row)| count_local_maxima(row, 0.1))
        .max()
        .unwrap_or(0);
    let ok_a = min_inside >= 0.9;
    let ok_dc = td > tc;
    let ok_b = peaks >= 2;
    l.record(
        11,
        "Bag model orderings",
        ok_a && ok_dc && ok_b && secs < 120.0,
        format!(
            "(a) min P(|x_r| < {radius:.3}) = {min_inside:.3} (>= 0.9: {ok_a}); tunneled d = {td:.4} > c = {tc:.4}: {ok_dc}; \
             (b) max {peaks} maxima of the heatmap density for t in (5, 10] (>= 2: {ok_b}); {} points, {secs:.0} s (< 120 s)",
            spec.n_points
        ),
    );
    for (label, run) in [("bag a", a), ("bag b", &b), ("bag c", c), ("bag d", d)] {
        cons.add(label, run.relative_norm_drift(), Some(run.relative_energy_drift()), Some(run.max_leak));
    }
}

fn inside_fraction(run: &BagRun, radius: f64) -> Vec<f64> {
    let trace = run.density_trace();
    let dx = trace.x[1] - trace.x[0];
    trace
        .rows
        .iter()
        .map(|row| trace.x.iter().zip(row).filter(|(x, _)| x.abs() < radius).map(|(_, d)| d).sum::<f64>() * dx)
        .collect()
}

fn conservation(l: &mut Ledger, cons: &Conservation) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, norm, energy, leak) in &cons.rows {
        ok &= *norm < 1e-9 && energy.is_none_or(|e| e < 1e-4) && leak.is_none_or(|k| k < 1e-6);
        let e = energy.map_or("n/a".into(), |e| format!("{e:.1e}"));
        let k = leak.map_or("n/a".into(), |k| format!("{k:.1e}"));
        parts.push(format!("{label}: norm {norm:.1e}, H {e}, leak {k}"));
    }
    l.record(12, "Conservation suite", ok, format!("{} (tols 1e-9, 1e-4, 1e-6)", parts.join("; ")));
}

fn ion(l: &mut Ledger) {
    let fixed = FixedHardware { delta_3: Some(100.0), ..FixedHardware::new(0.05, 1.0) };
    let mut round_trip = 0.0f64;
    for (c, mc2, alpha, v0) in [(1.0, 1.0, 1.0, 0.5), (0.3, 2.5, 0.2, 0.01), (4.0, 0.1, 7.0, 3.0)] {
        let target = diracsim_core::ion::SimTarget {
            params: SimParams::new(c, mc2 / (c * c)).unwrap(),
            alpha: Some(alpha),
            v0: Some(v0),
        };
        let back = simulation_target(&ion_from_sim(&target, &fixed).unwrap()).unwrap();
        round_trip = round_trip
            .max((back.params.c - c).abs() / c)
            .max((back.params.rest_energy() - mc2).abs() / mc2)
            .max((back.alpha.unwrap() - alpha).abs() / alpha)
            .max((back.v0.unwrap() - v0).abs() / v0);
    }

    let ip = IonParams::new(1.0, 0.05, 1.0, 10.0, 1.0, 1.0).unwrap().with_klein_drive(20.0).with_dispersive_drive(141.42, 100.0);
    let sim = sim_from_ion(&ip).unwrap();
    let dirac = reduce_to_simulation(&build_ion_hamiltonian(HamiltonianKind::Dirac3p1, &ip).unwrap()).unwrap();
    let klein = reduce_to_simulation(&build_ion_hamiltonian(HamiltonianKind::Klein2p1, &ip).unwrap()).unwrap();
    let bagt = reduce_to_simulation(&build_ion_hamiltonian(HamiltonianKind::Bag, &ip).unwrap()).unwrap();
    let kp = KleinParams::new(sim, alpha_from_ion(&ip).unwrap(), 0.0).unwrap();
    let bp = BagParams::new(sim, v0_from_ion(&ip).unwrap(), 2.0).unwrap();
    let table = term_table_mismatch(&dirac, &dirac3p1_target_terms(&sim))
        .max(term_table_mismatch(&klein, &klein2p1_target_terms(&kp)))
        .max(term_table_mismatch(&bagt, &bag_target_terms(&bp)));
    let mut matrix = 0.0f64;
    for p in [[0.3, -1.0, 2.0], [1.5, 0.2, -0.7]] {
        matrix = matrix.max((dirac3p1_matrix(&dirac, p).unwrap() - dirac_hamiltonian_3p1(p, &sim)).norm());
    }
    for p_r in [0.0, 1.3, -2.0] {
        matrix = matrix.max((bag_block_from_terms(&bagt, p_r, 2.0).unwrap() - bag_spin_kinetic_block(p_r, &bp)).norm());
    }
    let lamb_dicke = validity_check(&IonParams::new(1.0, 0.05, 1.0, 10.0, 1.0, 1.0).unwrap(), 100).unwrap().lamb_dicke_ok;
    l.record(
        13,
        "Ion mapping",
        round_trip < 1e-12 && table < 1e-12 && matrix < 1e-12 && lamb_dicke,
        format!(
            "round trip {round_trip:.1e} (< 1e-12), term tables {table:.1e}, matrices {matrix:.1e}, eta = 0.05 Lamb-Dicke ok: {lamb_dicke}"
        ),
    );
}

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(l: &mut Ledger, root: &Path) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (e, file) in [
        (Experiment::Zitterbewegung, "zitterbewegung.toml"),
        (Experiment::Klein1d, "klein1d.toml"),
        (Experiment::Landau, "landau.toml"),
        (Experiment::IonMap, "ion_map.toml"),
    ] {
        let first = root.join(format!("{}_1", e.name()));
        let second = root.join(format!("{}_2", e.name()));
        if !first.exists() {
            run_recipe(e, file, &first);
        }
        run_recipe(e, file, &second);
        let (a, b) = (tree_bytes(&first), tree_bytes(&second));
        let same = a == b;
        ok &= same && Manifest::read(&first).unwrap().verify(&first).is_ok();
        parts.push(format!("{} ({} files) {}", e.name(), a.len(), if same { "identical" } else { "DIFFER" }));
    }
    l.record(14, "Determinism", ok, parts.join(", "));
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut l = Ledger { unexpected: Vec::new(), red: Vec::new() };
    let mut cons = Conservation::default();
    let start = Instant::now();

    zitterbewegung(&mut l, &mut cons);
    klein_1d(&mut l, &mut cons, &root.join("klein1d_1"));
    klein_2d(&mut l, &mut cons, &root.join("klein2d"));
    decomposition(&mut l);
    landau_spectrum(&mut l);
    topology(&mut l);
    bag(&mut l, &mut cons);
    conservation(&mut l, &cons);
    ion(&mut l);
    determinism(&mut l, root);

    println!(
        "acceptance: {} criteria, failing {:?} (known red {:?}), {:.0} s",
        14,
        l.red,
        KNOWN_RED,
        start.elapsed().as_secs_f64()
    );
    if !l.unexpected.is_empty() {
        eprintln!("unexpected failures: {:?}", l.unexpected);
        std::process::exit(1);
    }
}

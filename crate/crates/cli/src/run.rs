//! Experiment drivers: each turns a validated config into files plus a
//! manifest with headline scalars.

use std::path::Path;

use diracsim_core::bag::{count_local_maxima, run_bag_cases, BagRun};
use diracsim_core::dirac::{run_zitterbewegung, SimParams, ZbSpec};
use diracsim_core::ion::{
    build_ion_hamiltonian, reduce_to_simulation, simulation_target, validity_check, zb_ion_frequency,
    HamiltonianKind,
};
use diracsim_core::klein::{
    effective_mass, evolve_klein_1p1_with, evolve_klein_2p1_decomposed_with, figure_initial_state, klein_energy,
    lobe_py_distribution, lobe_stats, measure_transmission, positive_energy_packet, reconstruct_position_space,
    slice_transmissions, transmission_formula, KleinOptions, KleinParams, SpinorSlices2D, SplitSpec,
};
use diracsim_core::landau::{
    amplitude_damping, dephasing_map, landau_energy, landau_fock_state, pseudospin_field, winding_number,
    wigner_from_density, Branch, JCParams, PhaseSpaceGrid, PseudospinField, SpinOscillatorState, Threshold,
    WindingReport,
};
use diracsim_core::{Execution, Grid1D, Representation, SpinorField1D};

use crate::config::{
    BagConfig, ExperimentConfig, ExperimentParams, IonMapConfig, Klein1dConfig, Klein2dConfig, LandauConfig,
};
use crate::dump::{GridDump, Payload};
use crate::error::Result;
use crate::manifest::{ArtifactWriter, Manifest};

/// Runs `cfg`, writing everything (including `manifest.json` and a copy of
/// the merged config) under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    let manifest = Manifest::new(cfg.experiment.name(), cfg.sha256(), cfg.seed);
    let mut w = ArtifactWriter::new(out, manifest)?;
    w.write("config.toml", cfg.canonical.as_bytes())?;
    match &cfg.params {
        ExperimentParams::Zitterbewegung(spec) => zitterbewegung(spec, &mut w)?,
        ExperimentParams::Klein1d(k) => klein1d(k, &mut w)?,
        ExperimentParams::Klein2d(k) => klein2d(k, &mut w)?,
        ExperimentParams::Landau(l) => landau(l, &mut w)?,
        ExperimentParams::Bag(b) => bag(b, &mut w)?,
        ExperimentParams::IonMap(i) => ion_map(i, &mut w)?,
    }
    crate::plot::emit_plot_data(&mut w)?;
    w.finish()
}

/// Comma-separated text with a header row; fields containing commas or
/// quotes are quoted.
pub(crate) struct Csv(String);

impl Csv {
    pub(crate) fn new(header: &[&str]) -> Self {
        let mut c = Csv(String::new());
        c.row(header);
        c
    }

    pub(crate) fn row<T: Cell>(&mut self, fields: &[T]) {
        let cells: Vec<String> = fields.iter().map(|f| quote(&f.cell())).collect();
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }

    pub(crate) fn bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

pub(crate) trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        num(*self)
    }
}

impl Cell for &f64 {
    fn cell(&self) -> String {
        num(**self)
    }
}

impl Cell for String {
    fn cell(&self) -> String {
        self.clone()
    }
}

impl Cell for &str {
    fn cell(&self) -> String {
        self.to_string()
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

fn axis(g: &Grid1D) -> (f64, f64) {
    (g.x(0), g.x(g.n_points() - 1))
}

fn spinor_dump(f: &SpinorField1D) -> Result<GridDump> {
    let pos = if f.representation() == Representation::Position { f.clone() } else { f.to_position()? };
    let mut values = pos.component(0).to_vec();
    values.extend_from_slice(pos.component(1));
    GridDump::new(vec![f.grid().n_points()], vec![axis(f.grid())], 2, Payload::Complex(values))
}

fn zitterbewegung(spec: &ZbSpec, w: &mut ArtifactWriter) -> Result<()> {
    let run = run_zitterbewegung(spec)?;
    let mut csv = Csv::new(&["t", "mean_x", "norm"]);
    for ((t, x), n) in run.times.iter().zip(&run.mean_x).zip(&run.norms) {
        csv.row(&[t, x, n]);
    }
    w.write("trace.csv", csv.bytes())?;
    let m = &mut w.manifest;
    m.scalar("zb_frequency_measured", run.measured.frequency);
    m.scalar("zb_frequency_predicted", run.predicted_frequency);
    m.scalar("zb_amplitude_measured", run.measured.amplitude);
    m.scalar("zb_amplitude_predicted", run.predicted_amplitude);
    m.scalar("max_norm_drift", run.max_norm_drift());
    Ok(())
}

fn klein1d(k: &Klein1dConfig, w: &mut ArtifactWriter) -> Result<()> {
    let opts = KleinOptions { frame: k.frame, ..Default::default() };
    let results = diracsim_core::exec::try_map(Execution::default(), &k.m_tilde, |_, &m_tilde| {
        let base = SimParams::new(k.c, m_tilde)?;
        let center = KleinParams::turning_point(&base, k.alpha, k.x0, k.p0);
        let kp = KleinParams::new(base, k.alpha, center)?;
        let grid = Grid1D::centered(k.n_points, center, k.half_width)?;
        let em = effective_mass(0.0, &base);
        let psi0 = positive_energy_packet(grid, k.x0, k.sigma_x, k.p0, 0.0, &base)?;
        let energy = klein_energy(&psi0, &kp, &em)?;
        let run = evolve_klein_1p1_with(&psi0, &kp, &em, k.dt, k.t_end, &opts)?;
        let split = SplitSpec::from_energy(&kp, energy, k.sigma_x);
        let t = measure_transmission(&run.final_state, &split)?;
        Ok::<_, diracsim_core::Error>((m_tilde, t, transmission_formula(&em, &kp), run))
    })?;
    let mut csv = Csv::new(&["m_tilde", "T_measured", "T_formula", "energy_drift", "norm_drift", "max_leak"]);
    let (mut worst_err, mut worst_energy, mut worst_norm, mut worst_leak) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, (m_tilde, t, formula, run)) in results.iter().enumerate() {
        csv.row(&[m_tilde, t, formula, &run.relative_energy_drift(), &run.relative_norm_drift(), &run.max_leak]);
        w.write(&format!("final_{i}.bin"), &spinor_dump(&run.final_state)?.to_bytes())?;
        worst_err = worst_err.max((t - formula).abs() / formula);
        worst_energy = worst_energy.max(run.relative_energy_drift());
        worst_norm = worst_norm.max(run.relative_norm_drift());
        worst_leak = worst_leak.max(run.max_leak);
    }
    w.write("transmission.csv", csv.bytes())?;
    let m = &mut w.manifest;
    if let Some((_, t, formula, _)) = results.first() {
        m.scalar("transmission_measured", *t);
        m.scalar("transmission_formula", *formula);
    }
    m.scalar("max_relative_transmission_error", worst_err);
    m.scalar("max_energy_drift", worst_energy);
    m.scalar("max_norm_drift", worst_norm);
    m.scalar("max_leak", worst_leak);
    Ok(())
}

fn slices_dump(s: &SpinorSlices2D) -> Result<GridDump> {
    let rows = s.density_rows();
    let values: Vec<f64> = rows.concat();
    let n = s.slices().len();
    GridDump::real(
        vec![n, s.x_grid().n_points()],
        vec![(s.py(0), s.py(n - 1)), axis(s.x_grid())],
        values,
    )
}

fn klein2d(k: &Klein2dConfig, w: &mut ArtifactWriter) -> Result<()> {
    let (kp, psi0) = figure_initial_state(&k.packet)?;
    let t_end = k.snapshots.iter().copied().fold(0.0, f64::max);
    let opts = KleinOptions {
        frame: k.frame,
        snapshots: k.snapshots.iter().copied().filter(|&t| t > 0.0).collect(),
        ..Default::default()
    };
    let run = evolve_klein_2p1_decomposed_with(&psi0, &kp, k.dt, t_end, &opts, Execution::default())?;
    let state_at = |t: f64| -> &SpinorSlices2D {
        if t == 0.0 {
            return &psi0;
        }
        run.snapshots.iter().find(|(s, _)| *s == t).map_or(&run.final_state, |(_, s)| s)
    };

    let energies = run.slice_energies();
    let norms: f64 = run.slice_runs.iter().map(|d| d.norm_initial).sum();
    let energy_mean = run.slice_runs.iter().map(|d| d.energy_initial).sum::<f64>() / norms;
    let x_split = kp.center + energy_mean / kp.alpha;

    for &t in &k.snapshots {
        w.write(&format!("slices_t{}.bin", time_tag(t)), &slices_dump(state_at(t))?.to_bytes())?;
    }

    let mut lobes = Csv::new(&["t", "side", "probability", "mean_x", "width_x"]);
    let mut width_ratio = f64::NAN;
    for &t in &k.xy_snapshots {
        let field = reconstruct_position_space(state_at(t))?;
        let (gx, gy) = (*field.x_grid(), *field.y_grid());
        let dump =
            GridDump::real(vec![gx.n_points(), gy.n_points()], vec![axis(&gx), axis(&gy)], field.density())?;
        w.write(&format!("xy_t{}.bin", time_tag(t)), &dump.to_bytes())?;
        let (refl, trans) = lobe_stats(&field, x_split);
        lobes.row(&[num(t), "reflected".into(), num(refl.probability), num(refl.mean), num(refl.width)]);
        lobes.row(&[num(t), "transmitted".into(), num(trans.probability), num(trans.mean), num(trans.width)]);
        width_ratio = trans.width / refl.width;
    }
    if !k.xy_snapshots.is_empty() {
        w.write("lobes.csv", lobes.bytes())?;
    }

    let mut lobe_py = Csv::new(&["p_y", "reflected", "transmitted"]);
    for (py, r, t) in lobe_py_distribution(&run.final_state, x_split) {
        lobe_py.row(&[py, r, t]);
    }
    w.write("lobe_py.csv", lobe_py.bytes())?;

    let mut trans = Csv::new(&["p_y", "T_measured", "T_formula"]);
    let mut t_py0 = f64::NAN;
    let mut t_py1 = f64::NAN;
    for (py, measured, formula) in slice_transmissions(&run.final_state, &kp, &energies, k.packet.sigma_x) {
        let measured = measured?;
        trans.row(&[py, measured, formula]);
        if py.abs() < 1e-12 {
            t_py0 = measured;
        }
        if (py - 1.0).abs() < 1e-12 {
            t_py1 = measured;
        }
    }
    w.write("transmission.csv", trans.bytes())?;

    let m = &mut w.manifest;
    m.scalar("transmission_py0", t_py0);
    m.scalar("transmission_py1", t_py1);
    m.scalar("lobe_width_ratio", width_ratio);
    m.scalar("x_split", x_split);
    m.scalar("max_energy_drift", run.max_relative_energy_drift());
    m.scalar("max_norm_drift", run.max_relative_norm_drift());
    m.scalar("max_leak", run.slice_runs.iter().map(|d| d.max_leak).fold(0.0, f64::max));
    Ok(())
}

fn field_dumps(s: &PseudospinField, tag: &str, w: &mut ArtifactWriter) -> Result<()> {
    let g = s.grid;
    let dims = vec![g.x.n, g.p.n];
    let axes = vec![(g.x.min, g.x.max()), (g.p.min, g.p.max())];
    w.write(&format!("{tag}_theta.bin"), &GridDump::real(dims.clone(), axes.clone(), s.theta.clone())?.to_bytes())?;
    w.write(&format!("{tag}_phi.bin"), &GridDump::real(dims.clone(), axes.clone(), s.phi.clone())?.to_bytes())?;
    w.write(&format!("{tag}_sz.bin"), &GridDump::real(dims, axes, s.s_z())?.to_bytes())?;
    Ok(())
}

fn landau(l: &LandauConfig, w: &mut ArtifactWriter) -> Result<()> {
    let params = JCParams::new(l.c, l.m, l.n_max)?;
    let grid = PhaseSpaceGrid::square(l.phase_half_width, l.phase_points);
    let threshold = Threshold::Relative(l.threshold);
    let texture = |rho: &SpinOscillatorState| pseudospin_field(&wigner_from_density(rho, &grid), threshold);

    let mut spectrum = Csv::new(&["n", "branch", "energy"]);
    for n in 0..=(l.n_max / 2) as i64 {
        for (name, b) in [("positive", Branch::Positive), ("negative", Branch::Negative)] {
            if n == 0 && b == Branch::Positive {
                continue;
            }
            spectrum.row(&[n.to_string(), name.into(), num(landau_energy(n, b, &params)?)]);
        }
    }
    w.write("spectrum.csv", spectrum.bytes())?;

    let mut records: Vec<(usize, &str, f64, WindingReport)> = Vec::new();
    for &level in &l.levels {
        let v = landau_fock_state(level, l.branch, &params, l.convention)?;
        let rho = SpinOscillatorState::pure(&v, l.n_max)?;
        let s = texture(&rho);
        field_dumps(&s, &format!("level{level}"), w)?;
        records.push((level, "none", 0.0, winding_number(&s)?));
        for &g in &l.gamma_t {
            let d = dephasing_map(&s, g);
            field_dumps(&d, &format!("level{level}_dephased_{}", time_tag(g)), w)?;
            records.push((level, "dephasing", g, winding_number(&d)?));
        }
        for &p in &l.p_damp {
            let d = texture(&amplitude_damping(&rho, p)?);
            field_dumps(&d, &format!("level{level}_damped_{}", time_tag(p)), w)?;
            records.push((level, "damping", p, winding_number(&d)?));
        }
    }

    let mut csv = Csv::new(&[
        "level",
        "channel",
        "strength",
        "signed",
        "coverings",
        "excluded_solid_angle",
        "excluded_triangles",
        "quality",
        "compactification_spread",
    ]);
    let mut text = String::new();
    for (level, channel, strength, r) in &records {
        csv.row(&[
            level.to_string(),
            channel.to_string(),
            num(*strength),
            num(r.signed),
            num(r.coverings),
            num(r.excluded_solid_angle),
            r.excluded_triangles.to_string(),
            num(r.quality),
            num(r.compactification_spread),
        ]);
        text.push_str(&format!("level={level} channel={channel} strength={strength} {r}\n"));
    }
    w.write("winding.csv", csv.bytes())?;
    w.write("winding.txt", text.as_bytes())?;
    for (level, channel, _, r) in &records {
        if *channel == "none" {
            w.manifest.scalar(&format!("coverings_level{level}"), r.coverings);
            w.manifest.scalar(&format!("signed_level{level}"), r.signed);
        }
    }
    Ok(())
}

fn bag(b: &BagConfig, w: &mut ArtifactWriter) -> Result<()> {
    let spec = &b.spec;
    let runs: Vec<BagRun> = run_bag_cases(spec, &b.cases, Execution::default())?;
    let radius = spec.params.x_star() + 2.0 * spec.sigma;
    let mut obs = Csv::new(&["case", "t", "pi", "tunneled", "norm", "inside"]);
    for (case, run) in b.cases.iter().zip(&runs) {
        let label = case.label();
        let trace = run.density_trace();
        let dx = trace.x[1] - trace.x[0];
        let mut min_inside = f64::INFINITY;
        for (s, row) in run.snapshots.iter().zip(&trace.rows) {
            let inside: f64 =
                trace.x.iter().zip(row).filter(|(x, _)| x.abs() < radius).map(|(_, d)| d).sum::<f64>() * dx;
            min_inside = min_inside.min(inside);
            obs.row(&[label.to_string(), num(s.t), num(s.pi), num(s.tunneled), num(s.norm), num(inside)]);
        }
        let coarse = trace.coarsened(b.heatmap_half_width, b.heatmap_factor);
        let max_peaks = coarse.rows.iter().map(|row| count_local_maxima(row, 0.1)).max().unwrap_or(0);
        let (t0, t1) = (coarse.times[0], *coarse.times.last().expect("snapshots"));
        let (x0, x1) = (coarse.x[0], *coarse.x.last().expect("columns"));
        let dump = GridDump::real(vec![coarse.times.len(), coarse.x.len()], vec![(t0, t1), (x0, x1)], coarse.rows.concat())?;
        w.write(&format!("heatmap_{label}.bin"), &dump.to_bytes())?;
        let mut csv = Csv::new(&["t", "x_r", "density"]);
        for (t, row) in coarse.times.iter().zip(&coarse.rows) {
            for (x, d) in coarse.x.iter().zip(row) {
                csv.row(&[t, x, d]);
            }
        }
        w.write(&format!("heatmap_{label}.csv"), csv.bytes())?;

        let m = &mut w.manifest;
        let last = run.snapshots.last().expect("snapshots");
        m.scalar(&format!("tunneled_{label}"), last.tunneled);
        m.scalar(&format!("pi_final_{label}"), last.pi);
        m.scalar(&format!("min_inside_{label}"), min_inside);
        m.scalar(&format!("max_density_peaks_{label}"), max_peaks as f64);
        m.scalar(&format!("energy_drift_{label}"), run.relative_energy_drift());
        m.scalar(&format!("norm_drift_{label}"), run.relative_norm_drift());
        m.scalar(&format!("max_leak_{label}"), run.max_leak);
    }
    w.write("observables.csv", obs.bytes())?;
    w.manifest.scalar("inside_radius", radius);
    Ok(())
}

fn kind_name(k: HamiltonianKind) -> &'static str {
    match k {
        HamiltonianKind::Dirac3p1 => "dirac3p1",
        HamiltonianKind::Klein2p1 => "klein2p1",
        HamiltonianKind::Bag => "bag",
    }
}

fn ion_map(cfg: &IonMapConfig, w: &mut ArtifactWriter) -> Result<()> {
    let ip = &cfg.ion;
    let target = simulation_target(ip)?;
    let report = validity_check(ip, cfg.n_max_phonons)?;
    let mut sim = Csv::new(&["quantity", "value"]);
    let [_, ny, nz] = target.params.mass_axis();
    let mut rows: Vec<(&str, f64)> = vec![
        ("c", target.params.c),
        ("m", target.params.m),
        ("mass_axis_y", ny),
        ("mass_axis_z", nz),
        ("rest_energy", target.params.rest_energy()),
        ("zb_frequency_ion", zb_ion_frequency(cfg.n_max_phonons as f64, ip)),
    ];
    if let Some(a) = target.alpha {
        rows.push(("alpha", a));
    }
    if let Some(v) = target.v0 {
        rows.push(("v0", v));
    }
    for (k, v) in &rows {
        sim.row(&[k.to_string(), num(*v)]);
        w.manifest.scalar(k, *v);
    }
    w.write("simulation.csv", sim.bytes())?;
    w.write("validity.txt", report.to_string().as_bytes())?;
    w.manifest.text("validity", if report.all_ok() { "ok" } else { "violated" });

    for &kind in &cfg.kinds {
        let h = build_ion_hamiltonian(kind, ip)?;
        let mut ion = Csv::new(&["spin", "mode", "coefficient", "label"]);
        for t in &h.terms {
            ion.row(&[format!("{:?}", t.spin), format!("{:?}", t.mode), num(t.coefficient), t.label.to_string()]);
        }
        w.write(&format!("terms_{}_ion.csv", kind_name(kind)), ion.bytes())?;
        let mut reduced = Csv::new(&["spin", "op", "coefficient"]);
        for t in reduce_to_simulation(&h)? {
            reduced.row(&[format!("{:?}", t.spin), format!("{:?}", t.op), num(t.coefficient)]);
        }
        w.write(&format!("terms_{}_sim.csv", kind_name(kind)), reduced.bytes())?;
    }
    Ok(())
}

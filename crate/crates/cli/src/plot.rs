//! Plot-ready text files derived from the binary dumps of a run.

use std::fmt::Write as _;

use crate::dump::{GridDump, Payload};
use crate::error::Result;
use crate::manifest::ArtifactWriter;

const README: &str = "\
Plot data
=========

Every rank-2 real dump NAME.bin in the run directory has a text twin
plot/NAME.dat in gnuplot's nonuniform matrix layout:

    <ncols> <c_1> <c_2> ... <c_ncols>
    <r_1>   <z_11> <z_12> ... <z_1ncols>
    <r_2>   <z_21> ...

r runs along the first (slow) axis of the dump and c along the second.
Render with, e.g.

    plot 'plot/NAME.dat' nonuniform matrix with image

Files by experiment:

  klein2d   slices_t<T>.dat   |psi|^2 per p_y slice, rows p_y, columns x
            xy_t<T>.dat       |psi(x, y)|^2, rows x, columns y
            transmission.csv  p_y, T_measured, T_formula
            lobes.csv         t, side, probability, mean_x, width_x
            lobe_py.csv       p_y, reflected, transmitted (final time)
  landau    level<N>_theta.dat, level<N>_phi.dat, level<N>_sz.dat
                              pseudospin polar angle, azimuth and s_z over
                              phase space, rows x, columns p; suffixes
                              _dephased_<g> and _damped_<p> mark noisy runs
            winding.txt       one record per line: signed, coverings,
                              excluded solid angle, quality
  bag       heatmap_<case>.dat  |psi(x_r, t)|^2, rows t, columns x_r
            observables.csv   case, t, pi, tunneled, norm, inside
  zitterbewegung trace.csv    t, mean_x, norm
  klein1d   transmission.csv  m_tilde, T_measured, T_formula, drifts
  ion-map   simulation.csv, validity.txt, terms_<kind>_{ion,sim}.csv

Decimal points in <T>, <g>, <p> are written as 'p' (2.5 -> 2p5).
";

fn coordinates(n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    if n < 2 {
        return vec![lo; n];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Renders a rank-2 real dump as a gnuplot nonuniform matrix.
pub fn matrix_text(d: &GridDump) -> Option<String> {
    let Payload::Real(values) = &d.payload else {
        return None;
    };
    if d.rank() != 2 || d.components != 1 {
        return None;
    }
    let rows = coordinates(d.dims[0], d.axes[0]);
    let cols = coordinates(d.dims[1], d.axes[1]);
    let mut s = String::new();
    let _ = write!(s, "{}", cols.len());
    for c in &cols {
        let _ = write!(s, " {c}");
    }
    s.push('\n');
    for (r, row) in rows.iter().zip(values.chunks(d.dims[1])) {
        let _ = write!(s, "{r}");
        for v in row {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    Some(s)
}

/// Adds `plot/*.dat` for every rank-2 real dump already written, plus a
/// README describing the columns.
pub fn emit_plot_data(w: &mut ArtifactWriter) -> Result<()> {
    let dumps: Vec<String> = w.manifest.files.iter().map(|f| f.path.clone()).filter(|p| p.ends_with(".bin")).collect();
    for rel in dumps {
        let d = crate::dump::load_field(&w.dir.join(&rel))?;
        if let Some(text) = matrix_text(&d) {
            let name = rel.trim_end_matches(".bin");
            w.write(&format!("plot/{name}.dat"), text.as_bytes())?;
        }
    }
    w.write("plot/README.txt", README.as_bytes())
}

//! Flat `key = value` experiment configs (TOML syntax) with `--set`
//! overrides. Every problem is collected before anything runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use diracsim_core::dirac::{SimParams, ZbSpec};
use diracsim_core::ion::{HamiltonianKind, IonParams};
use diracsim_core::klein::{Frame, SliceNormalization, WavepacketSpec};
use diracsim_core::landau::{Branch, LandauConvention};
use diracsim_core::bag::{BagCase, BagFigureSpec, BagParams};
use diracsim_core::C64;
use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Zitterbewegung,
    Klein1d,
    Klein2d,
    Landau,
    Bag,
    IonMap,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Zitterbewegung,
        Experiment::Klein1d,
        Experiment::Klein2d,
        Experiment::Landau,
        Experiment::Bag,
        Experiment::IonMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Zitterbewegung => "zitterbewegung",
            Experiment::Klein1d => "klein1d",
            Experiment::Klein2d => "klein2d",
            Experiment::Landau => "landau",
            Experiment::Bag => "bag",
            Experiment::IonMap => "ion-map",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Validation(vec![format!("unknown experiment `{s}`")]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Klein1dConfig {
    pub c: f64,
    pub alpha: f64,
    pub m_tilde: Vec<f64>,
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub n_points: usize,
    pub half_width: f64,
    pub dt: f64,
    pub t_end: f64,
    pub frame: Frame,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Klein2dConfig {
    pub packet: WavepacketSpec,
    pub dt: f64,
    pub snapshots: Vec<f64>,
    /// Snapshot times at which the (x, y) density is reconstructed.
    pub xy_snapshots: Vec<f64>,
    pub frame: Frame,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandauConfig {
    pub c: f64,
    pub m: f64,
    pub n_max: usize,
    pub levels: Vec<usize>,
    pub branch: Branch,
    pub convention: LandauConvention,
    pub phase_half_width: f64,
    pub phase_points: usize,
    pub threshold: f64,
    pub gamma_t: Vec<f64>,
    pub p_damp: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BagConfig {
    pub spec: BagFigureSpec,
    pub cases: Vec<BagCase>,
    pub heatmap_half_width: f64,
    pub heatmap_factor: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonMapConfig {
    pub ion: IonParams,
    pub n_max_phonons: u32,
    pub kinds: Vec<HamiltonianKind>,
}

#[derive(Clone, Debug)]
pub enum ExperimentParams {
    Zitterbewegung(ZbSpec),
    Klein1d(Klein1dConfig),
    Klein2d(Klein2dConfig),
    Landau(LandauConfig),
    Bag(BagConfig),
    IonMap(IonMapConfig),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub params: ExperimentParams,
    /// Sorted `key = value` lines of the merged config.
    pub canonical: String,
}

impl ExperimentConfig {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }
}

/// Parses a document, applies `key=value` overrides (flags win) and
/// validates the result for `experiment`.
pub fn parse_config(experiment: Experiment, text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    let mut table: BTreeMap<String, Value> = match text.parse::<toml::Table>() {
        Ok(t) => t.into_iter().collect(),
        Err(e) => return Err(CliError::Validation(vec![format!("malformed config: {}", e.message())])),
    };
    for o in overrides {
        match parse_override(o) {
            Ok((k, v)) => {
                table.insert(k, v);
            }
            Err(e) => errors.push(e),
        }
    }
    let canonical = table.iter().map(|(k, v)| format!("{k} = {v}\n")).collect::<String>();

    let mut f = Fields { table: &table, errors, used: BTreeSet::new() };
    if let Some(name) = f.opt_string("experiment") {
        if name != experiment.name() {
            f.errors.push(format!("experiment: config is for `{name}`, not `{experiment}`"));
        }
    }
    let seed = f.opt_int("seed").unwrap_or(0);
    if seed < 0 {
        f.errors.push("seed: must be non-negative".into());
    }
    let output_dir = f.opt_string("output_dir").map(PathBuf::from);
    let params = match experiment {
        Experiment::Zitterbewegung => ExperimentParams::Zitterbewegung(zb(&mut f)),
        Experiment::Klein1d => ExperimentParams::Klein1d(klein1d(&mut f)),
        Experiment::Klein2d => ExperimentParams::Klein2d(klein2d(&mut f)),
        Experiment::Landau => ExperimentParams::Landau(landau(&mut f)),
        Experiment::Bag => ExperimentParams::Bag(bag(&mut f)),
        Experiment::IonMap => ExperimentParams::IonMap(ion_map(&mut f)),
    };
    for key in table.keys() {
        if !f.used.contains(key) {
            f.errors.push(format!("{key}: unknown key for `{experiment}`"));
        }
    }
    if !f.errors.is_empty() {
        return Err(CliError::Validation(f.errors));
    }
    Ok(ExperimentConfig { experiment, seed: seed as u64, output_dir, params, canonical })
}

fn parse_override(s: &str) -> std::result::Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("--set {s}: expected key=value"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(format!("--set {s}: empty key"));
    }
    let value = match format!("v = {v}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(v.to_string()),
    };
    Ok((k.to_string(), value))
}

struct Fields<'a> {
    table: &'a BTreeMap<String, Value>,
    errors: Vec<String>,
    used: BTreeSet<String>,
}

impl Fields<'_> {
    fn get(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    fn number(&mut self, key: &str, v: &Value) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.errors.push(format!("{key}: expected a number"));
                None
            }
        }
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        let v = self.get(key)?.clone();
        self.number(key, &v)
    }

    fn f64(&mut self, key: &str) -> f64 {
        if !self.table.contains_key(key) {
            self.used.insert(key.to_string());
            self.errors.push(format!("{key}: missing required field"));
            return f64::NAN;
        }
        self.opt_f64(key).unwrap_or(f64::NAN)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        if self.table.contains_key(key) {
            self.opt_f64(key).unwrap_or(f64::NAN)
        } else {
            self.used.insert(key.to_string());
            default
        }
    }

    fn opt_int(&mut self, key: &str) -> Option<i64> {
        match self.get(key)?.clone() {
            Value::Integer(i) => Some(i),
            _ => {
                self.errors.push(format!("{key}: expected an integer"));
                None
            }
        }
    }

    fn usize(&mut self, key: &str) -> usize {
        if !self.table.contains_key(key) {
            self.used.insert(key.to_string());
            self.errors.push(format!("{key}: missing required field"));
            return 0;
        }
        self.to_usize(key)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        if self.table.contains_key(key) {
            self.to_usize(key)
        } else {
            self.used.insert(key.to_string());
            default
        }
    }

    fn to_usize(&mut self, key: &str) -> usize {
        match self.opt_int(key) {
            Some(i) if i >= 0 => i as usize,
            Some(_) => {
                self.errors.push(format!("{key}: must be non-negative"));
                0
            }
            None => 0,
        }
    }

    fn opt_string(&mut self, key: &str) -> Option<String> {
        match self.get(key)?.clone() {
            Value::String(s) => Some(s),
            _ => {
                self.errors.push(format!("{key}: expected a string"));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some(s) = self.opt_string(key) else {
            return default;
        };
        match options.iter().find(|(n, _)| *n == s) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.errors.push(format!("{key}: `{s}` is not one of {}", names.join(", ")));
                default
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<Value>> {
        match self.get(key)?.clone() {
            Value::Array(a) => Some(a),
            _ => {
                self.errors.push(format!("{key}: expected an array"));
                None
            }
        }
    }

    fn f64_list(&mut self, key: &str, required: bool) -> Vec<f64> {
        match self.list(key) {
            Some(items) => items.iter().filter_map(|v| self.number(key, v)).collect(),
            None => {
                if required && !self.table.contains_key(key) {
                    self.errors.push(format!("{key}: missing required field"));
                }
                Vec::new()
            }
        }
    }

    fn string_list(&mut self, key: &str) -> Option<Vec<String>> {
        let items = self.list(key)?;
        let mut out = Vec::new();
        for v in items {
            match v {
                Value::String(s) => out.push(s),
                _ => self.errors.push(format!("{key}: expected strings")),
            }
        }
        Some(out)
    }

    fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.errors.push(msg.into());
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        self.require(v.is_finite() && v > 0.0 || v.is_nan(), format!("{key}: must be positive"));
    }

    fn non_negative(&mut self, key: &str, v: f64) {
        self.require(v.is_finite() && v >= 0.0 || v.is_nan(), format!("{key}: must be non-negative"));
    }

    fn power_of_two(&mut self, key: &str, n: usize) {
        if n != 0 || self.table.contains_key(key) {
            self.require(n >= 4 && n.is_power_of_two(), format!("{key}: {n} is not a power of two (>= 4)"));
        }
    }

    /// Turns a core constructor error into a message; NaN inputs are
    /// already reported as missing fields.
    fn core<T>(&mut self, r: diracsim_core::Result<T>, inputs: &[f64]) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                if inputs.iter().all(|x| !x.is_nan()) {
                    self.errors.push(e.to_string());
                }
                None
            }
        }
    }
}

const FRAMES: [(&str, Frame); 2] = [("comoving", Frame::Comoving), ("lab", Frame::Lab)];

fn zb(f: &mut Fields) -> ZbSpec {
    let d = ZbSpec::default();
    let c = f.f64("c");
    let m = f.f64("m");
    let axis = f.choice("mass_axis", [0.0, 1.0, 0.0], &[("y", [0.0, 1.0, 0.0]), ("z", [0.0, 0.0, 1.0])]);
    let n_points = f.usize("n_points");
    f.power_of_two("n_points", n_points);
    let half_width = f.f64("half_width");
    f.positive("half_width", half_width);
    let x0 = f.f64_or("x0", 0.0);
    let sigma_x = f.f64("sigma_x");
    f.positive("sigma_x", sigma_x);
    let p0 = f.f64_or("p0", 0.0);
    let spinor = match f.list("spinor") {
        Some(v) => {
            let nums: Vec<f64> = v.iter().filter_map(|x| f.number("spinor", x)).collect();
            if nums.len() == 4 {
                [C64::new(nums[0], nums[1]), C64::new(nums[2], nums[3])]
            } else {
                f.errors.push("spinor: expected [re0, im0, re1, im1]".into());
                d.spinor
            }
        }
        None => d.spinor,
    };
    let t_end = f.f64("t_end");
    f.positive("t_end", t_end);
    let n_samples = f.usize_or("n_samples", d.n_samples);
    f.require(n_samples >= 64, "n_samples: must be at least 64");
    let params = f.core(SimParams::with_mass_axis(c, m, axis), &[c, m]).unwrap_or(d.params);
    ZbSpec { params, n_points, half_width, x0, sigma_x, p0, spinor, t_end, n_samples }
}

fn dt_field(f: &mut Fields) -> f64 {
    let dt = f.f64("dt");
    f.positive("dt", dt);
    dt
}

fn klein1d(f: &mut Fields) -> Klein1dConfig {
    let c = f.f64("c");
    f.positive("c", c);
    let alpha = f.f64("alpha");
    f.positive("alpha", alpha);
    let m_tilde = f.f64_list("m_tilde", true);
    for m in &m_tilde {
        f.require(m.is_finite() && *m >= 0.0, format!("m_tilde: {m} must be non-negative"));
    }
    let x0 = f.f64("x0");
    let p0 = f.f64("p0");
    let sigma_x = f.f64("sigma_x");
    f.positive("sigma_x", sigma_x);
    let n_points = f.usize("n_points");
    f.power_of_two("n_points", n_points);
    let half_width = f.f64("half_width");
    f.positive("half_width", half_width);
    let dt = dt_field(f);
    let t_end = f.f64("t_end");
    f.positive("t_end", t_end);
    let frame = f.choice("frame", Frame::Comoving, &FRAMES);
    Klein1dConfig { c, alpha, m_tilde, x0, p0, sigma_x, n_points, half_width, dt, t_end, frame }
}

fn klein2d(f: &mut Fields) -> Klein2dConfig {
    let m = f.f64("m");
    f.non_negative("m", m);
    let c = f.f64("c");
    f.positive("c", c);
    let alpha = f.f64("alpha");
    f.positive("alpha", alpha);
    let x0 = f.f64("x0");
    let p0 = f.f64("p0");
    let sigma_x = f.f64("sigma_x");
    f.positive("sigma_x", sigma_x);
    let n_points = f.usize("n_points");
    f.power_of_two("n_points", n_points);
    let half_width = f.f64("half_width");
    f.positive("half_width", half_width);
    let n_slices = f.usize("n_slices");
    f.power_of_two("n_slices", n_slices);
    let py_max = f.f64("py_max");
    f.positive("py_max", py_max);
    let sigma_py = f.f64("sigma_py");
    f.positive("sigma_py", sigma_py);
    let normalization = f.choice(
        "normalization",
        SliceNormalization::Weighted,
        &[("weighted", SliceNormalization::Weighted), ("per_slice", SliceNormalization::PerSlice)],
    );
    let dt = dt_field(f);
    let snapshots = f.f64_list("t_snapshots", true);
    let xy_snapshots = f.f64_list("xy_snapshots", false);
    check_times(f, "t_snapshots", &snapshots);
    for t in &xy_snapshots {
        f.require(snapshots.contains(t), format!("xy_snapshots: {t} is not in t_snapshots"));
    }
    let frame = f.choice("frame", Frame::Comoving, &FRAMES);
    let packet = WavepacketSpec {
        m,
        c,
        alpha,
        x0,
        p0,
        sigma_x,
        n_points,
        half_width,
        n_slices,
        py_max,
        sigma_py,
        normalization,
    };
    Klein2dConfig { packet, dt, snapshots, xy_snapshots, frame }
}

fn check_times(f: &mut Fields, key: &str, times: &[f64]) {
    if times.is_empty() && f.table.contains_key(key) {
        f.errors.push(format!("{key}: needs at least one time"));
    }
    f.require(times.iter().all(|t| t.is_finite() && *t >= 0.0), format!("{key}: times must be non-negative"));
    f.require(times.windows(2).all(|w| w[1] > w[0]), format!("{key}: times must be strictly increasing"));
}

fn landau(f: &mut Fields) -> LandauConfig {
    let c = f.f64("c");
    f.positive("c", c);
    let m = f.f64("m");
    f.non_negative("m", m);
    let n_max = f.usize("n_max");
    let levels: Vec<usize> = match f.list("levels") {
        Some(v) => v
            .iter()
            .filter_map(|x| match x {
                Value::Integer(i) if *i >= 0 => Some(*i as usize),
                _ => {
                    f.errors.push("levels: expected non-negative integers".into());
                    None
                }
            })
            .collect(),
        None => {
            f.errors.push("levels: missing required field".into());
            Vec::new()
        }
    };
    for &l in &levels {
        f.require(2 * l <= n_max, format!("levels: level {l} needs n_max >= {}", 2 * l));
    }
    let branch = f.choice("branch", Branch::Negative, &[("negative", Branch::Negative), ("positive", Branch::Positive)]);
    let convention = f.choice(
        "convention",
        LandauConvention::JaynesCummings,
        &[("jaynes_cummings", LandauConvention::JaynesCummings), ("dirac_matrix", LandauConvention::DiracMatrix)],
    );
    let phase_half_width = f.f64("phase_half_width");
    f.positive("phase_half_width", phase_half_width);
    let phase_points = f.usize("phase_points");
    f.require(phase_points >= 8, "phase_points: must be at least 8");
    let threshold = f.f64_or("threshold", 1e-6);
    f.non_negative("threshold", threshold);
    let gamma_t = f.f64_list("gamma_t", false);
    f.require(gamma_t.iter().all(|g| *g >= 0.0), "gamma_t: values must be non-negative");
    let p_damp = f.f64_list("p_damp", false);
    f.require(p_damp.iter().all(|p| (0.0..=1.0).contains(p)), "p_damp: values must lie in [0, 1]");
    if !(c.is_nan() || m.is_nan()) {
        let _ = f.core(diracsim_core::landau::JCParams::new(c, m, n_max), &[]);
    }
    LandauConfig { c, m, n_max, levels, branch, convention, phase_half_width, phase_points, threshold, gamma_t, p_damp }
}

fn bag(f: &mut Fields) -> BagConfig {
    let c = f.f64("c");
    let m = f.f64("m");
    let v0 = f.f64("v0");
    let p_cm = f.f64("p_cm");
    let sigma = f.f64("sigma");
    f.positive("sigma", sigma);
    let x0 = f.f64_or("x0", 0.0);
    let n_points = f.usize("n_points");
    f.power_of_two("n_points", n_points);
    let half_width = f.f64("half_width");
    f.positive("half_width", half_width);
    let dt = dt_field(f);
    let t_end = f.f64("t_end");
    f.positive("t_end", t_end);
    let snapshot_interval = f.f64_or("snapshot_interval", 1.0);
    f.positive("snapshot_interval", snapshot_interval);
    let cases = match f.string_list("cases") {
        Some(names) => names
            .iter()
            .filter_map(|n| {
                let found = BagCase::ALL.into_iter().find(|c| c.label() == n);
                if found.is_none() {
                    f.errors.push(format!("cases: `{n}` is not one of a, b, c, d"));
                }
                found
            })
            .collect(),
        None => BagCase::ALL.to_vec(),
    };
    let heatmap_half_width = f.f64_or("heatmap_half_width", 60.0);
    f.positive("heatmap_half_width", heatmap_half_width);
    let heatmap_factor = f.usize_or("heatmap_factor", 16);
    f.require(heatmap_factor >= 1, "heatmap_factor: must be at least 1");
    let base = f.core(SimParams::new(c, m), &[c, m]);
    let params = base.and_then(|b| f.core(BagParams::new(b, v0, p_cm), &[v0, p_cm])).unwrap_or_else(BagParams::figure);
    let spec = BagFigureSpec { params, n_points, half_width, sigma, x0, dt, t_end, snapshot_interval };
    BagConfig { spec, cases, heatmap_half_width, heatmap_factor }
}

fn ion_map(f: &mut Fields) -> IonMapConfig {
    let hbar = f.f64_or("hbar", 1.0);
    let eta = f.f64("eta");
    let delta = f.f64("delta");
    let omega_tilde = f.f64("omega_tilde");
    let omega = f.f64("omega");
    let nu = f.f64_or("nu", 1.0);
    let omega_0 = f.opt_f64("omega_0");
    let omega_3 = f.opt_f64("omega_3");
    let delta_3 = f.opt_f64("delta_3");
    f.require(omega_3.is_some() == delta_3.is_some(), "omega_3 and delta_3 must be given together");
    let n_max_phonons = f.usize_or("n_max_phonons", 100);
    f.require(n_max_phonons >= 1, "n_max_phonons: must be at least 1");
    let kinds = match f.string_list("hamiltonians") {
        Some(names) => names.iter().filter_map(|n| f.core(n.parse::<HamiltonianKind>(), &[])).collect(),
        None => {
            let mut k = vec![HamiltonianKind::Dirac3p1];
            if omega_0.is_some() {
                k.push(HamiltonianKind::Klein2p1);
            }
            if omega_3.is_some() {
                k.push(HamiltonianKind::Bag);
            }
            k
        }
    };
    let mut ion = IonParams {
        hbar,
        eta,
        delta,
        omega_tilde,
        omega,
        nu,
        cm: None,
        st: None,
        r: None,
        three: None,
        omega_0,
        omega_3,
        delta_3,
    };
    if [eta, delta, omega_tilde, omega].iter().all(|v| !v.is_nan()) {
        if let Err(e) = ion.validate() {
            f.errors.push(e.to_string());
        }
    } else {
        ion = IonParams { eta: 0.05, delta: 1.0, omega_tilde: 0.0, omega: 0.0, ..ion };
    }
    for k in &kinds {
        match k {
            HamiltonianKind::Klein2p1 => f.require(omega_0.is_some(), "hamiltonians: klein2p1 needs omega_0"),
            HamiltonianKind::Bag => f.require(omega_3.is_some(), "hamiltonians: bag needs omega_3 and delta_3"),
            HamiltonianKind::Dirac3p1 => {}
        }
    }
    IonMapConfig { ion, n_max_phonons: n_max_phonons as u32, kinds }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLEIN2D: &str = r#"
        m = 0.5
        c = 1.0
        alpha = 1.0
        x0 = -40.0
        p0 = 2.0
        sigma_x = 1.0
        n_points = 1024
        half_width = 150.0
        n_slices = 64
        py_max = 2.0
        sigma_py = 0.5
        dt = 0.01
        t_snapshots = [0, 20, 40, 60, 80, 100]
    "#;

    #[test]
    fn figure_config_is_accepted() {
        let cfg = parse_config(Experiment::Klein2d, KLEIN2D, &[]).unwrap();
        let ExperimentParams::Klein2d(k) = cfg.params else { panic!() };
        assert_eq!(k.snapshots, vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0]);
        assert_eq!(k.packet.m, 0.5);
    }

    #[test]
    fn missing_dt_is_named() {
        let text = KLEIN2D.replace("dt = 0.01", "");
        let Err(CliError::Validation(errs)) = parse_config(Experiment::Klein2d, &text, &[]) else { panic!() };
        assert!(errs.iter().any(|e| e.starts_with("dt:")), "{errs:?}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = KLEIN2D.replace("n_points = 1024", "n_points = 1000").replace("dt = 0.01", "bogus = 1");
        let Err(CliError::Validation(errs)) = parse_config(Experiment::Klein2d, &text, &[]) else { panic!() };
        assert!(errs.iter().any(|e| e.contains("n_points") && e.contains("power of two")));
        assert!(errs.iter().any(|e| e.starts_with("dt:")));
        assert!(errs.iter().any(|e| e.starts_with("bogus:")));
    }

    #[test]
    fn overrides_win() {
        let cfg = parse_config(Experiment::Klein2d, KLEIN2D, &["m=0.25".into(), "frame=\"lab\"".into(), "normalization=per_slice".into()]).unwrap();
        let ExperimentParams::Klein2d(k) = cfg.params else { panic!() };
        assert_eq!(k.packet.m, 0.25);
        assert_eq!(k.frame, Frame::Lab);
        assert_eq!(k.packet.normalization, SliceNormalization::PerSlice);
        assert!(cfg.canonical.contains("m = 0.25"));
        assert!(parse_config(Experiment::Klein2d, KLEIN2D, &["novalue".into()]).is_err());
    }

    #[test]
    fn wrong_experiment_is_rejected() {
        let text = format!("experiment = \"bag\"\n{KLEIN2D}");
        assert!(parse_config(Experiment::Klein2d, &text, &[]).is_err());
    }
}

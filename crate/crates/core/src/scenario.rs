//! Scenario configuration, figure presets, and CSV datasets.
//!
//! Configurations are TOML documents whose keys are read as flat dotted
//! paths (`surface.gamma`, `dipole.omega_a`). Overrides use the same paths.
//! Every key must be consumed; unknown keys are reported as configuration
//! errors so typos never pass silently.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::casimir_polder::{CasimirPolder, CpMethod};
use crate::error::{DispersiaError, Result};
use crate::friction::{
    friction_asymptotic, friction_fdt_low_velocity, friction_plasma_closed_form, friction_qrt_with_cancellation,
    friction_second_order_numeric, orientation_factors, AsymptoticRegime, FrictionScenario,
};
use crate::green::{HalfSpace, ReflectionModel};
use crate::material::SurfaceModel;
use crate::polarizability::{DipoleKind, DipoleModel, DipoleOrientation, DressedRates, TwoLevelAtom};
use crate::spectra::{power_spectrum_fdt, power_spectrum_qrt};
use crate::tensor::ComplexTensor3;
use crate::units::{PhysicalConstants, UnitSystem};

fn config_err(msg: impl Into<String>) -> DispersiaError {
    DispersiaError::Configuration(msg.into())
}

/// Flat view of a TOML document keyed by dotted paths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    values: BTreeMap<String, toml::Value>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(format!("invalid TOML: {e}")))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        Ok(Self { values })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `key=value`; the value is read as TOML and falls back to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("override `{assignment}` is not of the form key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(config_err(format!("override `{assignment}` has an empty key")));
        }
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("key present"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    fn reader(&self) -> Reader<'_> {
        Reader {
            cfg: self,
            used: std::cell::RefCell::new(Vec::new()),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Typed access that records which keys were read.
struct Reader<'a> {
    cfg: &'a ScenarioConfig,
    used: std::cell::RefCell<Vec<String>>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&toml::Value> {
        let v = self.cfg.values.get(key);
        if v.is_some() {
            self.used.borrow_mut().push(key.to_string());
        }
        v
    }

    fn has(&self, key: &str) -> bool {
        self.cfg.values.contains_key(key)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(config_err(format!("{key}: expected a number, got {other}"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| config_err(format!("{key}: required")))
    }

    fn opt_str(&self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(config_err(format!("{key}: expected a string, got {other}"))),
        }
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(config_err(format!("{key}: expected true or false, got {other}"))),
        }
    }

    fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(config_err(format!("{key}: expected numbers, got {other}"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(other) => Err(config_err(format!("{key}: expected an array of numbers, got {other}"))),
        }
    }

    fn opt_str_list(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => Ok(s.clone()),
                    other => Err(config_err(format!("{key}: expected strings, got {other}"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(toml::Value::String(s)) => Ok(Some(vec![s.clone()])),
            Some(other) => Err(config_err(format!("{key}: expected an array of strings, got {other}"))),
        }
    }

    /// Fails on any key that was never read.
    fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.cfg.keys().filter(|k| !used.iter().any(|u| u == k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!("unknown key(s): {}", unknown.join(", "))))
        }
    }
}

/// Sweep values: an explicit `values` list or `min`/`max`/`points` with
/// `linear` or `log` spacing.
fn read_sweep(r: &Reader<'_>, prefix: &str) -> Result<Vec<f64>> {
    let key = |k: &str| format!("{prefix}.{k}");
    if let Some(v) = r.opt_f64_list(&key("values"))? {
        for k in ["min", "max", "points", "spacing"] {
            if r.has(&key(k)) {
                return Err(config_err(format!("{}: give either values or a range, not both", key(k))));
            }
        }
        if v.is_empty() {
            return Err(config_err(format!("{}: sweep is empty", key("values"))));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(config_err(format!("{}: values must be finite", key("values"))));
        }
        return Ok(v);
    }
    let lo = r.req_f64(&key("min"))?;
    let hi = r.req_f64(&key("max"))?;
    let n = r.req_f64(&key("points"))?;
    let spacing = r.opt_str(&key("spacing"))?.unwrap_or_else(|| "linear".into());
    if !(n >= 1.0) || n.fract() != 0.0 || n > 1e6 {
        return Err(config_err(format!("{}: expected a positive integer, got {n}", key("points"))));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(config_err(format!("{prefix}: need finite min ≤ max, got [{lo}, {hi}]")));
    }
    let n = n as usize;
    let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match spacing.as_str() {
        "linear" => Ok((0..n).map(|i| lo + (hi - lo) * t(i)).collect()),
        "log" => {
            if !(lo > 0.0) {
                return Err(config_err(format!("{}: log spacing needs min > 0", key("min"))));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| (a + (b - a) * t(i)).exp()).collect())
        }
        other => Err(config_err(format!("{}: unknown spacing `{other}` (linear, log)", key("spacing")))),
    }
}

/// Surface-plasmon frequency in rad/s for a plasma energy in eV.
fn omega_sp_si(omega_p_ev: f64) -> f64 {
    omega_p_ev * PhysicalConstants::ev_to_rad_per_s() / 2f64.sqrt()
}

struct SurfaceSpec {
    surface: SurfaceModel,
    omega_p_ev: Option<f64>,
    reflection: ReflectionModel,
}

fn read_surface(r: &Reader<'_>) -> Result<SurfaceSpec> {
    let omega_p_ev = r.opt_f64("surface.omega_p_eV")?;
    if let Some(e) = omega_p_ev {
        if !(e > 0.0) || !e.is_finite() {
            return Err(config_err(format!("surface.omega_p_eV: must be positive, got {e}")));
        }
    }
    let gamma = match (r.opt_f64("surface.gamma")?, r.opt_f64("surface.gamma_over_omega_p")?) {
        (Some(_), Some(_)) => {
            return Err(config_err("surface.gamma and surface.gamma_over_omega_p are mutually exclusive"))
        }
        (Some(g), None) => g,
        (None, Some(g)) => g * 2f64.sqrt(),
        (None, None) => return Err(config_err("surface.gamma: required (or surface.gamma_over_omega_p)")),
    };
    let surface = SurfaceModel::drude(gamma).map_err(|e| config_err(format!("surface.gamma: {e}")))?;
    let reflection = match r.opt_str("surface.reflection")?.as_deref() {
        None | Some("fresnel") => ReflectionModel::Fresnel,
        Some("quasistatic") => ReflectionModel::QuasiStatic,
        Some("perfect") => ReflectionModel::PerfectReflector,
        Some(o) => {
            return Err(config_err(format!(
                "surface.reflection: unknown model `{o}` (fresnel, quasistatic, perfect)"
            )))
        }
    };
    Ok(SurfaceSpec {
        surface,
        omega_p_ev,
        reflection,
    })
}

/// Dipole from `dipole.*`; strength and free rate are tied by
/// `γ_free = ω_a³|d|²/(3π)` unless both are given.
fn read_dipole(r: &Reader<'_>, omega_p_ev: Option<f64>) -> Result<DipoleModel> {
    let need_ev = |key: &str| {
        omega_p_ev.map(omega_sp_si).ok_or_else(|| config_err(format!("{key}: needs surface.omega_p_eV")))
    };
    let kind = match r.opt_str("dipole.kind")?.as_deref() {
        None | Some("two_level") => DipoleKind::TwoLevel,
        Some("oscillator") => DipoleKind::Oscillator,
        Some(o) => return Err(config_err(format!("dipole.kind: unknown kind `{o}` (two_level, oscillator)"))),
    };
    let omega_a = match (r.opt_f64("dipole.omega_a")?, r.opt_f64("dipole.wavelength_nm")?) {
        (Some(_), Some(_)) => return Err(config_err("dipole.omega_a and dipole.wavelength_nm are mutually exclusive")),
        (Some(w), None) => w,
        (None, Some(nm)) => {
            let wsp = need_ev("dipole.wavelength_nm")?;
            2.0 * PI * PhysicalConstants::C / (nm * 1e-9) / wsp
        }
        (None, None) => return Err(config_err("dipole.omega_a: required (or dipole.wavelength_nm)")),
    };
    if !(omega_a > 0.0) || !omega_a.is_finite() {
        return Err(config_err(format!("dipole.omega_a: must be positive, got {omega_a}")));
    }
    let d2 = match (r.opt_f64("dipole.d_squared")?, r.opt_f64("dipole.alpha0_si")?) {
        (Some(_), Some(_)) => return Err(config_err("dipole.d_squared and dipole.alpha0_si are mutually exclusive")),
        (Some(d), None) => Some(d),
        (None, Some(a)) => {
            let units = UnitSystem::new(need_ev("dipole.alpha0_si")?, a)
                .map_err(|e| config_err(format!("dipole.alpha0_si: {e}")))?;
            Some(DipoleModel::d_squared_from_alpha0(units.polarizability_from_si(a), omega_a))
        }
        (None, None) => None,
    };
    let gamma_free = match (r.opt_f64("dipole.gamma_free")?, r.opt_f64("dipole.gamma_free_over_omega_a")?) {
        (Some(_), Some(_)) => {
            return Err(config_err("dipole.gamma_free and dipole.gamma_free_over_omega_a are mutually exclusive"))
        }
        (Some(g), None) => Some(g),
        (None, Some(g)) => Some(g * omega_a),
        (None, None) => None,
    };
    let (d2, gamma_free) = match (d2, gamma_free) {
        (Some(d), Some(g)) => (d, g),
        (Some(d), None) => (d, omega_a.powi(3) * d / (3.0 * PI)),
        (None, Some(g)) => (3.0 * PI * g / omega_a.powi(3), g),
        (None, None) => {
            return Err(config_err(
                "dipole: give the strength (d_squared or alpha0_si) or the free rate (gamma_free or gamma_free_over_omega_a)",
            ))
        }
    };
    let gamma_intrinsic = r.f64_or("dipole.gamma_intrinsic", 0.0)?;
    let orientation = match (r.opt_f64("dipole.theta")?, r.opt_f64("dipole.phi")?) {
        (None, None) => DipoleOrientation::Isotropic,
        (Some(theta), phi) => DipoleOrientation::Fixed {
            theta,
            phi: phi.unwrap_or(0.0),
        },
        (None, Some(_)) => return Err(config_err("dipole.phi: needs dipole.theta")),
    };
    DipoleModel::new(d2, orientation, omega_a, gamma_intrinsic, gamma_free, kind)
        .map_err(|e| config_err(format!("dipole: {e}")))
}

fn read_methods(r: &Reader<'_>, allowed: &[&str]) -> Result<Vec<String>> {
    let m = r.opt_str_list("methods")?.ok_or_else(|| config_err("methods: required"))?;
    if m.is_empty() {
        return Err(config_err("methods: the method list is empty"));
    }
    for x in &m {
        if !allowed.contains(&x.as_str()) {
            return Err(config_err(format!("methods: unknown method `{x}` (allowed: {})", allowed.join(", "))));
        }
    }
    Ok(m)
}

fn read_rel_tol(r: &Reader<'_>, default: f64) -> Result<f64> {
    let t = r.f64_or("numerics.rel_tol", default)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(config_err(format!("numerics.rel_tol: must lie in (0, 1), got {t}")));
    }
    Ok(t)
}

/// A table of rows destined for one CSV file.
#[derive(Debug)]
pub struct Dataset {
    pub name: String,
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Result<Vec<f64>>>,
}

impl Dataset {
    fn new(name: impl Into<String>, header: Vec<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            header,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// First failed or non-finite row, if any.
    pub fn failure(&self) -> Option<DispersiaError> {
        self.rows.iter().enumerate().find_map(|(i, r)| match r {
            Err(e) => Some(e.clone()),
            Ok(v) if v.iter().any(|x| !x.is_finite()) => {
                Some(DispersiaError::NonFinite(format!("{} row {i}", self.name)))
            }
            Ok(_) => None,
        })
    }

    /// CSV text: `#` header lines, a column line, then rows with 12
    /// significant digits. Failed rows become `#` comments.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "# {h}");
        }
        if self.failure().is_some() {
            let _ = writeln!(s, "# status: partial (numerical failure)");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for (i, row) in self.rows.iter().enumerate() {
            match row {
                Ok(v) if v.iter().all(|x| x.is_finite()) => {
                    let cells: Vec<String> = v.iter().map(|x| format!("{x:.11e}")).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                Ok(_) => {
                    let _ = writeln!(s, "# row {i} failed: non-finite value");
                }
                Err(e) => {
                    let _ = writeln!(s, "# row {i} failed: {e}");
                }
            }
        }
        s
    }
}

/// Writes every dataset to `dir/<name>.csv`; reports the first numerical failure
/// after all files are on disk.
pub fn write_datasets(datasets: &[Dataset], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| config_err(format!("cannot create {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for d in datasets {
        let p = dir.join(format!("{}.csv", d.name));
        std::fs::write(&p, d.to_csv()).map_err(|e| config_err(format!("cannot write {}: {e}", p.display())))?;
        paths.push(p);
    }
    match datasets.iter().find_map(Dataset::failure) {
        Some(e) => Err(e),
        None => Ok(paths),
    }
}

fn base_header(title: &str, cfg: &ScenarioConfig) -> Vec<String> {
    let mut h = vec![
        title.to_string(),
        format!("dispersia {}", env!("CARGO_PKG_VERSION")),
        "units: frequencies in omega_sp, lengths in c/omega_sp, velocities in c, forces in |F0|".into(),
    ];
    for (k, v) in &cfg.values {
        h.push(format!("{k} = {}", show_value(v)));
    }
    h
}

/// Header rendering; floats keep exponent notation so `5.26e-39` stays legible.
fn show_value(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(x) => format!("{x:?}"),
        toml::Value::Array(a) => format!("[{}]", a.iter().map(show_value).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn par_rows<T: Sync>(points: &[T], f: impl Fn(&T) -> Result<Vec<f64>> + Sync + Send) -> Vec<Result<Vec<f64>>> {
    points.par_iter().map(f).collect()
}

/// Output directory and file prefix named in the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub name: String,
}

/// Runs a `casimir_polder`, `spectrum`, or `friction` configuration and
/// returns one dataset per method.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(OutputSpec, Vec<Dataset>)> {
    let r = cfg.reader();
    let kind = r.opt_str("kind")?.ok_or_else(|| config_err("kind: required (casimir_polder, spectrum, friction)"))?;
    let out = OutputSpec {
        dir: r.opt_str("output.dir")?.map(PathBuf::from),
        name: r.opt_str("name")?.unwrap_or_else(|| kind.clone()),
    };
    let plan = match kind.as_str() {
        "casimir_polder" => plan_cp(&r, cfg, &out.name)?,
        "spectrum" => plan_spectrum(&r, cfg, &out.name)?,
        "friction" => plan_friction(&r, cfg, &out.name)?,
        other => return Err(config_err(format!("kind: unknown scenario `{other}` (casimir_polder, spectrum, friction)"))),
    };
    r.finish()?;
    Ok((out, plan()))
}

type Plan = Box<dyn FnOnce() -> Vec<Dataset>>;

fn plan_cp(r: &Reader<'_>, cfg: &ScenarioConfig, name: &str) -> Result<Plan> {
    let s = read_surface(r)?;
    let dipole = read_dipole(r, s.omega_p_ev)?;
    let methods = read_methods(r, &["fdt", "qrt", "nm", "lifshitz", "bare"])?;
    let unit = r.opt_str("sweep.unit")?.unwrap_or_else(|| "natural".into());
    let scale = match unit.as_str() {
        "natural" => 1.0,
        "lambda_p" => 2.0 * PI / s.surface.omega_p,
        o => return Err(config_err(format!("sweep.unit: unknown unit `{o}` (natural, lambda_p)"))),
    };
    let zs = read_sweep(r, "sweep")?;
    if zs.iter().any(|&z| !(z > 0.0)) {
        return Err(config_err("sweep: distances must be positive"));
    }
    let mut cp = CasimirPolder::new(dipole, HalfSpace::new(s.surface, s.reflection));
    cp.rel_tol = read_rel_tol(r, 1e-9)?;
    cp.include_shift = r.opt_bool("numerics.include_shift")?.unwrap_or(false);
    if let Some(ev) = s.omega_p_ev {
        let wsp = omega_sp_si(ev);
        let alpha0_si = UnitSystem::new(wsp, 0.0)?.polarizability_to_si(dipole.alpha0());
        cp.units = Some(UnitSystem::new(wsp, alpha0_si).map_err(|e| config_err(e.to_string()))?);
    }
    let header = base_header(&format!("Casimir-Polder force scan ({name})"), cfg);
    let name = name.to_string();
    Ok(Box::new(move || {
        methods
            .iter()
            .map(|m| {
                let method = match m.as_str() {
                    "fdt" => CpMethod::Fdt,
                    "qrt" => CpMethod::Qrt,
                    "nm" => CpMethod::NonMarkovian,
                    "lifshitz" => CpMethod::Lifshitz,
                    _ => CpMethod::Bare,
                };
                let cols: &[&str] = if cp.units.is_some() {
                    &["z", "force", "error", "force_si_newton"]
                } else {
                    &["z", "force", "error"]
                };
                let mut d = Dataset::new(format!("{name}_{m}"), header.clone(), cols);
                d.rows = par_rows(&zs, |&z| {
                    let f = cp.cp_force(z * scale, method)?;
                    let mut row = vec![z, f.force, f.error];
                    if let Some(si) = f.force_si {
                        row.push(si);
                    }
                    Ok(row)
                });
                d
            })
            .collect()
    }))
}

fn plan_spectrum(r: &Reader<'_>, cfg: &ScenarioConfig, name: &str) -> Result<Plan> {
    let wt = r.req_f64("dipole.omega_tilde")?;
    let ga = r.req_f64("dipole.gamma_a")?;
    let rates = DressedRates::new(wt, ga).map_err(|e| config_err(format!("dipole: {e}")))?;
    let methods = read_methods(r, &["fdt", "qrt"])?;
    let ws = read_sweep(r, "sweep")?;
    let atom = TwoLevelAtom::new(rates, ComplexTensor3::identity());
    let header = base_header(&format!("normalized power spectrum s = S·(dd/(π ω̃))⁻¹ ({name})"), cfg);
    let name = name.to_string();
    Ok(Box::new(move || {
        methods
            .iter()
            .map(|m| {
                let mut d = Dataset::new(format!("{name}_{m}"), header.clone(), &["omega", "s", "error"]);
                let poles = atom.poles();
                d.rows = par_rows(&ws, |&w| {
                    let s = if m == "fdt" {
                        power_spectrum_fdt(w, &atom)?
                    } else {
                        power_spectrum_qrt(w, &poles)
                    };
                    Ok(vec![w, PI * wt * s.m[0][0].re, 0.0])
                });
                d
            })
            .collect()
    }))
}

fn plan_friction(r: &Reader<'_>, cfg: &ScenarioConfig, name: &str) -> Result<Plan> {
    let s = read_surface(r)?;
    let dipole = read_dipole(r, s.omega_p_ev)?;
    let methods = read_methods(
        r,
        &["second_order", "closed_form", "asympt1", "asympt2", "asympt3", "fdt_windowed", "fdt_cubic", "qrt_linear"],
    )?;
    let z = r.req_f64("geometry.z_a")?;
    let vs = read_sweep(r, "sweep")?;
    let base = FrictionScenario::new(0.0, z, s.surface, dipole)
        .map_err(|e| config_err(format!("friction scenario: {e}")))?
        .with_rel_tol(read_rel_tol(r, 1e-8)?);
    if vs.iter().any(|v| v.abs() >= 1.0) {
        return Err(config_err("sweep: velocities must satisfy |v| < 1"));
    }
    let header = base_header(&format!("quantum friction velocity scan ({name})"), cfg);
    let name = name.to_string();
    Ok(Box::new(move || {
        methods
            .iter()
            .map(|m| {
                let cols: &[&str] = if m == "qrt_linear" {
                    &["v", "qrt_linear", "nm_linear", "residual", "error"]
                } else {
                    &["v", "force", "error"]
                };
                let mut d = Dataset::new(format!("{name}_{m}"), header.clone(), cols);
                d.rows = par_rows(&vs, |&v| {
                    let sc = base.with_velocity(v);
                    let f = match m.as_str() {
                        "second_order" => friction_second_order_numeric(&sc)?,
                        "closed_form" => friction_plasma_closed_form(&sc)?,
                        "asympt1" => friction_asymptotic(&sc, AsymptoticRegime::Radiative)?,
                        "asympt2" => friction_asymptotic(&sc, AsymptoticRegime::SurfaceOhmic)?,
                        "asympt3" => friction_asymptotic(&sc, AsymptoticRegime::Intrinsic)?,
                        "fdt_windowed" => friction_fdt_low_velocity(&sc)?.windowed,
                        "fdt_cubic" => friction_fdt_low_velocity(&sc)?.cubic(),
                        _ => {
                            let q = friction_qrt_with_cancellation(&sc)?;
                            return Ok(vec![v, q.qrt_linear, q.nm_linear, q.residual, q.error]);
                        }
                    };
                    Ok(vec![v, f.force, f.error])
                });
                d
            })
            .collect()
    }))
}

/// The four figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl std::str::FromStr for Figure {
    type Err = DispersiaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            o => Err(config_err(format!("unknown figure `{o}` (fig2, fig3, fig4, fig5)"))),
        }
    }
}

const FIG2_PRESET: &str = r#"
surface.omega_p_eV = 9.0
surface.gamma_over_omega_p = 5e-3
surface.reflection = "fresnel"
dipole.wavelength_nm = 780.241
dipole.alpha0_si = 5.26e-39
hypothetical.gamma_free_over_omega_a = 1e-6
fullerene.gamma_free_over_omega_a = 0.3333333333333333
sweep.unit = "lambda_p"
sweep.min = 0.01
sweep.max = 10.0
sweep.points = 31
sweep.spacing = "log"
numerics.rel_tol = 1e-9
numerics.include_shift = false
"#;

const FIG3_PRESET: &str = r#"
dipole.gamma_a_over_omega_tilde = 1e-2
sweep.min = -0.2
sweep.max = 2.0
sweep.points = 1101
"#;

const FIG4_PRESET: &str = r#"
dipole.omega_a = 0.2
geometry.z_a = 0.05
surface.gammas = [0.0, 1e-3, 1e-1]
sweep.min = 0.0005
sweep.max = 0.04
sweep.points = 80
orientation.velocity = 0.04
orientation.theta_points = 19
orientation.phis = [0.0, 0.7853981633974483, 1.5707963267948966]
numerics.rel_tol = 1e-8
"#;

const FIG5_PRESET: &str = r#"
dipole.omega_a = 0.2
geometry.z_a = 0.05
surface.gamma = 0.1
dipole.gammas = [0.1, 1e-3, 0.0]
sweep.min = 0.001
sweep.max = 0.04
sweep.points = 60
sweep.spacing = "log"
numerics.rel_tol = 1e-8
"#;

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    /// The preset with `overrides` (`key=value`) applied.
    pub fn config(&self, overrides: &[String]) -> Result<ScenarioConfig> {
        let text = match self {
            Figure::Fig2 => FIG2_PRESET,
            Figure::Fig3 => FIG3_PRESET,
            Figure::Fig4 => FIG4_PRESET,
            Figure::Fig5 => FIG5_PRESET,
        };
        let mut cfg = ScenarioConfig::parse(text)?;
        for o in overrides {
            cfg.set(o)?;
        }
        Ok(cfg)
    }
}

/// Builds the datasets for a figure preset.
pub fn emit_figure_dataset(figure: Figure, overrides: &[String]) -> Result<Vec<Dataset>> {
    let cfg = figure.config(overrides)?;
    let r = cfg.reader();
    let plan = match figure {
        Figure::Fig2 => plan_fig2(&r, &cfg)?,
        Figure::Fig3 => plan_fig3(&r, &cfg)?,
        Figure::Fig4 => plan_fig4(&r, &cfg)?,
        Figure::Fig5 => plan_fig5(&r, &cfg)?,
    };
    r.finish()?;
    Ok(plan())
}

fn plan_fig2(r: &Reader<'_>, cfg: &ScenarioConfig) -> Result<Plan> {
    let s = read_surface(r)?;
    let rb = read_dipole(r, s.omega_p_ev)?;
    let with_rate = |key: &str| -> Result<DipoleModel> {
        let g = r.req_f64(key)?;
        DipoleModel::atom_from_free_rate(rb.omega_a, g * rb.omega_a, rb.orientation)
            .map_err(|e| config_err(format!("{key}: {e}")))
    };
    let configs = vec![
        ("rb87", rb),
        ("hypothetical", with_rate("hypothetical.gamma_free_over_omega_a")?),
        ("fullerene", with_rate("fullerene.gamma_free_over_omega_a")?),
    ];
    let unit = r.opt_str("sweep.unit")?.unwrap_or_else(|| "lambda_p".into());
    if unit != "lambda_p" {
        return Err(config_err("sweep.unit: fig2 distances are in lambda_p"));
    }
    let zs = read_sweep(r, "sweep")?;
    if zs.iter().any(|&z| !(z > 0.0)) {
        return Err(config_err("sweep: distances must be positive"));
    }
    let rel_tol = read_rel_tol(r, 1e-9)?;
    let include_shift = r.opt_bool("numerics.include_shift")?.unwrap_or(false);
    let lambda_p = 2.0 * PI / s.surface.omega_p;
    let header = base_header("Casimir-Polder force, exact (FDT) vs Markovian (QRT)", cfg);
    let reflection = s.reflection;
    let surface = s.surface;
    Ok(Box::new(move || {
        configs
            .into_iter()
            .map(|(label, model)| {
                let mut cp = CasimirPolder::new(model, HalfSpace::new(surface, reflection));
                cp.rel_tol = rel_tol;
                cp.include_shift = include_shift;
                let mut h = header.clone();
                h.push(format!(
                    "{label}: omega_a = {:.12e}, |d|^2 = {:.12e}, gamma_free = {:.12e}",
                    model.omega_a, model.d_squared, model.gamma_free
                ));
                let mut d = Dataset::new(
                    format!("fig2_{label}"),
                    h,
                    &["z_over_lambda_p", "F_FDT", "F_QRT", "diff_abs", "diff_rel", "error"],
                );
                d.rows = par_rows(&zs, |&z| {
                    let row = cp.cp_distance_scan(&[z * lambda_p])?[0];
                    Ok(vec![z, row.fdt, row.qrt, row.diff_abs, row.diff_rel, row.error])
                });
                d
            })
            .collect()
    }))
}

fn plan_fig3(r: &Reader<'_>, cfg: &ScenarioConfig) -> Result<Plan> {
    let g = r.req_f64("dipole.gamma_a_over_omega_tilde")?;
    let rates = DressedRates::new(1.0, g).map_err(|e| config_err(format!("dipole.gamma_a_over_omega_tilde: {e}")))?;
    let ws = read_sweep(r, "sweep")?;
    let atom = TwoLevelAtom::new(rates, ComplexTensor3::identity());
    let header = base_header("normalized power spectra s = S·(dd/(π ω̃))⁻¹ against ω/ω̃", cfg);
    Ok(Box::new(move || {
        let poles = atom.poles();
        let mut d = Dataset::new("fig3", header, &["omega_over_omega_tilde", "s_FDT", "s_QRT", "error"]);
        d.rows = par_rows(&ws, |&w| {
            let f = power_spectrum_fdt(w, &atom)?;
            let q = power_spectrum_qrt(w, &poles);
            Ok(vec![w, PI * f.m[0][0].re, PI * q.m[0][0].re, 0.0])
        });
        vec![d]
    }))
}

fn fig_dipole(r: &Reader<'_>, kind: DipoleKind, gamma: f64) -> Result<DipoleModel> {
    let wa = r.req_f64("dipole.omega_a")?;
    DipoleModel::new(1.0, DipoleOrientation::Isotropic, wa, gamma, 0.0, kind)
        .map_err(|e| config_err(format!("dipole: {e}")))
}

fn plan_fig4(r: &Reader<'_>, cfg: &ScenarioConfig) -> Result<Plan> {
    let atom = fig_dipole(r, DipoleKind::TwoLevel, 0.0)?;
    let z = r.req_f64("geometry.z_a")?;
    let gammas = r.opt_f64_list("surface.gammas")?.ok_or_else(|| config_err("surface.gammas: required"))?;
    if gammas.is_empty() {
        return Err(config_err("surface.gammas: empty"));
    }
    let vs = read_sweep(r, "sweep")?;
    let rel_tol = read_rel_tol(r, 1e-8)?;
    let v_or = r.req_f64("orientation.velocity")?;
    let nt = r.req_f64("orientation.theta_points")?;
    if !(nt >= 2.0) || nt.fract() != 0.0 {
        return Err(config_err("orientation.theta_points: need an integer ≥ 2"));
    }
    let phis = r.opt_f64_list("orientation.phis")?.ok_or_else(|| config_err("orientation.phis: required"))?;
    let scenarios = gammas
        .iter()
        .map(|&g| {
            let surface = SurfaceModel::drude(g).map_err(|e| config_err(format!("surface.gammas: {e}")))?;
            FrictionScenario::new(0.0, z, surface, atom)
                .map(|s| s.with_rel_tol(rel_tol))
                .map_err(|e| config_err(format!("fig4: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let oriented = FrictionScenario::new(v_or, z, SurfaceModel::drude(0.0)?, atom)
        .map_err(|e| config_err(format!("orientation.velocity: {e}")))?;
    let header = base_header("second-order friction of an atom, F/|F0| against v/c per surface damping", cfg);
    let nt = nt as usize;
    Ok(Box::new(move || {
        let mut cols: Vec<String> = vec!["v".into()];
        cols.extend(gammas.iter().map(|g| format!("F_Gamma_{g:e}")));
        cols.push("error".into());
        let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut d = Dataset::new("fig4", header.clone(), &col_refs);
        d.rows = par_rows(&vs, |&v| {
            let mut row = vec![v];
            let mut err = 0.0f64;
            for s in &scenarios {
                let f = friction_second_order_numeric(&s.with_velocity(v))?;
                row.push(f.force);
                err = err.max(f.error);
            }
            row.push(err);
            Ok(row)
        });
        let mut grid = Vec::new();
        for &phi in &phis {
            for i in 0..nt {
                grid.push((PI * i as f64 / (nt - 1) as f64, phi));
            }
        }
        let mut o = Dataset::new(
            "fig4_orientation",
            header,
            &["theta", "phi", "A0", "A2", "F_closed_form", "error"],
        );
        o.rows = par_rows(&grid, |&(theta, phi)| {
            let mut s = oriented;
            s.dipole.orientation = DipoleOrientation::Fixed { theta, phi };
            let f = friction_plasma_closed_form(&s)?;
            if !(f.force < 0.0) {
                return Err(DispersiaError::PhysicalRegime(format!(
                    "orientation kernel is not positive at theta = {theta}, phi = {phi}"
                )));
            }
            let a = orientation_factors(theta, phi);
            Ok(vec![theta, phi, a.a0, a.a2, f.force, 0.0])
        });
        vec![d, o]
    }))
}

fn plan_fig5(r: &Reader<'_>, cfg: &ScenarioConfig) -> Result<Plan> {
    let z = r.req_f64("geometry.z_a")?;
    let gs = r.req_f64("surface.gamma")?;
    let gammas = r.opt_f64_list("dipole.gammas")?.ok_or_else(|| config_err("dipole.gammas: required"))?;
    if gammas.is_empty() {
        return Err(config_err("dipole.gammas: empty"));
    }
    let surface = SurfaceModel::drude(gs).map_err(|e| config_err(format!("surface.gamma: {e}")))?;
    let wa = r.req_f64("dipole.omega_a")?;
    let vs = read_sweep(r, "sweep")?;
    let rel_tol = read_rel_tol(r, 1e-8)?;
    let mk = |kind, g| -> Result<FrictionScenario> {
        let d = DipoleModel::new(1.0, DipoleOrientation::Isotropic, wa, g, 0.0, kind)
            .map_err(|e| config_err(format!("dipole.gammas: {e}")))?;
        FrictionScenario::new(0.0, z, surface, d)
            .map(|s| s.with_rel_tol(rel_tol))
            .map_err(|e| config_err(format!("fig5: {e}")))
    };
    let curves = gammas
        .iter()
        .map(|&g| mk(if g > 0.0 { DipoleKind::Oscillator } else { DipoleKind::TwoLevel }, g))
        .collect::<Result<Vec<_>>>()?;
    let undamped = mk(DipoleKind::TwoLevel, 0.0)?;
    let intrinsic = gammas.iter().copied().filter(|&g| g > 0.0).fold(f64::NAN, f64::max);
    let cubic = if intrinsic.is_finite() && gs > 0.0 {
        Some(mk(DipoleKind::Oscillator, intrinsic)?)
    } else {
        None
    };
    let header = base_header(
        "second-order friction with intrinsic damping gamma and surface damping Gamma, F/|F0| against v/c",
        cfg,
    );
    Ok(Box::new(move || {
        let mut cols: Vec<String> = vec!["v".into()];
        cols.extend(gammas.iter().map(|g| format!("F_gamma_{g:e}_Gamma_{gs:e}")));
        if gs > 0.0 {
            cols.push("asympt2".into());
        }
        if cubic.is_some() {
            cols.push(format!("asympt3_gamma_{intrinsic:e}"));
        }
        cols.push("closed_form_Gamma_0".into());
        cols.push("error".into());
        let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut d = Dataset::new("fig5", header, &col_refs);
        d.rows = par_rows(&vs, |&v| {
            let mut row = vec![v];
            let mut err = 0.0f64;
            for s in &curves {
                let f = friction_second_order_numeric(&s.with_velocity(v))?;
                row.push(f.force);
                err = err.max(f.error);
            }
            let u = undamped.with_velocity(v);
            if gs > 0.0 {
                row.push(friction_asymptotic(&u, AsymptoticRegime::SurfaceOhmic)?.force);
            }
            if let Some(c) = &cubic {
                row.push(friction_asymptotic(&c.with_velocity(v), AsymptoticRegime::Intrinsic)?.force);
            }
            row.push(friction_plasma_closed_form(&u)?.force);
            row.push(err);
            Ok(row)
        });
        vec![d]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CP: &str = r#"
kind = "casimir_polder"
methods = ["fdt", "qrt"]
[surface]
gamma = 0.01
reflection = "quasistatic"
[dipole]
omega_a = 0.25
gamma_free = 1e-3
[sweep]
values = [0.5, 1.0]
"#;

    #[test]
    fn flattens_tables_into_dotted_keys() {
        let c = ScenarioConfig::parse(CP).unwrap();
        let keys: Vec<&str> = c.keys().collect();
        assert!(keys.contains(&"surface.gamma") && keys.contains(&"sweep.values"));
    }

    #[test]
    fn runs_a_small_cp_scan() {
        let c = ScenarioConfig::parse(CP).unwrap();
        let (out, data) = run_scenario(&c).unwrap();
        assert_eq!(out.name, "casimir_polder");
        assert_eq!(data.len(), 2);
        for d in &data {
            assert!(d.failure().is_none());
            assert_eq!(d.rows.len(), 2);
            let f = d.rows[0].as_ref().unwrap()[1];
            assert!(f < 0.0, "attraction is negative");
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let mut c = ScenarioConfig::parse(CP).unwrap();
        c.set("dipole.omega_typo=0.3").unwrap();
        let e = run_scenario(&c).unwrap_err();
        assert!(matches!(e, DispersiaError::Configuration(ref m) if m.contains("dipole.omega_typo")), "{e}");
    }

    #[test]
    fn override_parses_toml_then_falls_back_to_string() {
        let mut c = ScenarioConfig::default();
        c.set("a=1e-3").unwrap();
        c.set("b=fresnel").unwrap();
        c.set("c=[1, 2]").unwrap();
        assert_eq!(c.values["a"], toml::Value::Float(1e-3));
        assert_eq!(c.values["b"], toml::Value::String("fresnel".into()));
        assert!(matches!(c.values["c"], toml::Value::Array(_)));
        assert!(c.set("novalue").is_err());
    }

    #[test]
    fn conflicting_and_missing_fields() {
        let mut c = ScenarioConfig::parse(CP).unwrap();
        c.set("surface.gamma_over_omega_p=0.01").unwrap();
        assert!(run_scenario(&c).is_err());
        let mut c = ScenarioConfig::parse(CP).unwrap();
        c.set("kind=\"nothing\"").unwrap();
        assert!(matches!(run_scenario(&c), Err(DispersiaError::Configuration(_))));
        let c = ScenarioConfig::parse("kind = \"friction\"").unwrap();
        assert!(matches!(run_scenario(&c), Err(DispersiaError::Configuration(_))));
    }

    #[test]
    fn log_sweep_hits_endpoints() {
        let c = ScenarioConfig::parse("s.min = 1e-3\ns.max = 1.0\ns.points = 4\ns.spacing = \"log\"").unwrap();
        let r = c.reader();
        let v = read_sweep(&r, "s").unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[0] - 1e-3).abs() < 1e-18 && (v[3] - 1.0).abs() < 1e-15);
        assert!((v[1] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn derived_free_rate_matches_strength() {
        let c = ScenarioConfig::parse("dipole.omega_a = 0.5\ndipole.d_squared = 2.0").unwrap();
        let d = read_dipole(&c.reader(), None).unwrap();
        assert!((d.gamma_free - 0.125 * 2.0 / (3.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn failed_rows_become_comments() {
        let mut d = Dataset::new("t", vec!["h".into()], &["x", "y"]);
        d.rows = vec![Ok(vec![1.0, 2.0]), Err(DispersiaError::NonFinite("boom".into())), Ok(vec![f64::NAN, 0.0])];
        let s = d.to_csv();
        assert!(s.starts_with("# h\n# status: partial"));
        assert!(s.contains("1.00000000000e0,2.00000000000e0\n"));
        assert!(s.contains("# row 1 failed") && s.contains("# row 2 failed"));
        assert!(d.failure().is_some());
    }

    #[test]
    fn figure_names_parse() {
        for f in ["fig2", "fig3", "fig4", "fig5"] {
            assert_eq!(f.parse::<Figure>().unwrap().name(), f);
        }
        assert!("fig1".parse::<Figure>().is_err());
    }

    #[test]
    fn fig3_override_changes_grid() {
        let d = emit_figure_dataset(Figure::Fig3, &["sweep.points=5".into()]).unwrap();
        assert_eq!(d[0].rows.len(), 5);
        assert!(emit_figure_dataset(Figure::Fig3, &["sweep.bogus=1".into()]).is_err());
    }
}

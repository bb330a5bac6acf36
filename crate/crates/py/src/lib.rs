//! Python bindings: surfaces, dipoles, Casimir-Polder forces, quantum friction,
//! figure datasets and the acceptance checks.

use dispersia_core::casimir_polder::{CasimirPolder as CoreCp, CpMethod};
use dispersia_core::friction::{
    friction_asymptotic, friction_fdt_low_velocity, friction_plasma_closed_form, friction_qrt_with_cancellation,
    friction_second_order_numeric, AsymptoticRegime, FrictionResult, FrictionScenario,
};
use dispersia_core::green::{HalfSpace, ReflectionModel};
use dispersia_core::material::SurfaceModel;
use dispersia_core::polarizability::{DipoleKind, DipoleModel, DipoleOrientation};
use dispersia_core::scenario::{emit_figure_dataset, Figure};
use dispersia_core::selftest::{run_criterion, Criterion};
use dispersia_core::DispersiaError;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: DispersiaError) -> PyErr {
    match e {
        DispersiaError::Configuration(_) | DispersiaError::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Drude half-space in units of the surface-plasmon frequency.
#[pyclass(name = "Surface", frozen, from_py_object)]
#[derive(Clone)]
struct PySurface {
    inner: SurfaceModel,
}

#[pymethods]
impl PySurface {
    #[new]
    #[pyo3(signature = (gamma, omega_p = std::f64::consts::SQRT_2))]
    fn new(gamma: f64, omega_p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SurfaceModel::new(omega_p, gamma).map_err(to_py)?,
        })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn omega_p(&self) -> f64 {
        self.inner.omega_p
    }

    fn permittivity(&self, omega: Complex64) -> PyResult<Complex64> {
        self.inner.permittivity(omega).map_err(to_py)
    }

    fn reflection(&self, omega: Complex64) -> PyResult<Complex64> {
        self.inner.quasistatic_reflection(omega).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Surface(gamma={}, omega_p={})", self.inner.gamma, self.inner.omega_p)
    }
}

/// Dipole: `d_squared` or `gamma_free` (the other follows from
/// `gamma_free = omega_a^3 d_squared / (3 pi)`), optional fixed orientation.
#[pyclass(name = "Dipole", frozen, from_py_object)]
#[derive(Clone)]
struct PyDipole {
    inner: DipoleModel,
}

#[pymethods]
impl PyDipole {
    #[new]
    #[pyo3(signature = (omega_a, d_squared = None, gamma_free = None, gamma_intrinsic = 0.0, kind = "two_level", theta = None, phi = 0.0))]
    fn new(
        omega_a: f64,
        d_squared: Option<f64>,
        gamma_free: Option<f64>,
        gamma_intrinsic: f64,
        kind: &str,
        theta: Option<f64>,
        phi: f64,
    ) -> PyResult<Self> {
        let kind = match kind {
            "two_level" => DipoleKind::TwoLevel,
            "oscillator" => DipoleKind::Oscillator,
            o => return Err(PyValueError::new_err(format!("unknown dipole kind `{o}` (two_level, oscillator)"))),
        };
        let w3 = omega_a.powi(3);
        let (d2, gf) = match (d_squared, gamma_free) {
            (Some(d), Some(g)) => (d, g),
            (Some(d), None) => (d, w3 * d / (3.0 * std::f64::consts::PI)),
            (None, Some(g)) => (3.0 * std::f64::consts::PI * g / w3, g),
            (None, None) => return Err(PyValueError::new_err("give d_squared or gamma_free")),
        };
        let orientation = match theta {
            None => DipoleOrientation::Isotropic,
            Some(theta) => DipoleOrientation::Fixed { theta, phi },
        };
        Ok(Self {
            inner: DipoleModel::new(d2, orientation, omega_a, gamma_intrinsic, gf, kind).map_err(to_py)?,
        })
    }

    #[getter]
    fn omega_a(&self) -> f64 {
        self.inner.omega_a
    }

    #[getter]
    fn d_squared(&self) -> f64 {
        self.inner.d_squared
    }

    #[getter]
    fn gamma_free(&self) -> f64 {
        self.inner.gamma_free
    }

    #[getter]
    fn alpha0(&self) -> f64 {
        self.inner.alpha0()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dipole(omega_a={}, d_squared={}, gamma_free={}, gamma_intrinsic={})",
            self.inner.omega_a, self.inner.d_squared, self.inner.gamma_free, self.inner.gamma_intrinsic
        )
    }
}

fn cp_method(name: &str) -> PyResult<CpMethod> {
    Ok(match name {
        "fdt" => CpMethod::Fdt,
        "qrt" => CpMethod::Qrt,
        "nm" => CpMethod::NonMarkovian,
        "lifshitz" => CpMethod::Lifshitz,
        "bare" => CpMethod::Bare,
        o => return Err(PyValueError::new_err(format!("unknown method `{o}` (fdt, qrt, nm, lifshitz, bare)"))),
    })
}

/// Casimir-Polder force `F/|F0|` on a dipole above a surface.
#[pyclass(name = "CasimirPolder", frozen)]
struct PyCasimirPolder {
    inner: CoreCp,
}

#[pymethods]
impl PyCasimirPolder {
    #[new]
    #[pyo3(signature = (dipole, surface, reflection = "fresnel", include_shift = false, rel_tol = 1e-9))]
    fn new(dipole: &PyDipole, surface: &PySurface, reflection: &str, include_shift: bool, rel_tol: f64) -> PyResult<Self> {
        let reflection = match reflection {
            "fresnel" => ReflectionModel::Fresnel,
            "quasistatic" => ReflectionModel::QuasiStatic,
            "perfect" => ReflectionModel::PerfectReflector,
            o => return Err(PyValueError::new_err(format!("unknown reflection `{o}` (fresnel, quasistatic, perfect)"))),
        };
        let mut inner = CoreCp::new(dipole.inner, HalfSpace::new(surface.inner, reflection));
        inner.include_shift = include_shift;
        inner.rel_tol = rel_tol;
        Ok(Self { inner })
    }

    /// `(force, error)` at distance `z`.
    #[pyo3(signature = (z, method = "fdt"))]
    fn force(&self, py: Python<'_>, z: f64, method: &str) -> PyResult<(f64, f64)> {
        let m = cp_method(method)?;
        let r = py.detach(|| self.inner.cp_force(z, m)).map_err(to_py)?;
        Ok((r.force, r.error))
    }

    /// Rows `(z, fdt, qrt, diff_abs, diff_rel, error)`.
    fn distance_scan(&self, py: Python<'_>, zs: Vec<f64>) -> PyResult<Vec<(f64, f64, f64, f64, f64, f64)>> {
        let rows = py.detach(|| self.inner.cp_distance_scan(&zs)).map_err(to_py)?;
        Ok(rows
            .into_iter()
            .map(|r| (r.z_a, r.fdt, r.qrt, r.diff_abs, r.diff_rel, r.error))
            .collect())
    }
}

/// Quantum friction `F/|F0|` on a dipole moving at height `z_a`.
#[pyclass(name = "Friction", frozen)]
struct PyFriction {
    base: FrictionScenario,
}

#[pymethods]
impl PyFriction {
    #[new]
    #[pyo3(signature = (z_a, surface, dipole, rel_tol = 1e-8))]
    fn new(z_a: f64, surface: &PySurface, dipole: &PyDipole, rel_tol: f64) -> PyResult<Self> {
        let base = FrictionScenario::new(0.0, z_a, surface.inner, dipole.inner)
            .map_err(to_py)?
            .with_rel_tol(rel_tol);
        Ok(Self { base })
    }

    /// `(force, error)` at velocity `v`. Methods: second_order, closed_form,
    /// asympt1, asympt2, asympt3, fdt_windowed, fdt_cubic.
    #[pyo3(signature = (v, method = "second_order"))]
    fn force(&self, py: Python<'_>, v: f64, method: &str) -> PyResult<(f64, f64)> {
        let s = self.base.with_velocity(v);
        let run = |f: fn(&FrictionScenario) -> dispersia_core::Result<FrictionResult>| py.detach(|| f(&s));
        let r = match method {
            "second_order" => run(friction_second_order_numeric),
            "closed_form" => run(friction_plasma_closed_form),
            "asympt1" => run(|s| friction_asymptotic(s, AsymptoticRegime::Radiative)),
            "asympt2" => run(|s| friction_asymptotic(s, AsymptoticRegime::SurfaceOhmic)),
            "asympt3" => run(|s| friction_asymptotic(s, AsymptoticRegime::Intrinsic)),
            "fdt_windowed" => run(|s| friction_fdt_low_velocity(s).map(|r| r.windowed)),
            "fdt_cubic" => run(|s| friction_fdt_low_velocity(s).map(|r| r.cubic())),
            o => return Err(PyValueError::new_err(format!("unknown friction method `{o}`"))),
        }
        .map_err(to_py)?;
        Ok((r.force, r.error))
    }

    /// `(qrt_linear, nm_linear, residual)`: the Markovian linear drag and its cancelling partner.
    fn linear_terms(&self, py: Python<'_>, v: f64) -> PyResult<(f64, f64, f64)> {
        let s = self.base.with_velocity(v);
        let t = py.detach(|| friction_qrt_with_cancellation(&s)).map_err(to_py)?;
        Ok((t.qrt_linear, t.nm_linear, t.residual))
    }
}

/// Force normalization `F0` in newtons for `alpha0` (F m^2) and `omega_sp` (rad/s).
#[pyfunction]
fn normalization_f0(alpha0: f64, omega_sp: f64) -> PyResult<f64> {
    dispersia_core::units::normalization_f0(alpha0, omega_sp).map_err(to_py)
}

/// CSV text per dataset name for a figure preset, with optional `key=value` overrides.
#[pyfunction]
#[pyo3(signature = (figure, overrides = Vec::new()))]
fn figure_csv(py: Python<'_>, figure: &str, overrides: Vec<String>) -> PyResult<Vec<(String, String)>> {
    let fig: Figure = figure.parse().map_err(to_py)?;
    let data = py.detach(|| emit_figure_dataset(fig, &overrides)).map_err(to_py)?;
    if let Some(e) = data.iter().find_map(|d| d.failure()) {
        return Err(to_py(e));
    }
    Ok(data.into_iter().map(|d| (d.name.clone(), d.to_csv())).collect())
}

/// `(id, passed, detail)` for each requested acceptance check (all by default).
#[pyfunction]
#[pyo3(signature = (ids = None))]
fn selftest(py: Python<'_>, ids: Option<Vec<String>>) -> PyResult<Vec<(String, bool, String)>> {
    let checks: Vec<Criterion> = match ids {
        None => Criterion::ALL.to_vec(),
        Some(ids) => ids
            .iter()
            .map(|id| Criterion::from_id(id).ok_or_else(|| PyValueError::new_err(format!("unknown check `{id}`"))))
            .collect::<PyResult<_>>()?,
    };
    Ok(py.detach(|| {
        checks
            .into_iter()
            .map(|c| {
                let o = run_criterion(c);
                (c.id().to_string(), o.passed, o.detail)
            })
            .collect()
    }))
}

#[pymodule]
fn dispersia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurface>()?;
    m.add_class::<PyDipole>()?;
    m.add_class::<PyCasimirPolder>()?;
    m.add_class::<PyFriction>()?;
    m.add_function(wrap_pyfunction!(normalization_f0, m)?)?;
    m.add_function(wrap_pyfunction!(figure_csv, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

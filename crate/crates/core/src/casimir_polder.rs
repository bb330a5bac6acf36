//! Stationary Casimir-Polder force on an atom above the half-space.
//!
//! Every method is evaluated along the imaginary frequency axis,
//! `F = (1/π)∫₀^∞ dξ Tr[α_form(iξ)·∂_z g(iξ)]`, and reported in units of
//! `|F₀|`. Attraction toward the surface is negative.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DispersiaError, Result};
use crate::green::HalfSpace;
use crate::polarizability::{
    surface_modified_rates, DipoleKind, DipoleModel, DressedOscillator, DressedRates, Polarizability, TwoLevelAtom,
};
use crate::quad::{try_integrate_adaptive, Domain, QuadResult, QuadSpec, Transform};
use crate::tensor::ComplexTensor3;
use crate::units::{natural_force_unit, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpMethod {
    /// Exact response of the dressed atom.
    Fdt,
    /// Markovian form: the `±iξ` average of the two-level polarizability.
    Qrt,
    /// Scattering form with multiple reflections `(1 − α_vac·g)⁻¹`.
    Lifshitz,
    /// Undressed polarizability.
    Bare,
    /// Difference between the exact and the Markovian force.
    NonMarkovian,
}

impl fmt::Display for CpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CpMethod::Fdt => "fdt",
            CpMethod::Qrt => "qrt",
            CpMethod::Lifshitz => "lifshitz",
            CpMethod::Bare => "bare",
            CpMethod::NonMarkovian => "nm",
        };
        f.write_str(s)
    }
}

/// A Casimir-Polder force value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPResult {
    pub z_a: f64,
    /// Force in units of `|F₀|`; negative means attraction.
    pub force: f64,
    /// Force in newtons, when a unit system is attached.
    pub force_si: Option<f64>,
    /// Quadrature error estimate in units of `|F₀|`.
    pub error: f64,
    pub method: CpMethod,
}

/// One point of a distance scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpScanRow {
    pub z_a: f64,
    pub fdt: f64,
    pub qrt: f64,
    pub diff_abs: f64,
    pub diff_rel: f64,
    pub error: f64,
}

/// Atom, surface, and numerical settings for the force engines.
#[derive(Debug, Clone, PartialEq)]
pub struct CasimirPolder {
    pub model: DipoleModel,
    pub half_space: HalfSpace,
    /// Include the surface-induced level shift in `ω̃_a`.
    pub include_shift: bool,
    pub rel_tol: f64,
    pub units: Option<UnitSystem>,
}

impl CasimirPolder {
    pub fn new(model: DipoleModel, half_space: HalfSpace) -> Self {
        Self {
            model,
            half_space,
            include_shift: true,
            rel_tol: 1e-9,
            units: None,
        }
    }

    fn force_scale(&self) -> f64 {
        1.0 / natural_force_unit(1.0, self.model.omega_a)
    }

    fn result(&self, z_a: f64, q: QuadResult<f64>, method: CpMethod) -> CPResult {
        let s = self.force_scale() / self.model.d_squared;
        let force = q.value * s;
        CPResult {
            z_a,
            force,
            force_si: self.units.map(|u| u.force_to_si(force)),
            error: q.error * s,
            method,
        }
    }

    fn zero_result(&self, z_a: f64, method: CpMethod) -> CPResult {
        CPResult {
            z_a,
            force: 0.0,
            force_si: self.units.map(|_| 0.0),
            error: 0.0,
            method,
        }
    }

    fn xi_spec(&self, z_a: f64) -> QuadSpec {
        let scale = (0.5 / z_a).min(1.0);
        QuadSpec::new(self.rel_tol)
            .with_abs_tol(1e-300)
            .with_transform(Transform::Tan { scale })
            .with_breakpoints([self.model.omega_a, self.half_space.surface.omega_sp()])
    }

    fn dressed_rates(&self, z_a: f64) -> Result<DressedRates> {
        surface_modified_rates(z_a, &self.model, &self.half_space, self.include_shift, 0.1 * self.rel_tol)
    }

    /// `(1/π)∫₀^∞ dξ Re f(ξ, ∂_z g(iξ))`.
    fn xi_integral(
        &self,
        z_a: f64,
        f: impl Fn(f64, &ComplexTensor3) -> Result<Complex64>,
    ) -> Result<QuadResult<f64>> {
        let gtol = 0.1 * self.rel_tol;
        try_integrate_adaptive(
            |xi| {
                let dg = self.half_space.coincident_green_zderiv(z_a, Complex64::new(0.0, xi), gtol)?.value;
                Ok(f(xi, &dg)?.re / PI)
            },
            Domain::SemiInfinite(0.0),
            &self.xi_spec(z_a),
        )
    }

    fn require_two_level(&self, method: CpMethod) -> Result<()> {
        if self.model.kind != DipoleKind::TwoLevel {
            return Err(DispersiaError::Configuration(format!(
                "the {method} Casimir-Polder form is defined for the two-level model"
            )));
        }
        Ok(())
    }

    /// Casimir-Polder force at distance `z_a` with the given method.
    pub fn cp_force(&self, z_a: f64, method: CpMethod) -> Result<CPResult> {
        if !(z_a > 0.0) || !z_a.is_finite() {
            return Err(DispersiaError::Domain(format!("distance must be positive, got {z_a}")));
        }
        self.model.validate()?;
        if self.model.d_squared == 0.0 {
            return Ok(self.zero_result(z_a, method));
        }
        let dd = self.model.dd();
        let q = match (method, self.model.kind) {
            (CpMethod::Fdt, DipoleKind::TwoLevel) => {
                let atom = TwoLevelAtom::new(self.dressed_rates(z_a)?, dd);
                self.xi_integral(z_a, |xi, dg| {
                    let a = atom.alpha(Complex64::new(0.0, xi))?;
                    Ok(ComplexTensor3::trace_product(&a, dg))
                })?
            }
            (CpMethod::Fdt, DipoleKind::Oscillator) => {
                let osc = DressedOscillator::new(self.model, self.half_space, z_a, 0.1 * self.rel_tol)?;
                let gtol = 0.1 * self.rel_tol;
                self.xi_integral(z_a, |xi, dg| {
                    let w = Complex64::new(0.0, xi);
                    let g = self.half_space.coincident_green(z_a, w, gtol)?.value;
                    osc.check_stability(xi, &g)?;
                    let a = osc.alpha_with_green(w, &g)?;
                    Ok(ComplexTensor3::trace_product(&a, dg))
                })?
            }
            (CpMethod::Qrt, _) => {
                self.require_two_level(method)?;
                let atom = TwoLevelAtom::new(self.dressed_rates(z_a)?, dd);
                self.xi_integral(z_a, |xi, dg| {
                    let up = atom.alpha(Complex64::new(0.0, xi))?;
                    let down = atom.alpha(Complex64::new(0.0, -xi))?;
                    Ok(ComplexTensor3::trace_product(&(up + down).scale(0.5), dg))
                })?
            }
            (CpMethod::NonMarkovian, _) => return self.cp_nm_correction(z_a),
            (CpMethod::Lifshitz, kind) => {
                let gtol = 0.1 * self.rel_tol;
                let vac: Box<dyn Polarizability> = match kind {
                    DipoleKind::Oscillator => Box::new(self.model.vacuum_oscillator()),
                    DipoleKind::TwoLevel => Box::new(TwoLevelAtom::new(
                        DressedRates::new(self.model.omega_a, self.model.gamma_free)?,
                        dd,
                    )),
                };
                let osc = DressedOscillator::new(self.model, self.half_space, z_a, gtol)?;
                self.xi_integral(z_a, |xi, dg| {
                    let w = Complex64::new(0.0, xi);
                    let g = self.half_space.coincident_green(z_a, w, gtol)?.value;
                    if kind == DipoleKind::Oscillator {
                        osc.check_stability(xi, &g)?;
                    }
                    let a = vac.alpha(w)?;
                    let m = ComplexTensor3::identity() - a.matmul(&g);
                    let inv = m.inverse().map_err(|_| {
                        DispersiaError::PhysicalRegime(format!(
                            "multiple-reflection denominator is singular at z_a = {z_a}, xi = {xi}"
                        ))
                    })?;
                    Ok(ComplexTensor3::trace_product(&inv.matmul(&a), dg))
                })?
            }
            (CpMethod::Bare, kind) => {
                let bare: Box<dyn Polarizability> = match kind {
                    DipoleKind::Oscillator => Box::new(self.model.intrinsic_oscillator()),
                    DipoleKind::TwoLevel => Box::new(TwoLevelAtom::new(DressedRates::new(self.model.omega_a, 0.0)?, dd)),
                };
                self.xi_integral(z_a, |xi, dg| {
                    let a = bare.alpha(Complex64::new(0.0, xi))?;
                    Ok(ComplexTensor3::trace_product(&a, dg))
                })?
            }
        };
        Ok(self.result(z_a, q, method))
    }

    /// `F^nM = (1/π)∫₀^∞ dξ Tr[(α(iξ) − α(−iξ))/2 · ∂_z g(iξ)]`, so that
    /// `F^QRT + F^nM = F^FDT`.
    pub fn cp_nm_correction(&self, z_a: f64) -> Result<CPResult> {
        if !(z_a > 0.0) || !z_a.is_finite() {
            return Err(DispersiaError::Domain(format!("distance must be positive, got {z_a}")));
        }
        self.require_two_level(CpMethod::NonMarkovian)?;
        if self.model.d_squared == 0.0 {
            return Ok(self.zero_result(z_a, CpMethod::NonMarkovian));
        }
        let atom = TwoLevelAtom::new(self.dressed_rates(z_a)?, self.model.dd());
        if atom.rates.gamma_a == 0.0 {
            return Ok(self.zero_result(z_a, CpMethod::NonMarkovian));
        }
        let q = self.xi_integral(z_a, |xi, dg| {
            let up = atom.alpha(Complex64::new(0.0, xi))?;
            let down = atom.alpha(Complex64::new(0.0, -xi))?;
            Ok(ComplexTensor3::trace_product(&(up - down).scale(0.5), dg))
        })?;
        Ok(self.result(z_a, q, CpMethod::NonMarkovian))
    }

    /// FDT and QRT forces with their absolute and relative difference on a
    /// distance grid. Points run in parallel; rows keep the input order.
    pub fn cp_distance_scan(&self, z_values: &[f64]) -> Result<Vec<CpScanRow>> {
        if z_values.is_empty() {
            return Err(DispersiaError::Configuration("distance scan needs at least one point".into()));
        }
        z_values
            .par_iter()
            .map(|&z| {
                let f = self.cp_force(z, CpMethod::Fdt)?;
                let q = self.cp_force(z, CpMethod::Qrt)?;
                let diff = q.force - f.force;
                Ok(CpScanRow {
                    z_a: z,
                    fdt: f.force,
                    qrt: q.force,
                    diff_abs: diff,
                    diff_rel: if f.force != 0.0 { diff / f.force } else { 0.0 },
                    error: f.error + q.error,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::ReflectionModel;
    use crate::material::SurfaceModel;
    use crate::polarizability::DipoleOrientation;
    use approx::assert_relative_eq;

    fn setup(reflection: ReflectionModel, gamma_free: f64) -> CasimirPolder {
        let model = DipoleModel::atom_from_free_rate(0.25, gamma_free, DipoleOrientation::Isotropic).unwrap();
        CasimirPolder::new(model, HalfSpace::new(SurfaceModel::drude(0.00707).unwrap(), reflection))
    }

    #[test]
    fn bare_perfect_reflector_matches_closed_form() {
        // Near-field r = 1: F = −(3/(32π²z⁴))·∫dξ Tr[α(iξ)]·(zz, xx, yy weights) in closed form.
        let cp = setup(ReflectionModel::PerfectReflector, 1e-3);
        let z = 0.05;
        let r = cp.cp_force(z, CpMethod::Bare).unwrap();
        // ∫₀^∞ 2ω/(ω² + ξ²) dξ = π per unit dd; weights sum (1/2 + 1/2 + 1)·d²/3.
        let d2 = cp.model.d_squared;
        let nat = -(1.0 / PI) * PI * (2.0 * d2 / 3.0) * 3.0 / (32.0 * PI * z.powi(4));
        assert_relative_eq!(r.force, nat * PI * 0.25 / d2, max_relative = 1e-8);
        assert!(r.force < 0.0);
    }

    #[test]
    fn zero_dipole_gives_zero_force() {
        let mut cp = setup(ReflectionModel::Fresnel, 1e-3);
        cp.model.d_squared = 0.0;
        for m in [CpMethod::Fdt, CpMethod::Qrt, CpMethod::Lifshitz, CpMethod::Bare, CpMethod::NonMarkovian] {
            assert_eq!(cp.cp_force(0.1, m).unwrap().force, 0.0);
        }
    }

    #[test]
    fn bare_qrt_equals_fdt_exactly() {
        let mut cp = setup(ReflectionModel::QuasiStatic, 1e-3);
        cp.model.gamma_free = 0.0;
        cp.include_shift = false;
        cp.half_space.surface = SurfaceModel::drude(0.0).unwrap();
        let f = cp.cp_force(0.1, CpMethod::Fdt).unwrap();
        let q = cp.cp_force(0.1, CpMethod::Qrt).unwrap();
        assert_eq!(f.force, q.force);
    }
}

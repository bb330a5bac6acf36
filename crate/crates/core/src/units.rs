//! Physical constants and the dimensionless unit system.
//!
//! Every engine in this crate works with pure numbers: frequencies in units of
//! the surface-plasmon frequency `ω_sp`, in-plane wave vectors in `ω_sp/c`,
//! distances in `c/ω_sp`, velocities in `c`, and `ħ = ε₀ = 1`. Forces are
//! reported in units of the positive normalization
//! `F₀ = 3ħω_sp⁵α₀/(2πε₀c⁴)`, so a drag force is a negative number and an
//! attractive Casimir-Polder force points toward the surface (negative `z`).

use std::f64::consts::PI;

use crate::error::{DispersiaError, Result};

/// CODATA 2018 values, SI units.
pub struct PhysicalConstants;

impl PhysicalConstants {
    /// Reduced Planck constant (J·s).
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Speed of light in vacuum (m/s).
    pub const C: f64 = 299_792_458.0;
    /// Vacuum permittivity (F/m).
    pub const EPSILON0: f64 = 8.854_187_812_8e-12;
    /// Elementary charge (C), i.e. one electron-volt in joules.
    pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

    /// Angular frequency (rad/s) corresponding to a photon energy of 1 eV.
    pub fn ev_to_rad_per_s() -> f64 {
        Self::ELECTRON_VOLT / Self::HBAR
    }
}

/// Reference scales tying the dimensionless engines to SI quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// Reference angular frequency `ω_sp` (rad/s).
    pub omega_ref: f64,
    /// Reference length `c/ω_sp` (m).
    pub length_ref: f64,
    /// Force normalization `F₀` (N).
    pub force_ref: f64,
}

impl UnitSystem {
    /// Builds the unit system for surface-plasmon frequency `omega_sp` (rad/s)
    /// and static polarizability `alpha0` (F·m²).
    pub fn new(omega_sp: f64, alpha0: f64) -> Result<Self> {
        let force_ref = normalization_f0(alpha0, omega_sp)?;
        Ok(Self {
            omega_ref: omega_sp,
            length_ref: PhysicalConstants::C / omega_sp,
            force_ref,
        })
    }

    /// Same as [`UnitSystem::new`] with the bulk plasma frequency given in eV.
    pub fn from_plasma_ev(omega_p_ev: f64, alpha0: f64) -> Result<Self> {
        let omega_sp = omega_p_ev * PhysicalConstants::ev_to_rad_per_s() / 2f64.sqrt();
        Self::new(omega_sp, alpha0)
    }

    pub fn force_to_si(&self, force_over_f0: f64) -> f64 {
        force_over_f0 * self.force_ref
    }

    pub fn force_from_si(&self, force: f64) -> f64 {
        force / self.force_ref
    }

    pub fn length_to_si(&self, length: f64) -> f64 {
        length * self.length_ref
    }

    pub fn length_from_si(&self, meters: f64) -> f64 {
        meters / self.length_ref
    }

    pub fn frequency_to_si(&self, omega: f64) -> f64 {
        omega * self.omega_ref
    }

    pub fn frequency_from_si(&self, omega: f64) -> f64 {
        omega / self.omega_ref
    }

    /// Polarizability in F·m² to the dimensionless `α/(ε₀ (c/ω_sp)³)`.
    pub fn polarizability_from_si(&self, alpha: f64) -> f64 {
        alpha / (PhysicalConstants::EPSILON0 * self.length_ref.powi(3))
    }

    pub fn polarizability_to_si(&self, alpha: f64) -> f64 {
        alpha * PhysicalConstants::EPSILON0 * self.length_ref.powi(3)
    }
}

/// Force normalization `F₀ = 3ħω_sp⁵α₀/(2πε₀c⁴)` in newtons.
///
/// `alpha0 = 0` is accepted and yields zero (no coupling).
pub fn normalization_f0(alpha0: f64, omega_sp: f64) -> Result<f64> {
    if !(omega_sp > 0.0) || !omega_sp.is_finite() {
        return Err(DispersiaError::Domain(format!(
            "omega_sp must be positive and finite, got {omega_sp}"
        )));
    }
    if !(alpha0 >= 0.0) || !alpha0.is_finite() {
        return Err(DispersiaError::Domain(format!(
            "alpha0 must be non-negative and finite, got {alpha0}"
        )));
    }
    let c = PhysicalConstants::C;
    Ok(3.0 * PhysicalConstants::HBAR * omega_sp.powi(5) * alpha0
        / (2.0 * PI * PhysicalConstants::EPSILON0 * c.powi(4)))
}

/// `F₀` expressed in the natural units used by the engines
/// (`ħ = ε₀ = c = ω_sp = 1`), for a dipole of squared moment `d_squared` and
/// transition frequency `omega_a`: `3α₀/(2π)` with `α₀ = 2|d|²/(3ω_a)`.
pub fn natural_force_unit(d_squared: f64, omega_a: f64) -> f64 {
    d_squared / (PI * omega_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ev_conversion_matches_hbar() {
        assert_relative_eq!(
            PhysicalConstants::ev_to_rad_per_s(),
            1.519_267_448_8e15,
            max_relative = 1e-9
        );
    }

    #[test]
    fn f0_rejects_bad_inputs() {
        assert!(normalization_f0(-1.0, 1.0).is_err());
        assert!(normalization_f0(1.0, 0.0).is_err());
        assert!(normalization_f0(1.0, -3.0).is_err());
        assert_eq!(normalization_f0(0.0, 1e15).unwrap(), 0.0);
    }

    #[test]
    fn f0_scales_as_fifth_power() {
        let a = normalization_f0(5.26e-39, 6e15).unwrap();
        let b = normalization_f0(5.26e-39, 12e15).unwrap();
        assert_relative_eq!(b / a, 32.0, max_relative = 1e-14);
    }

    #[test]
    fn force_round_trip() {
        let u = UnitSystem::from_plasma_ev(9.0, 5.26e-39).unwrap();
        for f in [-3.2, 1e-12, 7.5e8] {
            assert_relative_eq!(u.force_from_si(u.force_to_si(f)), f, max_relative = 1e-15);
        }
        assert_relative_eq!(u.length_ref * u.omega_ref, PhysicalConstants::C, max_relative = 1e-15);
    }

    #[test]
    fn natural_unit_agrees_with_si() {
        // F₀ / (ħω_sp²/c) must equal 3α₀/(2π) in natural units.
        let u = UnitSystem::from_plasma_ev(9.0, 5.26e-39).unwrap();
        let alpha_nat = u.polarizability_from_si(5.26e-39);
        let force_unit = PhysicalConstants::HBAR * u.omega_ref.powi(2) / PhysicalConstants::C;
        let omega_a = 0.25;
        let d2 = 1.5 * omega_a * alpha_nat;
        assert_relative_eq!(
            u.force_ref / force_unit,
            natural_force_unit(d2, omega_a),
            max_relative = 1e-12
        );
    }
}

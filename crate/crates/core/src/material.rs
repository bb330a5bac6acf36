//! Drude half-space: permittivity and reflection coefficients.

use num_complex::Complex64;

use crate::error::{DispersiaError, Result};

/// Polarization of a reflected plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Transverse electric.
    S,
    /// Transverse magnetic.
    P,
}

/// A Drude metal in units of its surface-plasmon frequency.
///
/// `omega_p = √2` puts the surface plasmon at `ω_sp = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceModel {
    pub omega_p: f64,
    pub gamma: f64,
}

impl SurfaceModel {
    /// Drude metal with `ω_sp = 1` and relaxation rate `gamma` (units of `ω_sp`).
    pub fn drude(gamma: f64) -> Result<Self> {
        Self::new(std::f64::consts::SQRT_2, gamma)
    }

    pub fn new(omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p > 0.0) || !omega_p.is_finite() {
            return Err(DispersiaError::Domain(format!(
                "plasma frequency must be positive, got {omega_p}"
            )));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(DispersiaError::Domain(format!(
                "relaxation rate must be non-negative, got {gamma}"
            )));
        }
        Ok(Self { omega_p, gamma })
    }

    pub fn omega_sp(&self) -> f64 {
        self.omega_p / std::f64::consts::SQRT_2
    }

    /// `ε(ω) = 1 − ω_p²/[ω(ω + iΓ)]`.
    pub fn permittivity(&self, omega: Complex64) -> Result<Complex64> {
        let den = omega * (omega + Complex64::new(0.0, self.gamma));
        if den == Complex64::new(0.0, 0.0) {
            return Err(DispersiaError::Singularity(format!(
                "Drude permittivity pole at omega = {omega}"
            )));
        }
        Ok(1.0 - self.omega_p * self.omega_p / den)
    }

    /// `ε(ω)·ω²`, finite at `ω = 0`.
    pub fn permittivity_times_omega2(&self, omega: Complex64) -> Result<Complex64> {
        let den = omega + Complex64::new(0.0, self.gamma);
        if den == Complex64::new(0.0, 0.0) {
            if omega == Complex64::new(0.0, 0.0) {
                return Ok(Complex64::new(-self.omega_p * self.omega_p, 0.0));
            }
            return Err(DispersiaError::Singularity(format!(
                "Drude permittivity pole at omega = {omega}"
            )));
        }
        Ok(omega * omega - self.omega_p * self.omega_p * omega / den)
    }

    /// Quasi-static TM reflection `r = (ε − 1)/(ε + 1) = ω_sp²/(ω_sp² − ω² − iΓω)`.
    pub fn quasistatic_reflection(&self, omega: Complex64) -> Result<Complex64> {
        let ws2 = 0.5 * self.omega_p * self.omega_p;
        let den = ws2 - omega * omega - Complex64::new(0.0, self.gamma) * omega;
        if den.norm() <= 8.0 * f64::EPSILON * (ws2 + omega.norm_sqr()) {
            return Err(DispersiaError::Singularity(format!(
                "surface-plasmon pole of the reflection coefficient at omega = {omega}"
            )));
        }
        Ok(ws2 / den)
    }

    /// `Im r(ω)` of the quasi-static coefficient for real `ω`.
    pub fn quasistatic_reflection_imag(&self, omega: f64) -> Result<f64> {
        Ok(self.quasistatic_reflection(Complex64::new(omega, 0.0))?.im)
    }

    /// Half-space Fresnel coefficient at in-plane wave vector `k ≥ 0`.
    pub fn fresnel_reflection(&self, omega: Complex64, k: f64, pol: Polarization) -> Result<Complex64> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(DispersiaError::Domain(format!("in-plane wave vector must be ≥ 0, got {k}")));
        }
        let w2 = omega * omega;
        let ew2 = self.permittivity_times_omega2(omega)?;
        let kappa = kappa_branch(k * k - w2, omega);
        let kappa1 = kappa_branch(k * k - ew2, omega);
        let (num, den) = match pol {
            Polarization::S => (kappa - kappa1, kappa + kappa1),
            Polarization::P => {
                if omega == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new(1.0, 0.0));
                }
                (ew2 * kappa - w2 * kappa1, ew2 * kappa + w2 * kappa1)
            }
        };
        if den == Complex64::new(0.0, 0.0) {
            if num == Complex64::new(0.0, 0.0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            return Err(DispersiaError::Singularity(format!(
                "{pol:?}-polarized reflection pole at omega = {omega}, k = {k}"
            )));
        }
        Ok(num / den)
    }
}

/// Square root `κ = √arg` on the physical sheet.
///
/// Principal branch (`Re κ ≥ 0`); on the cut (negative real `arg`) the sign is
/// fixed by `Re ω` so that `Im κ < 0` for `ω > 0` and `κ(−ω*) = κ(ω)*`.
pub fn kappa_branch(arg: Complex64, omega: Complex64) -> Complex64 {
    if arg.im == 0.0 && arg.re < 0.0 {
        let s = if omega.re < 0.0 { -1.0 } else { 1.0 };
        return Complex64::new(0.0, -s * (-arg.re).sqrt());
    }
    arg.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plasma_zero_crossing() {
        let s = SurfaceModel::drude(0.0).unwrap();
        assert!(s.permittivity(c(s.omega_p, 0.0)).unwrap().norm() < 1e-15);
        assert_eq!(s.omega_sp(), s.omega_p / 2f64.sqrt());
    }

    #[test]
    fn imaginary_axis_is_real_and_decreasing() {
        let s = SurfaceModel::drude(0.1).unwrap();
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let xi = 0.05 * i as f64;
            let e = s.permittivity(c(0.0, xi)).unwrap();
            assert_eq!(e.im, 0.0);
            assert_relative_eq!(e.re, 1.0 + 2.0 / (xi * (xi + 0.1)), max_relative = 1e-14);
            assert!(e.re > 1.0 && e.re < last);
            last = e.re;
        }
    }

    #[test]
    fn poles_are_reported() {
        let s = SurfaceModel::drude(0.2).unwrap();
        assert!(s.permittivity(c(0.0, 0.0)).is_err());
        assert!(s.permittivity(c(0.0, -0.2)).is_err());
        let lossless = SurfaceModel::drude(0.0).unwrap();
        assert!(matches!(
            lossless.quasistatic_reflection(c(1.0, 0.0)),
            Err(DispersiaError::Singularity(_))
        ));
    }

    #[test]
    fn static_limit_and_ohmic_slope() {
        let s = SurfaceModel::drude(0.05).unwrap();
        assert_eq!(s.quasistatic_reflection(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let w = 1e-6;
        assert_relative_eq!(s.quasistatic_reflection_imag(w).unwrap() / w, 0.05, max_relative = 1e-9);
    }

    #[test]
    fn no_interface_no_reflection() {
        // ω_p → 0 is excluded, so emulate ε = 1 by a vanishing plasma frequency.
        let s = SurfaceModel::new(1e-300, 0.1).unwrap();
        for pol in [Polarization::S, Polarization::P] {
            let r = s.fresnel_reflection(c(0.7, 0.0), 2.0, pol).unwrap();
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn s_wave_vanishes_at_zero_frequency() {
        let s = SurfaceModel::drude(0.05).unwrap();
        let r = s.fresnel_reflection(c(1e-9, 0.0), 1.0, Polarization::S).unwrap();
        assert!(r.norm() < 1e-8);
        assert_eq!(s.fresnel_reflection(c(0.0, 0.0), 1.0, Polarization::S).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn branch_signs() {
        let k = kappa_branch(c(-4.0, 0.0), c(3.0, 0.0));
        assert_eq!(k, c(0.0, -2.0));
        let k = kappa_branch(c(-4.0, 0.0), c(-3.0, 0.0));
        assert_eq!(k, c(0.0, 2.0));
        let k = kappa_branch(c(1.0, -1e-3), c(1.0, 0.0));
        assert!(k.re > 0.0 && k.im < 0.0);
    }
}

//! Scattered Green tensor of a planar half-space in `(k, z, ω)` space and its
//! coincident-point integrals.
//!
//! Only the scattered part `g` is computed. The vacuum part drops out of the
//! friction force by Lorentz invariance and adds only a distance-independent
//! self-energy to the Casimir-Polder potential.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DispersiaError, Result};
use crate::material::{kappa_branch, Polarization, SurfaceModel};
use crate::quad::{try_integrate, QuadResult, QuadSpec};
use crate::tensor::ComplexTensor3;

/// Radial cut-off `κ_max·z`; the neglected tail carries `e^{−2κz} < e^{−80}`.
pub const KAPPA_CUTOFF: f64 = 40.0;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// In-plane wave vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KVector {
    pub kx: f64,
    pub ky: f64,
}

impl KVector {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn k(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    /// Unit vector along `k`; the `x` axis for `k = 0`.
    fn direction(&self) -> (f64, f64) {
        let k = self.k();
        if k == 0.0 {
            (1.0, 0.0)
        } else {
            (self.kx / k, self.ky / k)
        }
    }
}

impl std::ops::Neg for KVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky)
    }
}

/// Which reflection physics enters `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReflectionModel {
    /// Retarded Fresnel coefficients for both polarizations.
    Fresnel,
    /// Near-field limit: `κ → k`, TM coefficient `(ε − 1)/(ε + 1)`, no TE part.
    QuasiStatic,
    /// Near-field limit with a frequency-independent `r = 1`.
    PerfectReflector,
}

/// A half-space together with the reflection model used to build `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub surface: SurfaceModel,
    pub reflection: ReflectionModel,
}

fn check_distance(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(DispersiaError::Domain(format!("distance must be positive, got {z}")));
    }
    Ok(())
}

/// `(ω²/κ²)·r^s` written so that `κ = 0` at `k = ω` stays finite.
fn te_weight(omega2: Complex64, kappa: Complex64, rs: Complex64) -> Complex64 {
    if rs == ZERO {
        ZERO
    } else {
        omega2 * rs / (kappa * kappa)
    }
}

impl HalfSpace {
    pub fn new(surface: SurfaceModel, reflection: ReflectionModel) -> Self {
        Self { surface, reflection }
    }

    /// `(κ, r^p, r^s)` at in-plane wave number `k`.
    pub fn coefficients(&self, omega: Complex64, k: f64) -> Result<(Complex64, Complex64, Complex64)> {
        match self.reflection {
            ReflectionModel::Fresnel => {
                let kappa = kappa_branch(Complex64::new(k * k, 0.0) - omega * omega, omega);
                let rp = self.surface.fresnel_reflection(omega, k, Polarization::P)?;
                let rs = self.surface.fresnel_reflection(omega, k, Polarization::S)?;
                Ok((kappa, rp, rs))
            }
            ReflectionModel::QuasiStatic => Ok((
                Complex64::new(k, 0.0),
                self.surface.quasistatic_reflection(omega)?,
                ZERO,
            )),
            ReflectionModel::PerfectReflector => Ok((Complex64::new(k, 0.0), Complex64::new(1.0, 0.0), ZERO)),
        }
    }

    /// Reflection coefficients as a function of `κ` rather than `k`.
    fn coefficients_at_kappa(&self, omega: Complex64, kappa: Complex64) -> Result<(Complex64, Complex64)> {
        match self.reflection {
            ReflectionModel::Fresnel => {
                let k2 = kappa * kappa + omega * omega;
                let k = k2.re.max(0.0).sqrt();
                let rp = self.surface.fresnel_reflection(omega, k, Polarization::P)?;
                let rs = self.surface.fresnel_reflection(omega, k, Polarization::S)?;
                Ok((rp, rs))
            }
            _ => {
                let (_, rp, rs) = self.coefficients(omega, kappa.re)?;
                Ok((rp, rs))
            }
        }
    }

    /// `g(k, z, ω) = (κ/2)(r^p p₊p₋ + (ω²/κ²) r^s ss) e^{−2κz}`.
    pub fn scattered_green_k(&self, kv: KVector, z: f64, omega: Complex64) -> Result<ComplexTensor3> {
        check_distance(z)?;
        let k = kv.k();
        let (kappa, rp, rs) = self.coefficients(omega, k)?;
        if kappa == ZERO {
            return Ok(ComplexTensor3::zero());
        }
        let (ux, uy) = kv.direction();
        let kk = Complex64::new(k, 0.0) / kappa;
        let mut p = ComplexTensor3::zero();
        p.m[0][0] = Complex64::new(ux * ux, 0.0);
        p.m[0][1] = Complex64::new(ux * uy, 0.0);
        p.m[1][0] = p.m[0][1];
        p.m[1][1] = Complex64::new(uy * uy, 0.0);
        p.m[0][2] = -I * kk * ux;
        p.m[1][2] = -I * kk * uy;
        p.m[2][0] = I * kk * ux;
        p.m[2][1] = I * kk * uy;
        p.m[2][2] = kk * kk;
        let ss = ComplexTensor3::from_real([[uy * uy, -ux * uy, 0.0], [-ux * uy, ux * ux, 0.0], [0.0, 0.0, 0.0]]);
        let pref = kappa * 0.5 * (-2.0 * kappa * z).exp();
        let ws = te_weight(omega * omega, kappa, rs);
        Ok((p * rp + ss * ws) * pref)
    }

    /// Angle-averaged integrand `(g_xx, g_zz)` per unit `κ dκ/(2π)`.
    fn averaged_entries(&self, omega: Complex64, kappa: Complex64, z: f64) -> Result<(Complex64, Complex64)> {
        let (rp, rs) = self.coefficients_at_kappa(omega, kappa)?;
        let e = kappa * 0.5 * (-2.0 * kappa * z).exp();
        let k2 = match self.reflection {
            ReflectionModel::Fresnel => kappa * kappa + omega * omega,
            _ => kappa * kappa,
        };
        let xx = e * 0.5 * (rp + te_weight(omega * omega, kappa, rs));
        let zz = if kappa == ZERO { ZERO } else { e * rp * k2 / (kappa * kappa) };
        Ok((xx, zz))
    }

    /// `∫d²k/(2π)²` of `g` at coincident points, with each integrand multiplied
    /// by `(−κ)^order`.
    fn coincident(&self, z: f64, omega: Complex64, order: i32, rel_tol: f64) -> Result<QuadResult<ComplexTensor3>> {
        check_distance(z)?;
        let spec = QuadSpec::new(rel_tol).with_abs_tol(1e-300);
        let kmax = KAPPA_CUTOFF / z;
        let weight = |kappa: Complex64| if order == 0 { Complex64::new(1.0, 0.0) } else { -kappa };
        let to_tensor = |xx: Complex64, zz: Complex64| ComplexTensor3::from_diagonal([xx, xx, zz]);
        let near_field = self.reflection != ReflectionModel::Fresnel;

        if near_field || omega == ZERO {
            // k dk with κ = k (near field) or κ = k at ω = 0.
            let spec = spec.with_breakpoints([0.5 / z, 2.0 / z]);
            return try_integrate(
                |k: f64| {
                    let kap = Complex64::new(k, 0.0);
                    let (xx, zz) = self.averaged_entries(omega, kap, z)?;
                    Ok(to_tensor(xx, zz) * (weight(kap) * k / (2.0 * PI)))
                },
                0.0,
                kmax,
                &spec,
            );
        }

        if omega.im == 0.0 {
            // Real frequency: propagating κ = −iq, q ∈ [0, |ω|], then evanescent κ ∈ [0, κ_max].
            let w = omega.re.abs();
            let s = if omega.re < 0.0 { -1.0 } else { 1.0 };
            let prop = try_integrate(
                |q: f64| {
                    let kap = Complex64::new(0.0, -s * q);
                    let (xx, zz) = self.averaged_entries(omega, kap, z)?;
                    Ok(to_tensor(xx, zz) * (weight(kap) * q / (2.0 * PI)))
                },
                0.0,
                w,
                &spec,
            )?;
            let mut bps = vec![0.5 / z];
            if let Ok(eps) = self.surface.permittivity(omega) {
                if eps.re < -1.0 {
                    let ksp = (omega / (-(eps + 1.0)).sqrt()).re.abs();
                    if ksp > 0.0 && ksp < kmax {
                        bps.extend([0.9 * ksp, ksp, 1.1 * ksp]);
                    }
                }
            }
            let evan = try_integrate(
                |kap: f64| {
                    let kc = Complex64::new(kap, 0.0);
                    let (xx, zz) = self.averaged_entries(omega, kc, z)?;
                    Ok(to_tensor(xx, zz) * (weight(kc) * kap / (2.0 * PI)))
                },
                0.0,
                kmax,
                &spec.clone().with_breakpoints(bps),
            )?;
            return Ok(QuadResult {
                value: prop.value + evan.value,
                error: prop.error + evan.error,
                evaluations: prop.evaluations + evan.evaluations,
            });
        }

        if omega.re == 0.0 && omega.im > 0.0 {
            // Imaginary frequency: κ = √(k² + ξ²) ∈ [ξ, ∞) is real.
            let xi = omega.im;
            return try_integrate(
                |kap: f64| {
                    let kc = Complex64::new(kap, 0.0);
                    let (xx, zz) = self.averaged_entries(omega, kc, z)?;
                    Ok(to_tensor(xx, zz) * (weight(kc) * kap / (2.0 * PI)))
                },
                xi,
                xi + kmax,
                &spec.with_breakpoints([xi + 0.5 / z, xi + 2.0 / z]),
            );
        }

        // Generic complex frequency: integrate k dk directly.
        let spec = spec.with_breakpoints([omega.norm(), 0.5 / z]);
        try_integrate(
            |k: f64| {
                let kap = kappa_branch(Complex64::new(k * k, 0.0) - omega * omega, omega);
                let (xx, zz) = self.averaged_entries(omega, kap, z)?;
                Ok(to_tensor(xx, zz) * (weight(kap) * k / (2.0 * PI)))
            },
            0.0,
            omega.norm() + kmax,
            &spec,
        )
    }

    /// Coincident scattered Green tensor `g(r_a, r_a, ω)` (diagonal).
    pub fn coincident_green(&self, z: f64, omega: Complex64, rel_tol: f64) -> Result<QuadResult<ComplexTensor3>> {
        self.coincident(z, omega, 0, rel_tol)
    }

    /// `∂_z g(r_a, r, ω)` at `r = r_a`, differentiating one argument.
    ///
    /// The derivative is taken inside the `k` integral (factor `−κ`), so no
    /// numerical differencing is involved.
    pub fn coincident_green_zderiv(&self, z: f64, omega: Complex64, rel_tol: f64) -> Result<QuadResult<ComplexTensor3>> {
        self.coincident(z, omega, 1, rel_tol)
    }
}

/// Near-field `Im g(k, z, ω) = (r_I(ω)/2) k e^{−2kz} diag(kx²/k², ky²/k², 1)`.
///
/// The `xy` entry is odd in `k_y` and dropped; it integrates to zero.
pub fn nearfield_green_imag(surface: &SurfaceModel, kv: KVector, z: f64, omega: f64) -> Result<ComplexTensor3> {
    check_distance(z)?;
    let k = kv.k();
    if k == 0.0 {
        return Ok(ComplexTensor3::zero());
    }
    let ri = surface.quasistatic_reflection_imag(omega)?;
    Ok(nearfield_spatial(kv, z).scale(ri))
}

/// The `r_I`-independent factor of [`nearfield_green_imag`].
pub fn nearfield_spatial(kv: KVector, z: f64) -> ComplexTensor3 {
    let k = kv.k();
    if k == 0.0 {
        return ComplexTensor3::zero();
    }
    let e = 0.5 * k * (-2.0 * k * z).exp();
    ComplexTensor3::from_real_diagonal([e * kv.kx * kv.kx / (k * k), e * kv.ky * kv.ky / (k * k), e])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drude(reflection: ReflectionModel) -> HalfSpace {
        HalfSpace::new(SurfaceModel::drude(0.1).unwrap(), reflection)
    }

    #[test]
    fn rejects_bad_distance() {
        let h = drude(ReflectionModel::Fresnel);
        assert!(h.scattered_green_k(KVector::new(1.0, 0.0), 0.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(h.coincident_green(-1.0, Complex64::new(0.0, 1.0), 1e-8).is_err());
    }

    #[test]
    fn perfect_reflector_coincident_values() {
        let h = drude(ReflectionModel::PerfectReflector);
        let z = 0.05;
        let g = h.coincident_green(z, Complex64::new(0.0, 0.3), 1e-12).unwrap().value;
        assert_relative_eq!(g.m[0][0].re, 1.0 / (32.0 * PI * z.powi(3)), max_relative = 1e-10);
        assert_relative_eq!(g.m[2][2].re, 1.0 / (16.0 * PI * z.powi(3)), max_relative = 1e-10);
        let dg = h.coincident_green_zderiv(z, Complex64::new(0.0, 0.3), 1e-12).unwrap().value;
        assert_relative_eq!(dg.m[2][2].re, -3.0 / (32.0 * PI * z.powi(4)), max_relative = 1e-10);
        assert_relative_eq!(dg.m[0][0].re, 0.5 * dg.m[2][2].re, max_relative = 1e-10);
        assert_relative_eq!(dg.m[1][1].re, dg.m[0][0].re, max_relative = 1e-15);
    }

    #[test]
    fn imaginary_frequency_entries_are_real() {
        let h = drude(ReflectionModel::Fresnel);
        let g = h.scattered_green_k(KVector::new(0.7, -0.4), 0.2, Complex64::new(0.0, 0.8)).unwrap();
        // Off-diagonal xz entries carry an explicit i from p±; the Im-construction removes it.
        assert!(g.im_construction().max_abs() < 1e-15 * g.max_abs());
        let d = h.coincident_green_zderiv(0.2, Complex64::new(0.0, 0.8), 1e-10).unwrap().value;
        for c in d.diagonal() {
            assert_eq!(c.im, 0.0);
            assert!(c.re < 0.0);
        }
    }

    #[test]
    fn nearfield_trace_and_zero_k() {
        let s = SurfaceModel::drude(0.1).unwrap();
        let kv = KVector::new(1.0, 1.0);
        let g = nearfield_green_imag(&s, kv, 0.05, 0.7).unwrap();
        let ri = s.quasistatic_reflection_imag(0.7).unwrap();
        let k = 2f64.sqrt();
        assert_relative_eq!(g.trace().re, ri * k * (-0.1 * k).exp(), max_relative = 1e-14);
        assert_eq!(nearfield_green_imag(&s, KVector::new(0.0, 0.0), 0.05, 0.7).unwrap(), ComplexTensor3::zero());
        assert_eq!(nearfield_green_imag(&s, kv, 0.05, 0.0).unwrap(), ComplexTensor3::zero());
    }
}

//! Quantum friction on a dipole moving parallel to a Drude surface.
//!
//! Motion is along `x`, the surface is described by the near-field Green
//! tensor, and forces are reported as `F/|F₀|` with
//! `|F₀| = 3ω_sp⁵α₀/(2π)` in natural units (`ħ = ε₀ = c = ω_sp = 1`).
//! A drag on a positive velocity is therefore negative.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DispersiaError, Result};
use crate::material::SurfaceModel;
use crate::polarizability::{
    DampedOscillator, DipoleKind, DipoleModel, DipoleOrientation, DressedRates, Polarizability, PoleSet,
    TwoLevelAtom,
};
use crate::quad::{bessel_k_scaled, try_integrate, try_integrate_adaptive, Domain, QuadSpec, Transform};
use crate::spectra::{branch_discontinuity, branch_spec, hermitian_part, BRANCH_XI_MAX};
use crate::tensor::ComplexTensor3;
use crate::units::natural_force_unit;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Wave vectors beyond `KX_CUTOFF/z_a` carry `e^{−2kz} < e^{−400}` and are dropped.
const KX_CUTOFF: f64 = 200.0;

/// Angular weights of the plasmon closed form, `𝒦 = A₀K₀(2u) + A₂K₂(2u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationFactors {
    pub a0: f64,
    pub a2: f64,
}

/// `A₀ = (3/2)[1 + (3cos²φ − 2)sin²θ]`, `A₂ = (3/2)[1 − cos²φ sin²θ]`.
///
/// `A₀` alone can be negative (down to `−3/2` for a dipole along `y`), but
/// `A₀K₀ + A₂K₂ = (3/2)[2n_x²K₀ + n_y²(K₂ − K₀) + n_z²(K₀ + K₂)] > 0`
/// because `K₂ > K₀`.
pub fn orientation_factors(theta: f64, phi: f64) -> OrientationFactors {
    let s2 = theta.sin().powi(2);
    let c2 = phi.cos().powi(2);
    OrientationFactors {
        a0: 1.5 * (1.0 + (3.0 * c2 - 2.0) * s2),
        a2: 1.5 * (1.0 - c2 * s2),
    }
}

impl OrientationFactors {
    pub fn for_orientation(o: DipoleOrientation) -> Self {
        match o {
            DipoleOrientation::Isotropic => Self { a0: 1.0, a2: 1.0 },
            DipoleOrientation::Fixed { theta, phi } => orientation_factors(theta, phi),
        }
    }

    /// `𝒦(u)·e^{2u}`, finite for any `u > 0`.
    pub fn kernel_scaled(&self, u: f64) -> Result<f64> {
        let x = 2.0 * u.abs();
        Ok(self.a0 * bessel_k_scaled(0, x)? + self.a2 * bessel_k_scaled(2, x)?)
    }
}

/// A dipole at height `z_a` moving with velocity `v_x` along `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionScenario {
    pub v_x: f64,
    pub z_a: f64,
    pub surface: SurfaceModel,
    pub dipole: DipoleModel,
    pub rel_tol: f64,
}

impl FrictionScenario {
    pub fn new(v_x: f64, z_a: f64, surface: SurfaceModel, dipole: DipoleModel) -> Result<Self> {
        let s = Self {
            v_x,
            z_a,
            surface,
            dipole,
            rel_tol: 1e-8,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_velocity(mut self, v_x: f64) -> Self {
        self.v_x = v_x;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v_x.is_finite() || self.v_x.abs() >= 1.0 {
            return Err(DispersiaError::Domain(format!(
                "velocity must satisfy |v_x| < c, got {}",
                self.v_x
            )));
        }
        if !(self.z_a > 0.0) || !self.z_a.is_finite() {
            return Err(DispersiaError::Domain(format!("distance must be positive, got {}", self.z_a)));
        }
        if (self.surface.omega_sp() - 1.0).abs() > 1e-12 {
            return Err(DispersiaError::Domain(format!(
                "friction works in units of omega_sp; surface has omega_sp = {}",
                self.surface.omega_sp()
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(DispersiaError::Domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        self.dipole.validate()
    }

    /// Conversion from a natural-unit force to `F/|F₀|`; `None` for a vanishing dipole.
    fn force_scale(&self) -> Option<f64> {
        let d2 = self.dipole.d_squared;
        (d2 > 0.0).then(|| 1.0 / natural_force_unit(d2, self.dipole.omega_a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsymptoticRegime {
    /// Lossless surface, undamped atom: plasmon closed form at large `u`.
    Radiative,
    /// Ohmic surface, undamped atom.
    SurfaceOhmic,
    /// Ohmic surface, intrinsically damped oscillator: cubic law.
    Intrinsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrictionMethod {
    SecondOrder,
    ClosedForm,
    Asymptotic(AsymptoticRegime),
    FdtWindowed,
    FdtCubic,
}

impl std::fmt::Display for FrictionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrictionMethod::SecondOrder => "second_order",
            FrictionMethod::ClosedForm => "closed_form",
            FrictionMethod::Asymptotic(AsymptoticRegime::Radiative) => "asympt1",
            FrictionMethod::Asymptotic(AsymptoticRegime::SurfaceOhmic) => "asympt2",
            FrictionMethod::Asymptotic(AsymptoticRegime::Intrinsic) => "asympt3",
            FrictionMethod::FdtWindowed => "fdt_windowed",
            FrictionMethod::FdtCubic => "fdt_cubic",
        };
        f.write_str(s)
    }
}

/// Friction force in units of `|F₀|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionResult {
    pub v_x: f64,
    pub force: f64,
    pub error: f64,
    pub method: FrictionMethod,
    /// The exact value is nonzero but below the smallest representable double.
    pub underflow: bool,
    /// A lossless surface was requested numerically and the closed form was used.
    pub redirected: bool,
}

impl FrictionResult {
    fn exact(v_x: f64, force: f64, method: FrictionMethod) -> Self {
        Self {
            v_x,
            force,
            error: 0.0,
            method,
            underflow: false,
            redirected: false,
        }
    }

    /// Sign flip for reversed motion; the magnitude is even in `v_x`.
    fn oriented(mut self, v_x: f64) -> Self {
        if v_x < 0.0 {
            self.force = -self.force;
        }
        self.v_x = v_x;
        self
    }
}

/// `F/|F₀| = −(ω_a/12)(1 + ω_a)³ v⁻⁴ 𝒦(u)` with `u = z_a(1 + ω_a)/v`.
///
/// Exact for a lossless surface and an undamped dipole; damping parameters
/// in `s` are ignored. Evaluated in log space; a result below the double
/// range comes back as 0 with `underflow` set.
pub fn friction_plasma_closed_form(s: &FrictionScenario) -> Result<FrictionResult> {
    s.validate()?;
    let v = s.v_x.abs();
    let m = FrictionMethod::ClosedForm;
    if v == 0.0 {
        return Ok(FrictionResult::exact(0.0, 0.0, m));
    }
    let wa = s.dipole.omega_a;
    let u = s.z_a * (1.0 + wa) / v;
    let of = OrientationFactors::for_orientation(s.dipole.orientation);
    // exp(-2u) is exactly zero beyond this; the Bessel call would only waste time.
    if 2.0 * u > 1e5 {
        let mut r = FrictionResult::exact(v, 0.0, m);
        r.underflow = true;
        return Ok(r.oriented(s.v_x));
    }
    let ln = (wa / 12.0).ln() + 3.0 * (1.0 + wa).ln() - 4.0 * v.ln() + of.kernel_scaled(u)?.ln() - 2.0 * u;
    let f = -ln.exp();
    let mut r = FrictionResult::exact(v, f, m);
    r.underflow = f == 0.0;
    Ok(r.oriented(s.v_x))
}

/// Leading low-velocity asymptotics of the orientation-averaged second-order force.
pub fn friction_asymptotic(s: &FrictionScenario, regime: AsymptoticRegime) -> Result<FrictionResult> {
    s.validate()?;
    if s.dipole.orientation != DipoleOrientation::Isotropic {
        return Err(DispersiaError::Configuration(
            "asymptotic friction forms are orientation averages; use an isotropic dipole".into(),
        ));
    }
    let gs = s.surface.gamma;
    let ga = s.dipole.gamma_intrinsic;
    let mismatch = |need: &str| {
        Err(DispersiaError::Configuration(format!(
            "regime {regime:?} needs {need}; got Gamma = {gs}, gamma = {ga}"
        )))
    };
    match regime {
        AsymptoticRegime::Radiative if gs != 0.0 || ga != 0.0 => return mismatch("Gamma = 0 and gamma = 0"),
        AsymptoticRegime::SurfaceOhmic if !(gs > 0.0) || ga != 0.0 => return mismatch("Gamma > 0 and gamma = 0"),
        AsymptoticRegime::Intrinsic if !(gs > 0.0) || !(ga > 0.0) => return mismatch("Gamma > 0 and gamma > 0"),
        AsymptoticRegime::Intrinsic if s.dipole.kind != DipoleKind::Oscillator => {
            return Err(DispersiaError::Configuration(
                "the intrinsic-damping asymptotic applies to the oscillator model".into(),
            ))
        }
        _ => {}
    }
    let v = s.v_x.abs();
    let m = FrictionMethod::Asymptotic(regime);
    if v == 0.0 {
        return Ok(FrictionResult::exact(0.0, 0.0, m));
    }
    let (wa, z) = (s.dipole.omega_a, s.z_a);
    let mag = match regime {
        AsymptoticRegime::Radiative => {
            let pre = PI * (wa / 12.0).powi(2) * (1.0 + wa).powi(5) / (z * v.powi(7));
            (0.5 * pre.ln() - (1.0 + wa) * 2.0 * z / v).exp()
        }
        AsymptoticRegime::SurfaceOhmic => {
            let pre = (wa.powi(7) / (PI * z.powi(5) * v.powi(3))).sqrt();
            gs / 24.0 * pre * (1.0 + 2.5 * v / (z * wa)) * (-2.0 * z * wa / v).exp()
        }
        AsymptoticRegime::Intrinsic => 45.0 / 16.0 * gs / (24.0 * PI) * ga / (wa * wa) * z.powi(-7) * v.powi(3),
    };
    let mut r = FrictionResult::exact(v, -mag, m);
    r.underflow = mag == 0.0 && regime != AsymptoticRegime::Intrinsic;
    Ok(r.oriented(s.v_x))
}

/// `∫dk_y K(k_x, k_y)·e^{2k_x z}` over the whole line, with
/// `K = (1/2)k e^{−2kz} diag(k_x²/k², k_y²/k², 1)`.
///
/// Equals `k_x² e^{2k_xz}·diag(K₀, (K₂ − K₀)/2, (K₀ + K₂)/2)` at argument `2k_xz`.
pub fn ky_integrated_spatial(kx: f64, z: f64, rel_tol: f64) -> Result<ComplexTensor3> {
    if !(kx >= 0.0) || !(z > 0.0) {
        return Err(DispersiaError::Domain(format!("need k_x ≥ 0 and z > 0, got {kx}, {z}")));
    }
    let scale = (kx / (2.0 * z)).sqrt() + 0.5 / z;
    let spec = QuadSpec::new(rel_tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Rational { scale });
    let r = try_integrate_adaptive(
        |ky| {
            let k = kx.hypot(ky);
            if k == 0.0 {
                return Ok(ComplexTensor3::zero());
            }
            // Twice the half-line integrand; (1/2)·2 = 1.
            let e = k * (-2.0 * z * (k - kx)).exp();
            Ok(ComplexTensor3::from_real_diagonal([e * kx * kx / (k * k), e * ky * ky / (k * k), e]))
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )?;
    Ok(r.value)
}

fn diag_contract(dd: &ComplexTensor3, k: &ComplexTensor3) -> f64 {
    (0..3).map(|i| dd.m[i][i].re * k.m[i][i].re).sum()
}

/// `Im` of the scalar response per unit `dd` for real frequency.
#[derive(Debug, Clone, Copy)]
enum ScalarResponse {
    TwoLevel { omega: f64, gamma: f64 },
    Oscillator { omega: f64, gamma: f64 },
}

impl ScalarResponse {
    fn for_model(model: &DipoleModel, gamma: f64) -> Self {
        match model.kind {
            DipoleKind::TwoLevel => Self::TwoLevel { omega: model.omega_a, gamma },
            DipoleKind::Oscillator => Self::Oscillator { omega: model.omega_a, gamma },
        }
    }

    fn gamma(&self) -> f64 {
        match *self {
            Self::TwoLevel { gamma, .. } | Self::Oscillator { gamma, .. } => gamma,
        }
    }

    fn omega(&self) -> f64 {
        match *self {
            Self::TwoLevel { omega, .. } | Self::Oscillator { omega, .. } => omega,
        }
    }

    fn imag(&self, w: f64) -> f64 {
        match *self {
            Self::TwoLevel { omega, gamma } => {
                let x = Complex64::new(w, gamma);
                (2.0 * omega / (omega * omega - x * x)).im
            }
            Self::Oscillator { omega, gamma } => {
                (2.0 * omega / Complex64::new(omega * omega - w * w, -gamma * w)).im
            }
        }
    }

    fn ohmic_slope(&self) -> f64 {
        match *self {
            Self::TwoLevel { omega, gamma } => 4.0 * omega * gamma / (omega * omega + gamma * gamma).powi(2),
            Self::Oscillator { omega, gamma } => 2.0 * gamma / omega.powi(3),
        }
    }
}

fn lorentz_breakpoints(center: f64, width: f64) -> Vec<f64> {
    let mut b = vec![center];
    for f in [1.0, 10.0, 100.0] {
        b.push(center - f * width);
        b.push(center + f * width);
    }
    b
}

/// Second-order friction of an undamped dipole over a lossy surface:
/// `F = −(1/2π²)∫_{ω_a/v}^∞ dk_x k_x r_I(k_xv − ω_a) ∫dk_y Tr[dd·K]`.
fn second_order_delta(s: &FrictionScenario, v: f64, dd: &ComplexTensor3) -> Result<(f64, f64)> {
    let (wa, z, tol) = (s.dipole.omega_a, s.z_a, s.rel_tol);
    let gs = s.surface.gamma;
    // Doppler variable ω = k_x v − ω_a; the e^{−2k_x z} factor is pulled out of the inner integral.
    let spec = QuadSpec::new(tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Rational { scale: (v / z).min(1.0) })
        .with_breakpoints(lorentz_breakpoints(1.0, gs));
    let r = try_integrate_adaptive(
        |w| {
            let kx = (w + wa) / v;
            let damp = (-2.0 * kx * z).exp();
            if damp == 0.0 {
                return Ok(0.0);
            }
            let ri = s.surface.quasistatic_reflection_imag(w)?;
            let j = diag_contract(dd, &ky_integrated_spatial(kx, z, 0.1 * tol)?);
            Ok(kx * ri * j * damp / v)
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )?;
    let c = -1.0 / (2.0 * PI * PI);
    Ok((c * r.value, c.abs() * r.error))
}

/// Doppler window `W(k_x) = ∫₀^{k_xv} a_I(k_xv − ω) r_I(ω) dω`.
fn doppler_window(surface: &SurfaceModel, a: &ScalarResponse, kx: f64, v: f64, tol: f64) -> Result<f64> {
    let top = kx * v;
    if top == 0.0 {
        return Ok(0.0);
    }
    if surface.gamma == 0.0 {
        // r_I = (π/2)[δ(ω − 1) − δ(ω + 1)] at ω_sp = 1.
        return Ok(if top > 1.0 { 0.5 * PI * a.imag(top - 1.0) } else { 0.0 });
    }
    let mut bps = lorentz_breakpoints(1.0, surface.gamma);
    bps.extend(lorentz_breakpoints(top - a.omega(), a.gamma()));
    let spec = QuadSpec::new(tol).with_abs_tol(1e-300).with_breakpoints(bps);
    let r = try_integrate(
        |w| Ok(a.imag(top - w) * surface.quasistatic_reflection_imag(w)?),
        0.0,
        top,
        &spec,
    )?;
    Ok(r.value)
}

/// `F = −(2/π)(1/4π²)∫₀^∞dk_x k_x W(k_x) ∫dk_y Tr[dd·K]` for a damped dipole.
fn windowed_fdt(s: &FrictionScenario, v: f64, a: &ScalarResponse, dd: &ComplexTensor3) -> Result<(f64, f64)> {
    let (z, tol) = (s.z_a, s.rel_tol);
    let wa = a.omega();
    let width = a.gamma() + s.surface.gamma;
    let mut bps = vec![wa / v, 1.0 / v];
    bps.extend(lorentz_breakpoints((1.0 + wa) / v, width / v));
    bps.retain(|&b| b > 0.0 && b < KX_CUTOFF / z);
    let spec = QuadSpec::new(tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Rational { scale: 1.0 / z })
        .with_breakpoints(bps);
    let r = try_integrate_adaptive(
        |kx| {
            let damp = (-2.0 * kx * z).exp();
            if damp == 0.0 {
                return Ok(0.0);
            }
            let w = doppler_window(&s.surface, a, kx, v, 0.1 * tol)?;
            if w == 0.0 {
                return Ok(0.0);
            }
            let j = diag_contract(dd, &ky_integrated_spatial(kx, z, 0.1 * tol)?);
            Ok(kx * w * j * damp)
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )?;
    let c = -2.0 / PI / (4.0 * PI * PI);
    Ok((c * r.value, c.abs() * r.error))
}

/// Second-order (bare-polarizability) friction by numerical quadrature.
///
/// An undamped dipole uses the sharp-line form with the Doppler threshold
/// `k_x > ω_a/v`; intrinsic damping uses the full Doppler window. A lossless
/// surface with an undamped dipole has no regular integrand and is redirected
/// to [`friction_plasma_closed_form`] with `redirected` set.
pub fn friction_second_order_numeric(s: &FrictionScenario) -> Result<FrictionResult> {
    s.validate()?;
    let m = FrictionMethod::SecondOrder;
    let v = s.v_x.abs();
    if v == 0.0 {
        return Ok(FrictionResult::exact(0.0, 0.0, m));
    }
    let gamma = s.dipole.gamma_intrinsic;
    if gamma == 0.0 && s.surface.gamma == 0.0 {
        let mut r = friction_plasma_closed_form(s)?;
        r.method = m;
        r.redirected = true;
        return Ok(r);
    }
    let Some(scale) = s.force_scale() else {
        return Ok(FrictionResult::exact(v, 0.0, m).oriented(s.v_x));
    };
    let dd = s.dipole.dd();
    let (f, e) = if gamma == 0.0 {
        second_order_delta(s, v, &dd)?
    } else {
        windowed_fdt(s, v, &ScalarResponse::for_model(&s.dipole, gamma), &dd)?
    };
    let mut r = FrictionResult::exact(v, f * scale, m);
    r.error = e * scale;
    r.underflow = f == 0.0;
    Ok(r.oriented(s.v_x))
}

/// Low-velocity FDT friction: the windowed integral and its cubic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowVelocityFriction {
    pub windowed: FrictionResult,
    /// `F/|F₀|` per `v³`.
    pub cubic_coefficient: f64,
    pub cubic_error: f64,
}

impl LowVelocityFriction {
    pub fn cubic(&self) -> FrictionResult {
        let v = self.windowed.v_x;
        FrictionResult {
            v_x: v,
            force: self.cubic_coefficient * v.powi(3),
            error: self.cubic_error * v.abs().powi(3),
            method: FrictionMethod::FdtCubic,
            underflow: false,
            redirected: false,
        }
    }
}

/// FDT friction with the free-space dressed response (intrinsic plus
/// radiative damping) and its `v³` coefficient
/// `−(1/12π³)·a₁r₁∫₀^∞dk_x k_x⁴∫dk_y Tr[dd·K]`.
///
/// Fails with [`DispersiaError::HigherOrderRegime`] when either low-frequency
/// slope vanishes, since the leading term is then beyond cubic.
pub fn friction_fdt_low_velocity(s: &FrictionScenario) -> Result<LowVelocityFriction> {
    s.validate()?;
    let a = ScalarResponse::for_model(&s.dipole, s.dipole.gamma_intrinsic + s.dipole.gamma_free);
    let a1 = a.ohmic_slope();
    let r1 = s.surface.gamma;
    if a1 == 0.0 || r1 == 0.0 {
        return Err(DispersiaError::HigherOrderRegime(format!(
            "vanishing low-frequency slope (atom {a1}, surface {r1}); friction is beyond cubic order"
        )));
    }
    let v = s.v_x.abs();
    let m = FrictionMethod::FdtWindowed;
    let Some(scale) = s.force_scale() else {
        return Ok(LowVelocityFriction {
            windowed: FrictionResult::exact(v, 0.0, m).oriented(s.v_x),
            cubic_coefficient: 0.0,
            cubic_error: 0.0,
        });
    };
    let dd = s.dipole.dd();
    let (z, tol) = (s.z_a, s.rel_tol);
    let spec = QuadSpec::new(tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Rational { scale: 1.0 / z });
    let moment = try_integrate_adaptive(
        |kx| {
            let damp = (-2.0 * kx * z).exp();
            if damp == 0.0 {
                return Ok(0.0);
            }
            Ok(kx.powi(4) * diag_contract(&dd, &ky_integrated_spatial(kx, z, 0.1 * tol)?) * damp)
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )?;
    let c = -a1 * r1 / (12.0 * PI.powi(3)) * scale;
    let windowed = if v == 0.0 {
        FrictionResult::exact(0.0, 0.0, m)
    } else {
        let (f, e) = windowed_fdt(s, v, &a, &dd)?;
        let mut r = FrictionResult::exact(v, f * scale, m);
        r.error = e * scale;
        r.oriented(s.v_x)
    };
    Ok(LowVelocityFriction {
        windowed,
        cubic_coefficient: c * moment.value,
        cubic_error: c.abs() * moment.error,
    })
}

/// Linear-in-velocity friction terms from the Markovian spectrum and from the
/// non-Markovian correction, with their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFrictionTerms {
    pub v_x: f64,
    pub qrt_linear: f64,
    pub nm_linear: f64,
    pub residual: f64,
    pub error: f64,
}

/// Poles and response used for the QRT comparison: the free-space dressed dipole.
fn dressed_response(model: &DipoleModel) -> Result<(PoleSet, Box<dyn Polarizability>)> {
    let gamma = model.gamma_intrinsic + model.gamma_free;
    match model.kind {
        DipoleKind::TwoLevel => {
            let atom = TwoLevelAtom::new(DressedRates::new(model.omega_a, gamma)?, model.dd());
            Ok((atom.poles(), Box::new(atom)))
        }
        DipoleKind::Oscillator => {
            let osc: DampedOscillator = model.vacuum_oscillator();
            Ok((osc.poles()?, Box::new(osc)))
        }
    }
}

/// `F_QRT = −(2v/π)∫₀^∞dω r_I(ω) Tr[Re Σ iRes/(Ω + ω)² · M]` with
/// `M = ∫d²k/(2π)² k_x² K(k)`, and the non-Markovian counterpart
/// `F_nM = (2v/π)∫₀^∞dω r_I(ω) Tr[N′(ω)·M]` where
/// `N′(ω) = −(2ω/π)∫₀^∞dξ D(ξ)ξ/(ξ² + ω²)²` comes from the branch cut.
///
/// The two are independent quadratures; their sum vanishes identically.
pub fn friction_qrt_with_cancellation(s: &FrictionScenario) -> Result<LinearFrictionTerms> {
    s.validate()?;
    if !(s.surface.gamma > 0.0) {
        return Err(DispersiaError::HigherOrderRegime(
            "a lossless surface has no linear friction term".into(),
        ));
    }
    let v = s.v_x;
    let Some(scale) = s.force_scale() else {
        return Ok(LinearFrictionTerms {
            v_x: v,
            qrt_linear: 0.0,
            nm_linear: 0.0,
            residual: 0.0,
            error: 0.0,
        });
    };
    let (poles, alpha) = dressed_response(&s.dipole)?;
    let (z, tol) = (s.z_a, s.rel_tol);

    let kspec = QuadSpec::new(tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Rational { scale: 1.0 / z });
    let mk = try_integrate_adaptive(
        |kx| {
            let damp = (-2.0 * kx * z).exp();
            if damp == 0.0 {
                return Ok(ComplexTensor3::zero());
            }
            Ok(ky_integrated_spatial(kx, z, 0.1 * tol)?.scale(kx * kx * damp))
        },
        Domain::SemiInfinite(0.0),
        &kspec,
    )?;
    // Both half planes of k_x contribute equally.
    let m = mk.value.scale(2.0 / (4.0 * PI * PI));

    let mut bps = lorentz_breakpoints(1.0, s.surface.gamma);
    bps.extend(poles.poles.iter().map(|p| p.omega.re));
    let wspec = QuadSpec::new(tol).with_abs_tol(1e-300).with_breakpoints(bps);

    let qrt = try_integrate_adaptive(
        |w| {
            let a = poles
                .poles
                .iter()
                .fold(ComplexTensor3::zero(), |acc, p| acc + p.residue * (I / ((p.omega + w) * (p.omega + w))));
            Ok(s.surface.quasistatic_reflection_imag(w)? * ComplexTensor3::trace_product(&hermitian_part(&a), &m).re)
        },
        Domain::SemiInfinite(0.0),
        &wspec,
    )?;

    let nm = try_integrate_adaptive(
        |w| {
            if w == 0.0 {
                return Ok(0.0);
            }
            let spec = branch_spec(&poles, w, 0.1 * tol);
            let d = try_integrate_adaptive(
                |xi| {
                    // D ~ ξ⁻² so the integrand is ~ξ⁻⁵; beyond this it is far below any tolerance.
                    if xi > BRANCH_XI_MAX {
                        return Ok(ComplexTensor3::zero());
                    }
                    let q = xi * xi + w * w;
                    Ok(branch_discontinuity(alpha.as_ref(), xi)?.scale(xi / (q * q)))
                },
                Domain::SemiInfinite(0.0),
                &spec,
            )?;
            let np = hermitian_part(&d.value).scale(-2.0 * w / PI);
            Ok(s.surface.quasistatic_reflection_imag(w)? * ComplexTensor3::trace_product(&np, &m).re)
        },
        Domain::SemiInfinite(0.0),
        &wspec,
    )?;

    let pre = 2.0 / PI * scale;
    let qrt_linear = -pre * qrt.value * v;
    let nm_linear = pre * nm.value * v;
    Ok(LinearFrictionTerms {
        v_x: v,
        qrt_linear,
        nm_linear,
        residual: qrt_linear + nm_linear,
        error: pre * (qrt.error + nm.error) * v.abs(),
    })
}

/// Evaluates `method` at each velocity in parallel; rows keep input order.
pub fn friction_velocity_scan(
    base: &FrictionScenario,
    velocities: &[f64],
    method: FrictionMethod,
) -> Result<Vec<FrictionResult>> {
    velocities
        .par_iter()
        .map(|&v| {
            let s = base.with_velocity(v);
            match method {
                FrictionMethod::SecondOrder => friction_second_order_numeric(&s),
                FrictionMethod::ClosedForm => friction_plasma_closed_form(&s),
                FrictionMethod::Asymptotic(regime) => friction_asymptotic(&s, regime),
                FrictionMethod::FdtWindowed => friction_fdt_low_velocity(&s).map(|r| r.windowed),
                FrictionMethod::FdtCubic => friction_fdt_low_velocity(&s).map(|r| r.cubic()),
            }
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{bessel_k, gauss_legendre, integrate_fixed};
    use approx::assert_relative_eq;

    fn atom() -> DipoleModel {
        DipoleModel::new(1.0, DipoleOrientation::Isotropic, 0.2, 0.0, 0.0, DipoleKind::TwoLevel).unwrap()
    }

    fn oscillator(gamma: f64) -> DipoleModel {
        DipoleModel::new(1.0, DipoleOrientation::Isotropic, 0.2, gamma, 0.0, DipoleKind::Oscillator).unwrap()
    }

    fn scenario(v: f64, surface_gamma: f64, d: DipoleModel) -> FrictionScenario {
        FrictionScenario::new(v, 0.05, SurfaceModel::drude(surface_gamma).unwrap(), d).unwrap()
    }

    #[test]
    fn orientation_factor_values() {
        let n = orientation_factors(0.0, 1.3);
        assert_relative_eq!(n.a0, 1.5, max_relative = 1e-15);
        assert_relative_eq!(n.a2, 1.5, max_relative = 1e-15);
        let y = orientation_factors(0.5 * PI, 0.5 * PI);
        assert_relative_eq!(y.a0, -1.5, max_relative = 1e-14);
        assert_relative_eq!(y.a2, 1.5, max_relative = 1e-14);
    }

    #[test]
    fn sphere_average_is_one() {
        let rule = gauss_legendre(24);
        let avg = |f: &dyn Fn(OrientationFactors) -> f64| {
            integrate_fixed(
                |t: f64| t.sin() * integrate_fixed(|p: f64| f(orientation_factors(t, p)), 0.0, 2.0 * PI, &rule),
                0.0,
                PI,
                &rule,
            ) / (4.0 * PI)
        };
        assert_relative_eq!(avg(&|o| o.a0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(avg(&|o| o.a2), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ky_integral_matches_bessel_form() {
        let z = 0.05;
        for kx in [0.5, 7.0, 60.0, 900.0] {
            let x = 2.0 * kx * z;
            let r = ky_integrated_spatial(kx, z, 1e-12).unwrap();
            let (k0, k2) = (bessel_k_scaled(0, x).unwrap(), bessel_k_scaled(2, x).unwrap());
            let want = [kx * kx * k0, 0.5 * kx * kx * (k2 - k0), 0.5 * kx * kx * (k0 + k2)];
            for i in 0..3 {
                assert_relative_eq!(r.m[i][i].re, want[i], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_matches_direct_bessel_evaluation() {
        let s = scenario(0.03, 0.0, atom());
        let u: f64 = 0.05 * 1.2 / 0.03;
        let k = bessel_k(0, 2.0 * u).unwrap() + bessel_k(2, 2.0 * u).unwrap();
        let want = -(0.2 / 12.0) * 1.2f64.powi(3) / 0.03f64.powi(4) * k;
        assert_relative_eq!(friction_plasma_closed_form(&s).unwrap().force, want, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_underflows_gracefully() {
        let r = friction_plasma_closed_form(&scenario(1e-7, 0.0, atom())).unwrap();
        assert_eq!(r.force, 0.0);
        assert!(r.underflow);
    }

    #[test]
    fn zero_velocity_is_zero_everywhere() {
        let s = scenario(0.0, 0.1, oscillator(0.1));
        assert_eq!(friction_second_order_numeric(&s).unwrap().force, 0.0);
        assert_eq!(friction_plasma_closed_form(&s).unwrap().force, 0.0);
        assert_eq!(friction_fdt_low_velocity(&s).unwrap().windowed.force, 0.0);
    }

    #[test]
    fn lossless_request_is_redirected() {
        let s = scenario(0.03, 0.0, atom());
        let r = friction_second_order_numeric(&s).unwrap();
        assert!(r.redirected);
        assert_eq!(r.force, friction_plasma_closed_form(&s).unwrap().force);
    }

    #[test]
    fn sharp_and_windowed_routes_meet_for_small_damping() {
        let sharp = friction_second_order_numeric(&scenario(0.01, 0.1, atom())).unwrap().force;
        let soft = friction_second_order_numeric(&scenario(0.01, 0.1, oscillator(1e-5))).unwrap().force;
        assert_relative_eq!(soft, sharp, max_relative = 1e-4);
    }

    #[test]
    fn reversed_motion_flips_sign() {
        for v in [0.004, 0.02] {
            let f = friction_second_order_numeric(&scenario(v, 0.1, atom())).unwrap().force;
            let b = friction_second_order_numeric(&scenario(-v, 0.1, atom())).unwrap().force;
            assert!(f < 0.0);
            assert_eq!(b, -f);
        }
    }

    #[test]
    fn regime_mismatch_is_a_configuration_error() {
        let s = scenario(0.01, 0.1, atom());
        assert!(matches!(
            friction_asymptotic(&s, AsymptoticRegime::Intrinsic),
            Err(DispersiaError::Configuration(_))
        ));
        assert!(matches!(
            friction_asymptotic(&s, AsymptoticRegime::Radiative),
            Err(DispersiaError::Configuration(_))
        ));
        assert!(friction_asymptotic(&s, AsymptoticRegime::SurfaceOhmic).is_ok());
    }

    #[test]
    fn undamped_dipole_has_no_cubic_term() {
        assert!(matches!(
            friction_fdt_low_velocity(&scenario(1e-4, 0.1, atom())),
            Err(DispersiaError::HigherOrderRegime(_))
        ));
        assert!(matches!(
            friction_fdt_low_velocity(&scenario(1e-4, 0.0, oscillator(0.1))),
            Err(DispersiaError::HigherOrderRegime(_))
        ));
    }

    #[test]
    fn qrt_linear_term_is_linear_and_a_drag() {
        let d = DipoleModel::new(1.0, DipoleOrientation::Isotropic, 0.2, 0.0, 2e-3, DipoleKind::TwoLevel).unwrap();
        let a = friction_qrt_with_cancellation(&scenario(1e-4, 0.1, d)).unwrap();
        let b = friction_qrt_with_cancellation(&scenario(2e-4, 0.1, d)).unwrap();
        assert!(a.qrt_linear < 0.0);
        assert_eq!(b.qrt_linear, 2.0 * a.qrt_linear);
        assert!(a.residual.abs() < 1e-6 * a.qrt_linear.abs());
    }

    #[test]
    fn scan_keeps_order() {
        let base = scenario(0.01, 0.1, atom());
        let vs = [0.03, 0.01, 0.02];
        let rows = friction_velocity_scan(&base, &vs, FrictionMethod::ClosedForm).unwrap();
        for (r, v) in rows.iter().zip(vs) {
            assert_eq!(r.v_x, v);
            assert_eq!(r.force, friction_plasma_closed_form(&base.with_velocity(v)).unwrap().force);
        }
    }
}

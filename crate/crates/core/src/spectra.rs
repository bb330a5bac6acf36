//! Stationary dipole correlators and power spectra at zero temperature.
//!
//! All spectra are symmetric-part quantities; `ħ = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DispersiaError, Result};
use crate::polarizability::{DampedOscillator, Polarizability, PoleSet, TwoLevelAtom};
use crate::quad::{try_integrate_adaptive, Domain, QuadResult, QuadSpec, Transform};
use crate::tensor::ComplexTensor3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Hermitian part `(T + T†)/2`, the tensor generalization of `Re`.
pub fn hermitian_part(t: &ComplexTensor3) -> ComplexTensor3 {
    (*t + t.adjoint()).scale(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumMethod {
    /// Exact equilibrium spectrum `θ(ω)α_ℑ(ω)/π`.
    Fdt,
    /// Markovian Lorentzian spectrum built from the poles alone.
    Qrt,
}

/// A spectrum source: the poles for QRT and the response for FDT.
pub struct SpectrumModel<'a> {
    pub method: SpectrumMethod,
    pub poles: PoleSet,
    pub alpha: &'a dyn Polarizability,
}

impl SpectrumModel<'_> {
    pub fn power_spectrum(&self, omega: f64) -> Result<ComplexTensor3> {
        match self.method {
            SpectrumMethod::Fdt => power_spectrum_fdt(omega, self.alpha),
            SpectrumMethod::Qrt => Ok(power_spectrum_qrt(omega, &self.poles)),
        }
    }
}

/// `S(ω) = θ(ω)·α_ℑ(ω)/π`; identically zero for `ω ≤ 0`.
pub fn power_spectrum_fdt(omega: f64, alpha: &dyn Polarizability) -> Result<ComplexTensor3> {
    if !(omega > 0.0) {
        return Ok(ComplexTensor3::zero());
    }
    Ok(alpha.alpha(Complex64::new(omega, 0.0))?.im_construction().scale(1.0 / PI))
}

/// `S_QRT(ω) = (1/π)·Re Σ_i i·Res_i/(Ω_i − ω)`, a sum of Lorentzians.
pub fn power_spectrum_qrt(omega: f64, poles: &PoleSet) -> ComplexTensor3 {
    let s = poles
        .poles
        .iter()
        .fold(ComplexTensor3::zero(), |acc, p| acc + p.residue * (I / (p.omega - omega)));
    hermitian_part(&s).scale(1.0 / PI)
}

/// Leading low-frequency behaviour `α_I(ω) ≈ a_{2m+1} ω^{2m+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParams {
    pub m: u32,
    pub a_coeff: ComplexTensor3,
}

impl TailParams {
    pub fn two_level(atom: &TwoLevelAtom) -> Self {
        Self {
            m: 0,
            a_coeff: atom.dd.scale(atom.ohmic_coefficient()),
        }
    }

    pub fn oscillator(osc: &DampedOscillator) -> Self {
        Self {
            m: 0,
            a_coeff: osc.dd.scale(osc.ohmic_coefficient()),
        }
    }

    /// `C(τ) ≈ (1/π)·a_{2m+1}·(−1)^{m+1}·(2m+1)!/τ^{2(m+1)}`.
    pub fn tail(&self, tau: f64) -> ComplexTensor3 {
        let n = 2 * self.m + 1;
        let fact: f64 = (1..=n).map(f64::from).product();
        let sign = if self.m % 2 == 0 { -1.0 } else { 1.0 };
        self.a_coeff.scale(sign * fact / (PI * tau.powi(2 * (self.m as i32 + 1))))
    }
}

/// `D(ξ) = [α(iξ) − α(−iξ)]/2`, the discontinuity feeding the branch integral.
pub fn branch_discontinuity(alpha: &dyn Polarizability, xi: f64) -> Result<ComplexTensor3> {
    let up = alpha.alpha(Complex64::new(0.0, xi))?;
    let down = alpha.alpha(Complex64::new(0.0, -xi))?;
    Ok((up - down).scale(0.5))
}

/// Upper end of branch-cut integrals; `α(iξ) ~ ξ⁻²` is negligible long before
/// `ξ²` leaves the double range.
pub(crate) const BRANCH_XI_MAX: f64 = 1e100;

pub(crate) fn branch_spec(poles: &PoleSet, extra_scale: f64, rel_tol: f64) -> QuadSpec {
    let gmin = poles
        .poles
        .iter()
        .map(|p| -p.omega.im)
        .fold(f64::INFINITY, f64::min);
    let wmin = poles.min_pole_modulus();
    let mut scale = extra_scale;
    if gmin.is_finite() && gmin > 0.0 {
        scale = scale.min(gmin);
    }
    let mut bps = vec![extra_scale];
    if gmin.is_finite() && gmin > 0.0 {
        bps.push(gmin);
    }
    if wmin.is_finite() {
        bps.push(wmin);
    }
    QuadSpec::new(rel_tol)
        .with_abs_tol(1e-300)
        .with_transform(Transform::Exp { scale })
        .with_breakpoints(bps)
}

/// `C^s(τ) = −Σ_i Res_i e^{−iΩ_iτ} + (1/π)∫₀^∞ dξ e^{−ξτ} D(ξ)` for `τ ≥ 0`.
pub fn stationary_correlator(
    tau: f64,
    poles: &PoleSet,
    alpha: &dyn Polarizability,
    rel_tol: f64,
) -> Result<QuadResult<ComplexTensor3>> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(DispersiaError::Domain(format!("correlator lag must be ≥ 0, got {tau}")));
    }
    let resid = poles
        .poles
        .iter()
        .fold(ComplexTensor3::zero(), |acc, p| acc - p.residue * (-I * p.omega * tau).exp());
    let scale = if tau > 0.0 { 1.0 / tau } else { poles.min_pole_modulus().min(1.0) };
    let spec = branch_spec(poles, scale, rel_tol);
    let branch = try_integrate_adaptive(
        |xi| {
            if xi > BRANCH_XI_MAX {
                return Ok(ComplexTensor3::zero());
            }
            Ok(branch_discontinuity(alpha, xi)?.scale((-xi * tau).exp() / PI))
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )?;
    Ok(QuadResult {
        value: resid + branch.value,
        error: branch.error,
        evaluations: branch.evaluations,
    })
}

/// Splits `Re∫₀^∞dτ e^{ixτ}C(τ)` with `x = k·v − ω` into
/// `S_QRT(x) = Re Σ i·Res/(Ω − x)` and `S_nM(x) = −Re Σ i·Res/(Ω + |x|)`.
///
/// The parts cancel for `x ≤ 0`; for `x > 0` they add up to `α_ℑ(x)`.
pub fn half_range_transform(x: f64, poles: &PoleSet) -> (ComplexTensor3, ComplexTensor3) {
    let mut q = ComplexTensor3::zero();
    let mut nm = ComplexTensor3::zero();
    for p in &poles.poles {
        q += p.residue * (I / (p.omega - x));
        nm += p.residue * (-I / (p.omega + x.abs()));
    }
    (hermitian_part(&q), hermitian_part(&nm))
}

/// The non-Markovian part from the branch integral,
/// `(1/π)∫₀^∞ dξ D(ξ)·ξ/(ξ² + x²)`; equals `S_nM(x)` of
/// [`half_range_transform`] by contour deformation.
pub fn nm_part_branch(x: f64, poles: &PoleSet, alpha: &dyn Polarizability, rel_tol: f64) -> Result<QuadResult<ComplexTensor3>> {
    let scale = if x != 0.0 { x.abs() } else { 1.0 };
    let spec = branch_spec(poles, scale, rel_tol);
    try_integrate_adaptive(
        |xi| {
            if xi > BRANCH_XI_MAX {
                return Ok(ComplexTensor3::zero());
            }
            Ok(branch_discontinuity(alpha, xi)?.scale(xi / (PI * (xi * xi + x * x))))
        },
        Domain::SemiInfinite(0.0),
        &spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarizability::DressedRates;
    use approx::assert_relative_eq;

    fn atom(g: f64) -> TwoLevelAtom {
        TwoLevelAtom::new(DressedRates::new(1.0, g).unwrap(), ComplexTensor3::from_real_diagonal([1.0, 1.0, 2.0]))
    }

    #[test]
    fn fdt_vanishes_for_non_positive_frequency() {
        let a = atom(0.01);
        for w in [-0.1, -3.0, 0.0] {
            assert_eq!(power_spectrum_fdt(w, &a).unwrap(), ComplexTensor3::zero());
        }
        assert!(power_spectrum_fdt(0.5, &a).unwrap().m[0][0].re > 0.0);
    }

    #[test]
    fn qrt_is_lorentzian() {
        let a = atom(0.01);
        let s = power_spectrum_qrt(0.0, &a.poles());
        assert_relative_eq!(s.m[2][2].re, 2.0 / PI * 0.01 / (1.0 + 1e-4), max_relative = 1e-13);
        assert!(s.is_hermitian(1e-15));
    }

    #[test]
    fn half_range_parts() {
        let a = atom(0.05);
        let ps = a.poles();
        for x in [-2.0, -0.3, 0.0] {
            let (q, n) = half_range_transform(x, &ps);
            assert!((q + n).max_abs() < 1e-14 * q.max_abs().max(1.0));
        }
        for x in [0.2, 1.0, 1.7] {
            let (q, n) = half_range_transform(x, &ps);
            let fdt = power_spectrum_fdt(x, &a).unwrap().scale(PI);
            assert!((q + n - fdt).max_abs() < 1e-12 * fdt.max_abs());
        }
    }

    #[test]
    fn branch_route_matches_poles() {
        let a = atom(0.05);
        let ps = a.poles();
        for x in [0.0, 0.4, 1.0, 3.0] {
            let (_, n) = half_range_transform(x, &ps);
            let b = nm_part_branch(x, &ps, &a, 1e-11).unwrap().value;
            assert!((b - n).max_abs() < 1e-8 * n.max_abs(), "x = {x}: {} vs {}", b.m[0][0], n.m[0][0]);
        }
    }

    #[test]
    fn undamped_correlator_oscillates() {
        let a = atom(0.0);
        let c = stationary_correlator(3.0, &a.poles(), &a, 1e-10).unwrap().value;
        let e = (-I * 3.0).exp();
        assert!((c.m[0][0] - e).norm() < 1e-12);
    }

    #[test]
    fn tail_sign_and_order() {
        let a = atom(0.1);
        let t = TailParams::two_level(&a);
        assert_eq!(t.m, 0);
        assert!(t.tail(10.0).m[0][0].re < 0.0);
    }
}

//! Atomic response: two-level and oscillator polarizabilities, surface
//! dressing, and pole/residue extraction.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DispersiaError, Result};
use crate::green::{HalfSpace, ReflectionModel};
use crate::material::SurfaceModel;
use crate::tensor::ComplexTensor3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Level structure of the dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DipoleKind {
    TwoLevel,
    Oscillator,
}

/// Orientation of the transition dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DipoleOrientation {
    /// Orientation average, `dd = |d|²𝟙/3`.
    Isotropic,
    /// Fixed direction with polar angle `theta` and azimuth `phi`.
    Fixed { theta: f64, phi: f64 },
}

impl DipoleOrientation {
    pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }
}

/// Dipole parameters in units of `ω_sp` (`ħ = ε₀ = c = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleModel {
    /// `|d|²`.
    pub d_squared: f64,
    pub orientation: DipoleOrientation,
    pub omega_a: f64,
    /// Damping intrinsic to the particle (0 for atoms).
    pub gamma_intrinsic: f64,
    /// Free-space radiative decay rate.
    pub gamma_free: f64,
    pub kind: DipoleKind,
}

impl DipoleModel {
    pub fn new(
        d_squared: f64,
        orientation: DipoleOrientation,
        omega_a: f64,
        gamma_intrinsic: f64,
        gamma_free: f64,
        kind: DipoleKind,
    ) -> Result<Self> {
        let m = Self {
            d_squared,
            orientation,
            omega_a,
            gamma_intrinsic,
            gamma_free,
            kind,
        };
        m.validate()?;
        Ok(m)
    }

    /// Two-level atom whose dipole strength follows from its free-space rate,
    /// `γ_free = ω_a³|d|²/(3π)`.
    pub fn atom_from_free_rate(omega_a: f64, gamma_free: f64, orientation: DipoleOrientation) -> Result<Self> {
        let d2 = 3.0 * PI * gamma_free / omega_a.powi(3);
        Self::new(d2, orientation, omega_a, 0.0, gamma_free, DipoleKind::TwoLevel)
    }

    /// Dipole strength from the static polarizability, `α₀ = 2|d|²/(3ω_a)`.
    pub fn d_squared_from_alpha0(alpha0: f64, omega_a: f64) -> f64 {
        1.5 * omega_a * alpha0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(DispersiaError::Domain(format!("{what} out of range: {v}")))
        };
        if !(self.d_squared >= 0.0) || !self.d_squared.is_finite() {
            return bad("|d|²", self.d_squared);
        }
        if !(self.omega_a > 0.0) || !self.omega_a.is_finite() {
            return bad("omega_a", self.omega_a);
        }
        if !(self.gamma_intrinsic >= 0.0) || !self.gamma_intrinsic.is_finite() {
            return bad("gamma_intrinsic", self.gamma_intrinsic);
        }
        if !(self.gamma_free >= 0.0) || !self.gamma_free.is_finite() {
            return bad("gamma_free", self.gamma_free);
        }
        Ok(())
    }

    /// Static polarizability `α₀ = 2|d|²/(3ω_a)`.
    pub fn alpha0(&self) -> f64 {
        2.0 * self.d_squared / (3.0 * self.omega_a)
    }

    /// Independent dipole modes `(|d_m|², direction)`; their dyads sum to `dd`.
    pub fn modes(&self) -> Vec<(f64, [f64; 3])> {
        match self.orientation {
            DipoleOrientation::Isotropic => {
                let s = self.d_squared / 3.0;
                vec![(s, [1.0, 0.0, 0.0]), (s, [0.0, 1.0, 0.0]), (s, [0.0, 0.0, 1.0])]
            }
            DipoleOrientation::Fixed { theta, phi } => {
                vec![(self.d_squared, DipoleOrientation::unit_vector(theta, phi))]
            }
        }
    }

    /// The dyad `dd`.
    pub fn dd(&self) -> ComplexTensor3 {
        self.modes()
            .into_iter()
            .fold(ComplexTensor3::zero(), |acc, (s, n)| acc + ComplexTensor3::dyad(n, n).scale(s))
    }

    /// Bare oscillator with intrinsic damping only.
    pub fn intrinsic_oscillator(&self) -> DampedOscillator {
        DampedOscillator {
            omega_a: self.omega_a,
            gamma: self.gamma_intrinsic,
            dd: self.dd(),
        }
    }

    /// Free-space dressed oscillator: intrinsic plus radiative damping.
    pub fn vacuum_oscillator(&self) -> DampedOscillator {
        DampedOscillator {
            omega_a: self.omega_a,
            gamma: self.gamma_intrinsic + self.gamma_free,
            dd: self.dd(),
        }
    }
}

/// Field-renormalized transition frequency and decay rate at the atom's position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedRates {
    pub omega_tilde: f64,
    pub gamma_a: f64,
}

impl DressedRates {
    pub fn new(omega_tilde: f64, gamma_a: f64) -> Result<Self> {
        if !(omega_tilde > 0.0) || !omega_tilde.is_finite() {
            return Err(DispersiaError::PhysicalRegime(format!(
                "renormalized transition frequency must be positive, got {omega_tilde}"
            )));
        }
        if !(gamma_a >= 0.0) || !gamma_a.is_finite() {
            return Err(DispersiaError::PhysicalRegime(format!(
                "decay rate must be non-negative, got {gamma_a}"
            )));
        }
        Ok(Self { omega_tilde, gamma_a })
    }
}

/// A linear response tensor `α(ω)` obeying `α(−ω*) = α(ω)*`.
pub trait Polarizability: Sync {
    fn alpha(&self, omega: Complex64) -> Result<ComplexTensor3>;
}

/// Second-order two-level polarizability `dd·2ω̃/[ω̃² − (ω + iγ)²]`.
///
/// With `gamma_a = 0` this is the bare polarizability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelAtom {
    pub rates: DressedRates,
    pub dd: ComplexTensor3,
}

impl TwoLevelAtom {
    pub fn new(rates: DressedRates, dd: ComplexTensor3) -> Self {
        Self { rates, dd }
    }

    /// Ohmic coefficient `a₁ = lim α_I(ω)/ω` (per unit `dd`).
    pub fn ohmic_coefficient(&self) -> f64 {
        let (w, g) = (self.rates.omega_tilde, self.rates.gamma_a);
        4.0 * w * g / (w * w + g * g).powi(2)
    }

    pub fn poles(&self) -> PoleSet {
        PoleSet {
            poles: vec![Pole {
                omega: Complex64::new(self.rates.omega_tilde, -self.rates.gamma_a),
                residue: -self.dd,
            }],
        }
    }
}

impl Polarizability for TwoLevelAtom {
    fn alpha(&self, omega: Complex64) -> Result<ComplexTensor3> {
        let w = self.rates.omega_tilde;
        let x = omega + I * self.rates.gamma_a;
        let den = w * w - x * x;
        if den == ZERO {
            return Err(DispersiaError::Singularity(format!(
                "two-level polarizability pole at omega = {omega}"
            )));
        }
        Ok(self.dd * (2.0 * w / den))
    }
}

/// Damped oscillator `(2dd/ω_a)·ω_a²/(ω_a² − ω² − iγω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillator {
    pub omega_a: f64,
    pub gamma: f64,
    pub dd: ComplexTensor3,
}

impl DampedOscillator {
    fn denominator(&self, omega: Complex64) -> Complex64 {
        self.omega_a * self.omega_a - omega * omega - I * self.gamma * omega
    }

    /// Low-frequency slope `α′_I(0) = 2γ/ω_a³` (per unit `dd`).
    pub fn ohmic_coefficient(&self) -> f64 {
        2.0 * self.gamma / self.omega_a.powi(3)
    }

    /// Pole `√(ω_a² − γ²/4) − iγ/2` with residue `−(ω_a/ω₁)dd`.
    pub fn poles(&self) -> Result<PoleSet> {
        let w1sq = self.omega_a * self.omega_a - 0.25 * self.gamma * self.gamma;
        if !(w1sq > 0.0) {
            return Err(DispersiaError::PhysicalRegime(format!(
                "overdamped oscillator (gamma = {} ≥ 2 omega_a) has no resonant poles",
                self.gamma
            )));
        }
        let w1 = w1sq.sqrt();
        PoleSet::checked(vec![Pole {
            omega: Complex64::new(w1, -0.5 * self.gamma),
            residue: -self.dd.scale(self.omega_a / w1),
        }])
    }
}

impl Polarizability for DampedOscillator {
    fn alpha(&self, omega: Complex64) -> Result<ComplexTensor3> {
        let den = self.denominator(omega);
        if den == ZERO {
            return Err(DispersiaError::Singularity(format!(
                "oscillator polarizability pole at omega = {omega}"
            )));
        }
        Ok(self.dd * (2.0 * self.omega_a / den))
    }
}

/// Oscillator dressed by the surface through its coincident scattered Green
/// tensor: each mode gets `2ω_a d_m d_m/(D₀(ω) − 2ω_a d_m·g(ω)·d_m)`.
///
/// `D₀` carries intrinsic plus free-space radiative damping, so only the
/// scattered field enters the self-energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedOscillator {
    pub model: DipoleModel,
    pub half_space: HalfSpace,
    pub z_a: f64,
    pub rel_tol: f64,
}

impl DressedOscillator {
    pub fn new(model: DipoleModel, half_space: HalfSpace, z_a: f64, rel_tol: f64) -> Result<Self> {
        model.validate()?;
        if !(z_a > 0.0) {
            return Err(DispersiaError::Domain(format!("distance must be positive, got {z_a}")));
        }
        Ok(Self {
            model,
            half_space,
            z_a,
            rel_tol,
        })
    }

    /// Dressed polarizability for a given coincident Green tensor `g`.
    pub fn alpha_with_green(&self, omega: Complex64, g: &ComplexTensor3) -> Result<ComplexTensor3> {
        let vac = self.model.vacuum_oscillator();
        let d0 = vac.denominator(omega);
        let wa = self.model.omega_a;
        let mut out = ComplexTensor3::zero();
        for (s, n) in self.model.modes() {
            if s == 0.0 {
                continue;
            }
            let nn = ComplexTensor3::dyad(n, n);
            let ngn = ComplexTensor3::trace_product(&nn, g);
            let den = d0 - 2.0 * wa * s * ngn;
            if den == ZERO {
                return Err(DispersiaError::Singularity(format!(
                    "dressed oscillator pole at omega = {omega}"
                )));
            }
            out += nn * (2.0 * wa * s / den);
        }
        Ok(out)
    }

    /// Mode denominators `D₀ − 2ω_a|d_m|² n·g·n` on the imaginary axis.
    ///
    /// A non-positive value means the surface-dressed oscillator is unstable.
    pub fn check_stability(&self, xi: f64, g: &ComplexTensor3) -> Result<()> {
        let vac = self.model.vacuum_oscillator();
        let d0 = vac.denominator(Complex64::new(0.0, xi)).re;
        for (s, n) in self.model.modes() {
            let ngn = ComplexTensor3::trace_product(&ComplexTensor3::dyad(n, n), g).re;
            let den = d0 - 2.0 * self.model.omega_a * s * ngn;
            if !(den > 0.0) {
                return Err(DispersiaError::PhysicalRegime(format!(
                    "surface-dressed oscillator is unstable at z_a = {}: denominator {den:.3e} at xi = {xi:.3e}",
                    self.z_a
                )));
            }
        }
        Ok(())
    }

    /// `[1 − α_vac·g]⁻¹·α_vac`, the multiple-scattering form of the same tensor.
    pub fn resummed_alpha(&self, omega: Complex64, g: &ComplexTensor3) -> Result<ComplexTensor3> {
        let a = self.model.vacuum_oscillator().alpha(omega)?;
        let m = ComplexTensor3::identity() - a.matmul(g);
        Ok(m.inverse()?.matmul(&a))
    }

    /// Poles and residues in the near-field, where `g_ii = c_i r(ω)/z³` turns
    /// each mode denominator into a quartic polynomial.
    pub fn quasistatic_poles(&self) -> Result<PoleSet> {
        let surface: &SurfaceModel = &self.half_space.surface;
        let ws2 = 0.5 * surface.omega_p * surface.omega_p;
        let wa = self.model.omega_a;
        let gam = self.model.gamma_intrinsic + self.model.gamma_free;
        let z3 = self.z_a.powi(3);
        // Coincident near-field tensor for r = 1.
        let c = [1.0 / (32.0 * PI * z3), 1.0 / (32.0 * PI * z3), 1.0 / (16.0 * PI * z3)];
        let mut poles = Vec::new();
        for (s, n) in self.model.modes() {
            if s == 0.0 {
                continue;
            }
            let cn: f64 = (0..3).map(|i| n[i] * n[i] * c[i]).sum();
            let beta = 2.0 * wa * s * cn * ws2;
            let a = [Complex64::new(wa * wa, 0.0), -I * gam, Complex64::new(-1.0, 0.0)];
            let b = [Complex64::new(ws2, 0.0), -I * surface.gamma, Complex64::new(-1.0, 0.0)];
            let mut p = [ZERO; 5];
            for i in 0..3 {
                for j in 0..3 {
                    p[i + j] += a[i] * b[j];
                }
            }
            p[0] -= beta;
            let roots = polynomial_roots(&p)?;
            let nn = ComplexTensor3::dyad(n, n);
            for om in roots.into_iter().filter(|r| r.re > 0.0) {
                let num = 2.0 * wa * s * (ws2 - om * om - I * surface.gamma * om);
                let dp = p[1] + 2.0 * p[2] * om + 3.0 * p[3] * om * om + 4.0 * p[4] * om * om * om;
                poles.push(Pole {
                    omega: om,
                    residue: nn * (num / dp),
                });
            }
        }
        PoleSet::checked(poles)
    }
}

impl Polarizability for DressedOscillator {
    fn alpha(&self, omega: Complex64) -> Result<ComplexTensor3> {
        let g = self.half_space.coincident_green(self.z_a, omega, self.rel_tol)?.value;
        self.alpha_with_green(omega, &g)
    }
}

/// Radiative rate and level shift near the surface:
/// `γ_a = γ_free + 2 Tr[dd·Im g(ω_a)]`, `ω̃_a = ω_a − Tr[dd·Re g(ω_a)]`.
///
/// The free-space Lamb shift is taken as already contained in `ω_a`.
pub fn surface_modified_rates(
    z_a: f64,
    model: &DipoleModel,
    half_space: &HalfSpace,
    include_shift: bool,
    rel_tol: f64,
) -> Result<DressedRates> {
    model.validate()?;
    let g = half_space
        .coincident_green(z_a, Complex64::new(model.omega_a, 0.0), rel_tol)?
        .value;
    let t = ComplexTensor3::trace_product(&model.dd(), &g);
    let gamma_a = model.gamma_free + 2.0 * t.im;
    let omega_tilde = if include_shift { model.omega_a - t.re } else { model.omega_a };
    DressedRates::new(omega_tilde, gamma_a)
}

/// A simple pole `Ω` of `α` with its residue tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub omega: Complex64,
    pub residue: ComplexTensor3,
}

/// Poles in the lower-right quadrant; their mirror images `−Ω*` carry `−Res*`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    /// Builds a pole set, rejecting poles outside the open lower-right quadrant.
    pub fn checked(poles: Vec<Pole>) -> Result<Self> {
        for p in &poles {
            if !(p.omega.re > 0.0 && p.omega.im < 0.0) {
                return Err(DispersiaError::PhysicalRegime(format!(
                    "pole {} lies outside the lower-right quadrant",
                    p.omega
                )));
            }
        }
        Ok(Self { poles })
    }

    /// `Σ_i Res_i/(ω − Ω_i) − Res_i*/(ω + Ω_i*)`.
    pub fn reconstruct(&self, omega: Complex64) -> ComplexTensor3 {
        self.poles.iter().fold(ComplexTensor3::zero(), |acc, p| {
            acc + p.residue * (1.0 / (omega - p.omega)) - p.residue.conj() * (1.0 / (omega + p.omega.conj()))
        })
    }

    pub fn min_pole_modulus(&self) -> f64 {
        self.poles.iter().map(|p| p.omega.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// All roots of `Σ c_k x^k` by Durand-Kerner iteration with Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 || coeffs[n] == ZERO {
        return Err(DispersiaError::RootFinding("polynomial must have a non-zero leading coefficient".into()));
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / coeffs[n]).collect();
    let eval = |x: Complex64| monic.iter().rev().fold(ZERO, |acc, &c| acc * x + c);
    let deriv = |x: Complex64| {
        (1..=n)
            .rev()
            .fold(ZERO, |acc, k| acc * x + monic[k] * k as f64)
    };
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    let mut converged = false;
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            if den == ZERO {
                den = Complex64::new(1e-300, 0.0);
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm() / roots[i].norm().max(1e-300));
        }
        if delta < 1e-15 {
            converged = true;
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = deriv(*r);
            if d == ZERO {
                break;
            }
            *r -= eval(*r) / d;
        }
    }
    let scale = monic.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let worst = roots
        .iter()
        .map(|&r| eval(r).norm() / (scale * r.norm().max(1.0).powi(n as i32)))
        .fold(0.0, f64::max);
    if !converged && worst > 1e-10 {
        return Err(DispersiaError::RootFinding(format!(
            "Durand-Kerner did not converge, worst scaled residual {worst:.3e}"
        )));
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Near-field half-space used when only the analytic quasi-static response is wanted.
pub fn quasistatic_half_space(surface: SurfaceModel) -> HalfSpace {
    HalfSpace::new(surface, ReflectionModel::QuasiStatic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn atom() -> TwoLevelAtom {
        TwoLevelAtom::new(DressedRates::new(0.3, 0.01).unwrap(), ComplexTensor3::from_real_diagonal([1.0, 2.0, 0.5]))
    }

    #[test]
    fn two_level_static_value_and_slope() {
        let a = atom();
        let (w, g) = (0.3, 0.01);
        let a0 = a.alpha(c(0.0, 0.0)).unwrap();
        assert_relative_eq!(a0.m[0][0].re, 2.0 / w / (1.0 + g * g / (w * w)), max_relative = 1e-14);
        assert_eq!(a0.m[0][0].im, 0.0);
        let h = 1e-6;
        let slope = a.alpha(c(h, 0.0)).unwrap().m[0][0].im / h;
        assert_relative_eq!(slope, a.ohmic_coefficient(), max_relative = 1e-8);
    }

    #[test]
    fn two_level_partial_fractions() {
        let a = atom();
        let ps = a.poles();
        for i in 0..30 {
            let w = c(0.03 * i as f64, 0.0);
            let d = (ps.reconstruct(w) - a.alpha(w).unwrap()).max_abs();
            assert!(d < 1e-10 * a.alpha(w).unwrap().max_abs(), "at {w}: {d}");
        }
    }

    #[test]
    fn oscillator_low_frequency_slope() {
        let dd = ComplexTensor3::identity();
        let o = DampedOscillator { omega_a: 0.2, gamma: 0.1, dd };
        let h = 1e-7;
        assert_relative_eq!(o.alpha(c(h, 0.0)).unwrap().m[2][2].im / h, o.ohmic_coefficient(), max_relative = 1e-6);
        let ps = o.poles().unwrap();
        for w in [0.0, 0.1, 0.2, 0.35] {
            let d = (ps.reconstruct(c(w, 0.0)) - o.alpha(c(w, 0.0)).unwrap()).max_abs();
            assert!(d < 1e-10);
        }
        let over = DampedOscillator { omega_a: 0.2, gamma: 0.5, dd };
        assert!(over.poles().is_err());
    }

    #[test]
    fn polynomial_roots_of_known_quartic() {
        let rts = [c(1.0, -0.1), c(-1.0, -0.1), c(0.3, -0.02), c(-0.3, -0.02)];
        let mut p = vec![c(1.0, 0.0)];
        for r in rts {
            let mut q = vec![ZERO; p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                q[k + 1] += a;
                q[k] -= a * r;
            }
            p = q;
        }
        let found = polynomial_roots(&p).unwrap();
        for r in rts {
            assert!(found.iter().any(|f| (f - r).norm() < 1e-12), "missing {r}");
        }
    }

    #[test]
    fn isotropic_dd_has_trace_d_squared() {
        let m = DipoleModel::new(2.4, DipoleOrientation::Isotropic, 0.2, 0.0, 0.0, DipoleKind::Oscillator).unwrap();
        assert_relative_eq!(m.dd().trace().re, 2.4, max_relative = 1e-15);
        let f = DipoleModel {
            orientation: DipoleOrientation::Fixed { theta: 0.4, phi: 1.1 },
            ..m
        };
        assert_relative_eq!(f.dd().trace().re, 2.4, max_relative = 1e-15);
        assert!(DipoleModel::new(1.0, DipoleOrientation::Isotropic, 0.0, 0.0, 0.0, DipoleKind::TwoLevel).is_err());
    }
}

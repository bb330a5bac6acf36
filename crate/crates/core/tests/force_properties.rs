use std::f64::consts::PI;

use dispersia_core::casimir_polder::{CasimirPolder, CpMethod};
use dispersia_core::friction::{
    friction_asymptotic, friction_fdt_low_velocity, friction_plasma_closed_form, friction_qrt_with_cancellation,
    friction_second_order_numeric, friction_velocity_scan, orientation_factors, AsymptoticRegime, FrictionMethod,
    FrictionScenario,
};
use dispersia_core::green::{HalfSpace, ReflectionModel};
use dispersia_core::material::SurfaceModel;
use dispersia_core::polarizability::{DipoleKind, DipoleModel, DipoleOrientation, DressedRates, TwoLevelAtom};
use dispersia_core::quad::{try_integrate_adaptive, Domain, QuadSpec, Transform};
use dispersia_core::spectra::{power_spectrum_fdt, power_spectrum_qrt, stationary_correlator};
use dispersia_core::ComplexTensor3;
use proptest::prelude::*;

fn scenario(v: f64, z: f64, wa: f64, gs: f64, kind: DipoleKind, gi: f64, d2: f64) -> FrictionScenario {
    let d = DipoleModel::new(d2, DipoleOrientation::Isotropic, wa, gi, 0.0, kind).unwrap();
    FrictionScenario::new(v, z, SurfaceModel::drude(gs).unwrap(), d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn friction_is_a_drag(
        v in 2e-3..0.2f64, z in 0.02..0.3f64, wa in 0.05..1.0f64, gs in 0.0..0.3f64, theta in 0.0..PI, phi in 0.0..PI,
    ) {
        let mut s = scenario(v, z, wa, gs, DipoleKind::TwoLevel, 0.0, 1.0);
        for f in [friction_plasma_closed_form(&s).unwrap(), friction_second_order_numeric(&s).unwrap()] {
            prop_assert!(f.force <= 0.0, "{:?}", f);
        }
        s.dipole.orientation = DipoleOrientation::Fixed { theta, phi };
        prop_assert!(friction_plasma_closed_form(&s).unwrap().force <= 0.0);
    }

    #[test]
    fn velocity_reversal_flips_the_force(v in 2e-3..0.2f64, gs in 0.0..0.2f64, gi in 0.0..0.1f64) {
        let kind = if gi > 0.0 { DipoleKind::Oscillator } else { DipoleKind::TwoLevel };
        let s = scenario(v, 0.05, 0.2, gs, kind, gi, 1.0);
        let r = s.with_velocity(-v);
        prop_assert_eq!(friction_second_order_numeric(&s).unwrap().force, -friction_second_order_numeric(&r).unwrap().force);
        prop_assert_eq!(friction_plasma_closed_form(&s).unwrap().force, -friction_plasma_closed_form(&r).unwrap().force);
    }

    #[test]
    fn normalized_force_is_independent_of_dipole_strength(v in 5e-3..0.05f64, d2 in 1e-6..10.0f64) {
        let a = scenario(v, 0.05, 0.2, 0.05, DipoleKind::Oscillator, 0.02, 1.0);
        let b = scenario(v, 0.05, 0.2, 0.05, DipoleKind::Oscillator, 0.02, d2);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        prop_assert!(rel(friction_second_order_numeric(&b).unwrap().force, friction_second_order_numeric(&a).unwrap().force) < 1e-12);
        prop_assert!(rel(friction_plasma_closed_form(&b).unwrap().force, friction_plasma_closed_form(&a).unwrap().force) < 1e-12);
        let (lb, la) = (friction_fdt_low_velocity(&b).unwrap(), friction_fdt_low_velocity(&a).unwrap());
        prop_assert!(rel(lb.cubic_coefficient, la.cubic_coefficient) < 1e-12);
    }

    #[test]
    fn orientation_kernel_is_positive(theta in 0.0..PI, phi in 0.0..2.0 * PI, u in 0.01..50.0f64) {
        prop_assert!(orientation_factors(theta, phi).kernel_scaled(u).unwrap() > 0.0);
    }

    #[test]
    fn spectra_are_hermitian(w in -1.0..3.0f64, g in 1e-4..0.3f64, x in -0.5..0.5f64) {
        let dd = ComplexTensor3::from_real([[1.0, x, 0.0], [x, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        let atom = TwoLevelAtom::new(DressedRates::new(1.0, g).unwrap(), dd);
        prop_assert!(power_spectrum_fdt(w, &atom).unwrap().is_hermitian(1e-15));
        prop_assert!(power_spectrum_qrt(w, &atom.poles()).is_hermitian(1e-15));
    }
}

#[test]
fn fdt_spectrum_integrates_to_equal_time_correlator() {
    let atom = TwoLevelAtom::new(DressedRates::new(1.0, 0.05).unwrap(), ComplexTensor3::identity());
    let spec = QuadSpec::new(1e-11)
        .with_abs_tol(1e-14)
        .with_transform(Transform::Rational { scale: 1.0 })
        .with_breakpoints([0.9, 1.0, 1.1]);
    let total = try_integrate_adaptive(
        |w| Ok(power_spectrum_fdt(w, &atom)?.m[0][0].re),
        Domain::SemiInfinite(0.0),
        &spec,
    )
    .unwrap()
    .value;
    let c0 = stationary_correlator(0.0, &atom.poles(), &atom, 1e-11).unwrap().value.m[0][0].re;
    assert!((total - c0).abs() < 1e-6 * c0, "{total} vs {c0}");
}

#[test]
fn correlator_tail_is_inverse_square() {
    let g = 0.05;
    let atom = TwoLevelAtom::new(DressedRates::new(1.0, g).unwrap(), ComplexTensor3::identity());
    let c = |tg: f64| {
        stationary_correlator(tg / g, &atom.poles(), &atom, 1e-10).unwrap().value.m[0][0].norm()
    };
    let (t1, t2) = (20.0, 200.0);
    let slope = (c(t2) / c(t1)).ln() / (t2 / t1).ln();
    assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
}

fn two_level_cp(gamma_ratio: f64) -> CasimirPolder {
    let m = DipoleModel::atom_from_free_rate(0.25, gamma_ratio * 0.25, DipoleOrientation::Isotropic).unwrap();
    let hs = HalfSpace::new(SurfaceModel::drude(5e-3 * 2f64.sqrt()).unwrap(), ReflectionModel::Fresnel);
    let mut cp = CasimirPolder::new(m, hs);
    cp.include_shift = false;
    cp
}

#[test]
fn qrt_exceeds_fdt_on_the_distance_grid() {
    let lambda_p = 2.0 * PI / 2f64.sqrt();
    for ratio in [1e-6, 1.0 / 3.0] {
        let cp = two_level_cp(ratio);
        let zs: Vec<f64> = (0..13).map(|i| lambda_p * 0.01 * 1000f64.powf(i as f64 / 12.0)).collect();
        for row in cp.cp_distance_scan(&zs).unwrap() {
            assert!(row.qrt.abs() >= row.fdt.abs(), "z = {}: {} vs {}", row.z_a, row.qrt, row.fdt);
            assert!(row.fdt < 0.0);
        }
    }
}

#[test]
fn error_estimates_bound_refinement() {
    let mut cp = two_level_cp(0.05);
    for z in [0.1, 1.0, 10.0] {
        cp.rel_tol = 1e-6;
        let loose = cp.cp_force(z, CpMethod::Fdt).unwrap();
        cp.rel_tol = 5e-7;
        let tight = cp.cp_force(z, CpMethod::Fdt).unwrap();
        let d = (loose.force - tight.force).abs();
        assert!(d <= loose.error + tight.error + 1e-15 * loose.force.abs(), "z = {z}: {d} vs {}", loose.error);
    }
}

#[test]
fn cp_normalized_force_is_independent_of_dipole_strength() {
    let hs = HalfSpace::new(SurfaceModel::drude(0.01).unwrap(), ReflectionModel::Fresnel);
    let mk = |d2: f64| {
        let m = DipoleModel::new(d2, DipoleOrientation::Isotropic, 0.3, 0.0, 1e-4, DipoleKind::TwoLevel).unwrap();
        let mut cp = CasimirPolder::new(m, hs);
        cp.include_shift = false;
        cp
    };
    // Dressed methods pick up |d|² again through the surface-modified rates;
    // only the bare response is strictly second order in the coupling.
    for method in [CpMethod::Bare] {
        let a = mk(1e-3).cp_force(0.5, method).unwrap().force;
        let b = mk(2e-3).cp_force(0.5, method).unwrap().force;
        assert!((a - b).abs() <= 1e-12 * a.abs(), "{method}: {a} vs {b}");
    }
}

#[test]
fn scans_are_deterministic_and_ordered() {
    let s = scenario(0.0, 0.05, 0.2, 1e-3, DipoleKind::TwoLevel, 0.0, 1.0);
    let vs: Vec<f64> = (1..=16).map(|i| 0.0025 * i as f64).collect();
    let a = friction_velocity_scan(&s, &vs, FrictionMethod::SecondOrder).unwrap();
    let b = friction_velocity_scan(&s, &vs, FrictionMethod::SecondOrder).unwrap();
    assert_eq!(a, b);
    for (r, &v) in a.iter().zip(&vs) {
        assert_eq!(r.v_x, v);
        assert_eq!(r.force, friction_second_order_numeric(&s.with_velocity(v)).unwrap().force);
    }
    let cp = two_level_cp(0.05);
    let zs = [0.2, 0.5, 2.0];
    let rows = cp.cp_distance_scan(&zs).unwrap();
    for (row, &z) in rows.iter().zip(&zs) {
        assert_eq!(row.fdt, cp.cp_force(z, CpMethod::Fdt).unwrap().force);
    }
}

/// As v grows the intrinsically damped curve first joins the surface-damped
/// undamped-atom curve, which only later approaches the lossless closed form.
#[test]
fn damping_regimes_are_ordered_along_the_velocity_axis() {
    let with_gamma = scenario(0.0, 0.05, 0.2, 0.1, DipoleKind::Oscillator, 1e-3, 1.0);
    let without = scenario(0.0, 0.05, 0.2, 0.1, DipoleKind::TwoLevel, 0.0, 1.0);
    let vs = [0.002, 0.005, 0.01, 0.02, 0.04];
    let mut dev_gamma = Vec::new();
    let mut dev_closed = Vec::new();
    for v in vs {
        let fg = friction_second_order_numeric(&with_gamma.with_velocity(v)).unwrap().force;
        let f0 = friction_second_order_numeric(&without.with_velocity(v)).unwrap().force;
        let fc = friction_plasma_closed_form(&without.with_velocity(v)).unwrap().force;
        dev_gamma.push((fg / f0 - 1.0).abs());
        dev_closed.push((f0 / fc - 1.0).abs());
    }
    assert!(dev_gamma[0] > 0.05, "intrinsic damping dominates at the slowest point: {dev_gamma:?}");
    assert!(dev_closed[0] > 1.0, "surface damping dominates at the slowest point: {dev_closed:?}");
    // The γ-curve reaches the Γ-curve (1%) before the Γ-curve reaches the closed form (5%).
    let first = |d: &[f64], tol: f64| d.iter().position(|&x| x < tol).unwrap_or(usize::MAX);
    assert!(first(&dev_gamma, 0.01) < first(&dev_closed, 0.05), "{dev_gamma:?} {dev_closed:?}");
}

#[test]
fn asymptotic_limits_do_not_commute() {
    let v = 0.01;
    let radiative = scenario(v, 0.05, 0.2, 0.0, DipoleKind::TwoLevel, 0.0, 1.0);
    let ohmic_small = scenario(v, 0.05, 0.2, 1e-9, DipoleKind::TwoLevel, 0.0, 1.0);
    let a1 = friction_asymptotic(&radiative, AsymptoticRegime::Radiative).unwrap().force;
    let a2 = friction_asymptotic(&ohmic_small, AsymptoticRegime::SurfaceOhmic).unwrap().force;
    assert!((a2 / a1).abs() < 1e-3 || (a2 / a1).abs() > 1e3, "asympt2(Gamma -> 0) = {a2}, asympt1 = {a1}");

    let ohmic = scenario(v, 0.05, 0.2, 0.1, DipoleKind::TwoLevel, 0.0, 1.0);
    let intrinsic_small = scenario(v, 0.05, 0.2, 0.1, DipoleKind::Oscillator, 1e-12, 1.0);
    let a2 = friction_asymptotic(&ohmic, AsymptoticRegime::SurfaceOhmic).unwrap().force;
    let a3 = friction_asymptotic(&intrinsic_small, AsymptoticRegime::Intrinsic).unwrap().force;
    assert!((a3 / a2).abs() < 1e-3 || (a3 / a2).abs() > 1e3, "asympt3(gamma -> 0) = {a3}, asympt2 = {a2}");
}

#[test]
fn linear_terms_scale_with_velocity() {
    let d = DipoleModel::new(1.0, DipoleOrientation::Isotropic, 0.2, 0.0, 2e-3, DipoleKind::TwoLevel).unwrap();
    let s = FrictionScenario::new(1e-4, 0.05, SurfaceModel::drude(0.1).unwrap(), d).unwrap();
    let a = friction_qrt_with_cancellation(&s).unwrap();
    let b = friction_qrt_with_cancellation(&s.with_velocity(2e-4)).unwrap();
    assert!(a.qrt_linear < 0.0);
    assert!((b.qrt_linear / a.qrt_linear - 2.0).abs() < 1e-12);
    assert!(a.residual.abs() < 1e-6 * a.qrt_linear.abs());
}

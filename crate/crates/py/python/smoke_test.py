"""Smoke test for the dispersia extension module.

Build and install first:  pip install --no-build-isolation crates/py
"""

import math

import dispersia


def main():
    gold = dispersia.Surface(gamma=5e-3 * math.sqrt(2))
    eps = gold.permittivity(complex(0.5, 0.0))
    assert abs(eps - (1 - 2 / (0.25 + 0.5j * gold.gamma))) < 1e-12
    assert gold.reflection(0.5).imag > 0

    atom = dispersia.Dipole(0.25, gamma_free=0.05 * 0.25)
    assert abs(atom.gamma_free - atom.omega_a**3 * atom.d_squared / (3 * math.pi)) < 1e-15

    cp = dispersia.CasimirPolder(atom, gold)
    f_fdt, _ = cp.force(1.0, "fdt")
    f_qrt, _ = cp.force(1.0, "qrt")
    assert f_fdt < 0 and f_qrt < 0, "attraction"
    rows = cp.distance_scan([0.5, 1.0])
    assert len(rows) == 2 and abs(rows[1][1] - f_fdt) <= 1e-9 * abs(f_fdt)

    probe = dispersia.Dipole(0.2, d_squared=1.0, gamma_free=0.0)
    fr = dispersia.Friction(0.05, dispersia.Surface(gamma=1e-3), probe)
    closed, _ = fr.force(0.02, "closed_form")
    numeric, _ = fr.force(0.02, "second_order")
    assert closed < 0 and numeric < 0, "drag"
    damped = dispersia.Dipole(0.2, d_squared=1.0, gamma_free=0.0, gamma_intrinsic=0.1)
    fr = dispersia.Friction(0.05, dispersia.Surface(gamma=0.1), damped)
    qrt, nm, residual = fr.linear_terms(1e-4)
    assert qrt < 0 and abs(residual) <= 1e-6 * abs(qrt)

    f0 = dispersia.normalization_f0(5.26e-39, 1.0e16)
    assert f0 > 0

    files = dict(dispersia.figure_csv("fig3", ["sweep.points=11"]))
    assert "omega_over_omega_tilde,s_FDT,s_QRT,error" in files["fig3"]

    for check, passed, detail in dispersia.selftest(["c01", "c08"]):
        print(f"{check} {'PASS' if passed else 'FAIL'}: {detail}")
        assert passed

    try:
        dispersia.Dipole(0.2)
    except ValueError:
        pass
    else:
        raise AssertionError("missing coupling must raise")

    print("smoke test passed")


if __name__ == "__main__":
    main()

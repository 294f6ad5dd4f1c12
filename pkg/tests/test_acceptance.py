"""Acceptance suite: one test per criterion, each printed as a pass/fail line.

Tolerances are pinned in zetabf.verification; each test asserts the criterion
passes and prints its one-line summary.
"""

from zetabf import verification


def _run(criterion):
    result = criterion()
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] criterion {result.index}: {result.name} -- {result.detail}")
    assert result.passed, result.detail
    return result


def test_criterion_01_lefschetz_counts():
    r = _run(verification.criterion_1_lefschetz)
    assert r.seconds < 1.0


def test_criterion_02_per_orbit_identity():
    r = _run(verification.criterion_2_per_orbit_identity)
    assert r.seconds < 1.0


def test_criterion_03_decomposition_identity():
    r = _run(verification.criterion_3_decomposition)
    assert r.seconds < 1.0


def test_criterion_04_euler_product_vs_closed_form():
    r = _run(verification.criterion_4_euler_vs_closed)
    assert r.seconds < 5.0


def test_criterion_05_mellin_determinant_route():
    r = _run(verification.criterion_5_mellin_route)
    assert r.seconds < 10.0


def test_criterion_06_schwarz_equals_torsion():
    r = _run(verification.criterion_6_schwarz_equals_torsion)
    assert r.seconds < 30.0


def test_criterion_07_determinant_relations():
    r = _run(verification.criterion_7_det_relations)
    assert r.seconds < 10.0


def test_criterion_08_gauge_independence():
    r = _run(verification.criterion_8_gauge_independence)
    assert r.seconds < 60.0


def test_criterion_09_lagrangian_homotopy_constancy():
    r = _run(verification.criterion_9_homotopy_constancy)
    assert r.seconds < 30.0


def test_criterion_10_bv_identities():
    r = _run(verification.criterion_10_bv_identities)
    assert r.seconds < 30.0


def test_criterion_11_discrete_fried_identity():
    r = _run(verification.criterion_11_fried)
    assert r.seconds < 10.0


def test_criterion_12_flat_determinant_modes():
    r = _run(verification.criterion_12_flat_det)
    assert r.seconds < 10.0

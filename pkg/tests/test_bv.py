"""BF field spaces, gauge fixing, partition functions, homotopy scans."""

import math

import numpy as np
import pytest

from zetabf.bv import (
    Contraction,
    build_bf_fields,
    contraction_gauge,
    gauge_polarization,
    hodge_contraction,
    homotopy_scan,
    is_lagrangian,
    lie_operator_on_kernel,
    metric_gauge,
    partition_function,
    random_contraction,
    restricted_action_blocks,
    suspension_contraction,
    unitary_contraction_family,
)
from zetabf.complexes import (
    analytic_torsion,
    circle_complex,
    mapping_torus_complex,
    random_twisted_complex,
)
from zetabf.errors import (
    DegenerateContractionError,
    NotAcyclicError,
)
from zetabf.orbits import ToralAutomorphism
from zetabf.zeta import closed_form_suspension

CAT = [[2, 1], [1, 1]]


def test_field_space_degrees_circle():
    fs = build_bf_fields(circle_complex(math.pi))
    assert fs.dims == (1, 1)
    assert fs.a_degrees == (1, 0)
    assert fs.pairing_perfection() == pytest.approx(1.0)


def test_field_space_requires_acyclic():
    with pytest.raises(NotAcyclicError):
        build_bf_fields(circle_complex(0.0))


def test_action_vanishes_on_closed_fields():
    rng = np.random.default_rng(0)
    tc = random_twisted_complex(rng, top_degree=3, max_cells=4, rank=1)
    fs = build_bf_fields(tc)
    f = fs.zero_field()
    # exact A (hence closed, by acyclicity dA = 0 iff A is d of something... )
    prev = rng.normal(size=tc.dims[0]) + 1j * rng.normal(size=tc.dims[0])
    f.a[1][:] = tc.diffs[0] @ prev
    f.a[0][:] = 0.0
    for k in range(fs.n + 1):
        f.b[k][:] = rng.normal(size=tc.dims[k])
    # A supported in degree 1 with dA = d1 d0 prev = 0
    assert abs(fs.action(f)) < 1e-12


def test_action_shift_symmetry():
    rng = np.random.default_rng(1)
    tc = random_twisted_complex(rng, top_degree=3, max_cells=4, rank=1)
    fs = build_bf_fields(tc)
    v = fs.random_field(rng)
    s0 = fs.action(v)

    shifted = fs.random_field(rng)
    for k in range(fs.n + 1):
        shifted.a[k][:] = v.a[k]
        shifted.b[k][:] = v.b[k]
    # shift A by an exact form in each degree
    for k in range(1, fs.n + 1):
        xi = rng.normal(size=tc.dims[k - 1]) + 1j * rng.normal(size=tc.dims[k - 1])
        shifted.a[k][:] += tc.diffs[k - 1] @ xi
    assert fs.action(shifted) == pytest.approx(s0, rel=1e-10)

    # shift B by an exact form of the dual complex: b_(k+1) += d_(k+1)^T beta
    shifted2 = fs.random_field(rng)
    for k in range(fs.n + 1):
        shifted2.a[k][:] = v.a[k]
        shifted2.b[k][:] = v.b[k]
    for k in range(fs.n - 1):
        beta = rng.normal(size=tc.dims[k + 2]) + 1j * rng.normal(size=tc.dims[k + 2])
        shifted2.b[k + 1][:] += tc.diffs[k + 1].T @ beta
    assert fs.action(shifted2) == pytest.approx(s0, rel=1e-10)


def test_metric_gauge_circle_line():
    tc = circle_complex(math.pi)
    fs = build_bf_fields(tc)
    gs = metric_gauge(fs)
    assert gs.slots[0].a_basis.shape == (1, 1)    # coexact line in C^0
    assert gs.slots[1].b_basis.shape == (1, 1)
    rep = is_lagrangian(fs, gs)
    assert rep.ok and rep.isotropy_subspace < 1e-12


def test_metric_gauge_restricted_action_is_dstar_d():
    tc = mapping_torus_complex(CAT, math.pi)
    fs = build_bf_fields(tc)
    gs = metric_gauge(fs)
    blocks = restricted_action_blocks(fs, gs)
    for k, m in enumerate(blocks):
        if m.size == 0:
            continue
        coex = gs.slots[k].a_basis
        target = coex.conj().T @ (fs.base.diffs[k].conj().T @ (fs.base.diffs[k] @ coex))
        assert np.allclose(m, target, atol=1e-12)


def test_metric_gauge_isotropy_random():
    rng = np.random.default_rng(2)
    for _ in range(5):
        tc = random_twisted_complex(rng, top_degree=int(rng.integers(2, 5)),
                                    max_cells=4, rank=1)
        fs = build_bf_fields(tc)
        rep = is_lagrangian(fs, metric_gauge(fs))
        assert rep.ok
        assert rep.isotropy_subspace < 1e-12
        assert rep.isotropy_complement < 1e-12


def test_contraction_gauge_unit_scalar_circle():
    tc = circle_complex(math.pi)
    fs = build_bf_fields(tc)
    iota = [np.zeros((0, 1)), np.array([[1.0 + 0.0j]])]
    a_maps = [np.array([[1.0 + 0.0j]]), np.zeros((0, 1))]
    c = Contraction(iota, a_maps)
    gs = contraction_gauge(fs, c)
    assert is_lagrangian(fs, gs).ok
    assert partition_function(fs, gs) == pytest.approx(2.0, rel=1e-12)


def test_hodge_contraction_structure():
    rng = np.random.default_rng(3)
    tc = random_twisted_complex(rng, top_degree=4, max_cells=4, rank=1)
    c = hodge_contraction(tc)
    dims = tc.dims
    scale = max(np.linalg.norm(m) for m in c.iota if m.size)
    for k in range(1, tc.top_degree):
        assert np.linalg.norm(c.iota[k] @ c.iota[k + 1]) < 1e-12 * scale ** 2
    # iota o a = id on ker iota and L = iota d is positive there
    for k in range(tc.top_degree):
        ker = c.kernel_basis(k, dims)
        if ker.shape[1] == 0:
            continue
        assert np.linalg.norm(c.iota[k + 1] @ (c.a_maps[k] @ ker) - ker) < 1e-12
    assert c.sdet_iota_a(dims) == pytest.approx(1.0, rel=1e-12)


def test_contraction_gauge_isotropy_random():
    rng = np.random.default_rng(4)
    for _ in range(5):
        tc = random_twisted_complex(rng, top_degree=int(rng.integers(2, 5)),
                                    max_cells=4, rank=1)
        fs = build_bf_fields(tc)
        c = random_contraction(tc, rng)
        rep = is_lagrangian(fs, contraction_gauge(fs, c))
        assert rep.ok
        assert rep.isotropy_subspace < 1e-12


def test_skewed_subspace_is_not_lagrangian():
    tc = mapping_torus_complex(CAT, math.pi)
    fs = build_bf_fields(tc)
    c = hodge_contraction(tc)
    gs = contraction_gauge(fs, c)
    # deliberately skew: B side set to conj(ker iota) instead of the annihilator
    for k, slot in enumerate(gs.slots):
        slot.b_basis = np.conj(c.kernel_basis(k, fs.base.dims))
    rep = is_lagrangian(fs, gs)
    assert not rep.ok


def test_partition_functions_match_torsion_models():
    for theta in (math.pi, 2 * math.pi / 3):
        tc = mapping_torus_complex(CAT, theta)
        tau = analytic_torsion(tc)
        fs = build_bf_fields(tc)
        zm = partition_function(fs, metric_gauge(fs))
        zc = partition_function(fs, contraction_gauge(fs, hodge_contraction(tc)))
        assert zm == pytest.approx(tau, rel=1e-10)
        assert zc == pytest.approx(tau, rel=1e-10)


def test_partition_function_circle_both_gauges():
    tc = circle_complex(math.pi)
    fs = build_bf_fields(tc)
    assert partition_function(fs, metric_gauge(fs)) == pytest.approx(2.0, rel=1e-12)
    z = partition_function(fs, contraction_gauge(fs, hodge_contraction(tc)))
    assert z == pytest.approx(2.0, rel=1e-12)


def test_contraction_gauge_lagrangian_on_mapping_torus():
    tc = mapping_torus_complex(CAT, 2 * math.pi / 3)
    fs = build_bf_fields(tc)
    gs = contraction_gauge(fs, suspension_contraction(tc))
    rep = is_lagrangian(fs, gs)
    assert rep.ok
    assert rep.cross_pairing_min_sv > 1e-8


def test_suspension_contraction_reproduces_zeta_blocks():
    tc = mapping_torus_complex(CAT, math.pi)
    fs = build_bf_fields(tc)
    c = suspension_contraction(tc)
    dets = [abs(np.linalg.det(lie_operator_on_kernel(fs, c, k)))
            for k in range(3)]
    zs = closed_form_suspension(ToralAutomorphism(2, 1, 1, 1), math.pi, 0.0)
    assert dets[0] == pytest.approx(abs(zs.zeta0), rel=1e-12)
    assert dets[1] == pytest.approx(abs(zs.zeta1), rel=1e-12)
    assert dets[2] == pytest.approx(abs(zs.zeta2), rel=1e-12)
    z = partition_function(fs, contraction_gauge(fs, c))
    assert z == pytest.approx(abs(zs.full) ** (-1), rel=1e-10)


def test_non_coisometric_normalised_contraction_deviates():
    # iota a = id holds but |iota| != 1: outside the unitary-normalised class,
    # the declared Jacobian 1 no longer matches the parametrisation volume
    tc = circle_complex(math.pi)
    fs = build_bf_fields(tc)
    iota = [np.zeros((0, 1)), np.array([[2.0 + 0.0j]])]
    a_maps = [np.array([[0.5 + 0.0j]]), np.zeros((0, 1))]
    c = Contraction(iota, a_maps)
    z = partition_function(fs, contraction_gauge(fs, c))
    assert abs(z / 2.0 - 1.0) > 0.3


def test_gauge_independence_random():
    rng = np.random.default_rng(5)
    for _ in range(8):
        tc = random_twisted_complex(rng, top_degree=int(rng.integers(2, 6)),
                                    max_cells=5, rank=int(rng.integers(1, 3)))
        tau = analytic_torsion(tc)
        fs = build_bf_fields(tc)
        assert partition_function(fs, metric_gauge(fs)) == pytest.approx(tau, rel=1e-9)
        c = random_contraction(tc, rng)
        z = partition_function(fs, contraction_gauge(fs, c))
        assert z == pytest.approx(tau, rel=1e-9)


def test_homotopy_scan_constancy():
    rng = np.random.default_rng(6)
    tc = random_twisted_complex(rng, top_degree=3, max_cells=4, rank=1)
    fs = build_bf_fields(tc)
    fam = unitary_contraction_family(tc, hodge_contraction(tc), rng)
    scan = homotopy_scan(fs, fam, samples=10)
    assert scan.max_relative_deviation < 1e-9
    assert len(scan.samples) == 10


def test_homotopy_scan_constant_family():
    tc = mapping_torus_complex(CAT, math.pi)
    fs = build_bf_fields(tc)
    c = hodge_contraction(tc)
    scan = homotopy_scan(fs, lambda t: c, samples=5)
    assert scan.max_relative_deviation == 0.0


def test_homotopy_scan_degenerate_crossing():
    # (1,2,1) acyclic complex with a rotating contraction that crosses a
    # degenerate direction: L|ker vanishes when tan(angle) = -a/b
    d0 = np.array([[1.0], [1.0]])
    d1 = np.array([[-1.0, 1.0]])
    from zetabf.complexes import TwistedComplex
    tc = TwistedComplex([d0, d1])
    fs = build_bf_fields(tc)

    def family(t):
        phi = t * math.pi        # crosses phi = 3*pi/4 where cos+sin = 0
        row = np.array([[math.cos(phi), math.sin(phi)]])
        ker = np.array([[-math.sin(phi)], [math.cos(phi)]])
        iota = [np.zeros((0, 1)), row, ker]   # iota_2 maps C^2 onto ker(iota_1)
        a_maps = [iota[1].conj().T, iota[2].conj().T, np.zeros((0, 1))]
        return Contraction(iota, a_maps)

    with pytest.raises(DegenerateContractionError) as err:
        homotopy_scan(fs, family, samples=5)
    assert err.value.t is not None


def test_gauge_polarization_names():
    tc = circle_complex(math.pi)
    fs = build_bf_fields(tc)
    chart, on_vars = gauge_polarization(fs, metric_gauge(fs))
    assert set(on_vars) == {"a0_0", "b1_0"}
    assert len(chart.pairs) == 2

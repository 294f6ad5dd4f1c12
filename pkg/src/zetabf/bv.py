"""Finite-dimensional BV engine for abelian BF theory.

The field space doubles an acyclic twisted complex: A components live in the
complex itself with degree 1 - k, B components in the dual complex (slot k
pairs canonically with the degree-k A component, carrying degree k - 2), so
the odd symplectic pairing is perfect by construction.  Gauge subspaces come
in two kinds: the metric gauge cut out by coexactness and the contraction
gauge cut out by a square-zero degree -1 map iota.  Partition functions are
superdeterminants of the gauge-restricted action, corrected by the declared
parametrisation Jacobian (|sdet d*| for the metric parametrisation B = d* eta,
and 1 for normalised contractions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .complexes import TwistedComplex, RANK_TOL
from .errors import (
    DegenerateContractionError,
    DegenerateGaugeError,
)

ISOTROPY_TOL = 1e-12


@dataclass
class BFField:
    """One point of the BF field space: per-degree A and B components."""

    a: Tuple[np.ndarray, ...]
    b: Tuple[np.ndarray, ...]


class BFFieldSpace:
    """Doubled odd symplectic space (A, B) over an acyclic base complex.

    Degrees: the C^k component of A has degree 1 - k, its dual B slot has
    degree k - 2, so each conjugate pair has total degree -1 (the pairing has
    degree -1 under the declared grading).
    """

    def __init__(self, base: TwistedComplex):
        base.require_acyclic()
        self.base = base.orthonormalized()
        self.n = self.base.top_degree
        self.dims = self.base.dims
        # degree bookkeeping; asserts the pairing carries degree -1
        self.a_degrees = tuple(1 - k for k in range(self.n + 1))
        self.b_degrees = tuple(k - 2 for k in range(self.n + 1))
        for da, db in zip(self.a_degrees, self.b_degrees):
            if da + db != -1:
                raise AssertionError("pairing does not have degree -1")

    def a_parity(self, k: int) -> int:
        return self.a_degrees[k] % 2

    def b_parity(self, k: int) -> int:
        return self.b_degrees[k] % 2

    def zero_field(self) -> BFField:
        return BFField(tuple(np.zeros(d, dtype=complex) for d in self.dims),
                       tuple(np.zeros(d, dtype=complex) for d in self.dims))

    def random_field(self, rng: np.random.Generator) -> BFField:
        def rand(d):
            return rng.normal(size=d) + 1j * rng.normal(size=d)
        return BFField(tuple(rand(d) for d in self.dims),
                       tuple(rand(d) for d in self.dims))

    def action(self, f: BFField) -> complex:
        """S_BF = sum_k B_(k+1)(d_k A_k)."""
        total = 0.0 + 0.0j
        for k in range(self.n):
            total += f.b[k + 1] @ (self.base.diffs[k] @ f.a[k])
        return total

    def omega(self, v: BFField, w: BFField) -> complex:
        """Odd symplectic pairing; sign convention fixed once.

        Omega(v, w) = sum_k [ v.b_k(w.a_k) - (-1)^(p_k) w.b_k(v.a_k) ] with
        p_k the parity of the degree-k A slot.
        """
        total = 0.0 + 0.0j
        for k in range(self.n + 1):
            sign = -1.0 if self.a_parity(k) == 0 else 1.0
            total += v.b[k] @ w.a[k] + sign * (w.b[k] @ v.a[k])
        return total

    def pairing_perfection(self) -> float:
        """Smallest singular value of each slot's duality pairing (min over k).

        The pairing is the canonical evaluation, so this is 1 by construction;
        evaluated anyway as the perfection certificate.
        """
        worst = np.inf
        for k in range(self.n + 1):
            if self.dims[k] == 0:
                continue
            pairing = np.eye(self.dims[k])
            s = np.linalg.svd(pairing, compute_uv=False)
            worst = min(worst, float(s[-1]))
        return worst


def build_bf_fields(tc: TwistedComplex) -> BFFieldSpace:
    """BV field space of BF theory over an acyclic complex."""
    return BFFieldSpace(tc)


# -- gauge subspaces ------------------------------------------------------------


@dataclass
class GaugeSlot:
    """Per-degree data of a gauge subspace.

    ``a_basis``/``b_basis`` hold column bases of the A-side subspace of C^k
    and the B-side subspace of the dual slot k (as plain vectors; a functional
    acts by transposed multiplication).  ``a_param``/``b_param`` are the
    declared parametrisation matrices whose columns present the subspace in
    the coordinates the Gaussian integral is performed in.
    """

    degree: int
    a_basis: np.ndarray
    b_basis: np.ndarray
    a_param: np.ndarray
    b_param: np.ndarray


@dataclass
class GaugeSubspace:
    """A Lagrangian gauge-fixing subspace plus its declared parametrisation.

    ``constraint`` records the cutting equations; ``jacobian_convention`` is
    the declared super-volume factor of the parametrisation (|sdet d*| for
    the metric parametrisation, 1 for normalised contractions).
    """

    kind: str
    slots: List[GaugeSlot]
    complement_a: List[np.ndarray]
    complement_b: List[np.ndarray]
    jacobian_convention: float
    constraint: str = ""
    contraction: Optional["Contraction"] = None


def _svd_split(d: np.ndarray):
    """(exact basis of target, coexact basis of source, singular values)."""
    u, s, vh = np.linalg.svd(d, full_matrices=False)
    if s.size == 0:
        keep = np.zeros(0, dtype=bool)
    else:
        keep = s > RANK_TOL * max(s[0], 1.0)
    return u[:, keep], vh[keep, :].conj().T, s[keep]


def metric_gauge(fs: BFFieldSpace) -> GaugeSubspace:
    """Lagrangian cut out by coexactness of A and of B (in its own complex).

    The A side of slot k is the coexact subspace of C^k; the B side of slot
    k+1 is conj(exact), i.e. the dual-complex coexact forms.  The declared
    parametrisation is the one from the metric-gauge formula: A by coexact
    coordinates, B = d* eta with eta ranging over coexact forms, contributing
    the Jacobian |sdet(d*)|.
    """
    base = fs.base
    n = fs.n
    exact = [np.zeros((fs.dims[0], 0))]
    coexact = []
    for k in range(n):
        e_next, c_here, _ = _svd_split(base.diffs[k])
        coexact.append(c_here)
        exact.append(e_next)
    coexact.append(np.zeros((fs.dims[n], 0)))

    slots = []
    log_jac = 0.0
    for k in range(n + 1):
        a_basis = coexact[k]
        b_basis = np.conj(exact[k])
        a_param = a_basis
        if k >= 1:
            b_param = np.conj(base.diffs[k - 1] @ coexact[k - 1])
        else:
            b_param = b_basis[:, :0]
        # Jacobian: super volume factor of the declared parametrisation
        for mat, parity in ((a_param, fs.a_parity(k)), (b_param, fs.b_parity(k))):
            if mat.shape[1] == 0:
                continue
            gram = mat.conj().T @ mat
            sign, ld = np.linalg.slogdet(gram)
            eta = 1.0 if parity == 1 else -1.0
            log_jac += 0.5 * eta * ld
        slots.append(GaugeSlot(k, a_basis, b_basis, a_param, b_param))

    complement_a = [exact[k] for k in range(n + 1)]
    complement_b = [np.conj(coexact[k]) for k in range(n + 1)]
    return GaugeSubspace("metric", slots, complement_a, complement_b,
                         math.exp(log_jac), constraint="d* A = 0, d* B = 0")


@dataclass
class Contraction:
    """Square-zero degree -1 map with a normalised complement injection.

    ``iota[k]`` maps C^k to C^(k-1) (entry 0 is the zero map out of C^0);
    ``a_maps[k]`` injects C^k into C^(k+1) with iota o a = id on ker iota.
    The gauge-independence theorems of the test suite cover the unitary-
    normalised class a = iota^dagger (iota a partial isometry); the
    normalisation sdet(iota o a) = 1 holds for every valid instance.
    """

    iota: List[np.ndarray]
    a_maps: List[np.ndarray]

    def validate(self, dims: Sequence[int], tol: float = 1e-12):
        n = len(dims) - 1
        if len(self.iota) != n + 1 or len(self.a_maps) != n + 1:
            raise DegenerateContractionError("contraction has wrong arity")
        scale = max([1.0] + [float(np.linalg.norm(m)) for m in self.iota])
        for k in range(1, n):
            err = np.linalg.norm(self.iota[k] @ self.iota[k + 1])
            if err > tol * scale ** 2:
                raise DegenerateContractionError(f"iota^2 != 0 at degree {k + 1}")
        for k in range(n + 1):
            ker = self.kernel_basis(k, dims)
            if ker.shape[1] == 0:
                continue
            if k == n:
                continue
            err = np.linalg.norm(self.iota[k + 1] @ (self.a_maps[k] @ ker) - ker)
            if err > 1e-12 * max(1.0, scale):
                raise DegenerateContractionError(
                    f"iota o a != id on ker iota at degree {k}"
                )

    def kernel_basis(self, k: int, dims: Sequence[int]) -> np.ndarray:
        """Orthonormal basis of ker(iota_k) in C^k."""
        if k == 0:
            return np.eye(dims[0])
        m = self.iota[k]
        if m.shape[0] == 0:
            return np.eye(dims[k])
        u, s, vh = np.linalg.svd(m, full_matrices=True)
        rank = int(np.count_nonzero(s > RANK_TOL * max(s[0] if s.size else 1.0, 1.0)))
        return vh[rank:, :].conj().T

    def sdet_iota_a(self, dims: Sequence[int]) -> float:
        """|sdet(iota o a)|: equals 1 for every normalised contraction."""
        value = 1.0
        n = len(dims) - 1
        for k in range(n):
            ker = self.kernel_basis(k, dims)
            if ker.shape[1] == 0:
                continue
            block = ker.conj().T @ (self.iota[k + 1] @ (self.a_maps[k] @ ker))
            sign, ld = np.linalg.slogdet(block)
            value *= math.exp(((-1) ** (k % 2)) * ld)
        return abs(value)


def hodge_contraction(tc: TwistedComplex) -> Contraction:
    """Polar-isometry contraction: iota_(k+1) is the adjoint of the partial
    isometry part of d_k (initial space coexact, final space exact)."""
    o = tc.orthonormalized()
    n = o.top_degree
    iota = [np.zeros((0, 0))] + [None] * n
    a_maps = [None] * (n + 1)
    iota[0] = np.zeros((0, o.dims[0]))
    for k in range(n):
        e_next, c_here, _ = _svd_split(o.diffs[k])
        w = e_next @ c_here.conj().T          # partial isometry C^k -> C^(k+1)
        iota[k + 1] = w.conj().T
        a_maps[k] = w
    a_maps[n] = np.zeros((0, o.dims[n]))
    c = Contraction(iota, a_maps)
    c.validate(o.dims)
    return c


def random_contraction(tc: TwistedComplex, rng: np.random.Generator) -> Contraction:
    """Random unitary-normalised contraction: random kernel subspaces K^k with
    dim K^k = rank d_k, iota mapping the orthogonal complement isometrically
    onto K^(k-1), and a = iota^dagger."""
    o = tc.orthonormalized()
    n = o.top_degree
    m = [o.rank(k) for k in range(n)] + [0]

    def haar(size):
        z = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    kernels = []
    perps = []
    for k in range(n + 1):
        q = haar(o.dims[k])
        kernels.append(q[:, :m[k]])
        perps.append(q[:, m[k]:])
    iota = [np.zeros((0, o.dims[0]))]
    a_maps = []
    for k in range(1, n + 1):
        u = haar(m[k - 1]) if m[k - 1] else np.zeros((0, 0))
        iota.append(kernels[k - 1] @ u @ perps[k].conj().T)
    for k in range(n):
        a_maps.append(iota[k + 1].conj().T)
    a_maps.append(np.zeros((0, o.dims[n])))
    c = Contraction(iota, a_maps)
    c.validate(o.dims)
    return c


def suspension_contraction(tc: TwistedComplex) -> Contraction:
    """The Reeb-direction contraction of a mapping-torus complex: iota kills
    base cells and sends each (cell x I) to its base cell."""
    split = tc.meta.get("suspension_split")
    targets = tc.meta.get("suspension_targets")
    if split is None or targets is None:
        raise DegenerateContractionError("complex carries no suspension structure")
    n = tc.top_degree
    iota = [np.zeros((0, tc.dims[0]))]
    for k in range(1, n + 1):
        m = np.zeros((tc.dims[k - 1], tc.dims[k]))
        for src, dst in zip(split[k][1], targets[k]):
            m[dst, src] = 1.0
        iota.append(m)
    a_maps = [iota[k + 1].conj().T for k in range(n)]
    a_maps.append(np.zeros((0, tc.dims[n])))
    c = Contraction(iota, a_maps)
    c.validate(tc.dims)
    return c


def contraction_gauge(fs: BFFieldSpace, c: Contraction) -> GaugeSubspace:
    """Lagrangian cut out by iota A = iota B = 0 (B in the dual complex).

    Per slot k the A side is ker(iota) in C^k and the B side is the
    annihilator of ker(iota) in the dual slot, i.e. conj((ker iota)^perp).
    The declared B parametrisation is y -> conj(a y) over ker(iota) one
    degree down, with Jacobian 1 (the sdet(iota o a) = 1 normalisation).
    """
    base = fs.base
    c.validate(base.dims)
    n = fs.n
    kernels = [c.kernel_basis(k, base.dims) for k in range(n + 1)]
    slots = []
    for k in range(n + 1):
        a_basis = kernels[k]
        perp = _onb_complement(kernels[k], base.dims[k])
        b_basis = np.conj(perp)
        if k >= 1:
            b_param = np.conj(c.a_maps[k - 1] @ kernels[k - 1])
        else:
            b_param = b_basis[:, :0]
        slots.append(GaugeSlot(k, a_basis, b_basis, a_basis, b_param))
    complement_a = [_onb_complement(kernels[k], base.dims[k]) for k in range(n + 1)]
    complement_b = [np.conj(kernels[k]) for k in range(n + 1)]
    return GaugeSubspace("contraction", slots, complement_a, complement_b,
                         1.0, constraint="iota A = 0, iota B = 0",
                         contraction=c)


def _onb_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    if basis.shape[1] == 0:
        return np.eye(dim)
    full = np.linalg.svd(basis, full_matrices=True)[0]
    return full[:, basis.shape[1]:]


@dataclass
class LagrangianReport:
    ok: bool
    isotropy_subspace: float
    isotropy_complement: float
    cross_pairing_min_sv: float
    dimension_match: bool


def _field_from_column(fs: BFFieldSpace, side: str, k: int, col: np.ndarray) -> BFField:
    f = fs.zero_field()
    if side == "a":
        f.a[k][:] = col
    else:
        f.b[k][:] = col
    return f


def _basis_fields(fs: BFFieldSpace, a_bases, b_bases) -> List[BFField]:
    out = []
    for k, mat in enumerate(a_bases):
        for j in range(mat.shape[1]):
            out.append(_field_from_column(fs, "a", k, mat[:, j]))
    for k, mat in enumerate(b_bases):
        for j in range(mat.shape[1]):
            out.append(_field_from_column(fs, "b", k, mat[:, j]))
    return out


def is_lagrangian(fs: BFFieldSpace, gs: GaugeSubspace) -> LagrangianReport:
    """Isotropy of the subspace and its declared complement, and perfection
    of the pairing between them."""
    sub = _basis_fields(fs, [s.a_basis for s in gs.slots], [s.b_basis for s in gs.slots])
    comp = _basis_fields(fs, gs.complement_a, gs.complement_b)

    def max_pairing(fields):
        worst = 0.0
        for i, v in enumerate(fields):
            for w in fields[i:]:
                worst = max(worst, abs(fs.omega(v, w)))
        return worst

    iso_sub = max_pairing(sub)
    iso_comp = max_pairing(comp)

    dims_match = len(sub) == len(comp)
    if dims_match and sub:
        cross = np.array([[fs.omega(v, w) for w in comp] for v in sub])
        min_sv = float(np.linalg.svd(cross, compute_uv=False)[-1])
    else:
        min_sv = 0.0 if not dims_match else np.inf
    ok = (iso_sub < ISOTROPY_TOL and iso_comp < ISOTROPY_TOL
          and dims_match and min_sv > 1e-8)
    return LagrangianReport(ok, iso_sub, iso_comp, min_sv, dims_match)


def restricted_action_blocks(fs: BFFieldSpace, gs: GaugeSubspace) -> List[np.ndarray]:
    """Action compressions M_k pairing the slot-k A parameters with the
    slot-(k+1) B parameters: M_k = b_param^T d_k a_param."""
    blocks = []
    for k in range(fs.n):
        a_par = gs.slots[k].a_param
        b_par = gs.slots[k + 1].b_param
        blocks.append(b_par.T @ (fs.base.diffs[k] @ a_par))
    return blocks


def partition_function(fs: BFFieldSpace, gs: GaugeSubspace) -> float:
    """|sdet of the restricted action|^(+-1) divided by the declared Jacobian.

    Exponent signs follow the shifted parities: the (A_k, B_(k+1)) pair is
    odd exactly when k is even.  Metric gauge: equals the analytic torsion of
    the base.  Contraction gauge: equals |sdet(L restricted to ker iota)| with
    L = iota d + d iota.
    """
    log_z = 0.0
    for k, m in enumerate(restricted_action_blocks(fs, gs)):
        if m.shape[0] != m.shape[1]:
            raise DegenerateGaugeError(k, f"action block {k} is not square "
                                          f"({m.shape}): gauge is not Lagrangian")
        if m.size == 0:
            continue
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 1e-10 * max(s[0], 1.0):
            if gs.kind == "contraction":
                raise DegenerateContractionError(degree=k)
            raise DegenerateGaugeError(k)
        # sum of log singular values = log|det|; Z is reported as a modulus
        log_z += (-1) ** k * float(np.sum(np.log(s)))
    return math.exp(log_z) / gs.jacobian_convention


def lie_operator_on_kernel(fs: BFFieldSpace, c: Contraction, k: int) -> np.ndarray:
    """L = iota d + d iota compressed to ker(iota) in degree k."""
    base = fs.base
    ker = c.kernel_basis(k, base.dims)
    if k < fs.n:
        ld = c.iota[k + 1] @ (base.diffs[k] @ ker)
    else:
        ld = np.zeros((base.dims[k], ker.shape[1]))
    return ker.conj().T @ ld


# -- homotopy scans -------------------------------------------------------------


@dataclass
class ScanResult:
    """Structured gauge-scan records: t, Z(t), isotropy residual."""

    samples: List[Tuple[float, float, float]]
    max_relative_deviation: float


def homotopy_scan(fs: BFFieldSpace, family: Callable[[float], Contraction],
                  samples: int = 10) -> ScanResult:
    """Evaluate the contraction-gauge partition function along a family.

    Returns max |Z(t)/Z(0) - 1|; a degenerate member raises
    DegenerateContractionError identifying the first failing sample.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    ts = [i / (samples - 1) for i in range(samples)]
    rows = []
    z0 = None
    worst = 0.0
    for t in ts:
        try:
            gs = contraction_gauge(fs, family(t))
            z = partition_function(fs, gs)
        except DegenerateContractionError as exc:
            raise DegenerateContractionError(str(exc), t=t)
        residual = is_lagrangian(fs, gs).isotropy_subspace
        rows.append((t, z, residual))
        if z0 is None:
            z0 = z
        else:
            worst = max(worst, abs(z / z0 - 1.0))
    return ScanResult(rows, worst)


def gauge_polarization(fs: BFFieldSpace, gs: GaugeSubspace,
                       max_word_length: int = 12):
    """Darboux chart adapted to a gauge subspace, plus its coordinate names.

    In the rotated basis where the first columns of each slot span the A-side
    subspace, the gauge is the coordinate Lagrangian spanned by those A
    coordinates together with the B coordinates dual to the complement.
    Returns (chart, lagrangian_variable_names).
    """
    from .observables import bf_darboux_chart

    chart = bf_darboux_chart(fs, max_word_length)
    names = []
    for k, slot in enumerate(gs.slots):
        na = slot.a_basis.shape[1]
        nb = slot.b_basis.shape[1]
        if na + nb != fs.dims[k]:
            raise DegenerateGaugeError(k, "gauge subspace is not half-dimensional")
        names.extend(f"a{k}_{i}" for i in range(na))
        names.extend(f"b{k}_{i}" for i in range(na, na + nb))
    return chart, tuple(names)


def unitary_contraction_family(tc: TwistedComplex, base: Contraction,
                               rng: np.random.Generator,
                               strength: float = 1.0) -> Callable[[float], Contraction]:
    """Family t -> U(t) base U(t)^dagger with U(t) = exp(t K), K random
    skew-Hermitian per degree.  Stays inside the unitary-normalised class."""
    o = tc.orthonormalized()
    gens = []
    for d in o.dims:
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        k = (z - z.conj().T) / 2.0
        norm = np.linalg.norm(k)
        gens.append(strength * k / norm if norm > 0 else k)

    def family(t: float) -> Contraction:
        us = [expm(t * g) for g in gens]
        iota = [base.iota[0] @ us[0].conj().T if base.iota[0].size else
                np.zeros((0, o.dims[0]))]
        for k in range(1, o.top_degree + 1):
            iota.append(us[k - 1] @ base.iota[k] @ us[k].conj().T)
        a_maps = [iota[k + 1].conj().T for k in range(o.top_degree)]
        a_maps.append(np.zeros((0, o.dims[o.top_degree])))
        return Contraction(iota, a_maps)

    return family

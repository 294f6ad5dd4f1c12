"""Periodic-orbit data for suspension flows over hyperbolic toral automorphisms.

Orbit counts are exact: fixed points of A^j on the 2-torus are counted as
|det(A^j - I)| with unbounded Python integers, primitive orbits come out of
Moebius inversion, and the exterior-power traces of the linearised Poincare
maps are integer recurrences.  A plain text format ingests externally
computed orbit spectra (e.g. geodesic length spectra) with validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import NotHyperbolicError, ParseError, ValidationError

_MAX_POWER = 64   # guarded range for exact integer powers


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    out, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    if m > 1:
        out = -out
    return out


def _divisors(n: int) -> List[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


@dataclass(frozen=True)
class ToralAutomorphism:
    """Hyperbolic element of GL(2,Z) with |det| = 1, plus a constant roof."""

    a11: int
    a12: int
    a21: int
    a22: int
    roof: float = 1.0

    def __post_init__(self):
        if abs(self.det) != 1:
            raise NotHyperbolicError(f"|det A| = {abs(self.det)} != 1")
        if abs(self.trace) <= 2:
            raise NotHyperbolicError(f"|tr A| = {abs(self.trace)} <= 2")
        if self.roof <= 0:
            raise ValueError("roof must be positive")

    @classmethod
    def from_matrix(cls, matrix, roof: float = 1.0) -> "ToralAutomorphism":
        m = np.asarray(matrix)
        if m.shape != (2, 2):
            raise NotHyperbolicError(f"A must be 2x2, got shape {m.shape}")
        vals = [int(x) for x in m.ravel()]
        if any(float(v) != float(x) for v, x in zip(vals, np.ravel(m))):
            raise NotHyperbolicError("A must have integer entries")
        return cls(vals[0], vals[1], vals[2], vals[3], roof=roof)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def det(self) -> int:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def trace(self) -> int:
        return self.a11 + self.a22

    @property
    def expanding_eigenvalue(self) -> float:
        """The eigenvalue of modulus > 1."""
        t, d = self.trace, self.det
        disc = math.sqrt(t * t - 4 * d)
        roots = ((t + disc) / 2.0, (t - disc) / 2.0)
        return max(roots, key=abs)

    @property
    def contracting_eigenvalue(self) -> float:
        return self.det / self.expanding_eigenvalue

    def power(self, j: int) -> Tuple[int, int, int, int]:
        """Exact entries of A^j (Python integers, j >= 0)."""
        if not 0 <= j <= _MAX_POWER:
            raise ValueError(f"power {j} outside guarded range [0, {_MAX_POWER}]")
        m = (1, 0, 0, 1)
        base = (self.a11, self.a12, self.a21, self.a22)
        for _ in range(j):
            a, b, c, d = m
            e, f, g, h = base
            m = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return m

    def trace_power(self, j: int) -> int:
        """tr(A^j) by the exact recurrence t_j = t*t_(j-1) - det*t_(j-2)."""
        if j == 0:
            return 2
        t, d = self.trace, self.det
        prev, cur = 2, t
        for _ in range(j - 1):
            prev, cur = cur, t * cur - d * prev
        return cur


def count_fixed_points(aut: ToralAutomorphism, j: int) -> int:
    """|det(A^j - I)| in exact integer arithmetic (Lefschetz count)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    a, b, c, d = aut.power(j)
    return abs((a - 1) * (d - 1) - b * c)


@dataclass(frozen=True)
class OrbitRecord:
    """One group of primitive orbits sharing length, holonomy and linearisation.

    ``winding`` is the homology winding in the suspension direction (equal to
    the primitive period for suspension orbits); file-based records carry an
    explicit holonomy instead.
    """

    length: float
    count: int
    eig_expanding: float
    eig_contracting: float
    winding: Optional[int] = None
    holonomy: Optional[complex] = None
    period: Optional[int] = None

    def __post_init__(self):
        if self.length <= 0:
            raise ValidationError("length", f"must be positive, got {self.length}")
        if self.count < 1:
            raise ValidationError("count", f"must be >= 1, got {self.count}")
        prod = self.eig_expanding * self.eig_contracting
        if abs(abs(prod) - 1.0) > 1e-6:
            raise ValidationError(
                "poincare_eigs", f"eigenvalue product {prod} not of modulus 1"
            )
        if self.holonomy is not None and abs(abs(self.holonomy) - 1.0) > 1e-9:
            raise ValidationError("holonomy", f"|holonomy| = {abs(self.holonomy)} != 1")
        if self.holonomy is None and self.winding is None:
            raise ValidationError("holonomy", "record needs a holonomy or a winding")


@dataclass(frozen=True)
class OrbitData:
    """A set of primitive-orbit records, with provenance.

    ``aut`` is set for complete suspension spectra, in which case sharp
    collapsed tail bounds (via the Lefschetz counts) are available.
    """

    records: Tuple[OrbitRecord, ...]
    aut: Optional[ToralAutomorphism] = None
    complete_to: Optional[int] = None

    @property
    def is_suspension(self) -> bool:
        return self.aut is not None


def enumerate_primitive_orbits(aut: ToralAutomorphism, j_max: int) -> List[OrbitRecord]:
    """Primitive-orbit records for periods <= j_max via Moebius inversion.

    The counts N(j) satisfy sum_(d|j) d*N(d) = |det(A^j - I)| exactly.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    fixed = {j: count_fixed_points(aut, j) for j in range(1, j_max + 1)}
    mu = aut.expanding_eigenvalue
    records = []
    for j in range(1, j_max + 1):
        total = sum(_mobius(j // d) * fixed[d] for d in _divisors(j))
        if total % j != 0:
            raise ZeroDivisionError("Moebius inversion produced a non-integer count")
        n_j = total // j
        if n_j == 0:
            continue
        records.append(OrbitRecord(
            length=j * aut.roof,
            count=n_j,
            eig_expanding=mu ** j,
            eig_contracting=(aut.det / mu) ** j,
            winding=j,
            period=j,
        ))
    return records


def suspension_orbits(aut: ToralAutomorphism, j_max: int) -> OrbitData:
    return OrbitData(tuple(enumerate_primitive_orbits(aut, j_max)),
                     aut=aut, complete_to=j_max)


def poincare_data(aut: ToralAutomorphism, j: int, k: int) -> Tuple[int, int]:
    """(tr Lambda^k P^j, det(I - P^j)) as exact integers, with the per-orbit
    identity (-1)^n |det(I - P^j)| = sum_k (-1)^k tr Lambda^k P^j verified."""
    if not 0 <= k <= 2:
        raise ValueError("k must be in {0, 1, 2}")
    t_j = aut.trace_power(j)
    det_j = aut.det ** j
    traces = (1, t_j, det_j)
    det_i_minus = 1 - t_j + det_j
    alternating = traces[0] - traces[1] + traces[2]
    # n = 1 for the 3-dimensional suspension; exact in integer arithmetic.
    if alternating != -abs(det_i_minus):   # pragma: no cover
        raise AssertionError("per-orbit linear-algebra identity failed")
    return traces[k], det_i_minus


# -- orbit-spectrum file format -------------------------------------------------

_HEADER = "# zetabf orbit spectrum v1: length primitive_flag hol_re hol_im eig1 eig2 count"


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def write_orbit_spectrum(path, records: Sequence[OrbitRecord],
                         theta: Optional[float] = None):
    """Canonical writer; rows sorted by (length, holonomy phase).

    Suspension records carry a winding rather than a holonomy; pass ``theta``
    to materialise it as e^(i*theta*winding).
    """
    rows = []
    materialised = []
    for r in records:
        h = r.holonomy
        if h is None:
            if theta is None:
                raise ValidationError("holonomy",
                                      "winding-only record needs theta to be written")
            h = complex(np.exp(1j * theta * r.winding))
        materialised.append((r, h))
    for r, h in sorted(materialised, key=lambda p: (p[0].length, np.angle(p[1]))):
        rows.append(" ".join([
            _g17(r.length), "1", _g17(h.real), _g17(h.imag),
            _g17(r.eig_expanding), _g17(r.eig_contracting), str(r.count),
        ]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_HEADER + "\n")
        fh.write("\n".join(rows) + ("\n" if rows else ""))


def load_orbit_spectrum(path) -> OrbitData:
    """Parse and validate an orbit-spectrum file; exact duplicates merge."""
    records: List[OrbitRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 7:
                raise ParseError(lineno, f"expected 7 fields, got {len(fields)}")
            try:
                length = float(fields[0])
                flag = int(fields[1])
                hol = complex(float(fields[2]), float(fields[3]))
                eig1 = float(fields[4])
                eig2 = float(fields[5])
                count = int(fields[6])
            except ValueError as exc:
                raise ParseError(lineno, f"malformed number: {exc}")
            if flag != 1:
                raise ValidationError("primitive_flag",
                                      "only primitive records are supported")
            records.append(OrbitRecord(length=length, count=count,
                                       eig_expanding=eig1, eig_contracting=eig2,
                                       holonomy=hol))
    merged: List[OrbitRecord] = []
    for rec in records:
        for i, prev in enumerate(merged):
            if (prev.length == rec.length and prev.holonomy == rec.holonomy
                    and prev.eig_expanding == rec.eig_expanding
                    and prev.eig_contracting == rec.eig_contracting):
                merged[i] = replace(prev, count=prev.count + rec.count)
                break
        else:
            merged.append(rec)
    return OrbitData(tuple(merged))

"""Multidegrees, polarizations, the beta function and (quasi)stability.

For a multidegree ``d`` and polarization ``E = (r, e)`` on a curve ``C``::

    chi(L_Y)  = deg_Y(d) + sum_{k in Y} (1 - g_k) - internal_nodes(Y)
    beta(Y)   = chi(L_Y) + deg_Y(e) / r

``d`` is semistable when its total degree is ``g - 1 - mu(E)`` and
``beta >= 0`` on every proper subcurve; ``P``-quasistable when moreover
``beta > 0`` on every proper subcurve containing ``P``; stable when
``beta > 0`` everywhere.  Exact arithmetic throughout: the kernels work with
``r * beta`` and only the reporting layer turns it into a ``Fraction``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .curve import ModifiedCurve, NodalCurve, Subcurve, internal_nodes
from .errors import DegreeMismatch, ImproperSubcurve, InputError, SearchTooLarge


@dataclass(frozen=True)
class SheafClass:
    """A multidegree standing for a line-bundle class; equality is entrywise."""

    curve: NodalCurve = field(compare=False, repr=False)
    degrees: tuple[int, ...]

    def __post_init__(self):
        if len(self.degrees) != self.curve.p:
            raise InputError(
                f"multidegree has {len(self.degrees)} entries, curve has {self.curve.p} components")
        object.__setattr__(self, "degrees", tuple(int(x) for x in self.degrees))

    @property
    def total(self) -> int:
        return sum(self.degrees)

    def __getitem__(self, k):
        return self.degrees[k]

    def __len__(self):
        return len(self.degrees)

    def __add__(self, other):
        other = other.degrees if isinstance(other, SheafClass) else tuple(other)
        return SheafClass(self.curve, tuple(a + b for a, b in zip(self.degrees, other, strict=True)))

    def __sub__(self, other):
        other = other.degrees if isinstance(other, SheafClass) else tuple(other)
        return SheafClass(self.curve, tuple(a - b for a, b in zip(self.degrees, other, strict=True)))

    def minus_point(self, component: int) -> SheafClass:
        """Multidegree of ``m_Q`` tensored in, for a smooth point ``Q`` on ``component``."""
        d = list(self.degrees)
        d[component] -= 1
        return SheafClass(self.curve, tuple(d))

    def on(self, Y: Subcurve) -> int:
        return sum(self.degrees[k] for k in Y.members)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.curve.names, self.degrees))


def sheaf(curve: NodalCurve, degrees) -> SheafClass:
    if isinstance(degrees, dict):
        missing = set(curve.names) - set(degrees)
        extra = set(degrees) - set(curve.names)
        if missing or extra:
            raise InputError(f"multidegree map mismatch: missing {sorted(missing)}, "
                             f"unknown {sorted(extra)}")
        degrees = [degrees[n] for n in curve.names]
    return SheafClass(curve, tuple(degrees))


@dataclass(frozen=True)
class Polarization:
    rank: int
    degrees: tuple[int, ...]

    def __post_init__(self):
        if self.rank <= 0:
            raise InputError("polarization rank must be positive")
        object.__setattr__(self, "degrees", tuple(int(x) for x in self.degrees))
        if sum(self.degrees) % self.rank:
            raise InputError(
                f"rank {self.rank} does not divide polarization degree {sum(self.degrees)}")

    @classmethod
    def trivial(cls, curve: NodalCurve) -> Polarization:
        return cls(1, (0,) * curve.p)

    @property
    def slope(self) -> int:
        return sum(self.degrees) // self.rank

    def on(self, Y: Subcurve) -> int:
        return sum(self.degrees[k] for k in Y.members)

    def pullback(self, modified: ModifiedCurve) -> Polarization:
        """Pull back along the contraction: same degrees on old components, 0 on chains."""
        if len(self.degrees) != modified.base.p:
            raise InputError("polarization does not live on the base of this modification")
        extra = modified.curve.p - modified.base.p
        return Polarization(self.rank, self.degrees + (0,) * extra)

    def check(self, curve: NodalCurve):
        if len(self.degrees) != curve.p:
            raise InputError(
                f"polarization has {len(self.degrees)} entries, curve has {curve.p} components")


def expected_degree(curve: NodalCurve, E: Polarization) -> int:
    """Total degree ``g - 1 - mu`` forced by ``chi(E (x) I) = 0``."""
    return curve.genus - 1 - E.slope


def chi_structure(curve: NodalCurve, Y: Subcurve) -> int:
    return sum(1 - curve.components[k].genus for k in Y.members) - internal_nodes(curve, Y)


def euler_char(curve: NodalCurve, d: SheafClass, Y: Subcurve) -> int:
    """``chi`` of the restriction of ``d`` to ``Y`` (torsion removed)."""
    return d.on(Y) + chi_structure(curve, Y)


def beta(curve: NodalCurve, E: Polarization, d: SheafClass, Y: Subcurve) -> Fraction:
    if not Y.is_proper:
        raise ImproperSubcurve("beta is only taken on proper subcurves")
    return euler_char(curve, d, Y) + Fraction(E.on(Y), E.rank)


# ---------------------------------------------------------------------------
# vectorised tables


def _weights(curve: NodalCurve, E: Polarization, degrees) -> np.ndarray:
    degrees = np.atleast_2d(np.asarray(degrees, dtype=np.int64))
    base = 1 - np.asarray(curve.genera, dtype=np.int64)
    return E.rank * (degrees + base[None, :]) + np.asarray(E.degrees, dtype=np.int64)[None, :]


def scaled_beta_table(curve: NodalCurve, E: Polarization, degrees, *, backend=None) -> np.ndarray:
    """``rank * beta`` of every subset mask, one row per multidegree in ``degrees``."""
    E.check(curve)
    return kernels.beta_table(_weights(curve, E, degrees), curve.adjacency, E.rank,
                              backend=backend)


@lru_cache(maxsize=256)
def _check_masks(curve: NodalCurve, connected_only: bool) -> np.ndarray:
    order = kernels.canonical_order(curve.p)
    if connected_only:
        conn = kernels.connected_masks(curve.adjacency)
        order = order[conn[order]]
    return order


class Verdict(str, Enum):
    DEGREE_MISMATCH = "degree-mismatch"
    NOT_SEMISTABLE = "not-semistable"
    SEMISTABLE = "semistable-only"
    P_QUASISTABLE = "P-quasistable"
    STABLE = "stable"

    @property
    def semistable(self) -> bool:
        return self in (Verdict.SEMISTABLE, Verdict.P_QUASISTABLE, Verdict.STABLE)

    @property
    def quasistable(self) -> bool:
        return self in (Verdict.P_QUASISTABLE, Verdict.STABLE)

    @property
    def stable(self) -> bool:
        return self is Verdict.STABLE

    def meets(self, level: str) -> bool:
        """``level`` is one of semistable / quasistable / stable."""
        return {"semistable": self.semistable, "quasistable": self.quasistable,
                "stable": self.stable}[level]


_CODE_TO_VERDICT = (Verdict.NOT_SEMISTABLE, Verdict.SEMISTABLE, Verdict.P_QUASISTABLE,
                    Verdict.STABLE)


def _fraction(scaled: int, rank: int) -> Fraction:
    return Fraction(int(scaled), rank)


@dataclass(frozen=True)
class StabilityReport:
    """Verdict plus a re-checkable witness.

    The witness is the first subcurve, in order of increasing size and then
    lexicographic member list, that blocks the next stronger verdict: a
    negative beta for ``not-semistable``, a zero beta containing ``P`` for
    ``semistable-only`` and any zero beta for ``P-quasistable``.
    """

    verdict: Verdict
    total_degree: int
    expected_degree: int
    witness: Subcurve | None = None
    witness_beta: Fraction | None = None
    table: tuple[tuple[tuple[str, ...], Fraction], ...] | None = None

    @property
    def quasistable(self) -> bool:
        return self.verdict.quasistable

    def as_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "total_degree": self.total_degree,
            "expected_degree": self.expected_degree,
            "witness": list(self.witness.names) if self.witness else None,
            "witness_beta": fraction_str(self.witness_beta),
        }
        if self.table is not None:
            out["beta_table"] = [{"subcurve": list(names), "beta": fraction_str(b)}
                                 for names, b in self.table]
        return out


def fraction_str(x):
    if x is None:
        return None
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


TABLE_LIMIT = 4096


def verdict_codes(curve: NodalCurve, E: Polarization, degrees, P: int | None = None,
                  *, connected_only: bool = False, backend=None) -> np.ndarray:
    """Batch classification: 0 not semistable, 1 semistable only, 2 P-quasistable, 3 stable.

    The total degree is not checked here.
    """
    P = curve.marked if P is None else P
    table = scaled_beta_table(curve, E, degrees, backend=backend)
    masks = _check_masks(curve, connected_only)
    if masks.size == 0:
        return np.full(table.shape[0], 3, dtype=np.int64)
    vals = table[:, masks]
    has_p = ((masks >> P) & 1).astype(bool)
    neg = (vals < 0).any(axis=1)
    zero = vals == 0
    zero_any = zero.any(axis=1)
    zero_p = zero[:, has_p].any(axis=1)
    codes = np.full(table.shape[0], 3, dtype=np.int64)
    codes[zero_any] = 2
    codes[zero_p] = 1
    codes[neg] = 0
    return codes


def classify(curve: NodalCurve, E: Polarization, d: SheafClass, P: int | None = None,
             *, connected_only: bool = False, with_table: bool = False,
             backend=None) -> StabilityReport:
    """Exhaustive stability verdict for ``d`` with respect to ``E`` and ``P``."""
    P = curve.marked if P is None else curve.component_index(P)
    expected = expected_degree(curve, E)
    if len(d.degrees) != curve.p:
        raise InputError("multidegree does not match the curve")
    row = scaled_beta_table(curve, E, [d.degrees], backend=backend)[0]
    table = None
    if with_table and (1 << curve.p) <= TABLE_LIMIT:
        table = tuple((curve.subcurve_from_mask(int(m)).names, _fraction(row[m], E.rank))
                      for m in kernels.canonical_order(curve.p))
    if d.total != expected:
        return StabilityReport(Verdict.DEGREE_MISMATCH, d.total, expected, table=table)
    masks = _check_masks(curve, connected_only)
    vals = row[masks]
    has_p = ((masks >> P) & 1).astype(bool)

    def report(verdict, hits):
        if hits is None:
            return StabilityReport(verdict, d.total, expected, table=table)
        m = int(masks[hits[0]])
        return StabilityReport(verdict, d.total, expected, curve.subcurve_from_mask(m),
                               _fraction(row[m], E.rank), table)

    neg = np.flatnonzero(vals < 0)
    if neg.size:
        return report(Verdict.NOT_SEMISTABLE, neg)
    zero_p = np.flatnonzero((vals == 0) & has_p)
    if zero_p.size:
        return report(Verdict.SEMISTABLE, zero_p)
    zero = np.flatnonzero(vals == 0)
    if zero.size:
        return report(Verdict.P_QUASISTABLE, zero)
    return report(Verdict.STABLE, None)


def degree_window(curve: NodalCurve, E: Polarization) -> list[tuple[int, int]]:
    """Per-component bounds implied by ``beta >= 0`` on ``C_k`` and on its complement."""
    total = expected_degree(curve, E)
    r = E.rank
    if curve.p == 1:
        return [(total, total)]
    bounds = []
    for k in range(curve.p):
        Y = curve.subcurve(k)
        Yc = Y.complement()
        lo = math.ceil(Fraction(-chi_structure(curve, Y) * r - E.on(Y), r))
        hi = total + math.floor(Fraction(chi_structure(curve, Yc) * r + E.on(Yc), r))
        bounds.append((lo, hi))
    return bounds


def enumerate_semistable(curve: NodalCurve, E: Polarization, P: int | None = None,
                         *, cap: int = 200_000, connected_only: bool = False,
                         backend=None) -> tuple[list[SheafClass], list[SheafClass]]:
    """All semistable and all ``P``-quasistable multidegrees, sorted lexicographically."""
    P = curve.marked if P is None else curve.component_index(P)
    total = expected_degree(curve, E)
    bounds = degree_window(curve, E)
    volume = 1
    for lo, hi in bounds[:-1]:
        volume *= max(hi - lo + 1, 0)
    if volume > cap:
        raise SearchTooLarge(f"search window holds {volume} candidates (cap {cap})")
    lo_last, hi_last = bounds[-1]
    cands = []
    for head in itertools.product(*(range(lo, hi + 1) for lo, hi in bounds[:-1])):
        last = total - sum(head)
        if lo_last <= last <= hi_last:
            cands.append(head + (last,))
    if not cands:
        return [], []
    codes = verdict_codes(curve, E, cands, P, connected_only=connected_only, backend=backend)
    semi = [SheafClass(curve, c) for c, code in zip(cands, codes) if code >= 1]
    quasi = [SheafClass(curve, c) for c, code in zip(cands, codes) if code >= 2]
    return semi, quasi


def check_degree(curve: NodalCurve, E: Polarization, d: SheafClass):
    expected = expected_degree(curve, E)
    if d.total != expected:
        raise DegreeMismatch(f"total degree {d.total}, expected {expected}")

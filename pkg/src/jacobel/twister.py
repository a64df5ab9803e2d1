"""Twisters and the twister-difference subcurve.

A twister ``O_C(sum a_k C_k)`` has multidegree ``-Lap(G) a`` where ``Lap`` is
the Laplacian of the dual graph with loops removed: at ``C_j`` the degree is
``sum_{i != j} a_i delta_ij - a_j sum_{i != j} delta_ij``.  Adding a constant
to every coefficient does not change it, so coefficients are normalised to
``min a = 0``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .curve import NodalCurve, Subcurve
from .errors import DegreeMismatch, InvariantViolation, NoQuasistableTwister, NotAdjacent
from .stability import (
    Polarization,
    SheafClass,
    check_degree,
    classify,
    expected_degree,
    scaled_beta_table,
    verdict_codes,
)


def laplacian(curve: NodalCurve) -> np.ndarray:
    adj = np.array(curve.adjacency)
    np.fill_diagonal(adj, 0)
    return np.diag(adj.sum(axis=1)) - adj


def twister_multidegree(curve: NodalCurve, a) -> SheafClass:
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (curve.p,):
        raise ValueError(f"need {curve.p} twister coefficients, got shape {a.shape}")
    return SheafClass(curve, tuple(int(x) for x in -(laplacian(curve) @ a)))


def normalize(a) -> tuple[int, ...]:
    m = int(min(a))
    return tuple(int(x) - m for x in a)


def indicator(Y: Subcurve) -> tuple[int, ...]:
    return tuple(1 if k in Y.members else 0 for k in range(Y.curve.p))


def solve_twister(curve: NodalCurve, target) -> tuple[int, ...] | None:
    """Integer ``a`` (normalised) with ``twister_multidegree(a) == target``, or ``None``.

    Solves the reduced Laplacian system exactly over the rationals.
    """
    target = [int(x) for x in target]
    if sum(target) != 0:
        return None
    p = curve.p
    if p == 1:
        return (0,) if target == [0] else None
    lap = laplacian(curve)
    # -Lap a = target with a_0 = 0: rows/cols 1..p-1
    n = p - 1
    m = [[Fraction(-int(lap[i, j])) for j in range(1, p)] + [Fraction(target[i])]
         for i in range(1, p)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    sol = [m[r][n] for r in range(n)]
    if any(x.denominator != 1 for x in sol):
        return None
    return normalize([0] + [int(x) for x in sol])


def same_twister_class(curve: NodalCurve, d1, d2) -> bool:
    d1 = d1.degrees if isinstance(d1, SheafClass) else d1
    d2 = d2.degrees if isinstance(d2, SheafClass) else d2
    return solve_twister(curve, [x - y for x, y in zip(d1, d2)]) is not None


@dataclass(frozen=True)
class QuasistableTwist:
    """``twisted == start + twister_multidegree(coefficients)`` and it is P-quasistable."""

    coefficients: tuple[int, ...]
    twisted: SheafClass
    method: str
    iterations: int


def _violating_masks(row, masks, P):
    has_p = ((masks >> P) & 1).astype(bool)
    vals = row[masks]
    return (vals < 0) | ((vals == 0) & has_p), vals


def _fast_path(curve, E, d, P, max_iter):
    a = np.zeros(curve.p, dtype=np.int64)
    lap = laplacian(curve)
    degrees = np.asarray(d.degrees, dtype=np.int64)
    masks = kernels.canonical_order(curve.p)
    for it in range(max_iter + 1):
        row = scaled_beta_table(curve, E, [degrees])[0]
        bad, vals = _violating_masks(row, masks, P)
        if not bad.any():
            return normalize(a), it
        # canonical order already breaks ties by size and then members
        cand = np.flatnonzero(bad)
        pick = cand[np.argmin(vals[cand])]
        y = (int(masks[pick]) >> np.arange(curve.p)) & 1
        a -= y
        degrees = degrees + lap @ y
    return None, max_iter


def _exhaustive(curve, E, d, P, max_radius):
    base = np.asarray(d.degrees, dtype=np.int64)
    lap = laplacian(curve)
    if curve.p == 1:
        return (0,), 0
    for radius in range(0, max_radius + 1):
        rows = [c for c in itertools.product(range(radius + 1), repeat=curve.p)
                if min(c) == 0 and max(c) == radius]
        if not rows:
            continue
        coeffs = np.array(rows, dtype=np.int64)
        cands = base[None, :] - coeffs @ lap.T
        codes = verdict_codes(curve, E, cands, P)
        hits = np.flatnonzero(codes >= 2)
        if hits.size:
            found = {tuple(int(x) for x in cands[h]) for h in hits}
            if len(found) > 1:
                raise InvariantViolation(
                    "several P-quasistable multidegrees in one twister class",
                    witness=sorted(found))
            return tuple(int(x) for x in coeffs[hits[0]]), radius
    return None, max_radius


def find_quasistable_twister(curve: NodalCurve, E: Polarization, d: SheafClass,
                             P: int | None = None, *, max_iter: int | None = None,
                             max_radius: int = 12, method: str = "auto") -> QuasistableTwist:
    """The unique twister making ``d`` ``P``-quasistable.

    ``method="auto"`` runs the greedy path (repeatedly twist by ``-Y`` for the
    most negative offending subcurve ``Y``) and falls back to the expanding-box
    search when the iteration cap is hit; ``"exhaustive"`` skips the greedy
    path.
    """
    P = curve.marked if P is None else curve.component_index(P)
    check_degree(curve, E, d)
    if max_iter is None:
        max_iter = 20 * curve.p * max(1, len(curve.nodes))
    a = None
    iterations = 0
    used = method
    if method in ("auto", "fast"):
        a, iterations = _fast_path(curve, E, d, P, max_iter)
        used = "fast"
    if a is None and method != "fast":
        a, iterations = _exhaustive(curve, E, d, P, max_radius)
        used = "exhaustive"
    if a is None:
        raise NoQuasistableTwister(
            f"no P-quasistable twist of {d.degrees} found ({used}, limit reached)")
    twisted = d + twister_multidegree(curve, a)
    if not classify(curve, E, twisted, P).quasistable:
        raise InvariantViolation("twisted class is not P-quasistable", witness=twisted.degrees)
    return QuasistableTwist(a, twisted, used, iterations)


def abel_twisters(curve: NodalCurve, E: Polarization, L: SheafClass, P: int | None = None,
                  **kw) -> tuple[QuasistableTwist, ...]:
    """``T_i`` for every component: the twist making ``m_{Q_i} (x) L`` P-quasistable."""
    return tuple(find_quasistable_twister(curve, E, L.minus_point(i), P, **kw)
                 for i in range(curve.p))


@dataclass(frozen=True)
class TwisterDifference:
    i: int
    j: int
    subcurve: Subcurve | None
    source: str | None
    intermediate: SheafClass
    corrected: SheafClass
    Ti: tuple[int, ...]
    Tj: tuple[int, ...]
    ties: tuple[Subcurve, ...]

    @property
    def names(self):
        return self.subcurve.names if self.subcurve else ()

    def as_dict(self) -> dict:
        c = self.intermediate.curve
        return {
            "i": c.names[self.i],
            "j": c.names[self.j],
            "subcurve": list(self.names),
            "source": self.source,
            "intermediate": list(self.intermediate.degrees),
            "corrected": list(self.corrected.degrees),
            "T_i": list(self.Ti),
            "T_j": list(self.Tj),
            "ties": [list(t.names) for t in self.ties],
        }


def twister_difference(curve: NodalCurve, E: Polarization, L: SheafClass, P, i, j,
                       *, twisters: tuple[QuasistableTwist, ...] | None = None) -> TwisterDifference:
    """The subcurve ``Z_ij`` with ``T_j = T_i (x) O(-Z_ij)``, with both checks attached.

    ``M = m_{Q_j} (x) L (x) T_i``.  Among proper subcurves attaining the minimum
    of ``beta(M)``, set A holds those with negative value and set B those with
    value 0 containing ``P``; ``Z_ij`` is a smallest member of A (else of B),
    ties broken lexicographically.  Empty when ``i == j`` or both sets are empty.
    """
    P = curve.marked if P is None else curve.component_index(P)
    i = curve.component_index(i)
    j = curve.component_index(j)
    if L.total != expected_degree(curve, E) + 1:
        raise DegreeMismatch(f"deg L = {L.total}, expected {expected_degree(curve, E) + 1}")
    if i != j and curve.adjacency[i, j] == 0:
        raise NotAdjacent(f"components {curve.names[i]} and {curve.names[j]} do not meet")
    if twisters is None:
        Ti = find_quasistable_twister(curve, E, L.minus_point(i), P)
        Tj = find_quasistable_twister(curve, E, L.minus_point(j), P)
    else:
        Ti, Tj = twisters[i], twisters[j]
    M = L.minus_point(j) + twister_multidegree(curve, Ti.coefficients)
    Z = None
    source = None
    ties: tuple[Subcurve, ...] = ()
    if i != j:
        masks = kernels.canonical_order(curve.p)
        row = scaled_beta_table(curve, E, [M.degrees])[0]
        vals = row[masks]
        low = vals.min() if vals.size else 0
        at_min = vals == low
        if low < 0:
            chosen, source = np.flatnonzero(at_min), "A"
        elif low == 0:
            chosen = np.flatnonzero(at_min & (((masks >> P) & 1) == 1))
            source = "B" if chosen.size else None
        else:
            chosen = np.array([], dtype=np.int64)
        if chosen.size:
            subs = [curve.subcurve_from_mask(int(masks[k])) for k in chosen]
            smallest = min(len(s) for s in subs)
            minimal = [s for s in subs if len(s) == smallest]
            Z = minimal[0]
            ties = tuple(minimal[1:])
    corrected = M if Z is None else M + twister_multidegree(curve, [-x for x in indicator(Z)])
    result = TwisterDifference(i, j, Z, source, M, corrected, Ti.coefficients, Tj.coefficients,
                               ties)
    if Z is not None and (j not in Z.members or i in Z.members):
        raise InvariantViolation(f"Z_{i},{j} = {Z} does not separate C_j from C_i", witness=Z)
    report = classify(curve, E, corrected, P)
    if not report.quasistable:
        raise InvariantViolation(
            f"M (x) O(-Z) is {report.verdict.value}, not P-quasistable",
            witness=(report.witness, report.witness_beta))
    lhs = twister_multidegree(curve, Tj.coefficients)
    rhs = twister_multidegree(curve, Ti.coefficients)
    if Z is not None:
        rhs = rhs + twister_multidegree(curve, [-x for x in indicator(Z)])
    if lhs != rhs:
        raise InvariantViolation("T_j differs from T_i (x) O(-Z_ij)",
                                 witness=(lhs.degrees, rhs.degrees))
    return result


def quasistable_oracle(curve: NodalCurve, E: Polarization, d: SheafClass, P=None,
                       quasistable: list[SheafClass] | None = None) -> list[SheafClass]:
    """Every P-quasistable multidegree twister-equivalent to ``d`` (brute force)."""
    from .stability import enumerate_semistable

    if quasistable is None:
        quasistable = enumerate_semistable(curve, E, P)[1]
    return [q for q in quasistable if same_twister_class(curve, q, d)]

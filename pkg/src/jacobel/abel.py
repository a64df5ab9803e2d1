"""Fiberwise limits of the degree-1 Abel map.

For every point stratum ``R`` of ``C`` (the generic point of a component, or a
node) the fiber of the resolved family is ``C`` itself, ``C_R`` (irreducible
node) or ``C(1)`` (reducible node).  On it the limit class is assembled from
three pieces:

* the ideal of the strict transform of the diagonal,
* the pullback of ``L`` (degree 0 on exceptional components),
* the restriction of ``sum_i D_{i, Z_i}``, the product divisors built from the
  twisters ``T_i = O(Z_i)``.

Exceptional curves with ``beta = 2`` are then twisted away (the G correction),
which leaves a negatively admissible class whose pushforward to ``C`` is the
value of the extended Abel map at ``R``.

The desingularization is modelled only through which strict transforms
``D_{a,b}`` contain the exceptional curve ``E`` over each pair of distinct
reducible nodes ``(R, S)``.  With ``R`` joining ``(i, j)`` and ``S`` joining
``(k, l)`` in declaration order, ``cross`` puts ``E`` in ``D_{i,l}`` and
``D_{j,k}``; ``parallel`` in ``D_{i,k}`` and ``D_{j,l}``.  Over ``(R, R)`` the
curve lies in the diagonal and in ``D_{i,j}``, ``D_{j,i}`` (``cross``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .curve import ModifiedCurve, NodalCurve, c_one, c_r, unmodified
from .errors import (
    DegreeMismatch,
    InputError,
    InvariantViolation,
    NotAdmissible,
    NotReducibleNode,
    SearchTooLarge,
)
from .stability import (
    Polarization,
    SheafClass,
    StabilityReport,
    classify,
    expected_degree,
    fraction_str,
)
from .twister import QuasistableTwist, abel_twisters, twister_multidegree

CROSS = "cross"
PARALLEL = "parallel"
MATCHINGS = (CROSS, PARALLEL)


@dataclass(frozen=True)
class DesingularizationChoice:
    """Matching per ordered pair of distinct reducible nodes (node indices).

    Pairs not listed use ``default``.
    """

    matchings: tuple[tuple[tuple[int, int], str], ...] = ()
    default: str = CROSS

    def __post_init__(self):
        for _, m in self.matchings:
            if m not in MATCHINGS:
                raise InputError(f"unknown matching {m!r}")
        if self.default not in MATCHINGS:
            raise InputError(f"unknown matching {self.default!r}")

    def matching(self, R: int, S: int) -> str:
        if R == S:
            return CROSS
        return dict(self.matchings).get((R, S), self.default)

    @classmethod
    def from_names(cls, curve: NodalCurve, mapping, default: str = CROSS):
        """``mapping`` sends ``(R_name, S_name)`` to a matching."""
        out = []
        for (r, s), m in dict(mapping).items():
            R, S = curve.node_index(r), curve.node_index(s)
            for k in (R, S):
                if curve.nodes[k].is_loop:
                    raise NotReducibleNode(f"node {curve.nodes[k].name!r} is irreducible")
            if R == S:
                raise InputError(f"no matching is chosen over ({r}, {r})")
            out.append(((R, S), m))
        return cls(tuple(sorted(out)), default)

    def as_dict(self, curve: NodalCurve) -> dict[str, str]:
        return {f"{curve.nodes[R].name}>{curve.nodes[S].name}": self.matching(R, S)
                for R, S in choice_pairs(curve)}


def choice_pairs(curve: NodalCurve) -> list[tuple[int, int]]:
    red = curve.reducible_nodes
    return [(R, S) for R in red for S in red if R != S]


def iter_choices(curve: NodalCurve, cap: int = 4096):
    """Every global matching assignment; raises when there are more than ``cap``."""
    pairs = choice_pairs(curve)
    if 2 ** len(pairs) > cap:
        raise SearchTooLarge(f"{2 ** len(pairs)} matching assignments exceed cap {cap}")
    for combo in itertools.product(MATCHINGS, repeat=len(pairs)):
        yield DesingularizationChoice(tuple(zip(pairs, combo)))


def containing_pairs(curve: NodalCurve, choice: DesingularizationChoice, R: int, S: int,
                     diagonal: str = CROSS) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two products ``(a, b)`` whose strict transform contains ``E`` over ``(R, S)``."""
    i, j = curve.nodes[R].ends
    k, l = curve.nodes[S].ends
    m = diagonal if R == S else choice.matching(R, S)
    if m == CROSS:
        return (i, l), (j, k)
    return (i, k), (j, l)


def restrict_product_divisor(curve: NodalCurve, choice: DesingularizationChoice, R,
                             weights, *, diagonal: str = CROSS):
    """Coefficients of ``sum w_{a,b} D_{a,b}`` restricted to the fiber over the node ``R``.

    Returns ``(a, b)``: ``a[k] = w[i][k] + w[j][k]`` on the strict transform of
    each component and ``b[S]`` (keyed by node index) on the exceptional curve
    over every reducible node ``S``.  ``diagonal`` overrides the containment
    over ``(R, R)``; the resolution used for Abel maps always has ``cross``
    there.
    """
    R = curve.node_index(R)
    if curve.nodes[R].is_loop:
        raise NotReducibleNode(f"node {curve.nodes[R].name!r} is irreducible")
    w = np.asarray(weights, dtype=np.int64)
    i, j = curve.nodes[R].ends
    a = tuple(int(w[i, k] + w[j, k]) for k in range(curve.p))
    b = {}
    for S in curve.reducible_nodes:
        (p1, q1), (p2, q2) = containing_pairs(curve, choice, R, S, diagonal)
        b[S] = int(w[p1, q1] + w[p2, q2])
    return a, b


# ---------------------------------------------------------------------------
# strata and fibers


@dataclass(frozen=True)
class Stratum:
    kind: str
    index: int

    def name(self, curve: NodalCurve) -> str:
        if self.kind == "component":
            return curve.components[self.index].name
        return curve.nodes[self.index].name


def strata(curve: NodalCurve) -> list[Stratum]:
    return ([Stratum("component", k) for k in range(curve.p)]
            + [Stratum("node", k) for k in range(len(curve.nodes))])


@lru_cache(maxsize=1024)
def fiber_for(curve: NodalCurve, stratum: Stratum) -> ModifiedCurve:
    if stratum.kind == "component":
        return unmodified(curve)
    if curve.nodes[stratum.index].is_loop:
        return c_r(curve, stratum.index)
    return c_one(curve)


def _chain_component(fiber: ModifiedCurve, node: int) -> int:
    (k,) = fiber.chain_of[node]
    return k


def diagonal_ideal_degrees(curve: NodalCurve, stratum: Stratum,
                           fiber: ModifiedCurve | None = None) -> SheafClass:
    """Multidegree of the diagonal ideal on the fiber over ``stratum``; total -1."""
    fiber = fiber or fiber_for(curve, stratum)
    d = [0] * fiber.curve.p
    if stratum.kind == "component":
        d[stratum.index] = -1
    else:
        i, j = curve.nodes[stratum.index].ends
        d[i] -= 1
        d[j] -= 1
        d[_chain_component(fiber, stratum.index)] += 1
    return SheafClass(fiber.curve, tuple(d))


def fiber_twister_coefficients(curve: NodalCurve, choice: DesingularizationChoice,
                               stratum: Stratum, weights, fiber: ModifiedCurve) -> tuple[int, ...]:
    """Coefficient vector on the fiber's components of the restricted product divisor."""
    w = np.asarray(weights, dtype=np.int64)
    if stratum.kind == "component":
        return tuple(int(x) for x in w[stratum.index])
    node = curve.nodes[stratum.index]
    coeffs = [0] * fiber.curve.p
    if node.is_loop:
        # only D_{i,*} passes through the fiber over a point of C_i
        i = node.ends[0]
        coeffs[:curve.p] = [int(x) for x in w[i]]
        coeffs[_chain_component(fiber, stratum.index)] = int(w[i, i])
        return tuple(coeffs)
    a, b = restrict_product_divisor(curve, choice, stratum.index, w)
    coeffs[:curve.p] = a
    for S, val in b.items():
        coeffs[_chain_component(fiber, S)] = val
    return tuple(coeffs)


def twister_weights(twisters: tuple[QuasistableTwist, ...]) -> np.ndarray:
    """``w[i][k]``: coefficient of ``C_k`` in ``Z_i``."""
    return np.array([t.coefficients for t in twisters], dtype=np.int64)


def restricted_twister(curve, choice, stratum, weights, fiber) -> SheafClass:
    coeffs = fiber_twister_coefficients(curve, choice, stratum, weights, fiber)
    return twister_multidegree(fiber.curve, coeffs)


def _check_L(curve: NodalCurve, E: Polarization, L: SheafClass):
    want = expected_degree(curve, E) + 1
    if L.total != want:
        raise DegreeMismatch(f"deg L = {L.total}, expected g - mu = {want}")


def limit_multidegree(curve: NodalCurve, E: Polarization, L: SheafClass, P,
                      choice: DesingularizationChoice, stratum: Stratum, *,
                      twisters: tuple[QuasistableTwist, ...] | None = None,
                      fiber: ModifiedCurve | None = None) -> SheafClass:
    """Multidegree of the limit class on the fiber over ``stratum``."""
    _check_L(curve, E, L)
    P = curve.marked if P is None else curve.component_index(P)
    if twisters is None:
        twisters = abel_twisters(curve, E, L, P)
    fiber = fiber or fiber_for(curve, stratum)
    diag = diagonal_ideal_degrees(curve, stratum, fiber)
    pull = SheafClass(fiber.curve, L.degrees + (0,) * (fiber.curve.p - curve.p))
    tw = restricted_twister(curve, choice, stratum, twister_weights(twisters), fiber)
    return diag + pull + tw


def chain_degrees(fiber: ModifiedCurve, d: SheafClass) -> dict[int, int]:
    """Degree of ``d`` on each chain, keyed by base node index."""
    return {node: sum(d.degrees[k] for k in comps) for node, comps in fiber.chains}


def classify_admissibility(fiber: ModifiedCurve, d: SheafClass) -> str:
    degs = set(chain_degrees(fiber, d).values())
    if not degs <= {-1, 0, 1}:
        return "not-admissible"
    if degs <= {0}:
        return "invertible"
    if degs <= {-1, 0}:
        return "negatively-admissible"
    if degs <= {0, 1}:
        return "positively-admissible"
    return "admissible"


def g_correction(fiber: ModifiedCurve, E_pullback: Polarization,
                 mtilde: SheafClass) -> SheafClass:
    """Twist by every exceptional component with ``beta = 2``.

    Each such component loses 2 and each attachment point gives 1 to the
    component it lies on.
    """
    if classify_admissibility(fiber, mtilde) == "not-admissible":
        raise NotAdmissible("limit class has a chain degree outside {-1, 0, 1}")
    out = mtilde
    for k in fiber.exceptional:
        b = (mtilde.degrees[k] + 1) * E_pullback.rank + E_pullback.degrees[k]
        if b == 2 * E_pullback.rank:
            ind = [0] * fiber.curve.p
            ind[k] = 1
            out = out + twister_multidegree(fiber.curve, ind)
    return out


@dataclass(frozen=True)
class Pushforward:
    """Image in the compactified Jacobian, described combinatorially.

    ``degrees`` are the degrees on the strict transforms of the components of
    ``C``; ``noninvertible`` lists the nodes whose chain has degree -1 and
    ``positive`` those with degree +1 (a non-canonical description).
    """

    degrees: tuple[int, ...]
    noninvertible: tuple[str, ...]
    total: int
    positive: tuple[str, ...] = ()

    @property
    def canonical(self) -> bool:
        return not self.positive

    def key(self):
        return (self.degrees, self.noninvertible, self.total, self.positive)

    def as_dict(self) -> dict:
        return {"degrees": list(self.degrees), "noninvertible": list(self.noninvertible),
                "total": self.total, "positive_chains": list(self.positive),
                "canonical": self.canonical}


def pushforward_descriptor(fiber: ModifiedCurve, d: SheafClass) -> Pushforward:
    if classify_admissibility(fiber, d) == "not-admissible":
        raise NotAdmissible("cannot push forward a non-admissible class")
    base = fiber.base
    chains = chain_degrees(fiber, d)
    return Pushforward(
        tuple(d.degrees[:base.p]),
        tuple(base.nodes[n].name for n, v in sorted(chains.items()) if v == -1),
        d.total,
        tuple(base.nodes[n].name for n, v in sorted(chains.items()) if v == 1),
    )


@dataclass(frozen=True)
class FiberRecord:
    stratum: Stratum
    name: str
    fiber: ModifiedCurve = field(repr=False)
    mtilde: SheafClass
    g_class: SheafClass
    admissibility: str
    g_admissibility: str
    pushforward: Pushforward
    stability: StabilityReport
    chain_betas: tuple[tuple[str, Fraction], ...] = ()

    @property
    def fiber_kind(self) -> str:
        if self.stratum.kind == "component":
            return "C"
        return "C_R" if self.fiber.base.nodes[self.stratum.index].is_loop else "C(1)"

    def as_dict(self) -> dict:
        return {
            "stratum": {"kind": self.stratum.kind, "name": self.name},
            "fiber": self.fiber_kind,
            "fiber_components": list(self.fiber.curve.names),
            "mtilde": list(self.mtilde.degrees),
            "g_class": list(self.g_class.degrees),
            "admissibility": self.admissibility,
            "g_admissibility": self.g_admissibility,
            "chain_betas": {n: fraction_str(b) for n, b in self.chain_betas},
            "pushforward": self.pushforward.as_dict(),
            "stability": self.stability.as_dict(),
        }


def fiber_record(curve: NodalCurve, E: Polarization, L: SheafClass, P: int,
                 choice: DesingularizationChoice, stratum: Stratum,
                 twisters: tuple[QuasistableTwist, ...], *, verify: bool = True) -> FiberRecord:
    fiber = fiber_for(curve, stratum)
    name = stratum.name(curve)
    mtilde = limit_multidegree(curve, E, L, P, choice, stratum, twisters=twisters, fiber=fiber)
    Ep = E.pullback(fiber)
    adm = classify_admissibility(fiber, mtilde)
    if adm == "not-admissible":
        raise InvariantViolation(f"limit class over {name} is not admissible",
                                 witness=chain_degrees(fiber, mtilde))
    betas = tuple((fiber.curve.components[k].name,
                   Fraction((mtilde.degrees[k] + 1) * Ep.rank + Ep.degrees[k], Ep.rank))
                  for k in fiber.exceptional)
    g = g_correction(fiber, Ep, mtilde)
    g_adm = classify_admissibility(fiber, g)
    push = pushforward_descriptor(fiber, g)
    report = classify(fiber.curve, Ep, g, P)
    record = FiberRecord(stratum, name, fiber, mtilde, g, adm, g_adm, push, report, betas)
    if verify:
        verify_record(curve, E, L, P, record, twisters)
    return record


def verify_record(curve, E, L, P, record: FiberRecord, twisters):
    name = record.name
    if record.g_admissibility not in ("invertible", "negatively-admissible"):
        raise InvariantViolation(f"G over {name} is {record.g_admissibility}",
                                 witness=record.g_class.degrees)
    if not record.stability.quasistable:
        raise InvariantViolation(
            f"G over {name} is {record.stability.verdict.value} on its fiber",
            witness=(record.stability.witness.names if record.stability.witness else None,
                     record.stability.witness_beta))
    if record.pushforward.total != L.total - 1:
        raise InvariantViolation(f"pushforward over {name} has degree {record.pushforward.total}")
    if record.stratum.kind == "component":
        i = record.stratum.index
        if record.mtilde.degrees != twisters[i].twisted.degrees:
            raise InvariantViolation(f"smooth fiber over {name} differs from m_Q (x) L (x) T_i",
                                     witness=(record.mtilde.degrees, twisters[i].twisted.degrees))


def resolve_abel_map(curve: NodalCurve, E: Polarization, L: SheafClass, P=None,
                     choice: DesingularizationChoice | None = None, *,
                     twisters: tuple[QuasistableTwist, ...] | None = None,
                     verify: bool = True) -> list[FiberRecord]:
    """One record per component and per node, in declaration order."""
    E.check(curve)
    _check_L(curve, E, L)
    P = curve.marked if P is None else curve.component_index(P)
    choice = choice or DesingularizationChoice()
    if twisters is None:
        twisters = abel_twisters(curve, E, L, P)
    return [fiber_record(curve, E, L, P, choice, s, twisters, verify=verify)
            for s in strata(curve)]

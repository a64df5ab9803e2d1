"""Release criteria, runnable from ``jacobel selftest`` and from the test suite.

Every criterion compares the engine against reference computations written
independently here: beta values from a direct loop over nodes, stability by
brute force over subsets, and twister classes by a floating least-squares
solve that is then checked for integrality.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .abel import iter_choices, resolve_abel_map
from .curve import NodalCurve
from .document import CurveDocument, corpus
from .errors import JacobelError
from .stability import Polarization, SheafClass, beta, enumerate_semistable, scaled_beta_table
from .twister import abel_twisters, find_quasistable_twister, twister_difference

# ---------------------------------------------------------------------------
# reference computations


def ref_internal(curve: NodalCurve, members) -> int:
    members = set(members)
    return sum(1 for n in curve.nodes if n.ends[0] in members and n.ends[1] in members)


def ref_delta(curve: NodalCurve, Y, Z) -> int:
    Y, Z = set(Y), set(Z)
    return sum(1 for n in curve.nodes
               if (n.ends[0] in Y and n.ends[1] in Z) or (n.ends[0] in Z and n.ends[1] in Y))


def ref_scaled_beta(curve: NodalCurve, rank: int, e, d, members) -> int:
    """``rank * beta`` computed straight from the definition."""
    chi = sum(1 - curve.components[k].genus for k in members) - ref_internal(curve, members)
    return rank * (sum(d[k] for k in members) + chi) + sum(e[k] for k in members)


@lru_cache(maxsize=None)
def ref_subsets(curve: NodalCurve):
    """Membership matrix of the proper subsets and their ``chi(O_Y)``, by direct counting."""
    subsets = [Y for size in range(1, curve.p)
               for Y in itertools.combinations(range(curve.p), size)]
    S = np.zeros((len(subsets), curve.p), dtype=np.int64)
    chi = np.zeros(len(subsets), dtype=np.int64)
    for row, Y in enumerate(subsets):
        S[row, list(Y)] = 1
        chi[row] = sum(1 - curve.components[k].genus for k in Y) - ref_internal(curve, Y)
    S.setflags(write=False)
    chi.setflags(write=False)
    return S, chi


def ref_codes(curve: NodalCurve, rank: int, e, D) -> tuple[np.ndarray, np.ndarray]:
    """Scaled beta of every proper subset for each row of ``D``, and the subset matrix."""
    S, chi = ref_subsets(curve)
    D = np.atleast_2d(np.asarray(D, dtype=np.int64))
    return rank * (D @ S.T + chi[None, :]) + (S @ np.asarray(e, dtype=np.int64))[None, :], S


def ref_code(curve: NodalCurve, rank: int, e, d, P: int) -> int:
    """0 not semistable, 1 semistable only, 2 P-quasistable, 3 stable (degree assumed right)."""
    if curve.p == 1:
        return 3
    vals, S = ref_codes(curve, rank, e, [d])
    vals = vals[0]
    if (vals < 0).any():
        return 0
    zero = vals == 0
    if (zero & (S[:, P] == 1)).any():
        return 1
    return 2 if zero.any() else 3


def ref_laplacian(curve: NodalCurve) -> np.ndarray:
    lap = np.zeros((curve.p, curve.p), dtype=np.int64)
    for n in curve.nodes:
        a, b = n.ends
        if a != b:
            lap[a, a] += 1
            lap[b, b] += 1
            lap[a, b] -= 1
            lap[b, a] -= 1
    return lap


def ref_twist(curve: NodalCurve, d, a) -> tuple[int, ...]:
    return tuple(int(x) for x in np.asarray(d) - ref_laplacian(curve) @ np.asarray(a))


def ref_same_class(curve: NodalCurve, d1, d2) -> bool:
    diff = np.asarray(d1, dtype=float) - np.asarray(d2, dtype=float)
    if curve.p == 1:
        return bool(diff[0] == 0)
    lap = ref_laplacian(curve).astype(float)
    # d1 - d2 = -Lap a with a_0 = 0
    sol, *_ = np.linalg.lstsq(-lap[:, 1:], diff, rcond=None)
    a = np.rint(sol)
    if np.abs(sol - a).max() > 1e-6:
        return False
    return bool(np.array_equal(-lap[:, 1:] @ a, diff))


def ref_quasistable(curve: NodalCurve, E: Polarization, P: int) -> list[tuple[int, ...]]:
    """P-quasistable multidegrees by brute force over a box that must contain them all."""
    r, e = E.rank, E.degrees
    total = curve.genus - 1 - sum(e) // r
    if curve.p == 1:
        return [(total,)]
    # beta(C_k) >= 0 and beta(complement) >= 0 confine d_k to a window of this half-width
    B = abs(total) + curve.genus + len(curve.nodes) + sum(abs(x) for x in e) + 2
    heads = np.array(list(itertools.product(range(-B, B + 1), repeat=curve.p - 1)),
                     dtype=np.int64).reshape(-1, curve.p - 1)
    D = np.column_stack([heads, total - heads.sum(axis=1)])
    vals, S = ref_codes(curve, r, e, D)
    ok = (vals >= 0).all(axis=1) & ~((vals == 0) & (S[:, P] == 1)[None, :]).any(axis=1)
    return [tuple(int(x) for x in d) for d in D[ok]]


# ---------------------------------------------------------------------------
# helpers


def test_polarizations(curve: NodalCurve, doc_E: Polarization) -> list[Polarization]:
    p = curve.p
    out = [Polarization.trivial(curve)]
    if doc_E not in out:
        out.append(doc_E)
    skew = [(k % 3) for k in range(1, p + 1)]
    skew[-1] -= sum(skew) % 3
    out.append(Polarization(3, tuple(skew)))
    if p >= 2:
        out.append(Polarization(2, (1,) + (0,) * (p - 2) + (-1,)))
    return out


def line_bundle_for(doc: CurveDocument, E: Polarization) -> SheafClass:
    """The document's line bundle shifted at ``P`` to have degree ``g - mu(E)``."""
    L = doc.line_bundle
    want = doc.curve.genus - E.slope
    d = list(L.degrees)
    d[doc.marked] += want - L.total
    return SheafClass(doc.curve, tuple(d))


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool = True
    checks: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0
    budget: float | None = None
    gating: bool = True

    def check(self, ok: bool, witness=None):
        self.checks += 1
        if not ok:
            self.passed = False
            if len(self.failures) < 10:
                self.failures.append(witness)

    def as_dict(self) -> dict:
        out = {"criterion": self.number, "title": self.title, "passed": self.passed,
               "checks": self.checks, "failures": self.failures, "gating": self.gating}
        if self.budget is not None:
            out["budget_seconds"] = self.budget
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if not self.gating:
            status = "note"
        return (f"[{status}] {self.number}. {self.title}: {self.checks} checks, "
                f"{len(self.failures)} failures ({self.elapsed:.2f}s)")


def _timed(fn):
    def run(*args, **kw):
        t = time.perf_counter()
        res = fn(*args, **kw)
        res.elapsed = time.perf_counter() - t
        if res.budget is not None and res.elapsed > res.budget:
            res.check(False, f"took {res.elapsed:.1f}s, budget {res.budget}s")
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def _pairs(curve):
    return [(i, j) for i in range(curve.p) for j in range(curve.p)
            if i != j and curve.adjacency[i, j] > 0]


# ---------------------------------------------------------------------------
# criteria


@_timed
def beta_additivity(docs) -> CriterionResult:
    res = CriterionResult(1, "beta additivity over disjoint subcurves", budget=5.0)
    for doc in docs:
        c = doc.curve
        if c.p > 6:
            continue
        full = 1 << c.p
        pairs = [(y, z) for y in range(1, full) for z in range(y + 1, full) if not y & z]
        ys = np.array([y for y, _ in pairs], dtype=np.int64)
        zs = np.array([z for _, z in pairs], dtype=np.int64)
        dref = np.array([ref_delta(c, _bits(y), _bits(z)) for y, z in pairs], dtype=np.int64)
        base = doc.line_bundle.minus_point(doc.marked).degrees if doc.line_bundle else (0,) * c.p
        window = np.array([np.add(base, s) for s in itertools.product(range(-2, 3), repeat=c.p)])
        for E in test_polarizations(c, doc.polarization):
            table = scaled_beta_table(c, E, window)
            lhs = table[:, ys | zs]
            rhs = table[:, ys] + table[:, zs] - E.rank * dref[None, :]
            bad = np.argwhere(lhs != rhs)
            res.check(bad.size == 0, None if bad.size == 0 else
                      {"curve": doc.name, "multidegree": window[bad[0][0]].tolist(),
                       "Y": list(_bits(ys[bad[0][1]])), "Z": list(_bits(zs[bad[0][1]]))})
            # exact agreement with the definition on the unshifted class
            for m in range(1, full):
                want = ref_scaled_beta(c, E.rank, E.degrees, base, _bits(m))
                res.check(int(table[len(window) // 2, m]) == want,
                          {"curve": doc.name, "mask": m})
    return res


def _bits(mask):
    mask = int(mask)
    return tuple(k for k in range(mask.bit_length()) if mask >> k & 1)


@_timed
def beta_shift(docs) -> CriterionResult:
    res = CriterionResult(2, "beta shift when the point moves between adjacent components")
    for doc in docs:
        c = doc.curve
        if doc.line_bundle is None:
            continue
        for E in test_polarizations(c, doc.polarization):
            L = line_bundle_for(doc, E)
            T = abel_twisters(c, E, L, doc.marked)
            for i, j in _pairs(c):
                Mi = T[i].twisted
                M = L.minus_point(j) + (Mi.degrees[k] - L.minus_point(i).degrees[k]
                                        for k in range(c.p))
                for m in range(1, (1 << c.p) - 1):
                    Y = c.subcurve_from_mask(m)
                    diff = beta(c, E, M, Y) - beta(c, E, Mi, Y)
                    want = -1 if (j in Y and i not in Y) else 1 if (i in Y and j not in Y) else 0
                    res.check(diff == want, {"curve": doc.name, "i": i, "j": j,
                                             "Y": list(Y.names), "got": str(diff)})
    return res


@_timed
def banana_enumeration(_docs=None) -> CriterionResult:
    from .document import corpus_document

    res = CriterionResult(3, "banana semistable and quasistable multidegrees")
    doc = corpus_document("banana")
    E = Polarization.trivial(doc.curve)
    semi, quasi = enumerate_semistable(doc.curve, E, doc.curve.component_index("v1"))
    got_s = {s.degrees for s in semi}
    got_q = {q.degrees for q in quasi}
    res.check(got_s == {(0, 0), (1, -1), (-1, 1)}, {"semistable": sorted(got_s)})
    res.check(got_q == {(0, 0), (1, -1)}, {"quasistable": sorted(got_q)})
    ref = set(ref_quasistable(doc.curve, E, 0))
    res.check(ref == got_q, {"reference": sorted(ref)})
    return res


@_timed
def twister_uniqueness(docs, seed: int = 0, instances: int = 500) -> CriterionResult:
    res = CriterionResult(4, "one P-quasistable representative per twister class")
    cache = {}

    def reps(c, E, P):
        key = (c, E, P)
        if key not in cache:
            cache[key] = ref_quasistable(c, E, P)
        return cache[key]

    def one(doc_name, c, E, P, d):
        found = [q for q in reps(c, E, P) if ref_same_class(c, q, d)]
        try:
            got = find_quasistable_twister(c, E, SheafClass(c, d), P).twisted.degrees
        except JacobelError as exc:
            got = repr(exc)
        res.check(len(found) == 1 and got == found[0],
                  {"curve": doc_name, "rank": E.rank, "E": list(E.degrees), "P": P,
                   "d": list(d), "oracle": [list(f) for f in found], "engine": got})

    for doc in docs:
        c = doc.curve
        for E in test_polarizations(c, doc.polarization):
            for P in range(c.p):
                qs = reps(c, E, P)
                for a, b in itertools.combinations(qs, 2):
                    res.check(not ref_same_class(c, a, b),
                              {"curve": doc.name, "P": P, "same class": [a, b]})
                for q in qs:
                    one(doc.name, c, E, P, q)
    rng = random.Random(seed)
    for _ in range(instances):
        doc = rng.choice(docs)
        c = doc.curve
        r = rng.randint(1, 3)
        e = [rng.randint(-2, 2) for _ in range(c.p)]
        e[-1] -= sum(e) % r
        E = Polarization(r, tuple(e))
        total = c.genus - 1 - E.slope
        d = [rng.randint(-3, 3) for _ in range(c.p)]
        d[-1] += total - sum(d)
        one(doc.name, c, E, rng.randrange(c.p), tuple(d))
    return res


def _difference_cases(doc, E, res):
    c = doc.curve
    L = line_bundle_for(doc, E)
    for P in range(c.p):
        T = abel_twisters(c, E, L, P)
        for i, j in _pairs(c):
            w = {"curve": doc.name, "rank": E.rank, "E": list(E.degrees), "P": P, "i": i, "j": j}
            try:
                td = twister_difference(c, E, L, P, i, j, twisters=T)
            except JacobelError as exc:
                res.check(False, {**w, "error": str(exc)})
                continue
            z = [0] * c.p if td.subcurve is None else \
                [1 if k in td.subcurve.members else 0 for k in range(c.p)]
            corrected = ref_twist(c, td.intermediate.degrees, [-x for x in z])
            ok = (ref_code(c, E.rank, E.degrees, corrected, P) >= 2
                  and ref_twist(c, [0] * c.p, T[j].coefficients)
                  == ref_twist(c, ref_twist(c, [0] * c.p, T[i].coefficients),
                               [-x for x in z]))
            res.check(ok, {**w, "Z": list(td.names)})


@_timed
def twister_differences(docs) -> CriterionResult:
    """Every document with its own polarization, every marked component, every adjacent pair."""
    res = CriterionResult(5, "twister difference subcurves")
    for doc in docs:
        if doc.line_bundle is not None:
            _difference_cases(doc, doc.polarization, res)
    return res


def twister_differences_extended(docs) -> CriterionResult:
    """Same checks under the extra test polarizations.

    Not a release gate: with fractional beta values the minimal-cardinality
    choice of ``Z`` can fail (the triangle with ``E = (1, 0, -1)/2`` is one
    case), and these failures are reported rather than patched.
    """
    res = CriterionResult(5, "twister difference subcurves, extra polarizations", gating=False)
    for doc in docs:
        if doc.line_bundle is None:
            continue
        for E in test_polarizations(doc.curve, doc.polarization):
            if E != doc.polarization:
                _difference_cases(doc, E, res)
    return res


def _record_checks(res, doc, c, E, L, P, records, twisters, label):
    for rec in records:
        fib = rec.fiber
        w = {"curve": doc.name, "rank": E.rank, "E": list(E.degrees), "P": P, "choice": label,
             "stratum": rec.name}
        chains = [sum(rec.mtilde.degrees[k] for k in comps) for _, comps in fib.chains]
        gch = [sum(rec.g_class.degrees[k] for k in comps) for _, comps in fib.chains]
        res.check(all(x in (-1, 0, 1) for x in chains), {**w, "mtilde chains": chains})
        res.check(all(x in (-1, 0) for x in gch), {**w, "G chains": gch})
        e = E.degrees + (0,) * (fib.curve.p - c.p)
        for k in fib.exceptional:
            b = ref_scaled_beta(fib.curve, E.rank, e, rec.mtilde.degrees, (k,))
            res.check(b in (0, E.rank, 2 * E.rank), {**w, "beta_E": f"{b}/{E.rank}"})
        res.check(ref_code(fib.curve, E.rank, e, rec.g_class.degrees, P) >= 2,
                  {**w, "G": list(rec.g_class.degrees)})
        res.check(rec.pushforward.total == L.total - 1 == sum(rec.g_class.degrees),
                  {**w, "total": rec.pushforward.total})
        if rec.stratum.kind == "component":
            i = rec.stratum.index
            want = ref_twist(c, L.minus_point(i).degrees, twisters[i].coefficients)
            res.check(rec.mtilde.degrees == want, {**w, "smooth row": list(rec.mtilde.degrees)})


def _abel_cases(docs):
    for doc in docs:
        if doc.line_bundle is None:
            continue
        for E in test_polarizations(doc.curve, doc.polarization):
            yield doc, E, line_bundle_for(doc, E)


@_timed
def abel_resolver(docs) -> CriterionResult:
    res = CriterionResult(6, "Abel resolver on every stratum and matching", budget=30.0)
    for doc, E, L in _abel_cases(docs):
        c = doc.curve
        for P in range(c.p):
            T = abel_twisters(c, E, L, P)
            for choice in iter_choices(c, doc.options["choice_cap"]):
                try:
                    recs = resolve_abel_map(c, E, L, P, choice, twisters=T, verify=False)
                except JacobelError as exc:
                    res.check(False, {"curve": doc.name, "E": list(E.degrees), "P": P,
                                      "error": str(exc)})
                    continue
                _record_checks(res, doc, c, E, L, P, recs, T, choice.as_dict(c))
    return res


@_timed
def choice_independence(docs) -> CriterionResult:
    res = CriterionResult(7, "pushforwards do not depend on the matching")
    for doc, E, L in _abel_cases(docs):
        c = doc.curve
        if len(c.reducible_nodes) > 3:
            continue
        for P in range(c.p):
            T = abel_twisters(c, E, L, P)
            seen = {}
            for choice in iter_choices(c, doc.options["choice_cap"]):
                for rec in resolve_abel_map(c, E, L, P, choice, twisters=T, verify=False):
                    if rec.stratum.kind != "node":
                        continue
                    first = seen.setdefault(rec.name, rec.pushforward.key())
                    res.check(rec.pushforward.key() == first,
                              {"curve": doc.name, "E": list(E.degrees), "P": P, "node": rec.name,
                               "choice": choice.as_dict(c)})
    return res


@_timed
def worked_limits(_docs=None) -> CriterionResult:
    from .document import corpus_document

    res = CriterionResult(8, "worked limits on the banana and loop curves")
    for name, node, want in (("banana", "n1", ((1, 0), ("n1",), 0)),
                             ("loop", "R", ((2,), ("R",), 1))):
        doc = corpus_document(name)
        c, E = doc.curve, Polarization.trivial(doc.curve)
        recs = resolve_abel_map(c, E, doc.line_bundle, doc.marked)
        rec = next(r for r in recs if r.name == node)
        got = (rec.pushforward.degrees, rec.pushforward.noninvertible, rec.pushforward.total)
        res.check(got == want, {"curve": name, "node": node, "got": repr(got)})
        e = (0,) * rec.fiber.curve.p
        res.check(ref_code(rec.fiber.curve, 1, e, rec.g_class.degrees, doc.marked) >= 2,
                  {"curve": name, "G": list(rec.g_class.degrees)})
    return res


# ---------------------------------------------------------------------------
# driver


def run_criteria(docs=None, seed: int = 0) -> list[CriterionResult]:
    docs = corpus() if docs is None else docs
    return [
        beta_additivity(docs),
        beta_shift(docs),
        banana_enumeration(),
        twister_uniqueness(docs, seed),
        twister_differences(docs),
        abel_resolver(docs),
        choice_independence(docs),
        worked_limits(),
    ]


def run_diagnostics(docs=None) -> list[CriterionResult]:
    docs = corpus() if docs is None else docs
    return [twister_differences_extended(docs)]


def certificate(results, diagnostics, seed: int, extra_docs=()) -> dict:
    return {
        "tool": "jacobel",
        "version": __version__,
        "command": "selftest",
        "seed": seed,
        "corpus": [d.name for d in corpus()] + [d.name for d in extra_docs],
        "criteria": [r.as_dict() for r in results],
        "diagnostics": [r.as_dict() for r in diagnostics],
        "summary": {"passed": sum(r.passed for r in results),
                    "failed": sum(not r.passed for r in results)},
    }


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=2, default=str) + "\n"


def selftest(seed: int = 0, extra_docs=(), budget: float = 60.0):
    """Run criteria 1-8 twice and add criterion 9 (identical output, time budget).

    Returns ``(results, diagnostics, certificate_text)``.  Diagnostics are
    reported but do not gate the verdict.
    """
    docs = corpus() + list(extra_docs)
    t = time.perf_counter()
    diagnostics = run_diagnostics(docs)
    first = run_criteria(docs, seed)
    text1 = dumps(certificate(first, diagnostics, seed, extra_docs))
    second = run_criteria(docs, seed)
    text2 = dumps(certificate(second, diagnostics, seed, extra_docs))
    det = CriterionResult(9, "deterministic certificates within the time budget", budget=budget)
    det.check(text1 == text2, "certificates differ between runs")
    det.elapsed = time.perf_counter() - t
    det.check(det.elapsed <= budget, f"took {det.elapsed:.1f}s, budget {budget}s")
    results = first + [det]
    return results, diagnostics, dumps(certificate(results, diagnostics, seed, extra_docs))

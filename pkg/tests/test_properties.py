import itertools

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from jacobel.abel import iter_choices, resolve_abel_map
from jacobel.acceptance import ref_code, ref_quasistable, ref_same_class
from jacobel.curve import build_curve, delta, internal_nodes, modify
from jacobel.stability import Polarization, Verdict, beta, classify, sheaf
from jacobel.twister import abel_twisters, find_quasistable_twister, twister_multidegree

from conftest import curves, instances

CODES = [Verdict.NOT_SEMISTABLE, Verdict.SEMISTABLE, Verdict.P_QUASISTABLE, Verdict.STABLE]


def subsets(c, proper=True):
    top = c.p if proper else c.p + 1
    for k in range(1, top):
        for ms in itertools.combinations(range(c.p), k):
            yield c.subcurve(*ms)


@settings(max_examples=80, deadline=None)
@given(instances())
def test_beta_additive(inst):
    c, E, d = inst
    d = sheaf(c, d)
    for Y in subsets(c):
        for Z in subsets(c):
            if Y.members & Z.members or not (Y | Z).is_proper:
                continue
            assert beta(c, E, d, Y | Z) == beta(c, E, d, Y) + beta(c, E, d, Z) - delta(c, Y, Z)


@settings(max_examples=80, deadline=None)
@given(instances(), st.data())
def test_beta_shift(inst, data):
    c, E, d = inst
    assume(c.p >= 2)
    i = data.draw(st.integers(0, c.p - 1))
    j = data.draw(st.integers(0, c.p - 1).filter(lambda k: k != i))
    Mi = sheaf(c, d)
    M = Mi + tuple((1 if k == i else -1 if k == j else 0) for k in range(c.p))
    for Y in subsets(c):
        want = -1 if (j in Y and i not in Y) else 1 if (i in Y and j not in Y) else 0
        assert beta(c, E, M, Y) - beta(c, E, Mi, Y) == want


@settings(max_examples=80, deadline=None)
@given(instances(), st.data())
def test_verdict_matches_reference_and_lattice(inst, data):
    c, E, d = inst
    P = data.draw(st.integers(0, c.p - 1))
    rep = classify(c, E, sheaf(c, d), P)
    assert rep.verdict is CODES[ref_code(c, E.rank, E.degrees, d, P)]
    if rep.verdict.stable:
        assert rep.verdict.quasistable
    if rep.verdict.quasistable:
        assert rep.verdict.semistable
    if rep.witness is not None:
        assert beta(c, E, sheaf(c, d), rep.witness) == rep.witness_beta


@settings(max_examples=80, deadline=None)
@given(instances())
def test_connected_subcurves_suffice(inst):
    c, E, d = inst
    for P in range(c.p):
        full = classify(c, E, sheaf(c, d), P)
        conn = classify(c, E, sheaf(c, d), P, connected_only=True)
        assert full.verdict is conn.verdict


@settings(max_examples=60, deadline=None)
@given(instances(max_p=4), st.permutations(range(4)), st.data())
def test_relabel_invariance(inst, perm, data):
    c, E, d = inst
    perm = [k for k in perm if k < c.p]
    P = data.draw(st.integers(0, c.p - 1))
    inv = {old: new for new, old in enumerate(perm)}
    relabeled = build_curve({
        "components": [(c.names[old], c.genera[old]) for old in perm],
        "nodes": [(n.name, (inv[n.ends[0]], inv[n.ends[1]])) for n in c.nodes],
    })
    E2 = Polarization(E.rank, tuple(E.degrees[old] for old in perm))
    d2 = tuple(d[old] for old in perm)
    assert classify(c, E, sheaf(c, d), P).verdict is \
        classify(relabeled, E2, sheaf(relabeled, d2), inv[P]).verdict


@settings(max_examples=60, deadline=None)
@given(curves(), st.data())
def test_modification_preserves_genus(c, data):
    eta = {k: data.draw(st.integers(1, 3)) for k in range(len(c.nodes)) if data.draw(st.booleans())}
    m = modify(c, eta)
    assert m.curve.genus == c.genus
    assert m.curve.p == c.p + sum(eta.values())
    assert {m.collapse[k][1] for k in range(m.curve.p) if m.collapse[k][0] == "component"} == \
        set(range(c.p))


@settings(max_examples=60, deadline=None)
@given(curves())
def test_delta_identity(c):
    for Y in subsets(c):
        for Z in subsets(c):
            if Y.members & Z.members:
                continue
            assert delta(c, Y, Z) == (internal_nodes(c, Y | Z) - internal_nodes(c, Y)
                                      - internal_nodes(c, Z))


@settings(max_examples=60, deadline=None)
@given(curves(), st.lists(st.integers(-4, 4), min_size=6, max_size=6))
def test_twister_kernel(c, a):
    a = a[:c.p]
    t = twister_multidegree(c, a)
    assert t.total == 0
    assert (set(t.degrees) == {0}) == (len(set(a)) == 1)
    shifted = twister_multidegree(c, [x + 5 for x in a])
    assert shifted == t


@settings(max_examples=60, deadline=None)
@given(instances(max_p=4), st.data())
def test_unique_quasistable_representative(inst, data):
    c, E, d = inst
    P = data.draw(st.integers(0, c.p - 1))
    reps = [q for q in ref_quasistable(c, E, P) if ref_same_class(c, q, d)]
    assert len(reps) == 1
    assert find_quasistable_twister(c, E, sheaf(c, d), P).twisted.degrees == reps[0]


@settings(max_examples=40, deadline=None)
@given(curves(max_p=3, max_extra=2, max_loops=1), st.data())
def test_abel_pipeline_on_random_curves(c, data):
    from conftest import polarizations

    E = data.draw(polarizations(c))
    P = data.draw(st.integers(0, c.p - 1))
    L = np.zeros(c.p, dtype=int)
    L[P] = c.genus - E.slope
    L = sheaf(c, tuple(int(x) for x in L))
    T = abel_twisters(c, E, L, P)
    seen = {}
    for choice in iter_choices(c):
        # verify=True raises on any failed admissibility or stability check
        for rec in resolve_abel_map(c, E, L, P, choice, twisters=T):
            assert rec.pushforward.total == L.total - 1
            assert seen.setdefault(rec.name, rec.pushforward.key()) == rec.pushforward.key()

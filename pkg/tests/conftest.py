import pytest
from hypothesis import strategies as st

from jacobel.curve import build_curve
from jacobel.document import corpus_document
from jacobel.stability import Polarization


@pytest.fixture
def banana():
    return corpus_document("banana").curve


@pytest.fixture
def triangle():
    return build_curve({"components": [("v1", 0), ("v2", 0), ("v3", 0)],
                        "nodes": [("a", ("v1", "v2")), ("b", ("v2", "v3")), ("c", ("v3", "v1"))]})


@pytest.fixture
def loop_curve():
    return corpus_document("loop").curve


@pytest.fixture
def trivial():
    return Polarization.trivial


@st.composite
def curves(draw, max_p=5, max_extra=3, max_loops=2):
    """Connected curves: a random spanning tree plus extra edges and loops."""
    p = draw(st.integers(1, max_p))
    genera = draw(st.lists(st.integers(0, 2), min_size=p, max_size=p))
    edges = [(draw(st.integers(0, k - 1)), k) for k in range(1, p)]
    if p > 1:
        pair = st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)).filter(lambda t: t[0] != t[1])
        edges += draw(st.lists(pair, max_size=max_extra))
    edges += [(k, k) for k in draw(st.lists(st.integers(0, p - 1), max_size=max_loops))]
    marked = draw(st.integers(0, p - 1))
    return build_curve({
        "components": [(f"v{k + 1}", g) for k, g in enumerate(genera)],
        "nodes": [(f"n{k + 1}", e) for k, e in enumerate(edges)],
        "marked": marked,
    })


@st.composite
def polarizations(draw, curve, max_rank=3):
    r = draw(st.integers(1, max_rank))
    e = draw(st.lists(st.integers(-3, 3), min_size=curve.p, max_size=curve.p))
    e[-1] -= sum(e) % r
    return Polarization(r, tuple(e))


@st.composite
def instances(draw, max_p=5):
    """(curve, E, d) with d of the degree forced by E."""
    c = draw(curves(max_p=max_p))
    E = draw(polarizations(c))
    total = c.genus - 1 - E.slope
    d = draw(st.lists(st.integers(-3, 3), min_size=c.p, max_size=c.p))
    d[-1] += total - sum(d)
    return c, E, tuple(d)

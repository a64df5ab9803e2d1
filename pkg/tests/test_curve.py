import pytest

from jacobel.curve import build_curve, c_one, c_r, decompose_against, delta, internal_nodes, modify
from jacobel.errors import (
    DanglingNodeEnd,
    DisconnectedCurve,
    DuplicateName,
    OverlappingSubcurves,
    UnknownNode,
)


def test_banana_genus(banana):
    assert banana.p == 2
    assert banana.genus == 1
    assert banana.reducible_nodes == (0, 1)


def test_smooth_genus_two():
    assert build_curve({"components": [("v", 2)]}).genus == 2


def test_disconnected_rejected():
    with pytest.raises(DisconnectedCurve):
        build_curve({"components": [("a", 0), ("b", 0)]})


def test_bad_descriptions():
    with pytest.raises(DuplicateName):
        build_curve({"components": [("a", 0), ("a", 1)]})
    with pytest.raises(DanglingNodeEnd):
        build_curve({"components": [("a", 0)], "nodes": [("x", ("a", "b"))]})
    with pytest.raises(DuplicateName):
        build_curve({"components": [("a", 0)], "nodes": [("x", ("a", "a")), ("x", ("a", "a"))]})


def test_dict_form_matches_tuple_form(banana):
    again = build_curve({
        "components": [{"name": "v1", "genus": 0}, {"name": "v2"}],
        "nodes": [{"name": "n1", "ends": ["v1", "v2"]}, {"name": "n2", "ends": [0, 1]}],
        "marked": "v1",
    })
    assert again == banana
    assert hash(again) == hash(banana)


def test_delta(banana, triangle):
    assert delta(banana, banana.subcurve("v1"), banana.subcurve("v2")) == 2
    with pytest.raises(OverlappingSubcurves):
        delta(banana, banana.subcurve("v1"), banana.subcurve("v1"))
    assert delta(triangle, triangle.subcurve("v1"), triangle.subcurve("v2", "v3")) == 2


def test_internal_nodes(banana, loop_curve):
    assert internal_nodes(banana, banana.whole()) == 2
    assert internal_nodes(banana, banana.subcurve("v1")) == 0
    assert internal_nodes(loop_curve, loop_curve.whole()) == 1


def test_decompose(triangle):
    Y = triangle.subcurve("v1", "v2")
    Z = triangle.subcurve("v2")
    a, b, c = decompose_against(Y, Z)
    assert a.names == ("v1",) and b is None and c.names == ("v2",)
    assert decompose_against(Y, Y) == (None, None, Y)
    W = triangle.subcurve("v3")
    assert decompose_against(Y, W) == (Y, W, None)


def test_subcurve_algebra(triangle):
    Y = triangle.subcurve("v1", "v3")
    assert str(Y) == "{v1,v3}"
    assert Y.complement().names == ("v2",)
    assert triangle.whole().complement() is None
    assert (Y | Y.complement()) == triangle.whole()
    assert not triangle.whole().is_proper


def test_c_one_banana(banana):
    m = c_one(banana)
    assert m.curve.p == 4
    assert len(m.curve.nodes) == 4
    assert m.curve.genus == 1
    assert m.curve.names == ("v1", "v2", "E[n1,1]", "E[n2,1]")
    assert m.exceptional == (2, 3)
    assert m.collapse[2] == ("node", 0)


def test_c_r_loop(loop_curve):
    m = c_r(loop_curve, "R")
    assert m.curve.p == 2
    assert [n.ends for n in m.curve.nodes] == [(0, 1), (1, 0)]
    assert m.curve.genus == 2


def test_long_chain(banana):
    m = modify(banana, {"n1": 3})
    assert m.curve.p == 5
    assert m.curve.genus == 1
    assert m.chain_of[0] == (2, 3, 4)
    assert all(m.curve.components[k].genus == 0 for k in m.exceptional)


def test_unknown_node(banana):
    with pytest.raises(UnknownNode):
        modify(banana, {"n9": 1})

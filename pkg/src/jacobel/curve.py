"""Nodal curves as genus-labelled dual graphs.

Components and nodes are indexed in declaration order.  A node whose two ends
coincide is an irreducible node (a loop of the dual graph); every other node is
reducible.  Points of the curve are only ever identified by the component that
carries them or by a node name.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DanglingNodeEnd,
    DisconnectedCurve,
    DuplicateName,
    InputError,
    OverlappingSubcurves,
    UnknownComponent,
    UnknownNode,
)


@dataclass(frozen=True)
class Component:
    name: str
    genus: int = 0


@dataclass(frozen=True)
class Node:
    name: str
    ends: tuple[int, int]

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]


@dataclass(frozen=True, eq=False)
class NodalCurve:
    """A connected nodal curve, validated on construction.

    ``marked`` is the index of the component carrying the marked smooth
    point ``P``.  Instances are immutable and compare by structure.
    """

    components: tuple[Component, ...]
    nodes: tuple[Node, ...] = ()
    marked: int = 0

    def __post_init__(self):
        if not self.components:
            raise InputError("a curve needs at least one component")
        seen = set()
        for c in self.components:
            if c.name in seen:
                raise DuplicateName(f"duplicate component name {c.name!r}")
            if c.genus < 0:
                raise InputError(f"component {c.name!r} has negative genus")
            seen.add(c.name)
        seen = set()
        p = len(self.components)
        for n in self.nodes:
            if n.name in seen:
                raise DuplicateName(f"duplicate node name {n.name!r}")
            seen.add(n.name)
            if not all(0 <= e < p for e in n.ends):
                raise DanglingNodeEnd(f"node {n.name!r} has an end outside the curve")
        if not 0 <= self.marked < p:
            raise UnknownComponent(f"marked component index {self.marked} out of range")
        if not self._connected():
            raise DisconnectedCurve("the dual graph is not connected")

    def _connected(self) -> bool:
        p = len(self.components)
        nbrs = [set() for _ in range(p)]
        for n in self.nodes:
            a, b = n.ends
            nbrs[a].add(b)
            nbrs[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            for w in nbrs[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == p

    def _key(self):
        return (self.components, self.nodes, self.marked)

    def __eq__(self, other):
        if not isinstance(other, NodalCurve):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    # -- basic data --------------------------------------------------------

    @property
    def p(self) -> int:
        return len(self.components)

    @cached_property
    def genus(self) -> int:
        """Arithmetic genus ``sum g_i + #nodes - #components + 1``."""
        return sum(c.genus for c in self.components) + len(self.nodes) - self.p + 1

    @cached_property
    def genera(self) -> tuple[int, ...]:
        return tuple(c.genus for c in self.components)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.components)

    @cached_property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    @cached_property
    def _component_lookup(self):
        return {c.name: k for k, c in enumerate(self.components)}

    @cached_property
    def _node_lookup(self):
        return {n.name: k for k, n in enumerate(self.nodes)}

    def component_index(self, ref) -> int:
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            if 0 <= ref < self.p:
                return int(ref)
            raise UnknownComponent(f"component index {ref} out of range")
        try:
            return self._component_lookup[ref]
        except KeyError:
            raise UnknownComponent(f"unknown component {ref!r}") from None

    def node_index(self, ref) -> int:
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            if 0 <= ref < len(self.nodes):
                return int(ref)
            raise UnknownNode(f"node index {ref} out of range")
        try:
            return self._node_lookup[ref]
        except KeyError:
            raise UnknownNode(f"unknown node {ref!r}") from None

    @cached_property
    def reducible_nodes(self) -> tuple[int, ...]:
        return tuple(k for k, n in enumerate(self.nodes) if not n.is_loop)

    @cached_property
    def irreducible_nodes(self) -> tuple[int, ...]:
        return tuple(k for k, n in enumerate(self.nodes) if n.is_loop)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Symmetric node-count matrix; loops are counted once on the diagonal."""
        a = np.zeros((self.p, self.p), dtype=np.int64)
        for n in self.nodes:
            i, j = n.ends
            if i == j:
                a[i, i] += 1
            else:
                a[i, j] += 1
                a[j, i] += 1
        a.setflags(write=False)
        return a

    def delta_components(self, i: int, j: int) -> int:
        """Number of nodes joining the distinct components ``i`` and ``j``."""
        if i == j:
            raise OverlappingSubcurves("delta needs two distinct components")
        return int(self.adjacency[i, j])

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.p) - 1

    def subcurve(self, *members) -> Subcurve:
        """Subcurve from component names or indices (an iterable is accepted too)."""
        if len(members) == 1 and isinstance(members[0], (list, tuple, set, frozenset)):
            members = tuple(members[0])
        return Subcurve(self, frozenset(self.component_index(m) for m in members))

    def whole(self) -> Subcurve:
        return Subcurve(self, frozenset(range(self.p)))

    def subcurve_from_mask(self, mask: int) -> Subcurve:
        return Subcurve(self, frozenset(k for k in range(self.p) if mask >> k & 1))

    def __repr__(self):
        return (f"NodalCurve(p={self.p}, nodes={len(self.nodes)}, g={self.genus}, "
                f"components={list(self.names)})")


@dataclass(frozen=True)
class Subcurve:
    """A nonempty set of components; disconnected unions are allowed."""

    curve: NodalCurve = field(repr=False)
    members: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise InputError("a subcurve must contain at least one component")
        if not all(0 <= k < self.curve.p for k in self.members):
            raise UnknownComponent("subcurve member outside the curve")

    @property
    def mask(self) -> int:
        m = 0
        for k in self.members:
            m |= 1 << k
        return m

    @property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.curve.components[k].name for k in self.sorted_members)

    @property
    def is_proper(self) -> bool:
        return len(self.members) < self.curve.p

    def __contains__(self, component) -> bool:
        return self.curve.component_index(component) in self.members

    def __len__(self):
        return len(self.members)

    def complement(self) -> Subcurve | None:
        rest = frozenset(range(self.curve.p)) - self.members
        return Subcurve(self.curve, rest) if rest else None

    def __or__(self, other: Subcurve) -> Subcurve:
        return Subcurve(self.curve, self.members | other.members)

    def sort_key(self):
        return (len(self.members), self.sorted_members)

    def __str__(self):
        return "{" + ",".join(self.names) + "}"


def build_curve(description: Mapping) -> NodalCurve:
    """Build a curve from a plain description.

    ``components`` lists ``(name, genus)`` pairs or ``{"name", "genus"}``
    dicts; ``nodes`` lists ``(name, (end, end))`` pairs or ``{"name", "ends"}``
    dicts with ends given by component name; ``marked`` names the component
    carrying ``P`` (defaults to the first).
    """
    comps = []
    for c in description.get("components", ()):
        if isinstance(c, Mapping):
            comps.append(Component(str(c["name"]), int(c.get("genus", 0))))
        else:
            name, genus = c
            comps.append(Component(str(name), int(genus)))
    if not comps:
        raise InputError("a curve needs at least one component")
    lookup = {}
    for k, c in enumerate(comps):
        if c.name in lookup:
            raise DuplicateName(f"duplicate component name {c.name!r}")
        lookup[c.name] = k

    def resolve(end, node_name):
        if isinstance(end, int) and not isinstance(end, bool):
            if 0 <= end < len(comps):
                return end
        elif end in lookup:
            return lookup[end]
        raise DanglingNodeEnd(f"node {node_name!r} refers to unknown component {end!r}")

    nodes = []
    for n in description.get("nodes", ()):
        if isinstance(n, Mapping):
            name, ends = n["name"], n["ends"]
        else:
            name, ends = n
        ends = tuple(ends)
        if len(ends) != 2:
            raise InputError(f"node {name!r} must have exactly two ends")
        nodes.append(Node(str(name), (resolve(ends[0], name), resolve(ends[1], name))))
    marked = description.get("marked", 0)
    if isinstance(marked, str):
        if marked not in lookup:
            raise UnknownComponent(f"marked point on unknown component {marked!r}")
        marked = lookup[marked]
    return NodalCurve(tuple(comps), tuple(nodes), int(marked))


# ---------------------------------------------------------------------------
# subcurve arithmetic


def delta(curve: NodalCurve, Y: Subcurve, Z: Subcurve) -> int:
    """Number of nodes with one end in ``Y`` and the other in ``Z``.

    ``Y`` and ``Z`` must share no component.
    """
    if Y.members & Z.members:
        raise OverlappingSubcurves(f"{Y} and {Z} share components")
    return sum(
        1
        for n in curve.nodes
        if (n.ends[0] in Y.members and n.ends[1] in Z.members)
        or (n.ends[0] in Z.members and n.ends[1] in Y.members)
    )


def internal_nodes(curve: NodalCurve, Y: Subcurve) -> int:
    """Nodes with both ends (loops included) in ``Y``."""
    return sum(1 for n in curve.nodes if n.ends[0] in Y.members and n.ends[1] in Y.members)


def decompose_against(Y: Subcurve, Z: Subcurve):
    """Return ``(closure(Y - Z), closure(Z - Y), Y ^ Z)`` with ``None`` for empty parts."""

    def make(ms):
        return Subcurve(Y.curve, frozenset(ms)) if ms else None

    return (make(Y.members - Z.members), make(Z.members - Y.members),
            make(Y.members & Z.members))


# ---------------------------------------------------------------------------
# semistable modifications


@dataclass(frozen=True)
class ModifiedCurve:
    """``base`` with each node in ``eta`` replaced by a chain of rational curves.

    The derived curve lists the base components first (same order and names),
    followed by chain components ``E[node,pos]`` in node declaration order.
    ``collapse[k]`` is ``("component", i)`` or ``("node", n)``: where the
    contraction map sends derived component ``k``.
    """

    base: NodalCurve
    eta: tuple[tuple[int, int], ...]
    curve: NodalCurve
    chains: tuple[tuple[int, tuple[int, ...]], ...]
    collapse: tuple[tuple[str, int], ...]

    @cached_property
    def chain_of(self) -> dict[int, tuple[int, ...]]:
        return dict(self.chains)

    @cached_property
    def exceptional(self) -> tuple[int, ...]:
        return tuple(k for k, (kind, _) in enumerate(self.collapse) if kind == "node")

    def attachments(self, node: int) -> tuple[int, int]:
        """Base components the chain over ``node`` is glued to (first end, second end)."""
        return self.base.nodes[node].ends


def modify(curve: NodalCurve, eta: Mapping) -> ModifiedCurve:
    """Replace every node in ``eta`` (name or index -> length >= 1) by a chain."""
    lengths = {}
    for ref, length in eta.items():
        k = curve.node_index(ref)
        length = int(length)
        if length < 1:
            raise InputError(f"chain length for node {curve.nodes[k].name!r} must be >= 1")
        lengths[k] = length
    comps = list(curve.components)
    collapse = [("component", i) for i in range(curve.p)]
    nodes = []
    chains = []
    for k, n in enumerate(curve.nodes):
        if k not in lengths:
            nodes.append(n)
    for k, n in enumerate(curve.nodes):
        if k not in lengths:
            continue
        idx = []
        for pos in range(1, lengths[k] + 1):
            idx.append(len(comps))
            comps.append(Component(f"E[{n.name},{pos}]", 0))
            collapse.append(("node", k))
        a, b = n.ends
        path = [a, *idx, b]
        for t in range(len(path) - 1):
            nodes.append(Node(f"{n.name}#{t}", (path[t], path[t + 1])))
        chains.append((k, tuple(idx)))
    derived = NodalCurve(tuple(comps), tuple(nodes), curve.marked)
    return ModifiedCurve(curve, tuple(sorted(lengths.items())), derived, tuple(chains),
                         tuple(collapse))


def c_r(curve: NodalCurve, node) -> ModifiedCurve:
    """Quasistable modification at the single node ``node``."""
    return modify(curve, {curve.node_index(node): 1})


def c_one(curve: NodalCurve) -> ModifiedCurve:
    """Quasistable modification at every reducible node."""
    return modify(curve, {k: 1 for k in curve.reducible_nodes})


def unmodified(curve: NodalCurve) -> ModifiedCurve:
    return modify(curve, {})


"""Subset-enumeration kernels.

A subcurve of a curve with ``p`` components is encoded as a bitmask in
``range(1, 2**p)``; bit ``k`` set means component ``k`` belongs to it.  All
quantities stay integral: beta values are scaled by the polarization rank.

Each kernel has a numba implementation and a pure-numpy one.  The numba path
is used when numba imports and ``JACOBEL_DISABLE_NUMBA`` is unset (or ``0``);
every public entry point also takes ``backend="numba" | "numpy"`` to force
one side, which is how the tests compare them.
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAS_NUMBA = numba is not None

_FALSY = {"", "0", "false", "no", "off"}


def numba_disabled_by_env() -> bool:
    return os.environ.get("JACOBEL_DISABLE_NUMBA", "").strip().lower() not in _FALSY


USE_NUMBA = HAS_NUMBA and not numba_disabled_by_env()

MAX_COMPONENTS = 24


def _resolve(backend):
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def _njit(fn):
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# mask bookkeeping (shared by both backends)


@lru_cache(maxsize=None)
def subset_bits(p: int) -> np.ndarray:
    """``(2**p, p)`` int64 membership matrix; row ``m`` is the bit vector of ``m``."""
    if p > MAX_COMPONENTS:
        raise ValueError(f"{p} components exceed the subset-enumeration limit")
    masks = np.arange(1 << p, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(p, dtype=np.int64)) & 1
    bits.setflags(write=False)
    return bits


@lru_cache(maxsize=None)
def canonical_order(p: int) -> np.ndarray:
    """Proper nonempty masks ordered by cardinality, then lexicographically by members."""
    keys = []
    for mask in range(1, (1 << p) - 1):
        members = tuple(k for k in range(p) if mask >> k & 1)
        keys.append((len(members), members, mask))
    keys.sort()
    order = np.array([k[2] for k in keys], dtype=np.int64)
    order.setflags(write=False)
    return order


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def members_of(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# scaled beta table


def _beta_table_py(weights, adjacency, rank):
    n, p = weights.shape
    size = 1 << p
    internal = np.zeros(size, np.int64)
    low = np.zeros(size, np.int64)
    for mask in range(1, size):
        v = 0
        while not (mask >> v) & 1:
            v += 1
        rest = mask & (mask - 1)
        cnt = internal[rest] + adjacency[v, v]
        for u in range(p):
            if (rest >> u) & 1:
                cnt += adjacency[v, u]
        internal[mask] = cnt
        low[mask] = v
    out = np.zeros((n, size), np.int64)
    for b in range(n):
        for mask in range(1, size):
            out[b, mask] = out[b, mask & (mask - 1)] + weights[b, low[mask]]
        for mask in range(1, size):
            out[b, mask] -= rank * internal[mask]
    return out


_beta_table_numba = _njit(_beta_table_py)


def _beta_table_numpy(weights, adjacency, rank):
    p = weights.shape[1]
    bits = subset_bits(p)
    # x^T A x counts every internal edge twice and every loop once
    quad = np.einsum("mi,ij,mj->m", bits, adjacency, bits)
    internal = (quad + bits @ np.diag(adjacency)) // 2
    return weights @ bits.T - rank * internal[None, :]


def beta_table(weights, adjacency, rank: int, *, backend=None) -> np.ndarray:
    """Rank-scaled beta value of every subset, for a batch of multidegrees.

    ``weights[b, k]`` is ``rank * (d_k + 1 - g_k) + e_k``; ``adjacency`` is the symmetric
    node-count matrix with loop counts on the diagonal.  Entry ``[b, mask]`` is
    ``rank * beta`` of subset ``mask`` for multidegree ``b``; column 0 is 0.
    """
    weights = np.ascontiguousarray(np.atleast_2d(weights), dtype=np.int64)
    adjacency = np.ascontiguousarray(adjacency, dtype=np.int64)
    if weights.shape[1] > MAX_COMPONENTS:
        raise ValueError(f"{weights.shape[1]} components exceed the subset-enumeration limit")
    if _resolve(backend) == "numba":
        return _beta_table_numba(weights, adjacency, np.int64(rank))
    return _beta_table_numpy(weights, adjacency, rank)


# ---------------------------------------------------------------------------
# connectivity of induced subgraphs


def _connected_py(nbr):
    p = nbr.shape[0]
    size = 1 << p
    out = np.zeros(size, np.bool_)
    for mask in range(1, size):
        reach = mask & -mask
        frontier = reach
        while frontier:
            grow = 0
            for u in range(p):
                if (frontier >> u) & 1:
                    grow |= nbr[u]
            grow &= mask & ~reach
            reach |= grow
            frontier = grow
        out[mask] = reach == mask
    return out


_connected_numba = _njit(_connected_py)


def _connected_numpy(nbr):
    p = nbr.shape[0]
    masks = np.arange(1 << p, dtype=np.int64)
    reach = masks & -masks
    for _ in range(p):
        grow = np.zeros_like(reach)
        for u in range(p):
            grow |= np.where((reach >> u) & 1, nbr[u], 0)
        reach = reach | (grow & masks)
    out = reach == masks
    out[0] = False
    return out


def connected_masks(adjacency, *, backend=None) -> np.ndarray:
    """Boolean array over all masks: is the induced dual subgraph connected?"""
    adjacency = np.asarray(adjacency, dtype=np.int64)
    p = adjacency.shape[0]
    if p > MAX_COMPONENTS:
        raise ValueError(f"{p} components exceed the subset-enumeration limit")
    nbr = np.zeros(p, np.int64)
    for u in range(p):
        for v in range(p):
            if u != v and adjacency[u, v]:
                nbr[u] |= 1 << v
    if _resolve(backend) == "numba":
        return _connected_numba(nbr)
    return _connected_numpy(nbr)

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobel import kernels
from jacobel.stability import _weights

from conftest import instances

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")


def test_canonical_order():
    order = [kernels.members_of(int(m)) for m in kernels.canonical_order(3)]
    assert order == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
    assert kernels.popcount(0b1011) == 3


def test_subset_bits():
    bits = kernels.subset_bits(3)
    assert bits.shape == (8, 3)
    assert bits[5].tolist() == [1, 0, 1]


def test_component_limit():
    with pytest.raises(ValueError):
        kernels.subset_bits(kernels.MAX_COMPONENTS + 1)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.beta_table(np.zeros((1, 2)), np.zeros((2, 2)), 1, backend="cuda")


@needs_numba
@settings(max_examples=60, deadline=None)
@given(instances(max_p=6), st.integers(1, 4))
def test_backends_agree(inst, batch):
    c, E, d = inst
    degrees = np.array([np.add(d, k) for k in range(batch)])
    w = _weights(c, E, degrees)
    a = kernels.beta_table(w, c.adjacency, E.rank, backend="numba")
    b = kernels.beta_table(w, c.adjacency, E.rank, backend="numpy")
    assert np.array_equal(a, b)
    assert np.array_equal(kernels.connected_masks(c.adjacency, backend="numba"),
                          kernels.connected_masks(c.adjacency, backend="numpy"))


def test_connected_masks_triangle_with_tail():
    # path 0-1-2 plus 3 attached to 0
    adj = np.zeros((4, 4), dtype=np.int64)
    for a, b in ((0, 1), (1, 2), (0, 3)):
        adj[a, b] = adj[b, a] = 1
    conn = kernels.connected_masks(adj, backend="numpy")
    assert not conn[0]
    assert conn[0b0011] and conn[0b1001] and not conn[0b0101] and not conn[0b1100]


def test_env_flag_selects_numpy():
    code = "from jacobel import kernels; print(kernels.USE_NUMBA, kernels._resolve(None))"
    env = dict(os.environ, JACOBEL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["False", "numpy"]

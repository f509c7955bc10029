import numpy as np
import pytest
from hypothesis import given, strategies as st

from ergolab import _kernels
from ergolab._kernels import BACKENDS

bits = st.lists(st.integers(0, 1), min_size=1, max_size=200)


def naive_codes(x, k):
    return [int("".join(map(str, x[i:i + k])), 2) for i in range(len(x) - k + 1)]


def test_backend_selected():
    assert _kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@given(bits, st.integers(1, 6))
def test_block_codes_match_naive(x, k):
    if k > len(x):
        return
    arr = np.array(x, dtype=np.uint8)
    for m in BACKENDS.values():
        assert list(m.block_codes(arr, k)) == naive_codes(x, k)
        counts = m.block_counts(arr, k)
        assert counts.sum() == len(x) - k + 1
        assert list(np.flatnonzero(counts)) == sorted(set(naive_codes(x, k)))


def test_samplers_agree_across_backends():
    rng = np.random.default_rng(3)
    u = rng.random(5000)
    p1 = rng.random(8)
    P = rng.random((4, 4))
    cum = np.cumsum(P / P.sum(axis=1, keepdims=True), axis=1)
    cum[:, -1] = 1.0
    outs = {n: (m.sample_context_chain(p1, 3, 5, u),
                m.sample_finite_chain(cum, 2, u),
                m.sample_walk_chain(0, u)) for n, m in BACKENDS.items()}
    ref = outs["python"]
    for n, got in outs.items():
        for a, b in zip(ref, got):
            np.testing.assert_array_equal(np.asarray(a), np.asarray(b), err_msg=n)


def test_walk_kernel_moves(backend):
    u = np.array([0.9, 0.9, 0.2, 0.7, 0.1])
    s = list(np.asarray(backend.sample_walk_chain(0, u)))
    # 0 -> 1 -> 2 deterministically, then the coin decides reset or climb
    assert s[:3] == [0, 1, 2]
    assert all(b in (0, a + 1) for a, b in zip(s[2:], s[3:]))


@pytest.mark.parametrize("k", [0, 1, 4])
def test_context_chain_deterministic_rows(backend, k):
    p1 = np.ones(1 << k)
    out = np.asarray(backend.sample_context_chain(p1, k, 0, np.random.default_rng(0).random(50)))
    assert out.tolist() == [1] * 50

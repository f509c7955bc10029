import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import naive_occurrences
from ergolab import (
    BudgetError,
    ConstructionError,
    DecodeError,
    build_splice,
    decode_z,
    find_sync_word,
    find_typical_word,
    iid_bernoulli,
    period2_chain,
    splice,
    tv_block_distance,
)
from ergolab.splice import (
    block_discrepancy,
    borders,
    find_occurrences,
    rotor_word,
    sync_length,
    sync_violations,
)


def naive_borders(u):
    return [b for b in range(len(u) - 1, 0, -1) if u[:b] == u[-b:]]


@given(st.text("01", min_size=1, max_size=30))
def test_borders_match_naive(u):
    assert borders(u) == naive_borders(u)


def brute_overlap_scan(u, w):
    """Every way u could appear inside ...w u w u... other than at its own slot."""
    m = len(u)
    lim = 2 * m / 5
    bad = []
    if naive_occurrences(w, u):
        bad.append("in w")
    if any(b > lim for b in naive_borders(u)):
        bad.append("self")
    if any(u[m - t:] == w[:t] for t in range(int(lim) + 1, min(m, len(w) + 1))):
        bad.append("uw")
    if any(w[len(w) - t:] == u[:t] for t in range(int(lim) + 1, min(m, len(w) + 1))):
        bad.append("wu")
    return bad


@pytest.fixture(scope="module")
def spliced_iid():
    return build_splice(iid_bernoulli(0.5), 1, 0.3, seed=2)


def test_spliced_meets_block_bound(spliced_iid):
    y = spliced_iid
    assert y.verification["passed"] and y.verification["tv"] < 0.3
    assert tv_block_distance(y.dims(1), iid_bernoulli(0.5).dims(1)) < 0.3
    assert y.overhead < 0.3 / 4


def test_sync_word_brute_force(spliced_iid):
    y = spliced_iid
    assert brute_overlap_scan(y.u.u, y.w.w) == []
    assert y.u.m == sync_length(y.r)


def test_sync_word_is_lexicographically_first():
    w = "0" * 20 + "1" * 20
    u = find_sync_word(w)
    m = len(u.u)
    for c in range(int(u.u, 2)):
        assert sync_violations(format(c, "b").zfill(m), w)


def test_planted_positions_only(spliced_iid):
    y = spliced_iid
    for seed in range(5):
        path, zs, zeta, planted = y.sample_with_truth(20_000, seed)
        s = "".join(map(str, path))
        expected = [p for p in planted.tolist() if p + y.u.m <= len(s)]
        assert naive_occurrences(s, y.u.u) == expected
        assert find_occurrences(path, y.u.u).tolist() == expected
        assert np.array_equal(decode_z(path, y.u, y.w), zs)


def test_decode_errors(spliced_iid):
    y = spliced_iid
    with pytest.raises(DecodeError):
        decode_z(np.zeros(5, dtype=np.uint8), y.u, y.w)
    path = y.sample(3 * y.period, 1).copy()
    k = int(find_occurrences(path, y.u.u)[0]) + y.u.m + 3
    path[k] ^= 1                                  # corrupt a w symbol
    with pytest.raises(DecodeError):
        decode_z(path, y.u, y.w)


def test_exact_dims_vs_sampling(spliced_iid):
    y = spliced_iid
    d = y.dims(2)
    x = y.sample(400_000, 9)
    codes = x[:-1].astype(int) * 2 + x[1:]
    emp = np.bincount(codes, minlength=4) / codes.size
    assert np.abs(emp - d.probs).sum() < 0.02


def test_rotor_word_low_discrepancy():
    d = period2_chain().dims(3)
    w = rotor_word(d, 1000)
    assert block_discrepancy(w, d) < 0.01
    d = iid_bernoulli(0.3).dims(4)
    assert block_discrepancy(rotor_word(d, 1 << 14), d) < 1e-3


def test_typical_word_budget():
    with pytest.raises(BudgetError) as e:
        find_typical_word(iid_bernoulli(0.5), 6, 0.01, r_max=256)
    assert e.value.best["target"] == pytest.approx(0.01 / 2**7)


def test_splice_requires_zero_entropy_embedding():
    w = find_typical_word(iid_bernoulli(0.5), 1, 0.3)
    u = find_sync_word(w.w)
    with pytest.raises(ConstructionError):
        splice(iid_bernoulli(0.5), w, u)

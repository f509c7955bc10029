import numpy as np
import pytest

from ergolab import (
    ErgolabError,
    RenewalSpec,
    WalkChainLabeling,
    example2_indicator,
    iid_bernoulli,
    markov_from_table,
    period2_chain,
    renewal_process,
    walk_chain_process,
)
from ergolab.generators import walk_stationary


def test_iid_dims():
    d = iid_bernoulli(0.3).dims(2)
    assert d["10"] == pytest.approx(0.21)
    with pytest.raises(ValueError):
        iid_bernoulli(1.5)


def test_period2():
    h = period2_chain()
    assert h.dims(2).as_dict(drop_zero=True) == pytest.approx({"01": 0.5, "10": 0.5})
    x = h.sample(10, 0)
    assert np.all(x[1:] != x[:-1])


def test_markov_from_table():
    h = markov_from_table(1, {"0": 0.5, "1": 0.0})
    assert h.dims(2)["11"] == 0.0
    assert h.dims(1)["1"] == pytest.approx(1 / 3)


class TestExample2:
    def test_stationary(self):
        h = example2_indicator()
        np.testing.assert_allclose(h.pi, [0.2, 0.4, 0.4], atol=1e-12)

    def test_marker_structure(self):
        h = example2_indicator()
        # a 1 is always followed by two 0s
        assert h.dims(3)["110"] == 0 and h.dims(3)["101"] == 0
        x = h.sample(50_000, 2)
        assert x.mean() == pytest.approx(0.2, abs=0.01)

    def test_sampled_states_follow_chain(self):
        s = np.asarray(example2_indicator().sample_states(1000, 0))
        allowed = {(0, 1), (1, 2), (2, 0), (2, 1)}
        assert set(zip(s[:-1].tolist(), s[1:].tolist())) <= allowed


class TestWalkChain:
    def test_stationary_masses_pushforward(self):
        h = walk_chain_process()
        pi, P = h.truncated_chain(80)
        assert pi[0] == pi[1] == 0.25
        assert np.abs(pi @ P - pi)[:-1].max() < 1e-10

    def test_default_labeling(self):
        f = WalkChainLabeling(predicate="pow2plus1")
        assert [f(s) for s in range(10)] == [0, 0, 1, 0, 1, 0, 1, 1, 1, 0]
        with pytest.raises(ValueError):
            WalkChainLabeling(table={4: 1})

    def test_dims_error_bound_tracks_truncation(self):
        h = walk_chain_process()
        d = h.dims(4)
        assert 0 < d.error_bound < 1e-12
        assert d.probs.sum() == pytest.approx(1)

    def test_label_frequency(self):
        x = walk_chain_process().sample(1_000_000, 11)
        assert abs(x.mean() - 1 / 3) < 0.01

    def test_states_labels_agree(self):
        h = walk_chain_process(WalkChainLabeling(predicate="pow2plus1"))
        labels, states = h.sample_states(2000, 3)
        assert np.array_equal(labels, h.labeling.array(int(states.max()) + 1)[states])


class TestRenewal:
    def test_constant_is_periodic(self):
        h = renewal_process(RenewalSpec.constant(3))
        assert h.dims(1)["1"] == pytest.approx(1 / 3)
        assert h.dims(3)["100"] == pytest.approx(1 / 3)

    def test_geometric_is_iid(self):
        h = renewal_process(RenewalSpec.geometric(0.3))
        np.testing.assert_allclose(h.dims(3).probs, iid_bernoulli(0.3).dims(3).probs, atol=1e-12)

    def test_mean_and_rate(self):
        spec = RenewalSpec((0.2, 0.3), tail_p=0.5)
        assert spec.mean == pytest.approx(0.2 + 0.6 + 0.5 * 4)
        assert renewal_process(spec).dims(1)["1"] == pytest.approx(1 / spec.mean)

    def test_defective_law_rejected(self):
        with pytest.raises(ErgolabError):
            RenewalSpec((0.2, 0.3))
        with pytest.raises(ValueError):
            RenewalSpec((0.7, 0.6))


def test_walk_stationary_tail_sums_to_one():
    assert sum(walk_stationary(j) for j in range(200)) == pytest.approx(1.0)

import json

import pytest

from ergolab import Schedules, Verdict, freq_markov_tester, replay, run_diagonalization
from ergolab.adversary import SCHEMA, estimate_verdict_prob, hoeffding
from ergolab.classifiers import always


@pytest.fixture(scope="module")
def run():
    return run_diagonalization(freq_markov_tester(4), Schedules(), seed=1)


def test_completes_with_alternating_targets(run):
    report, limit = run
    assert report.completed
    assert [r.target for r in report.stages] == ["YES", "NO", "YES", "NO"]
    for r in report.stages:
        assert r.lower_edge >= r.threshold
    assert [r.N for r in report.stages] == sorted(r.N for r in report.stages)
    assert limit is not None and len(limit.stages) == 4


def test_telescoping_within_delta(run):
    report, _ = run
    assert report.telescoping and all(t["ok"] for t in report.telescoping)


def test_constructions_alternate(run):
    report, _ = run
    lemmas = [r.construction["lemma"] for r in report.stages]
    assert lemmas == ["iid", "splice", "markov_closure", "splice"]


def test_report_json(run):
    report, _ = run
    obj = json.loads(report.dumps())
    assert obj["schema"] == SCHEMA and obj["completed"]


def test_byte_identical_rerun(run):
    report, _ = run
    again, _ = run_diagonalization(freq_markov_tester(4), Schedules(), seed=1)
    assert again.dumps() == report.dumps()


def test_replay(run):
    report, _ = run
    same, _ = replay(json.loads(report.dumps()))
    assert same


def test_always_yes_gets_diagnosis():
    report, _ = run_diagonalization(always(Verdict.YES), Schedules(n_cap=1 << 12), seed=0)
    assert not report.completed
    assert report.failure["stage"] == 2
    assert "hypothesis (2)" in report.failure["diagnosis"]


def test_always_no_fails_stage1():
    report, _ = run_diagonalization(always(Verdict.NO), Schedules(n_cap=1 << 10), seed=0)
    assert report.failure["stage"] == 1
    assert "hypothesis (1)" in report.failure["diagnosis"]


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedules(delta_scale=0.5).validate()
    with pytest.raises(ValueError):
        Schedules(samples=10).validate()
    s = Schedules()
    assert s.eps(1) == 0.5 and s.delta_tail(1) == pytest.approx(sum(s.delta(k) for k in range(1, 60)))


def test_verdict_probability():
    from ergolab import iid_bernoulli

    p, r = estimate_verdict_prob(always(Verdict.YES), iid_bernoulli(0.5), 10, samples=30)
    assert p == 1.0 and r == hoeffding(30, 0.95)

"""Diagonalization against a classifier.

Stage 1 is the fair coin. Odd stages close the previous stage to a Markov
chain, even stages splice a zero-entropy process into it; each stage picks
a sample length ``N_k`` at which the classifier gives the parity's verdict
(odd: YES, even: NO) with probability at least ``1 - eps_k``.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classifiers import ClassifierHandle, Verdict
from .errors import ClassifierError, ErgolabError
from .generators import iid_bernoulli
from .markov_closure import close_to_markov
from .metrics import typicality_check
from .process import FiniteDistribution, ProcessHandle, child_seed, tv_block_distance
from .splice import build_splice

SCHEMA = "ergolab.adversary/1"


@dataclass(frozen=True)
class Schedules:
    k_max: int = 4
    eps_scale: float = 1.0          # eps_k = eps_scale / (k + 1)
    delta_scale: float = 0.2        # delta_k = delta_scale * 2^-k
    n_cap: int = 1 << 20
    samples: int = 100              # classifier runs per probe
    confidence: float = 0.95
    pairs: int = 100                # path pairs per typicality check
    fidelity: int = 4               # order at which stages are glued together
    word_method: str = "rotor"
    telescope_n: int = 4

    def eps(self, k: int) -> float:
        return self.eps_scale / (k + 1)

    def delta(self, k: int) -> float:
        return self.delta_scale * 2.0 ** (-k)

    def delta_tail(self, k: int) -> float:
        """sum_{i >= k} delta_i (closed form of the geometric tail)."""
        return self.delta_scale * 2.0 ** (1 - k)

    def validate(self):
        if not self.delta_tail(1) < 0.25:
            raise ValueError(f"sum of delta_k = {self.delta_tail(1)} must be < 0.25")
        if not 0 < self.eps(1) < 1:
            raise ValueError("eps_k must lie in (0, 1)")
        if self.samples < 30:
            raise ValueError("need at least 30 samples per probe")
        if self.k_max < 1 or self.fidelity < 1:
            raise ValueError("k_max and fidelity must be positive")
        return self


def hoeffding(samples: int, confidence: float) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


def _run_paths(c: ClassifierHandle, h: ProcessHandle, n: int, samples: int, seed, jobs: int):
    def one(i):
        return c.classify(h.sample(n, child_seed(seed, i))) == Verdict.YES

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(one, range(samples)))
    return [one(i) for i in range(samples)]


def estimate_verdict_prob(c: ClassifierHandle, h: ProcessHandle, n: int, samples: int = 100,
                          confidence: float = 0.95, seed=0, jobs: int = 1):
    """Monte Carlo ``P(g_n = YES)`` with a two-sided Hoeffding radius."""
    if samples < 30:
        raise ValueError("samples must be >= 30")
    yes = _run_paths(c, h, n, samples, seed, jobs)
    return float(np.mean(yes)), hoeffding(samples, confidence)


@dataclass
class Probe:
    N: int
    p_target: float
    radius: float
    verdict_ok: bool
    typicality: dict | None = None


@dataclass
class SelectFailure:
    k: int
    target: str
    reason: str
    best_N: int | None
    best_lower_edge: float
    threshold: float
    probes: list

    @property
    def diagnosis(self) -> str:
        hyp = "(1)" if self.target == "YES" else "(2)"
        if self.reason == "verdict":
            return (f"hypothesis {hyp} violated at reachable scales: P({self.target}) lower edge "
                    f"{self.best_lower_edge:.3f} < {self.threshold:.3f} for all probed N")
        return "typicality certificate failed at every N where the verdict cleared"


@dataclass
class StageRecord:
    k: int
    parity: str
    target: str
    N: int
    construction: dict
    p_target: float
    radius: float
    lower_edge: float
    threshold: float
    typicality: dict
    probes: list
    snapshot: str


def select_N(c: ClassifierHandle, h: ProcessHandle, target: Verdict, k: int, eps: float,
             n_start: int, s: Schedules, seed, jobs: int = 1):
    """Doubling search for the first N clearing the verdict and typicality tests."""
    N = max(n_start, k * k + 1)
    threshold = 1.0 - eps
    probes = []
    best = (-math.inf, None)
    reason = "verdict"
    idx = 0
    while N <= s.n_cap:
        p_yes, rad = estimate_verdict_prob(
            c, h, N, s.samples, s.confidence, child_seed(seed, idx, 0), jobs
        )
        p = p_yes if target == Verdict.YES else 1.0 - p_yes
        ok = p - rad >= threshold
        probe = Probe(N, p, rad, ok)
        if p - rad > best[0]:
            best = (p - rad, N)
        if ok:
            chk = typicality_check(h, k, N, eps, s.pairs, child_seed(seed, idx, 1))
            probe.typicality = asdict(chk)
            if chk.passed:
                probes.append(probe)
                return probe, probes
            reason = "typicality"
        probes.append(probe)
        N *= 2
        idx += 1
    return SelectFailure(k, target.value, reason, best[1], best[0], threshold,
                         [asdict(p) for p in probes]), probes


def _snapshot(h: ProcessHandle) -> str:
    desc = json.dumps(h.describe(), sort_keys=True, default=str)
    return hashlib.sha256(desc.encode()).hexdigest()[:16]


@dataclass
class LimitProcess:
    """Stage handles with tail-sum error bounds on their block laws."""

    stages: list
    schedules: Schedules
    N: list

    def dims(self, n: int) -> FiniteDistribution:
        d = self.stages[-1].dims(n)
        k = self.stage_for(n)
        return FiniteDistribution(n, d.probs, d.error_bound + self.bound(k))

    def stage_for(self, n: int) -> int:
        """Smallest stage whose construction order covers n-blocks."""
        return 1 if n <= self.schedules.fidelity else len(self.stages)

    def bound(self, k: int) -> float:
        K = len(self.stages)
        return 2 * sum(self.schedules.delta(i) for i in range(k, K))


@dataclass
class AdversaryReport:
    classifier: str
    schedules: dict
    seed: int
    stages: list = field(default_factory=list)
    failure: dict | None = None
    telescoping: list = field(default_factory=list)
    limit_checks: list = field(default_factory=list)
    oscillation: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.failure is None

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "classifier": self.classifier,
            "schedules": self.schedules,
            "seed": self.seed,
            "completed": self.completed,
            "stages": [asdict(r) for r in self.stages],
            "failure": self.failure,
            "telescoping": self.telescoping,
            "limit_checks": self.limit_checks,
            "oscillation": self.oscillation,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _construct(prev: ProcessHandle, i: int, N_prev: int, s: Schedules, seed):
    b = s.fidelity
    if i % 2 == 1:
        res = close_to_markov(prev, b)
        return res.handle(), {"lemma": "markov_closure", "order": b,
                              "source_error": res.source_error, **res.irreducibility_witness}
    y = build_splice(prev, b, s.delta(i - 1), seed=child_seed(seed, 7), method=s.word_method)
    return y, {"lemma": "splice", "N": b, "delta": s.delta(i - 1), "r": y.r, "m": y.m,
               "period": y.period, "u": y.u.u, "w_discrepancy": y.w.achieved_discrepancy,
               **{f"verify_{k}": v for k, v in y.verification.items()}}


def run_diagonalization(c: ClassifierHandle, s: Schedules = Schedules(), seed: int = 0,
                        jobs: int = 1):
    """Returns ``(AdversaryReport, LimitProcess | None)``; stage failures halt cleanly."""
    s.validate()
    report = AdversaryReport(c.name, asdict(s), int(seed))
    handles = [iid_bernoulli(0.5)]
    constructions = [{"lemma": "iid", "p": 0.5}]
    Ns = []
    N_prev = 1
    for i in range(1, s.k_max + 1):
        if i > 1:
            try:
                h, info = _construct(handles[-1], i, N_prev, s, child_seed(seed, i))
            except ErgolabError as exc:
                report.failure = {"stage": i, "reason": "construction", "diagnosis": str(exc)}
                break
            handles.append(h)
            constructions.append(info)
        h = handles[-1]
        target = Verdict.YES if i % 2 == 1 else Verdict.NO
        eps = s.eps(i)
        try:
            got, probes = select_N(c, h, target, i, eps, 2 * N_prev, s,
                                   child_seed(seed, i, 1), jobs)
        except ClassifierError as exc:
            report.failure = {"stage": i, "reason": "classifier", "diagnosis": str(exc)}
            break
        if isinstance(got, SelectFailure):
            report.failure = {"stage": i, **asdict(got), "diagnosis": got.diagnosis}
            break
        report.stages.append(StageRecord(
            k=i, parity="odd" if i % 2 else "even", target=target.value, N=got.N,
            construction=constructions[-1], p_target=got.p_target, radius=got.radius,
            lower_edge=got.p_target - got.radius, threshold=1 - eps,
            typicality=got.typicality, probes=[asdict(p) for p in probes],
            snapshot=_snapshot(h),
        ))
        Ns.append(got.N)
        N_prev = got.N

    done = len(report.stages)
    handles = handles[:done]
    for k in range(1, done):
        for n in range(1, s.telescope_n + 1):
            tv = tv_block_distance(handles[k - 1].dims(n), handles[k].dims(n))
            report.telescoping.append({
                "k": k, "n": n, "tv": tv, "delta_k": s.delta(k),
                "ok": tv <= s.delta(k) + 1e-9,
            })
    if done:
        last = handles[-1]
        for rec in report.stages:
            p_yes, rad = estimate_verdict_prob(
                c, last, rec.N, s.samples, s.confidence,
                child_seed(seed, 1000 + rec.k), jobs,
            )
            p = p_yes if rec.target == "YES" else 1 - p_yes
            slack = 2 * sum(s.delta(i) for i in range(rec.k, done))
            report.limit_checks.append({
                "k": rec.k, "N": rec.N, "target": rec.target, "p_target_on_limit": p,
                "radius": rad, "bound": 1 - s.eps(rec.k) - slack,
                "ok": p + rad >= 1 - s.eps(rec.k) - slack,
            })
        odd = [r.p_target for r in report.stages if r.parity == "odd"]
        even = [r.p_target for r in report.stages if r.parity == "even"]
        report.oscillation = {
            "stages_completed": done,
            "max_yes_odd": max(odd) if odd else None,
            "max_no_even": max(even) if even else None,
            "min_yes_odd": min(odd) if odd else None,
            "min_no_even": min(even) if even else None,
        }
    limit = LimitProcess(handles, s, Ns) if done else None
    return report, limit


def replay(report_json: dict, classifier: ClassifierHandle | None = None, jobs: int = 1):
    """Re-run a stored report from its seed; returns ``(identical, new_report)``."""
    from .classifiers import builtin_classifier

    s = Schedules(**report_json["schedules"])
    c = classifier or builtin_classifier(report_json["classifier"])
    new, _ = run_diagonalization(c, s, report_json["seed"], jobs)
    a = json.dumps(report_json, sort_keys=True)
    b = json.dumps(json.loads(new.dumps()), sort_keys=True)
    return a == b, new

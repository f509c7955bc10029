"""Concrete process families: iid, finite-order Markov, hidden-chain
indicators, binary renewal processes, and the countable "walk" chain whose
labeling makes ``001`` a marker of the return state."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ErgolabError, RangeError
from .process import (
    ENUM_CAP,
    FiniteDistribution,
    MarkovChainSpec,
    MarkovHandle,
    ProcessHandle,
    hidden_dims,
    stationary_vector,
)


def iid_bernoulli(p: float) -> MarkovHandle:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return MarkovHandle(MarkovChainSpec(0, np.array([p])))


def markov_from_table(order: int, table) -> MarkovHandle:
    return MarkovHandle(MarkovChainSpec.from_table(order, table).check())


def period2_chain() -> MarkovHandle:
    return markov_from_table(1, {"0": 1.0, "1": 0.0})


# ------------------------------------------------------------ hidden chains


class HiddenChainHandle(ProcessHandle):
    """Binary function of a finite-state stationary Markov chain."""

    def __init__(self, P, labels, tags=("finitarily_markovian",)):
        super().__init__()
        self.P = np.asarray(P, dtype=np.float64)
        if self.P.ndim != 2 or self.P.shape[0] != self.P.shape[1]:
            raise ValueError("P must be square")
        if np.abs(self.P.sum(axis=1) - 1).max() > 1e-9:
            raise ValueError("rows of P must sum to 1")
        self.labels = np.asarray(labels, dtype=np.int64)
        self.pi = stationary_vector(self.P)
        self.tags = tuple(tags)
        self._cum = np.ascontiguousarray(np.cumsum(self.P, axis=1))
        self._cum[:, -1] = 1.0

    def _dims(self, n):
        w = hidden_dims(self.pi, self.P, self.labels, n)
        return FiniteDistribution(n, w / w.sum())

    def sample_states(self, length, seed):
        from .process import make_rng

        return self._states(length, make_rng(seed))

    def _states(self, length, rng):
        init = int(rng.choice(len(self.pi), p=self.pi))
        u = rng.random(length)
        return _kernels.sample_finite_chain(self._cum, init, u)

    def _sample(self, length, rng):
        if length == 0:
            return np.zeros(0, dtype=np.uint8)
        return self.labels[self._states(length, rng)].astype(np.uint8)

    def describe(self):
        return {
            **super().describe(),
            "P": self.P.tolist(),
            "labels": self.labels.tolist(),
        }


def state_indicator_process(P, s: int) -> HiddenChainHandle:
    """``X_n = 1`` iff the chain ``P`` sits in state ``s``."""
    P = np.asarray(P, dtype=np.float64)
    pi = stationary_vector(P)
    if not 0 <= s < len(pi) or pi[s] <= 0:
        raise ErgolabError(f"state {s} has zero stationary mass")
    labels = np.zeros(len(pi), dtype=np.int64)
    labels[s] = 1
    return HiddenChainHandle(P, labels)


EXAMPLE2_P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0]])


def example2_indicator() -> HiddenChainHandle:
    """Indicator of state 0 in the 3-cycle with a coin flip at state 2."""
    return state_indicator_process(EXAMPLE2_P, 0)


# ----------------------------------------------------------------- renewal


@dataclass(frozen=True)
class RenewalSpec:
    """Inter-arrival law: ``masses[t-1] = P(T = t)`` for ``t <= len(masses)``;
    leftover mass continues as ``len(masses) + Geometric(tail_p)``."""

    masses: tuple
    tail_p: float | None = None

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        if m.ndim != 1 or m.size == 0 or m.min() < 0:
            raise ValueError("masses must be a non-empty list of non-negative numbers")
        rest = 1.0 - m.sum()
        if rest < -1e-9:
            raise ValueError("inter-arrival masses exceed 1")
        if rest > 1e-9 and not (self.tail_p and 0 < self.tail_p <= 1):
            raise ErgolabError("inter-arrival law is defective and has no geometric tail; mean undefined")

    @property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - float(np.sum(self.masses))) if self.tail_p else 0.0

    @property
    def mean(self) -> float:
        m = np.asarray(self.masses, dtype=np.float64)
        L = m.size
        mean = float(np.dot(np.arange(1, L + 1), m))
        if self.tail_mass > 0:
            mean += self.tail_mass * (L + 1.0 / self.tail_p)
        return mean

    @classmethod
    def geometric(cls, p: float) -> "RenewalSpec":
        return cls((p,), p)

    @classmethod
    def constant(cls, t: int) -> "RenewalSpec":
        m = [0.0] * t
        m[-1] = 1.0
        return cls(tuple(m))


def renewal_process(spec: RenewalSpec) -> HiddenChainHandle:
    """Stationary renewal indicator via the residual-waiting-time chain.

    State ``j < L`` means the next 1 is ``j`` steps away; the extra tail state
    means at least ``L`` steps remain (memoryless geometric overshoot).
    """
    if not np.isfinite(spec.mean):
        raise ErgolabError("inter-arrival mean is not finite")
    m = np.asarray(spec.masses, dtype=np.float64)
    L = m.size
    tail = spec.tail_mass > 0
    S = L + (1 if tail else 0)
    P = np.zeros((S, S))
    P[0, :L] = m
    if tail:
        P[0, L] = spec.tail_mass
        P[L, L - 1] = spec.tail_p
        P[L, L] = 1.0 - spec.tail_p
    for j in range(1, L):
        P[j, j - 1] = 1.0
    P[0] /= P[0].sum()
    labels = np.zeros(S, dtype=np.int64)
    labels[0] = 1
    h = HiddenChainHandle(P, labels)
    h.spec = spec
    return h


# -------------------------------------------------------------- walk chain

_LABEL_TABLE_SIZE = 4096


def _pow2plus1(s: int) -> int:
    t = s - 1
    return 0 if t >= 2 and (t & (t - 1)) == 0 else 1


PREDICATES = {
    "pow2plus1": _pow2plus1,   # f(2^i+1)=0, other odd states 1: not Markov of any order
    "all_zero": lambda s: 0,
    "all_one": lambda s: 1,
}


@dataclass(frozen=True)
class WalkChainLabeling:
    """Labels for odd states >= 3; 0, 1 map to 0 and even states >= 2 to 1."""

    table: dict = field(default_factory=dict)
    default: int = 0
    predicate: str | None = None

    def __post_init__(self):
        if self.predicate is not None and self.predicate not in PREDICATES:
            raise ValueError(f"unknown predicate {self.predicate!r}; choose from {sorted(PREDICATES)}")
        for s, v in self.table.items():
            s = int(s)
            if s < 3 or s % 2 == 0:
                raise ValueError(f"only odd states >= 3 are free, got {s}")
            if v not in (0, 1):
                raise ValueError("labels are 0 or 1")

    def __call__(self, s: int) -> int:
        if s <= 1:
            return 0
        if s % 2 == 0:
            return 1
        if s in self.table or str(s) in self.table:
            return int(self.table.get(s, self.table.get(str(s))))
        if self.predicate is not None:
            return PREDICATES[self.predicate](s)
        return int(self.default)

    def array(self, size: int) -> np.ndarray:
        return np.array([self(s) for s in range(size)], dtype=np.int64)

    def to_json(self):
        return {
            "table": {str(k): v for k, v in self.table.items()},
            "default": self.default,
            "predicate": self.predicate,
        }


def walk_stationary(j: int) -> float:
    return 0.25 if j <= 1 else 2.0 ** (-j)


class WalkChainHandle(ProcessHandle):
    """``f(M_n)`` for the chain 0 -> 1 -> 2, s -> {0, s+1} by a fair coin (s >= 2).

    Sampling is exact; ``dims(n)`` truncates the state space at
    ``n + margin`` and reports the discarded path mass in ``error_bound``.
    """

    def __init__(self, labeling: WalkChainLabeling, margin: int = 60):
        super().__init__()
        self.labeling = labeling
        self.margin = margin
        self.tags = ("finitarily_markovian",)
        self.exact = False
        self._labels = labeling.array(_LABEL_TABLE_SIZE)

    def truncated_chain(self, size: int):
        P = np.zeros((size, size))
        P[0, 1] = 1.0
        P[1, 2] = 1.0
        for s in range(2, size):
            P[s, 0] = 0.5
            if s + 1 < size:
                P[s, s + 1] = 0.5
        pi = np.array([walk_stationary(j) for j in range(size)])
        return pi, P

    def _dims(self, n):
        if n > ENUM_CAP:
            raise RangeError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
        size = n + self.margin
        pi, P = self.truncated_chain(size)
        w = hidden_dims(pi, P, self.labeling.array(size), n)
        lost = max(0.0, 1.0 - w.sum())
        # renormalizing a sub-probability vector with defect e moves at most 2e in L1
        return FiniteDistribution(n, w / w.sum(), 2.0 * lost + 1e-15 * (1 << n))

    def _initial_state(self, rng) -> int:
        if rng.random() < 0.5:
            return int(rng.integers(2))
        return 1 + int(rng.geometric(0.5))

    def _states(self, length, rng):
        init = self._initial_state(rng)
        u = rng.random(length)
        states = _kernels.sample_walk_chain(init, u)
        if length and states.max() >= _LABEL_TABLE_SIZE:
            raise ErgolabError("walk chain exceeded the label table (probability < 2^-4000)")
        return states

    def sample_states(self, length, seed):
        from .process import make_rng

        rng = make_rng(seed)
        states = self._states(length, rng)
        return self._labels[states].astype(np.uint8), states

    def _sample(self, length, rng):
        if length == 0:
            return np.zeros(0, dtype=np.uint8)
        return self._labels[self._states(length, rng)].astype(np.uint8)

    def describe(self):
        return {**super().describe(), "labeling": self.labeling.to_json()}


def walk_chain_process(labeling: WalkChainLabeling | None = None) -> WalkChainHandle:
    return WalkChainHandle(labeling or WalkChainLabeling())

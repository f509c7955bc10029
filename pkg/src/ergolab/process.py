"""Core data model: binary words, finite block laws, Markov chains, handles.

Block laws are stored as dense float64 vectors indexed by the integer code of
the word, first symbol most significant (``"011" -> 3``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve

from . import _kernels
from .errors import IrreducibilityError, RangeError, ShapeError

ENUM_CAP = 24
SUM_TOL = 1e-9


# ---------------------------------------------------------------- words


def as_word(x) -> np.ndarray:
    """Coerce an ASCII 0/1 string or a sequence of bits to a uint8 array."""
    if isinstance(x, str):
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(x)
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
    if arr.ndim != 1 or (arr.size and (arr.min() < 0 or arr.max() > 1)):
        raise ValueError("a word is a 1-d sequence of 0/1 symbols")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def word_str(w) -> str:
    return (np.asarray(w, dtype=np.uint8) + ord("0")).tobytes().decode("ascii")


def word_code(w) -> int:
    code = 0
    for b in np.asarray(w).tolist():
        code = (code << 1) | int(b)
    return code


def code_word(code: int, n: int) -> str:
    return format(code, "b").zfill(n) if n else ""


def all_words(n: int) -> list[str]:
    return [code_word(c, n) for c in range(1 << n)]


# ------------------------------------------------------------------ rng


def make_rng(seed, *keys) -> np.random.Generator:
    """Deterministic generator for ``seed`` and an optional sub-stream path.

    Distinct key tuples give statistically independent streams
    (``SeedSequence`` spawn keys), so experiments can be split without
    sharing state.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed, *keys) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


# ---------------------------------------------------- finite distributions


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Law of an ``n``-block with an additive L1 error bound."""

    n: int
    probs: np.ndarray
    error_bound: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if self.n < 0 or probs.shape != (1 << self.n,):
            raise ShapeError(f"expected {1 << max(self.n, 0)} probabilities for n={self.n}")
        if probs.size and (probs.min() < -1e-12 or probs.max() > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if not self.error_bound >= 0:
            raise ValueError("error_bound must be non-negative")
        probs = np.clip(probs, 0.0, 1.0)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "error_bound", float(self.error_bound))

    @property
    def block_length(self) -> int:
        return self.n

    def __getitem__(self, word) -> float:
        if isinstance(word, str):
            if len(word) != self.n:
                raise ShapeError(f"word of length {len(word)} for an {self.n}-block law")
            return float(self.probs[int(word, 2) if word else 0])
        return float(self.probs[int(word)])

    def as_dict(self, drop_zero=False) -> dict[str, float]:
        return {
            code_word(c, self.n): float(p)
            for c, p in enumerate(self.probs)
            if not (drop_zero and p == 0.0)
        }

    def marginalize(self, j: int, side: str = "prefix") -> "FiniteDistribution":
        return marginalize(self, j, side)

    def to_json(self) -> dict:
        return {"n": self.n, "probs": self.as_dict(), "error_bound": self.error_bound}

    @classmethod
    def from_json(cls, obj) -> "FiniteDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["n"])
        probs = np.zeros(1 << n)
        for w, p in obj["probs"].items():
            if len(w) != n:
                raise ShapeError(f"key {w!r} is not an {n}-word")
            probs[int(w, 2) if w else 0] = p
        return cls(n, probs, float(obj.get("error_bound", 0.0)))

    @classmethod
    def point_mass(cls, word) -> "FiniteDistribution":
        w = word if isinstance(word, str) else word_str(word)
        probs = np.zeros(1 << len(w))
        probs[int(w, 2) if w else 0] = 1.0
        return cls(len(w), probs)

    @classmethod
    def uniform(cls, n: int) -> "FiniteDistribution":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def from_unnormalized(cls, n, weights, error_bound=0.0) -> "FiniteDistribution":
        """Normalize ``weights``; the renormalization magnitude is added to the bound."""
        weights = np.clip(np.asarray(weights, dtype=np.float64), 0.0, None)
        total = weights.sum()
        if total <= 0:
            raise ValueError("weights have zero total mass")
        return cls(n, weights / total, error_bound + abs(1.0 - total))


def marginalize(d: FiniteDistribution, j: int, side: str = "prefix") -> FiniteDistribution:
    """Law of the first (``side="prefix"``) or last (``"suffix"``) ``j`` symbols."""
    if not 0 <= j <= d.n:
        raise RangeError(f"j={j} outside 0..{d.n}")
    if side == "prefix":
        probs = d.probs.reshape(1 << j, 1 << (d.n - j)).sum(axis=1)
    elif side == "suffix":
        probs = d.probs.reshape(1 << (d.n - j), 1 << j).sum(axis=0)
    else:
        raise ValueError("side must be 'prefix' or 'suffix'")
    return FiniteDistribution(j, probs / probs.sum(), d.error_bound)


def tv_block_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Sum of absolute differences over all blocks (twice the usual TV)."""
    if p.n != q.n:
        raise ShapeError(f"block lengths differ: {p.n} vs {q.n}")
    return float(np.abs(p.probs - q.probs).sum())


# ------------------------------------------------ finite-state chains


def communicating_classes(P) -> list[list[int]]:
    """Strongly connected classes of the positive-transition graph."""
    G = sparse.csr_matrix(np.asarray(P) > 0) if not sparse.issparse(P) else (P > 0).astype(np.int8)
    ncomp, labels = csgraph.connected_components(G, directed=True, connection="strong")
    classes = [[] for _ in range(ncomp)]
    for s, c in enumerate(labels):
        classes[c].append(s)
    return sorted(classes)


def _closed_classes(P) -> list[list[int]]:
    P = sparse.csr_matrix(P)
    classes = communicating_classes(P)
    label = np.empty(P.shape[0], dtype=np.int64)
    for i, c in enumerate(classes):
        label[c] = i
    coo = P.tocoo()
    leaving = np.zeros(len(classes), dtype=bool)
    mask = (coo.data > 0) & (label[coo.row] != label[coo.col])
    leaving[label[coo.row[mask]]] = True
    return [c for i, c in enumerate(classes) if not leaving[i]]


def stationary_vector(P, tol=1e-10) -> np.ndarray:
    """Unique stationary law of a finite chain with one closed class.

    Transient states get mass 0. Several closed classes raise
    :class:`IrreducibilityError` listing them.
    """
    P = sparse.csr_matrix(P, dtype=np.float64)
    S = P.shape[0]
    closed = _closed_classes(P)
    if len(closed) != 1:
        raise IrreducibilityError(
            f"chain has {len(closed)} closed communicating classes", closed
        )
    C = np.array(closed[0])
    Q = P[C][:, C]
    m = len(C)
    A = (Q.T - sparse.identity(m, format="csr")).tolil()
    A[0, :] = np.ones(m)
    b = np.zeros(m)
    b[0] = 1.0
    pi_c = spsolve(A.tocsc(), b) if m > 1 else np.ones(1)
    pi_c = np.clip(np.real(pi_c), 0.0, None)
    pi_c /= pi_c.sum()
    # one polishing step against the linear-solve rounding
    for _ in range(3):
        nxt = Q.T @ pi_c
        if np.abs(nxt - pi_c).sum() < tol * 1e-2:
            break
        pi_c = 0.5 * (pi_c + nxt)
        pi_c /= pi_c.sum()
    pi = np.zeros(S)
    pi[C] = pi_c
    resid = np.abs(P.T @ pi - pi).sum()
    if resid >= tol:
        raise ArithmeticError(f"stationary residual {resid:.3e} exceeds {tol:g}")
    return pi


def hidden_dims(pi, P, labels, n: int) -> np.ndarray:
    """Exact ``n``-block law of ``labels[M_i]`` by the forward recursion.

    Returns unnormalized block masses (they sum to the retained path mass).
    """
    if n > ENUM_CAP:
        raise RangeError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
    P = np.asarray(P, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    on = labels == 1
    alpha = np.zeros((2, len(pi)))
    alpha[0, ~on] = np.asarray(pi)[~on]
    alpha[1, on] = np.asarray(pi)[on]
    for _ in range(n - 1):
        step = alpha @ P
        nxt = np.zeros((2 * alpha.shape[0], alpha.shape[1]))
        nxt[0::2, ~on] = step[:, ~on]
        nxt[1::2, on] = step[:, on]
        alpha = nxt
    return alpha.sum(axis=1)


# ---------------------------------------------------------- Markov chains


def _context_graph(k: int, p1: np.ndarray):
    S = 1 << k
    mask = S - 1
    ctx = np.arange(S)
    rows = np.concatenate([ctx, ctx])
    cols = np.concatenate([(ctx << 1) & mask, ((ctx << 1) | 1) & mask])
    vals = np.concatenate([1.0 - p1, p1])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(S, S))


def markov_stationary(order: int, p1) -> FiniteDistribution:
    """Stationary ``order``-block law of the chain ``P(next=1 | ctx) = p1[ctx]``."""
    p1 = np.asarray(p1, dtype=np.float64)
    if p1.shape != (1 << order,):
        raise ShapeError(f"need {1 << order} transition entries for order {order}")
    if order == 0:
        return FiniteDistribution(0, np.ones(1))
    pi = stationary_vector(_context_graph(order, p1))
    return FiniteDistribution(order, pi)


@dataclass(frozen=True, eq=False)
class MarkovChainSpec:
    """Binary chain of order ``k``: ``p1[c] = P(next = 1 | last k symbols = c)``.

    Rows of zero stationary mass are kept in ``p1`` but carry no meaning.
    """

    order: int
    p1: np.ndarray
    stationary: FiniteDistribution = None

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=np.float64).copy()
        if p1.shape != (1 << self.order,):
            raise ShapeError(f"need {1 << self.order} transition entries")
        if p1.size and (p1.min() < 0 or p1.max() > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        p1.setflags(write=False)
        object.__setattr__(self, "p1", p1)
        if self.stationary is None:
            object.__setattr__(self, "stationary", markov_stationary(self.order, p1))
        elif self.stationary.n != self.order:
            raise ShapeError("stationary law must be an order-block law")

    @classmethod
    def from_table(cls, order: int, table) -> "MarkovChainSpec":
        """Build from ``{context: P(1|context)}`` (missing contexts default to 0.5)."""
        if isinstance(table, dict):
            p1 = np.full(1 << order, 0.5)
            for ctx, p in table.items():
                if len(ctx) != order:
                    raise ShapeError(f"context {ctx!r} is not of length {order}")
                p1[int(ctx, 2) if ctx else 0] = p
        else:
            p1 = np.asarray(table, dtype=np.float64)
        return cls(order, p1)

    @cached_property
    def positive(self) -> np.ndarray:
        return self.stationary.probs > 0

    def shift_residual(self) -> float:
        """L1 residual of the stationary law under one chain step."""
        if self.order == 0:
            return 0.0
        G = _context_graph(self.order, self.p1)
        pi = self.stationary.probs
        return float(np.abs(G.T @ pi - pi).sum())

    def check(self, tol=1e-9):
        """Verify the chain invariants; raises on violation."""
        resid = self.shift_residual()
        if resid > tol:
            raise ValueError(f"stationary law not invariant (residual {resid:.3e})")
        if self.order:
            pos = np.flatnonzero(self.positive)
            G = _context_graph(self.order, self.p1)[pos][:, pos]
            classes = communicating_classes(G)
            if len(classes) != 1:
                raise IrreducibilityError(
                    "chain on positive contexts is reducible",
                    [[code_word(int(pos[s]), self.order) for s in c] for c in classes],
                )
        return self

    def to_json(self) -> dict:
        rows = {
            code_word(c, self.order): float(self.p1[c])
            for c in range(1 << self.order)
            if self.positive[c]
        }
        return {
            "order": self.order,
            "contexts": list(rows),
            "p1": rows,
            "stationary": self.stationary.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "MarkovChainSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        k = int(obj["order"])
        p1 = np.full(1 << k, 0.5)
        for ctx, p in obj["p1"].items():
            p1[int(ctx, 2) if ctx else 0] = p
        stat = FiniteDistribution.from_json(obj["stationary"]) if "stationary" in obj else None
        return cls(k, p1, stat)


def extend_markov(d: np.ndarray, order: int, p1: np.ndarray, steps: int) -> np.ndarray:
    """Push a block law forward ``steps`` symbols under an order-``order`` chain."""
    mask = (1 << order) - 1
    for _ in range(steps):
        codes = np.arange(d.shape[0])
        ctx = codes & mask
        nxt = np.empty(2 * d.shape[0])
        nxt[0::2] = d * (1.0 - p1[ctx])
        nxt[1::2] = d * p1[ctx]
        d = nxt
    return d


def markov_exact_dims(chain: MarkovChainSpec, n: int, cap: int = ENUM_CAP) -> FiniteDistribution:
    if n < 0:
        raise RangeError("n must be non-negative")
    if n > cap:
        raise RangeError(f"n={n} exceeds the enumeration cap {cap}")
    k = chain.order
    eb = chain.stationary.error_bound
    if n <= k:
        return marginalize(chain.stationary, n, "prefix")
    probs = extend_markov(chain.stationary.probs, k, chain.p1, n - k)
    return FiniteDistribution(n, probs / probs.sum(), eb)


# ---------------------------------------------------------------- handles

TAGS = ("finitarily_markovian", "non_finitarily_markovian", "unknown")


class ProcessHandle:
    """A stationary binary process: block laws plus a seeded sampler.

    Subclasses implement ``_dims(n)`` and ``_sample(length, rng)``. Both are
    pure; ``dims`` results are memoized per handle.
    """

    tags: tuple = ("unknown",)
    exact: bool = True

    def __init__(self):
        self._dims_cache = {}

    def dims(self, n: int) -> FiniteDistribution:
        if n < 0:
            raise RangeError("n must be non-negative")
        if n not in self._dims_cache:
            self._dims_cache[n] = self._dims(n)
        return self._dims_cache[n]

    def sample(self, length: int, seed) -> np.ndarray:
        if length < 0:
            raise RangeError("length must be non-negative")
        return self._sample(int(length), make_rng(seed))

    @property
    def markov_order(self):
        for t in self.tags:
            if t.startswith("markov("):
                return int(t[7:-1])
        return None

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "tags": list(self.tags)}

    def _dims(self, n):
        raise NotImplementedError

    def _sample(self, length, rng):
        raise NotImplementedError


def sample_path(handle: ProcessHandle, length: int, seed) -> np.ndarray:
    if length < 1:
        raise RangeError("length must be at least 1")
    return handle.sample(length, seed)


class MarkovHandle(ProcessHandle):
    def __init__(self, chain: MarkovChainSpec, cap: int = ENUM_CAP):
        super().__init__()
        self.chain = chain
        self.cap = cap
        self.tags = (f"markov({chain.order})", "finitarily_markovian")
        self.exact = chain.stationary.error_bound == 0

    def _dims(self, n):
        return markov_exact_dims(self.chain, n, self.cap)

    def _sample(self, length, rng):
        k = self.chain.order
        pi = self.chain.stationary.probs
        init = int(rng.choice(len(pi), p=pi)) if k else 0
        head = np.array([int(c) for c in code_word(init, k)], dtype=np.uint8)
        if length <= k:
            return head[:length].copy()
        u = rng.random(length - k)
        tail = _kernels.sample_context_chain(
            np.ascontiguousarray(self.chain.p1), k, init, u
        )
        return np.concatenate([head, np.asarray(tail, dtype=np.uint8)])

    def describe(self):
        return {**super().describe(), "chain": self.chain.to_json()}


class MixtureHandle(ProcessHandle):
    """Convex combination of handles; each sampled path comes from one component.

    Stationary but in general not ergodic.
    """

    def __init__(self, components, weights):
        super().__init__()
        self.components = list(components)
        w = np.asarray(weights, dtype=np.float64)
        self.weights = w / w.sum()
        self.tags = ("unknown",)
        self.exact = all(c.exact for c in self.components)

    def _dims(self, n):
        probs = sum(w * c.dims(n).probs for w, c in zip(self.weights, self.components))
        eb = sum(w * c.dims(n).error_bound for w, c in zip(self.weights, self.components))
        return FiniteDistribution(n, probs / probs.sum(), eb)

    def _sample(self, length, rng):
        i = int(rng.choice(len(self.components), p=self.weights))
        sub = int(rng.integers(2**63 - 1))
        return self.components[i].sample(length, sub)

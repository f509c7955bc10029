"""Splicing: embed a zero-entropy process between copies of a typical word.

``W`` repeats the block ``Z_eta, u, w`` (period ``m + r + 1``), where ``w`` is a
typical word of the source and ``u`` a synchronizing word; ``Y`` is ``W``
shifted by an independent uniform phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BudgetError, ConstructionError, DecodeError, RangeError
from .process import (
    ENUM_CAP,
    FiniteDistribution,
    ProcessHandle,
    as_word,
    child_seed,
    make_rng,
    tv_block_distance,
    word_str,
)


# ------------------------------------------------------------ typical word


@dataclass(frozen=True)
class TypicalWord:
    w: str
    N: int
    delta: float
    achieved_discrepancy: float
    method: str = "sample"

    @property
    def r(self) -> int:
        return len(self.w)

    @property
    def target(self) -> float:
        return self.delta / 2 ** (self.N + 1)

    def to_json(self):
        return {
            "w": self.w,
            "r": self.r,
            "N": self.N,
            "delta": self.delta,
            "achieved_discrepancy": self.achieved_discrepancy,
            "target": self.target,
            "method": self.method,
        }


def sync_length(r: int) -> int:
    return math.ceil(10 * math.log2(r))


def block_discrepancy(w, d: FiniteDistribution) -> float:
    """Max over N-blocks of |sliding rate in w - d|."""
    x = as_word(w)
    counts = _kernels.block_counts(x, d.n)
    return float(np.abs(counts / (x.size - d.n + 1) - d.probs).max())


def rotor_word(d: FiniteDistribution, length: int) -> np.ndarray:
    """Deterministic walk on the (N-1)-context chain of ``d`` with Sturmian choices.

    The j-th visit to context ``s`` emits 1 iff ``floor((j+1) q) > floor(j q)``
    with ``q = P(1 | s)``, so per-context transition counts stay within one of
    their expectation and block counts track ``length * d``.
    """
    N = d.n
    k = N - 1
    pairs = d.probs.reshape(1 << k, 2)
    mass = pairs.sum(axis=1)
    q = np.where(mass > 0, pairs[:, 1] / np.where(mass > 0, mass, 1), 0.0)
    visits = np.zeros(1 << k, dtype=np.int64)
    mask = (1 << k) - 1
    ctx = int(np.argmax(mass))
    out = np.empty(length, dtype=np.uint8)
    head = [int(c) for c in format(ctx, "b").zfill(k)] if k else []
    out[: min(k, length)] = head[:length]
    ql = q.tolist()
    for i in range(k, length):
        j = visits[ctx]
        b = 1 if math.floor((j + 1) * ql[ctx] + 1e-12) > math.floor(j * ql[ctx] + 1e-12) else 0
        visits[ctx] = j + 1
        out[i] = b
        ctx = ((ctx << 1) | b) & mask
    return out


def find_typical_word(handle: ProcessHandle, N: int, delta: float, r0: int = 64,
                      r_max: int = 1 << 22, seed=0, method: str = "sample") -> TypicalWord:
    """First ``r`` on the doubling schedule whose word meets the block target.

    ``method="sample"`` takes a sampled realization; ``"rotor"`` a
    deterministic low-discrepancy walk on the (N-1)-context chain. Both
    also require ``(m+1)/(m+r+1) < delta/4``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if method not in ("sample", "rotor"):
        raise ValueError(f"unknown method {method!r}")
    d = handle.dims(N)
    target = delta / 2 ** (N + 1)
    best = (math.inf, None)
    r = max(r0, N + 1, 2)
    attempt = 0
    while r <= r_max:
        m = sync_length(r)
        if (m + 1) / (m + r + 1) < delta / 4:
            if method == "sample":
                w = handle.sample(r, child_seed(seed, attempt))
            else:
                w = rotor_word(d, r)
            disc = block_discrepancy(w, d)
            if disc < best[0]:
                best = (disc, r)
            if disc < target:
                return TypicalWord(word_str(w), N, delta, disc, method)
            attempt += 1
        r *= 2
    raise BudgetError(
        f"no typical word up to r={r_max}: best discrepancy {best[0]:.3g} at r={best[1]} "
        f"(target {target:.3g})",
        best={"discrepancy": best[0], "r": best[1], "target": target},
    )


# ----------------------------------------------------------- sync word


def borders(u: str) -> list[int]:
    """All proper border lengths of ``u`` (KMP failure chain), longest first."""
    fail = [0] * len(u)
    k = 0
    for i in range(1, len(u)):
        while k and u[i] != u[k]:
            k = fail[k - 1]
        if u[i] == u[k]:
            k += 1
        fail[i] = k
    out = []
    b = fail[-1] if u else 0
    while b:
        out.append(b)
        b = fail[b - 1]
    return out


def sync_violations(u: str, w: str) -> list[str]:
    """Which synchronizing-word conditions ``u`` fails against ``w`` (empty = ok)."""
    m = len(u)
    lim = 2 * m / 5
    bad = []
    if u in w:
        bad.append("occurs in w")
    if any(t > lim for t in borders(u)):
        bad.append("self-overlap")
    for t in range(math.floor(lim) + 1, min(m, len(w) + 1)):
        if u[m - t:] == w[:t]:
            bad.append("suffix(u)=prefix(w)")
            break
    for t in range(math.floor(lim) + 1, min(m, len(w) + 1)):
        if w[len(w) - t:] == u[:t]:
            bad.append("suffix(w)=prefix(u)")
            break
    return bad


def counting_bound_holds(r: int, m: int) -> bool:
    return r + 4 * m * 2 ** (0.6 * m) < 2**m


@dataclass(frozen=True)
class SyncWord:
    u: str
    r: int
    counting_bound: bool
    candidates_tried: int
    m_increase: int = 0

    @property
    def m(self) -> int:
        return len(self.u)

    def to_json(self):
        return {
            "u": self.u,
            "m": self.m,
            "counting_bound": self.counting_bound,
            "candidates_tried": self.candidates_tried,
            "m_increase": self.m_increase,
        }


def find_sync_word(w, budget: int = 1 << 16) -> SyncWord:
    """Lexicographically first word of length ceil(10 log2 r) passing all checks."""
    w = w if isinstance(w, str) else word_str(w)
    r = len(w)
    if r < 2:
        raise RangeError("the typical word needs length >= 2")
    m0 = sync_length(r)
    for extra in range(0, 64):
        m = m0 + extra
        for c in range(min(budget, 1 << m)):
            u = format(c, "b").zfill(m)
            if not sync_violations(u, w):
                return SyncWord(u, r, counting_bound_holds(r, m0), c + 1, extra)
    raise ConstructionError(f"no synchronizing word found for r={r}")


# ------------------------------------------------------------ spliced handle


class SplicedHandle(ProcessHandle):
    """Stationary process ``Y_n = W_{n + zeta}``; block laws averaged over zeta."""

    def __init__(self, z: ProcessHandle, w: TypicalWord, u: SyncWord):
        super().__init__()
        self.z = z
        self.w = w
        self.u = u
        self.m = u.m
        self.r = w.r
        self.period = self.m + self.r + 1
        self.template = np.concatenate([[0], as_word(u.u), as_word(w.w)]).astype(np.uint8)
        self.tags = ("non_finitarily_markovian",) if "non_finitarily_markovian" in z.tags else ("unknown",)
        self.exact = z.exact
        self.verification = {}

    @property
    def z_fraction(self) -> float:
        return 1.0 / self.period

    @property
    def overhead(self) -> float:
        return (self.m + 1) / self.period

    def _dims(self, n):
        if n > ENUM_CAP:
            raise RangeError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
        P = self.period
        if n == 0:
            return FiniteDistribution(0, np.ones(1))
        reps = (n - 1) // P + 2
        ext = np.tile(self.template, reps)[: P + n - 1]
        fixed = _kernels.block_codes(np.ascontiguousarray(ext), n)   # zeta = 0..P-1
        first = (-np.arange(P)) % P          # window offset of the first Z slot
        probs = np.zeros(1 << n)
        clean = first >= n
        probs += np.bincount(fixed[clean], minlength=1 << n) / P
        eb = 0.0
        for zeta in np.flatnonzero(~clean).tolist():
            slots = list(range(int(first[zeta]), n, P))
            c = len(slots)
            zd = self.z.dims(c)
            eb = max(eb, zd.error_bound)
            zcodes = np.arange(1 << c)
            codes = np.full(1 << c, int(fixed[zeta]))
            for i, j in enumerate(slots):
                bit = (zcodes >> (c - 1 - i)) & 1
                codes = codes | (bit << (n - 1 - j))
            np.add.at(probs, codes, zd.probs / P)
        return FiniteDistribution(n, probs / probs.sum(), eb)

    def sample_with_truth(self, length, seed):
        rng = make_rng(seed)
        return self._generate(length, rng)

    def _generate(self, length, rng):
        P = self.period
        zeta = int(rng.integers(P))
        pos = np.arange(zeta, zeta + length, dtype=np.int64)
        theta = pos % P
        eta = pos // P
        y = self.template[theta].copy()
        slot = np.flatnonzero(theta == 0)
        zsub = int(rng.integers(2**63 - 1))
        zs = self.z.sample(slot.size, zsub) if slot.size else np.zeros(0, dtype=np.uint8)
        y[slot] = zs
        planted = np.flatnonzero(theta == 1)
        return y, zs, zeta, planted

    def _sample(self, length, rng):
        return self._generate(length, rng)[0]

    def to_json(self):
        return {
            "w": self.w.to_json(),
            "u": self.u.to_json(),
            "period": self.period,
            "z": self.z.describe(),
            "verification": self.verification,
        }

    def describe(self):
        return {**super().describe(), "period": self.period, "m": self.m, "r": self.r}


def splice(z: ProcessHandle, w: TypicalWord, u: SyncWord, source: ProcessHandle | None = None,
           N: int | None = None, delta: float | None = None) -> SplicedHandle:
    """Build the spliced handle; with ``source`` given, verify the N-block bound."""
    if "non_finitarily_markovian" not in z.tags:
        raise ConstructionError("the embedded process must be tagged non_finitarily_markovian")
    bad = sync_violations(u.u, w.w)
    if bad:
        raise ConstructionError(f"sync word fails: {', '.join(bad)}")
    y = SplicedHandle(z, w, u)
    if source is not None:
        N = w.N if N is None else N
        delta = w.delta if delta is None else delta
        tv = tv_block_distance(y.dims(N), source.dims(N))
        y.verification = {
            "N": N,
            "delta": delta,
            "tv": tv,
            "overhead": y.overhead,
            "overhead_ok": y.overhead < delta / 4,
            "passed": tv < delta,
        }
        if not tv < delta:
            raise ConstructionError(
                f"spliced N-block distance {tv:.4g} >= delta={delta}; use a larger r"
            )
    return y


def build_splice(source: ProcessHandle, N: int, delta: float, z: ProcessHandle | None = None,
                 seed=0, method: str = "sample", r0: int = 64, r_max: int = 1 << 22) -> SplicedHandle:
    if z is None:
        from .rotation import rotation_process

        z = rotation_process()
    w = find_typical_word(source, N, delta, r0=r0, r_max=r_max, seed=seed, method=method)
    u = find_sync_word(w.w)
    return splice(z, w, u, source, N, delta)


# ------------------------------------------------------------------ decode


def find_occurrences(y, u: str) -> np.ndarray:
    s = y if isinstance(y, str) else word_str(y)
    out = []
    i = s.find(u)
    while i >= 0:
        out.append(i)
        i = s.find(u, i + 1)
    return np.array(out, dtype=np.int64)


def decode_z(y, u: SyncWord | str, w: TypicalWord | str) -> np.ndarray:
    """Recover the embedded Z-symbols from a spliced path."""
    us = u.u if isinstance(u, SyncWord) else u
    ws = w.w if isinstance(w, TypicalWord) else w
    y = as_word(y)
    P = len(us) + len(ws) + 1
    if y.size < P:
        raise DecodeError(f"path of length {y.size} is shorter than one period {P}")
    occ = find_occurrences(y, us)
    if occ.size == 0:
        raise DecodeError("sync word not found")
    if np.any(np.diff(occ) != P):
        raise DecodeError("sync word occurrences are not period-aligned")
    phase = int(occ[0] - 1) % P
    template = np.concatenate([[0], as_word(us), as_word(ws)]).astype(np.uint8)
    theta = (np.arange(y.size) - phase) % P
    fixed = theta != 0
    if np.any(y[fixed] != template[theta[fixed]]):
        raise DecodeError("path does not follow the u.w template at the decoded phase")
    expected = np.flatnonzero(theta == 1)
    expected = expected[expected + len(us) <= y.size]
    if not np.array_equal(expected, occ):
        raise DecodeError("sync word occurrences differ from the aligned positions")
    return y[theta == 0].copy()

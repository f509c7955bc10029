"""Zero-entropy, full-support coding of an irrational circle rotation.

The set ``A`` is a finite union of intervals ``I_n`` and their images
``T^n I_n``; the first-return partition ``A_k`` is computed by exact interval
arithmetic, and the ``k``-th binary word (length-lexicographic order) is
painted on the first floors of the tower over ``A_k``. Everything outside the
painted floors is labeled 0.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, RangeError
from .process import ENUM_CAP, FiniteDistribution, ProcessHandle

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def enum_word(k: int) -> str:
    """The ``k``-th word (1-based) of ``0, 1, 00, 01, 10, 11, 000, ...``."""
    if k < 1:
        raise RangeError("words are numbered from 1")
    length = (k + 1).bit_length() - 1
    idx = k + 1 - (1 << length)
    return format(idx, "b").zfill(length)


def circle_dist(x) -> np.ndarray:
    x = np.mod(x, 1.0)
    return np.minimum(x, 1.0 - x)


# ---------------------------------------------------------- interval sets


def _normalize(lo, hi):
    """Split arcs crossing 1 and merge overlaps into sorted disjoint intervals."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    shift = np.floor(lo)
    lo = lo - shift
    hi = hi - shift
    wrap = hi > 1.0
    lo = np.concatenate([lo, np.zeros(wrap.sum())])
    hi = np.concatenate([np.minimum(hi, 1.0), hi[wrap] - 1.0])
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return lo, hi
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    start = np.ones(lo.shape, dtype=bool)
    start[1:] = lo[1:] > reach[:-1]
    groups = np.cumsum(start) - 1
    out_hi = np.full(int(groups[-1]) + 1, -np.inf)
    np.maximum.at(out_hi, groups, hi)
    return lo[start], out_hi


def _subtract(lo, hi, clo, chi):
    """Set difference of two sorted disjoint interval unions."""
    res_lo, res_hi = [], []
    j = 0
    for a, b in zip(lo.tolist(), hi.tolist()):
        cur = a
        while j < len(clo) and chi[j] <= cur:
            j += 1
        jj = j
        while jj < len(clo) and clo[jj] < b:
            if clo[jj] > cur:
                res_lo.append(cur)
                res_hi.append(clo[jj])
            cur = max(cur, chi[jj])
            jj += 1
        if cur < b:
            res_lo.append(cur)
            res_hi.append(b)
    return np.array(res_lo), np.array(res_hi)


def _member(points, lo, hi):
    idx = np.searchsorted(lo, points, side="right") - 1
    ok = idx >= 0
    out = np.zeros(points.shape, dtype=bool)
    out[ok] = points[ok] < hi[idx[ok]]
    return out


# ---------------------------------------------------------- construction


@dataclass(frozen=True)
class RotationParams:
    alpha: float = GOLDEN
    n_max: int = 62
    delta_1: float = 2e-5
    decay: float = 1.0
    gap: float = 1.0           # guard between placed arcs, in units of delta_n
    return_budget: int = 1_000_000
    strict_decay: bool = False

    def delta(self, n: int) -> float:
        return self.delta_1 * self.decay ** (n - 1)

    def decay_condition(self) -> bool:
        """Whether sum_{m>n} m*delta_m < 0.1*delta_n holds for every n < n_max."""
        d = [self.delta(n) for n in range(1, self.n_max + 1)]
        for n in range(1, self.n_max):
            tail = sum(m * d[m - 1] for m in range(n + 1, self.n_max + 1))
            if not tail < 0.1 * d[n - 1]:
                return False
        return True

    def validate(self):
        if not 0 < self.alpha < 1:
            raise ConstructionError("alpha must lie in (0, 1)")
        if self.strict_decay and not self.decay_condition():
            raise ConstructionError("delta schedule violates the summability condition")
        for n in range(1, self.n_max + 1):
            gaps = circle_dist(self.alpha * np.arange(1, n + 1))
            if 2 * self.delta(n) * (1 + self.gap) >= gaps.min():
                raise ConstructionError(
                    f"delta_{n}={self.delta(n):.3g} too wide: orbit arcs of I_{n} overlap "
                    f"(min |i*alpha| = {gaps.min():.3g})"
                )


@dataclass
class RotationConstruction:
    params: RotationParams
    centers: np.ndarray            # x_n, n = 1..n_max
    A: tuple                       # (lo, hi)
    return_pieces: dict            # k -> (lo, hi) of A_k
    P1: tuple                      # (lo, hi)
    max_return: int

    def mass(self, k: int) -> float:
        lo, hi = self.return_pieces.get(k, (np.zeros(0), np.zeros(0)))
        return float(np.sum(hi - lo))

    @property
    def realized_depth(self) -> int:
        k = 0
        while self.mass(k + 1) > 0:
            k += 1
        return k

    def diagnostics(self) -> dict:
        return {
            "alpha": self.params.alpha,
            "n_max": self.params.n_max,
            "realized_depth": self.realized_depth,
            "max_return_time": self.max_return,
            "measure_A": float(np.sum(self.A[1] - self.A[0])),
            "measure_P1": float(np.sum(self.P1[1] - self.P1[0])),
            "decay_condition": self.params.decay_condition(),
            "min_return_mass": min(self.mass(k) for k in range(1, self.params.n_max + 1)),
        }


def _place(params: RotationParams):
    """Greedy: x_n is the middle of the first free gap for the whole orbit arc."""
    alpha = params.alpha
    occ_lo = np.zeros(0)
    occ_hi = np.zeros(0)
    centers = []
    for n in range(1, params.n_max + 1):
        r = params.delta(n)
        pad = r * (1 + params.gap)
        if occ_lo.size:
            shifts = alpha * np.arange(n + 1)
            f_lo, f_hi = _normalize(
                (occ_lo[None, :] - pad - shifts[:, None]).ravel(),
                (occ_hi[None, :] + pad - shifts[:, None]).ravel(),
            )
            gap_lo = np.concatenate([[0.0], f_hi])
            gap_hi = np.concatenate([f_lo, [1.0]])
            free = np.flatnonzero(gap_hi - gap_lo > 1e-12)
            if free.size == 0:
                raise ConstructionError(
                    f"no room for I_{n} (delta={r:.3g}); occupied measure "
                    f"{float(np.sum(occ_hi - occ_lo)):.4f}, placed {n - 1} intervals"
                )
            g = free[0]
            x = float((gap_lo[g] + gap_hi[g]) / 2)
        else:
            x = 0.5
        centers.append(x)
        seg = np.mod(x + alpha * np.arange(n + 1), 1.0)
        occ_lo, occ_hi = _normalize(
            np.concatenate([occ_lo, seg - r]), np.concatenate([occ_hi, seg + r])
        )
    return np.array(centers)


def _build_A(params, centers):
    alpha = params.alpha
    lo_all, hi_all = [], []
    for n, x in enumerate(centers, start=1):
        r = params.delta(n)
        piece_lo, piece_hi = _normalize([x - r, x + n * alpha - r], [x + r, x + n * alpha + r])
        later_lo, later_hi = [], []
        for m in range(n + 1, len(centers) + 1):
            rm = params.delta(m)
            pts = centers[m - 1] + alpha * np.arange(1, m)
            later_lo.append(pts - rm)
            later_hi.append(pts + rm)
        if later_lo:
            clo, chi = _normalize(np.concatenate(later_lo), np.concatenate(later_hi))
            piece_lo, piece_hi = _subtract(piece_lo, piece_hi, clo, chi)
        lo_all.append(piece_lo)
        hi_all.append(piece_hi)
    return _normalize(np.concatenate(lo_all), np.concatenate(hi_all))


def _return_partition(A, alpha, budget):
    """First-return times of every point of ``A`` by pushing arcs forward."""
    a_lo, a_hi = A
    frag_lo, frag_hi = a_lo.copy(), a_hi.copy()
    frag_off = np.zeros(frag_lo.shape)     # total rotation applied so far
    pieces = {}
    t = 0
    while frag_lo.size:
        t += 1
        if t > budget:
            raise ConstructionError(f"return-time budget {budget} exhausted with {frag_lo.size} arcs left")
        lo = frag_lo + alpha
        hi = frag_hi + alpha
        off = frag_off + alpha
        over = lo >= 1.0
        lo[over] -= 1.0
        hi[over] -= 1.0
        cross = hi > 1.0
        if cross.any():
            lo = np.concatenate([lo, np.zeros(cross.sum())])
            hi = np.concatenate([np.where(cross, 1.0, hi), hi[cross] - 1.0])
            off = np.concatenate([off, off[cross]])
        i0 = np.searchsorted(a_hi, lo, side="right")
        i1 = np.searchsorted(a_lo, hi, side="left")
        touch = i0 < i1
        keep_lo, keep_hi, keep_off = [lo[~touch]], [hi[~touch]], [off[~touch]]
        ret_lo, ret_hi = [], []
        for f in np.flatnonzero(touch).tolist():
            cur = lo[f]
            for j in range(i0[f], i1[f]):
                s, e = max(lo[f], a_lo[j]), min(hi[f], a_hi[j])
                if s > cur:
                    keep_lo.append([cur]), keep_hi.append([s]), keep_off.append([off[f]])
                if e > s:
                    ret_lo.append(s - off[f])
                    ret_hi.append(e - off[f])
                cur = max(cur, e)
            if cur < hi[f]:
                keep_lo.append([cur]), keep_hi.append([hi[f]]), keep_off.append([off[f]])
        if ret_lo:
            pieces[t] = _normalize(np.array(ret_lo), np.array(ret_hi))
        frag_lo = np.concatenate(keep_lo)
        frag_hi = np.concatenate(keep_hi)
        frag_off = np.concatenate(keep_off)
        tiny = frag_hi - frag_lo > 1e-15
        frag_lo, frag_hi, frag_off = frag_lo[tiny], frag_hi[tiny], frag_off[tiny]
    return pieces, t


def _paint(pieces, alpha):
    lo_all, hi_all = [], []
    for k, (lo, hi) in pieces.items():
        w = enum_word(k)
        for i, ch in enumerate(w):
            if ch == "1":
                lo_all.append(lo + i * alpha)
                hi_all.append(hi + i * alpha)
    if not lo_all:
        return np.zeros(0), np.zeros(0)
    return _normalize(np.concatenate(lo_all), np.concatenate(hi_all))


def build_rotation(params: RotationParams = RotationParams()) -> RotationConstruction:
    params.validate()
    centers = _place(params)
    A = _build_A(params, centers)
    pieces, tmax = _return_partition(A, params.alpha, params.return_budget)
    missing = [k for k in range(1, params.n_max + 1) if k not in pieces]
    if missing:
        raise ConstructionError(f"return-time sets A_k empty for k in {missing[:10]}")
    P1 = _paint(pieces, params.alpha)
    return RotationConstruction(params, centers, A, pieces, P1, tmax)


class RotationHandle(ProcessHandle):
    """``Z_n = 1`` iff ``x + n*alpha mod 1`` lies in the painted set, ``x`` uniform.

    Block laws are exact: cylinder sets are unions of arcs cut at the
    preimages of the painted set's endpoints.
    """

    tags = ("non_finitarily_markovian",)

    def __init__(self, construction: RotationConstruction):
        super().__init__()
        self.construction = construction
        self.alpha = construction.params.alpha
        self.P1 = construction.P1

    def labels_at(self, points):
        return _member(np.asarray(points), *self.P1).astype(np.uint8)

    def _dims(self, n):
        if n > ENUM_CAP:
            raise RangeError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
        if n == 0:
            return FiniteDistribution(0, np.ones(1))
        ends = np.concatenate([self.P1[0], self.P1[1]])
        cuts = np.mod(ends[None, :] - self.alpha * np.arange(n)[:, None], 1.0).ravel()
        cuts = np.unique(np.concatenate([cuts, [0.0, 1.0]]))
        widths = np.diff(cuts)
        mids = cuts[:-1] + widths / 2
        codes = np.zeros(mids.shape, dtype=np.int64)
        for i in range(n):
            codes = (codes << 1) | self.labels_at(np.mod(mids + i * self.alpha, 1.0))
        probs = np.bincount(codes, weights=widths, minlength=1 << n)
        # float rounding of the cut points only
        return FiniteDistribution(n, probs / probs.sum(), 1e-12 * n)

    def _sample(self, length, rng):
        x = rng.random()
        out = np.empty(length, dtype=np.uint8)
        chunk = 1 << 20
        for start in range(0, length, chunk):
            idx = np.arange(start, min(length, start + chunk), dtype=np.float64)
            pts = np.mod(x + idx * self.alpha, 1.0)
            out[start:start + idx.size] = self.labels_at(pts)
        return out

    def describe(self):
        params = dataclasses.asdict(self.construction.params)
        return {**super().describe(), "params": params, "diagnostics": self.construction.diagnostics()}


_CACHE = {}


def rotation_process(params: RotationParams = RotationParams()) -> RotationHandle:
    if params not in _CACHE:
        _CACHE[params] = build_rotation(params)
    return RotationHandle(_CACHE[params])

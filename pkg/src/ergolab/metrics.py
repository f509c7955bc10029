"""Empirical block laws, entropy rates and the sampled ergodicity certificate."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import RangeError, ShapeError
from .process import FiniteDistribution, MarkovChainSpec, as_word, child_seed

MAX_PLUGIN_K = 12


@dataclass(frozen=True)
class BlockEmpirics:
    source_length: int
    k: int
    dist: FiniteDistribution

    @property
    def rates(self) -> np.ndarray:
        return self.dist.probs


def block_counts(x, k: int, window: int | None = None) -> np.ndarray:
    """Counts of k-blocks starting at positions ``0 .. window-1`` (default: all)."""
    x = as_word(x)
    if k > x.size:
        raise RangeError(f"block length {k} exceeds word length {x.size}")
    if window is None:
        return _kernels.block_counts(x, k)
    if window < 1 or window > x.size - k + 1:
        raise RangeError(f"window {window} outside 1..{x.size - k + 1}")
    return _kernels.block_counts(x[: window + k - 1], k)


def block_empirics(x, k: int) -> BlockEmpirics:
    x = as_word(x)
    counts = block_counts(x, k)
    total = x.size - k + 1
    return BlockEmpirics(x.size, k, FiniteDistribution(k, counts / total))


def empirical_l1(x, d: FiniteDistribution) -> float:
    return float(np.abs(block_empirics(x, d.n).rates - d.probs).sum())


def pair_block_distance(u, v, k: int, window: int | None = None) -> float:
    """L1 distance between sliding k-block rates of two equal-length words.

    With ``window`` given, only blocks starting in the first ``window``
    positions count and both are normalized by ``window`` (so a j-block
    distance can be compared against a k-block distance on the same
    positions).
    """
    u, v = as_word(u), as_word(v)
    if u.size != v.size:
        raise ShapeError(f"word lengths differ: {u.size} vs {v.size}")
    w = window if window is not None else u.size - k + 1
    cu = block_counts(u, k, window)
    cv = block_counts(v, k, window)
    return float(np.abs(cu - cv).sum() / w)


def length_correction_bound(d_k: float, n: int, k: int, m: int) -> float:
    """Upper bound on the full-window m-block distance from the k-block one."""
    return d_k * (n - k + 1) / (n - m + 1) + (k - m) * 2**m / (n - m + 1)


# ------------------------------------------------------------------ entropy


def _h2(p):
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return np.nan_to_num(h)


def conditional_entropy(d: FiniteDistribution) -> float:
    """H(last symbol | first n-1 symbols) of an n-block law, in bits."""
    if d.n < 1:
        raise RangeError("need a block law of length >= 1")
    pairs = d.probs.reshape(-1, 2)
    ctx = pairs.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.where(ctx > 0, pairs[:, 1] / ctx, 0.0)
    return float(np.dot(ctx, _h2(p1)))


def entropy_rate_markov(chain: MarkovChainSpec) -> float:
    pi = chain.stationary.probs
    return float(np.dot(pi, _h2(chain.p1)))


def entropy_rate_plugin(x, k: int) -> float:
    """Plug-in H(X_0 | previous k symbols) from sliding (k+1)-block rates."""
    if k > MAX_PLUGIN_K:
        raise RangeError(f"k={k} exceeds the plug-in cap {MAX_PLUGIN_K}")
    x = as_word(x)
    if x.size < 16 * 2 ** (k + 1):
        warnings.warn(
            f"plug-in entropy at k={k} from only {x.size} symbols is badly undersampled",
            stacklevel=2,
        )
    return conditional_entropy(block_empirics(x, k + 1).dist)


def plugin_bias_bound(n_blocks: int, k: int) -> float:
    """Miller-Madow size of the downward plug-in bias, in bits."""
    return (2**k) / (2 * n_blocks * math.log(2))


# --------------------------------------------------- ergodicity certificate


def hoeffding_radius(n: int, confidence: float) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass
class StageCheck:
    k: int
    N: int
    eps: float
    pairs: int
    fail_fraction: float
    radius: float
    passed: bool
    distances_mean: float


@dataclass
class ErgodicityCertificate:
    stages: list = field(default_factory=list)
    partial: bool = False

    @property
    def passed(self) -> bool:
        return not self.partial and all(s.passed for s in self.stages)

    def first_failure(self):
        for s in self.stages:
            if not s.passed:
                return s.k
        return None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "partial": self.partial,
            "stages": [asdict(s) for s in self.stages],
        }


def typicality_check(handle, k: int, N: int, eps: float, pairs: int, seed,
                     confidence: float = 0.99) -> StageCheck:
    """Sample independent path pairs and test the k-block distance against ``eps``.

    Passes when the failing fraction is at most ``eps`` plus the one-sided
    Hoeffding slack at ``confidence``.
    """
    if N <= k * k:
        raise RangeError(f"need N > k^2, got N={N}, k={k}")
    dists = np.empty(pairs)
    for i in range(pairs):
        u = handle.sample(N, child_seed(seed, i, 0))
        v = handle.sample(N, child_seed(seed, i, 1))
        dists[i] = pair_block_distance(u, v, k)
    fail = float(np.mean(dists >= eps))
    radius = math.sqrt(math.log(1.0 / (1.0 - confidence)) / (2.0 * pairs))
    return StageCheck(k, N, eps, pairs, fail, radius, fail <= eps + radius, float(dists.mean()))


def ergodicity_certificate(handle, stages, pairs_per_stage: int, seed,
                           confidence: float = 0.99, budget: int | None = None) -> ErgodicityCertificate:
    """Run the sampled certificate over ``stages = [(k, N_k, eps_k), ...]``.

    ``budget`` caps the total number of sampled symbols; running out marks the
    certificate partial.
    """
    stages = list(stages)
    for (k, N, eps) in stages:
        if N <= k * k:
            raise RangeError(f"stage k={k}: need N_k > k^2, got {N}")
    epss = [e for (_, _, e) in stages]
    if any(b >= a for a, b in zip(epss, epss[1:])):
        raise ValueError("eps_k must be strictly decreasing")
    cert = ErgodicityCertificate()
    used = 0
    for i, (k, N, eps) in enumerate(stages):
        cost = 2 * N * pairs_per_stage
        if budget is not None and used + cost > budget:
            cert.partial = True
            break
        used += cost
        cert.stages.append(
            typicality_check(handle, k, N, eps, pairs_per_stage, child_seed(seed, i), confidence)
        )
    return cert

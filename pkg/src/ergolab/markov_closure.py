"""Order-N Markov chain that shares a process's N-block law."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentMarginalsError
from .process import (
    FiniteDistribution,
    MarkovChainSpec,
    MarkovHandle,
    ProcessHandle,
    code_word,
    communicating_classes,
    marginalize,
    markov_exact_dims,
    tv_block_distance,
    _context_graph,
)


@dataclass
class ClosureResult:
    chain: MarkovChainSpec
    source_error: float
    irreducibility_witness: dict

    def handle(self) -> MarkovHandle:
        return MarkovHandle(self.chain)

    def to_json(self) -> dict:
        return {
            "chain": self.chain.to_json(),
            "source_error": self.source_error,
            "irreducibility": self.irreducibility_witness,
        }


def close_to_markov(handle: ProcessHandle, N: int) -> ClosureResult:
    """Transitions ``P(next | last N) = P_X(x_1^N z) / P_X(x_1^N)`` on positive contexts."""
    if N < 1:
        raise ValueError("N must be positive")
    ext = handle.dims(N + 1)
    base = handle.dims(N)
    pairs = ext.probs.reshape(1 << N, 2)
    mass = pairs.sum(axis=1)
    bad = np.flatnonzero((base.probs > 1e-300) & (mass <= 0))
    if bad.size:
        raise InconsistentMarginalsError(
            f"contexts {[code_word(int(c), N) for c in bad[:5]]} have positive "
            f"{N}-block mass but no {N + 1}-block extension"
        )
    pos = mass > 0
    p1 = np.full(1 << N, 0.5)
    p1[pos] = pairs[pos, 1] / mass[pos]
    p1 = np.clip(p1, 0.0, 1.0)
    # marginal mismatch between the source's N- and (N+1)-block laws
    mismatch = float(np.abs(marginalize(ext, N, "prefix").probs - base.probs).sum())
    source_error = max(ext.error_bound, base.error_bound) + mismatch
    chain = MarkovChainSpec(N, p1)
    stat = chain.stationary
    chain = MarkovChainSpec(N, p1, FiniteDistribution(N, stat.probs, source_error))
    idx = np.flatnonzero(chain.positive)
    G = _context_graph(N, p1)[idx][:, idx]
    classes = communicating_classes(G)
    witness = {
        "positive_contexts": int(idx.size),
        "classes": len(classes),
        "irreducible": len(classes) == 1,
        "shift_residual": chain.shift_residual(),
        "tv_to_source": tv_block_distance(markov_exact_dims(chain, N), base),
    }
    chain.check()
    return ClosureResult(chain, source_error, witness)

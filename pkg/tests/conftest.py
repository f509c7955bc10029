import itertools

import numpy as np
import pytest
from hypothesis import settings

from ergolab._kernels import BACKENDS

settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile("ci")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


def brute_hidden_dims(pi, P, labels, n):
    """Sum over every hidden state path of length n (small chains only)."""
    pi, P, labels = np.asarray(pi), np.asarray(P), np.asarray(labels)
    S = len(pi)
    out = np.zeros(1 << n)
    for path in itertools.product(range(S), repeat=n):
        p = pi[path[0]]
        for a, b in zip(path, path[1:]):
            p *= P[a, b]
        if p == 0:
            continue
        code = 0
        for s in path:
            code = (code << 1) | int(labels[s])
        out[code] += p
    return out


def brute_markov_dims(order, p1, stationary, n):
    """Block law of an order-k chain by enumerating all n-words directly."""
    out = np.zeros(1 << n)
    for code in range(1 << n):
        w = [(code >> (n - 1 - i)) & 1 for i in range(n)]
        if n <= order:
            # marginal of the stationary k-block law
            tail = order - n
            out[code] = stationary[code << tail: (code + 1) << tail].sum()
            continue
        ctx = 0
        for b in w[:order]:
            ctx = (ctx << 1) | b
        p = stationary[ctx]
        mask = (1 << order) - 1
        for b in w[order:]:
            q = p1[ctx]
            p *= q if b else 1 - q
            ctx = ((ctx << 1) | b) & mask
        out[code] = p
    return out


def naive_occurrences(s, u):
    return [i for i in range(len(s) - len(u) + 1) if s[i:i + len(u)] == u]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance")
        for line in mod.LINES:
            terminalreporter.write_line(line)

"""Classifiers ``g_n: {0,1}^n -> {YES, NO}`` and the external line protocol.

Protocol (one request in flight per subprocess)::

    -> HELLO ergolab-classifier-1      <- OK <name>
    -> CLASSIFY 0110...                <- YES | NO
"""
from __future__ import annotations

import enum
import math
import os
import select
import shlex
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ClassifierError
from .process import as_word, word_str

PROTOCOL = "ergolab-classifier-1"


class Verdict(str, enum.Enum):
    YES = "YES"
    NO = "NO"

    def __str__(self):
        return self.value


@dataclass
class ClassifierHandle:
    name: str
    fn: Callable
    deterministic: bool = True

    def classify(self, word) -> Verdict:
        v = self.fn(as_word(word))
        return v if isinstance(v, Verdict) else Verdict(v)

    __call__ = classify

    def close(self):
        closer = getattr(self.fn, "close", None)
        if closer is not None:
            closer()


def always(verdict: Verdict) -> ClassifierHandle:
    v = Verdict(verdict)
    return ClassifierHandle(f"always-{v.value.lower()}", lambda x: v)


# ------------------------------------------------------ frequency tester


def order_statistics(x, max_order: int):
    """Worst standardized gap per candidate order ``k = 0..max_order``.

    For every context ``s`` of length ``max_order + 1`` the empirical
    ``P(1 | s)`` is compared with ``P(1 | last k symbols of s)``; the gap is
    divided by ``sqrt(log n / n_s)``.
    """
    x = as_word(x)
    n = x.size
    L = max_order + 1
    counts = _kernels.block_counts(x, L + 1).reshape(1 << L, 2).astype(np.float64)
    ns = counts.sum(axis=1)
    seen = ns > 0
    p_full = np.where(seen, counts[:, 1] / np.where(seen, ns, 1), 0.0)
    scale = np.sqrt(math.log(max(n, 2)) / np.where(seen, ns, 1))
    stats = []
    for k in range(max_order + 1):
        ck = counts.reshape(1 << (L - k), 1 << k, 2).sum(axis=0)
        nk = ck.sum(axis=1)
        pk = np.where(nk > 0, ck[:, 1] / np.where(nk > 0, nk, 1), 0.0)
        suffix = np.arange(1 << L) & ((1 << k) - 1)
        gap = np.abs(p_full - pk[suffix]) / scale
        stats.append(float(gap[seen].max()) if seen.any() else 0.0)
    return stats


def freq_markov_tester(max_order: int = 4, c: float = 1.0) -> ClassifierHandle:
    """YES iff some order ``k <= max_order`` explains all (max_order+1)-contexts.

    Order ``k`` is accepted when, for every observed context ``s``,
    ``|P(1|s) - P(1|suffix_k(s))| <= c * sqrt(log n / n_s)``.
    Inputs too short to hold one (max_order+2)-block get YES.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")

    def fn(x):
        if x.size < max_order + 2:
            return Verdict.YES
        stats = order_statistics(x, max_order)
        return Verdict.YES if min(stats) <= c else Verdict.NO

    h = ClassifierHandle(f"freq:{max_order}:{c:g}", fn)
    h.max_order = max_order
    h.c = c
    return h


def estimated_order(x, max_order: int = 4, c: float = 1.0):
    stats = order_statistics(x, max_order)
    for k, s in enumerate(stats):
        if s <= c:
            return k
    return None


# ------------------------------------------------------- external programs


class _Subprocess:
    def __init__(self, argv, timeout):
        self.argv = argv
        self.timeout = timeout
        self.lock = threading.Lock()
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, bufsize=0,
            )
        except OSError as exc:
            raise ClassifierError(f"cannot start {argv!r}: {exc}") from exc
        self._buf = b""
        reply = self.request(f"HELLO {PROTOCOL}")
        if not reply.startswith("OK"):
            self.close()
            raise ClassifierError(f"bad handshake reply {reply!r}")
        self.name = reply[2:].strip() or " ".join(argv)

    def _readline(self):
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                raise ClassifierError(f"external classifier timed out after {self.timeout}s")
            chunk = os.read(fd, 65536)
            if not chunk:
                code = self.proc.poll()
                raise ClassifierError(f"external classifier closed its output (exit status {code})")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("ascii", "replace").rstrip("\r")

    def request(self, line):
        with self.lock:
            try:
                self.proc.stdin.write((line + "\n").encode("ascii"))
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ClassifierError(f"external classifier exited: {exc}") from exc
            return self._readline()

    def __call__(self, x):
        reply = self.request("CLASSIFY " + word_str(x))
        if reply not in ("YES", "NO"):
            raise ClassifierError(f"protocol violation: {reply!r}")
        return Verdict(reply)

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
                self.proc.wait(timeout=2)
            except Exception:
                self.proc.kill()


def external_classifier(command, timeout: float = 10.0) -> ClassifierHandle:
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    proc = _Subprocess(argv, timeout)
    return ClassifierHandle(f"exec:{proc.name}", proc, deterministic=True)


def serve(classifier: ClassifierHandle, stdin=None, stdout=None):
    """Answer protocol requests on standard streams until EOF."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.rstrip("\r\n")
        if line.startswith("HELLO"):
            stdout.write(f"OK {classifier.name}\n")
        elif line.startswith("CLASSIFY"):
            word = line[len("CLASSIFY"):].strip()
            stdout.write(f"{classifier.classify(word).value}\n")
        else:
            stdout.write("ERR\n")
        stdout.flush()


def builtin_classifier(spec: str) -> ClassifierHandle:
    """``freq:K[:c]``, ``always-yes``, ``always-no`` or ``exec:<command>``."""
    if spec.startswith("exec:"):
        return external_classifier(spec[5:])
    if spec in ("always-yes", "yes"):
        return always(Verdict.YES)
    if spec in ("always-no", "no"):
        return always(Verdict.NO)
    if spec.startswith("freq"):
        parts = spec.split(":")
        k = int(parts[1]) if len(parts) > 1 and parts[1] else 4
        c = float(parts[2]) if len(parts) > 2 else 1.0
        return freq_markov_tester(k, c)
    raise ValueError(f"unknown classifier {spec!r}")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    serve(builtin_classifier(argv[0] if argv else "freq:4"))


if __name__ == "__main__":
    main()

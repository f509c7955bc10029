"""Pure-Python/numpy versions of the compiled kernels.

Same signatures and bit-for-bit identical outputs as ``_ckernels``; used when
the extension is not built or ``ERGOLAB_PURE=1`` is set.
"""
import numpy as np


def block_codes(bits, k):
    bits = np.asarray(bits, dtype=np.int64)
    m = bits.shape[0] - k + 1
    if m <= 0:
        return np.empty(0, dtype=np.int64)
    codes = np.zeros(m, dtype=np.int64)
    for j in range(k):
        codes = (codes << 1) | bits[j:j + m]
    return codes


def block_counts(bits, k):
    if k == 0:
        return np.array([len(bits) + 1], dtype=np.int64)
    codes = block_codes(bits, k)
    return np.bincount(codes, minlength=1 << k).astype(np.int64)


def sample_context_chain(p1, k, init_code, u):
    mask = (1 << k) - 1
    ctx = int(init_code) & mask
    p1 = [float(x) for x in p1]
    out = np.empty(len(u), dtype=np.uint8)
    for i, ui in enumerate(u.tolist()):
        b = 1 if ui < p1[ctx] else 0
        out[i] = b
        ctx = ((ctx << 1) | b) & mask
    return out


def sample_finite_chain(cum, init, u):
    n = len(u)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    rows = [list(r) for r in np.asarray(cum).tolist()]
    S = len(rows[0])
    s = int(init)
    out[0] = s
    for i in range(1, n):
        ui = u[i]
        row = rows[s]
        j = 0
        while j < S - 1 and ui >= row[j]:
            j += 1
        s = j
        out[i] = s
    return out


def sample_walk_chain(init, u):
    n = len(u)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    s = int(init)
    out[0] = s
    ul = u.tolist()
    for i in range(1, n):
        if s == 0:
            s = 1
        elif s == 1:
            s = 2
        elif ul[i] < 0.5:
            s = 0
        else:
            s += 1
        out[i] = s
    return out

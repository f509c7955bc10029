# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`ergolab._pykernels`."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def block_codes(const unsigned char[::1] bits, int k):
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t m = n - k + 1
    cdef Py_ssize_t i
    cdef long long code = 0
    cdef long long mask = (1LL << k) - 1
    out = np.empty(m if m > 0 else 0, dtype=np.int64)
    if m <= 0:
        return out
    cdef long long[::1] o = out
    if k == 0:
        o[:] = 0
        return out
    for i in range(k - 1):
        code = (code << 1) | bits[i]
    for i in range(k - 1, n):
        code = ((code << 1) | bits[i]) & mask
        o[i - k + 1] = code
    return out


def block_counts(const unsigned char[::1] bits, int k):
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t i
    cdef long long code = 0
    cdef long long mask = (1LL << k) - 1
    out = np.zeros(1 << k, dtype=np.int64)
    cdef long long[::1] o = out
    if n < k:
        return out
    if k == 0:
        o[0] = n + 1
        return out
    for i in range(k - 1):
        code = (code << 1) | bits[i]
    for i in range(k - 1, n):
        code = ((code << 1) | bits[i]) & mask
        o[code] += 1
    return out


def sample_context_chain(const double[::1] p1, int k, long long init_code,
                         const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef long long mask = (1LL << k) - 1
    cdef long long ctx = init_code & mask
    cdef unsigned char b
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    for i in range(n):
        b = 1 if u[i] < p1[ctx] else 0
        o[i] = b
        ctx = ((ctx << 1) | b) & mask
    return out


def sample_finite_chain(const double[:, ::1] cum, long long init,
                        const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t S = cum.shape[1]
    cdef Py_ssize_t i, j
    cdef long long s = init
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    if n == 0:
        return out
    o[0] = s
    for i in range(1, n):
        j = 0
        while j < S - 1 and u[i] >= cum[s, j]:
            j += 1
        s = j
        o[i] = s
    return out


def sample_walk_chain(long long init, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef long long s = init
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    if n == 0:
        return out
    o[0] = s
    for i in range(1, n):
        if s == 0:
            s = 1
        elif s == 1:
            s = 2
        elif u[i] < 0.5:
            s = 0
        else:
            s = s + 1
        o[i] = s
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot-loop kernels.

Line-for-line translation of ``_kernels_py``; that module is the semantics
reference and the two must return bit-identical tuples for identical inputs
(all state and accumulators are integers).  No tracing here; tracing forces
the pure-Python backend.
"""

import numpy as np


def run_b0(const unsigned char[::1] s, const unsigned char[::1] e,
           long long d, long long warm, hist):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t t, m = 0
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    for t in range(n):
        d += 1
        if s[t] and e[t]:
            if warm:
                out[m] = d
                m += 1
            else:
                warm = 1
            d = 0
    if hist is not None:
        hist[0] += n
    return out_arr[:m].copy(), d, warm


def run_b1_partial(const unsigned char[::1] s, const unsigned char[::1] e,
                   long long tau, long long b, long long d, long long warm, hist):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t t, m = 0
    cdef long long h1 = 0
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    for t in range(n):
        d += 1
        if b == 0 and e[t]:
            b = 1
        h1 += b
        if b and s[t] and d >= tau:
            if warm:
                out[m] = d
                m += 1
            else:
                warm = 1
            d = 0
            b = 0
    if hist is not None:
        hist[0] += n - h1
        hist[1] += h1
    return out_arr[:m].copy(), b, d, warm


def run_b1_full(const unsigned char[::1] s, const unsigned char[::1] e,
                long long tau, long long b, long long d, long long warm,
                long long phase, hist):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t t, m = 0
    cdef long long h1 = 0
    cdef int trial
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    for t in range(n):
        d += 1
        if b == 0 and e[t]:
            b = 1
        h1 += b
        trial = 0
        if phase == 0:
            if b:
                if d >= tau:
                    trial = 1
                else:
                    phase = 1
        elif phase == 1:
            if d >= tau:
                trial = 1
        elif b:
            trial = 1
        if trial:
            b = 0
            if s[t]:
                if warm:
                    out[m] = d
                    m += 1
                else:
                    warm = 1
                d = 0
                phase = 0
            else:
                phase = 2
    if hist is not None:
        hist[0] += n - h1
        hist[1] += h1
    return out_arr[:m].copy(), b, d, warm, phase


def run_binf_partial(const unsigned char[::1] s, const unsigned char[::1] e,
                     long long low, long long high, long long low_count,
                     long long cycle, long long count_defer,
                     long long b, long long d, long long warm, long long pos,
                     hist):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t t, m = 0
    cdef long long defer = 0
    cdef long long cur
    cdef bint track = hist is not None
    cdef long long[256] hloc
    cdef int i
    for i in range(256):
        hloc[i] = 0
    out_arr = np.empty(n, dtype=np.int64)
    tau_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long[::1] taus = tau_arr
    for t in range(n):
        d += 1
        b += e[t]
        if track:
            hloc[b if b < 255 else 255] += 1
        cur = low if pos < low_count else high
        if d > cur and s[t]:
            if b:
                if warm:
                    out[m] = d
                    taus[m] = cur
                    m += 1
                else:
                    warm = 1
                d = 0
                b -= 1
                pos += 1
                if pos == cycle:
                    pos = 0
            elif count_defer:
                defer += 1
    if track:
        for i in range(256):
            hist[i] += hloc[i]
    return out_arr[:m].copy(), tau_arr[:m].copy(), defer, b, d, warm, pos


def run_binf_full(const unsigned char[::1] s, const unsigned char[::1] e,
                  long long low, long long high, long long low_count,
                  long long cycle,
                  long long b, long long d, long long warm, long long pos,
                  hist):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t t, m = 0
    cdef long long defer = 0
    cdef long long cur
    cdef bint track = hist is not None
    cdef long long[256] hloc
    cdef int i
    for i in range(256):
        hloc[i] = 0
    out_arr = np.empty(n, dtype=np.int64)
    tau_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long[::1] taus = tau_arr
    for t in range(n):
        d += 1
        b += e[t]
        if track:
            hloc[b if b < 255 else 255] += 1
        cur = low if pos < low_count else high
        if d > cur:
            if b:
                b -= 1
                if s[t]:
                    if warm:
                        out[m] = d
                        taus[m] = cur
                        m += 1
                    else:
                        warm = 1
                    d = 0
                    pos += 1
                    if pos == cycle:
                        pos = 0
            else:
                defer += 1
    if track:
        for i in range(256):
            hist[i] += hloc[i]
    return out_arr[:m].copy(), tau_arr[:m].copy(), defer, b, d, warm, pos

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the classical oracles."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lg_string_extrema(int n, const long[::1] ii, const long[::1] jj, const double[::1] coeff, double offset=0.0):
    """Min and max of ``offset + sum_k coeff[k] q[ii[k]] q[jj[k]]`` over ``q in {+1,-1}^n``.

    Indices are 0-based.  The string is invariant under ``q -> -q`` so the
    first value is held at +1.
    """
    cdef Py_ssize_t m = coeff.shape[0]
    cdef unsigned long h, count
    cdef Py_ssize_t k
    cdef double v, lo = 1e300, hi = -1e300
    cdef int qi, qj
    if n < 1:
        raise ValueError("need n >= 1")
    count = 1UL << (n - 1)
    for h in range(count):
        v = offset
        for k in range(m):
            # bit b of h holds slot b + 1; slot 0 is fixed to +1
            qi = 1 if ii[k] == 0 else 1 - 2 * <int>((h >> (ii[k] - 1)) & 1)
            qj = 1 if jj[k] == 0 else 1 - 2 * <int>((h >> (jj[k] - 1)) & 1)
            v += coeff[k] * qi * qj
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    return lo, hi


def ontic_sequence_joint(const double[::1] mu, const double[:, :, ::1] xi,
                         const double[:, :, :, ::1] gamma,
                         const long[::1] seq):
    """Exact joint outcome table of a sequence of measurements on a finite ontic model.

    ``xi[m, s, o]`` is the outcome kernel of measurement ``m``, and
    ``gamma[m, o, s, s2]`` its disturbance kernel.  Returns a flat array of
    length ``2**len(seq)``; outcome index 0 is +1 and the first measurement
    is the most significant bit.
    """
    cdef Py_ssize_t S = mu.shape[0]
    cdef Py_ssize_t T = seq.shape[0]
    cdef Py_ssize_t t, b, o, s, s2, width = 1
    cdef long m
    cdef double w
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cur = np.empty((1, S))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] nxt
    for s in range(S):
        cur[0, s] = mu[s]
    for t in range(T):
        m = seq[t]
        nxt = np.zeros((2 * width, S))
        for b in range(width):
            for o in range(2):
                for s in range(S):
                    w = cur[b, s] * xi[m, s, o]
                    if w == 0.0:
                        continue
                    if t == T - 1:
                        nxt[2 * b + o, 0] += w
                    else:
                        for s2 in range(S):
                            nxt[2 * b + o, s2] += w * gamma[m, o, s, s2]
        cur = nxt
        width *= 2
    return np.ascontiguousarray(cur[:, 0])

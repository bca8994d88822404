"""NumPy implementations of the compiled kernels (same signatures)."""

import numpy as np


def lg_string_extrema(n, ii, jj, coeff, offset=0.0):
    if n < 1:
        raise ValueError("need n >= 1")
    h = np.arange(1 << (n - 1), dtype=np.int64)
    # column 0 is fixed to +1 by the global flip symmetry
    bits = (h[:, None] >> np.arange(n - 1)) & 1
    q = np.ones((h.size, n), dtype=np.int8)
    q[:, 1:] = 1 - 2 * bits
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    v = (q[:, ii] * q[:, jj]) @ np.asarray(coeff, dtype=float) + offset
    return float(v.min()), float(v.max())


def ontic_sequence_joint(mu, xi, gamma, seq):
    cur = np.asarray(mu, dtype=float)[None, :]
    xi = np.asarray(xi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    seq = list(seq)
    for t, m in enumerate(seq):
        # branch weights for both outcomes, shape (width, 2, S)
        w = cur[:, None, :] * xi[m].T[None, :, :]
        if t == len(seq) - 1:
            cur = w.sum(axis=2).reshape(-1, 1)
        else:
            cur = np.einsum("bos,ost->bot", w, gamma[m]).reshape(-1, cur.shape[1])
    return np.ascontiguousarray(cur[:, 0])

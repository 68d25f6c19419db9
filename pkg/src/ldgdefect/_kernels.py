"""Fused lattice kernels for the solver's inner loop.

Same arithmetic as ``energy.node_terms`` / ``energy.discrete_gradient``,
compiled with numba and evaluated in a single pass over the lattice.
"""

import numpy as np
from numba import njit

_S2 = np.sqrt(2.0)
_S6 = np.sqrt(6.0)


@njit(cache=True)
def _square(q, out):
    q1, q2, q3, q4, q5 = q[0], q[1], q[2], q[3], q[4]
    out[0] = (_S6 / 12.0) * (2.0 * (q1 * q1 - q2 * q2 - q3 * q3) + q4 * q4 + q5 * q5)
    out[1] = -(_S6 / 3.0) * q1 * q2 + (_S2 / 4.0) * (q4 * q4 - q5 * q5)
    out[2] = -(_S6 / 3.0) * q1 * q3 + (_S2 / 2.0) * q4 * q5
    out[3] = (_S6 / 6.0) * q1 * q4 + (_S2 / 2.0) * (q2 * q4 + q3 * q5)
    out[4] = (_S6 / 6.0) * q1 * q5 + (_S2 / 2.0) * (q3 * q4 - q2 * q5)


@njit(cache=True)
def terms_and_gradient(v, mask, h, inv_eps2, a2, b2, c2, c_off, terms, grad, want_grad):
    n0, n1, n2 = v.shape[0], v.shape[1], v.shape[2]
    h3 = h * h * h
    sq = np.empty(5)
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                el = 0.0
                if i + 1 < n0:
                    s = 0.0
                    for c in range(5):
                        d = v[i + 1, j, k, c] - v[i, j, k, c]
                        s += d * d
                    el += s
                if j + 1 < n1:
                    s = 0.0
                    for c in range(5):
                        d = v[i, j + 1, k, c] - v[i, j, k, c]
                        s += d * d
                    el += s
                if k + 1 < n2:
                    s = 0.0
                    for c in range(5):
                        d = v[i, j, k + 1, c] - v[i, j, k, c]
                        s += d * d
                    el += s
                q = v[i, j, k]
                _square(q, sq)
                t2 = 0.0
                t3 = 0.0
                for c in range(5):
                    t2 += q[c] * q[c]
                    t3 += sq[c] * q[c]
                fb = -0.5 * a2 * t2 - b2 / 3.0 * t3 + 0.25 * c2 * t2 * t2 + c_off
                terms[i, j, k] = 0.5 * h * el + fb * h3 * inv_eps2
                if not want_grad:
                    continue
                if mask[i, j, k]:
                    for c in range(5):
                        grad[i, j, k, c] = 0.0
                    continue
                lin = -a2 + c2 * t2
                for c in range(5):
                    acc = 0.0
                    qc = q[c]
                    if i > 0:
                        acc += qc - v[i - 1, j, k, c]
                    if i + 1 < n0:
                        acc += qc - v[i + 1, j, k, c]
                    if j > 0:
                        acc += qc - v[i, j - 1, k, c]
                    if j + 1 < n1:
                        acc += qc - v[i, j + 1, k, c]
                    if k > 0:
                        acc += qc - v[i, j, k - 1, c]
                    if k + 1 < n2:
                        acc += qc - v[i, j, k + 1, c]
                    grad[i, j, k, c] = h * acc + h3 * inv_eps2 * (lin * qc - b2 * sq[c])

"""Independent reference implementations used only by the tests."""

import numpy as np


def jacobi_eigh(m, tol=1e-15, sweeps=50):
    """Cyclic Jacobi rotations for a symmetric 3x3 matrix.

    Returns eigenvalues in descending order and eigenvectors as columns.
    """
    a = np.array(m, dtype=float)
    v = np.eye(3)
    for _ in range(sweeps):
        off = sum(a[p, q] ** 2 for p in range(3) for q in range(p + 1, 3))
        if off < tol**2:
            break
        for p in range(3):
            for q in range(p + 1, 3):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                r = np.eye(3)
                r[p, p] = r[q, q] = c
                r[p, q] = s
                r[q, p] = -s
                a = r.T @ a @ r
                v = v @ r
    w = np.diag(a)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def brute_dist_to_manifold(m, s_plus, n_dirs=200):
    """min over directors of |M - s(nn - I/3)|_F by sampling plus local polish."""
    from scipy.optimize import minimize

    def f(ang):
        th, ph = ang
        n = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        d = m - s_plus * (np.outer(n, n) - np.eye(3) / 3.0)
        return float(np.sum(d * d))

    rng = np.random.default_rng(1)
    starts = np.column_stack([np.arccos(rng.uniform(-1, 1, n_dirs)), rng.uniform(0, 2 * np.pi, n_dirs)])
    best = min(starts, key=f)
    res = minimize(f, best, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return np.sqrt(res.fun)


def random_traceless(rng, scale=1.0):
    a = rng.standard_normal((3, 3)) * scale
    a = 0.5 * (a + a.T)
    return a - np.trace(a) / 3.0 * np.eye(3)

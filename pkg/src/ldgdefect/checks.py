"""Solver-independent calibration measurements.

Each function returns a plain dict that is stored in the run report and
judged later by :mod:`ldgdefect.criteria`.
"""

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.transform import Rotation

from . import energy
from . import qtensor as qt
from .analysis import SphereMap, degree_raw, tangent_fit
from .field import GridSpec, QField, hedgehog_field, outer_layer, sample
from .material import MaterialParams, bulk_energy
from .sphere import icosphere

# integral of 1/|x|^2 over the unit cube centred at the origin
CUBE_INVERSE_SQUARE = 7.674124222443732


def hedgehog_cell_energy(s_plus, side):
    """Dirichlet energy of the hedgehog inside a centred cube of edge ``side``.

    The density is 2 s_plus^2 / |x|^2, and the cube integral scales linearly.
    """
    return 2.0 * s_plus**2 * CUBE_INVERSE_SQUARE * side


def hedgehog_ratio(n_cells=96, radii=(0.25, 0.5, 0.75), p=None):
    """Ball ratios of the sampled hedgehog with the centre cells removed.

    The removed nodes are those whose dual cells contain the origin (8 for
    even n, 1 for odd n); their exact continuum energy is added back.
    """
    p = MaterialParams() if p is None else p
    grid = GridSpec(n_cells=n_cells)
    fld = sample(grid, lambda x: hedgehog_field(x, p.s_plus), ball_radius=1.0)
    side = 2.0 * grid.h if n_cells % 2 == 0 else grid.h
    cell = hedgehog_cell_energy(p.s_plus, side)
    target = 8.0 * np.pi * p.s_plus**2
    rows = []
    for R in radii:
        raw = energy.ball_ratio(fld, p, R)
        excl = energy.ball_ratio(fld, p, R, exclude_center=True)
        rows.append({"R": float(R), "raw": raw, "corrected": excl + cell / R,
                     "target": target})
    return {"n_cells": n_cells, "rows": rows}


def bulk_constants(a2=1.0, b2=1.0, c2=1.0):
    """Closed-form s_plus and offset next to a 1D scan of f_b over uniaxial s."""
    p = MaterialParams(a2, b2, c2, 1.0)
    ez = np.array([0.0, 0.0, 1.0])

    def f(s):
        return float(bulk_energy(qt.uniaxial(ez, s), p)) - p.c_offset

    s_grid = np.linspace(0.0, 4.0 * p.s_plus + 1.0, 4001)
    vals = np.array([f(s) for s in s_grid])
    k = int(np.argmin(vals))
    lo, hi = s_grid[max(k - 1, 0)], s_grid[min(k + 1, len(s_grid) - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return {"s_plus": p.s_plus, "c_offset": p.c_offset,
            "scan_s_plus": float(res.x), "scan_c_offset": -float(res.fun)}


def gradient_check(n_cells=32, samples=100, step=1e-6, seed=0, eps=0.1):
    """Max relative error of discrete_gradient against central differences."""
    rng = np.random.default_rng(seed)
    grid = GridSpec(n_cells=n_cells)
    p = MaterialParams(eps=eps)
    vals = 0.5 * rng.standard_normal(grid.shape + (5,))
    fld = QField(grid, vals, outer_layer(grid.shape))
    g = energy.discrete_gradient(fld, p)
    free = np.argwhere(~fld.boundary_mask)
    picks = free[rng.choice(len(free), samples, replace=False)]
    comps = rng.integers(0, 5, samples)
    worst = 0.0
    for (i, j, k), c in zip(picks, comps):
        # only the node and its six neighbours change, so difference a local block
        sl = tuple(slice(max(a - 1, 0), a + 2) for a in (i, j, k))
        plus = vals[sl].copy()
        minus = vals[sl].copy()
        loc = tuple(min(a, 1) for a in (i, j, k))
        plus[loc + (c,)] += step
        minus[loc + (c,)] -= step
        d = energy.node_terms(plus, p, grid.h) - energy.node_terms(minus, p, grid.h)
        fd = float(np.sum(d)) / (2.0 * step)
        exact = g[i, j, k, c]
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    return {"n_cells": n_cells, "samples": samples, "max_rel_error": worst}


def invariant_suites(cases=1000, seed=0):
    """Randomised invariants of the tensor algebra and the Procrustes fit."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((cases, 5))
    rots = Rotation.random(cases, random_state=rng).as_matrix()
    out = {"cases": cases}

    qr = np.stack([qt.conjugate(q[i], rots[i]) for i in range(cases)])
    out["conjugation"] = float(max(
        np.max(np.abs(qt.eigenvalues(qr) - qt.eigenvalues(q))),
        np.max(np.abs(qt.biaxiality(qr) - qt.biaxiality(q))),
    ))
    beta = qt.biaxiality(q)
    out["beta_min"] = float(beta.min())
    out["beta_max"] = float(beta.max())

    s_plus = MaterialParams().s_plus
    once = qt.project_to_N(q, s_plus)
    out["projection_idempotence"] = float(np.max(np.abs(qt.project_to_N(once, s_plus) - once)))

    es = qt.eigensystem(q)
    m = qt.to_matrix(q)
    rec = np.einsum("nij,nj,nkj->nik", es.vectors, es.values, es.vectors)
    out["reconstruction"] = float(np.max(np.abs(rec - m)))

    sigma, faces, w = icosphere(2)
    worst = 0.0
    for r in rots:
        smap = SphereMap(np.zeros(3), 1.0, 2, sigma, faces, w, sigma @ r.T, True)
        t, _ = tangent_fit(smap)
        worst = max(worst, float(np.max(np.abs(t - r))))
    out["procrustes"] = worst
    return out


def constant_degree(level=4):
    sigma, faces, w = icosphere(level)
    n = np.tile([0.0, 0.0, 1.0], (len(sigma), 1))
    return degree_raw(SphereMap(np.zeros(3), 1.0, level, sigma, faces, w, n, True))


def hedgehog_decay(grid, s_plus, radii):
    """radial_decay_integral of the sampled hedgehog about the origin."""
    fld = sample(grid, lambda x: hedgehog_field(x, s_plus))
    return [{"R": float(R), "value": energy.radial_decay_integral(fld, np.zeros(3), R)}
            for R in radii]


def run_all(grid, decay_radii):
    return {
        "hedgehog_ratio": hedgehog_ratio(),
        "bulk_constants": bulk_constants(),
        "gradient": gradient_check(),
        "invariants": invariant_suites(),
        "constant_degree": constant_degree(),
        "hedgehog_decay": hedgehog_decay(grid, MaterialParams().s_plus, decay_radii),
    }

"""Defect-core measurements on lattice Q-fields.

Core location and size from the distance to N, director maps on spheres
with a sign-consistent lift, topological degree from signed solid angles,
tangent-map fitting by orthogonal Procrustes, and convergence diagnostics.
"""

from collections import deque
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import qtensor as qt
from .field import OutOfDomain, hedgehog_field, interpolate
from .sphere import edges, icosphere, signed_solid_angle

FRUSTRATION = -0.1
DEGREE_SLACK = 0.05


class MapLeavesNeighborhood(ValueError):
    """The sampled tensors are too far from N for a director to be defined."""


class DegreeUndefined(ValueError):
    pass


class FitUndefined(ValueError):
    pass


@dataclass
class SphereMap:
    center: np.ndarray
    radius: float
    level: int
    sigma: np.ndarray
    faces: np.ndarray
    weights: np.ndarray
    directors: np.ndarray
    lift_ok: bool
    frustrated: list = dc_field(default_factory=list)

    def to_csv(self, path):
        ids = np.arange(len(self.sigma))
        pts = self.center + self.radius * self.sigma
        np.savetxt(path, np.column_stack([ids, pts, self.directors]),
                   fmt=["%d"] + ["%.17g"] * 6, delimiter=",",
                   header="vertex_id,x,y,z,nx,ny,nz", comments="")


@dataclass
class DefectReport:
    core_center: list
    max_dist_to_N: float
    core_diameter: list
    degrees: list
    tangent_fit: dict
    annulus_sup: list

    def as_dict(self):
        return {
            "core_center": list(map(float, self.core_center)),
            "max_dist_to_N": self.max_dist_to_N,
            "core_diameter": self.core_diameter,
            "degrees": self.degrees,
            "tangent_fit": self.tangent_fit,
            "annulus_sup": self.annulus_sup,
        }


def locate_core(fld, s_plus, within=None):
    """Node maximising dist_to_N (first in lexicographic order on ties).

    ``within`` restricts the search to the ball of that radius about the
    grid centre.
    """
    d = qt.dist_to_N(fld.values, s_plus)
    if within is not None:
        g = fld.grid
        r = np.linalg.norm(g.positions() - np.asarray(g.center), axis=-1)
        d = np.where(r <= within, d, -1.0)
    flat = int(np.argmax(d))
    idx = np.unravel_index(flat, d.shape)
    return fld.grid.positions()[idx], float(d[idx])


def _diameter(pts):
    if len(pts) < 2:
        return 0.0
    if len(pts) > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass  # flat sets: fall through to brute force
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


def core_diameter(fld, s_plus, delta):
    """Diameter of the node set {dist_to_N >= delta}; 0 when empty."""
    if not 0.0 < delta < s_plus * np.sqrt(2.0 / 3.0):
        raise ValueError(f"delta={delta} outside (0, s_plus*sqrt(2/3))")
    d = qt.dist_to_N(fld.values, s_plus)
    return _diameter(fld.grid.positions()[d >= delta])


def _adjacency(n_vertices, edge_list):
    adj = [[] for _ in range(n_vertices)]
    for a, b in edge_list:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def lift_directors(directors, edge_list):
    """Breadth-first sign lift from vertex 0; returns (lifted, frustrated edges)."""
    n = directors.copy()
    seen = np.zeros(len(n), dtype=bool)
    seen[0] = True
    queue = deque([0])
    adj = _adjacency(len(n), edge_list)
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if not seen[w]:
                if n[w] @ n[v] < 0.0:
                    n[w] = -n[w]
                seen[w] = True
                queue.append(w)
    dots = np.einsum("ij,ij->i", n[edge_list[:, 0]], n[edge_list[:, 1]])
    bad = [tuple(map(int, e)) for e in edge_list[dots < FRUSTRATION]]
    return n, bad


def sphere_director_map(fld, center, radius, level=4, gap_min=qt.GAP_MIN):
    """Leading eigenvectors of the field on the sphere |x - center| = radius."""
    sigma, faces, weights = icosphere(level)
    c = np.asarray(center, dtype=float)
    pts = c + radius * sigma
    q = interpolate(fld, pts)
    try:
        dirs, _ = qt.leading_eigenvector(q, gap_min)
    except qt.ProjectionUndefined as exc:
        gaps = np.diff(qt.eigenvalues(q)[:, :2], axis=1)[:, 0]
        v = int(np.argmax(-gaps >= -gap_min))
        raise MapLeavesNeighborhood(
            f"map leaves N_delta0 at vertex {v} (x={tuple(np.round(pts[v], 6).tolist())}): {exc}"
        ) from exc
    lifted, bad = lift_directors(dirs, edges(faces))
    return SphereMap(c, float(radius), level, sigma, faces, weights, lifted, not bad, bad)


def degree_raw(smap):
    """(1/4pi) * sum of signed solid angles of the image triangles."""
    if not smap.lift_ok:
        raise DegreeUndefined(f"lift frustrated on {len(smap.frustrated)} edges; degree undefined")
    n = smap.directors
    f = smap.faces
    return float(np.sum(signed_solid_angle(n[f[:, 0]], n[f[:, 1]], n[f[:, 2]])) / (4.0 * np.pi))


def degree(smap):
    """|deg| of the lifted director map; the sign depends on the lift."""
    raw = degree_raw(smap)
    if not np.isfinite(raw):
        raise DegreeUndefined("raw degree is not finite; a director has zero length")
    k = round(raw)
    if abs(raw - k) > DEGREE_SLACK:
        raise DegreeUndefined(
            f"raw degree {raw:.4f} not within {DEGREE_SLACK} of an integer; raise the icosphere level"
        )
    return abs(int(k))


def tangent_fit(smap):
    """Rotation T with n_v ~ T sigma_v, and the tensor-level residual.

    Procrustes on M = sum w n sigma^T. Flipping every lifted sign negates M,
    so det(T) = +1 is reached by negating T when needed.
    """
    if not smap.lift_ok:
        raise DegreeUndefined("lift frustrated; tangent fit undefined")
    w = smap.weights
    m = np.einsum("v,vi,vj->ij", w, smap.directors, smap.sigma)
    u, s, vt = np.linalg.svd(m)
    if s[-1] < 1e-3 * np.sum(w) / 3.0:
        raise FitUndefined(f"rank-deficient fit matrix, singular values {s}")
    t = u @ vt
    if np.linalg.det(t) < 0:
        t = -t
    return t, tensor_residual(smap.directors, smap.sigma @ t.T, w)


def tensor_residual(n, m, w):
    """Weighted RMS of |n(x)n - m(x)m|_F over vertices."""
    diff = qt.uniaxial(n, 1.0) - qt.uniaxial(m, 1.0)
    return float(np.sqrt(np.sum(w * np.sum(diff * diff, axis=-1)) / np.sum(w)))


def hedgehog_reference(s_plus, center=(0.0, 0.0, 0.0), rot=None):
    c = np.asarray(center, dtype=float)
    r = np.eye(3) if rot is None else np.asarray(rot, dtype=float)
    return lambda x: hedgehog_field((np.asarray(x) - c) @ r.T, s_plus)


def annulus_sup_deviation(fld, reference, r_in, r_out, center=None):
    """max over nodes with r_in <= |x - center| <= r_out of |Q - reference|_F."""
    g = fld.grid
    c = np.asarray(g.center if center is None else center, dtype=float)
    if not r_in < r_out:
        raise ValueError("need r_in < r_out")
    if r_in < 2.0 * g.h:
        raise ValueError(f"r_in={r_in} below 2h={2 * g.h}")
    lo, hi = g.hull()
    if np.any(c - r_out < lo - 1e-12) or np.any(c + r_out > hi + 1e-12):
        raise OutOfDomain(f"annulus radius {r_out} leaves the node hull")
    pos = g.positions()
    r = np.linalg.norm(pos - c, axis=-1)
    sel = (r >= r_in) & (r <= r_out)
    if not np.any(sel):
        raise ValueError("empty annulus")
    diff = fld.values[sel] - reference(pos[sel])
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


def sphere_trace(fld, center, radius, level=4):
    sigma, _, weights = icosphere(level)
    return interpolate(fld, np.asarray(center, dtype=float) + radius * sigma), weights


def dyadic_drift(fld, center, r0, k, level=4):
    """sum_i |Q(2^{i+1} r0 .) - Q(2^i r0 .)|_{L2(S^2)} over i < k."""
    total = 0.0
    prev, w = sphere_trace(fld, center, r0, level)
    for i in range(k):
        nxt, _ = sphere_trace(fld, center, r0 * 2.0 ** (i + 1), level)
        total += float(np.sqrt(np.sum(w * np.sum((nxt - prev) ** 2, axis=-1))))
        prev = nxt
    return total


def matched_deviation(fld, center, radius, rot, s_plus, level=4):
    """sup over the sphere of |Q(c + r sigma) - s_plus (T sigma (x) T sigma - Id/3)|."""
    sigma, _, _ = icosphere(level)
    q, _ = sphere_trace(fld, center, radius, level)
    ref = qt.uniaxial(sigma @ np.asarray(rot).T, s_plus)
    return float(np.sqrt(np.max(np.sum((q - ref) ** 2, axis=-1))))

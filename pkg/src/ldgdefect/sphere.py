"""Icosphere triangulations, vertex quadrature weights and solid angles."""

from functools import lru_cache

import numpy as np
from scipy.spatial import SphericalVoronoi


def _icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return verts / np.linalg.norm(verts, axis=1, keepdims=True), faces


@lru_cache(maxsize=8)
def icosphere(level):
    """Unit icosphere after ``level`` midpoint subdivisions.

    Faces are oriented counter-clockwise seen from outside. Returns
    ``(vertices, faces, weights)`` with spherical-Voronoi vertex areas
    (summing to 4 pi). The arrays are shared; do not modify them.
    """
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(level):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    verts = np.array(verts)
    weights = SphericalVoronoi(verts, radius=1.0).calculate_areas()
    for arr in (verts, faces, weights):
        arr.flags.writeable = False
    return verts, faces, weights


def edges(faces):
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def signed_solid_angle(a, b, c):
    """Oriented solid angle of the geodesic triangle (a, b, c) of unit vectors.

    Van Oosterom-Strackee: tan(Omega/2) = a.(b x c) / (1 + a.b + b.c + c.a).
    """
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    den = 1.0 + np.einsum("...i,...i->...", a, b) + np.einsum("...i,...i->...", b, c) \
        + np.einsum("...i,...i->...", c, a)
    return 2.0 * np.arctan2(num, den)

"""Pointwise algebra of traceless symmetric 3x3 tensors.

A Q-tensor is stored as five coefficients in a fixed orthonormal basis of
the traceless symmetric matrices (Frobenius inner product), so every array
of shape ``(..., 5)`` is a batch of Q-tensors and the traceless/symmetric
constraints hold by construction. The matrix view is built on demand.
"""

from dataclasses import dataclass

import numpy as np

GAP_MIN = 1e-8

_S2 = np.sqrt(2.0)
_S6 = np.sqrt(6.0)

# BASIS[k] is the k-th basis matrix; the five are Frobenius-orthonormal.
BASIS = np.zeros((5, 3, 3))
BASIS[0] = np.diag([-1.0, -1.0, 2.0]) / _S6
BASIS[1] = np.diag([1.0, -1.0, 0.0]) / _S2
BASIS[2][0, 1] = BASIS[2][1, 0] = 1.0 / _S2
BASIS[3][0, 2] = BASIS[3][2, 0] = 1.0 / _S2
BASIS[4][1, 2] = BASIS[4][2, 1] = 1.0 / _S2

BASIS_DOC = (
    "q1=diag(-1,-1,2)/sqrt6; q2=diag(1,-1,0)/sqrt2; "
    "q3=(xy+yx)/sqrt2; q4=(xz+zx)/sqrt2; q5=(yz+zy)/sqrt2"
)


class ProjectionUndefined(ValueError):
    """Raised when the leading eigenvalue is not simple enough to project onto N."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending and the matching unit eigenvectors.

    ``vectors[..., :, i]`` is the eigenvector for ``values[..., i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def to_matrix(q):
    q = np.asarray(q, dtype=float)
    return np.einsum("...k,kij->...ij", q, BASIS)


def from_matrix(m):
    """Coefficients of the traceless symmetric part of ``m``."""
    m = np.asarray(m, dtype=float)
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.einsum("...ij,kij->...k", sym, BASIS)


def uniaxial(n, s):
    """s (n (x) n - Id/3) for unit vectors ``n`` (shape ``(..., 3)``)."""
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(norm - 1.0) > 1e-12):
        raise ValueError("director must be a unit vector")
    x, y, z = n[..., 0], n[..., 1], n[..., 2]
    s = np.asarray(s, dtype=float)
    out = np.empty(np.broadcast_shapes(n.shape[:-1], s.shape) + (5,))
    # <n(x)n - Id/3, E_k> in closed form
    out[..., 0] = s * (2.0 * z * z - x * x - y * y) / _S6
    out[..., 1] = s * (x * x - y * y) / _S2
    out[..., 2] = s * _S2 * x * y
    out[..., 3] = s * _S2 * x * z
    out[..., 4] = s * _S2 * y * z
    return out


def tr2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def square_traceless(q):
    """Coefficients of Q^2 - tr(Q^2) Id/3, expanded in the basis."""
    q = np.asarray(q, dtype=float)
    q1, q2, q3, q4, q5 = (q[..., k] for k in range(5))
    out = np.empty(q.shape)
    out[..., 0] = (_S6 / 12.0) * (2.0 * (q1 * q1 - q2 * q2 - q3 * q3) + q4 * q4 + q5 * q5)
    out[..., 1] = -(_S6 / 3.0) * q1 * q2 + (_S2 / 4.0) * (q4 * q4 - q5 * q5)
    out[..., 2] = -(_S6 / 3.0) * q1 * q3 + (_S2 / 2.0) * q4 * q5
    out[..., 3] = (_S6 / 6.0) * q1 * q4 + (_S2 / 2.0) * (q2 * q4 + q3 * q5)
    out[..., 4] = (_S6 / 6.0) * q1 * q5 + (_S2 / 2.0) * (q3 * q4 - q2 * q5)
    return out


def tr3(q):
    """tr(Q^3) = <Q^2, Q>."""
    q = np.asarray(q, dtype=float)
    return np.sum(square_traceless(q) * q, axis=-1)


def eigenvalues(q):
    """Closed-form eigenvalues, sorted descending, shape ``(..., 3)``.

    Uses the trigonometric solution of the depressed characteristic cubic
    lambda^3 - (tr2/2) lambda - tr3/3 = 0.
    """
    q = np.asarray(q, dtype=float)
    # scale to unit size so tiny or huge tensors do not under/overflow p^3
    m = np.max(np.abs(q), axis=-1, keepdims=True)
    q = q / np.where(m > 0.0, m, 1.0)
    t2 = tr2(q)
    p = np.sqrt(t2 / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    r = np.clip(tr3(q) / (6.0 * safe**3), -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    l1 = 2.0 * p * np.cos(phi)
    l3 = 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    l2 = -l1 - l3
    return np.stack([l1, l2, l3], axis=-1) * m


def _null_vector(a):
    """Unit vector spanning the (near) null space of rank-2 matrices ``a``.

    Takes the longest of the three row cross products.
    """
    c = np.stack(
        [
            np.cross(a[..., 0, :], a[..., 1, :]),
            np.cross(a[..., 0, :], a[..., 2, :]),
            np.cross(a[..., 1, :], a[..., 2, :]),
        ],
        axis=-2,
    )
    norms = np.linalg.norm(c, axis=-1)
    best = np.argmax(norms, axis=-1)
    v = np.take_along_axis(c, best[..., None, None], axis=-2)[..., 0, :]
    nv = np.take_along_axis(norms, best[..., None], axis=-1)
    return v / np.where(nv > 0.0, nv, 1.0), nv[..., 0]


def _canonical_sign(v):
    """Flip so the largest-magnitude component (first on ties) is positive."""
    idx = np.argmax(np.abs(np.round(v, 12)), axis=-1)
    sgn = np.sign(np.take_along_axis(v, idx[..., None], axis=-1))
    sgn[sgn == 0] = 1.0
    return v * sgn


def _degeneracy_tol(vals):
    return 1e-9 * np.maximum(np.max(np.abs(vals), axis=-1), 1e-300)


def _tie_break(vals, vecs):
    """Replace eigenvectors of repeated eigenvalues by a canonical frame.

    Within a degenerate eigenspace the canonical axes are projected and
    Gram-Schmidt orthonormalised in lexicographic order.
    """
    axes = np.eye(3)
    tol = _degeneracy_tol(vals[None])[0]
    groups = [[0]]
    for i in (1, 2):
        if abs(vals[groups[-1][-1]] - vals[i]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = vecs.copy()
    for g in groups:
        if len(g) == 1:
            out[:, g[0]] = _canonical_sign(out[:, g[0]])
            continue
        if len(g) == 3:
            return vals, axes.copy()
        basis = out[:, g]
        proj = basis @ basis.T
        chosen = []
        for ax in axes:
            v = proj @ ax
            for u in chosen:
                v = v - (u @ v) * u
            nv = np.linalg.norm(v)
            if nv > 0.5:
                chosen.append(v / nv)
            if len(chosen) == len(g):
                break
        for col, v in zip(g, chosen):
            out[:, col] = v
    return vals, out


def eigensystem(q):
    """Sorted eigen-decomposition of a batch of Q-tensors.

    Closed-form eigenvalues and cross-product eigenvectors when the spectrum
    is well separated; LAPACK ``eigh`` otherwise, followed by the
    deterministic tie-break for repeated eigenvalues.
    """
    q = np.asarray(q, dtype=float)
    batch = q.shape[:-1]
    qf = q.reshape(-1, 5)
    vals = eigenvalues(qf)
    mats = to_matrix(qf)
    eye = np.eye(3)
    scale = np.maximum(np.abs(vals[:, 0]), np.abs(vals[:, 2]))
    gaps = np.minimum(vals[:, 0] - vals[:, 1], vals[:, 1] - vals[:, 2])
    good = gaps > 1e-3 * scale
    vecs = np.empty((qf.shape[0], 3, 3))
    if np.any(good):
        e1, _ = _null_vector(mats[good] - vals[good, 0, None, None] * eye)
        e3, _ = _null_vector(mats[good] - vals[good, 2, None, None] * eye)
        e3 = e3 - np.sum(e3 * e1, axis=-1, keepdims=True) * e1
        e3 /= np.linalg.norm(e3, axis=-1, keepdims=True)
        e1 = _canonical_sign(e1)
        e3 = _canonical_sign(e3)
        e2 = _canonical_sign(np.cross(e3, e1))
        vecs[good] = np.stack([e1, e2, e3], axis=-1)
    for i in np.flatnonzero(~good):
        w, v = np.linalg.eigh(mats[i])
        w, v = w[::-1], v[:, ::-1]
        vals[i] = w
        vals[i], vecs[i] = _tie_break(w, v)
    return EigenSystem(vals.reshape(batch + (3,)), vecs.reshape(batch + (3, 3)))


def leading_eigenvector(q, gap_min=GAP_MIN):
    """Unit eigenvector of the largest eigenvalue, sign-canonicalised.

    Raises ProjectionUndefined where the leading gap is below ``gap_min``.
    Returns ``(vectors, gaps)``.
    """
    q = np.asarray(q, dtype=float)
    batch = q.shape[:-1]
    qf = q.reshape(-1, 5)
    vals = eigenvalues(qf)
    gap = vals[:, 0] - vals[:, 1]
    if np.any(gap < gap_min):
        bad = int(np.flatnonzero(gap < gap_min)[0])
        raise ProjectionUndefined(
            f"projection undefined: leading eigenvalue gap {gap[bad]:.3e} "
            f"< {gap_min:.1e} at index {bad}"
        )
    mats = to_matrix(qf)
    e1, nv = _null_vector(mats - vals[:, 0, None, None] * np.eye(3))
    # cross products lose accuracy for small relative gaps; defer to eigh
    weak = gap < 1e-3 * np.maximum(np.abs(vals[:, 0]), np.abs(vals[:, 2]))
    for i in np.flatnonzero(weak):
        e1[i] = np.linalg.eigh(mats[i])[1][:, -1]
    e1 = _canonical_sign(e1)
    return e1.reshape(batch + (3,)), gap.reshape(batch)


def project_to_N(q, s_plus, gap_min=GAP_MIN):
    """Nearest point on the uniaxial manifold s_plus (n (x) n - Id/3)."""
    n, _ = leading_eigenvector(q, gap_min)
    return uniaxial(n, s_plus)


def dist_to_N(q, s_plus):
    """Frobenius distance to N from the sorted-eigenvalue closed form.

    Expanding sum_i (lambda_i - mu_i)^2 with mu = s_plus (2/3, -1/3, -1/3)
    leaves only the leading eigenvalue: tr2 - 2 s lambda_1 + 2 s^2 / 3.
    """
    q = np.asarray(q, dtype=float)
    l1 = eigenvalues(q)[..., 0]
    d2 = tr2(q) - 2.0 * s_plus * l1 + 2.0 * s_plus**2 / 3.0
    return np.sqrt(np.maximum(d2, 0.0))


def biaxiality(q):
    """beta = 1 - 6 tr3^2 / tr2^3, with beta(0) = 0."""
    q = np.asarray(q, dtype=float)
    m = np.max(np.abs(q), axis=-1, keepdims=True)
    q = q / np.where(m > 0.0, m, 1.0)
    t2 = tr2(q)
    t3 = tr3(q)
    pos = t2 > 0.0
    safe = np.where(pos, t2, 1.0)
    beta = np.where(pos, 1.0 - 6.0 * t3**2 / safe**3, 0.0)
    return np.clip(beta, 0.0, 1.0)


def conjugate(q, rot):
    """R Q R^T for a fixed rotation matrix ``rot``."""
    m = to_matrix(q)
    return from_matrix(np.einsum("ij,...jk,lk->...il", rot, m, rot))

"""Q-tensor fields on cell-centred cubic lattices.

Values are stored as an ``(n, n, n, 5)`` coefficient array indexed
``[i, j, k]`` along x, y, z. Dirichlet nodes (outer layer, plus everything
outside an optional inscribed ball) are flagged in ``boundary_mask``.
"""

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import qtensor as qt


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    center: tuple = (0.0, 0.0, 0.0)
    half_width: float = 1.0
    n_cells: int = 64

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValueError(f"n_cells must be an integer >= 8, got {self.n_cells}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def h(self):
        return 2.0 * self.half_width / self.n_cells

    @property
    def shape(self):
        return (self.n_cells,) * 3

    def axis(self, d):
        n = self.n_cells
        return self.center[d] + self.h * (np.arange(n) + 0.5 - n / 2.0)

    def positions(self):
        """Node coordinates, shape ``(n, n, n, 3)``."""
        return np.stack(np.meshgrid(*(self.axis(d) for d in range(3)), indexing="ij"), axis=-1)

    def hull(self):
        c = np.asarray(self.center)
        r = self.half_width - 0.5 * self.h
        return c - r, c + r

    def as_dict(self):
        return {"center": list(self.center), "half_width": self.half_width, "n_cells": self.n_cells}


@dataclass
class QField:
    grid: GridSpec
    values: np.ndarray
    boundary_mask: np.ndarray
    ball_radius: float | None = None

    def __post_init__(self):
        if self.values.shape != self.grid.shape + (5,):
            raise ValueError(f"values must have shape {self.grid.shape + (5,)}")
        if self.boundary_mask.shape != self.grid.shape:
            raise ValueError("boundary_mask shape mismatch")

    def copy(self):
        return QField(self.grid, self.values.copy(), self.boundary_mask.copy(), self.ball_radius)

    def matrices(self):
        return qt.to_matrix(self.values)


@dataclass(frozen=True)
class BlowupSpec:
    """Map y -> Q(center + scale * y) sampled on ``target``."""

    center: tuple
    scale: float
    target: GridSpec = dc_field(default_factory=GridSpec)


def outer_layer(shape):
    m = np.zeros(shape, dtype=bool)
    m[0, :, :] = m[-1, :, :] = True
    m[:, 0, :] = m[:, -1, :] = True
    m[:, :, 0] = m[:, :, -1] = True
    return m


def dirichlet_mask(grid, ball_radius=None):
    mask = outer_layer(grid.shape)
    if ball_radius is not None:
        r = np.linalg.norm(grid.positions() - np.asarray(grid.center), axis=-1)
        mask |= r >= ball_radius
    return mask


def sample(grid, f, ball_radius=None):
    """Evaluate a vectorised ``f(positions) -> coefficients`` on every node."""
    vals = np.asarray(f(grid.positions()), dtype=float)
    vals = np.broadcast_to(vals, grid.shape + (5,)).copy()
    return QField(grid, vals, dirichlet_mask(grid, ball_radius), ball_radius)


def hedgehog_field(x, s_plus):
    """s_plus (x/|x| (x) x/|x| - Id/3), with the value 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    n = np.where(r > 0.0, x / np.where(r > 0.0, r, 1.0), np.array([0.0, 0.0, 1.0]))
    s = np.where(r[..., 0] > 0.0, s_plus, 0.0)
    return qt.uniaxial(n, s)


def rotated_hedgehog(rot, s_plus):
    """Closure for x -> s_plus (R x/|x| (x) R x/|x| - Id/3)."""
    rot = np.asarray(rot, dtype=float)
    return lambda x: hedgehog_field(np.asarray(x) @ rot.T, s_plus)


def constant_field(q0):
    q0 = np.asarray(q0, dtype=float)
    return lambda x: np.broadcast_to(q0, np.shape(x)[:-1] + (5,))


def _check_inside(grid, pts, what="point"):
    lo, hi = grid.hull()
    tol = 1e-12 * max(grid.half_width, 1.0)
    bad = np.any((pts < lo - tol) | (pts > hi + tol), axis=-1)
    if np.any(bad):
        p = pts[bad][0]
        raise OutOfDomain(f"{what} {tuple(np.round(p, 12).tolist())} outside node hull "
                          f"{tuple(lo.tolist())}..{tuple(hi.tolist())}")


def interpolate(fld, x):
    """Trilinear interpolation of the coefficients at points ``x`` (``(..., 3)``)."""
    x = np.asarray(x, dtype=float)
    g = fld.grid
    pts = x.reshape(-1, 3)
    _check_inside(g, pts)
    n = g.n_cells
    lo, _ = g.hull()
    u = (pts - lo) / g.h
    i0 = np.clip(np.floor(u).astype(int), 0, n - 2)
    t = u - i0
    v = fld.values
    i, j, k = i0[:, 0], i0[:, 1], i0[:, 2]
    tx, ty, tz = (t[:, d:d + 1] for d in range(3))

    # nested lerps a + t (b - a) reproduce constants exactly
    def lerp(a, b, w):
        return a + w * (b - a)

    def along_z(di, dj):
        return lerp(v[i + di, j + dj, k], v[i + di, j + dj, k + 1], tz)

    out = lerp(lerp(along_z(0, 0), along_z(0, 1), ty), lerp(along_z(1, 0), along_z(1, 1), ty), tx)
    return out.reshape(x.shape[:-1] + (5,))


def extract_blowup(fld, spec):
    """Resample y -> Q(center + scale * y) onto ``spec.target``."""
    tgt = spec.target
    c = np.asarray(spec.center, dtype=float)
    lo, hi = tgt.hull()
    corners = np.array([[a, b, d] for a in (lo[0], hi[0]) for b in (lo[1], hi[1]) for d in (lo[2], hi[2])])
    _check_inside(fld.grid, c + spec.scale * corners, what="blow-up corner")
    vals = interpolate(fld, c + spec.scale * tgt.positions())
    return QField(tgt, vals, outer_layer(tgt.shape))


# --- snapshots -------------------------------------------------------------

def write_csv(fld, path):
    g = fld.grid
    idx = np.indices(g.shape).reshape(3, -1).T
    pos = g.positions().reshape(-1, 3)
    vals = fld.values.reshape(-1, 5)
    header = "\n".join(
        [
            f"basis: {qt.BASIS_DOC}",
            f"grid: center={','.join(repr(c) for c in g.center)} half_width={g.half_width!r} n_cells={g.n_cells}",
            f"ball_radius: {fld.ball_radius!r}",
            "i,j,k,x,y,z,q1,q2,q3,q4,q5",
        ]
    )
    data = np.column_stack([idx, pos, vals])
    fmt = ["%d"] * 3 + ["%.17g"] * 8
    np.savetxt(path, data, fmt=fmt, delimiter=",", header=header, comments="# ")


def read_csv(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, rest = line[2:].strip().partition(": ")
            meta[key] = rest
    parts = dict(kv.split("=") for kv in meta["grid"].split())
    grid = GridSpec(
        tuple(float(c) for c in parts["center"].split(",")),
        float(parts["half_width"]),
        int(parts["n_cells"]),
    )
    ball = None if meta.get("ball_radius", "None") == "None" else float(meta["ball_radius"])
    data = np.loadtxt(path, delimiter=",", comments="#")
    vals = np.zeros(grid.shape + (5,))
    ijk = data[:, :3].astype(int)
    vals[ijk[:, 0], ijk[:, 1], ijk[:, 2]] = data[:, 6:11]
    return QField(grid, vals, dirichlet_mask(grid, ball), ball)


def write_npz(fld, path):
    g = fld.grid
    np.savez_compressed(
        path,
        values=fld.values,
        boundary_mask=fld.boundary_mask,
        center=np.asarray(g.center),
        half_width=g.half_width,
        n_cells=g.n_cells,
        ball_radius=np.nan if fld.ball_radius is None else fld.ball_radius,
    )


def read_npz(path):
    with np.load(path) as z:
        grid = GridSpec(tuple(z["center"]), float(z["half_width"]), int(z["n_cells"]))
        ball = float(z["ball_radius"])
        return QField(grid, z["values"].copy(), z["boundary_mask"].copy(), None if np.isnan(ball) else ball)


def save_snapshot(fld, path):
    path = Path(path)
    if path.suffix == ".csv":
        write_csv(fld, path)
    else:
        write_npz(fld, path)


def load_snapshot(path):
    path = Path(path)
    return read_csv(path) if path.suffix == ".csv" else read_npz(path)

"""Experiment configuration: a JSON key-value tree, validated on load.

Schema (all blocks optional except ``eps_ladder``)::

    {
      "material": {"a2": 1.0, "b2": 1.0, "c2": 1.0},
      "eps_ladder": [0.2, 0.1, 0.05],
      "grid": {"n_cells": 64, "half_width": 1.0, "ball_radius": 1.0},
      "boundary": {"type": "hedgehog"}
                | {"type": "rotated-hedgehog", "rotation": [[...], [...], [...]]}
                | {"type": "constant", "director": [0, 0, 1]},
      "init": {"type": "boundary"} | {"type": "random", "amplitude": 0.1},
      "solver": {"max_iters": 20000, "grad_tol": 1e-4, "seed": 0,
                 "checkpoint_every": 0},
      "analysis": {
        "delta_fractions": [0.25, 0.5, 0.75],
        "sphere_radii": [0.5, 0.75],
        "icosphere_level": 4,
        "rn_exponent": 0.5,
        "blowup_radii": [4, 8, 16],
        "blowup_cells": 96,
        "annulus": [0.3, 0.8],
        "ball_ratio_radii": [0.15, ..., 0.9],
        "decay_radii": [0.1, 0.2, 0.4],
        "drift_r0": 4, "drift_levels": 2,
        "profile_nodes": 4001,
        "reference_checks": true
      },
      "output": {"directory": "out", "snapshots": "none" | "npz" | "csv",
                 "figures": true, "director_maps": false}
    }

``delta_fractions`` are multiples of s_plus*sqrt(2/3); blow-up radii and
``drift_r0`` are in units of eps; the core search radius is r_n = eps**rn_exponent.
``reference_checks`` adds the solver-independent calibration measurements
(hedgehog energy ratio, bulk constants, gradient check, invariant suites)
to the report so that ``verify`` can judge them too.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .solver import SolverConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    delta_fractions: tuple = (0.25, 0.5, 0.75)
    sphere_radii: tuple = (0.5, 0.75)
    icosphere_level: int = 4
    rn_exponent: float = 0.5
    blowup_radii: tuple = (4.0, 8.0, 16.0)
    blowup_cells: int = 96
    annulus: tuple = (0.3, 0.8)
    ball_ratio_radii: tuple = tuple(np.round(np.linspace(0.15, 0.9, 10), 6).tolist())
    decay_radii: tuple = (0.1, 0.2, 0.4)
    drift_r0: float = 4.0
    drift_levels: int = 2
    profile_nodes: int = 4001
    reference_checks: bool = True


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshots: str = "none"
    figures: bool = True
    director_maps: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    eps_ladder: tuple
    a2: float = 1.0
    b2: float = 1.0
    c2: float = 1.0
    n_cells: int = 64
    half_width: float = 1.0
    ball_radius: float | None = 1.0
    boundary: dict = field(default_factory=lambda: {"type": "hedgehog"})
    init: dict = field(default_factory=lambda: {"type": "boundary"})
    solver: SolverConfig = field(default_factory=SolverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: dict = field(default_factory=dict, compare=False)

    def rotation(self):
        if self.boundary["type"] == "rotated-hedgehog":
            return np.asarray(self.boundary["rotation"], dtype=float)
        return np.eye(3)

    def plan(self):
        d = asdict(self)
        d.pop("raw")
        return d


def _block(raw, name, cls):
    blk = raw.get(name, {})
    if not isinstance(blk, dict):
        raise ConfigError(f"'{name}' must be an object")
    known = set(cls.__dataclass_fields__)
    extra = set(blk) - known
    if extra:
        raise ConfigError(f"unknown keys in '{name}': {sorted(extra)}")
    vals = {k: tuple(v) if isinstance(v, list) else v for k, v in blk.items()}
    try:
        return cls(**vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{name}' block: {exc}") from exc


def _check_rotation(rot):
    r = np.asarray(rot, dtype=float)
    if r.shape != (3, 3) or not np.allclose(r @ r.T, np.eye(3), atol=1e-10) or np.linalg.det(r) < 0:
        raise ConfigError("boundary.rotation must be a 3x3 proper rotation matrix")


def parse_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    known = {"material", "eps_ladder", "grid", "boundary", "init", "solver", "analysis", "output"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    ladder = raw.get("eps_ladder")
    if not isinstance(ladder, list) or not ladder:
        raise ConfigError("eps_ladder must be a non-empty list")
    if any(not isinstance(e, (int, float)) or e <= 0 for e in ladder):
        raise ConfigError("eps values must be positive numbers")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("eps_ladder must be strictly decreasing")
    mat = raw.get("material", {})
    for k in ("a2", "b2", "c2"):
        v = mat.get(k, 1.0)
        if not isinstance(v, (int, float)) or v < 0 or (v == 0 and k != "b2"):
            raise ConfigError(f"material.{k} must be positive")
    if set(mat) - {"a2", "b2", "c2"}:
        raise ConfigError(f"unknown material keys: {sorted(set(mat) - {'a2', 'b2', 'c2'})}")
    grid = raw.get("grid", {})
    if set(grid) - {"n_cells", "half_width", "ball_radius"}:
        raise ConfigError("grid accepts n_cells, half_width, ball_radius")
    n = grid.get("n_cells", 64)
    if not isinstance(n, int) or n < 8:
        raise ConfigError("grid.n_cells must be an integer >= 8")
    hw = grid.get("half_width", 1.0)
    if not isinstance(hw, (int, float)) or hw <= 0:
        raise ConfigError("grid.half_width must be positive")
    ball = grid.get("ball_radius", hw)
    if ball is not None and (not isinstance(ball, (int, float)) or not 0 < ball <= hw):
        raise ConfigError("grid.ball_radius must lie in (0, half_width] or be null")
    bnd = raw.get("boundary", {"type": "hedgehog"})
    btype = bnd.get("type")
    if btype == "rotated-hedgehog":
        _check_rotation(bnd.get("rotation"))
    elif btype == "constant":
        d = np.asarray(bnd.get("director", []), dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ConfigError("boundary.director must be a unit 3-vector")
    elif btype != "hedgehog":
        raise ConfigError(f"unknown boundary type {btype!r}")
    init = raw.get("init", {"type": "boundary"})
    if init.get("type") not in ("boundary", "random"):
        raise ConfigError("init.type must be 'boundary' or 'random'")
    solver = _block(raw, "solver", SolverConfig)
    analysis = _block(raw, "analysis", AnalysisConfig)
    output = _block(raw, "output", OutputConfig)
    if output.snapshots not in ("none", "npz", "csv"):
        raise ConfigError("output.snapshots must be none, npz or csv")
    if analysis.icosphere_level < 1:
        raise ConfigError("analysis.icosphere_level must be >= 1")
    for frac in analysis.delta_fractions:
        if not 0 < frac < 1:
            raise ConfigError("analysis.delta_fractions must lie in (0, 1)")
    return ExperimentConfig(
        eps_ladder=tuple(float(e) for e in ladder),
        a2=float(mat.get("a2", 1.0)),
        b2=float(mat.get("b2", 1.0)),
        c2=float(mat.get("c2", 1.0)),
        n_cells=n,
        half_width=float(hw),
        ball_radius=None if ball is None else float(ball),
        boundary=dict(bnd),
        init=dict(init),
        solver=solver,
        analysis=analysis,
        output=output,
        raw=raw,
    )


def load_config(path):
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(raw), text

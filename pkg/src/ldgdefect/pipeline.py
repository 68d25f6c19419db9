"""The eps-ladder experiment: solve, measure, and assemble the run report.

Report layout (JSON)::

    schema, package_version, input_hash, config_text, config, material, grid,
    status ("ok" | "failed"), failure (only when failed),
    stages: [ {eps, solve, energy, core, core_diameter, degrees, blowup,
               annulus, ball_ratio, decay, drift, radial, max_biaxiality}, ... ],
    reference: calibration measurements (see ldgdefect.checks), or null,
    files: side files written next to the report

Lengths are in domain units except inside ``blowup`` where radii are in
units of eps.
"""

import hashlib
import json
import logging
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, checks, energy
from . import qtensor as qt
from .field import (BlowupSpec, GridSpec, OutOfDomain, extract_blowup, hedgehog_field,
                    rotated_hedgehog, sample, save_snapshot)
from .material import MaterialParams
from .radial import NewtonFailure, lift_profile, solve_profile
from .solver import NonFiniteEnergy, minimize, perturb

log = logging.getLogger(__name__)

SCHEMA = "ldgdefect-report/1"
MEASUREMENT_ERRORS = (ValueError, OutOfDomain, NewtonFailure)


def input_hash(text):
    """Git blob hash of the config text."""
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def boundary_function(cfg, s_plus):
    kind = cfg.boundary["type"]
    if kind == "hedgehog":
        return lambda x: hedgehog_field(x, s_plus)
    if kind == "rotated-hedgehog":
        return rotated_hedgehog(cfg.rotation(), s_plus)
    q0 = qt.uniaxial(np.asarray(cfg.boundary["director"], dtype=float), s_plus)
    return lambda x: np.broadcast_to(q0, np.shape(x)[:-1] + (5,))


def _tag(eps):
    return f"eps{eps:g}"


def _safe(fn, *args, **kw):
    """(value, None) or (None, error message) for recoverable measurement errors."""
    try:
        return fn(*args, **kw), None
    except MEASUREMENT_ERRORS as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _degrees(fld, center, radii, level):
    rows = []
    for r in radii:
        row = {"radius": float(r)}
        try:
            smap = analysis.sphere_director_map(fld, center, r, level)
            raw = analysis.degree_raw(smap)
            row.update(raw=raw, lift_ok=smap.lift_ok, degree=analysis.degree(smap))
        except MEASUREMENT_ERRORS as exc:
            row.update(degree=None, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def _blowup(fld, center, p, acfg, out_dir=None):
    eps = p.eps
    lo, hi = fld.grid.hull()
    room = float(np.min(np.minimum(center - lo, hi - center)))
    half = min(max(acfg.blowup_radii) + 1.0, room / eps)
    spec = BlowupSpec(tuple(center), eps, GridSpec((0.0, 0.0, 0.0), half, acfg.blowup_cells))
    blow = extract_blowup(fld, spec)
    fits = []
    for R in acfg.blowup_radii:
        row = {"radius": float(R)}
        try:
            smap = analysis.sphere_director_map(blow, np.zeros(3), R, acfg.icosphere_level)
            t, res = analysis.tangent_fit(smap)
            row.update(
                residual=res,
                rotation=t.tolist(),
                degree=analysis.degree(smap),
                matched_deviation=analysis.matched_deviation(
                    blow, np.zeros(3), R, t, p.s_plus, acfg.icosphere_level),
            )
            if out_dir is not None:
                smap.to_csv(out_dir / f"director_map_{_tag(eps)}_R{R:g}.csv")
        except MEASUREMENT_ERRORS as exc:
            row.update(residual=None, error=f"{type(exc).__name__}: {exc}")
        fits.append(row)
    r0, k = acfg.drift_r0, acfg.drift_levels
    steps = []
    for i in range(k):
        val, err = _safe(analysis.dyadic_drift, blow, np.zeros(3), r0 * 2.0**i, 1, acfg.icosphere_level)
        steps.append(val)
    total, err = _safe(analysis.dyadic_drift, blow, np.zeros(3), r0, k, acfg.icosphere_level)
    drift = {"r0": r0, "levels": k, "total": total, "steps": steps}
    if err:
        drift["error"] = err
    return {"half_width": half, "cells": acfg.blowup_cells, "fits": fits}, drift


def _radial(cfg, p, grid):
    """1D profile for the ball problem and the 3D energy of its lift."""
    if cfg.boundary["type"] == "constant" or cfg.ball_radius is None:
        return None, None
    prof = solve_profile(p, cfg.ball_radius, n_nodes=cfg.analysis.profile_nodes, far_field=False)
    lifted = lift_profile(prof, grid, outside="extend")
    if cfg.boundary["type"] == "rotated-hedgehog":
        lifted.values = qt.conjugate(lifted.values, cfg.rotation())
    e = energy.total_energy(lifted, p)
    sq = np.sqrt(2.0 / 3.0)
    pred = []
    for frac in cfg.analysis.delta_fractions:
        # dist_to_N of uniaxial(n, h) is |h - s_plus| sqrt(2/3)
        level = p.s_plus * (1.0 - frac)
        pred.append({"fraction": frac, "delta": frac * p.s_plus * sq,
                     "predicted": 2.0 * prof.crossing(level)})
    return {
        "newton_iters": prof.newton_iters,
        "residual": prof.residual,
        "h_at_eps": float(prof(p.eps)),
        "lifted_energy": e.as_dict(),
        "predicted_diameter": pred,
    }, prof


def analyze_stage(fld, p, cfg, reference_fn, out_dir=None, profile_dir=None):
    """All per-eps measurements on a converged field."""
    acfg = cfg.analysis
    grid = fld.grid
    sq = np.sqrt(2.0 / 3.0)
    rn = p.eps ** acfg.rn_exponent
    center, maxd = analysis.locate_core(fld, p.s_plus, within=rn)
    stage = {
        "eps": p.eps,
        "core": {"center": center.tolist(), "max_dist_to_N": maxd, "search_radius": rn},
        "max_biaxiality": float(np.max(qt.biaxiality(fld.values))),
    }
    stage["core_diameter"] = [
        {"fraction": f, "delta": f * p.s_plus * sq,
         "diameter": analysis.core_diameter(fld, p.s_plus, f * p.s_plus * sq)}
        for f in acfg.delta_fractions
    ]
    stage["degrees"] = _degrees(fld, center, acfg.sphere_radii, acfg.icosphere_level)
    r_in, r_out = acfg.annulus
    sup, err = _safe(analysis.annulus_sup_deviation, fld, reference_fn, r_in, r_out)
    stage["annulus"] = {"r_in": r_in, "r_out": r_out, "sup": sup}
    if err:
        stage["annulus"]["error"] = err
    stage["ball_ratio"] = []
    for R in acfg.ball_ratio_radii:
        val, err = _safe(energy.ball_ratio, fld, p, R)
        stage["ball_ratio"].append({"R": float(R), "ratio": val} | ({"error": err} if err else {}))
    stage["decay"] = []
    for R in acfg.decay_radii:
        val, err = _safe(energy.radial_decay_integral, fld, center, R)
        stage["decay"].append({"R": float(R), "value": val} | ({"error": err} if err else {}))
    try:
        stage["blowup"], stage["drift"] = _blowup(fld, center, p, acfg, out_dir)
    except MEASUREMENT_ERRORS as exc:
        stage["blowup"] = {"error": f"{type(exc).__name__}: {exc}", "fits": []}
        stage["drift"] = None
    try:
        radial, prof = _radial(cfg, p, grid)
    except MEASUREMENT_ERRORS as exc:
        radial, prof = {"error": f"{type(exc).__name__}: {exc}"}, None
    stage["radial"] = radial
    if prof is not None and profile_dir is not None:
        prof.to_csv(profile_dir / f"profile_{_tag(p.eps)}.csv")
    return stage


def _write_tables(report, out):
    files = []
    for st in report["stages"]:
        tag = _tag(st["eps"])
        rows = [(r["R"], np.nan if r["ratio"] is None else r["ratio"]) for r in st["ball_ratio"]]
        np.savetxt(out / f"ball_ratio_{tag}.csv", rows, delimiter=",", header="R,ball_ratio",
                   comments="", fmt="%.17g")
        rows = [(r["R"], np.nan if r["value"] is None else r["value"]) for r in st["decay"]]
        np.savetxt(out / f"decay_{tag}.csv", rows, delimiter=",", header="R,decay_integral",
                   comments="", fmt="%.17g")
        files += [f"ball_ratio_{tag}.csv", f"decay_{tag}.csv"]
    rows = []
    for st in report["stages"]:
        a = st["annulus"]
        rows.append((st["eps"], a["r_in"], a["r_out"], np.nan if a["sup"] is None else a["sup"]))
    np.savetxt(out / "annulus.csv", rows, delimiter=",", header="eps,r_in,r_out,sup_deviation",
               comments="", fmt="%.17g")
    files.append("annulus.csv")
    rows = []
    for st in report["stages"]:
        pred = {r["fraction"]: r["predicted"] for r in (st["radial"] or {}).get("predicted_diameter", [])}
        for r in st["core_diameter"]:
            rows.append((st["eps"], r["delta"], r["diameter"], pred.get(r["fraction"], np.nan)))
    np.savetxt(out / "core_diameter.csv", rows, delimiter=",",
               header="eps,delta,diameter,radial_prediction", comments="", fmt="%.17g")
    files.append("core_diameter.csv")
    return files


def run_experiment(cfg, config_text, out_dir=None, figures=None):
    """Run the whole ladder. Returns (report dict, exit code)."""
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    p0 = MaterialParams(cfg.a2, cfg.b2, cfg.c2, cfg.eps_ladder[0])
    grid = GridSpec(n_cells=cfg.n_cells, half_width=cfg.half_width)
    bfun = boundary_function(cfg, p0.s_plus)
    report = {
        "schema": SCHEMA,
        "package_version": __version__,
        "input_hash": input_hash(config_text),
        "config_text": config_text,
        "config": cfg.plan(),
        "material": p0.as_dict(),
        "grid": grid.as_dict() | {"h": grid.h, "ball_radius": cfg.ball_radius},
        "status": "ok",
        "stages": [],
        "reference": None,
        "files": [],
    }
    competitor = sample(grid, bfun, cfg.ball_radius)
    fld = competitor.copy()
    if cfg.init["type"] == "random":
        fld = perturb(fld, cfg.init.get("amplitude", 0.1), cfg.solver.seed)
    want_profiles = cfg.boundary["type"] != "constant" and cfg.ball_radius is not None
    map_dir = out if cfg.output.director_maps else None
    code = 0
    for eps in cfg.eps_ladder:
        p = p0.with_eps(eps)
        t0 = time.perf_counter()
        try:
            rep = minimize(fld, p, cfg.solver)
        except NonFiniteEnergy as exc:
            report["status"] = "failed"
            report["failure"] = {"kind": "non-finite-energy", "eps": eps, "message": str(exc)}
            code = 3
            break
        log.info("eps=%g: %d iterations, E=%.6f, grad=%.2e", eps, rep.iterations,
                 rep.energy.total, rep.grad_norm)
        stage = {"eps": eps, "solve": rep.as_dict() | {"seconds": time.perf_counter() - t0}}
        stage["energy"] = {
            "minimizer": rep.energy.as_dict(),
            "competitor": energy.total_energy(competitor, p).as_dict(),
        }
        stage.update((k, v) for k, v in analyze_stage(
            fld, p, cfg, bfun, map_dir, out if want_profiles else None).items() if k != "eps")
        report["stages"].append(stage)
        if want_profiles:
            report["files"].append(f"profile_{_tag(eps)}.csv")
        if cfg.output.snapshots != "none":
            name = f"field_{_tag(eps)}.{cfg.output.snapshots}"
            save_snapshot(fld, out / name)
            report["files"].append(name)
    if cfg.analysis.reference_checks and code == 0:
        report["reference"] = checks.run_all(grid, cfg.analysis.decay_radii)
    report["files"] += _write_tables(report, out)
    if cfg.output.director_maps:
        report["files"] += sorted(f.name for f in out.glob("director_map_*.csv"))
    draw = cfg.output.figures if figures is None else figures
    if draw and report["stages"]:
        from .plotting import render_figures
        report["files"] += render_figures(report, out)
    with open(out / "report.json", "w") as fh:
        json.dump(_jsonable(report), fh, indent=1, allow_nan=True)
    return report, code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj

"""Pass/fail judgement of a run report against the acceptance thresholds.

Every criterion reads only the report, so ``verify`` is deterministic and
needs no recomputation. Missing measurements count as failures.
"""

from dataclasses import dataclass

import numpy as np

HEDGEHOG_TOL = 0.03
CONSTANT_TOL = 1e-6
GRADIENT_TOL = 1e-5
MONOTONE_SLACK = 0.01
RATIO_RANGE = (0.35, 0.65)
DIAMETER_SLACK_CELLS = 3.0
DEGREE_SLACK = 0.05
DECAY_ZERO = 1e-6
INVARIANT_TOL = 1e-10
PROCRUSTES_TOL = 1e-8


class SchemaError(ValueError):
    pass


@dataclass
class Result:
    key: int
    name: str
    passed: bool
    measured: str
    expected: str

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.key:2d} {self.name}: measured {self.measured}; expected {self.expected}"


def _fmt(xs):
    return "[" + ", ".join("nan" if x is None else f"{x:.4g}" for x in xs) + "]"


def check_schema(report):
    if not isinstance(report, dict) or not report:
        raise SchemaError("report is empty or not an object")
    for key in ("schema", "config", "material", "grid", "stages"):
        if key not in report:
            raise SchemaError(f"report lacks '{key}'")
    if not str(report["schema"]).startswith("ldgdefect-report/"):
        raise SchemaError(f"unknown schema {report['schema']!r}")
    if not isinstance(report["stages"], list):
        raise SchemaError("'stages' must be a list")


def _ref(report, key):
    ref = report.get("reference") or {}
    return ref.get(key)


def c1(report):
    blk = _ref(report, "hedgehog_ratio")
    if not blk:
        return Result(1, "hedgehog energy ratio", False, "not measured", "")
    errs = [r["corrected"] / r["target"] - 1.0 for r in blk["rows"]]
    ok = all(abs(e) <= HEDGEHOG_TOL for e in errs)
    return Result(1, "hedgehog energy ratio", ok, "rel. errors " + _fmt(errs),
                  f"|err| <= {HEDGEHOG_TOL} vs 8 pi s_plus^2")


def c2(report):
    blk = _ref(report, "bulk_constants")
    if not blk:
        return Result(2, "s_plus and offset", False, "not measured", "")
    d = [abs(blk["s_plus"] - 1.5), abs(blk["c_offset"] - 0.4375),
         abs(blk["s_plus"] - blk["scan_s_plus"]), abs(blk["c_offset"] - blk["scan_c_offset"])]
    ok = all(x <= CONSTANT_TOL for x in d)
    return Result(2, "s_plus and offset", ok,
                  f"s_plus={blk['s_plus']:.9g} (scan {blk['scan_s_plus']:.9g}), "
                  f"C={blk['c_offset']:.9g} (scan {blk['scan_c_offset']:.9g})",
                  f"1.5 and 0.4375 within {CONSTANT_TOL}")


def c3(report):
    blk = _ref(report, "gradient")
    if not blk:
        return Result(3, "gradient exactness", False, "not measured", "")
    e = blk["max_rel_error"]
    return Result(3, "gradient exactness", e < GRADIENT_TOL, f"max rel. error {e:.3g}",
                  f"< {GRADIENT_TOL}")


def _stages(report):
    return report["stages"]


def c4(report):
    st = _stages(report)
    pairs = [(s["energy"]["minimizer"]["total"], s["energy"]["competitor"]["total"]) for s in st]
    ok = bool(pairs) and all(a <= b for a, b in pairs)
    meas = ", ".join(f"eps={s['eps']:g}: {a:.5g} vs {b:.5g}" for s, (a, b) in zip(st, pairs))
    return Result(4, "competitor inequality", ok, meas or "no stages", "E(minimizer) <= E(sampled boundary map)")


def monotone_violations(values):
    """(count, worst relative size) of decreases in a sequence."""
    v = np.asarray(values, dtype=float)
    drops = [(v[i] - v[i + 1]) / abs(v[i]) for i in range(len(v) - 1) if v[i + 1] < v[i]]
    return len(drops), max(drops, default=0.0)


def c5(report):
    ok = bool(_stages(report))
    parts = []
    for s in _stages(report):
        vals = [r["ratio"] for r in s["ball_ratio"]]
        if any(v is None for v in vals) or len(vals) < 2:
            ok = False
            parts.append(f"eps={s['eps']:g}: incomplete")
            continue
        n, worst = monotone_violations(vals)
        ok &= n <= 1 and worst <= MONOTONE_SLACK
        parts.append(f"eps={s['eps']:g}: {n} drops (max {worst:.3g})")
    return Result(5, "ball-ratio monotonicity", ok, "; ".join(parts) or "no stages",
                  f"<= 1 drop of relative size <= {MONOTONE_SLACK}")


def _half_row(rows, frac=0.5):
    for r in rows:
        if abs(r["fraction"] - frac) < 1e-12:
            return r
    return None


def c6(report):
    st = _stages(report)
    h = report["grid"]["h"]
    diam, ok, gaps = [], len(st) >= 2, []
    for s in st:
        row = _half_row(s["core_diameter"])
        if row is None:
            return Result(6, "core scaling", False, "delta fraction 0.5 missing", "")
        diam.append(row["diameter"])
        pred = _half_row((s.get("radial") or {}).get("predicted_diameter", []))
        if pred is None:
            ok = False
            gaps.append(None)
        else:
            gaps.append(abs(pred["predicted"] - row["diameter"]) / h)
    ratios = [b / a if a > 0 else np.inf for a, b in zip(diam, diam[1:])]
    ok &= all(RATIO_RANGE[0] <= r <= RATIO_RANGE[1] for r in ratios)
    ok &= all(g is not None and g <= DIAMETER_SLACK_CELLS for g in gaps)
    return Result(6, "core scaling", ok,
                  f"diameters {_fmt(diam)}, ratios {_fmt(ratios)}, |radial - 3D|/h {_fmt(gaps)}",
                  f"ratios in {list(RATIO_RANGE)}, gap <= {DIAMETER_SLACK_CELLS} h")


def c7(report):
    ok = bool(_stages(report))
    raws = []
    for s in _stages(report):
        for r in s["degrees"]:
            raw = r.get("raw")
            raws.append(raw)
            ok &= raw is not None and r.get("degree") == 1 and abs(abs(raw) - 1.0) <= DEGREE_SLACK
    const = _ref(report, "constant_degree")
    ok &= const is not None and abs(const) <= DEGREE_SLACK
    return Result(7, "degree", ok, f"raw degrees {_fmt(raws)}, constant map {const}",
                  "1 on every sphere, 0 for a constant map")


def c8(report):
    sups = [s["annulus"]["sup"] for s in _stages(report)]
    ok = len(sups) >= 2 and None not in sups and all(b < a for a, b in zip(sups, sups[1:]))
    return Result(8, "annulus convergence", ok, "sup deviations " + _fmt(sups),
                  "strictly decreasing as eps decreases")


def _finest(report):
    st = _stages(report)
    return min(st, key=lambda s: s["eps"]) if st else None


def c9(report):
    s = _finest(report)
    if s is None:
        return Result(9, "inner/outer matching", False, "no stages", "")
    fits = sorted(s["blowup"].get("fits", []), key=lambda r: r["radius"])
    res = [f.get("residual") for f in fits]
    ok = len(res) >= 2 and None not in res and all(b < a for a, b in zip(res, res[1:]))
    matched = fits[-1].get("matched_deviation") if fits else None
    ann = s["annulus"]["sup"]
    ok &= matched is not None and ann is not None and matched < ann
    return Result(9, "inner/outer matching", ok,
                  f"eps={s['eps']:g}: residuals {_fmt(res)}, matched deviation "
                  f"{_fmt([matched])} vs annulus {_fmt([ann])}",
                  "decreasing residuals, matched < annulus")


def c10(report):
    s = _finest(report)
    vals = [r["value"] for r in s["decay"]] if s else []
    ok = len(vals) >= 3 and None not in vals and all(b <= a for a, b in zip(vals, vals[1:]))
    ref = _ref(report, "hedgehog_decay") or []
    phi = [r["value"] for r in ref]
    ok &= bool(phi) and all(v < DECAY_ZERO for v in phi)
    eps = f"eps={s['eps']:g}: " if s else ""
    return Result(10, "radial-derivative decay", ok,
                  f"{eps}minimizer {_fmt(vals)}, sampled hedgehog {_fmt(phi)}",
                  f"nonincreasing over >= 3 levels; hedgehog < {DECAY_ZERO}")


def c11(report):
    blk = _ref(report, "invariants")
    if not blk:
        return Result(11, "invariant suites", False, "not measured", "")
    ok = (blk["conjugation"] <= INVARIANT_TOL and blk["beta_min"] >= 0.0 and blk["beta_max"] <= 1.0
          and blk["projection_idempotence"] <= INVARIANT_TOL and blk["reconstruction"] < INVARIANT_TOL
          and blk["procrustes"] < PROCRUSTES_TOL)
    meas = (f"{blk['cases']} cases: conj {blk['conjugation']:.2g}, beta in "
            f"[{blk['beta_min']:.3g}, {blk['beta_max']:.3g}], idem {blk['projection_idempotence']:.2g}, "
            f"recon {blk['reconstruction']:.2g}, procrustes {blk['procrustes']:.2g}")
    return Result(11, "invariant suites", ok, meas,
                  f"<= {INVARIANT_TOL} (procrustes < {PROCRUSTES_TOL}), beta in [0, 1]")


ALL = (c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11)


def evaluate(report):
    check_schema(report)
    out = []
    for i, fn in enumerate(ALL, start=1):
        try:
            out.append(fn(report))
        except (KeyError, TypeError, IndexError) as exc:
            out.append(Result(i, fn.__name__, False, f"malformed entry ({exc!r})", ""))
    return out

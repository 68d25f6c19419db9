"""PNG figures for a run report. Imported only when figures are requested."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, out, name):
    fig.tight_layout()
    fig.savefig(out / name, dpi=110)
    plt.close(fig)
    return name


def render_figures(report, out):
    """Write the standard figures into ``out``; returns the file names."""
    stages = report["stages"]
    eps = np.array([s["eps"] for s in stages])
    files = []

    fig, ax = plt.subplots(figsize=(5, 3.6))
    for s in stages:
        rows = [(r["R"], r["ratio"]) for r in s["ball_ratio"] if r["ratio"] is not None]
        if rows:
            R, v = np.array(rows).T
            ax.plot(R, v, "o-", label=f"eps={s['eps']:g}")
    s_plus = report["material"]["s_plus"]
    ax.axhline(8 * np.pi * s_plus**2, color="k", lw=0.8, ls="--", label="8 pi s+^2")
    ax.set_xlabel("R")
    ax.set_ylabel("E(B_R) / R")
    ax.legend(fontsize=8)
    files.append(_save(fig, out, "ball_ratio.png"))

    sup = np.array([np.nan if s["annulus"]["sup"] is None else s["annulus"]["sup"] for s in stages])
    diam = [[r["diameter"] for r in s["core_diameter"]] for s in stages]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.4))
    a1.loglog(eps, sup, "o-")
    a1.set_xlabel("eps")
    a1.set_ylabel("annulus sup |Q - Q*|")
    for j, r in enumerate(stages[0]["core_diameter"]):
        a2.loglog(eps, [d[j] for d in diam], "o-", label=f"delta={r['delta']:.3g}")
    a2.set_xlabel("eps")
    a2.set_ylabel("core diameter")
    a2.legend(fontsize=8)
    files.append(_save(fig, out, "convergence.png"))

    fig, ax = plt.subplots(figsize=(5, 3.6))
    for s in stages:
        hist = np.array(s["solve"]["history"], dtype=float)
        if len(hist) > 1:
            ax.plot(hist[:, 0], hist[:, 1] - hist[-1, 1] + 1e-12, label=f"eps={s['eps']:g}")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("E - E_final")
    ax.legend(fontsize=8)
    files.append(_save(fig, out, "energy_history.png"))

    fig, ax = plt.subplots(figsize=(5, 3.6))
    for s in stages:
        rows = [(f["radius"], f["residual"]) for f in s["blowup"].get("fits", [])
                if f.get("residual") is not None]
        if rows:
            R, v = np.array(rows).T
            ax.plot(R, v, "o-", label=f"eps={s['eps']:g}")
    ax.set_xlabel("blow-up radius / eps")
    ax.set_ylabel("tangent-fit residual")
    ax.legend(fontsize=8)
    files.append(_save(fig, out, "tangent_fit.png"))

    profiles = sorted(out.glob("profile_*.csv"))
    if profiles:
        fig, ax = plt.subplots(figsize=(5, 3.6))
        for path in profiles:
            r, h = np.loadtxt(path, delimiter=",", skiprows=1, unpack=True)
            ax.plot(r, h, label=path.stem.removeprefix("profile_"))
        ax.set_xlabel("r")
        ax.set_ylabel("h(r)")
        ax.legend(fontsize=8)
        files.append(_save(fig, out, "profiles.png"))
    return files

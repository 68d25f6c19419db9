"""Descent minimisation of the discrete energy under Dirichlet data.

Spectral (Barzilai-Borwein) steps with Armijo backtracking, so the accepted
energy sequence never increases. Energy changes are accumulated from
per-node differences rather than by subtracting two large totals, which
keeps the monotonicity test meaningful down to round-off of the change.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import energy
from ._kernels import terms_and_gradient
from .field import save_snapshot

log = logging.getLogger(__name__)


class NonFiniteEnergy(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-4
    armijo: float = 1e-4
    max_backtracks: int = 40
    step_min: float = 1e-12
    step_max: float = 1e12
    seed: int = 0
    history_every: int = 10
    checkpoint_every: int = 0
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class SolveReport:
    iterations: int
    energy: energy.EnergyBreakdown
    grad_norm: float
    converged: bool
    eps: float
    history: list = field(default_factory=list)

    def as_dict(self):
        return {
            "eps": self.eps,
            "iterations": self.iterations,
            "energy": self.energy.as_dict(),
            "grad_norm": self.grad_norm,
            "converged": self.converged,
            "history": [[int(i), float(e)] for i, e in self.history],
        }


def _check_finite(terms, fld, values=None):
    if not np.all(np.isfinite(terms)):
        # blame a node holding a non-finite value if there is one; otherwise the
        # first node whose energy term overflowed
        v = fld.values if values is None else values
        bad = ~np.all(np.isfinite(v), axis=-1)
        if not bad.any():
            bad = ~np.isfinite(terms)
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        pos = fld.grid.positions()[idx]
        raise NonFiniteEnergy(f"non-finite energy at node {idx} (x={tuple(np.round(pos, 6).tolist())})")


def density_grad_norm(grad, h):
    """Sup over nodes of the per-node gradient norm in density units."""
    return float(np.sqrt(np.max(np.sum(grad * grad, axis=-1)))) / h**3


def perturb(fld, amplitude, seed=0):
    """Random interior perturbation for exploratory initialisation."""
    rng = np.random.default_rng(seed)
    out = fld.copy()
    noise = amplitude * rng.standard_normal(out.values.shape)
    noise[out.boundary_mask] = 0.0
    out.values += noise
    return out


def _evaluate(x, fld, p):
    terms = np.empty(x.shape[:3])
    grad = np.empty_like(x)
    terms_and_gradient(x, fld.boundary_mask, fld.grid.h, 1.0 / p.eps**2,
                       p.a2, p.b2, p.c2, p.c_offset, terms, grad, True)
    return terms, grad


def minimize(fld, p, cfg=SolverConfig()):
    """Minimise the discrete energy in place; Dirichlet nodes are untouched."""
    h = fld.grid.h
    x = np.ascontiguousarray(fld.values)
    fld.values = x
    terms, g = _evaluate(x, fld, p)
    _check_finite(terms, fld)
    e_tot = float(np.sum(terms))
    gnorm = density_grad_norm(g, h)
    # initial step from the elastic stiffness 12h and bulk curvature
    alpha = 1.0 / (12.0 * h + h**3 / p.eps**2 * 4.0 * (p.a2 + p.b2 + p.c2))
    history = [(0, e_tot)]
    it = 0
    while gnorm > cfg.grad_tol and it < cfg.max_iters:
        # gradients vanish on Dirichlet nodes, so whole-array sums are free-node sums
        gg = float(np.sum(g * g))
        accepted = False
        for _ in range(cfg.max_backtracks):
            trial = x - alpha * g
            t_terms, g_new = _evaluate(trial, fld, p)
            _check_finite(t_terms, fld, trial)
            de = float(np.sum(t_terms - terms))
            if de <= -cfg.armijo * alpha * gg:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            log.info("line search stalled at iteration %d (grad %.3e)", it, gnorm)
            break
        it += 1
        s = trial - x
        y = g_new - g
        sy = float(np.sum(s * y))
        # alternate the two BB step lengths; fall back on doubling if curvature is negative
        if sy > 0:
            alpha = float(np.sum(s * s)) / sy if it % 2 else sy / float(np.sum(y * y))
        else:
            alpha *= 2.0
        alpha = min(max(alpha, cfg.step_min), cfg.step_max)
        x[...] = trial
        terms = t_terms
        g = g_new
        e_tot += de
        gnorm = density_grad_norm(g, h)
        if it % cfg.history_every == 0:
            history.append((it, e_tot))
        if cfg.checkpoint_every and cfg.checkpoint_path and it % cfg.checkpoint_every == 0:
            save_snapshot(fld, cfg.checkpoint_path)
    if history[-1][0] != it:
        history.append((it, e_tot))
    final = energy.total_energy(fld, p)
    return SolveReport(it, final, gnorm, gnorm <= cfg.grad_tol, p.eps, history)


def continuation_ladder(fld, params_list, cfg=SolverConfig()):
    """Minimise for each eps in turn, warm-starting from the previous stage."""
    eps = [p.eps for p in params_list]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError(f"eps ladder must be strictly decreasing, got {eps}")
    return continuation(fld, params_list, cfg)


def continuation(fld, params_list, cfg=SolverConfig()):
    """Like ``continuation_ladder`` but without the ordering check."""
    reports = []
    for p in params_list:
        try:
            reports.append(minimize(fld, p, cfg))
        except NonFiniteEnergy as exc:
            exc.partial_reports = reports
            raise
    return reports

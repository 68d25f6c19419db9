import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from ldgdefect import energy, qtensor as qt
from ldgdefect.field import GridSpec, constant_field, hedgehog_field, load_snapshot, rotated_hedgehog, sample
from ldgdefect.material import MaterialParams
from ldgdefect.radial import solve_profile
from ldgdefect.solver import (NonFiniteEnergy, SolverConfig, continuation, continuation_ladder,
                              minimize, perturb)

S = 1.5
EZ = np.array([0.0, 0.0, 1.0])


def hedgehog_problem(n=16, eps=0.2):
    p = MaterialParams(eps=eps)
    return sample(GridSpec(n_cells=n), lambda x: hedgehog_field(x, p.s_plus), ball_radius=1.0), p


def test_constant_minimum_needs_no_steps():
    fld = sample(GridSpec(n_cells=8), constant_field(qt.uniaxial(EZ, S)))
    before = fld.values.copy()
    rep = minimize(fld, MaterialParams())
    assert rep.iterations == 0 and rep.converged
    np.testing.assert_array_equal(fld.values, before)


def test_small_minimizer(small_minimizer):
    fld, p, rep = small_minimizer
    assert rep.converged
    hist = [e for _, e in rep.history]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    phi = sample(fld.grid, lambda x: hedgehog_field(x, S), ball_radius=1.0)
    np.testing.assert_array_equal(fld.values[fld.boundary_mask], phi.values[phi.boundary_mask])
    assert rep.energy.total <= energy.total_energy(phi, p).total
    assert rep.energy.total == pytest.approx(energy.total_energy(fld, p).total, rel=1e-12)
    assert rep.grad_norm <= 1e-5


def test_deterministic():
    a, p = hedgehog_problem()
    b, _ = hedgehog_problem()
    cfg = SolverConfig(max_iters=50)
    minimize(a, p, cfg)
    minimize(b, p, cfg)
    np.testing.assert_array_equal(a.values, b.values)


def test_unconverged_report():
    fld, p = hedgehog_problem()
    rep = minimize(fld, p, SolverConfig(max_iters=1))
    assert rep.iterations == 1 and not rep.converged


def test_non_finite_names_node():
    fld, p = hedgehog_problem(n=8)
    fld.values[3, 4, 5, 0] = np.inf
    with pytest.raises(NonFiniteEnergy, match=r"\(3, 4, 5\)"):
        minimize(fld, p)


def test_random_init_is_seeded():
    fld, _ = hedgehog_problem(n=8)
    a, b = perturb(fld, 0.1, seed=4), perturb(fld, 0.1, seed=4)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.values[fld.boundary_mask], fld.values[fld.boundary_mask])


def test_checkpoint(tmp_path):
    fld, p = hedgehog_problem(n=8)
    path = tmp_path / "ck.npz"
    minimize(fld, p, SolverConfig(max_iters=10, checkpoint_every=5, checkpoint_path=str(path)))
    assert load_snapshot(path).values.shape == fld.values.shape


def test_continuation():
    a, p = hedgehog_problem()
    b, _ = hedgehog_problem()
    single = minimize(a, p)
    (ladder,) = continuation_ladder(b, [p])
    np.testing.assert_array_equal(a.values, b.values)
    assert ladder.energy == single.energy
    again = continuation(b, [p, p])
    assert again[1].iterations <= 5
    with pytest.raises(ValueError):
        continuation_ladder(b, [p, p])


def test_ladder_stages_converge():
    fld, p = hedgehog_problem(n=24)
    reps = continuation_ladder(fld, [p.with_eps(e) for e in (0.2, 0.1, 0.05)])
    assert all(r.converged and np.isfinite(r.energy.total) for r in reps)


def test_partial_reports_on_failure():
    fld, p = hedgehog_problem(n=8)
    fld.values[2, 2, 2, 1] = np.nan
    with pytest.raises(NonFiniteEnergy) as info:
        continuation(fld, [p])
    assert info.value.partial_reports == []


def test_frame_equivariance():
    rot = Rotation.from_euler("zyx", [0.4, -0.9, 1.7]).as_matrix()
    base, p = hedgehog_problem()
    turned = sample(base.grid, rotated_hedgehog(rot, S), ball_radius=1.0)
    cfg = SolverConfig(grad_tol=1e-7)
    minimize(base, p, cfg)
    minimize(turned, p, cfg)
    np.testing.assert_allclose(turned.values, qt.conjugate(base.values, rot), atol=1e-5)


def test_slab_reproduces_planar_profile():
    """Field varying along x with a fixed director: the lattice problem reduces to the 1D BVP."""
    p = MaterialParams(eps=0.2)
    g = GridSpec(n_cells=32)
    x = g.axis(0)
    prof = solve_profile(p, x[-1] - x[0], mesh=x - x[0], far_field=False, planar=True)
    u = np.interp(x, x[0] + prof.r, prof.h)

    def slab(pos):
        ramp = np.interp(pos[..., 0], x, u)
        return qt.uniaxial(np.broadcast_to(EZ, pos.shape), ramp)

    fld = sample(g, slab)
    interior = ~fld.boundary_mask
    fld.values[interior] = qt.uniaxial(EZ, 0.5 * S)  # start away from the answer
    rep = minimize(fld, p, SolverConfig(grad_tol=1e-6))
    assert rep.converged
    ref = slab(g.positions())
    assert np.max(np.linalg.norm(fld.values - ref, axis=-1)) < 1e-3

import numpy as np
import pytest

from ldgdefect import qtensor as qt
from ldgdefect.field import (BlowupSpec, GridSpec, OutOfDomain, QField, constant_field,
                             dirichlet_mask, extract_blowup, hedgehog_field, interpolate,
                             load_snapshot, rotated_hedgehog, sample, save_snapshot)

S = 1.5


def test_grid_geometry():
    g = GridSpec(center=(0.5, 0, -1), half_width=2.0, n_cells=8)
    assert g.h == 0.5
    np.testing.assert_allclose(g.axis(0), 0.5 + 0.5 * (np.arange(8) + 0.5 - 4))
    assert g.positions().shape == (8, 8, 8, 3)
    with pytest.raises(ValueError):
        GridSpec(n_cells=4)


def test_sample_constant_and_mask():
    q0 = qt.uniaxial(np.array([0.0, 0.6, 0.8]), S)
    fld = sample(GridSpec(n_cells=8), constant_field(q0))
    assert np.all(fld.values == q0)
    m = fld.boundary_mask
    assert m[0].all() and m[-1].all() and m[:, :, 0].all()
    assert not m[1:-1, 1:-1, 1:-1].any()


def test_ball_mask():
    g = GridSpec(n_cells=16)
    m = dirichlet_mask(g, 1.0)
    r = np.linalg.norm(g.positions(), axis=-1)
    assert np.all(m[r >= 1.0])
    assert not np.any(m[1:-1, 1:-1, 1:-1][r[1:-1, 1:-1, 1:-1] < 1.0])


def test_hedgehog_examples():
    np.testing.assert_allclose(qt.to_matrix(hedgehog_field(np.array([0, 0, 2.0]), S)),
                               np.diag([-0.5, -0.5, 1.0]), atol=1e-15)
    np.testing.assert_array_equal(hedgehog_field(np.zeros(3), S), np.zeros(5))
    fld = sample(GridSpec(n_cells=9), lambda x: hedgehog_field(x, S))
    np.testing.assert_array_equal(fld.values[4, 4, 4], np.zeros(5))


def test_hedgehog_gradient_norm():
    # |grad Phi|^2 = 4 s^2 / r^2 = 36 at r = 0.5, by central differences
    x = np.array([0.3, -0.24, 0.32])
    x *= 0.5 / np.linalg.norm(x)
    d = 1e-5
    total = 0.0
    for a in range(3):
        e = np.zeros(3)
        e[a] = d
        g = (hedgehog_field(x + e, S) - hedgehog_field(x - e, S)) / (2 * d)
        total += np.sum(g * g)
    assert total == pytest.approx(36.0, rel=1e-8)


def test_interpolate_nodes_and_midpoints(rng):
    g = GridSpec(n_cells=8)
    fld = QField(g, rng.standard_normal(g.shape + (5,)), dirichlet_mask(g))
    pos = g.positions()
    np.testing.assert_allclose(interpolate(fld, pos), fld.values, atol=1e-14)
    mid = 0.5 * (pos[2, 3, 4] + pos[3, 3, 4])
    np.testing.assert_allclose(interpolate(fld, mid), 0.5 * (fld.values[2, 3, 4] + fld.values[3, 3, 4]),
                               atol=1e-14)


def test_interpolate_affine_exact(rng):
    b = rng.standard_normal(5)
    c = rng.standard_normal(5)
    fld = sample(GridSpec(n_cells=10), lambda x: x[..., :1] * b + c)
    pts = rng.uniform(-0.85, 0.85, (200, 3))
    np.testing.assert_allclose(interpolate(fld, pts), pts[:, :1] * b + c, atol=1e-12)


def test_interpolate_out_of_domain():
    fld = sample(GridSpec(n_cells=8), constant_field(np.zeros(5)))
    with pytest.raises(OutOfDomain):
        interpolate(fld, np.array([0.0, 0.0, 0.95]))


def test_blowup_identity(rng):
    g = GridSpec(n_cells=8)
    fld = QField(g, rng.standard_normal(g.shape + (5,)), dirichlet_mask(g))
    out = extract_blowup(fld, BlowupSpec((0, 0, 0), 1.0, g))
    np.testing.assert_allclose(out.values, fld.values, atol=1e-12)
    assert out.boundary_mask[0].all()


def test_blowup_hedgehog_scale_invariant():
    src = sample(GridSpec(n_cells=32), lambda x: hedgehog_field(x, S))
    tgt = GridSpec(half_width=1.0, n_cells=16)
    out = extract_blowup(src, BlowupSpec((0, 0, 0), 0.5, tgt))
    ref = sample(tgt, lambda x: hedgehog_field(x, S)).values
    # trilinear error of Phi on the source grid at distance >= 3 source cells
    r = np.linalg.norm(tgt.positions(), axis=-1) * 0.5
    far = r > 3 * src.grid.h
    assert np.max(np.linalg.norm(out.values - ref, axis=-1)[far]) < 0.15
    exact = extract_blowup(src, BlowupSpec((0, 0, 0), 1.0, src.grid))
    np.testing.assert_allclose(exact.values, src.values, atol=1e-12)


def test_blowup_linear_profile():
    ez = np.array([0.0, 0.0, 1.0])
    src = sample(GridSpec(n_cells=32), lambda x: qt.uniaxial(np.broadcast_to(ez, x.shape),
                                                              x[..., 2] + 2.0))
    tgt = GridSpec(n_cells=8)
    out = extract_blowup(src, BlowupSpec((0, 0, 0), 0.5, tgt))
    y = tgt.positions()
    ref = qt.uniaxial(np.broadcast_to(ez, y.shape), 0.5 * y[..., 2] + 2.0)
    np.testing.assert_allclose(out.values, ref, atol=1e-12)


def test_blowup_names_corner():
    src = sample(GridSpec(n_cells=8), constant_field(np.zeros(5)))
    with pytest.raises(OutOfDomain, match="blow-up corner"):
        extract_blowup(src, BlowupSpec((0.5, 0, 0), 1.0, GridSpec(n_cells=8)))


def test_rotated_hedgehog_is_conjugate():
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    x = np.array([[0.3, 0.1, -0.4], [0.0, 0.2, 0.7]])
    np.testing.assert_allclose(rotated_hedgehog(rot, S)(x),
                               qt.conjugate(hedgehog_field(x, S), rot), atol=1e-14)


@pytest.mark.parametrize("suffix", [".csv", ".npz"])
def test_snapshot_round_trip(tmp_path, rng, suffix):
    g = GridSpec(center=(0.1, 0.0, -0.2), half_width=0.7, n_cells=8)
    fld = QField(g, rng.standard_normal(g.shape + (5,)), dirichlet_mask(g, 0.6), 0.6)
    path = tmp_path / f"snap{suffix}"
    save_snapshot(fld, path)
    back = load_snapshot(path)
    assert back.grid == g
    assert back.ball_radius == 0.6
    np.testing.assert_array_equal(back.values, fld.values)
    np.testing.assert_array_equal(back.boundary_mask, fld.boundary_mask)


def test_csv_layout(tmp_path):
    g = GridSpec(n_cells=8)
    fld = sample(g, constant_field(np.arange(5.0)))
    path = tmp_path / "f.csv"
    save_snapshot(fld, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# basis:")
    header = [ln for ln in lines if ln.startswith("# i,")][0]
    assert header == "# i,j,k,x,y,z,q1,q2,q3,q4,q5"
    rows = [ln for ln in lines if not ln.startswith("#")]
    assert rows[0].startswith("0,0,0,") and rows[1].startswith("0,0,1,")

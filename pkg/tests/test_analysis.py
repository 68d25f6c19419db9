import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from ldgdefect import analysis as an, qtensor as qt
from ldgdefect.field import GridSpec, constant_field, hedgehog_field, rotated_hedgehog, sample
from ldgdefect.material import MaterialParams
from ldgdefect.radial import lift_profile, solve_profile
from ldgdefect.sphere import edges, icosphere, signed_solid_angle

S = 1.5
EZ = np.array([0.0, 0.0, 1.0])
ROT = Rotation.from_euler("zxz", [0.7, 1.9, -0.4]).as_matrix()


@pytest.fixture(scope="module")
def phi():
    return sample(GridSpec(n_cells=32), lambda x: hedgehog_field(x, S))


@pytest.fixture(scope="module")
def const():
    return sample(GridSpec(n_cells=16), constant_field(qt.uniaxial(np.array([0.0, 0.6, 0.8]), S)))


def test_icosphere():
    v, f, w = icosphere(4)
    assert len(v) == 2562 and len(f) == 5120
    assert np.sum(w) == pytest.approx(4 * np.pi, rel=1e-12)
    assert len(edges(f)) == 7680
    omega = signed_solid_angle(v[f[:, 0]], v[f[:, 1]], v[f[:, 2]])
    assert np.all(omega > 0)
    assert np.sum(omega) == pytest.approx(4 * np.pi, rel=1e-12)


def test_locate_core_hedgehog():
    fld = sample(GridSpec(n_cells=17), lambda x: hedgehog_field(x, S))
    pos, d = an.locate_core(fld, S)
    np.testing.assert_allclose(pos, 0, atol=1e-15)
    assert d == pytest.approx(S * np.sqrt(2 / 3), rel=1e-12)


def test_locate_core_constant(const):
    pos, d = an.locate_core(const, S)
    assert d < 1e-6
    np.testing.assert_array_equal(pos, const.grid.positions()[0, 0, 0])


def test_locate_core_restricted():
    g = GridSpec(n_cells=17)
    fld = sample(g, lambda x: hedgehog_field(x - np.array([0.5, 0.0, 0.0]), S))
    pos, _ = an.locate_core(fld, S, within=0.3)
    assert np.linalg.norm(pos) <= 0.3


def test_core_diameter_basics(const):
    assert an.core_diameter(const, S, 0.5) == 0.0
    with pytest.raises(ValueError):
        an.core_diameter(const, S, S)


def test_core_diameter_of_lifted_profile():
    p = MaterialParams(eps=0.1)
    prof = solve_profile(p, 2.0)
    g = GridSpec(n_cells=48)
    fld = lift_profile(prof, g)
    sq = np.sqrt(2 / 3)
    diam = []
    for frac in (0.25, 0.5, 0.75):
        d = an.core_diameter(fld, S, frac * S * sq)
        r_star = prof.crossing(S * (1 - frac))
        assert abs(d - 2 * r_star) <= 2 * g.h
        diam.append(d)
    assert diam[0] >= diam[1] >= diam[2]


def test_director_map_hedgehog(phi):
    smap = an.sphere_director_map(phi, np.zeros(3), 0.5)
    assert smap.lift_ok
    sign = np.sign(smap.directors[0] @ smap.sigma[0])
    np.testing.assert_allclose(sign * smap.directors, smap.sigma, atol=0.05)
    np.testing.assert_allclose(np.linalg.norm(smap.directors, axis=1), 1, atol=1e-10)
    e = edges(smap.faces)
    assert np.all(np.einsum("ij,ij->i", smap.directors[e[:, 0]], smap.directors[e[:, 1]]) >= 0)
    assert an.degree(smap) == 1


def test_director_map_constant(const):
    smap = an.sphere_director_map(const, np.zeros(3), 0.5)
    assert smap.lift_ok
    np.testing.assert_allclose(np.abs(smap.directors @ np.array([0.0, 0.6, 0.8])), 1, atol=1e-12)
    assert an.degree(smap) == 0
    with pytest.raises(an.FitUndefined):
        an.tangent_fit(smap)


def test_rotated_hedgehog_map_and_fit():
    fld = sample(GridSpec(n_cells=32), rotated_hedgehog(ROT, S))
    smap = an.sphere_director_map(fld, np.zeros(3), 0.6)
    assert an.degree(smap) == 1
    t, res = an.tangent_fit(smap)
    assert np.linalg.det(t) == pytest.approx(1.0)
    np.testing.assert_allclose(t, ROT, atol=0.02)


def exact_map(rot, level=3, sign=1.0):
    sigma, faces, w = icosphere(level)
    return an.SphereMap(np.zeros(3), 1.0, level, sigma, faces, w, sign * sigma @ rot.T, True)


def test_tangent_fit_exact():
    t, res = an.tangent_fit(exact_map(np.eye(3)))
    np.testing.assert_allclose(t, np.eye(3), atol=1e-12)
    assert res < 1e-10
    for seed in range(50):
        r = Rotation.random(random_state=seed).as_matrix()
        for sign in (1.0, -1.0):
            t, res = an.tangent_fit(exact_map(r, sign=sign))
            assert np.max(np.abs(t - r)) < 1e-8
            assert res < 1e-10


def test_degree_properties():
    r = Rotation.random(random_state=7).as_matrix()
    assert an.degree(exact_map(r)) == 1
    assert an.degree_raw(exact_map(r, sign=-1.0)) == pytest.approx(-an.degree_raw(exact_map(r)))
    assert an.degree(exact_map(r, sign=-1.0)) == 1
    for level in (2, 3):
        assert an.degree(exact_map(r, level=level)) == 1
    reflect = np.diag([1.0, 1.0, -1.0])
    assert an.degree_raw(exact_map(reflect)) == pytest.approx(-1.0)


def test_degree_undefined_on_frustrated_lift():
    smap = exact_map(np.eye(3))
    smap.lift_ok = False
    with pytest.raises(an.DegreeUndefined):
        an.degree(smap)


def test_degree_of_polyhedral_maps_is_integral():
    sigma, faces, w = icosphere(1)
    n = sigma.copy()
    n[:, 2] *= 0.2  # flattened but still degree 1
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert an.degree_raw(an.SphereMap(np.zeros(3), 1.0, 1, sigma, faces, w, n, True)) == pytest.approx(1.0)
    cap = sigma + 1.5 * EZ  # image misses the south pole
    cap /= np.linalg.norm(cap, axis=1, keepdims=True)
    assert an.degree_raw(an.SphereMap(np.zeros(3), 1.0, 1, sigma, faces, w, cap, True)) == pytest.approx(0.0, abs=1e-12)
    bad = sigma.copy()
    bad[3] = 0.0  # a zero director breaks the closed-surface sum
    with pytest.raises(an.DegreeUndefined, match="not within"):
        an.degree(an.SphereMap(np.zeros(3), 1.0, 1, sigma, faces, w, bad, True))
    bad[3] = np.nan
    with pytest.raises(an.DegreeUndefined, match="not finite"):
        an.degree(an.SphereMap(np.zeros(3), 1.0, 1, sigma, faces, w, bad, True))


def test_map_leaves_neighborhood():
    zero = sample(GridSpec(n_cells=8), constant_field(np.zeros(5)))
    with pytest.raises(an.MapLeavesNeighborhood, match="vertex 0"):
        an.sphere_director_map(zero, np.zeros(3), 0.3, level=1)


def test_lift_reports_frustration():
    sigma, faces, _ = icosphere(1)
    n = np.tile(EZ, (len(sigma), 1))
    n[5] = np.array([1.0, 0.0, 0.0])
    n[6] = -np.array([0.0, 0.0, 1.0])
    lifted, bad = an.lift_directors(n, edges(faces))
    assert bad == []  # signs alone are always fixable on the BFS tree
    assert np.all(lifted[6] == EZ)


def test_annulus(phi):
    ref = an.hedgehog_reference(S)
    assert an.annulus_sup_deviation(phi, ref, 0.3, 0.8) == pytest.approx(0.0, abs=1e-14)
    pert = np.array([0.01, -0.02, 0.0, 0.03, 0.0])
    shifted = phi.copy()
    shifted.values += pert
    assert an.annulus_sup_deviation(shifted, ref, 0.3, 0.8) == pytest.approx(np.linalg.norm(pert), rel=1e-10)
    with pytest.raises(ValueError):
        an.annulus_sup_deviation(phi, ref, 0.5 * phi.grid.h, 0.8)
    with pytest.raises(ValueError):
        an.annulus_sup_deviation(phi, ref, 0.5, 0.5001)


def test_drift(phi):
    # the hedgehog is 0-homogeneous: only interpolation error remains, O(h^2)
    fine = sample(GridSpec(n_cells=64), lambda x: hedgehog_field(x, S))
    coarse = an.dyadic_drift(phi, np.zeros(3), 0.2, 2)
    assert an.dyadic_drift(fine, np.zeros(3), 0.2, 2) < 0.3 * coarse
    g = GridSpec(n_cells=64)
    radial = sample(g, lambda x: qt.uniaxial(np.broadcast_to(EZ, x.shape), np.linalg.norm(x, axis=-1)))
    r0, k = 0.1, 3
    expect = sum(r0 * 2**i for i in range(k)) * np.sqrt(2 / 3) * np.sqrt(4 * np.pi)
    # |x| is not trilinear: interpolation costs O(h^2 / r)
    assert an.dyadic_drift(radial, np.zeros(3), r0, k) == pytest.approx(expect, rel=5e-3)


def test_csv(tmp_path):
    path = tmp_path / "m.csv"
    exact_map(np.eye(3), level=1).to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "vertex_id,x,y,z,nx,ny,nz"
    assert len(lines) == 43


def test_minimizer_core_and_degree(canonical_run):
    report, _, _ = canonical_run
    h = report["grid"]["h"]
    for st in report["stages"]:
        if st["eps"] == 0.1:
            assert np.linalg.norm(st["core"]["center"]) <= 2 * h
        assert [d["degree"] for d in st["degrees"]] == [1, 1]
        diam = [r["diameter"] for r in st["core_diameter"]]
        assert diam == sorted(diam, reverse=True)
        drift = st["drift"]
        if drift and drift["total"] is not None:
            assert drift["total"] >= max(drift["steps"]) - 1e-12

import math

import numpy as np
import pytest

from aimpart import density, grids, partition, proatoms


def test_radial_constant_and_cubic_exact():
    g = grids.build_radial(4, 1.0)
    assert np.sum(g.weights) == pytest.approx(1.0, abs=1e-14)
    g2 = grids.build_radial(4, 2.0)
    assert float(g2.weights @ g2.nodes**3) == pytest.approx(4.0, abs=1e-14)


def test_radial_gaussian_normalization():
    # oracle: int_0^inf 4 pi r^2 zeta_alpha dr = 1, truncated at 10/sqrt(alpha)
    alpha = 0.37
    g = grids.build_radial(100, 10.0 / math.sqrt(alpha))
    zeta = (alpha / math.pi) ** 1.5 * np.exp(-alpha * g.nodes**2)
    val = 4 * math.pi * float(g.weights @ (g.nodes**2 * zeta))
    assert val == pytest.approx(1.0, abs=1e-10)


def test_radial_log_variant():
    g = grids.build_radial(80, 9.0, kind="log")
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] > 0 and g.nodes[-1] < 9.0
    assert np.sum(g.weights) == pytest.approx(9.0, rel=1e-12)
    # nodes cluster toward the origin
    assert g.nodes[len(g.nodes) // 2] < 4.5
    alpha = 1.1
    zeta = (alpha / math.pi) ** 1.5 * np.exp(-alpha * g.nodes**2)
    val = 4 * math.pi * float(g.weights @ (g.nodes**2 * zeta))
    assert val == pytest.approx(1.0, abs=1e-9)


def test_radial_validation():
    with pytest.raises(ValueError):
        grids.build_radial(1, 5.0)
    with pytest.raises(ValueError):
        grids.build_radial(10, -1.0)
    with pytest.raises(ValueError):
        grids.build_radial(10, 5.0, kind="spline")


def test_angular_means():
    for kind, order in [("lebedev", 6), ("lebedev", 110), ("axial", 20)]:
        ang = grids.build_angular(order, kind)
        one = np.ones(len(ang.weights))
        assert float(one @ ang.weights) == pytest.approx(1.0, abs=1e-13)
        z = ang.points[:, 2]
        assert abs(float(z @ ang.weights)) < 1e-13
        y20ish = 0.5 * (3 * z**2 - 1)
        assert abs(float(y20ish @ ang.weights)) < 1e-13


def test_spherical_average_offcenter_gaussian():
    # oracle: <exp(-a|r sigma - d ez|^2)>_sphere = exp(-a(r^2+d^2)) sinh(2ard)/(2ard)
    a, d, r = 0.8, 0.9, 1.7
    expected = math.exp(-a * (r**2 + d**2)) * math.sinh(2 * a * r * d) / (2 * a * r * d)
    for kind, order in [("lebedev", 194), ("axial", 60)]:
        ang = grids.build_angular(order, kind)
        rel = r * ang.points - np.array([0.0, 0.0, d])
        vals = np.exp(-a * np.sum(rel**2, axis=-1))
        avg = grids.spherical_average(vals, ang)
        assert avg == pytest.approx(expected, rel=1e-10), kind


def test_spherical_average_cross_method():
    a, d = 1.3, 0.4
    lab = grids.build_angular(194)
    ax = grids.build_angular(80, "axial")
    for r in [0.5, 1.0, 2.5]:
        vals_l = np.exp(-a * np.sum((r * lab.points - [0, 0, d]) ** 2, axis=-1))
        vals_a = np.exp(-a * np.sum((r * ax.points - [0, 0, d]) ** 2, axis=-1))
        assert grids.spherical_average(vals_l, lab) == pytest.approx(
            grids.spherical_average(vals_a, ax), abs=1e-10)


def test_spherical_average_linearity():
    rng = np.random.default_rng(3)
    ang = grids.build_angular(50)
    f = rng.normal(size=50)
    g = rng.normal(size=50)
    lhs = grids.spherical_average(2.5 * f + 0.3 * g, ang)
    rhs = 2.5 * grids.spherical_average(f, ang) + 0.3 * grids.spherical_average(g, ang)
    assert lhs == pytest.approx(rhs, abs=1e-15)


def test_spherical_average_shape_mismatch():
    ang = grids.build_angular(26)
    with pytest.raises(ValueError):
        grids.spherical_average(np.ones(25), ang)


def test_integrate_atom_gaussian_charge():
    alpha = 0.6
    gs = grids.AtomicGridSet(np.zeros((1, 3)),
                             grids.build_radial(150, 14.0),
                             grids.build_angular(74))
    pts = gs.points_abs(0)
    vals = (alpha / math.pi) ** 1.5 * np.exp(-alpha * np.sum(pts**2, axis=-1))
    assert grids.integrate_atom(gs, 0, vals) == pytest.approx(1.0, abs=1e-8)
    assert grids.integrate_atom(gs, 0, np.zeros_like(vals)) == 0.0
    with pytest.raises(ValueError):
        grids.integrate_atom(gs, 0, vals[:, :-1])


def test_appendix_density_stockholder_total(appendix_density, diatomic_grids):
    rho, positions = appendix_density
    gs = diatomic_grids(positions, nr=300, ns=120)
    gs.sample_density(rho.eval)
    w = proatoms.GaussianExpansion(exponents=(0.3,), coefficients=[1.0])
    shares, _ = partition.stockholder_allocate([w, w], gs)
    total = sum(grids.integrate_atom(gs, a, shares[a]) for a in range(2))
    assert total == pytest.approx(2.0, abs=1e-6)


def test_interpolate_radial_rules():
    nodes = np.array([1.0, 2.0, 4.0])
    values = np.array([3.0, 5.0, 1.0])
    f = lambda r: grids.interpolate_radial(nodes, values, r, rmax=6.0)
    assert f(2.0) == pytest.approx(5.0)              # node is exact
    assert f(1.5) == pytest.approx(4.0)              # midpoint mean
    assert f(0.2) == pytest.approx(3.0)              # constant below first node
    assert f(7.0) == 0.0                             # zero beyond rmax
    assert f(5.0) == pytest.approx(0.5)              # linear decay to zero at rmax
    arr = f(np.array([2.0, 7.0]))
    assert arr[0] == pytest.approx(5.0) and arr[1] == 0.0


def test_gridset_distance_cache(appendix_density, diatomic_grids):
    rho, positions = appendix_density
    gs = diatomic_grids(positions, nr=50, ns=26, angular="lebedev")
    d01 = gs.distances(0, 1)
    pts = gs.points_abs(0)
    direct = np.linalg.norm(pts - positions[1], axis=-1)
    assert np.allclose(d01, direct, atol=1e-13)
    d00 = gs.distances(0, 0)
    assert np.allclose(d00, np.broadcast_to(gs.radial[0].nodes[:, None], d00.shape))

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmlambda import geometry as geo
from tmlambda import optimizer as opt
from tmlambda.errors import NoInteriorMaximum
from tmlambda.zeeman import GyroTensor, lambda_system

from .conftest import PHI_SITES35

ratios = st.floats(0.01, 0.99)


def pair_from_ratios(rg, sg, re, se, gyg=400.0, gye=80.0):
    return GyroTensor.from_ratios(gyg, rg, sg), GyroTensor.from_ratios(gye, re, se, "excited")


def dense_oracle(gg, ge, phi, n=1_000_000):
    """R on a dense grid from the ratio formula for sin(alpha), assuming alpha < 90 deg."""
    t = np.tan(np.linspace(0, math.pi / 2, n + 2)[1:-1])
    c, s = math.cos(phi), math.sin(phi)
    num = t * t * (s * s * (gg.s - ge.s) ** 2 + c * c * (ge.r - gg.r) ** 2) + (c * s * (ge.r * gg.s - gg.r * ge.s)) ** 2
    de2 = (ge.r * c) ** 2 + t * t + (ge.s * s) ** 2
    dg2 = (gg.r * c) ** 2 + t * t + (gg.s * s) ** 2
    sin2 = num / (de2 * dg2)
    cos = np.sqrt(1 - sin2)
    r = (1 - cos) / (1 + cos)
    i = int(np.argmax(r))
    return math.atan(t[i]), float(r[i])


def test_theta_grid():
    g = opt.theta_grid(0, 1, 0.25)
    assert np.allclose(g, [0, 0.25, 0.5, 0.75, 1.0])
    assert opt.theta_grid(1, 0, 0.1).size == 0
    with pytest.raises(ValueError):
        opt.theta_grid(0, 1, 0)
    full = opt.theta_grid(-math.pi / 2, math.pi / 2, math.radians(0.25))
    assert full.size == 721
    assert np.all(np.diff(full) > 0)


def test_scan_bisector_shapes_and_order(theory):
    gg, ge = theory
    scan = opt.scan_bisector(gg, ge, (-0.5, 0.5), 0.05)
    par = opt.scan_bisector(gg, ge, (-0.5, 0.5), 0.05, workers=4)
    assert list(scan.site_classes) == ["site1", "site35"]
    for lab in scan.site_classes:
        a, b = scan.site_classes[lab], par.site_classes[lab]
        assert a.delta_g.shape == scan.theta_grid.shape
        assert np.array_equal(a.branching_ratio, b.branching_ratio, equal_nan=True)
    rows = list(scan.rows())
    assert len(rows) == scan.theta_grid.size and len(rows[0]) == 7


def test_scan_site35_matches_direct_evaluation(theory):
    gg, ge = theory
    scan = opt.scan_bisector(gg, ge, (-1.0, 1.0), 0.1)
    for th, r in zip(scan.theta_grid, scan.site_classes["site35"].branching_ratio):
        bl = geo.to_local(geo.frame(5), geo.bisector_field(th))
        assert r == pytest.approx(lambda_system(gg, ge, bl).branching_ratio, rel=1e-12, abs=1e-15)


def test_scan_site1_zero_at_001(theory):
    # field along local z of site 1: both effective fields along z, R = 0
    gg, ge = theory
    scan = opt.scan_bisector(gg, ge, (0.0, 0.0), 0.1)
    assert scan.site_classes["site1"].branching_ratio[0] == pytest.approx(0, abs=1e-15)


def test_tilt_optimum_xoy_example():
    th, r = opt.tilt_optimum_xoy(0.3, 0.033)
    assert th == pytest.approx(math.sqrt(0.3 * 0.033), rel=1e-12)
    assert r == pytest.approx(0.25188, abs=5e-5)


@settings(max_examples=200)
@given(st.floats(1e-4, 0.05), st.floats(1e-4, 0.05))
def test_xoy_small_ratio_agrees_with_exact(re, rg):
    gg = GyroTensor(rg * 300, 300, 1e-9)
    ge = GyroTensor(re * 70, 70, 1e-9, "excited")
    th0, bound = opt.tilt_optimum_xoy(re, rg)
    exact = opt.r_of_theta(gg, ge, math.atan(th0), 0.0)
    # equality at phi = 0 up to the gz leak
    assert exact == pytest.approx(bound, rel=1e-6, abs=1e-12)


def test_crystal_tilt_and_warning():
    assert opt.crystal_tilt(0.0995) == pytest.approx(0.11489, abs=1e-5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        opt.crystal_tilt(0.29)
    with pytest.warns(UserWarning):
        opt.crystal_tilt(0.31)


def test_sin_alpha_formula_matches_vectors(theory):
    gg, ge = theory
    rng = np.random.default_rng(3)
    for _ in range(200):
        th, phi = rng.uniform(0, math.pi / 2, 2)
        lam = lambda_system(gg, ge, opt.tilt_field(th, phi))
        assert opt.sin_alpha_tilt(gg, ge, th, phi) == pytest.approx(math.sin(lam.alpha_eff), rel=1e-10, abs=1e-14)


def test_theory_optimum_against_dense_oracle(theory):
    gg, ge = theory
    th_star, r_star = opt.numeric_maximize(gg, ge, PHI_SITES35)
    th_o, r_o = dense_oracle(gg, ge, PHI_SITES35)
    assert r_star >= r_o - 1e-12
    assert r_star == pytest.approx(r_o, abs=1e-9)
    assert th_star == pytest.approx(th_o, abs=1e-5)


@pytest.mark.parametrize("phi", [0.0, 0.3, PHI_SITES35, 1.2, math.pi / 2])
def test_numeric_maximize_dense_oracle_various_phi(phi):
    gg, ge = pair_from_ratios(0.05, 0.03, 0.3, 0.1)
    th_star, r_star = opt.numeric_maximize(gg, ge, phi)
    _, r_o = dense_oracle(gg, ge, phi, n=200_000)
    assert r_star >= r_o - 1e-12
    assert r_star - r_o < 1e-6


def test_numeric_maximize_identical_tensors_gives_zero():
    gg = GyroTensor(1.0, 1.0, 1.0)
    ge = GyroTensor(1.0, 1.0, 1.0, "excited")
    th, r = opt.numeric_maximize(gg, ge, 0.4)
    assert r == 0.0


def test_numeric_maximize_untilted_optimum_raises():
    # R decreases from theta = 0 for this pair, so there is no interior maximum
    gg, ge = pair_from_ratios(0.7484, 0.5374, 0.3331, 0.7827)
    with pytest.raises(NoInteriorMaximum):
        opt.numeric_maximize(gg, ge, 0.4763)


def test_numeric_maximize_edge_raises(monkeypatch):
    gg, ge = pair_from_ratios(0.05, 0.03, 0.3, 0.1)
    monkeypatch.setattr(opt, "_r_on_grid", lambda g1, g2, t, phi: np.asarray(t))
    with pytest.raises(NoInteriorMaximum):
        opt.numeric_maximize(gg, ge, 0.3)


def test_requires_positive_gamma_y():
    with pytest.raises(ValueError):
        opt.general_tilt(GyroTensor(1, 0, 1), GyroTensor(1, 2, 1), 0.2)


def test_general_tilt_theory(theory):
    gg, ge = theory
    t = opt.general_tilt(gg, ge, PHI_SITES35)
    assert t.r_max_exact >= t.r_max_bound
    assert t.r_at_theta0 <= t.r_max_exact + 1e-15
    assert math.tan(t.theta0_local) ** 2 == pytest.approx(opt._rho(gg, t.phi) * opt._rho(ge, t.phi), rel=1e-12)


def test_bound_from_splittings_consistent_with_tensor_route(theory):
    gg, ge = theory
    bl = geo.to_local(geo.frame(3), geo.direction("[-1-11]"))
    from tmlambda.zeeman import splitting

    bound, th0 = opt.bound_from_splittings(splitting(gg, bl), splitting(ge, bl), gg.gamma_y, ge.gamma_y)
    t = opt.general_tilt(gg, ge, opt.phi_from_local(bl))
    assert bound == pytest.approx(t.r_max_bound, rel=1e-12)
    assert th0 == pytest.approx(t.theta0_local, rel=1e-12)


def test_phi_from_local():
    bl = geo.to_local(geo.frame(3), geo.direction("[-1-11]"))
    assert opt.phi_from_local(bl) == pytest.approx(PHI_SITES35, abs=1e-12)
    assert opt.phi_from_local([1, 0, 0]) == 0.0
    assert opt.phi_from_local([0, 0, -2]) == pytest.approx(math.pi / 2)


def test_disparity_identity_theory(theory):
    f = opt.disparity_decomposition(*theory, PHI_SITES35)
    assert f.identity_residual < 1e-12
    assert f.F >= 1 and f.A >= 0 and f.C >= 0


@pytest.mark.filterwarnings("ignore::UserWarning")
@settings(max_examples=300, deadline=None)
@given(ratios, ratios, ratios, ratios, st.floats(0.0, math.pi / 2))
def test_disparity_identity_and_bound_property(rg, sg, re, se, phi):
    gg, ge = pair_from_ratios(rg, sg, re, se)
    f = opt.disparity_decomposition(gg, ge, phi)
    assert f.identity_residual < 1e-10
    bound, _ = opt.bound_from_splittings(opt._rho(gg, phi), opt._rho(ge, phi), 1.0, 1.0)
    try:
        _, r_star = opt.numeric_maximize(gg, ge, phi)
    except NoInteriorMaximum:
        # R falls off from theta = 0; its supremum is the untilted limit
        r_star = opt.r_of_theta(gg, ge, 1e-12, phi)
    assert r_star >= bound - 1e-9


@pytest.mark.filterwarnings("ignore::UserWarning")
@settings(max_examples=100, deadline=None)
@given(ratios, ratios, ratios, ratios, st.sampled_from([0.0, math.pi / 2]))
def test_bound_is_tight_on_principal_planes(rg, sg, re, se, phi):
    gg, ge = pair_from_ratios(rg, sg, re, se)
    t = opt.general_tilt(gg, ge, phi)
    assert abs(t.r_max_exact - t.r_max_bound) < 1e-6
    f = opt.disparity_decomposition(gg, ge, phi)
    assert f.C == pytest.approx(0, abs=1e-20)

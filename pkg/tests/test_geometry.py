import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmlambda import geometry as geo

from .conftest import unit_vectors

S3 = math.sqrt(3)


def test_site1_axes():
    f1 = geo.frame(1)
    assert np.allclose(f1.y_axis, np.array([1, 1, 0]) / math.sqrt(2), atol=1e-15)
    assert np.allclose(f1.z_axis, [0, 0, 1])


@pytest.mark.parametrize("fr", geo.site_frames(), ids=lambda f: f"site{f.site_id}")
def test_frames_orthonormal_right_handed(fr):
    m = fr.matrix
    assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
    assert np.allclose(np.cross(fr.x_axis, fr.y_axis), fr.z_axis, atol=1e-12)


def test_dipoles_are_face_diagonals():
    diagonals = {(1, 1, 0), (1, -1, 0), (0, 1, 1), (0, 1, -1), (1, 0, 1), (1, 0, -1)}
    got = set()
    for fr in geo.site_frames():
        v = np.rint(fr.y_axis * math.sqrt(2)).astype(int)
        if v[np.nonzero(v)[0][0]] < 0:
            v = -v
        got.add(tuple(v))
    assert got == diagonals


def test_b001_site1_local_z():
    assert np.allclose(geo.to_local(geo.frame(1), [0, 0, 0.7]), [0, 0, 0.7], atol=1e-15)


def test_bbar_site3_local_magnitudes():
    bl = np.abs(geo.to_local(geo.frame(3), geo.direction("[-1-11]")))
    assert np.allclose(bl, [math.sqrt(2 / 3), 0, 1 / S3], atol=1e-12)


@pytest.mark.parametrize("site", [1, 3, 5])
def test_b111_lies_in_yoz_at_asin_inv_sqrt3(site):
    bl = np.abs(geo.to_local(geo.frame(site), geo.direction("[111]")))
    assert bl[0] == pytest.approx(0, abs=1e-12)
    assert math.atan2(bl[2], bl[1]) == pytest.approx(math.asin(1 / S3), abs=1e-12)


def test_to_local_identity_frame():
    ident = geo.SiteFrame(0, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    assert np.array_equal(geo.to_local(ident, [0.2, -3, 5]), [0.2, -3, 5])


def test_site2_sees_no_y_component_of_111():
    assert geo.to_local(geo.frame(2), geo.direction("[111]"))[1] == pytest.approx(0, abs=1e-15)


@given(st.integers(1, 6), unit_vectors, st.floats(0.01, 100))
def test_to_local_preserves_norm(site, v, scale):
    v = np.asarray(v) * scale
    assert np.linalg.norm(geo.to_local(geo.frame(site), v)) == pytest.approx(np.linalg.norm(v), rel=1e-12)


def test_dipole_projection_111():
    pol = geo.direction("[111]")
    for s in (1, 3, 5):
        # <110>/sqrt2 . [111]/sqrt3 = 2/sqrt6
        assert geo.dipole_projection(geo.frame(s), pol) == pytest.approx(2 / math.sqrt(6), abs=1e-15)
    for s in (2, 4, 6):
        assert geo.dipole_projection(geo.frame(s), pol) == pytest.approx(0, abs=1e-15)


def test_dipole_projection_001_dark_sites():
    pol = geo.direction("[001]")
    assert geo.dipole_projection(geo.frame(1), pol) == 0
    assert geo.dipole_projection(geo.frame(2), pol) == 0


@pytest.mark.parametrize("theta_deg", [-80.0, -49.3, -20.0, 10.0, 33.3, 70.0])
def test_classify_bisector_111(theta_deg):
    b = geo.bisector_field(math.radians(theta_deg))
    cls = geo.classify_sites(b, geo.direction("[111]"))
    assert cls.dark_sites == {2, 4, 6}
    assert set(cls.active_classes) == {frozenset({1}), frozenset({3, 5})}


def test_classify_001_001():
    cls = geo.classify_sites(geo.direction("[001]"), geo.direction("[001]"))
    assert cls.dark_sites == {1, 2}
    assert cls.active_classes == (frozenset({3, 4, 5, 6}),)


def test_classify_111_111():
    cls = geo.classify_sites(geo.direction("[111]"), geo.direction("[111]"))
    assert cls.dark_sites == {2, 4, 6}
    assert cls.active_classes == (frozenset({1, 3, 5}),)


@given(unit_vectors, unit_vectors)
def test_classification_is_partition(b, pol):
    cls = geo.classify_sites(b, pol)
    members = list(cls.dark_sites) + [s for c in cls.active_classes for s in c]
    assert sorted(members) == [1, 2, 3, 4, 5, 6]


def test_od_fraction():
    b = geo.bisector_field(geo.THETA_BAR + 0.09)
    cls = geo.classify_sites(b, geo.direction("[111]"))
    assert cls.od_fraction(cls.class_of(3)) == pytest.approx(2 / 3)
    cls = geo.classify_sites(b, geo.direction("[001]"))
    assert cls.class_of(3) == {3, 5}
    assert cls.od_fraction(cls.class_of(3)) == pytest.approx(1 / 2)


def test_bisector_field():
    assert np.allclose(geo.bisector_field(0.0), [0, 0, 1])
    b = geo.bisector_field(-math.acos(1 / S3))
    assert np.allclose(b, np.array([-1, -1, 1]) / S3, atol=1e-15)
    assert geo.THETA_BAR == pytest.approx(-math.acos(1 / S3), abs=1e-15)
    assert math.degrees(geo.THETA_BAR) == pytest.approx(-54.7356, abs=1e-4)


@given(st.floats(-math.pi, math.pi))
def test_bisector_unit_norm(theta):
    assert np.linalg.norm(geo.bisector_field(theta)) == pytest.approx(1, abs=1e-12)


def test_closed_form_by_matches_projection_and_shifted_sine():
    rng = np.random.default_rng(20)
    thetas = rng.uniform(-math.pi, math.pi, 1000)
    for th in thetas:
        by3 = geo.to_local(geo.frame(3), geo.bisector_field(th))[1]
        by5 = geo.to_local(geo.frame(5), geo.bisector_field(th))[1]
        cf = geo.bisector_by_closed_form(th)
        assert abs(by3 - cf) < 1e-12
        assert abs(by5 - cf) < 1e-12
        assert abs(S3 / 2 * math.sin(th - geo.THETA_BAR) - cf) < 1e-12


@given(st.floats(-math.pi, math.pi))
def test_sites_3_and_5_magnetically_equivalent(theta):
    b = geo.bisector_field(theta)
    l3 = np.abs(geo.to_local(geo.frame(3), b))
    l5 = np.abs(geo.to_local(geo.frame(5), b))
    assert np.allclose(l3, l5, atol=1e-12, rtol=0)


def test_frames_json_roundtrip():
    data = json.loads(geo.frames_json())
    assert [d["site_id"] for d in data] == [1, 2, 3, 4, 5, 6]
    assert np.allclose(data[0]["y_axis"], geo.frame(1).y_axis)


def test_direction_errors():
    with pytest.raises(ValueError):
        geo.direction([0, 0, 0])
    with pytest.raises(ValueError):
        geo.direction("[123]")

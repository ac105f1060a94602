import itertools
import json
import math
from fractions import Fraction

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lattice_billiards.domains import (
    CATALOG_SCHEMA,
    DomainId,
    InvalidInput,
    RationalAngle,
    catalog,
    catalog_json,
    dihedral_angles,
    exact_norm_squared,
    genus,
    geometry,
    get_domain,
    is_integrable,
)
from lattice_billiards.surd import Surd, s3


def test_genus_integrable_polygons():
    assert genus(["1/2"] * 4) == 1
    assert genus(["1/4", "1/2", "1/4"]) == 1
    assert genus(["1/3", "1/3", "1/3"]) == 1
    assert genus(["1/3", "1/6", "1/2"]) == 1


def test_genus_rhombus_is_two():
    assert genus(["1/3", "2/3", "1/3", "2/3"]) == 2
    assert not is_integrable(["1/3", "2/3", "1/3", "2/3"])


def test_genus_reduces_fractions():
    assert genus(["2/4", "3/6", "4/8", "1/2"]) == 1
    assert RationalAngle(2, 6) == RationalAngle(1, 3)


def test_genus_rejects_bad_angle_sum():
    with pytest.raises(InvalidInput):
        genus(["1/3", "1/3", "1/2"])
    with pytest.raises(InvalidInput):
        genus(["1/2", "1/2"])


_angle = st.tuples(st.integers(1, 7), st.integers(1, 12)).filter(lambda a: a[0] < 2 * a[1])


@given(st.lists(_angle, min_size=2, max_size=5))
def test_genus_is_a_positive_integer_when_defined(angles):
    # close the polygon with a final angle so the sum is consistent
    k = len(angles) + 1
    total = sum(Fraction(m, n) for m, n in angles)
    last = (k - 2) - total
    if k < 3 or not 0 < last < 2:
        return
    g = genus(list(angles) + [(last.numerator, last.denominator)])
    assert isinstance(g, int) and g >= 1


def test_catalog_has_all_eight_domains():
    ids = [d.id for d in catalog()]
    assert ids == list(DomainId)
    assert [d.dimension for d in catalog()] == [2, 2, 2, 2, 3, 3, 3, 3]


@pytest.mark.parametrize(
    "domain, volume",
    [
        ("square", 1.0),
        ("right-isosceles", 0.5),
        ("equilateral", 1 / math.sqrt(3)),
        ("hemi-equilateral", 0.5 / math.sqrt(3)),
        ("cube", 1.0),
        ("k-tetra", 2 / 3),
        ("k2-tetra", 1 / 3),
        ("k4-tetra", 1 / 6),
    ],
)
def test_volumes(domain, volume):
    assert get_domain(domain).volume == pytest.approx(volume, rel=1e-12)


def test_tetrahedra_halve_successively():
    k, k2, k4 = (get_domain(d).volume for d in ("k-tetra", "k2-tetra", "k4-tetra"))
    assert k2 == pytest.approx(k / 2) and k4 == pytest.approx(k2 / 2)


def test_k_tetra_dihedral_angles():
    angles = sorted(round(a / math.pi, 9) for a in dihedral_angles("k-tetra").values())
    assert angles == [round(1 / 3, 9)] * 4 + [0.5] * 2


def test_k_tetra_sits_in_side_two_cube():
    v = get_domain("k-tetra").vertex_array
    assert v[:, 0].min() >= -1 and v[:, 0].max() <= 1
    assert v[:, 1:].min() >= 0 and v[:, 1:].max() <= 2


def test_equilateral_is_equilateral():
    v = get_domain("equilateral").vertex_array
    sides = [np.linalg.norm(v[i] - v[(i + 1) % 3]) for i in range(3)]
    assert sides == pytest.approx([2 / math.sqrt(3)] * 3)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_faces_point_inward(spec):
    c = spec.centroid
    assert np.all(spec.normals @ c - spec.offsets > 0)
    for face in spec.faces:
        pts = spec.vertex_array[list(face.vertices)]
        assert np.allclose(pts @ np.asarray(face.normal), face.offset)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_default_start_is_interior(spec):
    x = spec.default_start()
    assert np.all(spec.normals @ x - spec.offsets > 1e-3)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_reflection_is_an_involution_fixing_the_face(spec):
    for i, face in enumerate(spec.faces):
        R, t = spec.reflection(i)
        assert np.allclose(R @ R, np.eye(spec.dimension))
        assert np.allclose(R @ t + t, 0)
        for v in spec.vertex_array[list(face.vertices)]:
            assert np.allclose(R @ v + t, v)


def test_bilinear_matrices_are_symmetric():
    for spec in catalog():
        q = spec.bilinear
        assert all(Fraction(q[i][j]) == Fraction(q[j][i]) for i in range(spec.dimension) for j in range(spec.dimension))


def test_catalog_json_matches_schema():
    doc = json.loads(json.dumps(catalog_json()))
    jsonschema.validate(doc, CATALOG_SCHEMA)
    assert {d["id"] for d in doc} == {d.value for d in DomainId}


def test_geometry_is_exact():
    verts, faces = geometry("equilateral")
    assert verts[2][1] == s3(0, Fraction(2, 3))
    assert len(faces) == 3


def test_domain_parse_aliases():
    assert DomainId.parse("K/4") is DomainId.K4_TETRA
    assert DomainId.parse("hemi") is DomainId.HEMI_EQUILATERAL
    with pytest.raises(InvalidInput):
        DomainId.parse("rhombus")


def test_arity_checked():
    with pytest.raises(InvalidInput):
        get_domain("square").quadratic_form((1, 2, 3))


def test_surd_arithmetic():
    a = s3(1, 1)
    assert a * a == s3(4, 2)
    assert (a / a) == 1
    assert exact_norm_squared((s3(1), s3(0, 1))) == 4
    assert float(Surd(Fraction(1, 2), 1)) == pytest.approx(0.5 + math.sqrt(3))
    assert str(s3(2, -1)) == "2-sqrt3"


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_surd_field_laws(a, b, c, d):
    x, y = s3(a, b), s3(c, d)
    assert x * y == y * x
    assert float(x * y) == pytest.approx(float(x) * float(y), abs=1e-6)
    if y != 0:
        assert (x / y) * y == x

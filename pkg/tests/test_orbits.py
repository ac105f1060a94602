import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_billiards.domains import DomainId, InvalidInput, catalog, get_domain
from lattice_billiards.orbits import (
    TerminalOrbit,
    amplitude_identity_batch,
    amplitude_identity_holds,
    amplitude_squared,
    collision_count,
    degeneracy_csv,
    enumerate_orbits,
    fold_trajectory,
    orbit_vector,
    shooting_angles,
    shooting_tangent,
    table1_rows,
    table_collision_count,
)
from lattice_billiards.raytrace import trace
from lattice_billiards.surd import s3

DOMAINS_2D = [d.id for d in catalog() if d.dimension == 2]


def test_orbit_vector_examples():
    assert orbit_vector("square", (3, 2)) == (6, 4)
    assert orbit_vector("k4-tetra", (1, 1, 1)) == (6, 4, 2)
    assert orbit_vector("square", (1, 0)) == (2, 0)
    assert orbit_vector("equilateral", (1, 2)) == (s3(4), s3(0, 2))


def test_orbit_vector_arity():
    with pytest.raises(InvalidInput):
        orbit_vector("square", (1, 2, 3))


def test_amplitude_squared_examples():
    assert amplitude_squared("square", (1, 1)) == 2
    assert amplitude_squared("equilateral", (1, 2)) == 7
    assert amplitude_squared("k-tetra", (1, 1, 1)) == 20


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_amplitude_identity_small_labels(spec):
    for label in itertools.product(range(1, 6), repeat=spec.dimension):
        assert amplitude_identity_holds(spec, label)


@given(st.sampled_from([DomainId.SQUARE, DomainId.EQUILATERAL]), st.integers(1, 40), st.integers(1, 40))
def test_label_swap_symmetry(domain, l, m):
    assert amplitude_squared(domain, (l, m)) == amplitude_squared(domain, (m, l))


def test_collision_count_examples():
    assert collision_count("square", (3, 2)) == 10
    assert collision_count("equilateral", (1, 3)) == 14
    assert collision_count("equilateral", (3, 1)) == 14
    assert collision_count("hemi-equilateral", (1, 1)) == 16


def test_collision_count_rejects_3d():
    with pytest.raises(InvalidInput):
        collision_count("cube", (1, 1, 1))


def test_right_isosceles_printed_formula_agrees_only_on_edges():
    for l, m in itertools.product(range(1, 6), repeat=2):
        agree = table_collision_count("right-isosceles", (l, m)) == collision_count("right-isosceles", (l, m))
        assert agree == ((l - 1) * (m - 1) == 0)


@pytest.mark.parametrize(
    "label, expected",
    [
        ((1, 1), [(3, 1), (3, 1), (0, 2)]),
        ((1, 2), [(5, 1), (2, 1), (1, 3)]),
        ((2, 3), [(4, 1), (7, 3), (1, 5)]),
    ],
)
def test_shooting_angles(label, expected):
    assert shooting_angles(label) == expected


def test_shooting_angles_need_coprime():
    with pytest.raises(InvalidInput, match="coprime"):
        shooting_angles((2, 4))


def test_fold_square_figure_orbit():
    tr = fold_trajectory("square", (3, 2), (2 / 3, 1 / 3))
    assert tr.closed
    assert tr.bounces == 10
    assert tr.total_length == pytest.approx(2 * math.sqrt(13), rel=1e-12)
    assert tr.amplitude == pytest.approx(math.sqrt(13))
    assert np.allclose(tr.unfolded_end, (2 / 3 + 6, 1 / 3 + 4))


def test_fold_square_unit_label_matches_tracer():
    tr = fold_trajectory("square", (1, 1), (0.5, 0.25))
    assert tr.closed and tr.bounces == 4
    assert tr.total_length == pytest.approx(2 * math.sqrt(2))
    rep = trace("square", (0.5, 0.25), (1, 1), 100)
    assert rep.periodic and rep.collisions == 4
    assert rep.path_length == pytest.approx(tr.total_length)


def test_fold_equilateral_shortest():
    tr = fold_trajectory("equilateral", (1, 1))
    assert tr.closed and tr.bounces == 6
    assert tr.total_length == pytest.approx(2 * math.sqrt(3))


def test_fold_rejects_exterior_start_and_zero_components():
    with pytest.raises(InvalidInput):
        fold_trajectory("square", (1, 1), (1.5, 0.5))
    with pytest.raises(InvalidInput):
        fold_trajectory("square", (1, 0))


def test_fold_terminal_orbit_through_vertex():
    # from the centre along (1,1) the segment runs through the corner (1,1)
    with pytest.raises(TerminalOrbit) as info:
        fold_trajectory("square", (1, 1), (0.5, 0.5))
    assert np.allclose(info.value.point, (1, 1))


@pytest.mark.parametrize("domain", DOMAINS_2D, ids=lambda d: d.value)
def test_bounce_count_matches_formula(domain):
    for label in itertools.product(range(1, 9), repeat=2):
        assert fold_trajectory(domain, label).bounces == collision_count(domain, label), label


def _check_polyline(spec, tr):
    pts = tr.points
    for p in tr.bounce_points:
        gaps = spec.normals @ p - spec.offsets
        assert np.min(np.abs(gaps)) < 1e-9
    for k, face in enumerate(tr.faces):
        d_in = pts[k + 1] - pts[k]
        d_out = pts[k + 2] - pts[k + 1]
        d_in, d_out = d_in / np.linalg.norm(d_in), d_out / np.linalg.norm(d_out)
        n = spec.normals[face]
        assert np.allclose(d_out, d_in - 2 * (d_in @ n) * n, atol=1e-9)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_folded_polyline_is_a_billiard_path(spec):
    for label in itertools.product(range(1, 4), repeat=spec.dimension):
        tr = fold_trajectory(spec, label)
        _check_polyline(spec, tr)
        assert tr.total_length == pytest.approx(2 * tr.amplitude, rel=1e-12)


@settings(max_examples=25)
@given(st.sampled_from(DOMAINS_2D), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_length_and_amplitude_independent_of_start(domain, l, m, seed):
    spec = get_domain(domain)
    rng = np.random.default_rng(seed)
    base = fold_trajectory(spec, (l, m))
    for _ in range(10):
        w = rng.dirichlet(np.ones(len(spec.vertices)))
        start = w @ spec.vertex_array
        try:
            tr = fold_trajectory(spec, (l, m), start)
        except (TerminalOrbit, InvalidInput):
            continue
        assert tr.total_length == pytest.approx(base.total_length, rel=1e-9)
        assert tr.amplitude == base.amplitude


@pytest.mark.parametrize("side", [0, 1, 2])
def test_equilateral_shooting_angles_give_equal_lengths(side):
    spec = get_domain("equilateral")
    start = spec.default_start()
    # angles are measured from a side, turning into the triangle
    v = spec.vertex_array
    along = (v[(side + 1) % 3] - v[side]) / np.linalg.norm(v[(side + 1) % 3] - v[side])
    inward = np.asarray(spec.faces[side].normal)
    for label in [(1, 1), (1, 2), (2, 3), (1, 4), (3, 5), (5, 6)]:
        lengths = []
        for pair in shooting_angles(label):
            theta = math.atan(shooting_tangent(pair))
            rep = trace(spec, start, math.cos(theta) * along + math.sin(theta) * inward, 500)
            assert rep.periodic, (label, pair)
            lengths.append(rep.path_length)
        assert max(lengths) - min(lengths) < 1e-9 * max(lengths)
        assert lengths[0] == pytest.approx(2 * math.sqrt(amplitude_squared(spec, label)))


def test_enumerate_square_small():
    groups = enumerate_orbits("square", 10)
    assert [(g.amplitude_squared, g.labels) for g in groups] == [
        (2, [(1, 1)]),
        (5, [(1, 2), (2, 1)]),
        (8, [(2, 2)]),
        (10, [(1, 3), (3, 1)]),
    ]
    assert not any(g.accidental for g in groups)


def test_accidental_groups():
    sq = {g.amplitude_squared: g for g in enumerate_orbits("square", 65)}
    assert set(sq[50].labels) == {(1, 7), (7, 1), (5, 5)} and sq[50].accidental
    assert {(1, 8), (4, 7)} <= set(sq[65].labels) and sq[65].accidental
    eq = {g.amplitude_squared: g for g in enumerate_orbits("equilateral", 91)}
    assert set(eq[91].labels) == {(5, 6), (6, 5), (1, 9), (9, 1)} and eq[91].accidental


def _brute_groups(form, max_value, bound=40):
    out = {}
    for l, m in itertools.product(range(1, bound), repeat=2):
        v = form(l, m)
        if v <= max_value:
            out.setdefault(v, set()).add((l, m))
    return out


@pytest.mark.parametrize(
    "domain, form",
    [
        ("square", lambda l, m: l * l + m * m),
        ("right-isosceles", lambda l, m: l * l + 2 * l * m + 2 * m * m),
        ("equilateral", lambda l, m: l * l + l * m + m * m),
        ("hemi-equilateral", lambda l, m: l * l + 3 * l * m + 3 * m * m),
    ],
)
def test_enumeration_complete_against_brute_force(domain, form):
    got = {g.amplitude_squared: set(g.labels) for g in enumerate_orbits(domain, 300)}
    assert got == _brute_groups(form, 300)


def test_groups_sorted_and_consistent():
    spec = get_domain("k-tetra")
    groups = enumerate_orbits(spec, 150)
    values = [g.amplitude_squared for g in groups]
    assert values == sorted(values)
    for g in groups:
        assert g.labels == sorted(g.labels)
        assert all(spec.quadratic_form(l) == g.amplitude_squared for l in g.labels)


def test_table1_rows_shape():
    rows = table1_rows(10, max_value=111)
    assert len(rows) == 22
    assert rows[0]["label"] == (1, 1) and rows[-1]["label"] == (1, 10)


def test_degeneracy_csv():
    text = degeneracy_csv(enumerate_orbits("square", 10))
    assert text.splitlines()[0] == "amplitude_squared,multiplicity,accidental,labels"
    assert '10,2,false,"(1,3) (3,1)"' in text


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id.value)
def test_batch_identity_matches_scalar(spec):
    labels = list(itertools.product(range(0, 5), repeat=spec.dimension))
    batch = amplitude_identity_batch(spec, labels)
    assert batch.tolist() == [amplitude_identity_holds(spec, l) for l in labels]


def test_batch_identity_catches_a_wrong_form():
    import dataclasses

    spec = get_domain("equilateral")
    bad = dataclasses.replace(spec, bilinear=((1, 1), (1, 1)))
    assert not amplitude_identity_batch(bad, [(1, 2)]).any()
    assert amplitude_identity_batch(bad, [(0, 0)]).all()


def test_second_angle_for_two_seven_follows_the_pattern():
    # (2m+n, n) gives (11, 7); the pair (11, 2) launches a different, longer orbit
    spec = get_domain("equilateral")
    start = spec.default_start()
    v = spec.vertex_array
    along = (v[1] - v[0]) / np.linalg.norm(v[1] - v[0])
    inward = np.asarray(spec.faces[0].normal)
    assert shooting_angles((2, 7))[1] == (11, 7)
    lengths = {}
    for pair in [(11, 7), (11, 2)]:
        theta = math.atan(shooting_tangent(pair))
        rep = trace(spec, start, math.cos(theta) * along + math.sin(theta) * inward, 500)
        assert rep.periodic
        lengths[pair] = rep.path_length
    assert lengths[(11, 7)] == pytest.approx(2 * math.sqrt(67), rel=1e-9)
    assert lengths[(11, 2)] > 1.4 * lengths[(11, 7)]
